"""HTTP service: slide listing, channel streaming, compositing, photo search.

Every response is built through the two send helpers, which enforce the
per-response transfer cap; raster endpoints additionally precheck a
worst-case PNG size so oversized renders fail fast with 413.  Error bodies
are always JSON {code, message}.
"""
from __future__ import annotations

import io
import math

import numpy as np
from fastapi import FastAPI, Request, UploadFile, File
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError
from starlette.exceptions import HTTPException as StarletteHTTPException

from .capture import OtsuSegmentationBackend
from .config import ApiConfig
from .engine import SearchEngine, search_photo
from .errors import (
    ChannelOutOfRange,
    EmptyMask,
    IndexNotBuilt,
    MpviewError,
    NoPatches,
    TooManyLayers,
    UnknownSlide,
)
from .index import load_index
from .png import encode_png, predicted_png_size
from .render import LayerSpec, MAX_LAYERS, apply_threshold, colorize, composite, downsample, normalize8
from .store import SlideStore


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_status(exc: MpviewError) -> int:
    if isinstance(exc, UnknownSlide):
        return 404
    if isinstance(exc, (EmptyMask, NoPatches)):
        return 422
    if isinstance(exc, IndexNotBuilt):
        return 503
    return 400  # ChannelOutOfRange, TooManyLayers, parser/validation failures


def _parse_color(value: str | None) -> tuple[int, int, int] | None:
    if value is None:
        return None
    v = value.removeprefix("#")
    if len(v) != 6:
        raise ApiError(400, "bad_color", f"color must be 6 hex digits, got {value!r}")
    try:
        return (int(v[0:2], 16), int(v[2:4], 16), int(v[4:6], 16))
    except ValueError:
        raise ApiError(400, "bad_color", f"color must be 6 hex digits, got {value!r}") from None


def _parse_int(value: str, name: str, lo: int | None = None, hi: int | None = None) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ApiError(400, f"bad_{name}", f"{name} must be an integer, got {value!r}") from None
    if (lo is not None and n < lo) or (hi is not None and n > hi):
        raise ApiError(400, f"bad_{name}", f"{name}={n} out of range")
    return n


def create_app(
    config: ApiConfig | None = None,
    store: SlideStore | None = None,
    engine: SearchEngine | None = None,
) -> FastAPI:
    config = config or ApiConfig()
    store = store or SlideStore(cache_budget_bytes=config.cache_budget_bytes)
    for path in config.slides:
        store.ingest(path)
    if engine is None and config.index_path:
        engine = SearchEngine.from_index(
            load_index(config.index_path), probe=config.probe, top_n=config.top_n
        )

    app = FastAPI(title="mpview", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.config = config
    app.state.store = store
    app.state.engine = engine
    app.state.segmenter = OtsuSegmentationBackend()
    cap = config.transfer_cap_bytes

    def send_json(payload: dict | list, status: int = 200, headers: dict | None = None) -> Response:
        response = JSONResponse(payload, status_code=status, headers=headers)
        if len(response.body) > cap and status < 400:
            return JSONResponse(
                {"code": "transfer_cap", "message": "response exceeds transfer cap"}, status_code=413
            )
        return response

    def send_png(data: bytes, headers: dict | None = None) -> Response:
        if len(data) > cap:
            return JSONResponse(
                {"code": "transfer_cap", "message": "response exceeds transfer cap"}, status_code=413
            )
        return Response(content=data, media_type="image/png", headers=headers)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse({"code": exc.code, "message": exc.message}, status_code=exc.status)

    @app.exception_handler(MpviewError)
    async def _domain_error(request: Request, exc: MpviewError):
        return JSONResponse({"code": exc.code, "message": str(exc)}, status_code=_error_status(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            {"code": "http_error", "message": str(exc.detail)}, status_code=exc.status_code
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "bad_request", "message": str(exc)}, status_code=400)

    # -- scale selection ------------------------------------------------

    def resolve_scale(width: int, height: int, channels: int, scale_param: str | None) -> int:
        def predicted(scale: int) -> int:
            return predicted_png_size(math.ceil(width / scale), math.ceil(height / scale), channels)

        if scale_param is not None:
            scale = _parse_int(scale_param, "scale", lo=1)
            if scale & (scale - 1) != 0:
                raise ApiError(400, "bad_scale", f"scale must be a power of two, got {scale}")
            if predicted(scale) > cap:
                raise ApiError(413, "transfer_cap", "requested scale exceeds the transfer cap")
            return scale
        scale = 1
        while predicted(scale) > cap:
            if math.ceil(width / scale) <= 1 and math.ceil(height / scale) <= 1:
                raise ApiError(413, "transfer_cap", "image exceeds the transfer cap at every scale")
            scale *= 2
        return scale

    # -- endpoints --------------------------------------------------------

    @app.get("/api/health")
    def health():
        return send_json(
            {
                "status": "ok",
                "slides": len(store.registry),
                "index_built": app.state.engine is not None and app.state.engine.is_fitted,
                "cache_bytes": store.cache.current_bytes,
            }
        )

    @app.get("/api/slides")
    def slides():
        return send_json(
            [
                {
                    "slide_id": m.slide_id,
                    "modality": m.modality.value,
                    "width": m.width,
                    "height": m.height,
                    "channel_count": len(m.channel_names),
                }
                for m in store.registry.list()
            ]
        )

    @app.get("/api/slides/{slide_id}/channels")
    def channels(slide_id: str):
        return send_json(store.channel_names(slide_id))

    @app.get("/api/slides/{slide_id}/channels/{n}")
    def channel_png(
        slide_id: str,
        n: str,
        color: str | None = None,
        threshold: str = "0",
        scale: str | None = None,
    ):
        meta = store.registry.get(slide_id)
        idx = _parse_int(n, "channel")
        if not 0 <= idx < len(meta.channel_names):
            raise ChannelOutOfRange(f"{slide_id} has {len(meta.channel_names)} channels")
        rgb = _parse_color(color)
        t = _parse_int(threshold, "threshold", lo=0, hi=255)
        n_components = 4 if rgb is not None else 1
        applied_scale = resolve_scale(meta.width, meta.height, n_components, scale)
        fetch = store.get_channel(slide_id, idx)
        plane = apply_threshold(normalize8(downsample(fetch.plane, applied_scale)), t)
        payload = encode_png(colorize(plane, rgb)) if rgb is not None else encode_png(plane)
        headers = {
            "X-Scale": str(applied_scale),
            "X-Plane-Cache": "bypass" if fetch.bypassed else ("hit" if fetch.cache_hit else "miss"),
        }
        return send_png(payload, headers)

    @app.post("/api/render")
    async def render_composite(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "bad_request", "body must be JSON") from None
        if not isinstance(body, dict):
            raise ApiError(400, "bad_request", "body must be a JSON object")
        slide_id = body.get("slide_id")
        layers = body.get("layers")
        if not isinstance(slide_id, str) or not isinstance(layers, list) or not layers:
            raise ApiError(400, "bad_request", "need slide_id and a nonempty layers list")
        if len(layers) > MAX_LAYERS:
            raise TooManyLayers(f"{len(layers)} layers, limit is {MAX_LAYERS}")
        meta = store.registry.get(slide_id)
        specs: list[LayerSpec] = []
        for layer in layers:
            if not isinstance(layer, dict):
                raise ApiError(400, "bad_request", "each layer must be an object")
            idx = _parse_int(str(layer.get("channel", "")), "channel")
            if not 0 <= idx < len(meta.channel_names):
                raise ChannelOutOfRange(f"{slide_id} has {len(meta.channel_names)} channels")
            rgb = _parse_color(str(layer.get("color", "FFFFFF")))
            t = _parse_int(str(layer.get("threshold", 0)), "threshold", lo=0, hi=255)
            specs.append(LayerSpec(channel_index=idx, color=rgb, threshold=t))
        scale_param = body.get("scale")
        applied_scale = resolve_scale(
            meta.width, meta.height, 4, None if scale_param is None else str(scale_param)
        )
        pairs = []
        for spec in specs:
            fetch = store.get_channel(slide_id, spec.channel_index)
            pairs.append((normalize8(downsample(fetch.plane, applied_scale)), spec))
        payload = encode_png(composite(pairs))
        return send_png(payload, {"X-Scale": str(applied_scale)})

    @app.post("/api/search")
    async def search(image: UploadFile = File(...)):
        engine_now = app.state.engine
        if engine_now is None or not engine_now.is_fitted:
            raise IndexNotBuilt("no similarity index loaded")
        raw = await image.read()
        try:
            decoded = Image.open(io.BytesIO(raw)).convert("RGB")
        except (UnidentifiedImageError, OSError, ValueError):
            raise ApiError(400, "bad_image", "capture is not a decodable PNG/JPEG") from None
        result = search_photo(
            np.asarray(decoded, dtype=np.uint8),
            engine_now,
            backend=app.state.segmenter,
            patch_size=config.patch_size,
            stride=config.stride,
            min_tissue=config.min_tissue,
        )
        return send_json(result.to_jsonable())

    if config.static_dir:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
