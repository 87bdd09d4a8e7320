"""Operator entry points: ingest, index, search, serve, bench.

Exit codes: 0 ok, 2 input error, 3 no tissue found in the capture,
4 state error (missing/invalid index).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .capture import DEFAULT_MIN_TISSUE, DEFAULT_PATCH_SIZE, DEFAULT_STRIDE
from .config import load_config
from .embed import EncoderSpec
from .engine import SearchEngine, search_photo
from .errors import (
    EmptyCorpus,
    EmptyMask,
    EncoderMismatch,
    IndexFileInvalid,
    IndexNotBuilt,
    MpviewError,
    NoPatches,
)
from .index import DEFAULT_PROBE, load_index, save_index
from .store import SlideStore

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_TISSUE = 3
EXIT_STATE = 4


def _classify_exit(exc: MpviewError) -> int:
    if isinstance(exc, (EmptyMask, NoPatches)):
        return EXIT_NO_TISSUE
    if isinstance(exc, (IndexNotBuilt, IndexFileInvalid, EncoderMismatch)):
        return EXIT_STATE
    return EXIT_INPUT


def cmd_ingest(args) -> int:
    store = SlideStore()
    rows = []
    failures = []
    for path in args.paths:
        try:
            slide_id = store.ingest(path)
            meta = store.registry.get(slide_id)
            rows.append(
                {
                    "slide_id": slide_id,
                    "path": str(path),
                    "modality": meta.modality.value,
                    "width": meta.width,
                    "height": meta.height,
                    "channels": len(meta.channel_names),
                }
            )
        except (MpviewError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            failures.append({"path": str(path), "error": str(exc)})
    if args.json:
        print(json.dumps({"slides": rows, "errors": failures}, indent=2))
    else:
        for row in rows:
            print(
                f"{row['slide_id']:24s} {row['modality']:9s} "
                f"{row['width']}x{row['height']}  {row['channels']} channels"
            )
        for failure in failures:
            print(f"FAILED {failure['path']}: {failure['error']}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_INPUT


def cmd_index(args) -> int:
    store = SlideStore()
    slide_ids = []
    for path in args.paths:
        try:
            slide_ids.append(store.ingest(path))
        except (MpviewError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            print(f"FAILED {path}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    slides = [store.load_slide(sid) for sid in slide_ids]
    channels = [c for c in (args.channels.split(",") if args.channels else []) if c]
    engine = SearchEngine(
        encoder_spec=EncoderSpec(d=args.dim, seed=args.encoder_seed),
        channels=channels or None,
        patch_size=args.patch_size,
        stride=args.stride,
    )
    try:
        engine.fit(slides, k=args.k, seed=args.seed)
    except EmptyCorpus as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for skip in engine.skipped:
        print(f"warning: {skip.slide_id} has no channel {skip.channel!r}", file=sys.stderr)
    save_index(engine.index, args.out)
    summary = {
        "index_path": args.out,
        "encoder_id": engine.encoder_spec.encoder_id,
        "latents": len(engine.index),
        "k": engine.index.k,
        "channels": engine.channels,
        "slides": len(slides),
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(
            f"indexed {summary['latents']} latents from {summary['slides']} slides "
            f"into {summary['k']} clusters -> {args.out}"
        )
    return EXIT_OK


def cmd_search(args) -> int:
    from PIL import Image, UnidentifiedImageError

    try:
        index = load_index(args.index)
    except (OSError, IndexFileInvalid, EncoderMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATE
    engine = SearchEngine.from_index(index, probe=args.probe)
    try:
        with Image.open(args.image) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = search_photo(
            rgb,
            engine,
            patch_size=args.patch_size,
            stride=args.stride,
            min_tissue=args.min_tissue,
        )
    except MpviewError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _classify_exit(exc)
    if args.json:
        print(json.dumps(result.to_jsonable(), indent=2))
    else:
        print(f"bbox {result.bbox_original}, {result.patch_count} query patches")
        for rank, hit in enumerate(result.hits, start=1):
            votes = ", ".join(f"{ch}={v}" for ch, v in hit.per_channel_votes.items())
            print(f"{rank}. {hit.slide_id:24s} votes={hit.voting_number}  [{votes}]")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config)
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def _bench_dtw() -> float:
    from .dtw import dtw

    rng = np.random.default_rng(1)
    a = rng.standard_normal(64)
    b = rng.standard_normal(64)
    n, start = 0, time.perf_counter()
    while time.perf_counter() - start < 1.0:
        dtw(a, b)
        n += 1
    return n / (time.perf_counter() - start)


def _bench_queries() -> float:
    from .embed import CorpusRecord, LatentVector
    from .index import build_index
    from .model import Modality

    rng = np.random.default_rng(2)
    vectors = rng.standard_normal((5000, 64))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    records = [
        CorpusRecord(
            latent=LatentVector(values=v, modality=Modality.MULTIPLEX, channel_tag="bench"),
            slide_id=f"s{i % 50:03d}",
            origin=(0, 0),
        )
        for i, v in enumerate(vectors)
    ]
    index = build_index(records, EncoderSpec(), seed=0)
    queries = rng.standard_normal((1000, 64))
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)
    start = time.perf_counter()
    for q in queries:
        index.query(q, probe=DEFAULT_PROBE)
    return len(queries) / (time.perf_counter() - start)


def _bench_composite() -> float:
    from .model import ChannelPlane
    from .render import LayerSpec, composite

    rng = np.random.default_rng(3)
    layers = [
        (
            ChannelPlane(rng.integers(0, 256, (2048, 2048), dtype=np.uint8)),
            LayerSpec(channel_index=i, color=(255, 128, 0), threshold=10),
        )
        for i in range(7)
    ]
    start = time.perf_counter()
    composite(layers)
    return (time.perf_counter() - start) * 1000


def cmd_bench(args) -> int:
    report = {
        "dtw_ops_per_s": round(_bench_dtw(), 1),
        "queries_per_s_n5000": round(_bench_queries(), 1),
        "composite_2048_ms": round(_bench_composite(), 2),
    }
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"dtw: {report['dtw_ops_per_s']} ops/s (length-64 pairs)")
        print(f"index queries: {report['queries_per_s_n5000']} /s (N=5000, d=64)")
        print(f"composite 2048x2048, 7 layers: {report['composite_2048_ms']} ms")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpview", description="Multiplexed slide server and search")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and list slides")
    p.add_argument("paths", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="encode slides and build the search index")
    p.add_argument("paths", nargs="+")
    p.add_argument("--channels", default="", help="comma-separated channel names to encode")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="clustering seed")
    p.add_argument("--encoder-seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE)
    p.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="one-shot similar-slide search for a photo")
    p.add_argument("image")
    p.add_argument("--index", required=True)
    p.add_argument("--probe", type=int, default=DEFAULT_PROBE)
    p.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE)
    p.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    p.add_argument("--min-tissue", type=float, default=DEFAULT_MIN_TISSUE)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None, help="JSON config path (or set MPV_CONFIG)")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="timing report")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
