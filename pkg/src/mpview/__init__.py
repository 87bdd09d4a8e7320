"""mpview: multiplexed pathology slide serving and similar-slide search."""

from .model import ChannelPlane, Modality, SlideImage, SlideMeta
from .store import ChannelCache, SlideRegistry, SlideStore
from .tiff import parse_tiff
from .rawstack import parse_raw_stack, write_raw_stack
from .render import LayerSpec, RgbaImage, apply_threshold, colorize, composite, downsample, normalize8
from .png import encode_png
from .capture import (
    CaptureTransform,
    Patch,
    bounding_box,
    extract_patches,
    map_to_original,
    otsu_threshold,
    preprocess_capture,
    segment_foreground,
)
from .embed import CorpusRecord, EncoderSpec, LatentVector, encode_corpus, encode_patch
from .dtw import dtw
from .index import CentroidIndex, PatchHit, build_index, cosine, load_index, save_index
from .voting import SlideHit, vote
from .engine import ModalityProfile, SearchEngine, batch_correct, build_profile, search_photo
from .config import ApiConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "ApiConfig",
    "CentroidIndex",
    "ChannelCache",
    "ChannelPlane",
    "CaptureTransform",
    "CorpusRecord",
    "EncoderSpec",
    "LatentVector",
    "LayerSpec",
    "Modality",
    "ModalityProfile",
    "Patch",
    "PatchHit",
    "RgbaImage",
    "SearchEngine",
    "SlideHit",
    "SlideImage",
    "SlideMeta",
    "SlideRegistry",
    "SlideStore",
    "apply_threshold",
    "batch_correct",
    "bounding_box",
    "build_index",
    "build_profile",
    "colorize",
    "composite",
    "cosine",
    "downsample",
    "dtw",
    "encode_corpus",
    "encode_patch",
    "encode_png",
    "extract_patches",
    "load_config",
    "load_index",
    "map_to_original",
    "normalize8",
    "otsu_threshold",
    "parse_raw_stack",
    "parse_tiff",
    "preprocess_capture",
    "save_index",
    "search_photo",
    "segment_foreground",
    "vote",
    "write_raw_stack",
]
