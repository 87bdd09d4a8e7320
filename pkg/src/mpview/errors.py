"""Exception taxonomy for the whole package.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures to wire codes / exit codes without string matching.
"""
from __future__ import annotations


class MpviewError(Exception):
    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)


# --- slide parsing -----------------------------------------------------------

class BadMagic(MpviewError):
    code = "bad_magic"


class UnsupportedFeature(MpviewError):
    code = "unsupported_feature"


class InconsistentPages(MpviewError):
    code = "inconsistent_pages"


class Truncated(MpviewError):
    code = "truncated"


class ManifestMissing(MpviewError):
    code = "manifest_missing"


class SizeMismatch(MpviewError):
    """Byte length or patch side does not match the declared geometry."""

    code = "size_mismatch"


class DuplicateChannelName(MpviewError):
    code = "duplicate_channel_name"


# --- registry / cache --------------------------------------------------------

class UnknownSlide(MpviewError):
    code = "unknown_slide"


class ChannelOutOfRange(MpviewError):
    code = "channel_out_of_range"


# --- rendering ---------------------------------------------------------------

class TooManyLayers(MpviewError):
    code = "layer_limit"


class DimMismatch(MpviewError):
    code = "dim_mismatch"


class BadFactor(MpviewError):
    code = "bad_factor"


# --- capture -----------------------------------------------------------------

class EmptyImage(MpviewError):
    code = "empty_image"


class EmptyMask(MpviewError):
    code = "no_tissue"


class PatchTooLarge(MpviewError):
    code = "patch_too_large"


class BackendFailure(MpviewError):
    code = "backend_failure"


# --- search engine -----------------------------------------------------------

class EmptySequence(MpviewError):
    code = "empty_sequence"


class EmptyCorpus(MpviewError):
    code = "empty_corpus"


class DimensionMismatch(MpviewError):
    code = "dimension_mismatch"


class EmptyIndex(MpviewError):
    code = "empty_index"


class NoPatches(MpviewError):
    code = "no_tissue"


class IndexNotBuilt(MpviewError):
    code = "index_not_built"


class IndexFileInvalid(MpviewError):
    code = "index_file_invalid"


class EncoderMismatch(MpviewError):
    code = "encoder_mismatch"
