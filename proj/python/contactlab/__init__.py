"""Contact-state classification of 2D block pairs."""

from ._core import (
    DEFAULT_TOLERANCE,
    FEATURE_COUNT,
    Block,
    CalibrationError,
    ContactlabError,
    DimensionMismatch,
    InvalidArgument,
    InvalidBlock,
    OverlapError,
    ParseError,
    TskModel,
    UnlabeledGrid,
    classify_contact,
    generate,
    min_separation,
    penetration_depth,
    subtractive_cluster,
    train_nfis,
    train_som,
)

__all__ = [name for name in dir() if not name.startswith("_")]
