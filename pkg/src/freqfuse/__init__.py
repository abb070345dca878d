"""Gaussian frequency decomposition, token fusion, and hallucination metrics."""

from .encoder import EncoderConfig, patch_tokens
from .fusion import (
    FusionGradients,
    FusionParams,
    FusionTrace,
    fit_demo,
    fuse_backward,
    fuse_sequence,
    fuse_token,
    gradient_check,
    init_params,
)
from .metrics import (
    CaptionRecord,
    ChairReport,
    PopeRecord,
    SynonymTable,
    chair,
    extract_objects,
    pope_f1,
)
from .spectral import (
    AttenuationSpec,
    attenuation_matrix,
    decompose,
    decompose_attenuated,
    dft2d,
    gaussian_masks,
    idft2d,
)

__version__ = "0.1.0"

__all__ = [
    "AttenuationSpec",
    "CaptionRecord",
    "ChairReport",
    "EncoderConfig",
    "FusionGradients",
    "FusionParams",
    "FusionTrace",
    "PopeRecord",
    "SynonymTable",
    "attenuation_matrix",
    "chair",
    "decompose",
    "decompose_attenuated",
    "dft2d",
    "extract_objects",
    "fit_demo",
    "fuse_backward",
    "fuse_sequence",
    "fuse_token",
    "gaussian_masks",
    "gradient_check",
    "idft2d",
    "init_params",
    "patch_tokens",
    "pope_f1",
]
