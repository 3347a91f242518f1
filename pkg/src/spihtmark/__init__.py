"""Non-blind DWT watermarking of grayscale images with SPIHT coefficient selection
and NVF-modulated strength, plus an attack and benchmark harness."""

__version__ = "0.1.0"

from .attacks import AttackSpec, apply_attack
from .codec import EmbedConfig, EmbedPlan, embed, embed_real, extract, regenerate_plan
from .errors import (
    CapacityError,
    DimensionError,
    FormatError,
    PlanError,
    PyramidError,
    SelectionError,
    WatermarkError,
)
from .metrics import correlation, mse, psnr
from .nvf import NvfConfig, QuantMatrix
from .wavelet import HAAR, dwt_forward, dwt_inverse, quantize_to_image

__all__ = [
    "AttackSpec", "apply_attack", "EmbedConfig", "EmbedPlan", "embed", "embed_real", "extract",
    "regenerate_plan", "CapacityError", "DimensionError", "FormatError", "PlanError",
    "PyramidError", "SelectionError", "WatermarkError", "correlation", "mse", "psnr",
    "NvfConfig", "QuantMatrix", "HAAR", "dwt_forward", "dwt_inverse", "quantize_to_image",
]
