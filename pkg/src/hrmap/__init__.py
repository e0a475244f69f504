"""Human-robot demonstration alignment, retrieval, retargeting and MixUp tools."""
from .core import ActionFrame, FeatureSequence, Source, Trajectory, compute_gamma, resample, subsample, upsample
from .errors import HrmapError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "ActionFrame",
    "BACKEND",
    "FeatureSequence",
    "HrmapError",
    "Source",
    "Trajectory",
    "compute_gamma",
    "resample",
    "subsample",
    "upsample",
]
