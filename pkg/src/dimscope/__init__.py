"""Intrinsic-dimension estimation with the full correlation integral.

The public surface re-exports the pieces most callers need; the submodules
hold the rest.
"""

from dimscope.baselines import (
    CorrDimFit,
    PcaSpectrum,
    corrdim_estimate,
    gpca_estimate,
    mpca_profile,
    pca_spectrum,
)
from dimscope.correlation import EcdfCurve, empirical_correlation_integral, subsample_curve
from dimscope.data import DataSet, RngHandle, center_and_project, pairwise_distances
from dimscope.errors import (
    DegenerateSampleError,
    DimscopeError,
    DomainError,
    InvalidInputError,
    InvalidSpecError,
    NoReliableScaleError,
    UnfittableCurveError,
)
from dimscope.estimator import EstimatorConfig, FciFit, IdEstimate, estimate_id_global, fit_fci
from dimscope.model import FciParams, fci_cdf, fci_model_value, solid_angle_ratio
from dimscope.multiscale import (
    MultiscaleResult,
    Scale,
    ScaleProfile,
    local_id,
    multiscale_estimate,
    neighborhood,
    scale_profile,
)

__version__ = "0.1.0"

__all__ = [
    "CorrDimFit",
    "DataSet",
    "DegenerateSampleError",
    "DimscopeError",
    "DomainError",
    "EcdfCurve",
    "EstimatorConfig",
    "FciFit",
    "FciParams",
    "IdEstimate",
    "InvalidInputError",
    "InvalidSpecError",
    "MultiscaleResult",
    "NoReliableScaleError",
    "PcaSpectrum",
    "RngHandle",
    "Scale",
    "ScaleProfile",
    "UnfittableCurveError",
    "center_and_project",
    "corrdim_estimate",
    "empirical_correlation_integral",
    "estimate_id_global",
    "fci_cdf",
    "fci_model_value",
    "fit_fci",
    "gpca_estimate",
    "local_id",
    "mpca_profile",
    "multiscale_estimate",
    "neighborhood",
    "pairwise_distances",
    "pca_spectrum",
    "scale_profile",
    "solid_angle_ratio",
    "subsample_curve",
]
