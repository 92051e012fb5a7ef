"""Exact ground states, disorder chaos and related measurements for mixed p-spin glasses."""

__version__ = "0.1.0"

from .energy import FlipEngine, energy, engine_flip, engine_new
from .errors import *  # noqa: F401,F403
from .mixture import SK, MixtureSpec, parse_mixture, validate_mixture, xi
from .montecarlo import EstimatorConfig, SummaryStats, derive_seed, run_estimator, summarize
from .solve import (
    GroundState,
    MagnetizationProfile,
    anneal,
    field_max,
    ground_state_exact,
    magnetization_profile,
    slice_max,
    threshold_max,
)
from .tensor import (
    TensorStack,
    featurize,
    gauge_transform,
    inner,
    load_stack,
    ou_couple,
    sample_disorder,
    save_stack,
)
