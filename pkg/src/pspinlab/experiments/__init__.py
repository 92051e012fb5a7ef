"""Monte Carlo measurements built on exact ground states."""

from .barycenter import (BarycenterReport, ConditionalOverlapReport, barycenter_estimate,
                         conditional_overlap, default_c)
from .chaos import (DEFAULT_T_GRID, ChaosCurve, ConvexityReport, HermiteFit, chaos_curve,
                    eps_schedule, hermite_fit, log_convexity_report)
from .concentration import SuperconcentrationReport, superconcentration, tail_table
from .landscape import (DEFAULT_EPS_GRID, DEFAULT_H_GRID, FieldCurve, SliceDecay, field_curve,
                        fit_quadratic_decay, populated_eps, slice_decay)
from ._common import Z95
