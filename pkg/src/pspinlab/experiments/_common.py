from __future__ import annotations

from ..mixture import MixtureSpec
from ..montecarlo import derive_seed
from ..tensor import TensorStack, sample_disorder

# one-sided 95% normal quantile, used for "below/ordered at 95% confidence"
Z95 = 1.6448536269514722


def disorder_pair(spec: MixtureSpec, n: int, seed: int) -> tuple[TensorStack, TensorStack]:
    """Independent (g, g') for one Monte Carlo sample."""
    return (sample_disorder(spec, n, derive_seed(seed, 0)),
            sample_disorder(spec, n, derive_seed(seed, 1)))


def disorder(spec: MixtureSpec, n: int, seed: int) -> TensorStack:
    return sample_disorder(spec, n, derive_seed(seed, 0))
