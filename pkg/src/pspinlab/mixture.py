"""Mixture coefficients (c_p) and the covariance function xi."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    BadDegree,
    DomainError,
    DuplicateDegree,
    NonPositiveCoefficient,
    NotNormalized,
)

NORM_TOL = 1e-12


@dataclass(frozen=True)
class MixtureSpec:
    """Validated, finite mixture: ``terms`` is a tuple of (p, c_p) sorted by p."""

    terms: tuple[tuple[int, float], ...]

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.terms)

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.terms)

    @property
    def p_max(self) -> int:
        return self.terms[-1][0]

    @property
    def is_even(self) -> bool:
        return all(p % 2 == 0 for p in self.degrees)

    def scales(self, n: int) -> np.ndarray:
        """Per-degree prefactors c_p / N^((p-1)/2)."""
        return np.array([c / n ** ((p - 1) / 2) for p, c in self.terms])

    def __str__(self):
        return ",".join(f"{p}:{c!r}" for p, c in self.terms)


def validate_mixture(raw: Iterable[tuple[int, float]]) -> MixtureSpec:
    """Check a list of (p, c_p) pairs and return a :class:`MixtureSpec`.

    Malformed input is rejected, never renormalized.
    """
    pairs = [(p, c) for p, c in raw]
    if not pairs:
        raise ValueError("mixture must list at least one degree")
    seen = set()
    terms = []
    for p, c in pairs:
        if isinstance(p, float) and p.is_integer():
            p = int(p)
        if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
            raise BadDegree(f"degree {p!r} is not an integer")
        p = int(p)
        if p < 2:
            raise BadDegree(f"degree {p} < 2")
        if p in seen:
            raise DuplicateDegree(f"degree {p} listed twice")
        seen.add(p)
        c = float(c)
        if not math.isfinite(c) or c <= 0:
            raise NonPositiveCoefficient(f"c_{p} = {c} must be positive")
        terms.append((p, c))
    terms.sort()
    total = math.fsum(c * c for _, c in terms)
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"sum of c_p^2 is {total!r}, not 1")
    return MixtureSpec(tuple(terms))


def parse_mixture(text: str) -> MixtureSpec:
    """Parse ``"2:0.6, 3:0.8"`` into a validated spec."""
    pairs = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        p, sep, c = item.partition(":")
        if not sep:
            raise ValueError(f"mixture entry {item!r} is not of the form p:c_p")
        pairs.append((int(p), float(c)))
    return validate_mixture(pairs)


SK = validate_mixture([(2, 1.0)])


def xi(spec: MixtureSpec, s):
    """Evaluate xi(s) = sum_p c_p^2 s^p for scalar or array ``s`` in [-1, 1]."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 1 + NORM_TOL):
        raise DomainError(f"xi is defined on [-1, 1], got {s!r}")
    out = np.zeros_like(s_arr)
    for p, c in spec.terms:
        out = out + c * c * s_arr**p
    if out.ndim == 0:
        return float(out)
    return out
