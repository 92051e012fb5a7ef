"""Dense disorder tensors, the feature map and the stack file format.

A :class:`TensorStack` is an element of the direct sum of (R^N)^{(x)p} over
the degrees of a mixture. The same type represents Gaussian disorder, the
feature vector J(sigma) and empirical barycenters.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    BadMagic,
    CapExceeded,
    ChecksumMismatch,
    ShapeMismatch,
    VersionMismatch,
)
from .mixture import MixtureSpec, validate_mixture
from .montecarlo import derive_seed

ENTRY_CAP = 2**27

MAGIC = b"PSPN"
FORMAT_VERSION = 1


def _offsets(spec: MixtureSpec, n: int) -> np.ndarray:
    sizes = [n**p for p in spec.degrees]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


def check_entry_cap(spec: MixtureSpec, n: int, cap: int = ENTRY_CAP) -> int:
    total = sum(n**p for p in spec.degrees)
    if total > cap:
        raise CapExceeded(f"N={n} with degrees {spec.degrees} needs {total} entries > cap {cap}")
    return total


@dataclass(frozen=True, eq=False)
class TensorStack:
    """Per-degree dense tensors stored back to back in one read-only array."""

    spec: MixtureSpec
    n: int
    data: np.ndarray
    offsets: np.ndarray = field(init=False, repr=False)
    degrees: np.ndarray = field(init=False, repr=False)
    scales: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ShapeMismatch("N must be >= 1")
        offsets = _offsets(self.spec, self.n)
        data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        if data.size != offsets[-1]:
            raise ShapeMismatch(f"expected {offsets[-1]} entries, got {data.size}")
        if not np.all(np.isfinite(data)):
            raise ValueError("tensor entries must be finite")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "degrees", np.array(self.spec.degrees, dtype=np.int64))
        object.__setattr__(self, "scales", self.spec.scales(self.n))

    def block(self, p: int) -> np.ndarray:
        """Degree-``p`` tensor as an N x ... x N view."""
        d = self.spec.degrees.index(p)
        return self.data[self.offsets[d]:self.offsets[d + 1]].reshape((self.n,) * p)

    def __len__(self):
        return self.data.size

    def norm(self) -> float:
        return math.sqrt(inner(self, self))

    def with_data(self, data: np.ndarray) -> "TensorStack":
        return TensorStack(self.spec, self.n, data)


def _check_same(a: TensorStack, b: TensorStack):
    if a.n != b.n or a.spec.degrees != b.spec.degrees:
        raise ShapeMismatch(f"stacks differ: N={a.n}/{b.n}, degrees {a.spec.degrees}/{b.spec.degrees}")


def as_spins(sigma, n: int | None = None) -> np.ndarray:
    """Validate a +-1 vector and return it as float64."""
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if n is not None and s.size != n:
        raise ShapeMismatch(f"spin vector has length {s.size}, expected {n}")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("spin entries must be +1 or -1")
    return s


def sample_disorder(spec: MixtureSpec, n: int, seed: int, cap: int = ENTRY_CAP) -> TensorStack:
    """I.i.d. standard Gaussian stack; degree p draws from stream derive_seed(seed, p)."""
    check_entry_cap(spec, n, cap)
    blocks = [np.random.Generator(np.random.PCG64(derive_seed(seed, p))).standard_normal(n**p)
              for p in spec.degrees]
    return TensorStack(spec, n, np.concatenate(blocks))


def zeros(spec: MixtureSpec, n: int) -> TensorStack:
    return TensorStack(spec, n, np.zeros(sum(n**p for p in spec.degrees)))


def ou_couple(g: TensorStack, g_prime: TensorStack, t: float) -> TensorStack:
    """e^{-t} g + sqrt(1 - e^{-2t}) g'.

    ``g_prime`` must be independent of ``g``; that is the caller's job.
    """
    _check_same(g, g_prime)
    if t < 0:
        raise ValueError("noise time t must be >= 0")
    a = math.exp(-t)
    b = math.sqrt(-math.expm1(-2.0 * t))
    return g.with_data(a * g.data + b * g_prime.data)


def _sign_tensor(eps: np.ndarray, p: int) -> np.ndarray:
    out = eps
    for _ in range(p - 1):
        out = np.multiply.outer(out, eps)
    return out.ravel()


def gauge_transform(g: TensorStack, eps) -> TensorStack:
    """Sign-flip action (eps.g)_{i1..ip} = g_{i1..ip} eps_i1 ... eps_ip.

    Satisfies H(sigma * eps; eps.g) = H(sigma; g) and is an involution.
    """
    e = as_spins(eps, g.n)
    parts = []
    for d, p in enumerate(g.spec.degrees):
        parts.append(g.data[g.offsets[d]:g.offsets[d + 1]] * _sign_tensor(e, p))
    return g.with_data(np.concatenate(parts))


def featurize(spec: MixtureSpec, n: int, sigma, cap: int = ENTRY_CAP) -> TensorStack:
    """Feature vector J(sigma): degree-p block c_p N^{-(p-1)/2} sigma^{(x)p}."""
    check_entry_cap(spec, n, cap)
    s = as_spins(sigma, n)
    scales = spec.scales(n)
    return TensorStack(spec, n, np.concatenate(
        [scales[d] * _sign_tensor(s, p) for d, p in enumerate(spec.degrees)]))


def inner(a: TensorStack, b: TensorStack) -> float:
    """Sum over degrees of entrywise products, in storage order."""
    _check_same(a, b)
    return float(_kernels.stack_inner(a.data, b.data))


def save_stack(g: TensorStack, path) -> None:
    """Write the binary stack format (all integers and floats little-endian).

    magic "PSPN" | version u16 | N u32 | degree count u16 |
    per degree (p u16, c_p f64) | per degree N^p f64 row-major | CRC32 u32 of
    everything after the magic.
    """
    header = struct.pack("<HIH", FORMAT_VERSION, g.n, len(g.spec.terms))
    header += b"".join(struct.pack("<Hd", p, c) for p, c in g.spec.terms)
    payload = header + g.data.astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC + payload + struct.pack("<I", zlib.crc32(payload)))


def load_stack(path) -> TensorStack:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not a stack file")
    if len(raw) < 4 + 8 + 4:
        raise ChecksumMismatch(f"{path}: truncated")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    payload, (crc,) = raw[4:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(payload) != crc:
        raise ChecksumMismatch(f"{path}: CRC mismatch")
    _, n, ndeg = struct.unpack_from("<HIH", payload, 0)
    pos = 8
    terms = []
    for _ in range(ndeg):
        p, c = struct.unpack_from("<Hd", payload, pos)
        terms.append((p, c))
        pos += 10
    spec = validate_mixture(terms)
    data = np.frombuffer(payload, dtype="<f8", offset=pos).astype(np.float64)
    return TensorStack(spec, n, data)
