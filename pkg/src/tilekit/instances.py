"""Randomly weighted complete graphs.

Instances are dense upper-triangle weight tables over K_n with i.i.d. edge
weights. Every edge weight is produced by a counter-based generator keyed by
(seed, i, j), so regeneration is bit-for-bit reproducible, independent of
generation order, and sub-instances inherit their weights.

Also implements the quantile coupling Z_e = Ginv(1 - exp(-X_e)) between an
Exp(1) layer and any pseudo-dimension-1 target, and the red-green two-layer
construction min(Exp(t), Exp(1-t)) ~ Exp(1).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, Callable

import numpy as np

__all__ = [
    "Exponential",
    "Uniform01",
    "CustomDistribution",
    "WeightedInstance",
    "RedGreenInstance",
    "sample_instance",
    "couple_instance",
    "red_green_instance",
    "derive_seed",
    "dump_instance",
    "load_instance",
    "parse_distribution",
    "MAX_DENSE_N",
]

# Dense storage refuses beyond this vertex count rather than silently paging.
MAX_DENSE_N = 2048

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; bijective avalanche mixer on uint64 (wraps mod 2^64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _mix64_int(x: int) -> int:
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


def _edge_uniforms(seed: int, codes: np.ndarray) -> np.ndarray:
    """Open-interval (0,1) uniforms keyed by (seed, edge code)."""
    s0 = np.uint64(_mix64_int((seed & _MASK64) ^ 0x5851F42D4C957F2D))
    with np.errstate(over="ignore"):
        z = _mix64(s0 + (codes + np.uint64(1)) * _GAMMA)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _pair_code(i: np.ndarray | int, j: np.ndarray | int) -> np.ndarray | int:
    # canonical code of the unordered pair {i, j}, i < j; independent of n
    return j * (j - 1) // 2 + i


def derive_seed(*parts) -> int:
    """Stable 64-bit seed derived from arbitrary hashable parts.

    Used to split one base seed into independent child streams (per cell,
    per color, per resampled edge); stable across runs and platforms.
    """
    digest = hashlib.blake2b(repr(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class Exponential:
    """Exponential distribution in rate parameterization: mean 1/rate."""

    rate: float = 1.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError("rate must be positive and finite")

    def cdf(self, x):
        return -np.expm1(-self.rate * np.asarray(x, dtype=np.float64))

    def inverse_cdf(self, u):
        return -np.log1p(-np.asarray(u, dtype=np.float64)) / self.rate

    @property
    def label(self) -> str:
        return f"exponential({self.rate:g})"


@dataclass(frozen=True)
class Uniform01:
    """Uniform distribution on (0, 1)."""

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)

    def inverse_cdf(self, u):
        return np.asarray(u, dtype=np.float64)

    @property
    def label(self) -> str:
        return "uniform(0,1)"


@dataclass(frozen=True)
class CustomDistribution:
    """Extension point: any strictly increasing CDF with F(x) = x + o(x).

    The caller supplies vectorized cdf and inverse_cdf callables. Custom
    distributions cannot be written to the binary dump format.
    """

    name: str
    cdf_fn: Callable
    inverse_cdf_fn: Callable

    def cdf(self, x):
        return self.cdf_fn(np.asarray(x, dtype=np.float64))

    def inverse_cdf(self, u):
        return self.inverse_cdf_fn(np.asarray(u, dtype=np.float64))

    @property
    def label(self) -> str:
        return self.name


def parse_distribution(spec: str):
    """Parse a distribution spec string: "exponential", "exp:2.0", "uniform"."""
    name, _, param = spec.strip().partition(":")
    name = name.lower()
    if name in ("exp", "exponential"):
        return Exponential(float(param) if param else 1.0)
    if name in ("uniform", "unif", "u01"):
        if param:
            raise ValueError("uniform takes no parameter")
        return Uniform01()
    raise ValueError(f"unknown distribution {spec!r}")


class WeightedInstance:
    """K_n with positive edge weights stored as a dense upper triangle.

    Weights are indexed canonically: the edge {i, j} with i < j lives at
    position j*(j-1)/2 + i. Instances are immutable after construction and
    safe to share across threads.
    """

    __slots__ = ("n", "weights", "distribution", "seed")

    def __init__(self, n: int, weights: np.ndarray, distribution, seed: int):
        if n < 2:
            raise ValueError("instance needs n >= 2")
        if n > MAX_DENSE_N:
            raise ValueError(f"n={n} exceeds the dense-storage limit {MAX_DENSE_N}")
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (n * (n - 1) // 2,):
            raise ValueError("weight table has wrong length")
        if not np.all(weights > 0):
            raise ValueError("all edge weights must be strictly positive")
        weights.setflags(write=False)
        self.n = n
        self.weights = weights
        self.distribution = distribution
        self.seed = seed

    def edge_index(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("no self-loops")
        if i > j:
            i, j = j, i
        return _pair_code(i, j)

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[self.edge_index(i, j)])

    def edge_pairs(self) -> list[tuple[int, int]]:
        """All edges in canonical (weight-table) order."""
        return [(i, j) for j in range(1, self.n) for i in range(j)]

    def matrix(self) -> np.ndarray:
        """Symmetric n x n weight matrix with +inf on the diagonal."""
        m = np.full((self.n, self.n), np.inf)
        for j in range(1, self.n):
            base = j * (j - 1) // 2
            m[:j, j] = self.weights[base : base + j]
            m[j, :j] = m[:j, j]
        return m

    def scaled(self, factor: float, distribution=None) -> "WeightedInstance":
        """Derived instance with every weight multiplied by factor > 0."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        dist = distribution if distribution is not None else self.distribution
        return WeightedInstance(self.n, self.weights * factor, dist, self.seed)

    def with_weight(self, i: int, j: int, value: float) -> "WeightedInstance":
        """Derived instance with one edge weight replaced."""
        w = self.weights.copy()
        w[self.edge_index(i, j)] = value
        return WeightedInstance(self.n, w, self.distribution, self.seed)

    def resampled_edge(self, i: int, j: int, salt) -> "WeightedInstance":
        """Derived instance with edge {i,j} redrawn from the same distribution."""
        child = derive_seed(self.seed, "resample", salt)
        u = _edge_uniforms(child, np.array([self.edge_index(i, j)], dtype=np.uint64))
        value = float(self.distribution.inverse_cdf(u)[0])
        return self.with_weight(i, j, value)


def sample_instance(n: int, dist, seed: int) -> WeightedInstance:
    """Draw an instance with i.i.d. weights from dist, keyed by (seed, i, j)."""
    if n < 2:
        raise ValueError("instance needs n >= 2")
    if n > MAX_DENSE_N:
        raise ValueError(f"n={n} exceeds the dense-storage limit {MAX_DENSE_N}")
    codes = np.arange(n * (n - 1) // 2, dtype=np.uint64)
    u = _edge_uniforms(seed, codes)
    weights = np.asarray(dist.inverse_cdf(u), dtype=np.float64)
    return WeightedInstance(n, weights, dist, seed)


def couple_instance(base: WeightedInstance, target) -> WeightedInstance:
    """Quantile-couple an Exp(1) instance to a target distribution.

    Per edge, Z_e = target_inverse_cdf(1 - exp(-X_e)); monotone edge by
    edge, so the coupled instance preserves all weight-order comparisons.
    """
    dist = base.distribution
    if not (isinstance(dist, Exponential) and dist.rate == 1.0):
        raise ValueError("coupling base must carry Exp(1) weights")
    if isinstance(target, Exponential) and target.rate == 1.0:
        # identity coupling; bypass the quantile arithmetic so the coupled
        # weights are bit-identical to the base
        return WeightedInstance(base.n, base.weights, target, base.seed)
    quantiles = -np.expm1(-base.weights)
    z = np.asarray(target.inverse_cdf(quantiles), dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("target CDF not invertible at a produced quantile")
    return WeightedInstance(base.n, z, target, base.seed)


@dataclass(frozen=True)
class RedGreenInstance:
    """Two independent exponential layers and their edge-wise minimum.

    green carries Exp(t) weights, red carries Exp(1-t); merged takes the
    cheaper color per edge, whose marginal is exactly Exp(1). green_won
    records which color achieved each minimum.
    """

    green: WeightedInstance
    red: WeightedInstance
    merged: WeightedInstance
    t: float
    green_won: np.ndarray

    def green_unit(self) -> WeightedInstance:
        """Green layer rescaled to Exp(1): t * X for X ~ Exp(t)."""
        return self.green.scaled(self.t, Exponential(1.0))

    def red_unit(self) -> WeightedInstance:
        """Red layer rescaled to Exp(1)."""
        return self.red.scaled(1.0 - self.t, Exponential(1.0))


def red_green_instance(n: int, t: float, seed: int) -> RedGreenInstance:
    """Build the coupled two-layer instance for split parameter t in (0,1)."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    green = sample_instance(n, Exponential(t), derive_seed(seed, "green"))
    red = sample_instance(n, Exponential(1.0 - t), derive_seed(seed, "red"))
    merged_w = np.minimum(green.weights, red.weights)
    merged = WeightedInstance(n, merged_w, Exponential(1.0), seed)
    won = green.weights <= red.weights
    won.setflags(write=False)
    return RedGreenInstance(green=green, red=red, merged=merged, t=t, green_won=won)


_MAGIC = b"TKWI"
_DIST_TAGS = {"exponential": 1, "uniform": 2}


def dump_instance(inst: WeightedInstance, fh: BinaryIO) -> None:
    """Write the binary dump: header (n, tag, param, seed) + LE float64 triangle."""
    if isinstance(inst.distribution, Exponential):
        tag, param = _DIST_TAGS["exponential"], inst.distribution.rate
    elif isinstance(inst.distribution, Uniform01):
        tag, param = _DIST_TAGS["uniform"], 0.0
    else:
        raise ValueError("only exponential/uniform instances can be dumped")
    fh.write(_MAGIC)
    fh.write(struct.pack("<IBdQ", inst.n, tag, param, inst.seed & _MASK64))
    fh.write(inst.weights.astype("<f8").tobytes())


def load_instance(fh: BinaryIO) -> WeightedInstance:
    """Read an instance written by :func:`dump_instance`."""
    magic = fh.read(4)
    if magic != _MAGIC:
        raise ValueError("not an instance dump (bad magic)")
    header = fh.read(struct.calcsize("<IBdQ"))
    n, tag, param, seed = struct.unpack("<IBdQ", header)
    if tag == _DIST_TAGS["exponential"]:
        dist = Exponential(param)
    elif tag == _DIST_TAGS["uniform"]:
        dist = Uniform01()
    else:
        raise ValueError(f"unknown distribution tag {tag}")
    count = n * (n - 1) // 2
    raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise ValueError("truncated weight table")
    weights = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return WeightedInstance(n, weights, dist, seed)
