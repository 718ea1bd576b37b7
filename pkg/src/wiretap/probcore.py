"""Exact finite-alphabet probability machinery.

Distributions, channels and dense joint tables, plus the information
measures (entropy, conditional entropy, mutual information), distances
(total variation, KL divergence) and binary-symmetric helpers used by the
rest of the package. All logarithms are base 2.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

SUM_TOL = 1e-12
ZERO_TOL = 1e-15
DEFAULT_SIZE_GUARD = 2**26
SIZE_GUARD_ENV = "WIRETAP_SIZE_GUARD"


class DistributionError(ValueError):
    """A table violates the invariants of a probability law."""


class SizeGuardError(ValueError):
    """A dense table would exceed the enumeration cell limit."""

    def __init__(self, required: int, limit: int, what: str = "table"):
        self.required = int(required)
        self.limit = int(limit)
        super().__init__(
            f"{what} needs {self.required} cells, limit is {self.limit} "
            f"(set {SIZE_GUARD_ENV} to raise it)"
        )


def size_guard() -> int:
    """Current enumeration cell limit, honouring ``WIRETAP_SIZE_GUARD``."""
    raw = os.environ.get(SIZE_GUARD_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SIZE_GUARD
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{SIZE_GUARD_ENV} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{SIZE_GUARD_ENV} must be positive, got {value}")
    return value


def check_size(cells: int, what: str = "table") -> None:
    limit = size_guard()
    if cells > limit:
        raise SizeGuardError(cells, limit, what)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _check_pmf(p: np.ndarray, what: str) -> None:
    if p.size == 0:
        raise DistributionError(f"{what} is empty")
    if not np.all(np.isfinite(p)):
        raise DistributionError(f"{what} has non-finite entries")
    if np.any(p < 0):
        raise DistributionError(f"{what} has negative entries")


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability mass function over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _readonly(self.probs)
        if p.ndim != 1:
            raise DistributionError("distribution must be a vector")
        _check_pmf(p, "distribution")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DistributionError(f"distribution sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, k: int) -> "FiniteDistribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def bernoulli(cls, p: float) -> "FiniteDistribution":
        """``P(1) = p`` on the binary alphabet."""
        if not 0.0 <= p <= 1.0:
            raise DistributionError(f"Bernoulli parameter {p} outside [0, 1]")
        return cls(np.array([1.0 - p, p]))

    @classmethod
    def point(cls, k: int, symbol: int) -> "FiniteDistribution":
        p = np.zeros(k)
        p[symbol] = 1.0
        return cls(p)

    def __repr__(self):
        return f"FiniteDistribution({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix, ``rows[x, y] = P(output=y | input=x)``."""

    rows: np.ndarray

    def __post_init__(self):
        w = _readonly(self.rows)
        if w.ndim != 2:
            raise DistributionError("channel must be a matrix")
        _check_pmf(w, "channel")
        bad = np.abs(w.sum(axis=1) - 1.0) > SUM_TOL
        if np.any(bad):
            raise DistributionError(
                f"channel rows {np.flatnonzero(bad).tolist()} do not sum to 1"
            )
        object.__setattr__(self, "rows", w)

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def row(self, x: int) -> FiniteDistribution:
        return FiniteDistribution(self.rows[x])

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        """Binary symmetric channel with crossover probability ``p``."""
        if not 0.0 <= p <= 1.0:
            raise DistributionError(f"crossover {p} outside [0, 1]")
        return cls(np.array([[1.0 - p, p], [p, 1.0 - p]]))

    @classmethod
    def identity(cls, k: int) -> "Channel":
        return cls(np.eye(k))

    @classmethod
    def constant(cls, input_size: int, output: FiniteDistribution) -> "Channel":
        """Output independent of the input."""
        return cls(np.tile(output.probs, (input_size, 1)))

    def then(self, other: "Channel") -> "Channel":
        """Cascade: feed this channel's output into ``other``."""
        if self.output_size != other.input_size:
            raise DistributionError(
                f"cannot cascade {self.output_size}-ary output into "
                f"{other.input_size}-ary input"
            )
        return Channel(self.rows @ other.rows)

    def power(self, n: int) -> "Channel":
        """Memoryless extension to length-``n`` sequences (row-major order)."""
        check_size((self.input_size * self.output_size) ** n, "channel extension")
        w = np.ones((1, 1))
        for _ in range(n):
            w = np.kron(w, self.rows)
        return Channel(w)

    def output_distribution(self, p: FiniteDistribution) -> FiniteDistribution:
        if p.alphabet_size != self.input_size:
            raise DistributionError("input distribution size does not match channel")
        return FiniteDistribution(p.probs @ self.rows)

    def __repr__(self):
        return f"Channel({self.rows.tolist()})"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense joint pmf; axis ``k`` indexes the ``k``-th random variable."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        check_size(p.size, "joint distribution")
        p = _readonly(p)
        if p.ndim == 0:
            raise DistributionError("joint distribution needs at least one axis")
        _check_pmf(p, "joint distribution")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DistributionError(f"joint distribution sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def ndim(self) -> int:
        return self.probs.ndim

    @classmethod
    def from_distribution(cls, p: FiniteDistribution) -> "JointDistribution":
        return cls(p.probs)

    @classmethod
    def from_channel(cls, p: FiniteDistribution, w: Channel) -> "JointDistribution":
        """Joint law of ``(input, output)``."""
        if p.alphabet_size != w.input_size:
            raise DistributionError("input distribution size does not match channel")
        return cls(p.probs[:, None] * w.rows)

    def extend(self, axis: int, w: Channel) -> "JointDistribution":
        """Append a new last axis drawn from ``w`` given variable ``axis``."""
        axis = self._axis(axis)
        if self.dims[axis] != w.input_size:
            raise DistributionError(
                f"axis {axis} has size {self.dims[axis]}, channel expects {w.input_size}"
            )
        shape = [1] * self.ndim + [w.output_size]
        shape[axis] = w.input_size
        return JointDistribution(self.probs[..., None] * w.rows.reshape(shape))

    def marginal(self, axes: Iterable[int]) -> "JointDistribution":
        """Marginal on ``axes``, laid out in the order given."""
        axes = [self._axis(a) for a in axes]
        if len(set(axes)) != len(axes):
            raise ValueError(f"repeated axes {axes}")
        if not axes:
            raise ValueError("marginal needs at least one axis")
        drop = tuple(a for a in range(self.ndim) if a not in axes)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept = sorted(axes)
        return JointDistribution(np.transpose(m, [kept.index(a) for a in axes]))

    def as_distribution(self) -> FiniteDistribution:
        if self.ndim != 1:
            raise DistributionError("only one-axis joints convert to a distribution")
        return FiniteDistribution(self.probs)

    def _axis(self, a: int) -> int:
        a = int(a)
        if not -self.ndim <= a < self.ndim:
            raise IndexError(f"axis {a} out of range for {self.ndim} variables")
        return a % self.ndim


PmfLike = Union[FiniteDistribution, JointDistribution, np.ndarray, Sequence[float]]


def _as_array(p: PmfLike) -> np.ndarray:
    if isinstance(p, (FiniteDistribution, JointDistribution)):
        return p.probs
    return np.asarray(p, dtype=float)


def _plogp_sum(p: np.ndarray) -> float:
    p = p[p > ZERO_TOL]
    return float(-np.sum(p * np.log2(p)))


def entropy(p: PmfLike) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    return max(_plogp_sum(_as_array(p).ravel()), 0.0)


def _axes(group) -> list[int]:
    if group is None:
        return []
    if isinstance(group, (int, np.integer)):
        return [int(group)]
    return [int(a) for a in group]


def _joint_entropy(joint: JointDistribution, axes: list[int]) -> float:
    if not axes:
        return 0.0
    drop = tuple(a for a in range(joint.ndim) if a not in axes)
    return entropy(joint.probs.sum(axis=drop) if drop else joint.probs)


def conditional_entropy(joint: JointDistribution, target_axis, given_axes=()) -> float:
    """``H(target | given)`` in bits; axes may be ints or sequences of ints."""
    target = [joint._axis(a) for a in _axes(target_axis)]
    given = [joint._axis(a) for a in _axes(given_axes)]
    if not target:
        raise ValueError("target axes are empty")
    if set(target) & set(given):
        raise ValueError(f"target axes {target} overlap given axes {given}")
    h = _joint_entropy(joint, target + given) - _joint_entropy(joint, given)
    return max(h, 0.0)


def mutual_information(joint: JointDistribution, axes_a, axes_b, axes_cond=()) -> float:
    """``I(A; B | C)`` in bits."""
    a = [joint._axis(x) for x in _axes(axes_a)]
    b = [joint._axis(x) for x in _axes(axes_b)]
    c = [joint._axis(x) for x in _axes(axes_cond)]
    if not a or not b:
        raise ValueError("mutual information needs two non-empty axis groups")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError(f"axis groups {a}, {b}, {c} overlap")
    i = (
        _joint_entropy(joint, a + c)
        + _joint_entropy(joint, b + c)
        - _joint_entropy(joint, a + b + c)
        - _joint_entropy(joint, c)
    )
    return max(i, 0.0)


def _check_unit(q: float, name: str) -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"{name}={q} outside [0, 1]")
    return q


def binary_entropy(q: float) -> float:
    q = _check_unit(q, "q")
    if q <= ZERO_TOL or q >= 1.0 - ZERO_TOL:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def bsc_convolve(a: float, b: float) -> float:
    """Crossover probability of two cascaded BSCs, ``a(1-b) + b(1-a)``."""
    a = _check_unit(a, "a")
    b = _check_unit(b, "b")
    return min(max(a * (1.0 - b) + b * (1.0 - a), 0.0), 1.0)


def _same_shape(p: PmfLike, q: PmfLike) -> tuple[np.ndarray, np.ndarray]:
    pa, qa = _as_array(p), _as_array(q)
    if pa.shape != qa.shape:
        raise ValueError(f"dimension mismatch {pa.shape} vs {qa.shape}")
    return pa, qa


def total_variation(p: PmfLike, q: PmfLike) -> float:
    """Half the L1 distance; equals the largest event-probability gap."""
    pa, qa = _same_shape(p, q)
    return float(min(0.5 * np.abs(pa - qa).sum(), 1.0))


def kl_divergence(p: PmfLike, q: PmfLike, base: float = 2.0) -> float:
    """``D(p || q)``; ``math.inf`` when ``p`` is not absolutely continuous."""
    pa, qa = _same_shape(p, q)
    pa, qa = pa.ravel(), qa.ravel()
    support = pa > ZERO_TOL
    if np.any(qa[support] <= ZERO_TOL):
        return math.inf
    d = float(np.sum(pa[support] * np.log(pa[support] / qa[support])))
    return max(d, 0.0) / math.log(base)
