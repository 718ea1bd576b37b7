"""Achievable regions and payoff bounds.

Channel-coding rate pairs for a wiretap broadcast channel, the joint
source-channel inner bounds (plain and with the public-message equivocation
credit), their closed forms for binary symmetric channels under Hamming
distortion, a numerical converse bound, and the four comparison curves of
the Bernoulli-source example.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .payoff import (
    SourceAux,
    ValueMatrix,
    erasure_aux,
    hamming_payoff_fn,
    optimize_secrecy_payoff,
    payoff_given_aux,
    unconditional_payoff,
)
from .probcore import (
    Channel,
    DistributionError,
    FiniteDistribution,
    JointDistribution,
    binary_entropy,
    bsc_convolve,
    entropy,
    mutual_information,
)

# tolerance used when a bound is evaluated on the closure of its region
CLOSURE_TOL = 1e-9

# axes of the joint law built by ChannelAux.joint
V, W, X, Y, Z = range(5)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Source, the two channel marginals and the value function."""

    source: FiniteDistribution
    ch_y: Channel
    ch_z: Channel
    value: ValueMatrix

    def __post_init__(self):
        if self.ch_y.input_size != self.ch_z.input_size:
            raise DistributionError("Bob's and Eve's channels need the same input alphabet")
        if self.value.source_size != self.source.alphabet_size:
            raise DistributionError("value matrix rows must match the source alphabet")

    @property
    def input_size(self) -> int:
        return self.ch_y.input_size

    @classmethod
    def bsc_hamming(cls, p: float, p1: float, p2: float) -> "SystemSpec":
        """Bernoulli(p) source, BSC(p1) to Bob, BSC(p2) to Eve, Hamming payoff."""
        return cls(
            FiniteDistribution.bernoulli(p),
            Channel.bsc(p1),
            Channel.bsc(p2),
            ValueMatrix.hamming(2),
        )


@dataclass(frozen=True, eq=False)
class ChannelAux:
    """Channel-coding auxiliaries ``P_V``, ``P_{W|V}``, ``P_{X|W}``."""

    v_dist: FiniteDistribution
    w_given_v: Channel
    x_given_w: Channel

    def __post_init__(self):
        if self.w_given_v.input_size != self.v_dist.alphabet_size:
            raise DistributionError("P_W|V input size must match |V|")
        if self.x_given_w.input_size != self.w_given_v.output_size:
            raise DistributionError("P_X|W input size must match |W|")

    def joint(self, spec: SystemSpec) -> JointDistribution:
        """Joint law over ``(V, W, X, Y, Z)``."""
        if self.x_given_w.output_size != spec.input_size:
            raise DistributionError("P_X|W output size must match the channel input")
        j = JointDistribution.from_distribution(self.v_dist)
        j = j.extend(V, self.w_given_v).extend(W, self.x_given_w)
        return j.extend(X, spec.ch_y).extend(X, spec.ch_z)

    @classmethod
    def bsc_cascade(cls, gamma: float) -> "ChannelAux":
        """Uniform binary ``V``, ``W`` = ``V`` through BSC(gamma), ``X = W``."""
        return cls(FiniteDistribution.uniform(2), Channel.bsc(gamma), Channel.identity(2))


@dataclass(frozen=True)
class ChannelRates:
    """Mutual informations of a channel auxiliary that the bounds consume."""

    i_vy: float
    i_vz: float
    i_wy: float
    i_wy_given_v: float
    i_wz_given_v: float

    @property
    def secrecy_gap(self) -> float:
        return self.i_wy_given_v - self.i_wz_given_v

    @classmethod
    def of(cls, spec: SystemSpec, aux: ChannelAux) -> "ChannelRates":
        j = aux.joint(spec)
        return cls(
            i_vy=mutual_information(j, V, Y),
            i_vz=mutual_information(j, V, Z),
            i_wy=mutual_information(j, W, Y),
            i_wy_given_v=mutual_information(j, W, Y, V),
            i_wz_given_v=mutual_information(j, W, Z, V),
        )


@dataclass(frozen=True)
class RatePair:
    r_p: float
    r_s: float

    def __post_init__(self):
        if self.r_p < 0 or self.r_s < 0:
            raise ValueError(f"rates must be nonnegative, got ({self.r_p}, {self.r_s})")


@dataclass
class PayoffCurve:
    label: str
    points: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve parameters must be strictly increasing")

    @property
    def parameters(self) -> list[float]:
        return [x for x, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [y for _, y in self.points]


def _check_source_aux(spec: SystemSpec, source_aux: SourceAux) -> None:
    if source_aux.source.alphabet_size != spec.source.alphabet_size or not np.allclose(
        source_aux.source.probs, spec.source.probs, atol=1e-12
    ):
        raise DistributionError("source auxiliary is built on a different source")


def channel_region_contains(spec: SystemSpec, aux: ChannelAux, rates: RatePair) -> bool:
    """Whether ``R_p < I(V;Y)`` and ``R_s < I(W;Y|V) - I(W;Z|V)``."""
    cr = ChannelRates.of(spec, aux)
    return rates.r_p < cr.i_vy and rates.r_s < cr.secrecy_gap


def bsc_secrecy_gap(gamma: float, p1: float, p2: float) -> float:
    """``h(g*p1) - h(g*p2) - h(p1) + h(p2)`` for the BSC cascade auxiliary."""
    h = binary_entropy
    return h(bsc_convolve(gamma, p1)) - h(bsc_convolve(gamma, p2)) - h(p1) + h(p2)


def _check_degraded(p1: float, p2: float) -> None:
    if not (0.0 <= p1 <= 0.5 and 0.0 <= p2 <= 0.5):
        raise ValueError(f"crossovers must lie in [0, 1/2], got p1={p1}, p2={p2}")
    if p1 > p2:
        raise ValueError(f"need p1 <= p2 (Eve's channel degraded), got p1={p1} > p2={p2}")


def bsc_channel_region(p1: float, p2: float, gamma_grid_size: int = 101):
    """Corner points of the BSC wiretap rate region on a uniform gamma grid.

    Returns ``(gammas, corners)`` where ``corners[i]`` is the RatePair
    ``(1 - h(g*p1), h(g*p1) - h(g*p2) - h(p1) + h(p2))``.
    """
    _check_degraded(p1, p2)
    if gamma_grid_size < 2:
        raise ValueError("gamma grid needs at least two points")
    gammas = np.linspace(0.0, 0.5, int(gamma_grid_size))
    corners = []
    for g in gammas:
        rp = max(1.0 - binary_entropy(bsc_convolve(g, p1)), 0.0)
        rs = max(bsc_secrecy_gap(g, p1, p2), 0.0)
        corners.append(RatePair(rp, rs))
    return gammas.tolist(), corners


def _lt(a: float, b: float, closure: bool) -> bool:
    return a <= b + CLOSURE_TOL if closure else a < b


def inner_bound_feasible(
    spec: SystemSpec,
    source_aux: SourceAux,
    ch_aux: ChannelAux,
    closure: bool = False,
    rates: Optional[ChannelRates] = None,
) -> bool:
    """``I(S;U) < I(V;Y)`` and ``H(S|U) < I(W;Y|V) - I(W;Z|V)``.

    With ``closure`` the strict inequalities are relaxed to hold within
    ``CLOSURE_TOL``, i.e. the bound is evaluated on the closure of its region.
    """
    _check_source_aux(spec, source_aux)
    cr = rates or ChannelRates.of(spec, ch_aux)
    equiv = source_aux.equivocation()
    info = max(entropy(spec.source) - equiv, 0.0)
    return _lt(info, cr.i_vy, closure) and _lt(equiv, cr.secrecy_gap, closure)


def inner_bound_payoff(
    spec: SystemSpec, source_aux: SourceAux, ch_aux: ChannelAux, closure: bool = False
) -> Optional[float]:
    """Payoff guaranteed when Eve is handed the public message; ``None`` if infeasible."""
    if not inner_bound_feasible(spec, source_aux, ch_aux, closure):
        return None
    return payoff_given_aux(source_aux, spec.value)


def _alpha(rates: ChannelRates, info: float) -> float:
    num = max(rates.i_vy - rates.i_vz, 0.0)
    if info <= 1e-15:
        return 1.0
    return min(max(num / info, 0.0), 1.0)


def improved_bound_alpha(spec: SystemSpec, source_aux: SourceAux, ch_aux: ChannelAux) -> float:
    """Fraction of the block during which Eve has not resolved the public message.

    ``[I(V;Y) - I(V;Z)]^+ / I(S;U)`` clamped to ``[0, 1]``; 1 when
    ``I(S;U) = 0``.
    """
    return _alpha(ChannelRates.of(spec, ch_aux), source_aux.information())


def improved_bound_evaluate(
    spec: SystemSpec, source_aux: SourceAux, ch_aux: ChannelAux, closure: bool = False
) -> Optional[tuple[float, float]]:
    """``(payoff, alpha)`` of the improved bound, or ``None`` if infeasible."""
    rates = ChannelRates.of(spec, ch_aux)
    if not inner_bound_feasible(spec, source_aux, ch_aux, closure, rates):
        return None
    inner = payoff_given_aux(source_aux, spec.value)
    alpha = _alpha(rates, source_aux.information())
    pmax = unconditional_payoff(spec.source, spec.value)
    return alpha * pmax + (1 - alpha) * inner, alpha


def improved_bound_payoff(
    spec: SystemSpec, source_aux: SourceAux, ch_aux: ChannelAux, closure: bool = False
) -> Optional[float]:
    """``alpha * Pi_max + (1 - alpha) * min_t(u) E[pi(S, t(U))]``; ``None`` if infeasible."""
    res = improved_bound_evaluate(spec, source_aux, ch_aux, closure)
    return None if res is None else res[0]


def solve_gamma(source_entropy: float, p1: float, p2: float, tol: float = 1e-12) -> float:
    """Solve ``H(S) = 1 - h(g*p2) - h(p1) + h(p2)`` for ``g`` in ``[0, 1/2]``.

    The right side decreases in ``g`` from ``1 - h(p1)`` to ``h(p2) - h(p1)``.
    """
    _check_degraded(p1, p2)
    h = binary_entropy
    base = h(p2) - h(p1)

    def resid(g):
        return 1.0 - h(bsc_convolve(g, p2)) + base - source_entropy

    lo, hi = 0.0, 0.5
    if resid(lo) <= 0:
        return lo
    if resid(hi) >= 0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = resid(mid)
        if abs(r) <= tol:
            return mid
        lo, hi = (mid, hi) if r > 0 else (lo, mid)
    return 0.5 * (lo + hi)


def _binary_source(source: FiniteDistribution) -> None:
    if source.alphabet_size != 2:
        raise ValueError("the BSC/Hamming closed form needs a binary source")


def bsc_hamming_payoff(source: FiniteDistribution, p1: float, p2: float) -> Optional[float]:
    """Closed-form inner-bound payoff for BSC(p1)/BSC(p2) and Hamming distortion.

    ``None`` when ``H(S) >= 1 - h(p1)``: the source does not fit through
    Bob's channel.
    """
    _binary_source(source)
    _check_degraded(p1, p2)
    hs = entropy(source)
    h = binary_entropy
    low_edge = h(p2) - h(p1)
    if hs <= low_edge:
        return hamming_payoff_fn(source, hs)
    if hs >= 1.0 - h(p1):
        return None
    gamma = solve_gamma(hs, p1, p2)
    return hamming_payoff_fn(source, max(bsc_secrecy_gap(gamma, p1, p2), 0.0))


def bsc_binding_gamma(source: FiniteDistribution, p1: float, p2: float) -> Optional[float]:
    """Largest usable gamma for the BSC example, ``None`` when infeasible."""
    _binary_source(source)
    _check_degraded(p1, p2)
    hs = entropy(source)
    h = binary_entropy
    if hs <= h(p2) - h(p1):
        return 0.5
    if hs >= 1.0 - h(p1):
        return None
    return solve_gamma(hs, p1, p2)


def bsc_payoff_aux(
    source: FiniteDistribution, p1: float, p2: float, gamma: float
) -> Optional[tuple[SourceAux, ChannelAux]]:
    """Explicit auxiliaries realising the BSC example at a given gamma.

    The secure rate is ``min(gap(gamma), H(S))`` and ``P_{U|S}`` is the
    erasure construction attaining the Hamming closed form at that rate.
    Returns ``None`` when the public rate ``H(S) - R_s`` does not fit under
    ``1 - h(gamma * p1)`` (allowing ``CLOSURE_TOL``).
    """
    hs = entropy(source)
    rs = min(max(bsc_secrecy_gap(gamma, p1, p2), 0.0), hs)
    if hs - rs > 1.0 - binary_entropy(bsc_convolve(gamma, p1)) + CLOSURE_TOL:
        return None
    return erasure_aux(source, rs), ChannelAux.bsc_cascade(gamma)


@dataclass(frozen=True)
class ImprovedBscResult:
    payoff: float
    gamma: float
    alpha: float


def bsc_improved_payoff(
    source: FiniteDistribution,
    p1: float,
    p2: float,
    gamma_grid_size: int = 201,
    closure: bool = False,
) -> Optional[ImprovedBscResult]:
    """Improved bound on the BSC/Hamming example, maximised over the gamma family.

    Every gamma in ``[0, g*]`` (``g*`` the binding gamma of the closed form)
    is evaluated with explicit auxiliaries through ``improved_bound_payoff``
    on the closure of the region; ``g*`` itself is always included. When
    ``H(S) = 1 - h(p1)`` exactly, a value is returned only with ``closure``.
    """
    _binary_source(source)
    g_star = bsc_binding_gamma(source, p1, p2)
    if g_star is None:
        return _improved_at_capacity_edge(source, p1, p2) if closure else None
    spec = SystemSpec(source, Channel.bsc(p1), Channel.bsc(p2), ValueMatrix.hamming(2))
    gammas = np.unique(np.append(np.linspace(0.0, g_star, int(gamma_grid_size)), g_star))
    best = None
    for g in gammas:
        aux = bsc_payoff_aux(source, p1, p2, float(g))
        if aux is None:
            continue
        res = improved_bound_evaluate(spec, aux[0], aux[1], closure=True)
        if res is None:
            continue
        if best is None or res[0] > best.payoff + 1e-15:
            best = ImprovedBscResult(res[0], float(g), res[1])
    return best


def _improved_at_capacity_edge(source, p1, p2):
    # H(S) = 1 - h(p1) exactly: only gamma = 0 remains, on the closure
    hs = entropy(source)
    if abs(hs - (1.0 - binary_entropy(p1))) > CLOSURE_TOL:
        return None
    spec = SystemSpec(source, Channel.bsc(p1), Channel.bsc(p2), ValueMatrix.hamming(2))
    aux = bsc_payoff_aux(source, p1, p2, 0.0)
    if aux is None:
        return None
    res = improved_bound_evaluate(spec, aux[0], aux[1], closure=True)
    if res is None:
        return None
    return ImprovedBscResult(res[0], 0.0, res[1])


def upper_bound_check(
    spec: SystemSpec, source_aux: SourceAux, ch_aux: ChannelAux, payoff: float
) -> bool:
    """Converse constraints for one choice of auxiliaries.

    ``H(S) <= I(W;Y)``, ``H(S|U) <= [I(W;Y|V) - I(W;Z|V)]^+`` and
    ``payoff <= min_t(u) E[pi(S, t(U))]``, each up to ``CLOSURE_TOL``.
    """
    _check_source_aux(spec, source_aux)
    cr = ChannelRates.of(spec, ch_aux)
    return (
        entropy(spec.source) <= cr.i_wy + CLOSURE_TOL
        and source_aux.equivocation() <= max(cr.secrecy_gap, 0.0) + CLOSURE_TOL
        and payoff <= payoff_given_aux(source_aux, spec.value) + CLOSURE_TOL
    )


@dataclass(frozen=True)
class UpperBoundResult:
    payoff: float
    secrecy_gap: float
    source_aux: SourceAux
    ch_aux: ChannelAux


def _rates_batch(pv, wv, xw, wy, wz):
    """Vectorised ``(I(V;Y), I(W;Y), I(W;Y|V) - I(W;Z|V))`` for a batch of auxiliaries."""

    def h(p, axes):
        return -(p * np.log2(np.maximum(p, 1e-300))).sum(axis=axes)

    pvw = pv[:, :, None] * wv  # (b, v, w)
    wy_cond = xw @ wy  # (b, w, y)
    wz_cond = xw @ wz
    pvwy = pvw[..., None] * wy_cond[:, None]  # (b, v, w, y)
    pvwz = pvw[..., None] * wz_cond[:, None]
    pw = pvw.sum(axis=1)
    pwy = pvwy.sum(axis=1)
    py = pwy.sum(axis=1)
    i_wy = h(pw, 1) + h(py, 1) - h(pwy, (1, 2))
    pvy = pvwy.sum(axis=2)
    i_vy = h(pv, 1) + h(py, 1) - h(pvy, (1, 2))

    def cond_mi(pvwo):
        pvo = pvwo.sum(axis=2)
        return h(pvw, (1, 2)) + h(pvo, (1, 2)) - h(pvwo, (1, 2, 3)) - h(pv, 1)

    return i_vy, i_wy, cond_mi(pvwy) - cond_mi(pvwz)


def _random_rows(rng, shape):
    return rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])


def max_secrecy_gap(
    spec: SystemSpec,
    restarts: int = 64,
    iterations: int = 400,
    seed: int = 0,
    aux_size: Optional[int] = None,
    constraint: str = "converse",
) -> Optional[tuple[float, ChannelAux]]:
    """Largest secrecy gap ``I(W;Y|V) - I(W;Z|V)`` found under a rate constraint.

    ``constraint="converse"`` requires ``I(W;Y) >= H(S)``;
    ``constraint="inner"`` requires ``I(V;Y) + gap >= H(S)``, i.e. that the
    source fits when the secure part carries as much as the gap allows.
    Grid of structured starts plus random restarts, then a batched
    accept-if-better local search that only ever moves between feasible
    points. ``None`` if no start satisfies the constraint.
    """
    if constraint not in ("converse", "inner"):
        raise ValueError(f"unknown constraint {constraint!r}")

    def feasible(i_vy, i_wy, gap):
        if constraint == "converse":
            return i_wy >= hs - CLOSURE_TOL
        return (i_vy + np.minimum(gap, hs) >= hs - CLOSURE_TOL) & (gap >= -CLOSURE_TOL)

    nx = spec.input_size
    m = nx + 2 if aux_size is None else int(aux_size)
    hs = entropy(spec.source)
    wy, wz = spec.ch_y.rows, spec.ch_z.rows
    rng = np.random.default_rng(seed)

    starts = []
    # V constant, W = X with every input law on a coarse grid
    px_grid = _simplex_grid(nx, 20)
    for px in px_grid:
        pv = np.zeros(m)
        pv[0] = 1.0
        wv = np.zeros((m, m))
        wv[:, :nx] = px
        xw = _embed_rows(m, nx)
        starts.append((pv, wv, xw))
    # V uniform over inputs, W = V through symmetric noise, X = W
    for g in np.linspace(0.0, 1.0 - 1.0 / nx, 21):
        pv = np.zeros(m)
        pv[:nx] = 1.0 / nx
        wv = np.zeros((m, m))
        wv[:, :nx] = g / max(nx - 1, 1)
        for i in range(nx):
            wv[i, i] = 1.0 - g
        wv[nx:, :nx] = 1.0 / nx
        wv = wv / wv.sum(axis=1, keepdims=True)
        starts.append((pv, wv, _embed_rows(m, nx)))
    n_rand = max(int(restarts), 1)
    pv_r = rng.dirichlet(np.ones(m), size=n_rand)
    wv_r = _random_rows(rng, (n_rand, m, m))
    xw_r = _random_rows(rng, (n_rand, m, nx))
    pv = np.concatenate([np.array([s[0] for s in starts]), pv_r])
    wv = np.concatenate([np.array([s[1] for s in starts]), wv_r])
    xw = np.concatenate([np.array([s[2] for s in starts]), xw_r])

    i_vy, i_wy, gap = _rates_batch(pv, wv, xw, wy, wz)
    feas = feasible(i_vy, i_wy, gap)
    if not np.any(feas):
        return None
    # keep the best feasible starts, padded to the restart budget
    order = np.argsort(np.where(feas, -gap, np.inf), kind="stable")
    keep = order[: min(n_rand, int(feas.sum()))]
    pv, wv, xw, gap = pv[keep], wv[keep], xw[keep], gap[keep]
    b = pv.shape[0]
    idx = np.arange(b)

    for it in range(iterations):
        step = 0.3 * (1e-4 / 0.3) ** (it / max(iterations - 1, 1))
        which = rng.integers(0, 3, size=b)
        npv, nwv, nxw = pv.copy(), wv.copy(), xw.copy()
        sel = which == 0
        if np.any(sel):
            npv[sel] = _perturb(npv[sel], step, rng)
        sel = which == 1
        if np.any(sel):
            r = rng.integers(0, m, size=int(sel.sum()))
            rows = nwv[sel]
            rows[np.arange(len(r)), r] = _perturb(rows[np.arange(len(r)), r], step, rng)
            nwv[sel] = rows
        sel = which == 2
        if np.any(sel):
            r = rng.integers(0, m, size=int(sel.sum()))
            rows = nxw[sel]
            rows[np.arange(len(r)), r] = _perturb(rows[np.arange(len(r)), r], step, rng)
            nxw[sel] = rows
        c_ivy, c_iwy, c_gap = _rates_batch(npv, nwv, nxw, wy, wz)
        ok = feasible(c_ivy, c_iwy, c_gap) & (c_gap >= gap)
        pv[ok], wv[ok], xw[ok], gap[ok] = npv[ok], nwv[ok], nxw[ok], c_gap[ok]

    best = int(np.argmax(gap))
    aux = ChannelAux(
        FiniteDistribution(pv[best] / pv[best].sum()),
        Channel(wv[best] / wv[best].sum(axis=1, keepdims=True)),
        Channel(xw[best] / xw[best].sum(axis=1, keepdims=True)),
    )
    return ChannelRates.of(spec, aux).secrecy_gap, aux


def _perturb(rows, step, rng):
    r = np.clip(rows + rng.normal(scale=step, size=rows.shape), 0.0, None)
    tot = r.sum(axis=-1, keepdims=True)
    return np.where(tot > 0, r / np.where(tot > 0, tot, 1.0), rows)


def _embed_rows(m, nx):
    xw = np.zeros((m, nx))
    xw[np.arange(nx), np.arange(nx)] = 1.0
    xw[nx:] = 1.0 / nx
    return xw


def _simplex_grid(k, steps):
    if k == 1:
        return [np.ones(1)]
    pts = []
    for c in _compositions(steps, k):
        pts.append(np.array(c, dtype=float) / steps)
    if len(pts) > 400:
        pick = np.linspace(0, len(pts) - 1, 400).astype(int)
        pts = [pts[i] for i in pick]
    return pts


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _budget(budget: Optional[tuple[int, int]]) -> dict:
    # an explicit (restarts, iterations) budget applies to both searches
    if budget is None:
        return {}
    return {"restarts": budget[0], "iterations": budget[1]}


def upper_bound_payoff(
    spec: SystemSpec,
    aux_grid_budget: Optional[tuple[int, int]] = None,
    seed: int = 0,
) -> Optional[UpperBoundResult]:
    """Numerical converse bound on the achievable payoff.

    The converse constraints decouple: the channel auxiliaries only enter
    through the secrecy gap, and the payoff is nondecreasing in the
    equivocation allowed to ``U``. So the largest gap subject to
    ``I(W;Y) >= H(S)`` is searched first, then the secrecy-payoff function
    is evaluated at ``min(gap, H(S))``. ``None`` when no auxiliary meets
    ``H(S) <= I(W;Y)``.
    """
    found = max_secrecy_gap(spec, seed=seed, **_budget(aux_grid_budget))
    if found is None:
        return None
    gap, ch_aux = found
    hs = entropy(spec.source)
    rate = min(max(gap, 0.0), hs)
    res = optimize_secrecy_payoff(
        spec.source, spec.value, rate, seed=seed, **_budget(aux_grid_budget)
    )
    payoff = res.payoff
    if spec.value.is_hamming():
        # the closed form is the exact optimum of the same program
        payoff = max(payoff, hamming_payoff_fn(spec.source, rate))
    return UpperBoundResult(payoff, gap, res.aux, ch_aux)


def no_encoding_payoff(source: FiniteDistribution, ch_z: Channel, value: ValueMatrix) -> float:
    """Eve's exact single-letter payoff when the source is sent uncoded."""
    joint = source.probs[:, None] * ch_z.rows
    cost = joint.T @ value.values
    return float(cost.min(axis=1).sum())


FIGURE_LABELS = ("thm1", "thm2", "uncond", "noenc")


def figure4_curves(
    p_grid: Sequence[float], p1: float = 0.0, p2: float = 0.3, gamma_grid_size: int = 201
) -> list[PayoffCurve]:
    """The four payoff curves of the Bernoulli(p) example.

    ``thm1`` is the closed-form inner bound, ``thm2`` the improved bound
    over the gamma family, ``uncond`` Eve's payoff with only ``P_S`` and
    ``noenc`` the uncoded system. Where the source entropy reaches Bob's
    capacity the inner bounds are reported on the closure of their region
    (``thm1`` tends to 0 there).
    """
    grid = [float(p) for p in p_grid]
    if any(not 0.0 <= p <= 0.5 for p in grid):
        raise ValueError("p grid must lie in [0, 1/2]")
    _check_degraded(p1, p2)
    curves = {k: PayoffCurve(k) for k in FIGURE_LABELS}
    ham = ValueMatrix.hamming(2)
    for p in grid:
        src = FiniteDistribution.bernoulli(p)
        t1 = thm1_closure(src, p1, p2)
        imp = bsc_improved_payoff(src, p1, p2, gamma_grid_size, closure=True)
        t2 = imp.payoff if imp is not None else float("nan")
        curves["thm1"].points.append((p, t1))
        curves["thm2"].points.append((p, t2))
        curves["uncond"].points.append((p, unconditional_payoff(src, ham)))
        curves["noenc"].points.append((p, no_encoding_payoff(src, Channel.bsc(p2), ham)))
    for c in curves.values():
        c.__post_init__()
    return [curves[k] for k in FIGURE_LABELS]


def thm1_closure(source: FiniteDistribution, p1: float, p2: float) -> float:
    """Closed-form inner bound on the closure of its region (NaN outside it)."""
    val = bsc_hamming_payoff(source, p1, p2)
    if val is not None:
        return val
    return _thm1_at_capacity_edge(source, p1, p2)


def _thm1_at_capacity_edge(source, p1, p2):
    hs = entropy(source)
    if abs(hs - (1.0 - binary_entropy(p1))) > CLOSURE_TOL:
        return float("nan")
    return hamming_payoff_fn(source, max(bsc_secrecy_gap(0.0, p1, p2), 0.0))


@dataclass(frozen=True)
class InnerSearchResult:
    payoff: float
    alpha: Optional[float]
    source_aux: SourceAux
    ch_aux: ChannelAux


def inner_bound_search(
    spec: SystemSpec,
    improved: bool = False,
    budget: Optional[tuple[int, int]] = None,
    seed: int = 0,
) -> Optional[InnerSearchResult]:
    """Achievable payoff for a general system, found numerically.

    Channel auxiliaries are searched for the largest secrecy gap that
    still lets the source through (``I(V;Y) + gap >= H(S)``); the source
    auxiliary is then the best ``P_{U|S}`` with ``H(S|U)`` up to
    ``min(gap, H(S))``. The bound is evaluated on the closure of its
    region, so the value is a lower estimate of the best achievable payoff
    up to the strict inequalities. ``None`` if nothing feasible is found.
    """
    found = max_secrecy_gap(spec, seed=seed, constraint="inner", **_budget(budget))
    if found is None:
        return None
    gap, ch_aux = found
    rate = min(max(gap, 0.0), entropy(spec.source))
    res = optimize_secrecy_payoff(spec.source, spec.value, rate, seed=seed, **_budget(budget))
    if improved:
        ev = improved_bound_evaluate(spec, res.aux, ch_aux, closure=True)
        if ev is None:
            return None
        return InnerSearchResult(ev[0], ev[1], res.aux, ch_aux)
    val = inner_bound_payoff(spec, res.aux, ch_aux, closure=True)
    if val is None:
        return None
    return InnerSearchResult(val, None, res.aux, ch_aux)
