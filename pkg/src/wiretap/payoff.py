"""Payoff functionals of the eavesdropping game.

Eve picks an action ``t`` for every value of her side information and pays
``pi(s, t)``; the payoff is her minimum expected value. This module holds
the single-letter versions: no side information, side information ``U``
drawn through ``P_{U|S}``, the closed form for Hamming distortion, and a
numerical search for the best ``P_{U|S}`` at a given equivocation budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .probcore import (
    Channel,
    DistributionError,
    FiniteDistribution,
    JointDistribution,
    binary_entropy,
    conditional_entropy,
    entropy,
)

EQUIV_TOL = 1e-12
DEFAULT_RESTARTS = 64
DEFAULT_ITERATIONS = 200


class InfeasibleRateError(ValueError):
    """Requested equivocation exceeds the source entropy."""


@dataclass(frozen=True, eq=False)
class ValueMatrix:
    """Nonnegative payoff table, ``values[s, t] = pi(s, t)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.size == 0:
            raise DistributionError("value matrix must be a non-empty matrix")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DistributionError("value matrix entries must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def source_size(self) -> int:
        return self.values.shape[0]

    @property
    def action_size(self) -> int:
        return self.values.shape[1]

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    @classmethod
    def hamming(cls, k: int) -> "ValueMatrix":
        return cls(1.0 - np.eye(k))

    def is_hamming(self) -> bool:
        k = self.source_size
        return self.action_size == k and np.array_equal(self.values, 1.0 - np.eye(k))

    def __repr__(self):
        return f"ValueMatrix({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class SourceAux:
    """Source ``P_S`` together with an auxiliary channel ``P_{U|S}``."""

    source: FiniteDistribution
    aux_channel: Channel

    def __post_init__(self):
        if self.aux_channel.input_size != self.source.alphabet_size:
            raise DistributionError(
                f"aux channel takes {self.aux_channel.input_size} inputs, "
                f"source has {self.source.alphabet_size} symbols"
            )

    @property
    def aux_size(self) -> int:
        return self.aux_channel.output_size

    def joint(self) -> JointDistribution:
        """Joint law of ``(S, U)``."""
        return JointDistribution.from_channel(self.source, self.aux_channel)

    def equivocation(self) -> float:
        """``H(S|U)``."""
        return conditional_entropy(self.joint(), 0, 1)

    def information(self) -> float:
        """``I(S;U)``."""
        return max(entropy(self.source) - self.equivocation(), 0.0)


def bayes_risk(joint_so: np.ndarray, values: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum expected payoff when the action may depend on an observation.

    ``joint_so[s, o]`` is the joint mass of the hidden symbol and the
    observation. Returns the risk and the chosen action per observation,
    ties going to the lowest action index.
    """
    cost = joint_so.T @ values  # cost[o, t]
    actions = np.argmin(cost, axis=1)
    risk = float(cost[np.arange(cost.shape[0]), actions].sum())
    return risk, actions


def _check_sizes(source: FiniteDistribution, v: ValueMatrix) -> None:
    if source.alphabet_size != v.source_size:
        raise DistributionError(
            f"source has {source.alphabet_size} symbols, value matrix has "
            f"{v.source_size} rows"
        )


def unconditional_payoff(source: FiniteDistribution, v: ValueMatrix) -> float:
    """Eve's payoff when she knows only ``P_S``: ``min_t E[pi(S, t)]``."""
    _check_sizes(source, v)
    return float(np.min(source.probs @ v.values))


def payoff_given_aux(aux: SourceAux, v: ValueMatrix) -> float:
    """``min_{t(u)} E[pi(S, t(U))]``."""
    _check_sizes(aux.source, v)
    risk, _ = bayes_risk(aux.joint().probs, v.values)
    return min(risk, unconditional_payoff(aux.source, v))


def hamming_payoff_fn(source: FiniteDistribution, rate: float) -> float:
    """Closed-form secrecy payoff for Hamming distortion.

    The minimum of the piecewise-linear curve through
    ``(log2 n, (n-1)/n)``, ``n = 1, 2, ...``, and the constant
    ``1 - max_s P_S(s)``.
    """
    rate = float(rate)
    if rate < 0 or math.isnan(rate):
        raise ValueError(f"rate must be >= 0, got {rate}")
    cap = 1.0 - float(source.probs.max())
    # f(log2 k) = 1 - 1/k >= cap, and f is nondecreasing
    if rate >= math.log2(source.alphabet_size):
        return cap
    n = max(int(math.floor(2.0**rate)), 1)
    lo, hi = math.log2(n), math.log2(n + 1)
    frac = min(max((rate - lo) / (hi - lo), 0.0), 1.0)
    f = (n - 1) / n + frac * (n / (n + 1) - (n - 1) / n)
    return min(f, cap)


@dataclass(frozen=True)
class SecrecySearchResult:
    payoff: float
    equivocation: float
    aux: SourceAux
    restart: int


def _cond_entropy_batch(joint: np.ndarray) -> np.ndarray:
    """``H(S|U)`` for a batch of joint tables shaped ``(batch, S, U)``."""
    pu = joint.sum(axis=1)
    hsu = -(joint * np.log2(np.maximum(joint, 1e-300))).sum(axis=(1, 2))
    hu = -(pu * np.log2(np.maximum(pu, 1e-300))).sum(axis=1)
    return np.maximum(hsu - hu, 0.0)


def _objective_batch(joint: np.ndarray, values: np.ndarray) -> np.ndarray:
    cost = np.einsum("bsu,st->but", joint, values)
    return cost.min(axis=2).sum(axis=1)


def _project(k: np.ndarray, ps: np.ndarray, rate: float, embed: np.ndarray,
             steps: int = 34) -> np.ndarray:
    """Put every channel of the batch onto the surface ``H(S|U) = rate``.

    Too much equivocation: mix toward the channel that reveals ``S``.
    Too little: mix toward independence at fixed ``P_U``, which never
    lowers the payoff since the payoff is concave with its maximum there.
    Along either segment ``H(S|U)`` is concave in the mixing weight, so the
    crossing is bracketed and bisected; the end kept is the one with
    ``H(S|U) <= rate``.
    """
    h = _cond_entropy_batch(ps[:, None] * k)
    high = h > rate + EQUIV_TOL
    low = h < rate - EQUIV_TOL
    move = high | low
    if not np.any(move):
        return k
    start = k[move]
    rising = low[move]
    pu = np.einsum("s,bsu->bu", ps, start)
    target = np.where(rising[:, None, None], pu[:, None, :], embed[None])
    lo = np.zeros(start.shape[0])
    hi = np.ones(start.shape[0])
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        mixed = start + mid[:, None, None] * (target - start)
        above = _cond_entropy_batch(ps[:, None] * mixed) > rate
        # the infeasible side moves: hi when H rises with the weight, lo otherwise
        shrink_hi = above == rising
        hi = np.where(shrink_hi, mid, hi)
        lo = np.where(shrink_hi, lo, mid)
    lam = np.where(rising, lo, hi)
    out = k.copy()
    out[move] = start + lam[:, None, None] * (target - start)
    return out


def _posterior_grid(k: int, max_points: int = 1500) -> tuple[np.ndarray, int]:
    # all distributions on k symbols with entries in multiples of 1/N, N as fine as allowed
    n = 1
    while math.comb(n + 1 + k - 1, k - 1) <= max_points:
        n += 1
    pts = []
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    grid = np.array(pts, dtype=float) / n
    # uniform laws on every subset, which the grid misses when n is not a multiple
    subsets = [
        np.isin(np.arange(k), c).astype(float) / r
        for r in range(2, k + 1)
        for c in itertools.combinations(range(k), r)
    ]
    return (np.vstack([grid] + subsets) if subsets else grid), n


def _refine(q: np.ndarray, step: float) -> np.ndarray:
    # move mass `step` between every ordered pair of symbols
    k = q.shape[1]
    out = [q]
    for i, j in itertools.permutations(range(k), 2):
        d = np.zeros(k)
        d[i], d[j] = step, -step
        out.append(q + d)
    pts = np.vstack(out)
    return pts[np.all(pts >= -1e-15, axis=1)].clip(0.0, None)


def _solve_mixture(q, phi, h, p, rate):
    res = linprog(
        -phi,
        A_ub=h[None, :], b_ub=[rate],
        A_eq=q.T, b_eq=p,
        bounds=(0, None), method="highs-ds",
    )
    if res.status != 0:
        return None
    return np.flatnonzero(res.x > 1e-13), res.x


def _mixture_rows(ps, support, w, post, m):
    rows = np.zeros((ps.size, m))
    rows[np.ix_(support, np.arange(w.size))] = (w[:, None] * post).T * ps[support].sum()
    rows[support] /= ps[support, None]
    rows[ps == 0, 0] = 1.0
    rows = np.clip(rows, 0.0, None)
    return rows / rows.sum(axis=1, keepdims=True)


def _posterior_lp(ps: np.ndarray, values: np.ndarray, rate: float, m: int,
                  rounds: int = 6) -> Optional[np.ndarray]:
    """Best mixture of grid posteriors averaging to ``P_S`` with mean entropy ``<= rate``.

    After the first solve the grid is refined around the posteriors in use,
    halving the step each round. ``P_{U|S}`` is read off the weights; a
    vertex solution has at most ``|S| + 1`` posteriors. The returned
    channel meets ``H(S|U) <= rate`` exactly (the LP is re-solved with a
    tighter budget if solver tolerance overshoots). ``None`` if the LP
    fails or needs more than ``m`` symbols.
    """
    support = np.flatnonzero(ps > 0)
    k = support.size
    p = ps[support] / ps[support].sum()
    if k == 1:
        q, n = np.ones((1, 1)), 1
    else:
        q, n = _posterior_grid(k)
    q = np.vstack([q, p])
    step = 1.0 / n
    for r in range(rounds + 1):
        h = -(q * np.log2(np.maximum(q, 1e-300))).sum(axis=1)
        phi = (q @ values[support]).min(axis=1)
        sol = _solve_mixture(q, phi, h, p, rate)
        if sol is None:
            return None
        used, x = sol
        if r == rounds or k == 1:
            break
        step /= 2
        # keep every column so the previous optimum stays feasible
        q = np.unique(np.vstack([q, _refine(q[used], step)]), axis=0)
    budget = rate
    for _ in range(8):
        if used.size > m:
            return None
        rows = _mixture_rows(ps, support, x[used], q[used], m)
        excess = _cond_entropy_batch((ps[:, None] * rows)[None])[0] - rate
        if excess <= EQUIV_TOL / 2:
            return rows
        budget -= 2 * excess
        sol = _solve_mixture(q, phi, h, p, budget)
        if sol is None:
            return None
        used, x = sol
    return None


def optimize_secrecy_payoff(
    source: FiniteDistribution,
    v: ValueMatrix,
    rate: float,
    aux_size: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    warm_start: Optional[Channel] = None,
) -> SecrecySearchResult:
    """Search for the ``P_{U|S}`` that maximizes Eve's payoff at equivocation ``rate``.

    One start is the best mixture of gridded posteriors, found by a linear
    program (the problem is a concave envelope over posteriors of ``S``).
    All starts then go through a projected local search: each keeps one
    channel on the constraint surface, proposes a Gaussian perturbation of
    a random row or a shift of mass between two of its entries, projects it
    back and accepts it when the payoff does not drop. The returned auxiliary always satisfies ``H(S|U) <= rate``, so the
    payoff is a certified lower bound on the optimum.
    """
    _check_sizes(source, v)
    rate = float(rate)
    hs = entropy(source)
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if rate > hs + EQUIV_TOL:
        raise InfeasibleRateError(f"rate {rate} exceeds H(S) = {hs}")
    rate = min(rate, hs)
    k = source.alphabet_size
    m = k + 2 if aux_size is None else int(aux_size)
    if m < k:
        raise ValueError(f"aux_size {m} smaller than the source alphabet {k}")
    restarts = max(int(restarts), 1)
    ps = source.probs
    values = v.values
    rng = np.random.default_rng(seed)

    embed = np.zeros((k, m))
    embed[np.arange(k), np.arange(k)] = 1.0
    batch = rng.dirichlet(np.ones(m), size=(restarts, k))
    if m > k:
        # half the starts: S revealed or sent to a random extra symbol
        for b in range(1, restarts, 2):
            lam = rng.random(k)
            ext = rng.integers(k, m, size=k)
            batch[b] = (1 - lam)[:, None] * embed
            batch[b, np.arange(k), ext] += lam
    batch[0] = embed
    seeds = [_posterior_lp(ps, values, rate, m)]
    if warm_start is not None:
        if warm_start.rows.shape != (k, m):
            raise ValueError("warm start shape does not match (|S|, aux_size)")
        seeds.append(warm_start.rows)
    seeds = [x for x in seeds if x is not None]
    for i, x in enumerate(seeds[: restarts - 1]):
        batch[i + 1] = x
    batch = _project(batch, ps, rate, embed)
    score = _objective_batch(ps[None, :, None] * batch, values)

    idx = np.arange(restarts)
    for it in range(iterations):
        step = 0.5 * (1e-4 / 0.5) ** (it / max(iterations - 1, 1))
        rows = rng.integers(0, k, size=restarts)
        prop = batch.copy()
        noise = rng.normal(scale=step, size=(restarts, m))
        r = np.clip(prop[idx, rows] + noise, 0.0, None)
        # the other half of the moves shift mass between two entries of the row
        shift = rng.random(restarts) < 0.5
        a = rng.integers(0, m, size=restarts)
        b = rng.integers(0, m, size=restarts)
        moved = prop[idx, rows, a] * np.minimum(rng.random(restarts) * 4 * step, 1.0)
        t = prop[idx, rows].copy()
        t[idx, a] -= moved
        t[idx, b] += moved
        r = np.where(shift[:, None], t, r)
        tot = r.sum(axis=1, keepdims=True)
        ok = tot[:, 0] > 0
        r = np.where(ok[:, None], r / np.where(tot > 0, tot, 1.0), prop[idx, rows])
        prop[idx, rows] = r
        prop = _project(prop, ps, rate, embed)
        cand = _objective_batch(ps[None, :, None] * prop, values)
        better = cand >= score
        batch[better] = prop[better]
        score = np.where(better, cand, score)

    h = _cond_entropy_batch(ps[None, :, None] * batch)
    score = np.where(h <= rate + EQUIV_TOL, score, -np.inf)
    best = int(np.argmax(score))
    rows = np.clip(batch[best], 0.0, None)
    rows = rows / rows.sum(axis=1, keepdims=True)
    aux = SourceAux(source, Channel(rows))
    return SecrecySearchResult(
        payoff=payoff_given_aux(aux, v),
        equivocation=aux.equivocation(),
        aux=aux,
        restart=best,
    )


def secrecy_payoff_fn(
    source: FiniteDistribution,
    v: ValueMatrix,
    rate: float,
    aux_size: Optional[int] = None,
    search_budget: Optional[tuple[int, int]] = None,
    seed: int = 0,
) -> float:
    """Numerical secrecy-payoff function.

    ``search_budget`` is ``(restarts, iterations)``. The result is the
    payoff of a certified-feasible auxiliary, hence never above the optimum.
    """
    restarts, iterations = search_budget or (DEFAULT_RESTARTS, DEFAULT_ITERATIONS)
    res = optimize_secrecy_payoff(
        source, v, rate, aux_size=aux_size, restarts=restarts,
        iterations=iterations, seed=seed,
    )
    return res.payoff


def secrecy_payoff_curve(
    source: FiniteDistribution,
    v: ValueMatrix,
    rates: Iterable[float],
    aux_size: Optional[int] = None,
    search_budget: Optional[tuple[int, int]] = None,
    seed: int = 0,
) -> list[float]:
    """Evaluate the secrecy-payoff function on a grid of rates.

    Rates are visited in increasing order and each search is warm-started
    from the previous optimum, which stays feasible at the larger rate; the
    returned values are therefore nondecreasing in the rate.
    """
    rates = [float(r) for r in rates]
    restarts, iterations = search_budget or (DEFAULT_RESTARTS, DEFAULT_ITERATIONS)
    out = [0.0] * len(rates)
    warm = None
    for i in sorted(range(len(rates)), key=lambda j: rates[j]):
        res = optimize_secrecy_payoff(
            source, v, rates[i], aux_size=aux_size, restarts=restarts,
            iterations=iterations, seed=seed, warm_start=warm,
        )
        warm = res.aux.aux_channel
        out[i] = res.payoff
    return out


def erasure_aux(source: FiniteDistribution, rate: float) -> SourceAux:
    """Explicit binary-source auxiliary attaining the Hamming closed form.

    ``U`` is either ``S`` itself or an erasure symbol. Below ``2 min(p, 1-p)``
    the erasure posterior is uniform; above it all mass of the rarer symbol
    sits in the erasure and the erasure probability is tuned by bisection.
    """
    if source.alphabet_size != 2:
        raise ValueError("erasure construction needs a binary source")
    hs = entropy(source)
    if rate < 0 or rate > hs + EQUIV_TOL:
        raise InfeasibleRateError(f"rate {rate} outside [0, H(S)={hs}]")
    rate = min(rate, hs)
    p1 = float(source.probs[1])
    small = min(p1, 1.0 - p1)
    rare = 1 if p1 <= 0.5 else 0
    if small == 0.0:
        return SourceAux(source, Channel(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])))
    if rate <= 2 * small:
        # erasure mass q split evenly between the two symbols
        mass_rare = mass_common = rate / 2
    else:
        lo, hi = 2 * small, 1.0
        for _ in range(64):
            q = 0.5 * (lo + hi)
            r = small / q
            lo, hi = (q, hi) if q * binary_entropy(r) < rate else (lo, q)
        q = lo
        mass_rare, mass_common = small, q - small
    rows = np.zeros((2, 3))
    common = 1 - rare
    p_rare, p_common = source.probs[rare], source.probs[common]
    rows[rare, 2] = min(mass_rare / p_rare, 1.0)
    rows[rare, rare] = 1.0 - rows[rare, 2]
    rows[common, 2] = min(mass_common / p_common, 1.0)
    rows[common, common] = 1.0 - rows[common, 2]
    return SourceAux(source, Channel(rows))
