"""Exact small-blocklength simulation of the eavesdropping game.

Everything here is computed by enumerating the full joint law of source
sequence, messages and channel outputs, so the numbers are exact rather
than Monte Carlo estimates:

* Bob's block error probability for a concrete code,
* Eve's minimum average payoff with causal disclosure of the past source
  symbols, together with a strategy that attains it,
* the leakage ``(1/n) I(M_s; Z^n, M_p)`` and the conditional near-uniformity
  exponent of the message pair,
* numerical checks of the reduction lemmas used in the achievability
  argument.

Sequences are indexed in row-major order, first symbol most significant,
matching ``np.kron`` and ``Channel.power``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .payoff import SourceAux, ValueMatrix, bayes_risk
from .probcore import (
    Channel,
    DistributionError,
    FiniteDistribution,
    JointDistribution,
    check_size,
    mutual_information,
    total_variation,
)
from .regions import ChannelAux, ChannelRates, SystemSpec

MARKOV_TOL = 1e-12


class MissingSplitError(ValueError):
    """The operation needs a code with a public/secure message split."""


def sequence_pmf(source: FiniteDistribution, n: int) -> np.ndarray:
    """i.i.d. law of length-``n`` source sequences."""
    check_size(source.alphabet_size**n, "source sequence table")
    p = np.ones(1)
    for _ in range(n):
        p = np.kron(p, source.probs)
    return p


def sequence_symbols(k: int, n: int) -> np.ndarray:
    """``out[idx, i]`` is the ``i``-th symbol of sequence ``idx``."""
    idx = np.arange(k**n)
    out = np.empty((k**n, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = (idx // k ** (n - 1 - i)) % k
    return out


@dataclass(frozen=True, eq=False)
class MessageSplit:
    """Source encoder into ``(M_p, M_s)`` and channel encoder out of it.

    ``source_encoder[s, mp, ms] = P(mp, ms | s^n)`` and
    ``channel_encoder[mp, ms, x] = P(x^n | mp, ms)``.
    """

    source_encoder: np.ndarray
    channel_encoder: np.ndarray

    def __post_init__(self):
        se = np.array(self.source_encoder, dtype=float)
        ce = np.array(self.channel_encoder, dtype=float)
        if se.ndim != 3 or ce.ndim != 3 or se.shape[1:] != ce.shape[:2]:
            raise DistributionError("message split tables have inconsistent shapes")
        for name, t, axes in (("source", se, (1, 2)), ("channel", ce, 2)):
            if np.any(t < 0) or np.any(np.abs(t.sum(axis=axes) - 1.0) > 1e-12):
                raise DistributionError(f"{name} encoder rows are not distributions")
        se.setflags(write=False)
        ce.setflags(write=False)
        object.__setattr__(self, "source_encoder", se)
        object.__setattr__(self, "channel_encoder", ce)

    @property
    def public_size(self) -> int:
        return self.source_encoder.shape[1]

    @property
    def secure_size(self) -> int:
        return self.source_encoder.shape[2]


@dataclass(frozen=True, eq=False)
class BlockCode:
    """Stochastic encoder ``P(x^n | s^n)`` and deterministic decoder ``y^n -> s^n``."""

    n: int
    source_size: int
    input_size: int
    output_size: int
    encoder: np.ndarray
    decoder: np.ndarray
    split: Optional[MessageSplit] = None
    kind: str = "custom"
    seed: Optional[int] = None
    rate_pair: Optional[tuple[float, float]] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        n, k, nx, ny = self.n, self.source_size, self.input_size, self.output_size
        if n < 1:
            raise ValueError("blocklength must be positive")
        check_size(k**n * nx**n, "encoder table")
        enc = np.array(self.encoder, dtype=float)
        dec = np.array(self.decoder, dtype=np.int64)
        if enc.shape != (k**n, nx**n):
            raise DistributionError(f"encoder must have shape {(k**n, nx**n)}, got {enc.shape}")
        if np.any(enc < 0) or np.any(np.abs(enc.sum(axis=1) - 1.0) > 1e-12):
            raise DistributionError("encoder rows are not distributions")
        if dec.shape != (ny**n,):
            raise DistributionError(f"decoder must be defined on all {ny**n} output sequences")
        if np.any(dec < 0) or np.any(dec >= k**n):
            raise DistributionError("decoder outputs must be source sequence indices")
        if self.split is not None:
            ms = self.split
            if ms.source_encoder.shape[0] != k**n or ms.channel_encoder.shape[2] != nx**n:
                raise DistributionError("message split does not match the code alphabets")
        enc.setflags(write=False)
        dec.setflags(write=False)
        object.__setattr__(self, "encoder", enc)
        object.__setattr__(self, "decoder", dec)

    @classmethod
    def from_split(cls, n, source_size, input_size, output_size, split, decoder, **kw):
        enc = np.einsum("smk,mkx->sx", split.source_encoder, split.channel_encoder)
        return cls(n, source_size, input_size, output_size, enc, decoder, split=split, **kw)

    def without_split(self) -> "BlockCode":
        return BlockCode(
            self.n, self.source_size, self.input_size, self.output_size,
            self.encoder, self.decoder, None, self.kind, self.seed, self.rate_pair,
        )

    def to_dict(self) -> dict:
        """JSON-ready description of the code and all its tables."""
        tables = {"encoder": self.encoder.tolist(), "decoder": self.decoder.tolist()}
        if self.split is not None:
            tables["source_encoder"] = self.split.source_encoder.tolist()
            tables["channel_encoder"] = self.split.channel_encoder.tolist()
        return {
            "n": self.n,
            "alphabets": {
                "source": self.source_size,
                "input": self.input_size,
                "output": self.output_size,
            },
            "seed": self.seed,
            "rate_pair": list(self.rate_pair) if self.rate_pair is not None else None,
            "encoder_kind": self.kind,
            "tables": tables,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlockCode":
        t = d["tables"]
        split = None
        if "source_encoder" in t:
            split = MessageSplit(np.array(t["source_encoder"]), np.array(t["channel_encoder"]))
        a = d["alphabets"]
        rp = d.get("rate_pair")
        return cls(
            int(d["n"]), int(a["source"]), int(a["input"]), int(a["output"]),
            np.array(t["encoder"]), np.array(t["decoder"]), split,
            kind=d.get("encoder_kind", "custom"), seed=d.get("seed"),
            rate_pair=tuple(rp) if rp is not None else None,
        )


def _check_code(spec: SystemSpec, code: BlockCode) -> None:
    if code.source_size != spec.source.alphabet_size:
        raise DistributionError("code source alphabet does not match the system")
    if code.input_size != spec.input_size:
        raise DistributionError("code input alphabet does not match the channels")
    if code.output_size != spec.ch_y.output_size:
        raise DistributionError("code decoder alphabet does not match Bob's channel")


def _require_split(code: BlockCode) -> MessageSplit:
    if code.split is None:
        raise MissingSplitError("this code has no public/secure message split")
    return code.split


def exact_error_prob(spec: SystemSpec, code: BlockCode) -> float:
    """``P[S^n != g(Y^n)]`` by full enumeration."""
    _check_code(spec, code)
    n = code.n
    check_size(code.input_size**n * spec.ch_y.output_size**n, "Bob channel extension")
    ps = sequence_pmf(spec.source, n)
    p_sy = (ps[:, None] * code.encoder) @ spec.ch_y.power(n).rows
    # sum the wrong decisions directly so a perfect code gives exactly 0
    wrong = p_sy.copy()
    wrong[code.decoder, np.arange(p_sy.shape[1])] = 0.0
    return float(min(max(wrong.sum(), 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class EveStrategy:
    """``actions[i][past, obs]`` is Eve's action at time ``i`` (0-based).

    ``past`` indexes ``s^{i}`` (the ``i`` symbols already disclosed) and
    ``obs`` indexes her observation.
    """

    actions: tuple

    @property
    def n(self) -> int:
        return len(self.actions)

    def act(self, i: int, past: int, obs: int) -> int:
        return int(self.actions[i][past, obs])


def causal_payoff(
    joint_s_obs: np.ndarray, source_size: int, n: int, values: np.ndarray
) -> tuple[float, EveStrategy]:
    """Eve's exact minimum of ``E[(1/n) sum_i pi(S_i, t_i(S^{i-1}, obs))]``.

    The objective is additive over ``i`` and each term depends on the
    strategy only through ``t_i``, so the joint minimum is the sum of
    per-time Bayes decisions on the posterior of ``S_i`` given the history.
    """
    k = source_size
    j = np.asarray(joint_s_obs, dtype=float)
    n_obs = j.shape[1]
    j = j.reshape((k,) * n + (n_obs,))
    total = 0.0
    actions = []
    for i in range(n):
        # sum out the future symbols s_{i+1..n}
        marg = j.sum(axis=tuple(range(i + 1, n))) if i + 1 < n else j
        marg = marg.reshape(k**i, k, n_obs)
        cost = np.einsum("hso,st->hot", marg, values)
        act = np.argmin(cost, axis=2)
        total += float(np.take_along_axis(cost, act[..., None], axis=2).sum())
        actions.append(act)
    return total / n, EveStrategy(tuple(actions))


def _full_joint(spec: SystemSpec, code: BlockCode) -> np.ndarray:
    """``P(s^n, m_p, m_s, z^n)``; a code without split gets ``M_p = M_s = 1``."""
    n = code.n
    nz = spec.ch_z.output_size
    check_size(code.input_size**n * nz**n, "Eve channel extension")
    wz = spec.ch_z.power(n).rows
    ps = sequence_pmf(spec.source, n)
    if code.split is None:
        check_size(code.source_size**n * nz**n, "eavesdropper joint")
        return ((ps[:, None] * code.encoder) @ wz)[:, None, None, :]
    sp = code.split
    mp, ms = sp.public_size, sp.secure_size
    check_size(code.source_size**n * mp * ms * nz**n, "eavesdropper joint")
    z_given_m = sp.channel_encoder @ wz  # (mp, ms, z)
    return np.einsum("s,smk,mkz->smkz", ps, sp.source_encoder, z_given_m)


OBSERVATIONS = ("z", "mp", "z+mp", "none")


def observation_joint(spec: SystemSpec, code: BlockCode, observe: str = "z") -> np.ndarray:
    """Joint of ``S^n`` and Eve's (flattened) observation.

    ``observe`` is one of ``"z"`` (the channel output), ``"mp"`` (the public
    message), ``"z+mp"`` (both) or ``"none"`` (causal disclosure only).
    """
    _check_code(spec, code)
    if observe not in OBSERVATIONS:
        raise ValueError(f"observe must be one of {OBSERVATIONS}")
    if observe in ("mp", "z+mp"):
        _require_split(code)
    full = _full_joint(spec, code)
    ns = full.shape[0]
    if observe == "z":
        return full.sum(axis=(1, 2))
    if observe == "mp":
        return full.sum(axis=(2, 3))
    if observe == "z+mp":
        return full.sum(axis=2).reshape(ns, -1)
    return full.sum(axis=(1, 2, 3))[:, None]


def eve_payoff(spec: SystemSpec, code: BlockCode, observe: str = "z") -> tuple[float, EveStrategy]:
    """Worst-case payoff when Eve sees the past source and ``observe``."""
    j = observation_joint(spec, code, observe)
    return causal_payoff(j, code.source_size, code.n, spec.value.values)


def weak_secrecy(spec: SystemSpec, code: BlockCode) -> float:
    """``(1/n) I(M_s; Z^n, M_p)`` in bits per symbol."""
    _check_code(spec, code)
    _require_split(code)
    full = _full_joint(spec, code)
    mkz = full.sum(axis=0)  # (mp, ms, z)
    return mutual_information(JointDistribution(mkz / mkz.sum()), 1, (0, 2)) / code.n


def condunif_exponent(code: BlockCode, source: FiniteDistribution) -> float:
    """``(1/n) log2`` of the largest ratio ``P[m_s | m_p] / P[m_s' | m_p]``.

    Taken over public messages of positive probability; ``math.inf`` when
    some secure message is impossible under an ``m_p`` that allows another.
    """
    sp = _require_split(code)
    if source.alphabet_size != code.source_size:
        raise DistributionError("source alphabet does not match the code")
    ps = sequence_pmf(source, code.n)
    pm = np.einsum("s,smk->mk", ps, sp.source_encoder)
    worst = 0.0
    for row in pm:
        tot = row.sum()
        if tot <= 1e-15:
            continue
        cond = row / tot
        hi, lo = cond.max(), cond.min()
        if lo <= 1e-15:
            return math.inf
        worst = max(worst, math.log2(hi / lo))
    return worst / code.n


@dataclass(frozen=True, eq=False)
class GameResult:
    error_prob: float
    worst_case_payoff: float
    weak_secrecy: Optional[float]
    condunif_exponent: Optional[float]
    optimal_strategy: EveStrategy


def optimal_eve_payoff(spec: SystemSpec, code: BlockCode) -> GameResult:
    """Exact error probability, Eve's worst-case payoff and the secrecy measures."""
    _check_code(spec, code)
    payoff, strategy = eve_payoff(spec, code, "z")
    ws = cu = None
    if code.split is not None:
        ws = weak_secrecy(spec, code)
        cu = condunif_exponent(code, spec.source)
    return GameResult(exact_error_prob(spec, code), payoff, ws, cu, strategy)


def lemma1_gap(spec: SystemSpec, code: BlockCode) -> tuple[float, float]:
    """Eve's payoff seeing ``(S^{i-1}, Z^n)`` versus seeing ``(S^{i-1}, M_p)``."""
    _require_split(code)
    lhs, _ = eve_payoff(spec, code, "z")
    rhs, _ = eve_payoff(spec, code, "mp")
    return lhs, rhs


def lemma1_slack(leakage_bits: float, value_max: float) -> float:
    """Allowed shortfall ``2 pi_max sqrt(ln2 * leakage / 2)``.

    Pinsker bounds the distance to the Markov surrogate law by
    ``sqrt(D_nats / 2)`` with ``D`` at most the per-symbol leakage, and
    changing the law moves an expectation of a function bounded by
    ``pi_max`` by at most ``2 pi_max`` times that distance.
    """
    return 2.0 * value_max * math.sqrt(math.log(2.0) * max(leakage_bits, 0.0) / 2.0)


def is_markov_chain(chain: JointDistribution, tol: float = MARKOV_TOL) -> bool:
    """Whether a 3-axis joint satisfies ``X - Y - Z``."""
    p = chain.probs
    pxy = p.sum(axis=2)
    pyz = p.sum(axis=0)
    py = p.sum(axis=(0, 2))
    return bool(np.all(np.abs(p * py[None, :, None] - pxy[:, :, None] * pyz[None]) <= tol))


def lemma3_check(chain: JointDistribution, g: np.ndarray) -> tuple[float, float]:
    """Best expected ``g(f(.), Z)`` with ``f`` of ``(X, Y)`` versus ``f`` of ``Y`` alone.

    ``g[a, z]`` is the cost of action ``a`` when the third variable is ``z``.
    Both minima come from per-argument Bayes choices, which is exhaustive
    over the respective function classes.
    """
    if chain.ndim != 3:
        raise ValueError("chain must have exactly three axes (X, Y, Z)")
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[1] != chain.dims[2]:
        raise ValueError("g must be a table over (action, z)")
    if not is_markov_chain(chain):
        raise ValueError("input is not a Markov chain X - Y - Z")
    p = chain.probs
    min_xy, _ = bayes_risk(p.reshape(-1, p.shape[2]).T, g.T)
    min_y, _ = bayes_risk(p.sum(axis=0).T, g.T)
    return min_xy, min_y


def lemma4_check(p, q, f) -> tuple[float, float]:
    """``|E_p f - E_q f|`` and the bound ``2 max|f| TV(p, q)``."""
    pa = p.probs if isinstance(p, JointDistribution) else np.asarray(p, dtype=float)
    qa = q.probs if isinstance(q, JointDistribution) else np.asarray(q, dtype=float)
    fa = np.asarray(f, dtype=float)
    if pa.shape != qa.shape or fa.shape != pa.shape:
        raise ValueError(f"dimension mismatch {pa.shape}, {qa.shape}, {fa.shape}")
    gap = abs(float(np.sum((pa - qa) * fa)))
    return gap, 2.0 * float(np.abs(fa).max()) * total_variation(pa, qa)


def _map_symbol_decoder(spec: SystemSpec) -> np.ndarray:
    """Per-symbol MAP estimate of ``S`` from ``Y`` when ``X = S``."""
    post = spec.source.probs[:, None] * spec.ch_y.rows  # (s, y)
    return np.argmax(post, axis=0)


def make_identity_code(spec: SystemSpec, n: int) -> BlockCode:
    """Uncoded transmission ``X^n = S^n`` with a symbolwise MAP decoder.

    The message split is the trivial one: no public message, the whole
    source sequence as the secure message.
    """
    k = spec.source.alphabet_size
    if k != spec.input_size:
        raise DistributionError("identity code needs |S| = |X|")
    ny = spec.ch_y.output_size
    check_size(k**n * k**n, "identity code")
    sym = _map_symbol_decoder(spec)
    ys = sequence_symbols(ny, n)
    decoder = (sym[ys] * (k ** np.arange(n - 1, -1, -1))).sum(axis=1)
    eye = np.eye(k**n)
    split = MessageSplit(eye[:, None, :], eye[None, :, :])
    return BlockCode.from_split(n, k, k, ny, split, decoder, kind="identity")


def _default_source_aux(source: FiniteDistribution) -> SourceAux:
    k = source.alphabet_size
    return SourceAux(source, Channel(0.5 * np.eye(k) + 0.5 / k))


def _default_channel_aux(spec: SystemSpec) -> ChannelAux:
    nx = spec.input_size
    return ChannelAux(
        FiniteDistribution.point(1, 0),
        Channel(np.full((1, nx), 1.0 / nx)),
        Channel.identity(nx),
    )


def message_count(n: int, rate: float) -> int:
    """``2^{n R}`` rounded to the nearest integer, at least 1."""
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    return max(1, int(round(2.0 ** (n * rate))))


def make_binning_code(
    spec: SystemSpec,
    n: int,
    r_p: float,
    r_s: float,
    seed: int = 0,
    r_rand: Optional[float] = None,
    source_aux: Optional[SourceAux] = None,
    ch_aux: Optional[ChannelAux] = None,
    randomize: bool = True,
) -> BlockCode:
    """Seeded random wiretap code with a public/secure message split.

    Source side: a public codebook ``u^n(m_p)`` drawn from ``P_U``, a
    likelihood encoder picking ``m_p`` with probability proportional to
    ``P(s^n | u^n(m_p))``, and the secure message as a random bin index of
    ``s^n``; the source decoder returns the most likely sequence in the bin.

    Channel side: cloud centres ``v^n(m_p)`` from ``P_V``, satellites
    ``w^n(m_p, m_s, k)`` from ``P_{W|V}`` for ``K`` randomization indices,
    ``X`` drawn through ``P_{X|W}``. ``K = 2^{n r_rand}``, by default
    ``ceil(2^{n I(W;Z|V)})``. Bob decodes the message pair by exact MAP.

    ``randomize=False`` keeps the same codebook but always uses the first
    satellite, i.e. removes the randomization indices.
    """
    _rng = np.random.default_rng(seed)
    k = spec.source.alphabet_size
    nx = spec.input_size
    ny = spec.ch_y.output_size
    sa = source_aux or _default_source_aux(spec.source)
    ca = ch_aux or _default_channel_aux(spec)
    if sa.source.alphabet_size != k:
        raise DistributionError("source auxiliary does not match the source")
    if ca.x_given_w.output_size != nx:
        raise DistributionError("channel auxiliary does not match the channel input")
    n_p, n_s = message_count(n, r_p), message_count(n, r_s)
    if r_rand is None:
        i_wz_v = ChannelRates.of(spec, ca).i_wz_given_v
        n_r = max(1, int(math.ceil(2.0 ** (n * i_wz_v) - 1e-9)))
    else:
        n_r = message_count(n, r_rand)
    check_size(k**n * n_p * n_s * max(nx, spec.ch_z.output_size) ** n, "binning code")
    check_size(n_p * n_s * n_r * nx**n, "binning codebook")

    # source code
    joint_su = sa.joint().probs
    pu = joint_su.sum(axis=0)
    s_given_u = np.divide(joint_su, pu[None, :], out=np.zeros_like(joint_su), where=pu > 0)
    u_cw = _rng.choice(sa.aux_size, size=(n_p, n), p=pu)
    s_seq = sequence_symbols(k, n)
    lik = np.ones((k**n, n_p))
    for i in range(n):
        lik *= s_given_u[s_seq[:, i][:, None], u_cw[:, i][None, :]]
    tot = lik.sum(axis=1, keepdims=True)
    p_mp = np.where(tot > 0, lik / np.where(tot > 0, tot, 1.0), 1.0 / n_p)
    bins = _rng.integers(0, n_s, size=k**n)
    src_enc = np.zeros((k**n, n_p, n_s))
    src_enc[np.arange(k**n), :, bins] = p_mp
    ps = sequence_pmf(spec.source, n)
    score = ps[:, None] * p_mp  # P(s^n, m_p)
    g_s = np.zeros((n_p, n_s), dtype=np.int64)
    for b in range(n_s):
        members = np.flatnonzero(bins == b)
        if members.size:
            g_s[:, b] = members[np.argmax(score[members], axis=0)]

    # channel code
    v_cw = _rng.choice(ca.v_dist.alphabet_size, size=(n_p, n), p=ca.v_dist.probs)
    wv = ca.w_given_v.rows
    nw = wv.shape[1]
    w_cw = np.empty((n_p, n_s, n_r, n), dtype=np.int64)
    for mp in range(n_p):
        for i in range(n):
            w_cw[mp, :, :, i] = _rng.choice(nw, size=(n_s, n_r), p=wv[v_cw[mp, i]])
    used = n_r if randomize else 1
    chan_enc = np.ones((n_p, n_s, used, 1))
    xw = ca.x_given_w.rows
    for i in range(n):
        sym = xw[w_cw[:, :, :used, i]]  # (mp, ms, k, nx)
        chan_enc = (chan_enc[..., :, None] * sym[..., None, :]).reshape(n_p, n_s, used, -1)
    chan_enc = chan_enc.mean(axis=2)

    split = MessageSplit(src_enc, chan_enc)
    p_msg = np.einsum("s,smk->mk", ps, src_enc).ravel()
    p_y_msg = chan_enc.reshape(n_p * n_s, -1) @ spec.ch_y.power(n).rows
    best = np.argmax(p_msg[:, None] * p_y_msg, axis=0)
    decoder = g_s.ravel()[best]
    return BlockCode.from_split(
        n, k, nx, ny, split, decoder,
        kind="binning" if randomize else "binning-norand",
        seed=seed, rate_pair=(float(r_p), float(r_s)),
        extra={"randomization": int(n_r), "public": n_p, "secure": n_s},
    )
