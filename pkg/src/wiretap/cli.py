"""Command-line front end: payoff curves, rate regions, bounds and exact games.

CSV goes to stdout for ``curve`` and ``region``, JSON for ``payoff`` and
``simulate``. Diagnostics go to stderr. Numbers carry 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gamesim import lemma1_gap, make_binning_code, make_identity_code, optimal_eve_payoff
from .payoff import ValueMatrix
from .probcore import Channel, DistributionError, FiniteDistribution, SizeGuardError, entropy
from .regions import (
    FIGURE_LABELS,
    SystemSpec,
    bsc_channel_region,
    bsc_hamming_payoff,
    bsc_binding_gamma,
    bsc_improved_payoff,
    bsc_payoff_aux,
    figure4_curves,
    inner_bound_search,
    thm1_closure,
    upper_bound_payoff,
)

DIGITS = 12


def fmt(x) -> str:
    """A number as text with 12 significant digits; infinities as ``inf``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    # strip the sign of negative zero so outputs compare byte for byte
    return format(x + 0.0, f".{DIGITS}g")


def _num(x):
    # JSON-friendly: rounded float, "inf" for infinities, null for missing
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return None
    return float(fmt(x))


@dataclass(frozen=True)
class SpecFile:
    """A parsed system description; ``bsc`` holds ``(p, p1, p2)`` for the shorthand."""

    system: SystemSpec
    bsc: Optional[tuple[float, float, float]] = None

    @classmethod
    def from_dict(cls, d: dict) -> "SpecFile":
        if "bsc" in d:
            b = d["bsc"]
            if not b.get("hamming", True):
                raise ValueError("bsc shorthand only supports the Hamming payoff")
            p, p1, p2 = float(b["p"]), float(b["p1"]), float(b["p2"])
            return cls(SystemSpec.bsc_hamming(p, p1, p2), (p, p1, p2))
        missing = [k for k in ("source", "channel_y", "channel_z", "value") if k not in d]
        if missing:
            raise ValueError(f"spec file lacks {', '.join(missing)}")
        system = SystemSpec(
            FiniteDistribution(np.array(d["source"], dtype=float)),
            Channel(np.array(d["channel_y"], dtype=float)),
            Channel(np.array(d["channel_z"], dtype=float)),
            ValueMatrix(np.array(d["value"], dtype=float)),
        )
        return cls(system)

    @classmethod
    def load(cls, path: str) -> "SpecFile":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _spec_from_args(args) -> SpecFile:
    if args.spec:
        return SpecFile.load(args.spec)
    if args.p is None:
        raise ValueError("give --spec FILE or the --p/--p1/--p2 shorthand")
    return SpecFile.from_dict({"bsc": {"p": args.p, "p1": args.p1, "p2": args.p2}})


def _add_spec_flags(sp):
    sp.add_argument("--spec", help="JSON system description")
    sp.add_argument("--p", type=float, help="Bernoulli source parameter (shorthand)")
    sp.add_argument("--p1", type=float, default=0.0, help="crossover to Bob")
    sp.add_argument("--p2", type=float, default=0.3, help="crossover to Eve")


def _write_csv(header, rows, out):
    out = out or sys.stdout
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(fmt(v) for v in r) + "\n")


def _write_json(obj, out):
    out = out or sys.stdout
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_curve(args, out=None) -> int:
    if args.grid < 2:
        raise ValueError("--grid needs at least 2 points")
    wanted = [c.strip() for c in args.curves.split(",") if c.strip()]
    unknown = [c for c in wanted if c not in FIGURE_LABELS]
    if unknown or not wanted:
        raise ValueError(f"unknown curves {unknown}; choose from {','.join(FIGURE_LABELS)}")
    cols = [c for c in FIGURE_LABELS if c in wanted]
    grid = np.linspace(0.0, 0.5, args.grid)
    curves = {c.label: c for c in figure4_curves(grid, args.p1, args.p2)}
    rows = []
    for i, p in enumerate(grid):
        rows.append([p] + [curves[c].points[i][1] for c in cols])
    _write_csv(["p"] + cols, rows, out)
    return 0


def cmd_region(args, out=None) -> int:
    if args.gamma_grid < 2:
        raise ValueError("--gamma-grid needs at least 2 points")
    gammas, corners = bsc_channel_region(args.p1, args.p2, args.gamma_grid)
    _write_csv(["gamma", "rp", "rs"], [(g, c.r_p, c.r_s) for g, c in zip(gammas, corners)], out)
    return 0


def _aux_summary(source_aux, ch_aux, **extra):
    d = dict(extra)
    if source_aux is not None:
        d["equivocation"] = _num(source_aux.equivocation())
        d["information"] = _num(source_aux.information())
        d["p_u_given_s"] = [[_num(v) for v in row] for row in source_aux.aux_channel.rows]
    if ch_aux is not None:
        d["p_v"] = [_num(v) for v in ch_aux.v_dist.probs]
        d["p_w_given_v"] = [[_num(v) for v in row] for row in ch_aux.w_given_v.rows]
        d["p_x_given_w"] = [[_num(v) for v in row] for row in ch_aux.x_given_w.rows]
    return d


def _bsc_payoff(bound, p, p1, p2):
    src = FiniteDistribution.bernoulli(p)
    res = {"payoff": None, "alpha": None, "gamma": None, "feasible": False,
           "reason": None, "closure_payoff": None, "aux_summary": None}
    capacity_reason = "source entropy is not below Bob's capacity 1 - h(p1)"
    if bound == "thm1":
        val = bsc_hamming_payoff(src, p1, p2)
        closure = thm1_closure(src, p1, p2)
        res["closure_payoff"] = _num(closure)
        if val is None:
            res["reason"] = capacity_reason
            return res
        g = bsc_binding_gamma(src, p1, p2)
        aux = bsc_payoff_aux(src, p1, p2, g)
        res.update(payoff=_num(val), gamma=_num(g), feasible=True,
                   aux_summary=_aux_summary(aux[0], aux[1], family="bsc_cascade"))
        return res
    if bound == "thm2":
        strict = bsc_improved_payoff(src, p1, p2)
        closed = bsc_improved_payoff(src, p1, p2, closure=True)
        res["closure_payoff"] = _num(closed.payoff) if closed is not None else None
        if strict is None:
            res["reason"] = capacity_reason
            return res
        aux = bsc_payoff_aux(src, p1, p2, strict.gamma)
        res.update(payoff=_num(strict.payoff), alpha=_num(strict.alpha),
                   gamma=_num(strict.gamma), feasible=True,
                   aux_summary=_aux_summary(aux[0], aux[1], family="bsc_cascade"))
        return res
    return None


def _general_payoff(bound, spec, seed):
    res = {"payoff": None, "alpha": None, "gamma": None, "feasible": False,
           "reason": None, "closure_payoff": None, "aux_summary": None}
    if bound == "upper":
        ub = upper_bound_payoff(spec, seed=seed)
        if ub is None:
            res["reason"] = "no auxiliary carries the source entropy to Bob"
            return res
        res.update(payoff=_num(ub.payoff), feasible=True, closure_payoff=_num(ub.payoff),
                   aux_summary=_aux_summary(ub.source_aux, ub.ch_aux,
                                            secrecy_gap=_num(ub.secrecy_gap)))
        return res
    found = inner_bound_search(spec, improved=(bound == "thm2"), seed=seed)
    if found is None:
        res["reason"] = "no auxiliaries found inside the achievable region"
        return res
    # numerical search works on the closure of the region
    res.update(payoff=_num(found.payoff), alpha=_num(found.alpha), feasible=True,
               closure_payoff=_num(found.payoff),
               aux_summary=_aux_summary(found.source_aux, found.ch_aux, family="searched"))
    return res


def cmd_payoff(args, out=None) -> int:
    sf = _spec_from_args(args)
    res = None
    if sf.bsc is not None:
        res = _bsc_payoff(args.bound, *sf.bsc)
    if res is None:
        res = _general_payoff(args.bound, sf.system, args.seed)
    res = {"bound": args.bound, "source_entropy": _num(entropy(sf.system.source)), **res}
    _write_json(res, out)
    return 0


def cmd_simulate(args, out=None) -> int:
    sf = _spec_from_args(args)
    spec = sf.system
    if args.n < 1:
        raise ValueError("--n must be positive")
    if args.code == "identity":
        code = make_identity_code(spec, args.n)
    else:
        code = make_binning_code(spec, args.n, args.rp, args.rs, seed=args.seed, r_rand=args.rrand)
    if args.save_code:
        with open(args.save_code, "w") as fh:
            json.dump(code.to_dict(), fh)
    game = optimal_eve_payoff(spec, code)
    lhs, rhs = lemma1_gap(spec, code)
    _write_json({
        "n": args.n,
        "seed": args.seed,
        "code": code.kind,
        "error_prob": _num(game.error_prob),
        "worst_case_payoff": _num(game.worst_case_payoff),
        "weak_secrecy": _num(game.weak_secrecy),
        "condunif_exponent": _num(game.condunif_exponent),
        "lemma1": {"lhs": _num(lhs), "rhs": _num(rhs)},
    }, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wiretap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("curve", help="payoff curves over a Bernoulli(p) grid")
    sp.add_argument("--p1", type=float, default=0.0)
    sp.add_argument("--p2", type=float, default=0.3)
    sp.add_argument("--grid", type=int, default=101)
    sp.add_argument("--curves", default=",".join(FIGURE_LABELS))
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("region", help="BSC broadcast region boundary")
    sp.add_argument("--p1", type=float, required=True)
    sp.add_argument("--p2", type=float, required=True)
    sp.add_argument("--gamma-grid", type=int, default=101)
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("payoff", help="achievable or converse payoff for one system")
    _add_spec_flags(sp)
    sp.add_argument("--bound", choices=("thm1", "thm2", "upper"), default="thm1")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_payoff)

    sp = sub.add_parser("simulate", help="exact game for a small block code")
    _add_spec_flags(sp)
    sp.add_argument("--code", choices=("identity", "binning"), default="identity")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--rp", type=float, default=0.5)
    sp.add_argument("--rs", type=float, default=0.5)
    sp.add_argument("--rrand", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--save-code", help="write the code tables as JSON")
    sp.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeGuardError as e:
        print(f"wiretap: state space too large: {e}", file=sys.stderr)
        return 3
    except (ValueError, DistributionError, OSError, KeyError) as e:
        print(f"wiretap: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
