"""Command-line front end.

Subcommands: dim, pressure, recur, en, corr, cover. All reports are
deterministic given the flags (seeded counter-based sampling, no
timestamps), so identical invocations produce byte-identical files.

Exit codes: 0 success, 2 input validation, 3 budget exceeded,
4 numerical bracket failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import ensets
from .dimension import pressure_estimate, solve_gamma
from .dynamics import recurrence_mc
from .errors import BracketError, BudgetError, ValidationError
from .ifs import load_ifs
from .intervals import Interval
from .rates import parse_rate
from .reports import iv_json, write_csv, write_json
from .words import Word


def _add_common(p: argparse.ArgumentParser, phi: bool = False) -> None:
    p.add_argument("--ifs", required=True, help="IFS spec JSON file")
    p.add_argument("--gamma", type=float, default=None,
                   help="override the dimension exponent (default: solve)")
    p.add_argument("--depth", type=int, default=10,
                   help="enumeration depth for pressure bounds / covering start")
    p.add_argument("--out", default=None, help="output base path (suffix stripped)")
    p.add_argument("--threads", type=int, default=1)
    if phi:
        p.add_argument("--phi", required=True,
                       help="rate spec: power:c=1,a=1 | geom:rho=0.5 | logcorr | table:@f.csv")
        p.add_argument("--root", default="", help="root word digits, e.g. 01")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="confrec",
        description="dimension and quantitative-recurrence experiments for conformal IFS",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="solve the dimension exponent")
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("pressure", help="finite-depth pressure bounds on a grid")
    _add_common(p)

    p = sub.add_parser("recur", help="Monte Carlo recurrence dichotomy")
    _add_common(p, phi=True)
    p.add_argument("--Q", type=int, default=25, help="largest return time n")
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--L", type=int, default=None, help="coding depth (default Q+30)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block", type=int, default=1, help="sampling block length")

    p = sub.add_parser("en", help="recurrence target families and series ratios")
    _add_common(p, phi=True)
    p.add_argument("--Q", type=int, required=True)

    p = sub.add_parser("corr", help="second moments and the Chung-Erdos bound")
    _add_common(p, phi=True)
    p.add_argument("--Q", type=int, required=True)

    p = sub.add_parser("cover", help="covering-side tail sums")
    _add_common(p, phi=True)
    p.add_argument("--Q", type=int, default=10, help="span of the tail window")
    return ap


def _base(out: str) -> Path:
    path = Path(out)
    if path.suffix in (".json", ".csv"):
        path = path.with_suffix("")
    return path


def _resolve_gamma(args, ifs, depth=None) -> tuple[float, dict]:
    if args.gamma is not None:
        return float(args.gamma), {"gamma_source": "override", "gamma": args.gamma}
    res = solve_gamma(ifs, depth=depth if depth is not None else args.depth)
    return res.gamma.mid, {
        "gamma_source": res.method,
        "gamma": res.gamma.mid,
        "gamma_interval": iv_json(res.gamma),
        "depth_used": res.depth_used,
    }


def _params(args, extra=()) -> dict:
    # the output path is deliberately not echoed so identical configurations
    # produce byte-identical reports wherever they are written
    keep = ["command", "ifs", "gamma", "depth", "threads", "phi", "root",
            "Q", "points", "L", "seed", "tol", "block"]
    d = {}
    for k in keep:
        if hasattr(args, k):
            d[k] = getattr(args, k)
    for k, v in extra:
        d[k] = v
    return d


def cmd_dim(args) -> int:
    ifs = load_ifs(args.ifs)
    res = solve_gamma(ifs, tol=args.tol, depth=args.depth)
    print(f"gamma in [{res.gamma.lo:.15g}, {res.gamma.hi:.15g}] "
          f"(width {res.gamma.width:.3g}, method {res.method})")
    if args.out:
        write_json(_base(args.out).with_suffix(".json"), {
            "params": _params(args),
            "method": res.method,
            "depth_used": res.depth_used,
            "gamma": iv_json(res.gamma),
        })
    return 0


def cmd_pressure(args) -> int:
    ifs = load_ifs(args.ifs)
    gamma, ginfo = _resolve_gamma(args, ifs)
    grid = sorted({0.0, 0.5 * gamma, 0.9 * gamma, gamma, 1.1 * gamma, 1.5 * gamma, 1.0})
    rows = []
    for s in grid:
        est = pressure_estimate(ifs, s, args.depth)
        rows.append([s, args.depth, est.value_lower, est.value_upper,
                     est.partition_sum.lo, est.partition_sum.hi])
    header = ["s", "depth", "value_lower", "value_upper", "partition_lo", "partition_hi"]
    for row in rows:
        print(f"s={row[0]:.6f}  P in [{row[2]:.6f}, {row[3]:.6f}]")
    if args.out:
        base = _base(args.out)
        write_csv(base.with_suffix(".csv"), header, rows)
        write_json(base.with_suffix(".json"), {
            "params": _params(args, ginfo.items()),
            "rows": [dict(zip(header, r)) for r in rows],
        })
    return 0


def cmd_recur(args) -> int:
    ifs = load_ifs(args.ifs)
    gamma, ginfo = _resolve_gamma(args, ifs)
    phi = parse_rate(args.phi, gamma)
    depth = args.L if args.L is not None else args.Q + 30
    if depth <= args.Q:
        raise ValidationError(f"--L {depth} must exceed --Q {args.Q}")
    data = recurrence_mc(ifs, gamma, phi, args.points, args.Q, depth, args.seed,
                         block=args.block, threads=args.threads)

    half = max(1, args.Q // 2)
    summary = {
        "params": _params(args, ginfo.items()),
        "rate": phi.label,
        "divergent": data.divergent,
        "unknown_fraction": data.unknown_fraction,
        "unknown_flag": bool(data.unknown_fraction > 0.05),
        "fraction_with_hit_total": data.fraction_with_hit(1, args.Q),
        "fraction_with_hit_early": data.fraction_with_hit(1, half),
        "fraction_with_hit_late": data.fraction_with_hit(half + 1, args.Q),
        "mean_hit_count": float(np.mean(data.hit_count)),
    }
    print(f"recur: {args.points} points, n <= {args.Q}, "
          f"mean hits {summary['mean_hit_count']:.3f}, "
          f"unknown {data.unknown_fraction:.2%}")

    if args.out:
        base = _base(args.out)
        header = ["n", "hit_rate", "unknown_rate", "phi_gamma", "rate_ratio"]
        rows = [
            [int(n), float(h), float(u), float(p), float(r)]
            for n, h, u, p, r in zip(data.n_values, data.hit_rate, data.unknown_rate,
                                     data.phi_gamma, data.rate_ratio)
        ]
        write_csv(base.with_suffix(".csv"), header, rows,
                  comments=[f"rate={phi.label}", f"seed={args.seed}"])
        pheader = ["index", "hit_count", "first_hit"]
        prows = [[i, int(c), int(f)] for i, (c, f) in
                 enumerate(zip(data.hit_count, data.first_hit))]
        write_csv(base.with_name(base.name + "_points").with_suffix(".csv"),
                  pheader, prows, comments=[f"rate={phi.label}", f"seed={args.seed}"])
        write_json(base.with_suffix(".json"), summary)
    return 0


def cmd_en(args) -> int:
    ifs = load_ifs(args.ifs)
    gamma, ginfo = _resolve_gamma(args, ifs)
    phi = parse_rate(args.phi, gamma)
    root = Word.parse(args.root)
    series = ensets.en_series(ifs, gamma, phi, root, args.Q, threads=args.threads)

    header = ["n", "members", "nu_En", "phi_gamma", "ratio",
              "nu_lo", "nu_hi", "ratio_lo", "ratio_hi"]
    rows = []
    for fam, (q, ratio) in zip(series.families, series.ratios):
        rows.append([fam.n, len(fam.members), fam.nu_measure.mid, phi.phi_gamma(fam.n),
                     ratio.mid, fam.nu_measure.lo, fam.nu_measure.hi, ratio.lo, ratio.hi])
        print(f"n={fam.n}: members={len(fam.members)} nu={fam.nu_measure.mid:.6g} "
              f"ratio={ratio.mid:.6g}")
    if args.out:
        base = _base(args.out)
        write_csv(base.with_suffix(".csv"), header, rows,
                  comments=[f"rate={phi.label}", f"root={args.root or '(empty)'}"])
        write_json(base.with_suffix(".json"), {
            "params": _params(args, ginfo.items()),
            "rate": phi.label,
            "nu_root": iv_json(series.nu_root),
            "rows": [dict(zip(header, r)) for r in rows],
        })
    return 0


def cmd_corr(args) -> int:
    ifs = load_ifs(args.ifs)
    gamma, ginfo = _resolve_gamma(args, ifs)
    phi = parse_rate(args.phi, gamma)
    root = Word.parse(args.root)
    reports = ensets.second_moment_series(ifs, gamma, phi, root, args.Q,
                                          threads=args.threads)
    consts = ensets.system_constants(ifs, gamma)

    header = ["n", "S", "S2", "ce_lower", "S_lo", "S_hi", "S2_lo", "S2_hi",
              "ce_lo", "ce_hi", "c_fit"]
    rows = []
    for rep in reports:
        rows.append([rep.Q, rep.S.mid, rep.S2.mid, rep.ce_lower.mid,
                     rep.S.lo, rep.S.hi, rep.S2.lo, rep.S2.hi,
                     rep.ce_lower.lo, rep.ce_lower.hi, rep.c_fit])
        print(f"Q={rep.Q}: S={rep.S.mid:.6g} S2={rep.S2.mid:.6g} "
              f"ce_lower={rep.ce_lower.mid:.6g}")
    if args.out:
        base = _base(args.out)
        write_csv(base.with_suffix(".csv"), header, rows,
                  comments=[f"rate={phi.label}", f"root={args.root or '(empty)'}",
                            f"kappa={reports[-1].kappa!r}"])
        write_json(base.with_suffix(".json"), {
            "params": _params(args, ginfo.items()),
            "rate": phi.label,
            "kappa": reports[-1].kappa,
            "constants": consts.__dict__,
            "rows": [dict(zip(header, r)) for r in rows],
        })
    return 0


def cmd_cover(args) -> int:
    ifs = load_ifs(args.ifs)
    # --depth is the tail window start here; gamma solves at its own depth
    gamma, ginfo = _resolve_gamma(args, ifs, depth=10)
    phi = parse_rate(args.phi, gamma)
    terms = ensets.covering_terms(ifs, gamma, phi, args.depth, args.Q)
    consts = ensets.system_constants(ifs, gamma)

    header = ["n", "term", "tail", "term_lo", "term_hi", "tail_lo", "tail_hi"]
    rows = []
    # tail[n] = sum of terms from n to the end of the window
    suffix = Interval.point(0.0)
    tails = []
    for n, term in reversed(terms):
        suffix = suffix + term
        tails.append((n, suffix))
    tails.reverse()
    for (n, term), (_, tail) in zip(terms, tails):
        rows.append([n, term.mid, tail.mid, term.lo, term.hi, tail.lo, tail.hi])
    total = tails[0][1]
    print(f"cover: sum over n in [{args.depth}, {args.depth + args.Q}] = "
          f"[{total.lo:.6g}, {total.hi:.6g}] (K = {consts.covering_k:.6g})")
    if args.out:
        base = _base(args.out)
        write_csv(base.with_suffix(".csv"), header, rows,
                  comments=[f"rate={phi.label}", f"K={consts.covering_k!r}"])
        write_json(base.with_suffix(".json"), {
            "params": _params(args, ginfo.items()),
            "rate": phi.label,
            "constants": consts.__dict__,
            "total": iv_json(total),
            "rows": [dict(zip(header, r)) for r in rows],
        })
    return 0


_HANDLERS = {
    "dim": cmd_dim,
    "pressure": cmd_pressure,
    "recur": cmd_recur,
    "en": cmd_en,
    "corr": cmd_corr,
    "cover": cmd_cover,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except BracketError as e:
        print(f"bracket failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
