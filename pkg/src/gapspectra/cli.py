"""Command line interface.

Exit status: 0 on success, 2 for usage errors (bad flags, malformed profiles),
1 for computation errors.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import asymptotics, bandstructure, fd_oracle, sturm, tree as treemod
from .model import GapSpectraError, HALF_LINE, Interval, Potential, make_tree

FMT = "{:.12g}"


def fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    return FMT.format(float(x))


class UsageError(Exception):
    pass


def parse_profile(text, sign):
    """``power:GAMMA``, ``exp:KAPPA``, ``table:FILE`` or an inline JSON object."""
    text = text.strip()
    try:
        if text.startswith("{"):
            q = Potential.from_json(json.loads(text))
            return q.with_sign(sign) if sign is not None else q
        kind, _, arg = text.partition(":")
        s = -1 if sign is None else sign
        if kind == "power":
            return Potential.power(float(arg), sign=s)
        if kind == "exp":
            return Potential.exponential(float(arg), sign=s)
        if kind == "table":
            with open(arg) as fh:
                d = json.load(fh)
            d.setdefault("sign", s)
            return Potential.from_json(d)
    except (ValueError, OSError, GapSpectraError) as exc:
        raise UsageError(f"cannot parse profile {text!r}: {exc}") from exc
    raise UsageError(f"unknown profile {text!r}; use power:G, exp:K, table:FILE or JSON")


def _interval(args):
    """``--interval R1,R2``; ``R2`` may be ``inf`` for the half-line."""
    try:
        r1, r2 = (float(x) for x in str(args.interval).split(","))
        return Interval(r1, r2)
    except (ValueError, GapSpectraError) as exc:
        raise UsageError(f"bad --interval {args.interval!r}: {exc}") from exc


def _writer(out):
    return csv.writer(out, lineterminator="\n")


# subcommands

def cmd_bands(args, out):
    tr = make_tree(args.b)
    bands, gaps = bandstructure.bands_and_gaps(tr, args.lmax)
    w = _writer(out)
    # row l: band l and the gap above it, which holds the free eigenvalue (pi l)^2
    w.writerow(["l", "band_lo", "band_hi", "gap_lo", "gap_hi", "mid_eigenvalue"])
    g0 = gaps[0]
    w.writerow([0, "", "", fmt(g0.lambda_minus), fmt(g0.lambda_plus), ""])
    for (lo, hi), g in zip(bands, gaps[1:]):
        w.writerow([g.l, fmt(lo), fmt(hi), fmt(g.lambda_minus), fmt(g.lambda_plus), fmt(g.mid)])


def cmd_dos(args, out):
    tr = make_tree(args.b)
    if args.lam:
        lams = np.array(args.lam, dtype=float)
    else:
        lams = np.linspace(args.lam_min, args.lam_max, args.points)
    om = np.atleast_1d(bandstructure.omega(tr, lams))
    w = _writer(out)
    w.writerow(["lambda", "omega", "rho"])
    for lam, o in zip(lams, om):
        w.writerow([fmt(lam), fmt(o), fmt(o / math.pi)])


def cmd_count(args, out):
    tr = make_tree(args.b)
    q = parse_profile(args.profile, args.sign)
    delta = _interval(args)
    quantity = args.quantity or ("M" if args.lam2 is None else "window")
    if quantity == "N":
        res = sturm.count_N(tr, q.scaled(args.g), args.lam, delta, rtol=args.tol)
    elif quantity == "M":
        res = sturm.count_M(tr, q.sign, q, args.g, args.lam, delta, rtol=args.tol)
    else:
        if args.lam2 is None:
            raise UsageError("window counts need --lambda2")
        res = sturm.count_window(tr, q.sign, q, args.g, args.lam, args.lam2, delta, rtol=args.tol)
    d = res.to_json()
    if d["truncation_radius"] is not None:
        d["truncation_radius"] = float(fmt(d["truncation_radius"]))
    out.write(json.dumps(d, sort_keys=True) + "\n")


def cmd_tree_count(args, out):
    tr = make_tree(args.b)
    q = parse_profile(args.profile, args.sign)
    quantity = args.quantity
    if quantity is None:
        prefix = "tilde" if args.flat else "tree"
        quantity = prefix + ("_M" if args.lam2 is None else "_N")
    fn = treemod.QUANTITIES[quantity]
    if quantity.endswith("_N"):
        if args.lam2 is None:
            raise UsageError("window counts need --lambda2")
        val = fn(tr, q.sign, q, args.g, args.lam, args.lam2, threads=args.threads)
    else:
        val = fn(tr, q.sign, q, args.g, args.lam, threads=args.threads)
    out.write(json.dumps({"quantity": quantity, "value": val}) + "\n")


def _log_grid(args):
    lo, hi = math.log(args.g_min), math.log(args.g_max)
    n = max(2, int(round((hi - lo) / math.log(10.0) * args.points_per_decade)) + 1)
    return np.linspace(lo, hi, n)


def cmd_sweep(args, out):
    tr = make_tree(args.b)
    q = parse_profile(args.profile, args.sign)
    rows = treemod.sweep(tr, q.sign, q, args.lam, _log_grid(args), args.quantity,
                         lam2=args.lam2, threads=args.threads)
    w = _writer(out)
    w.writerow(["g", "count"])
    for g, c in rows:
        w.writerow([fmt(g), c])


_LAWS = {
    "weyl": "Weyl", "nonweyl": "NonWeylPower", "g2": "CriticalGamma2",
    "exp-tildem": "ExpTildeM", "critic": "ExpCriticalKappa", "lnm": "LnMRate",
    "renewal": "RenewalPeriodic",
}


def _law_count(tr, law, q, g, lam):
    if law.quantity == "M":
        return sturm.count_M(tr, q.sign, q, g, lam, HALF_LINE).value
    return treemod.QUANTITIES[law.quantity](tr, q.sign, q, g, lam)


def cmd_asymptotics(args, out):
    tr = make_tree(args.b)
    w = _writer(out)
    if args.law == "renewal":
        if not args.input or args.kappa is None:
            raise UsageError("--law renewal needs --input SWEEP.csv and --kappa")
        if args.profile is not None and parse_profile(args.profile, args.sign).kind != "exp":
            print("warning: log-periodic structure is only established for exactly "
                  "exponential profiles", file=sys.stderr)
        with open(args.input) as fh:
            rows = [(float(r["g"]), float(r["count"])) for r in csv.DictReader(fh)]
        law = asymptotics.predicted_law("RenewalPeriodic", {"tree": tr, "kappa": args.kappa})
        samples = [(math.log(g), c / law.normalization(g)) for g, c in rows]
        prof = asymptotics.renewal_extract(samples, 2.0 * args.kappa, bins=args.bins)
        origin = min(s[0] for s in samples)
        w.writerow(["g", "raw_count", "normalized", "predicted", "ratio"])
        for (g, c), (lg, v) in zip(rows, samples):
            ph = ((lg - origin) / prof.period) % 1.0
            p = prof.mean_profile[min(int(ph * args.bins), args.bins - 1)]
            w.writerow([fmt(g), int(c), fmt(v), fmt(p), fmt(v / p if p else math.nan)])
        return
    q = parse_profile(args.profile, args.sign)
    params = {"tree": tr, "q": q, "sign": q.sign, "lam": args.lam, "crossing": bool(args.crossing)}
    if q.kind == "power":
        params["gamma"] = q.gamma
    if q.kind == "exp":
        params["kappa"] = q.kappa
    law = asymptotics.predicted_law(_LAWS[args.law], params)
    w.writerow(["g", "raw_count", "normalized", "predicted", "ratio"])
    for lg in _log_grid(args):
        g = math.exp(lg)
        c = _law_count(tr, law, q, g, args.lam)
        v = law.normalized(g, c)
        w.writerow([fmt(g), c, fmt(v), fmt(law.limit), fmt(v / law.limit)])


def cmd_oracle_check(args, out):
    cases, draws = fd_oracle.oracle_check(args.cases, args.seed, 1.0 / args.nodes_per_unit)
    w = _writer(out)
    h = 1.0 / args.nodes_per_unit
    w.writerow(["case", "lambda", "prufer_count", "fd_count", "h", "b", "profile", "g",
                "r1", "r2", "result"])
    bad = 0
    for i, c in enumerate(cases):
        bad += not c.agree
        w.writerow([i, fmt(c.lam), c.prufer, c.fd, fmt(h), c.b,
                    json.dumps(c.profile, sort_keys=True), fmt(c.g), fmt(c.delta[0]),
                    fmt(c.delta[1]), "pass" if c.agree else "FAIL"])
    print(f"# compared {len(cases)} resolved cases out of {draws} draws; disagreements: {bad}",
          file=sys.stderr)
    if bad:
        raise GapSpectraError(f"{bad} oracle disagreements")


# parser

def _add_common(p, profile=True):
    p.add_argument("--b", type=int, help="branching number (>= 2)")
    if profile:
        p.add_argument("--profile", help="power:GAMMA, exp:KAPPA, table:FILE or JSON")
        p.add_argument("--sign", type=int, choices=[-1, 1])
        p.add_argument("--g", type=float, help="coupling constant")
        p.add_argument("--lambda", "--lambda1", "--lam", dest="lam", type=float,
                       help="spectral parameter (lower end of a window)")
        p.add_argument("--lambda2", "--lam2", dest="lam2", type=float, help="upper end of a window")


def _add_grid(p):
    p.add_argument("--g-min", type=float)
    p.add_argument("--g-max", type=float)
    p.add_argument("--points-per-decade", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="gapspectra",
                                     description="Eigenvalue counts in spectral gaps of regular trees.")
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="band and gap edges")
    _add_common(p, profile=False)
    p.add_argument("--lmax", type=int)

    p = sub.add_parser("dos", help="quasi-momentum and density of states")
    _add_common(p, profile=False)
    p.add_argument("--lambda", "--lam", dest="lam", type=float, nargs="*")
    p.add_argument("--lambda-min", "--lam-min", dest="lam_min", type=float)
    p.add_argument("--lambda-max", "--lam-max", dest="lam_max", type=float)
    p.add_argument("--points", type=int)

    p = sub.add_parser("count", help="count eigenvalues of one half-line problem")
    _add_common(p)
    p.add_argument("--quantity", choices=["N", "M", "window"],
                   help="default: M, or window when --lambda2 is given")
    p.add_argument("--interval", help="R1,R2 with R2 = inf for the half-line (default 0,inf)")
    p.add_argument("--tol", type=float, help="relative tolerance of the phase integration")

    p = sub.add_parser("tree-count", help="weighted or unweighted sums over generations")
    _add_common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--weighted", action="store_true", help="multiplicity-weighted sum (default)")
    mode.add_argument("--flat", action="store_true", help="unweighted sum over generations")
    p.add_argument("--quantity", choices=sorted(treemod.QUANTITIES), help="overrides --weighted/--flat")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("sweep", help="tree counts over a geometric grid of couplings")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--quantity", choices=sorted(treemod.QUANTITIES))
    p.add_argument("--threads", type=int)

    p = sub.add_parser("asymptotics", help="compare counts with a predicted growth law")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--law", choices=sorted(_LAWS))
    p.add_argument("--input", help="sweep CSV (renewal law)")
    p.add_argument("--kappa", type=float, help="exponential rate (renewal law)")
    p.add_argument("--bins", type=int)
    p.add_argument("--crossing", action="store_true", default=None,
                   help="lnm: measure the threshold to the free gap eigenvalue when it is closer")

    p = sub.add_parser("oracle-check", help="finite-element cross-check on random cases")
    p.add_argument("--cases", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nodes-per-unit", type=int)
    return parser


DEFAULTS = {
    "b": 4, "lmax": 3, "lam_min": 0.0, "lam_max": 40.0, "points": 81, "quantity": None,
    "interval": "0,inf", "tol": sturm.RTOL, "g": 1.0, "points_per_decade": 4, "bins": 64, "cases": 100, "seed": 0,
    "nodes_per_unit": 64, "threads": None, "crossing": False,
}
_QUANTITY_DEFAULT = {"sweep": "tree_M"}
_REQUIRED = {
    "count": ["profile", "lam"], "tree-count": ["profile", "lam"],
    "sweep": ["profile", "lam", "g_min", "g_max"],
    "asymptotics": ["law"],
}


_CONFIG_ALIASES = {"lambda": "lam", "lambda1": "lam", "lambda2": "lam2",
                   "lambda_min": "lam_min", "lambda_max": "lam_max"}
_FLAG_NAMES = {"lam": "lambda", "lam2": "lambda2"}


def _flag(k):
    return "--" + _FLAG_NAMES.get(k, k).replace("_", "-")


def _apply_config(args, parser):
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
        for k, v in cfg.items():
            k = k.replace("-", "_")
            k = _CONFIG_ALIASES.get(k, k)
            if getattr(args, k, None) is None:
                setattr(args, k, v)
    for k, v in DEFAULTS.items():
        if hasattr(args, k) and getattr(args, k) is None:
            setattr(args, k, v)
    if hasattr(args, "quantity") and args.quantity is None:
        args.quantity = _QUANTITY_DEFAULT.get(args.command)
    for k in _REQUIRED.get(args.command, []):
        if getattr(args, k, None) is None:
            parser.error(f"{args.command}: missing {_flag(k)}")
    if args.command == "asymptotics" and args.law != "renewal":
        for k in ("profile", "lam", "g_min", "g_max"):
            if getattr(args, k, None) is None:
                parser.error(f"asymptotics: missing {_flag(k)}")


COMMANDS = {
    "bands": cmd_bands, "dos": cmd_dos, "count": cmd_count, "tree-count": cmd_tree_count,
    "sweep": cmd_sweep, "asymptotics": cmd_asymptotics, "oracle-check": cmd_oracle_check,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        parser.error(str(exc))
    except GapSpectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
