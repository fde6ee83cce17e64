"""Command-line driver for the convergence experiments and verification suites.

Exit codes: 0 ok, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from pathlib import Path

import numpy as np

from . import estimate, nets, randomize, testfns, walsh
from . import rng as rngmod
from .gf2 import DomainError

CSV_HEADER = ["method", "function", "param", "m", "n", "trials", "rmse", "seconds"]
M_MAX = 20

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_m_range(text: str) -> list[int]:
    """``"4..10"``, ``"8"`` or ``"4,6,8"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad m range {text!r}") from None
    if not values:
        raise UsageError(f"empty m range {text!r}")
    if min(values) < 0 or max(values) > M_MAX:
        raise UsageError(f"m values must lie in [0, {M_MAX}]")
    return values


def _directions(args) -> nets.SobolDirections:
    if getattr(args, "directions", None):
        return nets.load_joe_kuo(args.directions)
    return nets.default_directions()


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def write_rmse_csv(records, fh, timing: bool = False) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.method, r.function, r.param, r.m, r.n, r.trials, repr(r.rmse), f"{r.seconds:.3f}" if timing else "0"])


def read_rmse_csv(path) -> list[estimate.RmseRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        estimate.RmseRecord(
            row["method"], row["function"], row["param"], int(row["m"]), int(row["n"]),
            int(row["trials"]), float(row["rmse"]), float(row["seconds"]),
        )
        for row in rows
    ]


# ------------------------------------------------------------ subcommands


def run_rmse(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for meth in methods:
        if meth not in estimate.METHODS:
            raise UsageError(f"unknown method {meth!r}; choose from {', '.join(estimate.METHODS)}")
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    m_values = parse_m_range(args.m)
    kw = {"s": args.dim} if args.dim is not None else {}
    f = testfns.get(args.fn, args.param, **kw)
    directions = _directions(args) if args.directions else None
    records = estimate.rmse_study(
        methods, f, m_values, args.trials, args.seed,
        mu=args.mu, r=args.r, workers=args.workers, directions=directions, param=args.param or "",
    )
    out = _open_out(args.out)
    try:
        write_rmse_csv(records, out, timing=args.timing)
    finally:
        if out is not sys.stdout:
            out.close()
    for meth in methods:
        rows = [r for r in records if r.method == meth]
        try:
            slope = estimate.slope_fit(rows, window=None)
            print(f"# {meth}: log2-rmse slope {slope:.3f} over m={rows[0].m}..{rows[-1].m}", file=sys.stderr)
        except DomainError:
            pass
    return EXIT_OK


def run_verify_net(args) -> int:
    m_values = parse_m_range(args.m)
    print("method,s,m,t")
    worst = 0
    for m in m_values:
        if args.method == "sobol":
            net = nets.sobol_net(args.s, m, _directions(args))
        else:
            if args.seed is None:
                raise UsageError(f"--seed is required for {args.method}")
            g = rngmod.stream(args.seed, f"verify-{args.method}", m)
            if args.method == "crd":
                net = randomize.completely_random_design(args.s, m, g)
            else:
                net = randomize.linear_scramble(nets.sobol_net(args.s, m, _directions(args)), g)
        pts = nets.generate_pointset(net.unshifted())
        t = nets.minimal_t(pts) if m > 0 else 0
        worst = max(worst, t)
        print(f"{args.method},{args.s},{m},{t}")
    if args.expect_t is not None and worst > args.expect_t:
        print(f"# t={worst} exceeds expected {args.expect_t}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def walsh_identity_suite(pairs: int, seed: int, perturb: float = 0.0, out=None) -> bool:
    """Error-decomposition identity over random (net, Walsh polynomial) pairs."""
    out = out or sys.stdout
    for i in range(pairs):
        g = rngmod.stream(seed, "walsh-check", i)
        s = int(g.integers(1, 4))
        m = int(g.integers(2, 7))
        poly = walsh.random_walsh_polynomial(s, 10, m + 2, g)
        if g.integers(2):
            kind = "crd"
            net = randomize.completely_random_design(s, m, g)
        else:
            kind = "rls"
            net = randomize.linear_scramble(nets.sobol_net(s, m), g)
        coeffs = poly.coeffs
        if perturb:
            # k -> k^T C_1 on m+1 digits has a nonzero kernel, so a dual index exists here
            dual = next(
                k for k in (walsh.WalshIndex((v,) + (0,) * (s - 1)) for v in range(1, 1 << (m + 1)))
                if walsh.Z(k, net)
            )
            coeffs = poly.perturbed(dual, perturb).coeffs
        lhs, rhs = walsh.error_decomposition_check(poly, net, coeffs)
        if abs(lhs - rhs) > 1e-12 * poly.l1():
            print(f"FAIL pair {i} ({kind}, s={s}, m={m}): |lhs-rhs| = {abs(lhs - rhs):.3e}", file=out)
            return False
    return True


def kernel_identity_suite(max_digit: int = 6, max_size: int = 4, out=None) -> bool:
    out = out or sys.stdout
    ok = True
    for size in range(1, max_size + 1):
        for kappa in itertools.combinations(range(1, max_digit + 1), size):
            ker = walsh.WKernel(kappa)
            integral = walsh.gauss_cells(ker.at, ker.level, size + 1)
            grid = np.arange(1 << (ker.level + 4)) / float(1 << (ker.level + 4))
            vals = ker.at(grid)
            peak = float(vals.max())
            per = ker.at((grid + ker.period) % 1.0)
            errs = (
                abs(integral - walsh.kernel_integral_closed_form(kappa)),
                abs(peak - walsh.kernel_max_closed_form(kappa)),
                float(np.max(np.abs(per - vals))),
            )
            if max(errs) > 1e-10:
                print(f"FAIL kappa={kappa}: integral/max/period errors {errs}", file=out)
                ok = False
    return ok


def run_walsh_check(args) -> int:
    ok = walsh_identity_suite(args.pairs, args.seed, args.perturb)
    ok = kernel_identity_suite(args.kappa_max, args.kappa_size) and ok
    print("walsh-check: " + ("pass" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


def run_mean_dim(args) -> int:
    print("c,s,mean_dimension,excess")
    for c in args.c:
        md = testfns.mean_dimension(c, args.s)
        print(f"{c:g},{args.s},{md:.10f},{md - 1:.3e}")
    return EXIT_OK


def run_spectra(args) -> int:
    """Walsh coefficients of a one-dimensional integrand, all k < 2**level."""
    f = testfns.get(args.fn, args.param)
    if f.s != 1:
        raise UsageError("spectra supports one-dimensional integrands only")
    out = _open_out(args.out)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["k", "kappa_size", "top_digit", "coefficient"])
        for k in range(1, 1 << args.level):
            idx = walsh.WalshIndex.of(k)
            coef = walsh.walsh_coefficient(f, idx, args.grid)
            w.writerow([k, bin(k).count("1"), k.bit_length(), repr(coef)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmcmedian", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rmse", help="RMSE convergence study, CSV output")
    r.add_argument("--fn", required=True, help="integrand id (falpha, fc, or registered)")
    r.add_argument("--param", default=None, help="integrand parameter (alpha* or c)")
    r.add_argument("--dim", type=int, default=None, help="dimension for fc (default 20)")
    r.add_argument("--methods", default="median-rls,median-crd,dn1")
    r.add_argument("--m", default="1..12", help="m range, e.g. 4..10")
    r.add_argument("--trials", type=int, default=50)
    r.add_argument("--r", type=int, default=None, help="median half-count (default r = m)")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--mu", type=float, default=None, help="reference integral for integrands without one")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--directions", default=None)
    r.add_argument("--timing", action="store_true", help="record wall seconds (output no longer reproducible)")
    r.add_argument("--out", default="-")
    r.set_defaults(func=run_rmse)

    v = sub.add_parser("verify-net", help="minimal t of Sobol'/scrambled/random nets")
    v.add_argument("--method", choices=["sobol", "rls", "crd"], default="sobol")
    v.add_argument("--s", type=int, default=2)
    v.add_argument("--m", default="8")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--expect-t", type=int, default=None)
    v.add_argument("--directions", default=None)
    v.set_defaults(func=run_verify_net)

    w = sub.add_parser("walsh-check", help="error-decomposition and W-kernel identities")
    w.add_argument("--pairs", type=int, default=200)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--kappa-max", type=int, default=6)
    w.add_argument("--kappa-size", type=int, default=4)
    w.add_argument("--perturb", type=float, default=0.0, help="inject a coefficient error (harness test)")
    w.set_defaults(func=run_walsh_check)

    d = sub.add_parser("mean-dim", help="mean dimension of f_c")
    d.add_argument("--c", type=float, nargs="+", default=[0.5, 1.5, 2.5])
    d.add_argument("--s", type=int, default=20)
    d.set_defaults(func=run_mean_dim)

    sp = sub.add_parser("spectra", help="Walsh spectrum of a 1-d integrand, CSV output")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--param", default=None)
    sp.add_argument("--level", type=int, default=6, help="list all k < 2**level")
    sp.add_argument("--grid", type=int, default=16, help="midpoint grid level")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=run_spectra)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, testfns.ConfigError, DomainError, nets.ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
