"""Command-line interface: bounds, spectra, concentrations, figures.

Every emitted table is CSV with a `# tfconc v1` header line and a comment
echoing the parsed flags, so identical invocations produce byte-identical
output.  Numbers are printed with 9 significant digits.  Exit codes:
0 success, 2 input or validation error, 3 numerical-tolerance failure.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import bounds, fock, gabor, localization, metaplectic, rearrange, regions
from .errors import ToleranceError

HEADER = "# tfconc v1"
DEFAULT_TOL = 1e-8


def _tol() -> float:
    try:
        return float(os.environ.get("TFCONC_TOL", DEFAULT_TOL))
    except ValueError:
        return DEFAULT_TOL


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flags_echo(args, names):
    parts = []
    for name in names:
        val = getattr(args, name.replace("-", "_"), None)
        if val is not None:
            parts.append(f"--{name}={val}")
    return "# flags: " + " ".join(parts)


def _load_coefficients(args):
    if args.coeffs:
        return fock.read_coeffs(args.coeffs)
    if args.signal:
        sig = gabor.read_signal(args.signal)
        n = args.basis_size or 64
        return gabor.signal_to_fock(sig, n, tol=max(_tol(), 1e-10))
    raise SystemExit2("one of --coeffs or --signal is required")


class SystemExit2(Exception):
    """Input/validation failure mapped to exit code 2."""


def cmd_bound(args):
    lines = [HEADER, _flags_echo(args, ["d", "measure", "eps", "p"])]
    rows = []
    if args.measure is None and args.eps is None:
        raise SystemExit2("bound needs --measure or --eps")
    if args.measure is not None:
        rows.append(("faber_krahn_bound", bounds.faber_krahn_bound(args.d, args.measure)))
        if args.p is not None:
            rows.append(("lieb_local_bound", bounds.lieb_local_bound(args.p, args.measure)))
            rows.append(("lp_bound", bounds.lp_bound(args.p, args.measure)))
    if args.eps is not None:
        rows.append(("min_volume", bounds.min_volume(args.d, args.eps)))
        rows.append(("prior_art_bound", bounds.prior_art_bound(args.d, args.eps)))
        rows.append(("weak_bound", bounds.weak_bound(args.eps)))
        if args.p is not None:
            rows.append(("lp_min_volume", bounds.lp_min_volume(args.p, args.eps)))
    lines.append("quantity,value")
    lines.extend(f"{k},{_fmt(v)}" for k, v in rows)
    _emit(lines, args.out)


def cmd_psi(args):
    if args.eps is None:
        raise SystemExit2("psi needs --eps")
    lines = [
        HEADER,
        _flags_echo(args, ["d", "eps"]),
        "quantity,value",
        f"psi,{_fmt(bounds.psi(args.d, args.eps))}",
    ]
    _emit(lines, args.out)


def cmd_phi(args):
    if not args.region:
        raise SystemExit2("phi needs --region")
    region = regions.read_region(args.region)
    report = localization.phi_max(region, N=args.basis_size, order=args.order)
    lines = [
        HEADER,
        _flags_echo(args, ["region", "basis-size", "order"]),
        "measure,phi,sharp_bound,gap,basis_size,truncation_estimate",
        ",".join(
            [
                _fmt(report.measure),
                _fmt(report.phi),
                _fmt(report.sharp_bound),
                _fmt(report.gap),
                str(report.basis_size),
                _fmt(report.truncation_estimate),
            ]
        ),
    ]
    _emit(lines, args.out)


def cmd_concentration(args):
    if not args.region:
        raise SystemExit2("concentration needs --region")
    region = regions.read_region(args.region)
    F = _load_coefficients(args)
    p = args.p if args.p is not None else 2.0
    m = regions.measure(region)
    conc = localization.lp_concentration(F, region, p, order=args.order)
    sharp = bounds.lp_bound(p, m)
    if p >= 2:
        lieb = localization.local_lieb(F, region, p, order=args.order)
        lieb_bound = bounds.lieb_local_bound(p, m)
        lieb_s, lieb_bound_s = _fmt(lieb), _fmt(lieb_bound)
    else:
        lieb_s = lieb_bound_s = "nan"
    lines = [
        HEADER,
        _flags_echo(args, ["region", "coeffs", "signal", "p", "order", "basis-size"]),
        "measure,p,lp_concentration,lp_bound,local_lieb,local_lieb_bound",
        ",".join([_fmt(m), _fmt(p), _fmt(conc), _fmt(sharp), lieb_s, lieb_bound_s]),
    ]
    _emit(lines, args.out)


def cmd_rearrange(args):
    if not (args.coeffs or args.signal):
        raise SystemExit2("rearrange needs --coeffs or --signal")
    F = _load_coefficients(args)
    s_max = args.s_max if args.s_max is not None else 8.0
    n = args.nodes if args.nodes is not None else 96
    lines = [HEADER, _flags_echo(args, ["coeffs", "signal", "s-max", "nodes"])]
    lines.append("s,u_star,I,one_minus_exp_minus_s")
    if s_max > 0:
        field = rearrange.density(F)
        prof = rearrange.rearrangement_profile(field, s_max, n)
        for s, us, iv in zip(prof.s_grid, prof.u_star, prof.I_vals):
            lines.append(
                ",".join([_fmt(s), _fmt(us), _fmt(iv), _fmt(-math.expm1(-s))])
            )
        lines.append("")
        lines.append("t,mu")
        for t, mu in zip(prof.t_grid, prof.mu_vals):
            lines.append(f"{_fmt(t)},{_fmt(mu)}")
    else:
        lines.append("")
        lines.append("t,mu")
    _emit(lines, args.out)


def cmd_figures(args):
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    eps_grid = [0.01 + 0.98 * i / 198 for i in range(199)]
    for d in (1, 2):
        lines = [HEADER, f"# flags: --d={d}", "eps,sharp,prior_art,weak"]
        for eps in eps_grid:
            lines.append(
                ",".join(
                    [
                        _fmt(eps),
                        _fmt(bounds.min_volume(d, eps)),
                        _fmt(bounds.prior_art_bound(d, eps)),
                        _fmt(bounds.weak_bound(eps)),
                    ]
                )
            )
        _emit(lines, os.path.join(out_dir, f"fig1_d{d}.csv"))
    lines = [HEADER, "# flags: fig2-left", "c,bound_d1,bound_d2,bound_d3"]
    for i in range(161):
        c = 8.0 * i / 160
        lines.append(
            ",".join([_fmt(c)] + [_fmt(bounds.gamma_ratio(d, c)) for d in (1, 2, 3)])
        )
    _emit(lines, os.path.join(out_dir, "fig2_left.csv"))
    lines = [HEADER, "# flags: fig2-right", "eps,psi1,psi2,psi3"]
    for eps in eps_grid:
        lines.append(
            ",".join([_fmt(eps)] + [_fmt(bounds.psi(d, eps)) for d in (1, 2, 3)])
        )
    _emit(lines, os.path.join(out_dir, "fig2_right.csv"))


def cmd_covariance(args):
    if not (args.sl2 and args.region and args.signal):
        raise SystemExit2("covariance needs --sl2, --region and --signal")
    try:
        a, b, c, d = (float(v) for v in args.sl2.split(","))
    except ValueError as exc:
        raise SystemExit2(f"bad --sl2 value {args.sl2!r}: {exc}") from exc
    A = metaplectic.SL2Matrix(a, b, c, d)
    region = regions.read_region(args.region)
    sig = gabor.read_signal(args.signal)
    rep = metaplectic.covariance_check(sig, A, region, order=args.order or 16)
    lines = [
        HEADER,
        _flags_echo(args, ["sl2", "region", "signal", "order"]),
        "lhs,rhs,rel_err",
        ",".join([_fmt(rep.lhs), _fmt(rep.rhs), _fmt(rep.rel_err)]),
    ]
    _emit(lines, args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tfconc",
        description="Time-frequency concentration toolkit "
        "(set TFCONC_TOL to override the default 1e-8 tolerance)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, flags):
        if "d" in flags:
            p.add_argument("--d", type=int, default=1)
        if "measure" in flags:
            p.add_argument("--measure", type=float)
        if "eps" in flags:
            p.add_argument("--eps", type=float)
        if "p" in flags:
            p.add_argument("--p", type=float)
        if "region" in flags:
            p.add_argument("--region")
        if "signal" in flags:
            p.add_argument("--signal")
        if "coeffs" in flags:
            p.add_argument("--coeffs")
        if "basis-size" in flags:
            p.add_argument("--basis-size", type=int, dest="basis_size")
        if "order" in flags:
            p.add_argument("--order", type=int)
        if "s-max" in flags:
            p.add_argument("--s-max", type=float, dest="s_max")
        if "nodes" in flags:
            p.add_argument("--nodes", type=int)
        if "sl2" in flags:
            p.add_argument("--sl2")
        p.add_argument("--out")

    p = sub.add_parser("bound", help="closed-form concentration and volume bounds")
    common(p, ["d", "measure", "eps", "p"])
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("psi", help="inverse of the survival function")
    common(p, ["d", "eps"])
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("phi", help="maximal concentration of a region")
    common(p, ["region", "basis-size", "order"])
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("concentration", help="per-function concentration functionals")
    common(p, ["region", "signal", "coeffs", "p", "order", "basis-size"])
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("rearrange", help="rearrangement profile tables")
    common(p, ["coeffs", "signal", "s-max", "nodes", "basis-size"])
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("figures", help="CSV data behind the comparison figures")
    common(p, [])
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("covariance", help="symplectic covariance dual-path check")
    common(p, ["sl2", "region", "signal", "order"])
    p.set_defaults(func=cmd_covariance)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
