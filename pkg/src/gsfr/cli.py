"""Command-line front end: correction functions, wavenumber analysis, studies.

Commands are grouped as ``corr`` (solve/bounds/identify), ``vn``
(dispersion/cfl/sweep), ``run`` (advect/hetero/ooa), and ``search``
(cfl). Results go to CSV or JSON files with 17-significant-digit
numbers (round-trippable doubles); every JSON document embeds the
resolved configuration. Exit codes: 0 success, 1 invalid usage or
configuration, 2 numerical failure (singular system, blow-up, empty
search).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import pi

import numpy as np

from . import correction as corr
from . import experiments as xp
from .operators import build_reference_element, build_scheme_operators
from .spectral import cfl_limit, dispersion_sweep

FMT = "%.17g"


class _Parser(argparse.ArgumentParser):
    # validation problems are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class NumericalFailure(Exception):
    pass


def _iota_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad weight list {text!r}: {exc}") from exc


def _params(args) -> corr.CorrectionParams:
    # ValueError / GsfrError propagate to main's handler -> exit code 1
    return corr.CorrectionParams(args.p, args.iota)


def _write_text(path, text):
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_csv(path, header, columns):
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(FMT % v for v in row))
    _write_text(path, "\n".join(rows) + "\n")


def _json_doc(config: dict, result: dict) -> str:
    return json.dumps({"config": config, "result": result}, sort_keys=True) + "\n"


def _config(args, fields):
    return {name: getattr(args, name) for name in fields if hasattr(args, name)}


def _cmd_corr_solve(args):
    params = _params(args)
    pair = corr.solve_correction(params)
    _write_text(args.out, corr.pair_to_json(params, pair) + "\n")
    print(
        f"solved p={params.p}: h_l = ["
        + ", ".join(FMT % c for c in pair.h_l.coeffs)
        + "]"
    )
    return 0


def _cmd_corr_bounds(args):
    params = _params(args)
    bounds = corr.sufficient_bounds(params)
    doc = {
        "lower": [float(v) for v in bounds.lower],
        "margins": [float(v) for v in bounds.margins],
        "satisfied": bounds.satisfied,
    }
    _write_text(args.out, _json_doc(_config(args, ("p", "iota")), doc))
    verdict = "satisfied" if bounds.satisfied else "NOT satisfied"
    print(f"sufficient bounds {verdict}; margins = [" + ", ".join(FMT % v for v in bounds.margins) + "]")
    return 0


def _cmd_corr_identify(args):
    if args.infile is not None:
        with open(args.infile, encoding="utf-8") as fh:
            params, pair = corr.pair_from_json(fh.read())
    else:
        params = _params(args)
        pair = corr.solve_correction(params)
    result: dict = {"p": params.p}
    try:
        iota = corr.osfr_iota(params.p, pair.h_l)
        result["osfr_iota"] = iota if iota is None else float(iota)
    except corr.GsfrError as exc:
        result["osfr_iota"] = f"degenerate: {exc}"
    if params.p == 3:
        try:
            kappas = corr.esfr3_weights(pair.g_l)
            result["esfr_kappa"] = None if kappas is None else [float(k) for k in kappas]
        except corr.GsfrError as exc:
            result["esfr_kappa"] = f"degenerate: {exc}"
        try:
            result["recovered_iota"] = [float(v) for v in corr.recover_weights_p3(pair.h_l)]
        except corr.GsfrError as exc:
            result["recovered_iota"] = f"degenerate: {exc}"
    _write_text(args.out, _json_doc(_config(args, ("p", "iota", "infile")), result))
    osfr = result.get("osfr_iota")
    esfr = result.get("esfr_kappa")
    print(
        "identify: osfr="
        + ("not a member" if osfr is None else str(osfr))
        + ", esfr="
        + ("not a member" if esfr is None else str(esfr))
        + (", iota=" + str(result.get("recovered_iota")) if params.p == 3 else "")
    )
    return 0


def _ops_for(args):
    params = _params(args)
    pair = corr.solve_correction(params)
    element = build_reference_element(params.p, pair, args.nodes)
    return params, build_scheme_operators(element, args.alpha, 1.0)


def _cmd_vn_dispersion(args):
    params, ops = _ops_for(args)
    k_hats, om_re, om_im = dispersion_sweep(ops, args.k_samples)
    header = ["k_hat"]
    cols = [k_hats]
    for mode in range(params.p + 1):
        header += [f"re_omega_mode_{mode}", f"im_omega_mode_{mode}"]
        cols += [om_re[:, mode], om_im[:, mode]]
    _write_csv(args.out, header, cols)
    print(f"dispersion: {args.k_samples} wavenumbers, {params.p + 1} modes" + (f" -> {args.out}" if args.out else ""))
    return 0


def _cmd_vn_cfl(args):
    params, ops = _ops_for(args)
    res = cfl_limit(ops, args.rk, args.k_samples, rho_tol=args.rho_tol)
    doc = {"tau_max": res.tau_max, "worst_k_hat": res.worst_k, "k_samples": res.k_samples, "rk": res.rk}
    _write_text(args.out, _json_doc(_config(args, ("p", "iota", "alpha", "rk", "k_samples", "rho_tol")), doc))
    print(f"tau_max = {FMT % res.tau_max} ({args.rk}, worst k_hat {res.worst_k:.4f})")
    return 0


def _sweep_point(job):
    p, iota, alpha, rk, k_samples, rho_tol, nodes = job
    params = corr.CorrectionParams(p, iota)
    if not corr.sufficient_bounds(params).satisfied:
        return iota, float("nan")
    try:
        pair = corr.solve_correction(params)
        element = build_reference_element(p, pair, nodes)
        ops = build_scheme_operators(element, alpha, 1.0)
        return iota, cfl_limit(ops, rk, k_samples, rho_tol=rho_tol).tau_max
    except Exception:
        return iota, float("nan")


def _cmd_vn_sweep(args):
    grid = xp.default_search_grid(args.p, magnitudes=args.magnitudes)
    jobs = [
        (args.p, [float(v) for v in iota], args.alpha, args.rk, args.k_samples, args.rho_tol, args.nodes)
        for iota in grid
    ]
    if args.jobs > 1:
        from multiprocessing import Pool

        with Pool(args.jobs) as pool:
            results = pool.map(_sweep_point, jobs)
    else:
        results = [_sweep_point(job) for job in jobs]
    header = [f"iota_{i}" for i in range(1, args.p + 1)] + ["tau_max"]
    cols = [np.array([r[0][i] for r in results]) for i in range(1, args.p + 1)]
    cols.append(np.array([r[1] for r in results]))
    _write_csv(args.out, header, cols)
    finite = np.isfinite(cols[-1])
    best = np.nanmax(cols[-1]) if finite.any() else float("nan")
    print(f"sweep: {len(results)} points, best tau_max = {FMT % best}" + (f" -> {args.out}" if args.out else ""))
    return 0


def _cmd_run_advect(args):
    params = _params(args)
    try:
        x, u, eps = xp.advect_snapshot(
            params, args.alpha, args.n_elements, args.t_end, args.rk, args.nodes
        )
    except xp.UnstableRunError as exc:
        raise NumericalFailure(str(exc))
    _write_csv(args.out, ["x", "u"], [x, u])
    print(f"advect: N={args.n_elements}, t={args.t_end:g}, eps2 = {FMT % eps}")
    return 0


def _cmd_run_hetero(args):
    params = _params(args)
    report = xp.hetero_energy_study(
        params, args.alpha, args.n_elements, args.periods, args.cfl, args.rk, args.nodes
    )
    _write_csv(args.out, ["t", "energy"], [report.times, report.energy])
    if report.blew_up:
        raise NumericalFailure(f"energy blow-up at t = {report.blowup_time:.6g}")
    print(
        f"hetero: survived {args.periods} periods, |E(nT)-1| final = {FMT % report.error_at_periods[-1]}"
    )
    return 0


def _cmd_run_ooa(args):
    params = _params(args)
    try:
        report = xp.ooa_study(params, args.alpha, args.element_counts, args.t_end, args.rk, args.nodes)
    except xp.UnstableRunError as exc:
        raise NumericalFailure(str(exc))
    if args.out and args.out.endswith(".csv"):
        _write_csv(
            args.out,
            ["n_elements", "eps2"],
            [np.array(report.element_counts, dtype=float), report.errors],
        )
    else:
        _write_text(
            args.out,
            _json_doc(_config(args, ("p", "iota", "alpha", "rk", "t_end", "element_counts")), report.to_dict()),
        )
    print(f"ooa: fitted order = {report.fitted_order:.4f} (r^2 = {report.r_squared:.6f})")
    return 0


def _cmd_search_cfl(args):
    grid = xp.default_search_grid(args.p, magnitudes=args.magnitudes)
    try:
        report = xp.cfl_search(args.p, args.rk, grid, args.alpha)
    except xp.EmptyFeasibleSetError as exc:
        raise NumericalFailure(str(exc))
    _write_text(
        args.out,
        _json_doc(_config(args, ("p", "rk", "alpha", "magnitudes")), report.to_dict()),
    )
    print(
        f"search: best tau = {FMT % report.best_tau} at iota = ["
        + ", ".join(FMT % v for v in report.best_iota)
        + f"], order {report.ooa_at_best:.3f}"
    )
    return 0


def _add_common(sub, iota=True, scheme=False, spectral=False):
    sub.add_argument("--p", type=int, required=True, help="polynomial order")
    if iota:
        sub.add_argument("--iota", type=_iota_list, required=True, help="comma-separated weights iota_0..iota_p")
    sub.add_argument("--alpha", type=float, default=1.0, help="interface upwinding ratio (1 upwind, 0.5 central)")
    sub.add_argument("--nodes", choices=("gauss", "lobatto"), default="gauss")
    sub.add_argument("--out", default=None, help="output file path")
    sub.add_argument("--seed", type=int, default=0, help="seed recorded in the config (studies are deterministic)")
    if scheme:
        sub.add_argument("--rk", choices=("rk33", "rk44", "rk55"), default="rk44")
    if spectral:
        sub.add_argument("--k-samples", dest="k_samples", type=int, default=256)
        sub.add_argument("--rho-tol", dest="rho_tol", type=float, default=1e-10)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gsfr", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    corr_p = top.add_parser("corr", help="correction functions").add_subparsers(dest="cmd", required=True)
    s = corr_p.add_parser("solve", help="solve for a correction pair")
    _add_common(s)
    s.set_defaults(func=_cmd_corr_solve)
    s = corr_p.add_parser("bounds", help="check the sufficient stability bounds")
    _add_common(s)
    s.set_defaults(func=_cmd_corr_bounds)
    s = corr_p.add_parser("identify", help="OSFR/ESFR membership and weight recovery")
    _add_common(s)
    s.add_argument("--in", dest="infile", default=None, help="JSON correction file instead of --iota")
    s.set_defaults(func=_cmd_corr_identify)

    vn_p = top.add_parser("vn", help="wavenumber analysis").add_subparsers(dest="cmd", required=True)
    s = vn_p.add_parser("dispersion", help="dispersion/dissipation curves CSV")
    _add_common(s, spectral=True)
    s.set_defaults(func=_cmd_vn_dispersion)
    s = vn_p.add_parser("cfl", help="largest stable time step")
    _add_common(s, scheme=True, spectral=True)
    s.set_defaults(func=_cmd_vn_cfl)
    s = vn_p.add_parser("sweep", help="CFL limit over a weight grid CSV")
    _add_common(s, iota=False, scheme=True, spectral=True)
    s.add_argument("--magnitudes", type=_iota_list, default=[0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1])
    s.add_argument("--jobs", type=int, default=int(os.environ.get("GSFR_JOBS", "1")))
    s.set_defaults(func=_cmd_vn_sweep)

    run_p = top.add_parser("run", help="time-domain studies").add_subparsers(dest="cmd", required=True)
    s = run_p.add_parser("advect", help="linear advection snapshot CSV")
    _add_common(s, scheme=True)
    s.add_argument("--n-elements", dest="n_elements", type=int, default=50)
    s.add_argument("--t-end", dest="t_end", type=float, default=pi)
    s.set_defaults(func=_cmd_run_advect)
    s = run_p.add_parser("hetero", help="variable-speed aliasing energy study")
    _add_common(s, scheme=True)
    s.add_argument("--n-elements", dest="n_elements", type=int, default=32)
    s.add_argument("--periods", type=int, default=15)
    s.add_argument("--cfl", type=float, default=0.06)
    s.set_defaults(func=_cmd_run_hetero)
    s = run_p.add_parser("ooa", help="order-of-accuracy study")
    _add_common(s, scheme=True)
    s.add_argument("--t-end", dest="t_end", type=float, default=pi)
    s.add_argument(
        "--element-counts",
        dest="element_counts",
        type=lambda t: tuple(int(v) for v in t.split(",")),
        default=xp.DEFAULT_ELEMENT_COUNTS,
    )
    s.set_defaults(func=_cmd_run_ooa)

    search_p = top.add_parser("search", help="coupled CFL/order search").add_subparsers(dest="cmd", required=True)
    s = search_p.add_parser("cfl", help="maximise the stable step over a weight grid")
    _add_common(s, iota=False, scheme=True)
    s.add_argument("--magnitudes", type=_iota_list, default=[0.0, 1e-4, 1e-3, 1e-2])
    s.set_defaults(func=_cmd_search_cfl)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (corr.SingularSystemError, corr.SingularEtaError, corr.SingularDenominatorError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (corr.GsfrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
