"""Command-line interface.

Subcommands: ``pfa``, ``threshold``, ``simulate``, ``verify``, ``sweep``,
``sample``.  Output is CSV on stdout by default (RFC 4180, CRLF line ends)
or one JSON document with ``--format json``.  Exit codes: 0 success,
1 verification failure, 2 usage error, 3 numerical failure.

The single-pulse kinds take ``--n`` as the reference cell count (their cell
under test is always a single value); the multi-pulse kinds take ``--n``
cells under test and ``--m`` reference cells.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from .clutter import ParetoParams, sample_pareto
from .detectors import DetectorKind
from .errors import (GmCfarError, InconsistentReportError,
                     NumericalFailureError, ParameterDomainError,
                     UnsupportedConfigurationError)
from .oracles import (DEFAULT_M_REF, DEFAULT_N_CUT, DEFAULT_TAUS,
                      AdjudicationReport, ExcessShape, PfaFormulaVariant,
                      adjudicate, quadrature_pfa_full_multi,
                      quadrature_pfa_partial_multi, validated_pfa)
from .pfa import (pfa_gm_full_multi, pfa_gm_full_single,
                  pfa_gm_partial_multi, pfa_gm_partial_single)
from .rng import RandomStream
from .simulate import SweepSpec, cfar_grid_check, empirical_pfa
from .solver import SolverConfig, solve_tau_numeric, solve_tau_partial_single

_VERIFY_SCHEMA_VERSION = 1

# Clutter grid exercised by the CFAR homogeneity stage of `verify`.
_CFAR_ALPHAS = (2.0, 5.0, 10.0)
_CFAR_BETAS = (0.01, 1.0, 100.0)

_REDUCTION_RTOL = 1e-14


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _write_csv(header: Sequence[str], rows: Sequence[Sequence]) -> None:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    sys.stdout.write(out.getvalue())


def _write_json(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _parse_kind(value: str) -> DetectorKind:
    return DetectorKind(value)


def _window_config(args) -> tuple[DetectorKind, int, int]:
    """Map --n/--m flags onto (kind, n_cut, m_ref)."""
    kind = _parse_kind(args.kind)
    if kind.is_single:
        if args.m is not None:
            raise ParameterDomainError(
                f"{kind.value} takes --n as the reference cell count; "
                "--m is not applicable"
            )
        return kind, 1, args.n
    if args.m is None:
        raise ParameterDomainError(f"{kind.value} requires --m")
    return kind, args.n, args.m


def _load_report(path: str, kind: DetectorKind) -> AdjudicationReport:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParameterDomainError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterDomainError(f"malformed report {path}: {exc}") from exc
    if "reports" in doc:
        sub = doc["reports"].get(kind.value)
        if sub is None:
            raise ParameterDomainError(
                f"report {path} has no entry for {kind.value}"
            )
        return AdjudicationReport.from_dict(sub)
    return AdjudicationReport.from_dict(doc)


def _obtain_report(args, kind: DetectorKind, n_cut: int,
                   m_ref: int) -> AdjudicationReport:
    """Load a cached adjudication report, or run a reduced one in-process
    restricted to the requested window sizes."""
    if getattr(args, "report", None):
        return _load_report(args.report, kind)
    grid = [(n_cut, m_ref, tau) for tau in DEFAULT_TAUS]
    return adjudicate(kind, grid, trials=args.trials, seed=args.seed)


def _quadrature_value(kind: DetectorKind, n_cut: int, m_ref: int,
                      tau: float) -> float:
    if kind.is_full:
        return quadrature_pfa_full_multi(n_cut, m_ref, tau, 1e-10,
                                         ExcessShape.M_MINUS_ONE)
    return quadrature_pfa_partial_multi(n_cut, m_ref, tau, 1e-10)


def _closed_form(kind: DetectorKind, n_cut: int, m_ref: int, tau: float,
                 variant: PfaFormulaVariant) -> Optional[float]:
    if kind is DetectorKind.GM_PARTIAL_SINGLE:
        return pfa_gm_partial_single(m_ref, tau)
    if kind is DetectorKind.GM_PARTIAL_MULTI:
        return pfa_gm_partial_multi(n_cut, m_ref, tau)
    if kind is DetectorKind.GM_FULL_SINGLE:
        return pfa_gm_full_single(m_ref, tau, variant)
    try:
        return pfa_gm_full_multi(n_cut, m_ref, tau, variant)
    except UnsupportedConfigurationError:
        return None


def _cmd_pfa(args) -> int:
    kind, n_cut, m_ref = _window_config(args)
    tau = args.tau
    rows = []
    if args.all_variants:
        paper = _closed_form(kind, n_cut, m_ref, tau, PfaFormulaVariant.PAPER)
        rows.append(("paper", paper))
        if kind.is_full:
            candidate = _closed_form(kind, n_cut, m_ref, tau,
                                     PfaFormulaVariant.CANDIDATE)
            rows.append(("candidate", candidate))
        rows.append(("quadrature", _quadrature_value(kind, n_cut, m_ref, tau)))
    elif args.variant in ("paper", "candidate"):
        variant = PfaFormulaVariant(args.variant)
        value = _closed_form(kind, n_cut, m_ref, tau, variant)
        if value is None:
            raise UnsupportedConfigurationError(
                f"{kind.value} has no closed form at m_ref={m_ref}; "
                "use --variant quadrature"
            )
        rows.append((args.variant, value))
    elif args.variant == "quadrature":
        rows.append(("quadrature", _quadrature_value(kind, n_cut, m_ref, tau)))
    else:
        report = _obtain_report(args, kind, n_cut, m_ref)
        value = validated_pfa(kind, report, n_cut, m_ref, tau)
        rows.append(("validated:" + report.verdict, value))

    if args.format == "json":
        _write_json({
            "kind": kind.value, "n_cut": n_cut, "m_ref": m_ref, "tau": tau,
            "results": [{"variant": name, "pfa": value}
                        for name, value in rows],
        })
    else:
        _write_csv(["kind", "n_cut", "m_ref", "tau", "variant", "pfa"],
                   [(kind.value, n_cut, m_ref, tau, name, value)
                    for name, value in rows])
    return 0


def _cmd_threshold(args) -> int:
    kind, n_cut, m_ref = _window_config(args)
    config = SolverConfig(target_pfa=args.pfa, abs_tol=args.abs_tol,
                          max_iterations=args.max_iterations)
    if kind is DetectorKind.GM_PARTIAL_SINGLE:
        tau = solve_tau_partial_single(m_ref, config.target_pfa)
        achieved = pfa_gm_partial_single(m_ref, tau)
    else:
        report = _obtain_report(args, kind, n_cut, m_ref)
        tau = solve_tau_numeric(kind, n_cut, m_ref, config, report)
        achieved = validated_pfa(kind, report, n_cut, m_ref, tau)
    if args.format == "json":
        _write_json({
            "kind": kind.value, "n_cut": n_cut, "m_ref": m_ref,
            "target_pfa": config.target_pfa, "tau": tau,
            "achieved_pfa": achieved,
        })
    else:
        _write_csv(
            ["kind", "n_cut", "m_ref", "target_pfa", "tau", "achieved_pfa"],
            [(kind.value, n_cut, m_ref, config.target_pfa, tau, achieved)],
        )
    return 0


def _cmd_simulate(args) -> int:
    kind, n_cut, m_ref = _window_config(args)
    params = ParetoParams(shape=args.alpha, scale=args.beta)
    result = empirical_pfa(kind, n_cut, m_ref, args.tau, params,
                           args.trials, args.seed)
    if args.format == "json":
        _write_json({
            "kind": kind.value, "n_cut": n_cut, "m_ref": m_ref,
            "tau": args.tau, "alpha": params.shape, "beta": params.scale,
            "trials": result.trials, "rejections": result.successes,
            "estimate": result.estimate, "ci_low": result.ci_low,
            "ci_high": result.ci_high, "seed": args.seed,
        })
    else:
        _write_csv(
            ["alpha", "beta", "trials", "rejections", "estimate",
             "ci_low", "ci_high"],
            [(params.shape, params.scale, result.trials, result.successes,
              result.estimate, result.ci_low, result.ci_high)],
        )
    return 0


def _parse_grid(text: str, caster, flag: str) -> tuple:
    try:
        values = tuple(caster(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise ParameterDomainError(f"bad {flag} value: {exc}") from exc
    if not values:
        raise ParameterDomainError(f"{flag} must list at least one value")
    return values


def _reduction_checks(m_grid, tau_grid) -> dict:
    """Single-pulse reduction identities among the closed forms."""
    worst = 0.0
    for m in m_grid:
        for tau in tau_grid:
            pairs = [
                (pfa_gm_partial_multi(1, m, tau),
                 pfa_gm_partial_single(m, tau)),
            ]
            if m >= 2:
                for variant in (PfaFormulaVariant.PAPER,
                                PfaFormulaVariant.CANDIDATE):
                    pairs.append((pfa_gm_full_multi(1, m, tau, variant),
                                  pfa_gm_full_single(m, tau, variant)))
                front = m / (m + 1.0)
                pairs.append((pfa_gm_full_multi(1, m, tau,
                                                PfaFormulaVariant.PAPER),
                              front * (1.0 + tau) ** (-m)))
                pairs.append((pfa_gm_full_multi(1, m, tau,
                                                PfaFormulaVariant.CANDIDATE),
                              front * (1.0 + tau) ** (-(m - 1))))
            for got, want in pairs:
                worst = max(worst, abs(got - want) / want)
    return {"max_rel_error": worst, "rtol": _REDUCTION_RTOL,
            "passed": worst <= _REDUCTION_RTOL}


def _cmd_verify(args) -> int:
    n_grid = _parse_grid(args.n_grid, int, "--n-grid")
    m_grid = _parse_grid(args.m_grid, int, "--m-grid")
    tau_grid = _parse_grid(args.tau_grid, float, "--tau-grid")

    reports = {}
    summary = []
    for kind in DetectorKind:
        n_values = (1,) if kind.is_single else n_grid
        grid = [(n, m, t) for n in n_values for m in m_grid for t in tau_grid]
        report = adjudicate(kind, grid, trials=args.trials, seed=args.seed,
                            tol=args.tol)
        reports[kind.value] = report
        summary.append(
            f"{kind.value}: verdict={report.verdict} "
            f"oracles={'ok' if report.internally_consistent else 'DISAGREE'} "
            f"points={len(report.points)}"
        )
        for point in report.points:
            if not point.oracle_consistent:
                summary.append(
                    f"  oracle mismatch at n={point.n_cut} m={point.m_ref} "
                    f"tau={_fmt9(point.tau)}: mc={_fmt9(point.mc.estimate)} "
                    f"quadrature={_fmt9(point.quadrature)}"
                )

    cfar_reports = []
    cfar_configs = [
        (DetectorKind.GM_FULL_SINGLE, 1, 8, 1.0),
        (DetectorKind.GM_FULL_MULTI, 2, 8, 1.0),
    ]
    params_grid = tuple(ParetoParams(shape=a, scale=b)
                        for a in _CFAR_ALPHAS for b in _CFAR_BETAS)
    for kind, n_cut, m_ref, tau in cfar_configs:
        spec = SweepSpec(kind=kind, n_cut=n_cut, m_ref=m_ref, tau=tau,
                         params_grid=params_grid, trials=args.cfar_trials,
                         seed=args.seed)
        cfar = cfar_grid_check(spec)
        cfar_reports.append(cfar)
        summary.append(
            f"cfar {kind.value} n={n_cut} m={m_ref} tau={_fmt9(tau)}: "
            f"chi2={_fmt9(cfar.chi2_statistic)} p={_fmt9(cfar.p_value)} "
            f"{'pass' if cfar.passed else 'FAIL'}"
        )

    reductions = _reduction_checks(m_grid, tau_grid)
    summary.append(
        f"reductions: max_rel_error={_fmt9(reductions['max_rel_error'])} "
        f"{'pass' if reductions['passed'] else 'FAIL'}"
    )

    passed = (all(r.internally_consistent for r in reports.values())
              and all(c.passed for c in cfar_reports)
              and reductions["passed"])
    summary.append("verify: PASS" if passed else "verify: FAIL")

    doc = {
        "schema_version": _VERIFY_SCHEMA_VERSION,
        "seed": args.seed,
        "trials": args.trials,
        "cfar_trials": args.cfar_trials,
        "tol": args.tol,
        "reports": {name: json.loads(r.to_json())
                    for name, r in reports.items()},
        "cfar": [json.loads(c.to_json()) for c in cfar_reports],
        "reductions": reductions,
        "passed": passed,
    }
    try:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(doc, indent=2) + "\n")
    except OSError as exc:
        raise ParameterDomainError(
            f"cannot write report {args.out}: {exc}") from exc
    sys.stdout.write("\n".join(summary) + "\n")
    return 0 if passed else 1


def _sweep_taus(args) -> list[float]:
    lo_hi = _parse_grid(args.tau_range.replace(":", ","), float, "--tau-range")
    if len(lo_hi) != 2:
        raise ParameterDomainError("--tau-range must look like LO:HI")
    lo, hi = lo_hi
    step = args.step
    if not (step and step > 0.0):
        raise ParameterDomainError("--step must be positive")
    if hi < lo:
        raise ParameterDomainError("--tau-range needs LO <= HI")
    taus, value, index = [], lo, 0
    while value <= hi + 1e-12 * max(1.0, abs(hi)):
        taus.append(min(value, hi))
        index += 1
        value = lo + index * step
    return taus


def _sweep_targets(args) -> list[float]:
    lo_hi = _parse_grid(args.pfa_range.replace(":", ","), float, "--pfa-range")
    if len(lo_hi) != 2:
        raise ParameterDomainError("--pfa-range must look like LO:HI")
    lo, hi = lo_hi
    step = args.step if args.step is not None else 10.0
    if not step > 1.0:
        raise ParameterDomainError("--step is a ratio > 1 for --pfa-range")
    if not (0.0 < lo < 1.0 and 0.0 < hi < 1.0):
        raise ParameterDomainError("--pfa-range values must lie in (0, 1)")
    targets, value = [], lo
    ratio = step if hi > lo else 1.0 / step
    for _ in range(10000):
        targets.append(value)
        if abs(value - hi) <= 1e-9 * hi:
            break
        value *= ratio
        if (ratio > 1.0 and value > hi * (1.0 + 1e-9)) or \
           (ratio < 1.0 and value < hi * (1.0 - 1e-9)):
            targets.append(hi)
            break
    return targets


def _cmd_sweep(args) -> int:
    kind, n_cut, m_ref = _window_config(args)
    if (args.tau_range is None) == (args.pfa_range is None):
        raise ParameterDomainError(
            "exactly one of --tau-range or --pfa-range is required"
        )
    report = None
    if kind is not DetectorKind.GM_PARTIAL_SINGLE:
        report = _obtain_report(args, kind, n_cut, m_ref)

    def pfa_of(tau: float) -> float:
        if kind is DetectorKind.GM_PARTIAL_SINGLE:
            return pfa_gm_partial_single(m_ref, tau)
        return validated_pfa(kind, report, n_cut, m_ref, tau)

    if args.tau_range is not None:
        rows = [(tau, pfa_of(tau)) for tau in _sweep_taus(args)]
        header = ["tau", "pfa"]
    else:
        rows = []
        for target in _sweep_targets(args):
            config = SolverConfig(target_pfa=target)
            if kind is DetectorKind.GM_PARTIAL_SINGLE:
                tau = solve_tau_partial_single(m_ref, target)
            else:
                tau = solve_tau_numeric(kind, n_cut, m_ref, config, report)
            rows.append((target, tau))
        header = ["pfa", "tau"]

    if args.format == "json":
        _write_json({
            "kind": kind.value, "n_cut": n_cut, "m_ref": m_ref,
            "columns": header, "rows": [[a, b] for a, b in rows],
        })
    else:
        _write_csv(header, rows)
    return 0


def _cmd_sample(args) -> int:
    if args.count < 1:
        raise ParameterDomainError("--count must be >= 1")
    params = ParetoParams(shape=args.alpha, scale=args.beta)
    stream = RandomStream(args.seed, 0).child("sample")
    values = sample_pareto(params, stream, args.count)
    text = "".join(repr(float(v)) + "\n" for v in values)
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(text)
        except OSError as exc:
            raise ParameterDomainError(
                f"cannot write samples to {args.out}: {exc}") from exc
    return 0


def _add_window_flags(parser: argparse.ArgumentParser, kinds=None) -> None:
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in (kinds or DetectorKind)],
                        help="detector kind")
    parser.add_argument("--n", type=int, required=True,
                        help="cells under test (multi kinds) or reference "
                             "cell count (single kinds)")
    parser.add_argument("--m", type=int, default=None,
                        help="reference cell count (multi kinds only)")


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--report", default=None,
                        help="adjudication report JSON written by `verify`; "
                             "without it a reduced adjudication runs "
                             "in-process")
    parser.add_argument("--trials", type=int, default=1_000_000,
                        help="Monte Carlo trials for in-process adjudication")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="base RNG seed (default 0)")
    common.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="output format (default csv)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads; affects speed only")

    parser = argparse.ArgumentParser(
        prog="gmcfar",
        description="Geometric-mean CFAR detectors in Pareto clutter: "
                    "false-alarm probabilities, thresholds, simulation, "
                    "and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pfa = sub.add_parser("pfa", parents=[common],
                           help="evaluate a false-alarm probability")
    _add_window_flags(p_pfa)
    p_pfa.add_argument("--tau", type=float, required=True)
    p_pfa.add_argument("--variant", default="validated",
                       choices=["validated", "paper", "candidate",
                                "quadrature"])
    p_pfa.add_argument("--all-variants", action="store_true",
                       help="print paper, candidate, and quadrature values")
    _add_report_flags(p_pfa)
    p_pfa.set_defaults(func=_cmd_pfa)

    p_thr = sub.add_parser("threshold", parents=[common],
                           help="solve the threshold multiplier for a target "
                                "Pfa")
    _add_window_flags(p_thr)
    p_thr.add_argument("--pfa", type=float, required=True,
                       help="target false-alarm probability")
    p_thr.add_argument("--abs-tol", type=float, default=None)
    p_thr.add_argument("--max-iterations", type=int, default=200)
    _add_report_flags(p_thr)
    p_thr.set_defaults(func=_cmd_threshold)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="estimate a Pfa from simulated Pareto "
                                "clutter")
    _add_window_flags(p_sim)
    p_sim.add_argument("--tau", type=float, required=True)
    p_sim.add_argument("--alpha", type=float, required=True)
    p_sim.add_argument("--beta", type=float, required=True)
    p_sim.add_argument("--trials", type=int, required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify", parents=[common],
                           help="run the full adjudication and CFAR "
                                "verification pipeline")
    p_ver.add_argument("--trials", type=int, default=10_000_000)
    p_ver.add_argument("--cfar-trials", type=int, default=1_000_000)
    p_ver.add_argument("--tol", type=float, default=1e-10)
    p_ver.add_argument("--out", default="gmcfar-verify.json",
                       help="path for the adjudication report JSON")
    p_ver.add_argument("--n-grid", default="1,2,4")
    p_ver.add_argument("--m-grid", default="1,2,4,8,16")
    p_ver.add_argument("--tau-grid", default="0.1,0.5,1,2,5")
    p_ver.set_defaults(func=_cmd_verify)

    p_swp = sub.add_parser("sweep", parents=[common],
                           help="tabulate Pfa(tau) or tau(Pfa)")
    _add_window_flags(p_swp)
    p_swp.add_argument("--tau-range", default=None, metavar="LO:HI")
    p_swp.add_argument("--pfa-range", default=None, metavar="LO:HI")
    p_swp.add_argument("--step", type=float, default=None,
                       help="additive step for --tau-range, ratio for "
                            "--pfa-range (default 10)")
    _add_report_flags(p_swp)
    p_swp.set_defaults(func=_cmd_sweep)

    p_sam = sub.add_parser("sample", parents=[common],
                           help="draw Pareto clutter samples")
    p_sam.add_argument("--alpha", type=float, required=True)
    p_sam.add_argument("--beta", type=float, required=True)
    p_sam.add_argument("--count", type=int, required=True)
    p_sam.add_argument("--out", default=None,
                       help="output path (default stdout)")
    p_sam.set_defaults(func=_cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if args.threads < 1:
        sys.stderr.write("gmcfar: --threads must be >= 1\n")
        return 2
    try:
        return args.func(args)
    except (ParameterDomainError, UnsupportedConfigurationError) as exc:
        sys.stderr.write(f"gmcfar: {exc}\n")
        return 2
    except InconsistentReportError as exc:
        sys.stderr.write(f"gmcfar: {exc}\n")
        return 1
    except NumericalFailureError as exc:
        sys.stderr.write(f"gmcfar: {exc}\n")
        return 3
    except GmCfarError as exc:
        sys.stderr.write(f"gmcfar: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
