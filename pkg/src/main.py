from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Sequence

from pydantic import ValidationError

from src.analytics.formulas import retrieval_rate, tradeoff_curve
from src.appendix.gtable import TABLE_RATIO, g_table
from src.appendix.lemmas import MonotonicityReport, lemma1_check, lemma2_check, lemma3_values, lemma4_check
from src.model.params import MixingDistribution, SchemeParams, make_distribution, make_params
from src.optimizer.diagnostics import critical_ratio, d_coefficients
from src.optimizer.lp import solve_optimal
from src.optimizer.sweep import FAIL, compare_with_theorem, sweep_theorems
from src.protocol.audit import FULL, SUFFICIENT, compare_audit
from src.protocol.simulator import run_trials
from src.protocol.sun_jafar import build_library, make_rng, run_protocol
from src.protocol.transcript import encode_transcript
from src.reporting.export import csv_text, emit, json_text, support_label
from src.utils.config import DEFAULT_SWEEPS, RhoGrid, RunConfig, default_seed, load_sweeps
from src.utils.errors import ConfigError, DecodingError, WpirError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2


def _common(seed_default: int) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--setting", choices=["replicated", "mds", "tcolluding"], default="replicated")
    common.add_argument("--n", type=int, default=2, help="Number of servers N")
    common.add_argument("--s", type=int, default=1, help="Strength s (1, K or T)")
    common.add_argument("--files", type=int, default=2, help="Number of files M")
    common.add_argument("--metric", choices=["mil", "maxl"], default="mil")
    common.add_argument("--seed", type=int, default=seed_default, help="Seed (default $WPIR_SEED or 0)")
    common.add_argument("--output", type=Path, default=None, help="Write to this file instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--threads", type=int, default=1)
    return common


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpir", description="Weak PIR rate-leakage laboratory")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(seed_default)

    tradeoff = sub.add_parser("tradeoff", parents=[common], help="Closed-form and LP rates over a budget grid")
    tradeoff.add_argument("--rho-grid", required=True, help="start:stop:step in bits")

    optimize = sub.add_parser("optimize", parents=[common], help="Exact optimum at one budget")
    optimize.add_argument("--rho", type=float, required=True)

    verify = sub.add_parser("verify-theorems", parents=[common], help="LP against the two-point trade-off on grids")
    verify.add_argument("--config", type=Path, default=DEFAULT_SWEEPS)

    table = sub.add_parser("table1", parents=[common], help="g(m', M) at a storage ratio")
    table.add_argument("--q", type=float, default=TABLE_RATIO)

    sub.add_parser("lemmas", parents=[common], help="Numerical checks of the appendix lemmas")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte-Carlo runs of the replicated scheme")
    simulate.add_argument("--p", required=True, help="Comma-separated mixing distribution")
    simulate.add_argument("--trials", type=int, default=1000)

    audit = sub.add_parser("audit", parents=[common], help="Exact leakage by enumeration against the formulas")
    audit.add_argument("--p", required=True, help="Comma-separated mixing distribution")
    audit.add_argument("--mode", choices=[SUFFICIENT, FULL], default=SUFFICIENT)
    audit.add_argument("--transcript", type=Path, default=None, help="Dump one seeded run here")
    return parser


def _params(config: RunConfig) -> SchemeParams:
    return make_params(config.setting, config.n_servers, config.strength, config.n_files)


def _distribution(text: str, n_files: int) -> MixingDistribution:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"Invalid distribution {text!r}") from exc
    return make_distribution(values, n_files)


def _metadata(config: RunConfig) -> Dict[str, object]:
    return {
        "command": config.command,
        "setting": config.setting.value,
        "n_servers": config.n_servers,
        "strength": config.strength,
        "n_files": config.n_files,
        "metric": config.metric.value,
    }


def _render(config: RunConfig, rows: List[Dict[str, object]], extra: Dict[str, object] | None = None) -> None:
    if config.format == "json":
        emit(json_text({**(extra or {}), "rows": rows}, _metadata(config)), config.output)
    else:
        emit(csv_text(rows), config.output)


def cmd_tradeoff(config: RunConfig, args: argparse.Namespace) -> int:
    params = _params(config)
    rhos = config.rho_grid.points()
    points = tradeoff_curve(params, config.metric, rhos)
    rows = []
    for rho, point in zip(rhos, points):
        comparison = compare_with_theorem(params, config.metric, float(rho))
        row = {
            "rho": float(rho),
            "theorem_rate": comparison.theorem_rate,
            "lp_rate": comparison.lp_rate,
            "gap": comparison.gap,
            "support": support_label(comparison.lp_support),
            "within_threshold": comparison.diagnostics.within_threshold,
        }
        if config.format == "json":
            row["achieved_leakage"] = point.achieved_leakage
        rows.append(row)
    _render(config, rows)
    return EXIT_OK


def cmd_optimize(config: RunConfig, args: argparse.Namespace) -> int:
    params = _params(config)
    solution = solve_optimal(params, config.metric, config.rho)
    comparison = compare_with_theorem(params, config.metric, config.rho)
    report = d_coefficients(params, config.metric)
    payload = {
        "rho": config.rho,
        "rate": solution.rate,
        "objective_value": solution.objective_value,
        "probs": solution.distribution.probs.tolist(),
        "support": list(solution.support),
        "constraint_tight": solution.constraint_tight,
        "theorem_rate": comparison.theorem_rate,
        "gap": comparison.gap,
        "d": report.d.tolist(),
        "sensitivity": report.sensitivity.tolist(),
        "positive_indices": list(report.positive_indices),
        "improving_indices": list(report.improving_indices),
        "within_threshold": report.within_threshold,
    }
    emit(json_text(payload, _metadata(config)), config.output)
    return EXIT_OK


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    checks = sweep_theorems(load_sweeps(args.config), threads=config.threads)
    rows = [
        {
            "sweep": check.sweep,
            "n_servers": check.n_servers,
            "strength": check.strength,
            "n_files": check.n_files,
            "metric": check.metric.value,
            "rho": check.rho,
            "theorem_rate": check.theorem_rate,
            "lp_rate": check.lp_rate,
            "gap": check.gap,
            "support": support_label(check.support),
            "status": check.status,
        }
        for check in checks
    ]
    extra = None
    if config.format == "json":
        extra = {
            "critical_ratio_mil": critical_ratio("mil"),
            "critical_ratio_maxl": critical_ratio("maxl"),
        }
    _render(config, rows, extra)
    return EXIT_VERIFICATION if any(check.status == FAIL for check in checks) else EXIT_OK


def cmd_table1(config: RunConfig, args: argparse.Namespace) -> int:
    table = g_table(args.q)
    frame = table.to_frame()
    if config.format == "json":
        rows = frame.to_dict(orient="records")
        emit(json_text({"q": table.q, "rows": rows}, {"command": config.command}), config.output)
    else:
        emit(csv_text(frame), config.output)
    return EXIT_OK


def _monotonicity_payload(report: MonotonicityReport) -> Dict[str, object]:
    return {
        "rate": report.rate,
        "decreasing": report.verdict,
        "min_difference": report.min_difference,
        "max_difference": report.max_difference,
        "witness": report.witness,
        "phi_start": report.phi_start,
        "phi_prime_start": report.phi_prime_start,
        "phi_second_min": report.phi_second_min,
        "margin_start": report.margin_start,
        "margin_min": report.margin_min,
        "margin_prime_start": report.margin_prime_start,
    }


def cmd_lemmas(config: RunConfig, args: argparse.Namespace) -> int:
    first, second = lemma1_check(), lemma2_check()
    sign_reports = [lemma3_values(n, m) for n in range(2, 6) for m in range(3, 11)]
    ratios = lemma4_check()

    lemma3 = {"verdict": all(r.verdict for r in sign_reports)}
    lemma3.update({f"N{r.n_servers}_M{r.n_files}_f1": float(r.values[0]) for r in sign_reports})
    lemma4 = {"y": ratios.y, "verdict": ratios.verdict, "inner_bound": ratios.inner_bound_ok}
    lemma4.update({f"M{n_files}_m{m}": value for (n_files, m), value in sorted(ratios.table.items())})
    lemma4.update({f"observation_m{m}": value for m, value in sorted(ratios.observation.items())})
    lemma4.update({f"tail_m{m}_from_M{n}": value for (m, n), value in sorted(ratios.tail_bounds.items())})

    payload = {
        "lemma1": _monotonicity_payload(first),
        "lemma2": _monotonicity_payload(second),
        "lemma3": lemma3,
        "lemma4": lemma4,
    }
    emit(json_text(payload, {"command": config.command}), config.output)
    verdicts = [
        first.verdict and first.margin_min > 0,
        second.verdict and second.margin_min > 0,
        lemma3["verdict"],
        ratios.verdict,
    ]
    return EXIT_OK if all(verdicts) else EXIT_VERIFICATION


def cmd_simulate(config: RunConfig, args: argparse.Namespace) -> int:
    params = _params(config)
    p = _distribution(args.p, params.n_files)
    stats = run_trials(params, p, config.trials, config.seed, threads=config.threads)
    payload = {
        "seed": config.seed,
        "trials": stats.trials,
        "mean_download": stats.mean_download,
        "empirical_rate": stats.empirical_rate,
        "analytic_rate": retrieval_rate(params, p),
        "mprime_frequencies": list(stats.mprime_frequencies),
        "decode_success": stats.decode_success,
    }
    emit(json_text(payload, _metadata(config)), config.output)
    return EXIT_OK if stats.decode_success == 1.0 else EXIT_VERIFICATION


def cmd_audit(config: RunConfig, args: argparse.Namespace) -> int:
    params = _params(config)
    p = _distribution(args.p, params.n_files)
    comparison = compare_audit(params, p, args.mode)
    stats = comparison.stats
    payload = {
        "mode": stats.mode,
        "mil": stats.mil,
        "maxl": stats.maxl,
        "expected_download": float(stats.expected_download),
        "expected_download_exact": str(stats.expected_download),
        "rate": stats.rate,
        "formula_mil": comparison.formula_mil,
        "formula_maxl": comparison.formula_maxl,
        "formula_rate": comparison.formula_rate,
        "mil_per_server": list(stats.mil_per_server),
        "maxl_per_server": list(stats.maxl_per_server),
        "inner_private": stats.inner_private,
        "agrees": comparison.agrees,
    }
    if args.transcript is not None:
        library = build_library(params, config.seed)
        transcript = run_protocol(params, library, p, 1, make_rng(config.seed))
        args.transcript.parent.mkdir(parents=True, exist_ok=True)
        args.transcript.write_bytes(encode_transcript(transcript))
    emit(json_text(payload, _metadata(config)), config.output)
    ok = comparison.agrees and stats.inner_private is not False
    return EXIT_OK if ok else EXIT_VERIFICATION


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "tradeoff": cmd_tradeoff,
    "optimize": cmd_optimize,
    "verify-theorems": cmd_verify,
    "table1": cmd_table1,
    "lemmas": cmd_lemmas,
    "simulate": cmd_simulate,
    "audit": cmd_audit,
}

DEFAULT_FORMATS = {"tradeoff": "csv", "verify-theorems": "csv", "table1": "csv"}


def run(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser(default_seed())
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except WpirError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE

    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = RunConfig(
            command=args.command,
            setting=args.setting,
            n_servers=args.n,
            strength=args.s,
            n_files=args.files,
            metric=args.metric,
            rho=getattr(args, "rho", None),
            rho_grid=RhoGrid.parse(args.rho_grid) if getattr(args, "rho_grid", None) else None,
            trials=getattr(args, "trials", 1),
            seed=args.seed,
            threads=args.threads,
            output=args.output,
            format=args.format or DEFAULT_FORMATS.get(args.command, "json"),
        )
        return COMMANDS[args.command](config, args)
    except ValidationError as exc:
        sys.stderr.write(f"error: invalid arguments: {exc.errors()[0]['msg']}\n")
        return EXIT_USAGE
    except DecodingError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VERIFICATION
    except WpirError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
