"""Command-line front end: ``swapsim {verify,swap,chsh,marginals}``.

Every command prints a human-readable table and can emit the same numbers as
a JSON object ``{config, results, checks}`` (``--json`` to stdout or
``--report PATH``). Exit status: 0 all checks pass, 1 a check failed,
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

from .analysis import TSIRELSON, ChshSettings, EmptyBucketError, chsh_exact, chsh_max
from .checks import Check, corrupted_joint_state, run_checks
from .core import BELL_ORDER, BellOutcome, DensityMatrix, bell_state, density_from_pure, joint_state
from .measurement import relative_state
from .protocol import (
    ExperimentConfig,
    StationDAction,
    chance_select,
    chsh_from_records,
    nonsignaling_check,
    post_select,
    run_ensemble,
    write_records,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_ANGLES = (0.0, 90.0, 45.0, 135.0)


def _angles(text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("--settings needs four comma-separated angles a,a',b,b' in degrees")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed angle in {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("angles must be finite")
    return values


def _bell_label(text: str) -> BellOutcome:
    try:
        return BellOutcome.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the JSON report instead of tables")
    common.add_argument("--report", type=Path, help="also write the JSON report to this path")

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--trials", type=int, default=100_000)
    run_opts.add_argument("--seed", type=int, default=42)

    settings_opt = argparse.ArgumentParser(add_help=False)
    settings_opt.add_argument(
        "--settings",
        type=_angles,
        default=DEFAULT_ANGLES,
        metavar="A,A',B,B'",
        help="CHSH polar angles in the x-z plane, degrees (default 0,90,45,135)",
    )

    parser = argparse.ArgumentParser(prog="swapsim", description="Entanglement-swapping simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="run the exact identity checks")
    verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    swap = sub.add_parser("swap", parents=[common, run_opts, settings_opt], help="run the swapping ensemble")
    swap.add_argument("--d-action", choices=[a.value for a in StationDAction], default="bell")
    swap.add_argument("--select", type=_bell_label, help="Bell label to post-select (default psi- in bell mode)")
    swap.add_argument("--out", type=Path, help="write trial records here")
    swap.add_argument("--format", choices=("json", "csv"), default="json", help="record file format")

    sub.add_parser("chsh", parents=[common, settings_opt], help="exact CHSH values of the conditional states")

    marginals = sub.add_parser(
        "marginals", parents=[common, run_opts, settings_opt], help="non-signaling comparison of C's statistics"
    )
    marginals.add_argument(
        "--d-action",
        choices=[a.value for a in StationDAction],
        help="compare only this action (with itself); default compares all three",
    )
    return parser


def _sigma_bound(p: float, n: int) -> float:
    return 4.0 * math.sqrt(p * (1.0 - p) / n)


def _empty_bucket_check(exc: EmptyBucketError) -> Check:
    return Check("setting_pairs_populated", f"every setting pair needs records ({exc})", 0.0, 1.0, False)


def _emit(args: argparse.Namespace, config: dict, results: dict, checks: list[Check], lines: list[str]) -> int:
    report = {"config": config, "results": results, "checks": [c.to_dict() for c in checks]}
    text = json.dumps(report, indent=2, sort_keys=False)
    if args.report is not None:
        args.report.write_text(text + "\n")
    if args.json:
        print(text)
    else:
        for line in lines:
            print(line)
        if checks:
            print()
            width = max(len(c.name) for c in checks)
            for c in checks:
                status = "PASS" if c.passed else "FAIL"
                print(f"  [{status}] {c.name:<{width}}  value={c.value:.3e}  tol={c.tolerance:.1e}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_verify(args: argparse.Namespace) -> int:
    joint = corrupted_joint_state() if args.inject_fault else None
    checks = run_checks(joint)
    residuals = [c.value for c in checks if c.name not in ("reduced_pair14_separable",)]
    results = {"max_residual": max(residuals), "num_checks": len(checks)}
    lines = [f"exact identity checks: {len(checks)}, max residual {results['max_residual']:.3e}"]
    for c in checks:
        lines.append(f"  {c.name}: {c.claim}")
    config = {"command": "verify", "inject_fault": bool(args.inject_fault)}
    return _emit(args, config, results, checks, lines)


def _settings(args: argparse.Namespace) -> ChshSettings:
    return ChshSettings.from_angles(*args.settings)


def cmd_swap(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.trials <= 0:
        parser.error("--trials must be a positive integer")
    action = StationDAction(args.d_action)
    select = args.select
    if select is None and action is StationDAction.BELL:
        select = BellOutcome.PSI_MINUS
    try:
        cfg = ExperimentConfig(
            num_trials=args.trials,
            master_seed=args.seed,
            d_action=action,
            broadcast_enabled=True,
            chsh_settings=_settings(args),
            selection_target=select,
        )
    except ValueError as exc:
        parser.error(str(exc))

    records = run_ensemble(cfg)
    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            write_records(records, fh, args.format)

    n = len(records)
    config = {"command": "swap", **cfg.to_dict(), "settings_deg": list(args.settings),
              "out": None if args.out is None else str(args.out), "format": args.format}
    results: dict = {}
    checks: list[Check] = []
    lines = [f"swap: {n} trials, seed {args.seed}, station D action {action.value}"]

    if action is StationDAction.BELL:
        counts = Counter(r.d_outcome for r in records)
        freqs = {label.value: counts[label.value] / n for label in BELL_ORDER}
        bound = _sigma_bound(0.25, n)
        results["bell_frequencies"] = freqs
        lines.append("Bell outcome frequencies at D:")
        for label, f in freqs.items():
            lines.append(f"  {label:5s} {f:.5f}")
        checks.append(
            Check(
                "bell_frequencies",
                "each Bell outcome occurs with probability 1/4 (4 sigma binomial)",
                max(abs(f - 0.25) for f in freqs.values()),
                bound,
                all(abs(f - 0.25) <= bound for f in freqs.values()),
            )
        )

        selected = post_select(records, select)
        rel = relative_state(joint_state(), (2, 3), bell_state(select))
        exact = chsh_exact(density_from_pure(rel), cfg.chsh_settings)
        chance = chance_select(records, len(selected), args.seed)
        try:
            sel_est = chsh_from_records(selected)
            rnd_est = chsh_from_records(chance)
        except EmptyBucketError as exc:
            lines.append(f"too few trials for a CHSH estimate: {exc}")
            checks.append(_empty_bucket_check(exc))
            return _emit(args, config, results, checks, lines)
        results.update(
            selected_target=select.value,
            selected_size=len(selected),
            selected_chsh=sel_est.to_dict(),
            selected_chsh_exact=exact,
            chance_chsh=rnd_est.to_dict(),
        )
        s_sel, e_sel = abs(sel_est.s_value), sel_est.s_std_error
        s_rnd, e_rnd = abs(rnd_est.s_value), rnd_est.s_std_error
        k_sel = (s_sel - 2.0) / e_sel if e_sel > 0 else math.inf
        results["selected_sigma_above_2"] = k_sel
        lines.append(f"selected {select.value} subset: {len(selected)} pairs")
        lines.append(f"  S = {sel_est.s_value:+.4f} +/- {e_sel:.4f}   (exact {exact:+.4f})")
        lines.append("chance subset of equal size:")
        lines.append(f"  S = {rnd_est.s_value:+.4f} +/- {e_rnd:.4f}")
        checks.append(
            Check(
                "selected_matches_exact",
                "selected |S| within 4 standard errors of the exact conditional-state value",
                abs(s_sel - abs(exact)),
                4.0 * e_sel,
                abs(s_sel - abs(exact)) <= 4.0 * e_sel,
            )
        )
        if abs(exact) > 2.0:
            verdict = "violates" if k_sel > 4.0 else "does not violate"
            lines.append(f"verdict: selected subset {verdict} |S|<=2 by {k_sel:.1f} sigma")
            checks.append(
                Check(
                    "selected_violates_chsh",
                    "selected |S| exceeds 2 by more than 4 standard errors",
                    s_sel - 2.0,
                    4.0 * e_sel,
                    s_sel - 2.0 > 4.0 * e_sel,
                )
            )
        else:
            lines.append(f"verdict: exact |S| = {abs(exact):.4f} <= 2 at these settings; no violation expected")
        lines.append(
            f"verdict: chance subset {'satisfies' if s_rnd <= 2.0 + 4.0 * e_rnd else 'violates'} |S|<=2 within 4 sigma"
        )
        checks.append(
            Check(
                "chance_subset_satisfies_chsh",
                "a random subset of equal size keeps |S| <= 2 within 4 standard errors",
                s_rnd,
                2.0 + 4.0 * e_rnd,
                s_rnd <= 2.0 + 4.0 * e_rnd,
            )
        )
    elif action is StationDAction.NONE:
        try:
            est = chsh_from_records(records)
        except EmptyBucketError as exc:
            lines.append(f"too few trials for a CHSH estimate: {exc}")
            checks.append(_empty_bucket_check(exc))
            return _emit(args, config, results, checks, lines)
        results["chsh"] = est.to_dict()
        lines.append("C correlators with no measurement at D:")
        worst = 0.0
        ok = True
        for k, (e, cnt) in enumerate(zip(est.correlators, est.counts), start=1):
            bound = 4.0 / math.sqrt(cnt)
            worst = max(worst, abs(e) * math.sqrt(cnt))
            ok = ok and abs(e) <= bound
            lines.append(f"  pair {k}: E = {e:+.4f} (n={cnt})")
        results["max_correlator_sigma"] = worst
        lines.append(f"  S = {est.s_value:+.4f} +/- {est.s_std_error:.4f}")
        checks.append(
            Check("no_prior_correlation", "every correlator is 0 within 4 sigma", worst, 4.0, ok)
        )
    else:
        mismatches = 0
        by_outcome: Counter = Counter()
        for r in records:
            by_outcome[r.d_outcome] += 1
            expected = tuple(-1 if b == "0" else 1 for b in r.d_outcome)
            if (r.outcome1, r.outcome4) != expected:
                mismatches += 1
        results["zz_frequencies"] = {k: by_outcome[k] / n for k in ("00", "01", "10", "11")}
        results["zz_mismatches"] = mismatches
        lines.append("zz outcomes at D and C's z,z check:")
        for k, f in results["zz_frequencies"].items():
            lines.append(f"  {k}: {f:.5f}")
        lines.append(f"  records where C's spins are not the complement of D's bits: {mismatches}")
        checks.append(
            Check(
                "zz_relative_states",
                "D outcome |xy>_23 is always followed by spins complementary to x,y at C",
                float(mismatches),
                0.0,
                mismatches == 0,
            )
        )
    return _emit(args, config, results, checks, lines)


def cmd_chsh(args: argparse.Namespace) -> int:
    settings = _settings(args)
    psi = joint_state()
    results: dict = {"conditional": {}}
    checks = []
    lines = [f"exact CHSH values at settings {','.join(f'{a:g}' for a in args.settings)} deg:"]
    for label in BELL_ORDER:
        rho = density_from_pure(relative_state(psi, (2, 3), bell_state(label)))
        s = chsh_exact(rho, settings)
        smax = chsh_max(rho)
        results["conditional"][label.value] = {"s_exact": s, "s_max": smax}
        lines.append(f"  after {label.value:5s}: S = {s:+.6f}   best over settings {smax:.6f}")
        checks.append(
            Check(
                f"tsirelson_{label.value}",
                "|S| <= 2 sqrt(2) for the conditional state",
                abs(s),
                TSIRELSON + 1e-12,
                abs(s) <= TSIRELSON + 1e-12,
            )
        )
    mixed = DensityMatrix.maximally_mixed(2)
    s_mixed = chsh_exact(mixed, settings)
    results["unselected"] = {"s_exact": s_mixed}
    lines.append(f"  unselected I/4 : S = {s_mixed:+.6f}")
    checks.append(Check("unselected_zero", "S = 0 for I/4", abs(s_mixed), 1e-12, abs(s_mixed) <= 1e-12))
    config = {"command": "chsh", "settings_deg": list(args.settings), "chsh_settings": settings.to_dict()}
    return _emit(args, config, results, checks, lines)


def cmd_marginals(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.trials < 10_000:
        parser.error("--trials must be at least 10000 for the non-signaling comparison")
    actions = tuple(StationDAction) if args.d_action is None else (StationDAction(args.d_action),)
    report = nonsignaling_check(args.trials, args.seed, _settings(args), actions)
    results = report.to_dict()
    results["max_sampled"] = report.max_sampled
    results["max_exact"] = report.max_exact
    lines = [f"non-signaling: {args.trials} trials per D action, seed {args.seed}"]
    lines.append("  pair  actions        TV distance  threshold")
    for k, a, b, tv, thr, _, _ in report.sampled:
        lines.append(f"  {k:4d}  {a:>4s} vs {b:<4s}   {tv:.5f}      {thr:.5f}")
    lines.append("exact (1,4) state after each D action, max |rho - I/4|:")
    for a, d in report.exact.items():
        lines.append(f"  {a:5s} {d:.3e}")
    min_threshold = min((row[4] for row in report.sampled), default=0.0)
    checks = [
        Check("exact_marginals", "rho_14 = I/4 for every D action", report.max_exact, 1e-12, report.max_exact <= 1e-12),
        Check(
            "sampled_marginals",
            "TV distance of C's outcome distributions below 4/sqrt(n), n the smallest bucket",
            report.max_sampled,
            min_threshold,
            report.max_sampled < min_threshold,
        ),
    ]
    config = {"command": "marginals", "trials": args.trials, "seed": args.seed,
              "d_actions": [a.value for a in actions], "settings_deg": list(args.settings)}
    return _emit(args, config, results, checks, lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "swap":
        return cmd_swap(args, parser)
    if args.command == "chsh":
        return cmd_chsh(args)
    return cmd_marginals(args, parser)


if __name__ == "__main__":
    sys.exit(main())
