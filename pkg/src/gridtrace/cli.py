"""Command-line front end for scenario-driven runs.

Each subcommand loads a scenario configuration, executes one stage of
the pipeline, writes its artifacts, and prints a short human-readable
summary.  Exit codes separate the failure families: 2 for configuration
problems, 3 for violated mathematical preconditions, 4 for numerical
breakdowns.
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig, load_config
from .errors import ConfigError, GridtraceError, NumericalError, PreconditionError
from .pipeline import (
    load_observations_csv,
    run_analyze_graph,
    run_detect,
    run_find_absorbent,
    run_identify,
    run_reproduce,
    run_simulate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4


def _epsilon_flag(value: str) -> float | None:
    if value == "auto":
        return None
    try:
        parsed = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"epsilon must be a number or 'auto', got {value!r}"
        )
    return parsed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridtrace",
        description=(
            "Detect, localize, and reconstruct accidental disturbances on "
            "damped transmission networks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="noise seed override")
        p.add_argument(
            "--quiet", action="store_true", help="suppress the summary printout"
        )

    p = sub.add_parser("analyze-graph", help="spectral and absorbency report")
    add_common(p)

    p = sub.add_parser("find-absorbent", help="suggest an absorbent observation set")
    add_common(p)

    p = sub.add_parser("simulate", help="integrate the scenario and write tables")
    add_common(p)

    p = sub.add_parser("detect", help="fit the healthy state and scan for an onset")
    add_common(p)
    p.add_argument("--observations", default=None, help="reuse an observation table")
    p.add_argument(
        "--epsilon",
        type=_epsilon_flag,
        default=None,
        help="detection threshold, a number or 'auto'",
    )

    p = sub.add_parser("identify", help="localize sources and reconstruct forcing")
    add_common(p)
    p.add_argument("--observations", default=None, help="reuse an observation table")
    p.add_argument(
        "--epsilon",
        type=_epsilon_flag,
        default=None,
        help="detection threshold, a number or 'auto'",
    )
    p.add_argument(
        "--mode",
        choices=("auto", "da", "absorbent"),
        default=None,
        help="identification route override",
    )

    p = sub.add_parser(
        "reproduce-paper",
        help="run the bundled benchmark scenarios and write a summary table",
    )
    add_common(p, needs_config=False)

    return parser


def _load(args) -> tuple[ScenarioConfig, str]:
    config = load_config(args.config)
    out_dir = args.out if args.out is not None else config.outputs.directory
    return config, out_dir


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_analyze_graph(args) -> int:
    config, out_dir = _load(args)
    report = run_analyze_graph(config, out_dir)
    modes = ", ".join(
        f"{entry['omega']:.6g} (x{entry['multiplicity']})"
        for entry in report["spectrum"]
    )
    _say(args, f"vertices: {report['n']}, edges: {len(report['edges'])}")
    _say(args, f"frequencies: {modes}")
    verdict = "yes" if report["strategic"] else "no"
    if not report["strategic"]:
        failing = report["failing_cluster"]
        verdict += (
            f" (cluster {failing['cluster']}, omega {failing['omega']:.6g}, "
            f"rank {failing['rank']} of {failing['multiplicity']})"
        )
    _say(args, f"observed set {report['observed']} strategic: {verdict}")
    _say(args, f"absorbent: {'yes' if report['absorbent'] else 'no'}")
    _say(
        args,
        f"dominantly absorbent: {'yes' if report['dominantly_absorbent'] else 'no'}",
    )
    _say(args, f"joints: {report['joints'] or 'none'}")
    _say(args, f"suggested absorbent set: {report['suggested_set']}")
    return EXIT_OK


def _cmd_find_absorbent(args) -> int:
    config, out_dir = _load(args)
    report = run_find_absorbent(config, out_dir)
    _say(args, f"suggested observation set: {report['suggested_set']}")
    _say(
        args,
        "dominantly absorbent: "
        + ("yes" if report["dominantly_absorbent"] else "no"),
    )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config, out_dir = _load(args)
    artifacts = run_simulate(config, out_dir, seed=args.seed)
    names = ", ".join(path.name for path in artifacts.paths.values())
    _say(args, f"wrote {names} in {out_dir}")
    return EXIT_OK


def _observations(args):
    if args.observations is None:
        return None
    return load_observations_csv(args.observations)


def _cmd_detect(args) -> int:
    config, out_dir = _load(args)
    artifacts = run_detect(
        config, out_dir, obs=_observations(args), epsilon=args.epsilon, seed=args.seed
    )
    report = artifacts.report
    if report.detected:
        _say(
            args,
            f"disturbance detected at t = {report.onset_time:g} "
            f"(threshold {report.threshold:g})",
        )
    else:
        _say(args, f"no disturbance detected (threshold {report.threshold:g})")
    return EXIT_OK


def _cmd_identify(args) -> int:
    config, out_dir = _load(args)
    obs = _observations(args)
    detection = run_detect(
        config, out_dir, obs=obs, epsilon=args.epsilon, seed=args.seed
    )
    artifacts = run_identify(config, out_dir, detection=detection, mode=args.mode)
    result = artifacts.result
    _say(args, f"identification mode: {result.mode}")
    localized = " ".join(str(v) for v in result.localized) or "none"
    _say(args, f"localized source vertices: {localized}")
    if artifacts.paths:
        names = ", ".join(path.name for path in artifacts.paths.values())
        _say(args, f"wrote {names} in {out_dir}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    out_dir = args.out if args.out is not None else "reproduction"
    summary = run_reproduce(out_dir, seed=args.seed)
    for row in summary["scenarios"]:
        _say(
            args,
            f"{row['scenario']}: mode {row['mode']}, onset {row['onset_time']:g}, "
            f"localized [{row['localized']}], forcing error {row['forcing_rel_err']:.3e}",
        )
    _say(args, f"summary written to {out_dir}")
    return EXIT_OK


COMMANDS = {
    "analyze-graph": _cmd_analyze_graph,
    "find-absorbent": _cmd_find_absorbent,
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "identify": _cmd_identify,
    "reproduce-paper": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GridtraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
