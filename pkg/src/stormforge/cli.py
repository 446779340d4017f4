"""Command-line entry point: ``storm-forge run|minimize|mock``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from stormforge.errors import ConfigError, StormError

EXIT_CLEAN, EXIT_BUGS, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="storm-forge", description="Mutational fuzzer for SMT solvers.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a fuzzing campaign")
    run.add_argument("--config", required=True)
    run.add_argument("--seeds", action="append", help="seed file, directory or glob (repeatable)")
    run.add_argument("--solver", action="append", help="restrict to this solver id (repeatable)")
    run.add_argument("--seed", type=int, help="master rng seed")
    run.add_argument("--incremental", action="store_true", default=None)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.add_argument("--nm", type=int, help="iterations per seed (overrides scaling)")
    run.add_argument("--no-minimize", action="store_true")

    mn = sub.add_parser("minimize", help="minimize a recorded class-A bug")
    mn.add_argument("--bug", required=True, help="report.json of the bug")
    mn.add_argument("--config", help="campaign config providing the solver profile")
    mn.add_argument("--binary", help="target solver binary (instead of --config)")
    mn.add_argument("--nm", type=int, default=100)
    mn.add_argument("--seed", type=int, default=0)
    mn.add_argument("--out", help="output directory (default: next to the report)")
    mn.add_argument("--depth-first", action="store_true")

    mk = sub.add_parser("mock", help="write a deliberately faulty solver executable")
    mk.add_argument("--behavior", required=True)
    mk.add_argument("--out", required=True)
    return p


def _cmd_run(args) -> int:
    from stormforge.campaign import load_config, run_campaign

    cfg = load_config(
        args.config,
        seeds=args.seeds,
        rng_seed=args.seed,
        incremental=args.incremental,
        workers=args.workers,
        out_dir=args.out,
        nm=args.nm,
        minimize=False if args.no_minimize else None,
        solver_ids=args.solver,
    )
    report = run_campaign(cfg)
    sys.stdout.write(report.summary())
    return EXIT_BUGS if report.n_bugs else EXIT_CLEAN


def _cmd_minimize(args) -> int:
    from stormforge.campaign import load_config
    from stormforge.instancegen import FuzzConfig, Instance
    from stormforge.minimizer import minimize, write_artifacts
    from stormforge.oracle import OracleClient, default_oracle_profile
    from stormforge.runner import BugReport, SolverProfile, SolverRunner
    from stormforge.smtlib import parse_script

    try:
        with open(args.bug) as fh:
            data = json.load(fh)
        report = BugReport.from_dict(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read bug report {args.bug}: {exc}") from exc
    if report.bug_class != "A":
        raise ConfigError("only class-A reports can be minimized")
    if args.binary:
        profile = SolverProfile(id=report.solver_id, binary=args.binary)
        oracle = OracleClient(default_oracle_profile())
    elif args.config:
        cfg = load_config(args.config, seeds=["-"])
        matches = [s for s in cfg.solvers if s.id == report.solver_id]
        if not matches:
            raise ConfigError(f"solver {report.solver_id} not in {args.config}")
        profile, oracle = matches[0], OracleClient(cfg.oracle)
    else:
        raise ConfigError("minimize needs --config or --binary")
    path = report.instance_path
    if path and not os.path.isabs(path) and not os.path.exists(path):
        path = os.path.join(os.path.dirname(args.bug), os.path.basename(path))
    if not path or not os.path.exists(path):
        raise ConfigError(f"bug instance not found: {report.instance_path}")
    with open(path) as fh:
        script = parse_script(fh.read())
    report.instance = Instance.from_script(script, report.seed_id, report.rng_seed, report.iteration)
    m = oracle.generate_assignment(script, args.seed)
    fcfg = FuzzConfig(nc=200, nm=args.nm, rng_seed=args.seed)
    res = minimize(report, fcfg, SolverRunner(profile), assignment=m, evaluator=oracle,
                   depth_first=args.depth_first)
    out = args.out or os.path.dirname(os.path.abspath(args.bug))
    min_path, _ = write_artifacts(res, out)
    o, n = res.original, res.minimized
    print(f"{o.bytes}/{o.assertions}/{o.depth} -> {n.bytes}/{n.assertions}/{n.depth} "
          f"({res.fuzz_calls} fuzz calls){'' if res.reproduced else ' [not reproducible]'}")
    print(min_path)
    return EXIT_BUGS


def _cmd_mock(args) -> int:
    from stormforge.mock import build_mock

    print(build_mock(args.behavior, args.out))
    return EXIT_CLEAN


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "minimize": _cmd_minimize, "mock": _cmd_mock}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"storm-forge: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StormError as exc:
        print(f"storm-forge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
