"""Command-line front end: ``symplab run|list-scenarios|validate``.

Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 for
configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .report import emit_report
from .scenarios import SCENARIOS, prepare, run_scenario

log = logging.getLogger("symplab")

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _build_parser():
    parser = argparse.ArgumentParser(prog="symplab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every scenario section of a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (default: 'out' key or ./results)")
    run.add_argument("--seed", type=int, default=None, help="override every section's seed")
    run.add_argument("--grid-scale", type=float, default=None,
                     help="multiply all grid sizes (convergence studies)")
    run.add_argument("--figures", action="store_true",
                     help="also render PNG figures next to the CSVs (needs matplotlib)")
    run.add_argument("--only", action="append", default=None, metavar="SECTION",
                     help="run only the named section(s)")

    sub.add_parser("list-scenarios", help="list the known scenarios")

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config", type=Path)
    return parser


def _seed(value):
    if value is not None and not 0 <= value < 2 ** 64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    return value


def _sections(path, only=None):
    sections = load_config(path)
    if only:
        missing = set(only) - {s.name for s in sections}
        if missing:
            raise ConfigError(f"no such section(s): {', '.join(sorted(missing))}")
        sections = [s for s in sections if s.name in only]
    return sections


def cmd_list(args):
    width = max(len(n) for n in SCENARIOS)
    for name, scen in SCENARIOS.items():
        print(f"{name:<{width}}  {scen.summary}")
    return EXIT_PASS


def cmd_validate(args):
    sections = _sections(args.config)
    for cfg in sections:
        cfg = prepare(cfg)
        print(f"[{cfg.name}] ok: scenario={cfg.scenario} seed={cfg.seed}")
    return EXIT_PASS


def cmd_run(args):
    seed = _seed(args.seed)
    sections = _sections(args.config, args.only)
    prepared = [prepare(cfg, args.grid_scale, seed) for cfg in sections]
    status = EXIT_PASS
    for cfg, raw in zip(prepared, sections):
        root = args.out or raw.out or Path("results")
        out_dir = root / cfg.name if len(sections) > 1 else root
        log.info("running %s (%s)", cfg.name, cfg.scenario)
        rep = run_scenario(raw, args.grid_scale, seed)
        if args.figures:
            from .plotting import render_figures
            rep.files.extend(p.name for p in render_figures(rep, out_dir))
        emit_report(rep, out_dir)
        for line in rep.summary_lines():
            print(line)
        print(f"  wrote {len(rep.files)} file(s) to {out_dir}")
        if rep.errors:
            status = EXIT_ERROR
        elif not rep.passed and status == EXIT_PASS:
            status = EXIT_FAIL
    return status


COMMANDS = {"run": cmd_run, "list-scenarios": cmd_list, "validate": cmd_validate}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
