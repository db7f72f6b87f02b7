"""Command-line entry point.

kbforge <stage> --config path/to/config.yaml

Stages: crawl, relations, classes, taxonomy, dedup, export, eval, serve,
plus `all` (every stage through eval) and `stats` (print store stats).
Exit codes: 0 success, 1 user/config error (including a budget halt),
2 provider failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from kbforge.errors import KbForgeError, ProviderError, TransportError
from kbforge.kbstore.stats import compute_stats
from kbforge.kbstore.store import KnowledgeBase
from kbforge.pipeline.config import load_config
from kbforge.pipeline.stages import EVAL_ANALYSES, STAGES, run_all, run_stage

EXIT_OK = 0
EXIT_USER = 1
EXIT_PROVIDER = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all", "stats"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the pipeline YAML config")
        if name == "eval":
            p.add_argument(
                "--only",
                action="append",
                choices=EVAL_ANALYSES,
                help="run just these analyses (repeatable); skips stage bookkeeping",
            )
        if name == "serve":
            p.add_argument("--port", type=int, help="override the configured port")
    return parser


def _exit_code_for_halt(reason: str | None) -> int:
    if reason and reason.startswith("provider"):
        return EXIT_PROVIDER
    return EXIT_USER


def _print_result(result) -> None:
    print(json.dumps({"stage": result.stage, "status": result.status, "report": result.report}, indent=2, default=str))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "stats":
            kb = KnowledgeBase.load(config.kb_path)
            print(json.dumps(compute_stats(kb).as_dict(), indent=2, default=str))
            return EXIT_OK
        if args.command == "all":
            results = run_all(config)
            for result in results:
                _print_result(result)
            last = results[-1]
            if last.status == "halted":
                return _exit_code_for_halt(last.report.get("halted"))
            return EXIT_OK
        if args.command == "serve" and args.port is not None:
            config.serve.port = args.port
        only = set(args.only) if args.command == "eval" and args.only else None
        result = run_stage(args.command, config, only=only)
        _print_result(result)
        if result.status == "halted":
            return _exit_code_for_halt(result.report.get("halted"))
        return EXIT_OK
    except TransportError as exc:
        print(f"provider transport failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except ProviderError as exc:
        print(f"provider failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (KbForgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    raise SystemExit(main())
