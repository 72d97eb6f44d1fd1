"""Command-line entry point.

Subcommands run the pipeline up to a stage (stages recompute
deterministically from the inputs), `all` runs everything, and `serve`
exposes a completed run directory over HTTP together with the browser UI.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import pipeline

STAGE_COMMANDS = {
    "optimize": "optimize",
    "groups": "groups",
    "generate": "generate",
    "evaluate": "evaluate",
    "rank": "rank",
    "analyse": "analyse",
    "all": "analyse",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        help="run-config JSON naming system/catalog/mga_config/preferences "
        "(default: the packaged desk-scale fixture)",
    )
    common.add_argument(
        "--out-dir",
        default=os.environ.get("NEAROPT_RUN_DIR", "runs/latest"),
        help="run directory for artifacts (env NEAROPT_RUN_DIR)",
    )
    common.add_argument(
        "--jobs", type=int, default=None, help="parallel MGA workers (default: config)"
    )
    common.add_argument(
        "--seed-independent",
        action="store_true",
        help="assert that results are reproducible without any random seed "
        "(always true; the pipeline uses no RNG)",
    )
    parser = argparse.ArgumentParser(
        prog="nearopt",
        description=(
            "Generate near-optimal energy system alternatives, evaluate them "
            "on an attribute hierarchy and rank them under stakeholder "
            "preferences."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_COMMANDS:
        sub.add_parser(
            name,
            parents=[common],
            help="run the full pipeline" if name == "all"
            else f"run the pipeline up to the {STAGE_COMMANDS[name]!r} stage",
        )
    serve = sub.add_parser(
        "serve", parents=[common], help="serve a run directory over HTTP (plus the UI)"
    )
    serve.add_argument(
        "--port", type=int, default=int(os.environ.get("NEAROPT_PORT", "8000"))
    )
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--frontend",
        default=os.environ.get("NEAROPT_FRONTEND"),
        help="directory with the built browser UI (served at /)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .api import create_app

        app = create_app(args.out_dir, frontend_dir=args.frontend)
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
        return 0

    inputs = pipeline.RunInputs.from_config(args.config)
    manifest = pipeline.run_pipeline(
        inputs, args.out_dir, until=STAGE_COMMANDS[args.command], jobs=args.jobs
    )
    counts = ", ".join(f"{k}={v}" for k, v in sorted(manifest.counts.items()))
    print(f"run {manifest.run_id} -> {Path(args.out_dir).resolve()}")
    print(f"  stages: {', '.join(manifest.timestamps)}")
    print(f"  counts: {counts}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
