"""Command-line entry point.

One TOML config describes one experiment; subcommands run the pipeline
stages against the config's output directory:

    idlink synth      --config run.toml     # or: idlink ingest
    idlink groundtruth --config run.toml
    idlink extract    --config run.toml
    idlink pair       --config run.toml
    idlink analyze    --config run.toml
    idlink evaluate   --config run.toml
    idlink report     --config run.toml

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .config import apply_cli_overrides, load_config
from .errors import ConvergenceError, DataFormatError

_STAGES = (
    "ingest", "synth", "groundtruth", "extract", "pair",
    "analyze", "train", "evaluate", "report",
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="idlink", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="stage", metavar="stage")
    for stage in _STAGES:
        sp = sub.add_parser(stage, help=f"run the {stage} stage")
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", help="override the output directory")
        sp.add_argument("--seed", type=int, help="rebase every stage seed")
        sp.add_argument("--force", action="store_true",
                        help="accept artifacts stamped with a different config hash")
        sp.add_argument("--jobs", type=int, help="parallel workers for pair assembly")
    return parser


def _run_stage(stage: str, cfg, force: bool):
    if stage == "ingest":
        print(pipeline.run_ingest(cfg))
    elif stage == "synth":
        print(pipeline.run_synth(cfg))
    elif stage == "groundtruth":
        for path in pipeline.run_groundtruth(cfg, force):
            print(path)
    elif stage == "extract":
        for path in pipeline.run_extract(cfg, force).values():
            print(path)
    elif stage == "pair":
        for path in pipeline.run_pair(cfg, force).values():
            print(path)
    elif stage == "analyze":
        for path in pipeline.run_analyze(cfg, force).values():
            print(path)
    elif stage == "train":
        for path in pipeline.run_train(cfg, force):
            print(path)
    elif stage == "evaluate":
        print(pipeline.run_evaluate(cfg, force))
    elif stage == "report":
        print(pipeline.run_report(cfg, force))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.stage is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        cfg = apply_cli_overrides(cfg, out=args.out, seed=args.seed, jobs=args.jobs)
        _run_stage(args.stage, cfg, args.force)
    except (DataFormatError, ValueError) as exc:
        print(f"idlink {args.stage}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"idlink {args.stage}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"idlink {args.stage}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"idlink {args.stage}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
