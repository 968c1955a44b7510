"""Command-line entry points.

Five subcommands cover the whole workflow: ``synth`` writes scripted scene
streams, ``generate`` turns streams into benchmark items, ``evaluate``
scores a model client against an items file, ``review-serve`` starts the
human-verification service, and ``report`` re-renders a saved records
file. Failures exit nonzero after printing one machine-parsable JSON error
record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import RunConfig
from .errors import ProxibenchError
from .evalharness import (
    HttpClient,
    ReplayClient,
    aggregate,
    evaluate_items,
    format_report,
    records_from_file,
    records_to_file,
)
from .forge import read_items, write_items
from .pipeline import run_generation
from .schema import read_stream, stream_digest, write_stream
from .synth import default_recipes, synthesize


def _require_path(path: str, flag: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError("{}: {} does not exist".format(flag, path))
    return p


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        config = RunConfig.load(_require_path(args.config, "--config"))
    else:
        config = RunConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
        config.validate()
    if getattr(args, "categories", None):
        config.categories = tuple(args.categories.split(","))
        config.validate()
    return config


def _cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for recipe in default_recipes(args.seed):
        stream = synthesize(recipe)
        path = out_dir / "{}.jsonl".format(recipe.name)
        write_stream(stream, path)
        written.append(
            {
                "stream_id": stream.stream_id,
                "path": str(path),
                "frames": len(stream.frames),
                "digest": stream_digest(stream),
            }
        )
    json.dump({"streams": written}, sys.stdout, indent=2)
    print()
    return 0


def _stream_paths(inputs: Sequence[str]) -> list[Path]:
    paths: list[Path] = []
    for raw in inputs:
        p = _require_path(raw, "--input")
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        else:
            paths.append(p)
    return paths


def _cmd_generate(args) -> int:
    config = _load_config(args)
    streams = [read_stream(p) for p in _stream_paths(args.input)]
    result = run_generation(streams, config)
    write_items(result.items, args.out)
    skip_path = args.skip_log or "{}.skips.json".format(args.out)
    with open(skip_path, "w", encoding="utf-8") as fh:
        json.dump(
            [
                {"stream_id": s.stream_id, "category": s.category, "reason": s.reason}
                for s in result.skips
            ],
            fh,
            indent=2,
        )
        fh.write("\n")
    json.dump(
        {
            "items": len(result.items),
            "by_category": result.by_category(),
            "skips": len(result.skips),
            "out": str(args.out),
            "skip_log": str(skip_path),
        },
        sys.stdout,
        indent=2,
    )
    print()
    return 0


def _cmd_evaluate(args) -> int:
    items = read_items(_require_path(args.items, "--items"))
    if args.client == "replay":
        if not args.responses:
            raise ProxibenchError("--client replay requires --responses")
        client = ReplayClient(_require_path(args.responses, "--responses"))
    else:
        if not args.endpoint:
            raise ProxibenchError("--client http requires --endpoint")
        client = HttpClient(args.endpoint)
    records = evaluate_items(items, client, with_cot=args.cot)
    if args.out:
        records_to_file(records, args.out)
    print(format_report(aggregate(records)))
    return 0


def _cmd_review_serve(args) -> int:
    from .review import ReviewStore, serve

    items = read_items(_require_path(args.items, "--items"))
    store = ReviewStore(items, args.log)
    serve(store, host=args.host, port=args.port)
    return 0


def _cmd_report(args) -> int:
    records = records_from_file(_require_path(args.records, "--records"))
    print(format_report(aggregate(records)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxibench",
        description="Egocentric proximity QA: synthesize, generate, evaluate, review.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the scripted scene streams")
    p.add_argument("--out-dir", required=True, help="directory for stream files")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("generate", help="turn scene streams into benchmark items")
    p.add_argument(
        "--input", nargs="+", required=True, help="stream files or directories"
    )
    p.add_argument("--out", required=True, help="items file to write")
    p.add_argument("--config", help="JSON run-config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--categories", help="comma-separated category filter")
    p.add_argument("--skip-log", help="skip-log path (default: <out>.skips.json)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="score a model client on an items file")
    p.add_argument("--items", required=True, help="items file")
    p.add_argument("--client", choices=("replay", "http"), default="replay")
    p.add_argument("--responses", help="canned-response JSONL for --client replay")
    p.add_argument("--endpoint", help="model endpoint URL for --client http")
    p.add_argument("--cot", action="store_true", help="chain-of-thought prompts")
    p.add_argument("--out", help="write per-item records here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("review-serve", help="start the human-review service")
    p.add_argument("--items", required=True, help="items file")
    p.add_argument("--log", required=True, help="append-only verdict log path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_review_serve)

    p = sub.add_parser("report", help="render a saved eval-records file")
    p.add_argument("--records", required=True, help="records file from evaluate")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProxibenchError, OSError, ValueError) as exc:
        json.dump(
            {"error": type(exc).__name__, "detail": str(exc)},
            sys.stderr,
        )
        print(file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
