"""Command-line entry points: replay, generate, serve, corpus."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from .config import ENV_CONFIG, load_config
from .grammar import phrase_corpus, render_phrase
from .harness import build_report, replay, report_json, report_text
from .scenario import InvalidSpec, generate, load_scenario
from .trace import MalformedTrace, load

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_MALFORMED = 2


def _add_config_arg(parser: argparse.ArgumentParser, speech_seed: bool = True) -> None:
    parser.add_argument(
        "--config",
        default=None,
        help=f"harness configuration file (default: ${ENV_CONFIG} or built-ins)",
    )
    speech = parser.add_argument_group("speech model overrides")
    speech.add_argument("--pause-filter", type=float, default=None, metavar="SECONDS")
    speech.add_argument("--latency-mean", type=float, default=None, metavar="SECONDS")
    speech.add_argument("--latency-jitter", type=float, default=None, metavar="SECONDS")
    if speech_seed:
        # on `generate`, --seed is the perception noise seed instead
        speech.add_argument(
            "--seed", type=int, default=None, dest="speech_seed",
            help="speech model RNG seed",
        )
    else:
        speech.add_argument(
            "--speech-seed", type=int, default=None, dest="speech_seed",
            help="speech model RNG seed",
        )


def _load_config(args: argparse.Namespace):
    config = load_config(args.config)
    overrides = {
        "pause_filter": args.pause_filter,
        "latency_mean": args.latency_mean,
        "latency_jitter": args.latency_jitter,
        "rng_seed": args.speech_seed,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "instant", False):
        overrides.update(pause_filter=0.0, latency_mean=0.0, latency_jitter=0.0)
    if overrides:
        config.speech = replace(config.speech, **overrides)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogest",
        description="Co-speech gesture command engine and workcell simulator",
    )
    parser.add_argument("--version", action="version", version=f"cogest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="replay a trace through the full pipeline")
    p_replay.add_argument("trace", help="trace file to replay")
    p_replay.add_argument("--scenario", default=None, help="scenario spec to check expectations")
    p_replay.add_argument("--strict", action="store_true", help="fail on unresolved references")
    p_replay.add_argument("--report", default=None, help="write the JSON report here")
    _add_config_arg(p_replay)

    p_gen = sub.add_parser("generate", help="synthesize a trace from a scenario spec")
    p_gen.add_argument("spec", help="scenario spec (YAML)")
    p_gen.add_argument("--seed", type=int, default=0, help="perception noise seed")
    p_gen.add_argument("-o", "--output", required=True, help="output trace path")
    _add_config_arg(p_gen, speech_seed=False)

    p_serve = sub.add_parser("serve", help="run the live session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8733)
    p_serve.add_argument(
        "--time-scale",
        type=float,
        default=1.0,
        help="simulated seconds per wall second",
    )
    p_serve.add_argument(
        "--instant",
        action="store_true",
        help="skip the speech latency model (demo mode)",
    )
    p_serve.add_argument(
        "--console",
        default=None,
        help="serve the operator console from this directory (default: "
        "frontend/dist if present)",
    )
    _add_config_arg(p_serve)

    sub.add_parser("corpus", help="print the command phrase corpus")
    return parser


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        trace = load(args.trace)
    except FileNotFoundError:
        print(f"error: no such trace file: {args.trace}", file=sys.stderr)
        return EXIT_MALFORMED
    except MalformedTrace as exc:
        print(f"error: malformed trace: {exc}", file=sys.stderr)
        return EXIT_MALFORMED

    scenario = None
    if args.scenario:
        try:
            scenario = load_scenario(args.scenario)
        except (InvalidSpec, FileNotFoundError) as exc:
            print(f"error: bad scenario spec: {exc}", file=sys.stderr)
            return EXIT_MALFORMED

    config = _load_config(args)
    result = replay(trace, config, scenario)
    report = build_report(result, scenario)
    sys.stdout.write(report_text(report))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report_json(report))

    if result.expectation_failures:
        return EXIT_EXPECTATION
    if args.strict and result.metrics.unresolved_references:
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        spec = load_scenario(args.spec)
    except (InvalidSpec, FileNotFoundError) as exc:
        print(f"error: bad scenario spec: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    config = _load_config(args)
    try:
        trace = generate(spec, config, seed=args.seed)
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    trace.save(args.output)
    print(f"wrote {len(trace.records)} records to {args.output}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import create_app

    console_dir = args.console
    if console_dir is None and os.path.isdir("frontend/dist"):
        console_dir = "frontend/dist"
    config = _load_config(args)
    app = create_app(config, time_scale=args.time_scale, console_dir=console_dir)
    if console_dir:
        print(f"operator console: http://{args.host}:{args.port}/ (from {console_dir})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_corpus(_: argparse.Namespace) -> int:
    for phrase, intent in phrase_corpus():
        canonical = render_phrase(intent)
        print(f"{phrase!r:<35} -> {canonical}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "replay": cmd_replay,
        "generate": cmd_generate,
        "serve": cmd_serve,
        "corpus": cmd_corpus,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
