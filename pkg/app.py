"""
GRATR — graph-retrieval trust reasoning, command-line entry point.

Commands:
  simulate      → Werewolf tournament: report.json, games/*.jsonl, traces/*.json,
                  snapshots/*.json (with --snapshots)
  analyze       → intent pipeline: predictions.csv, intent_report.json
  trace         → render a retrieval trace (or replay a game log with --game)
  export-graph  → print a graph snapshot as normalized JSON or DOT

Global flags: --config PATH, --out DIR, --seed N, --backend {scripted,live}, --verbose
Exit codes: 0 ok, 1 configuration / input error, 2 runtime failure.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Load .env BEFORE any module that reads env vars
load_dotenv()

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from backend.config import RunConfig, load_config, resolve_path
from backend.errors import ConfigError, DatasetError, GratrError
from backend.snapshot import from_snapshot, to_dot, to_snapshot

from pipeline.extraction import LLMExtractor, ScriptedExtractor, load_fixture
from pipeline.llm_client import CompletionParams, make_backend
from pipeline.render import render_game, render_trace
from pipeline.storage import atomic_write_text, dumps_json, read_json, read_jsonl, write_json, write_jsonl

# ── Werewolf imports ──────────────────────────────────────────────────────────
from pipeline.werewolf.tournament import (
    MatchSettings,
    default_lineup,
    derive_seeds,
    report_table,
    run_tournament,
)

# ── Intent imports ────────────────────────────────────────────────────────────
from pipeline.intent.classifier import classify_stream
from pipeline.intent.dataset import ingest
from pipeline.intent.metrics import evaluate

import pandas as pd

logger = logging.getLogger("gratr")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

INTENT_SETTING = "a political discussion on social media"


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _config(args: argparse.Namespace, **overrides) -> RunConfig:
    overrides.update(seed=args.seed, out=args.out, backend=args.backend)
    return load_config(args.config, overrides)


def _require_file(path: str) -> str:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    return path


# ── simulate ──────────────────────────────────────────────────────────────────

def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(
        args,
        games=args.games,
        opponent=args.opponent,
        workers=args.workers,
        snapshots=True if args.snapshots else None,
    )
    backend = make_backend(config) if config.backend == "live" else None

    lineup = default_lineup(config.opponent)
    seeds = derive_seeds(config.seed, config.games)
    report, records = run_tournament(
        config.games, seeds, lineup, MatchSettings.from_config(config, backend), workers=config.workers
    )

    out = config.out
    for record in records:
        name = f"game_{record.index:03d}"
        write_jsonl(os.path.join(out, "games", f"{name}.jsonl"), record.events)
        write_json(os.path.join(out, "traces", f"{name}.json"), record.traces)
        for pid, snapshot in record.snapshots.items():
            write_json(os.path.join(out, "snapshots", f"{name}_{pid}.json"), snapshot)
    settings = {k: v for k, v in config.to_dict().items() if k != "out"}
    write_json(os.path.join(out, "report.json"), {**report, "seed": config.seed, "config": settings})

    Console().print(report_table(report))
    return EXIT_OK


# ── analyze ───────────────────────────────────────────────────────────────────

def _intent_extractor_factory(config: RunConfig):
    if config.backend == "live":
        backend = make_backend(config)
        params = CompletionParams(temperature=config.temperature, model=config.model)
        return lambda participants: LLMExtractor(backend, participants, params, setting=INTENT_SETTING)
    rules = load_fixture(resolve_path(config.intent_fixture))
    return lambda participants: ScriptedExtractor(rules, participants)


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _config(args, dataset=args.dataset)
    dataset = ingest(resolve_path(config.dataset))
    predictions = classify_stream(dataset.messages, _intent_extractor_factory(config), config.graph)

    gold = {m.id: m.gold for m in dataset.messages}
    report = evaluate({p.id: p.predicted for p in predictions}, gold)
    baseline = evaluate({p.id: p.message_label for p in predictions}, gold)

    frame = pd.DataFrame(
        [(p.id, p.predicted.value) for p in predictions], columns=["id", "predicted"]
    )
    atomic_write_text(os.path.join(config.out, "predictions.csv"), frame.to_csv(index=False, lineterminator="\n"))
    write_json(os.path.join(config.out, "intent_report.json"), {
        **report.to_dict(),
        "baseline": baseline.to_dict(),
        "messages": len(dataset.messages),
        "skipped_rows": dataset.skipped,
        "diagnostics": dataset.diagnostics,
    })

    table = Table(title=f"intent analysis over {len(dataset.messages)} messages")
    table.add_column("Classifier")
    table.add_column("Accuracy", justify="right")
    table.add_column("Macro-F1", justify="right")
    table.add_row("graph + message", f"{report.accuracy:.3f}", f"{report.macro_f1:.3f}")
    table.add_row("message only", f"{baseline.accuracy:.3f}", f"{baseline.macro_f1:.3f}")
    Console().print(table)
    if dataset.skipped:
        logger.warning("[analyze] %d invalid rows skipped", dataset.skipped)
    return EXIT_OK


# ── trace / export-graph ──────────────────────────────────────────────────────

def _read_traces(path: str):
    with open(_require_file(path), "r", encoding="utf-8") as f:
        text = f.read()
    if not text.strip():
        return []
    try:
        return read_json(path)
    except ValueError as exc:
        raise ConfigError(f"trace file {path} is not valid JSON: {exc}")


def _load_snapshot(path: str):
    try:
        data = read_json(_require_file(path))
    except ValueError as exc:
        raise ConfigError(f"snapshot {path} is not valid JSON: {exc}")
    try:
        return from_snapshot(data)
    except GratrError as exc:
        raise ConfigError(f"snapshot {path}: {exc}")


def cmd_trace(args: argparse.Namespace) -> int:
    if args.game:
        try:
            events = read_jsonl(_require_file(args.game))
        except ValueError as exc:
            raise ConfigError(f"game log {args.game} has a malformed line: {exc}")
        sys.stdout.write(render_game(events))
        return EXIT_OK

    if not args.trace:
        raise ConfigError("trace needs --trace PATH or --game PATH")
    sys.stdout.write(render_trace(_read_traces(args.trace)))
    if args.dot:
        if not args.snapshot:
            raise ConfigError("--dot needs --snapshot PATH")
        sys.stdout.write(to_dot(_load_snapshot(args.snapshot)))
    return EXIT_OK


def cmd_export_graph(args: argparse.Namespace) -> int:
    graph = _load_snapshot(args.snapshot)
    sys.stdout.write(to_dot(graph) if args.dot else dumps_json(to_snapshot(graph)))
    return EXIT_OK


# ── Parser ────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gratr", description="Graph-retrieval trust reasoning.")
    parser.add_argument("--config", help="run config file (default: gratr.json)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--backend", choices=["scripted", "live"], help="completion backend")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run a Werewolf tournament")
    simulate.add_argument("--games", type=int)
    simulate.add_argument("--opponent", choices=["baseline", "random", "noop"])
    simulate.add_argument("--workers", type=int)
    simulate.add_argument("--snapshots", action="store_true", help="keep per-game graph snapshots")
    simulate.set_defaults(handler=cmd_simulate)

    analyze = sub.add_parser("analyze", help="classify and score a labeled message dataset")
    analyze.add_argument("--dataset")
    analyze.set_defaults(handler=cmd_analyze)

    trace = sub.add_parser("trace", help="render a retrieval trace or replay a game log")
    trace.add_argument("--trace")
    trace.add_argument("--snapshot")
    trace.add_argument("--dot", action="store_true")
    trace.add_argument("--game")
    trace.set_defaults(handler=cmd_trace)

    export = sub.add_parser("export-graph", help="print a graph snapshot")
    export.add_argument("--snapshot", required=True)
    export.add_argument("--dot", action="store_true")
    export.set_defaults(handler=cmd_export_graph)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.handler(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.diagnostics:
            print(f"  {line}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GratrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        logger.exception("[app] unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
