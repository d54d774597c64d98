"""
Tournament — seeded matches between two agent kinds, aggregated into a report.

Each match owns its own GameState, RNG stream and agent graphs, so matches
can run on a thread pool. Results are reduced serially in game-index order,
which keeps the report identical whatever the worker count.

Report fields:
    twr / wwr / lwr     total, werewolf-side and leader-side win rate of the
                        focus kind (gratr when seated)
    mean_scores         mean per-player action score, per kind
    mean_role_scores    same, per kind and role
"""
import hashlib
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from rich.table import Table

from backend.config import GraphConfig, RunConfig, resolve_path
from backend.errors import GameError
from backend.snapshot import to_snapshot, trace_records
from pipeline.extraction import FixtureRule, LLMExtractor, ScriptedExtractor, load_fixture
from pipeline.llm_client import CompletionParams
from pipeline.werewolf.agents import LiveDecider, TrustAgent, build_agents
from pipeline.werewolf.engine import Lineup, new_match, play_out
from pipeline.werewolf.models import AgentKind, Role, Side
from pipeline.werewolf.scoring import finalize_scores

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchSettings:
    graph: GraphConfig
    rules: Tuple[FixtureRule, ...] = ()
    backend: Any = None
    params: CompletionParams = CompletionParams()
    live: bool = False
    max_rounds: int = 15
    keep_snapshots: bool = False

    @classmethod
    def from_config(cls, config: RunConfig, backend: Any = None) -> "MatchSettings":
        live = config.backend == "live"
        return cls(
            graph=config.graph,
            rules=() if live else tuple(load_fixture(resolve_path(config.extraction_fixture))),
            backend=backend,
            params=CompletionParams(temperature=config.temperature, model=config.model),
            live=live,
            max_rounds=config.max_rounds,
            keep_snapshots=config.snapshots,
        )

    def extractor(self, players: Sequence[str]):
        if self.live:
            return LLMExtractor(self.backend, players, self.params)
        return ScriptedExtractor(self.rules, players)

    def decider(self) -> Optional[LiveDecider]:
        return LiveDecider(self.backend, self.params) if self.live else None


@dataclass
class MatchRecord:
    index: int
    seed: int
    winner: Side
    capped: bool
    rounds: int
    focus_side: Optional[Side]
    per_player: Dict[str, float]
    per_kind: Dict[str, float]
    per_kind_role: Dict[str, Dict[str, float]]
    seats: List[Dict[str, str]]
    events: List[Dict[str, Any]] = field(default_factory=list)
    traces: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    snapshots: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def focus_won(self) -> bool:
        return self.focus_side is not None and self.winner is self.focus_side

    def summary(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "seed": self.seed,
            "winner": self.winner.value,
            "capped": self.capped,
            "rounds": self.rounds,
            "focus_side": self.focus_side.value if self.focus_side else None,
            "focus_won": self.focus_won,
            "seats": self.seats,
            "scores": self.per_player,
        }


def derive_seeds(base_seed: int, n_games: int) -> List[int]:
    """Per-game seeds: first 8 hex digits of sha256('<base>:<index>')."""
    return [int(hashlib.sha256(f"{base_seed}:{i}".encode()).hexdigest()[:8], 16) for i in range(n_games)]


def focus_kind(kinds: Sequence[AgentKind]) -> AgentKind:
    return AgentKind.GRATR if AgentKind.GRATR in kinds else kinds[0]


def play_match(index: int, seed: int, lineup: Lineup, settings: MatchSettings) -> MatchRecord:
    state = new_match(seed, lineup, settings.max_rounds)
    agents = build_agents(state, settings.graph, settings.extractor(state.player_ids), settings.decider())
    play_out(state, agents)
    score = finalize_scores(state)

    focus = focus_kind(state.kinds())
    focus_seats = state.seats_of_kind(focus)
    holds_wolves = any(s.role is Role.WEREWOLF for s in focus_seats)
    focus_side = Side.WEREWOLF if holds_wolves else Side.VILLAGE

    record = MatchRecord(
        index=index,
        seed=seed,
        winner=score.winner,
        capped=score.capped,
        rounds=state.round,
        focus_side=focus_side,
        per_player=score.per_player,
        per_kind=score.per_kind,
        per_kind_role=score.per_kind_role,
        seats=[{"player": s.player_id, "role": s.role.value, "kind": s.kind.value} for s in state.players],
        events=state.log.to_records(),
    )
    for pid, agent in agents.items():
        if isinstance(agent, TrustAgent):
            record.traces[pid] = trace_records(agent.results)
            if settings.keep_snapshots:
                record.snapshots[pid] = to_snapshot(agent.graph)
    logger.debug("[tournament] game %d (seed %d): %s wins in %d rounds",
                 index, seed, score.winner.value, state.round)
    return record


def _rate(records: Sequence[MatchRecord]) -> float:
    return sum(1 for r in records if r.focus_won) / len(records) if records else 0.0


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def build_report(records: Sequence[MatchRecord], lineup: Lineup) -> Dict[str, Any]:
    kinds = [AgentKind(k) for k in lineup]
    focus = focus_kind(kinds)
    wolf_games = [r for r in records if r.focus_side is Side.WEREWOLF]
    leader_games = [r for r in records if r.focus_side is Side.VILLAGE]

    by_kind: Dict[str, List[float]] = defaultdict(list)
    by_kind_role: Dict[str, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        for kind, value in r.per_kind.items():
            by_kind[kind].append(value)
        for kind, roles in r.per_kind_role.items():
            for role, value in roles.items():
                by_kind_role[kind][role].append(value)

    return {
        "focus": focus.value,
        "lineup": {AgentKind(k).value: n for k, n in lineup.items()},
        "n_games": len(records),
        "twr": _rate(records),
        "wwr": _rate(wolf_games),
        "lwr": _rate(leader_games),
        "werewolf_games": len(wolf_games),
        "leader_games": len(leader_games),
        "capped_games": sum(1 for r in records if r.capped),
        "mean_scores": {k.value: _mean(by_kind[k.value]) for k in kinds},
        "mean_role_scores": {
            k.value: {role: _mean(v) for role, v in sorted(by_kind_role[k.value].items())}
            for k in kinds
        },
        "games": [r.summary() for r in records],
    }


def run_tournament(
    n_games: int,
    seeds: Sequence[int],
    lineup: Lineup,
    settings: MatchSettings,
    workers: int = 1,
) -> Tuple[Dict[str, Any], List[MatchRecord]]:
    """Play n_games matches and reduce them into a report. Returns (report, records)."""
    if n_games < 1:
        raise GameError(f"n_games must be >= 1, got {n_games}")
    if len(seeds) < n_games:
        raise GameError(f"need {n_games} seeds, got {len(seeds)}")

    records: List[MatchRecord] = []
    if workers <= 1:
        records = [play_match(i, seeds[i], lineup, settings) for i in range(n_games)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(play_match, i, seeds[i], lineup, settings) for i in range(n_games)]
            for future in as_completed(futures):
                records.append(future.result())
        records.sort(key=lambda r: r.index)

    report = build_report(records, lineup)
    logger.info("[tournament] %d games, %s TWR %.3f", n_games, report["focus"], report["twr"])
    return report, records


def default_lineup(opponent: str) -> Dict[str, int]:
    return {AgentKind.GRATR.value: 4, AgentKind(opponent).value: 4}


def report_table(report: Mapping[str, Any]) -> Table:
    table = Table(title=f"{report['focus']} over {report['n_games']} games")
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    table.add_row("TWR", f"{report['twr']:.1%}")
    table.add_row(f"WWR ({report['werewolf_games']} games)", f"{report['wwr']:.1%}")
    table.add_row(f"LWR ({report['leader_games']} games)", f"{report['lwr']:.1%}")
    table.add_row("Capped games", str(report["capped_games"]))
    for kind, value in report["mean_scores"].items():
        table.add_row(f"Mean score [{kind}]", f"{value:.2f}")
        for role, role_value in report["mean_role_scores"].get(kind, {}).items():
            table.add_row(f"  {role}", f"{role_value:.2f}")
    return table
