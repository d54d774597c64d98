"""
Trust Graph — directed trustworthiness graph over players.

Nodes carry a trust score in [-1, 1] plus a bounded observation history.
Edges carry the append-only evidence list of one player's intentions towards
another, and a merged trust weight derived from that list.

Update rules:
    append_evidence      D(a,b) grows by one item, a's history records it
    update_node_trust    u = T(a)·c replaces T(b) only when |u| > |T(b)|
    merge_edge_evidence  T(a,b) = tanh(Σ ρ^(n-k) · c_k), newest item weight 1

The graph is owned by one session and mutated single-threadedly.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Iterable, List, Optional, Sequence

import networkx as nx

from backend.config import GraphConfig
from backend.errors import (
    CredibilityRangeError,
    NonMonotoneTickError,
    TrustGraphError,
    UnknownPlayerError,
)

logger = logging.getLogger(__name__)

PlayerId = str

# joins actor and target in snapshot edge keys, so ids may not contain it
EDGE_SEPARATOR = "->"


# ── Types ─────────────────────────────────────────────────────────────────────

class Stance(str, Enum):
    ALLY = "ally"
    ADVERSARY = "adversary"
    INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class EvidenceItem:
    """One extracted intention of `actor` towards `target`."""

    actor: PlayerId
    target: PlayerId
    description: str
    credibility: float
    role_guess: Optional[str]
    tick: int

    def __post_init__(self) -> None:
        if not isinstance(self.credibility, (int, float)) or not (-1.0 <= self.credibility <= 1.0):
            raise CredibilityRangeError(f"credibility {self.credibility!r} outside [-1, 1]")
        if self.tick < 0:
            raise NonMonotoneTickError(f"tick must be >= 0, got {self.tick}")
        if self.actor == self.target:
            raise TrustGraphError(f"self-directed evidence for {self.actor!r}")

    def to_record(self) -> dict:
        return {
            "desc": self.description,
            "cred": self.credibility,
            "role_guess": self.role_guess,
            "tick": self.tick,
        }


@dataclass(frozen=True)
class HistoryRecord:
    tick: int
    target: PlayerId
    description: str

    def to_record(self) -> dict:
        return {"tick": self.tick, "target": self.target, "desc": self.description}


@dataclass
class NodeState:
    trust: float = 0.0
    history: Deque[HistoryRecord] = field(default_factory=deque)

    @property
    def last_tick(self) -> Optional[int]:
        return self.history[-1].tick if self.history else None


@dataclass
class EdgeState:
    evidence: List[EvidenceItem] = field(default_factory=list)
    trust: float = 0.0

    @property
    def last_tick(self) -> Optional[int]:
        return self.evidence[-1].tick if self.evidence else None


class TrustGraph:
    """Fully connected directed graph; state lives on networkx node/edge attributes."""

    def __init__(self, config: GraphConfig):
        self.config = config
        self._g = nx.DiGraph()

    @property
    def players(self) -> List[PlayerId]:
        return list(self._g.nodes)

    def require(self, *players: PlayerId) -> None:
        for player in players:
            if player not in self._g:
                raise UnknownPlayerError(player)

    def node(self, player: PlayerId) -> NodeState:
        self.require(player)
        return self._g.nodes[player]["state"]

    def edge(self, actor: PlayerId, target: PlayerId) -> EdgeState:
        self.require(actor, target)
        if not self._g.has_edge(actor, target):
            raise TrustGraphError(f"no edge {actor}->{target}")
        return self._g.edges[actor, target]["state"]

    def neighbors(self, player: PlayerId) -> List[PlayerId]:
        """Players with an edge into `player` (all others, the graph being complete)."""
        self.require(player)
        return list(self._g.predecessors(player))

    def edge_keys(self) -> List[tuple]:
        return list(self._g.edges)

    def add_player(self, player: PlayerId) -> None:
        """Add a node and connect it both ways to every existing node."""
        if not isinstance(player, str) or not player:
            raise TrustGraphError(f"player id must be a non-empty string, got {player!r}")
        if EDGE_SEPARATOR in player:
            raise TrustGraphError(f"player id {player!r} contains {EDGE_SEPARATOR!r}")
        if player in self._g:
            raise TrustGraphError(f"duplicate player id: {player!r}")
        existing = list(self._g.nodes)
        self._g.add_node(player, state=NodeState(history=deque(maxlen=self.config.history_cap)))
        for other in existing:
            self._g.add_edge(player, other, state=EdgeState())
            self._g.add_edge(other, player, state=EdgeState())

    def node_count(self) -> int:
        return self._g.number_of_nodes()

    def edge_count(self) -> int:
        return self._g.number_of_edges()


def clamp(value: float, low: float = -1.0, high: float = 1.0) -> float:
    return max(low, min(high, value))


# ── Operations ────────────────────────────────────────────────────────────────

def init_graph(players: Sequence[PlayerId], config: Optional[GraphConfig] = None) -> TrustGraph:
    """Fully connected graph with zero trust everywhere and empty evidence lists."""
    players = list(players)
    if len(players) < 2:
        raise TrustGraphError(f"need at least 2 players, got {len(players)}")
    if len(set(players)) != len(players):
        dupes = sorted({p for p in players if players.count(p) > 1})
        raise TrustGraphError(f"duplicate player ids: {dupes}")

    graph = TrustGraph(config or GraphConfig())
    for player in players:
        graph.add_player(player)
    return graph


def _check_ticks(graph: TrustGraph, item: EvidenceItem,
                 edge_tick: Optional[int], history_tick: Optional[int]) -> None:
    if edge_tick is not None and item.tick < edge_tick:
        raise NonMonotoneTickError(
            f"tick {item.tick} precedes last tick {edge_tick} on {item.actor}->{item.target}"
        )
    if history_tick is not None and item.tick < history_tick:
        raise NonMonotoneTickError(
            f"tick {item.tick} precedes last history tick {history_tick} of {item.actor}"
        )


def append_evidence(graph: TrustGraph, item: EvidenceItem) -> TrustGraph:
    """Extend D(actor, target) and the actor's history. No trust value changes."""
    graph.require(item.actor, item.target)
    edge = graph.edge(item.actor, item.target)
    node = graph.node(item.actor)
    _check_ticks(graph, item, edge.last_tick, node.last_tick)

    edge.evidence.append(item)
    node.history.append(HistoryRecord(item.tick, item.target, item.description))
    return graph


def update_node_trust(graph: TrustGraph, actor: PlayerId, target: PlayerId, credibility: float) -> TrustGraph:
    graph.require(actor, target)
    if not (-1.0 <= credibility <= 1.0):
        raise CredibilityRangeError(f"credibility {credibility!r} outside [-1, 1]")

    target_node = graph.node(target)
    u = graph.node(actor).trust * credibility
    if abs(u) > abs(target_node.trust):
        target_node.trust = clamp(u)
    return graph


def merge_edge_evidence(graph: TrustGraph, actor: PlayerId, target: PlayerId) -> float:
    edge = graph.edge(actor, target)
    rho = graph.config.decay
    n = len(edge.evidence)
    total = sum(item.credibility * rho ** (n - 1 - k) for k, item in enumerate(edge.evidence))
    edge.trust = math.tanh(total)
    return edge.trust


def classify_stance(graph: TrustGraph, player: PlayerId) -> Stance:
    trust = graph.node(player).trust
    eps = graph.config.epsilon
    if trust > eps:
        return Stance.ALLY
    if trust < -eps:
        return Stance.ADVERSARY
    return Stance.INDIFFERENT


def apply_update(graph: TrustGraph, observation: Iterable[EvidenceItem]) -> TrustGraph:
    """
    Ingest one observation's evidence: append then re-evaluate the target, per item.

    The whole batch is validated before anything is written, so a bad item
    leaves the graph untouched.
    """
    items = list(observation)

    edge_ticks = {}
    history_ticks = {}
    for item in items:
        graph.require(item.actor, item.target)
        key = (item.actor, item.target)
        if key not in edge_ticks:
            edge_ticks[key] = graph.edge(*key).last_tick
        if item.actor not in history_ticks:
            history_ticks[item.actor] = graph.node(item.actor).last_tick
        _check_ticks(graph, item, edge_ticks[key], history_ticks[item.actor])
        edge_ticks[key] = item.tick
        history_ticks[item.actor] = item.tick

    for item in items:
        append_evidence(graph, item)
        update_node_trust(graph, item.actor, item.target, item.credibility)
    return graph


def seed_trust(graph: TrustGraph, player: PlayerId, value: float) -> TrustGraph:
    """Harness-side prior knowledge: self, known teammates, confirmed adversaries."""
    graph.node(player).trust = clamp(float(value))
    return graph
