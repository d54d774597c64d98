"""
Retrieval — multi-hop evidence chains and entropy-weighted trust aggregation.

For a target player:
    1. pick the top-w trusted players (target excluded) as anchors
    2. grow one chain per anchor greedily towards the target
    3. value, propagated trust and uncertainty per chain
    4. aggregate into the target's new trust
    5. nudge each chain's last-hop edge towards the revised trust

A chain path is stored anchor first. Hop k uses the edge T(p[k+1], p[k]),
i.e. the later node's attitude towards the earlier one.
"""
import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from backend.errors import RetrievalError
from backend.trust_graph import (
    EvidenceItem,
    PlayerId,
    TrustGraph,
    clamp,
    merge_edge_evidence,
)

logger = logging.getLogger(__name__)


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass
class EvidenceChain:
    path: List[PlayerId]
    value: float = 0.0
    propagated_trust: float = 0.0
    uncertainty: float = 0.0
    edge_evidence: List[List[EvidenceItem]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.path:
            raise RetrievalError("chain path must hold at least one player")
        if len(set(self.path)) != len(self.path):
            raise RetrievalError(f"chain repeats a player: {self.path}")

    @property
    def weight(self) -> float:
        return self.value - self.uncertainty

    def hops(self) -> List[Tuple[PlayerId, PlayerId]]:
        """(later, earlier) pairs, i.e. the edge keys each hop reads."""
        return [(self.path[k + 1], self.path[k]) for k in range(len(self.path) - 1)]


@dataclass(frozen=True)
class BackwardDelta:
    edge: Tuple[PlayerId, PlayerId]
    old: float
    new: float


@dataclass
class RetrievalResult:
    target: PlayerId
    chains: List[EvidenceChain]
    updated_trust: float
    prior_trust: float
    backward_deltas: List[BackwardDelta] = field(default_factory=list)


# ── Chain construction ────────────────────────────────────────────────────────

def _rank_key(graph: TrustGraph, player: PlayerId) -> Tuple[float, PlayerId]:
    # max trust first, then lexicographic id
    return (-graph.node(player).trust, player)


def build_chains(graph: TrustGraph, target: PlayerId, w: int) -> List[EvidenceChain]:
    graph.require(target)
    if isinstance(w, bool) or not isinstance(w, int) or w < 1:
        raise RetrievalError(f"w must be a positive integer, got {w!r}")

    candidates = sorted((p for p in graph.players if p != target), key=lambda p: _rank_key(graph, p))
    anchors = candidates[:w]

    chains: List[EvidenceChain] = []
    for anchor in anchors:
        path = [anchor]
        visited = {anchor}
        queue = [_rank_key(graph, anchor)]
        reached = False

        while queue:
            _, current = heapq.heappop(queue)
            incoming = graph.neighbors(current)
            for neighbor in incoming:
                merge_edge_evidence(graph, neighbor, current)

            unvisited = [p for p in incoming if p not in visited]
            if not unvisited:
                break
            nxt = min(unvisited, key=lambda p: _rank_key(graph, p))
            path.append(nxt)
            visited.add(nxt)
            if nxt == target:
                reached = True
                break
            heapq.heappush(queue, _rank_key(graph, nxt))

        if not reached:
            logger.debug("[retrieval] chain from %s never reached %s, discarded", anchor, target)
            continue
        chain = EvidenceChain(path=path)
        chain.edge_evidence = [list(graph.edge(later, earlier).evidence) for later, earlier in chain.hops()]
        chains.append(chain)

    return chains


# ── Forward retrieval ─────────────────────────────────────────────────────────

def chain_value(graph: TrustGraph, chain: EvidenceChain) -> float:
    return sum(
        graph.node(later).trust * graph.edge(later, earlier).trust
        for later, earlier in chain.hops()
    )


def chain_trust(graph: TrustGraph, chain: EvidenceChain) -> float:
    u = graph.node(chain.path[0]).trust
    for later, earlier in chain.hops():
        u *= graph.edge(later, earlier).trust
    return clamp(u)


def chain_uncertainty(u: float) -> float:
    if not (-1.0 <= u <= 1.0):
        raise RetrievalError(f"propagated trust {u!r} outside [-1, 1]")
    magnitude = abs(u)
    if magnitude == 0.0 or magnitude == 1.0:
        return 0.0
    return -magnitude * math.log2(magnitude)


def aggregate_trust(chains: Sequence[EvidenceChain], fallback: float, delta: float = 0.01) -> float:
    if not chains:
        return fallback
    denominator = sum(c.weight for c in chains)
    if abs(denominator) < delta:
        return fallback
    numerator = sum(c.weight * c.propagated_trust for c in chains)
    return clamp(numerator / denominator)


# ── Backward update ───────────────────────────────────────────────────────────

def _floored(value: float, delta: float) -> float:
    if abs(value) >= delta:
        return value
    return delta if value >= 0 else -delta


def backward_update(
    graph: TrustGraph,
    chains: Sequence[EvidenceChain],
    gamma: float,
    delta: float,
    deltas: Optional[List[BackwardDelta]] = None,
) -> TrustGraph:
    """Adjust each chain's final hop edge T(p_o, p_o-1). Changes are appended to `deltas`."""
    for chain in chains:
        if len(chain.path) < 2:
            continue
        last, previous = chain.path[-1], chain.path[-2]
        edge = graph.edge(last, previous)
        ratio = graph.node(last).trust / _floored(graph.node(previous).trust, delta)
        old = edge.trust
        edge.trust = clamp(gamma * ratio + old)
        if deltas is not None:
            deltas.append(BackwardDelta((last, previous), old, edge.trust))
    return graph


def retrieve_and_update(graph: TrustGraph, target: PlayerId) -> RetrievalResult:
    graph.require(target)
    cfg = graph.config

    chains = build_chains(graph, target, cfg.top_w)
    for chain in chains:
        chain.value = chain_value(graph, chain)
        chain.propagated_trust = chain_trust(graph, chain)
        chain.uncertainty = chain_uncertainty(chain.propagated_trust)

    node = graph.node(target)
    prior = node.trust
    node.trust = aggregate_trust(chains, prior, cfg.denom_floor)

    deltas: List[BackwardDelta] = []
    backward_update(graph, chains, cfg.gamma, cfg.denom_floor, deltas)

    logger.debug(
        "[retrieval] %s: %d chains, trust %.5f -> %.5f", target, len(chains), prior, node.trust
    )
    return RetrievalResult(
        target=target,
        chains=chains,
        updated_trust=node.trust,
        prior_trust=prior,
        backward_deltas=deltas,
    )
