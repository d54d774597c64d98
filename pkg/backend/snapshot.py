"""
Snapshot — lossless JSON form of a TrustGraph, DOT export, retrieval traces.

Functions here only convert between objects and plain data / text; writing
files is the caller's job (pipeline.storage does it atomically).
"""
from collections import deque
from typing import Any, Dict, List, Mapping

import pydot

from backend.config import GraphConfig
from backend.errors import TrustGraphError
from backend.retrieval import RetrievalResult
from backend.trust_graph import (
    EDGE_SEPARATOR,
    EvidenceItem,
    HistoryRecord,
    Stance,
    TrustGraph,
    classify_stance,
    init_graph,
)

STANCE_COLORS = {
    Stance.ALLY: "forestgreen",
    Stance.ADVERSARY: "firebrick",
    Stance.INDIFFERENT: "gray50",
}


def edge_key(actor: str, target: str) -> str:
    return f"{actor}{EDGE_SEPARATOR}{target}"


def split_edge_key(key: str) -> tuple:
    actor, sep, target = key.partition(EDGE_SEPARATOR)
    if not sep or not actor or not target:
        raise TrustGraphError(f"malformed edge key: {key!r}")
    return actor, target


# ── JSON snapshot ─────────────────────────────────────────────────────────────

def to_snapshot(graph: TrustGraph) -> Dict[str, Any]:
    nodes = {}
    for player in graph.players:
        state = graph.node(player)
        nodes[player] = {
            "trust": state.trust,
            "history": [rec.to_record() for rec in state.history],
        }
    edges = {}
    for actor, target in graph.edge_keys():
        state = graph.edge(actor, target)
        edges[edge_key(actor, target)] = {
            "trust": state.trust,
            "evidence": [item.to_record() for item in state.evidence],
        }
    return {
        "players": graph.players,
        "nodes": nodes,
        "edges": edges,
        "config": graph.config.to_dict(),
    }


def _bounded(value: Any, what: str) -> float:
    number = float(value)
    if not -1.0 <= number <= 1.0:
        raise TrustGraphError(f"malformed snapshot: {what} {number!r} outside [-1, 1]")
    return number


def from_snapshot(data: Mapping[str, Any]) -> TrustGraph:
    try:
        config = GraphConfig.from_dict(data["config"])
        graph = init_graph(data["players"], config)

        for player, node_data in data["nodes"].items():
            state = graph.node(player)
            state.trust = _bounded(node_data["trust"], f"trust of {player}")
            state.history = deque(
                (HistoryRecord(int(r["tick"]), r["target"], r["desc"]) for r in node_data["history"]),
                maxlen=config.history_cap,
            )

        for key, edge_data in data["edges"].items():
            actor, target = split_edge_key(key)
            state = graph.edge(actor, target)
            state.trust = _bounded(edge_data["trust"], f"trust of edge {key}")
            state.evidence = [
                EvidenceItem(
                    actor=actor,
                    target=target,
                    description=rec["desc"],
                    credibility=_bounded(rec["cred"], f"credibility on edge {key}"),
                    role_guess=rec.get("role_guess"),
                    tick=int(rec["tick"]),
                )
                for rec in edge_data["evidence"]
            ]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise TrustGraphError(f"malformed snapshot: {exc!r}")
    return graph


# ── DOT ───────────────────────────────────────────────────────────────────────

def to_dot(graph: TrustGraph) -> str:
    dot = pydot.Dot("trust_graph", graph_type="digraph")
    for player in graph.players:
        trust = graph.node(player).trust
        color = STANCE_COLORS[classify_stance(graph, player)]
        dot.add_node(pydot.Node(
            f'"{player}"',
            label=f'"{player}\\n{trust:.2f}"',
            color=color,
            style="filled",
            fillcolor=color,
            fontcolor="white",
        ))
    for actor, target in graph.edge_keys():
        trust = graph.edge(actor, target).trust
        dot.add_edge(pydot.Edge(f'"{actor}"', f'"{target}"', label=f'"{trust:.2f}"'))
    return dot.to_string()


# ── Traces ────────────────────────────────────────────────────────────────────

def trace_record(result: RetrievalResult) -> Dict[str, Any]:
    return {
        "target": result.target,
        "prior": result.prior_trust,
        "chains": [
            {
                "path": list(chain.path),
                "V": chain.value,
                "u": chain.propagated_trust,
                "H": chain.uncertainty,
                "evidence": [[item.to_record() for item in hop] for hop in chain.edge_evidence],
            }
            for chain in result.chains
        ],
        "aggregate": result.updated_trust,
        "backward_deltas": [
            {"edge": edge_key(*d.edge), "old": d.old, "new": d.new}
            for d in result.backward_deltas
        ],
    }


def trace_records(results: List[RetrievalResult]) -> List[Dict[str, Any]]:
    return [trace_record(r) for r in results]
