import random

from backend.config import GraphConfig
from backend.retrieval import retrieve_and_update
from backend.trust_graph import (
    EvidenceItem,
    append_evidence,
    apply_update,
    init_graph,
    merge_edge_evidence,
    seed_trust,
    update_node_trust,
)

SEQUENCES = 10_000


def _in_range(graph):
    nodes = all(-1.0 <= graph.node(p).trust <= 1.0 for p in graph.players)
    edges = all(-1.0 <= graph.edge(a, b).trust <= 1.0 for a, b in graph.edge_keys())
    return nodes and edges


def _pair(rng, players):
    actor, target = rng.sample(players, 2)
    return actor, target


def test_random_operation_sequences_stay_in_range():
    rng = random.Random(99)
    for _ in range(SEQUENCES):
        players = [f"p{i}" for i in range(rng.randint(2, 5))]
        graph = init_graph(players, GraphConfig(
            decay=rng.uniform(0.1, 1.0),
            gamma=rng.uniform(0.01, 2.0),
            top_w=rng.randint(1, 4),
        ))
        for player in players:
            if rng.random() < 0.5:
                seed_trust(graph, player, rng.choice([-1.0, 1.0, rng.uniform(-1.0, 1.0)]))

        tick = 0
        for _ in range(rng.randint(1, 8)):
            op = rng.randrange(4)
            cred = rng.uniform(-1.0, 1.0)
            if op == 0:
                tick += 1
                actor, target = _pair(rng, players)
                append_evidence(graph, EvidenceItem(actor, target, "", cred, None, tick))
            elif op == 1:
                actor, target = _pair(rng, players)
                update_node_trust(graph, actor, target, cred)
            elif op == 2:
                tick += 1
                items = [EvidenceItem(*_pair(rng, players), "", rng.uniform(-1.0, 1.0), None, tick)
                         for _ in range(rng.randint(0, 3))]
                apply_update(graph, items)
                actor, target = _pair(rng, players)
                merge_edge_evidence(graph, actor, target)
            else:
                retrieve_and_update(graph, rng.choice(players))
            assert _in_range(graph)
