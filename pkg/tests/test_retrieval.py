import math

import pytest

from backend.config import GraphConfig
from backend.errors import RetrievalError, UnknownPlayerError
from backend.retrieval import (
    EvidenceChain,
    aggregate_trust,
    backward_update,
    build_chains,
    chain_trust,
    chain_uncertainty,
    chain_value,
    retrieve_and_update,
)
from backend.trust_graph import EvidenceItem, append_evidence, init_graph, merge_edge_evidence, seed_trust


def _merged_chain(graph, path):
    chain = EvidenceChain(path=list(path))
    for later, earlier in chain.hops():
        merge_edge_evidence(graph, later, earlier)
    return chain


def _weighted(weight, u):
    # value carries the whole weight, uncertainty 0
    return EvidenceChain(path=["x"], value=weight, propagated_trust=u, uncertainty=0.0)


# ── build_chains ──────────────────────────────────────────────────────────────

def test_two_node_graph_single_chain():
    graph = init_graph(["A", "B"])
    chains = build_chains(graph, "B", 1)
    assert [c.path for c in chains] == [["A", "B"]]


def test_four_node_greedy_expansion():
    graph = init_graph(["A", "B", "C", "D"])
    seed_trust(graph, "A", 0.9)
    seed_trust(graph, "B", 0.6)
    seed_trust(graph, "C", 0.2)
    chains = build_chains(graph, "D", 2)
    assert [c.path for c in chains] == [["A", "B", "C", "D"], ["B", "A", "C", "D"]]


def test_zero_trust_anchors_fall_back_to_lexicographic_order():
    graph = init_graph(["C", "B", "A", "T"])
    chains = build_chains(graph, "T", 2)
    assert [c.path[0] for c in chains] == ["A", "B"]


def test_chains_never_repeat_a_player(chain_graph):
    for chain in build_chains(chain_graph, "p3", 3):
        assert len(set(chain.path)) == len(chain.path)
        assert chain.path[-1] == "p3"


def test_build_chains_rejects_bad_input(chain_graph):
    with pytest.raises(UnknownPlayerError):
        build_chains(chain_graph, "nobody", 1)
    with pytest.raises(RetrievalError):
        build_chains(chain_graph, "p3", 0)


def test_chain_rejects_cycles():
    with pytest.raises(RetrievalError):
        EvidenceChain(path=["A", "B", "A"])


# ── chain valuation ───────────────────────────────────────────────────────────

def test_chain_value_and_trust(chain_graph):
    chain = _merged_chain(chain_graph, ["p1", "p2", "p3"])
    assert round(chain_value(chain_graph, chain), 5) == 0.38
    assert round(chain_trust(chain_graph, chain), 5) == 0.16


def test_single_node_chain(chain_graph):
    chain = EvidenceChain(path=["p1"])
    assert chain_value(chain_graph, chain) == 0.0
    assert chain_trust(chain_graph, chain) == pytest.approx(0.8)


def test_zero_edge_zeroes_trust():
    graph = init_graph(["A", "B", "C"])
    seed_trust(graph, "A", 0.9)
    append_evidence(graph, EvidenceItem("B", "A", "", 0.5, None, 1))
    chain = _merged_chain(graph, ["A", "B", "C"])
    assert chain_trust(graph, chain) == 0.0


def test_all_zero_nodes_give_zero_value():
    graph = init_graph(["A", "B", "C"])
    append_evidence(graph, EvidenceItem("B", "A", "", 0.5, None, 1))
    assert chain_value(graph, _merged_chain(graph, ["A", "B", "C"])) == 0.0


@pytest.mark.parametrize("u,expected", [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)])
def test_uncertainty_limits(u, expected):
    assert chain_uncertainty(u) == expected


def test_uncertainty_worked_value():
    assert round(chain_uncertainty(0.16), 5) == 0.42302


def test_uncertainty_symmetry():
    for u in (0.05, 0.2, 1 / math.e, 0.75, 0.99):
        assert chain_uncertainty(u) == chain_uncertainty(-u)


def test_uncertainty_peaks_at_inverse_e():
    peak = chain_uncertainty(1 / math.e)
    assert peak > chain_uncertainty(0.3)
    assert peak > chain_uncertainty(0.45)


def test_uncertainty_out_of_range():
    with pytest.raises(RetrievalError):
        chain_uncertainty(1.01)


# ── aggregate_trust ───────────────────────────────────────────────────────────

def test_single_chain_collapses_to_u():
    chain = EvidenceChain(path=["a", "b"], value=0.38, propagated_trust=0.16, uncertainty=0.42302)
    assert aggregate_trust([chain], fallback=0.2) == pytest.approx(0.16)


def test_symmetric_chains_cancel():
    assert aggregate_trust([_weighted(0.2, 0.5), _weighted(0.2, -0.5)], fallback=0.9) == pytest.approx(0.0)


def test_degenerate_denominator_falls_back():
    assert aggregate_trust([_weighted(0.1, 0.5), _weighted(-0.1, 0.3)], fallback=0.42) == 0.42


def test_no_chains_falls_back():
    assert aggregate_trust([], fallback=-0.3) == -0.3


# ── backward_update ───────────────────────────────────────────────────────────

def test_backward_update_worked_value(chain_graph):
    chain = _merged_chain(chain_graph, ["p1", "p2", "p3"])
    seed_trust(chain_graph, "p3", 0.16)
    backward_update(chain_graph, [chain], gamma=0.1, delta=0.01)
    assert round(chain_graph.edge("p3", "p2").trust, 5) == 0.42667


def test_backward_update_zero_numerator_leaves_edge():
    graph = init_graph(["A", "B"])
    seed_trust(graph, "A", 0.6)
    append_evidence(graph, EvidenceItem("B", "A", "", 0.3, None, 1))
    chain = _merged_chain(graph, ["A", "B"])
    before = graph.edge("B", "A").trust
    backward_update(graph, [chain], gamma=0.1, delta=0.01)
    assert graph.edge("B", "A").trust == before


def test_backward_update_floors_and_clamps():
    graph = init_graph(["A", "B"])
    seed_trust(graph, "B", 0.5)
    chain = EvidenceChain(path=["A", "B"])
    backward_update(graph, [chain], gamma=0.1, delta=0.01)
    assert graph.edge("B", "A").trust == 1.0


# ── retrieve_and_update ───────────────────────────────────────────────────────

def test_empty_graph_keeps_fallback():
    graph = init_graph(["A", "B", "C"])
    result = retrieve_and_update(graph, "C")
    assert result.chains
    assert all(c.propagated_trust == 0.0 for c in result.chains)
    assert graph.node("C").trust == 0.0


def test_retrieve_fixture(chain_graph):
    result = retrieve_and_update(chain_graph, "p3")

    main = result.chains[0]
    assert main.path == ["p1", "p2", "p3"]
    assert round(main.value, 5) == 0.38
    assert round(main.propagated_trust, 5) == 0.16
    assert round(main.uncertainty, 5) == 0.42302

    # anchor p2 grows through p1 over zero edges: weight 0, no pull on the aggregate
    assert [c.path for c in result.chains[1:]] == [["p2", "p1", "p3"]]
    assert result.chains[1].weight == 0.0

    assert result.prior_trust == pytest.approx(0.2)
    assert round(result.updated_trust, 5) == 0.16
    assert round(chain_graph.node("p3").trust, 5) == 0.16
    assert round(chain_graph.edge("p3", "p2").trust, 5) == 0.42667
    assert round(chain_graph.edge("p3", "p1").trust, 5) == 0.02
    assert [d.edge for d in result.backward_deltas] == [("p3", "p2"), ("p3", "p1")]


def test_rerun_only_drifts_through_backward_update(chain_graph):
    retrieve_and_update(chain_graph, "p3")
    first = chain_graph.edge("p2", "p1").trust
    retrieve_and_update(chain_graph, "p3")
    assert chain_graph.edge("p2", "p1").trust == first
    assert chain_graph.edge("p2", "p1").trust == pytest.approx(0.5)


def test_retrieval_respects_top_w():
    graph = init_graph(["A", "B", "C", "D", "E"], GraphConfig(top_w=2))
    result = retrieve_and_update(graph, "E")
    assert len(result.chains) <= 2
