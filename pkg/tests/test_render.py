from backend.retrieval import retrieve_and_update
from backend.snapshot import trace_record
from pipeline.render import render_game, render_trace

FIXTURE_TREE = (
    "target p3: 0.20000 -> 0.16000\n"
    "  ├─ p1 -> p2 -> p3  V=0.38000 u=0.16000 H=0.42302\n"
    '  │ p2 -> p1: 1 evidence, latest "p2 backs p1" (cred +0.55)\n'
    '  │ p3 -> p2: 1 evidence, latest "p3 backs p2" (cred +0.42)\n'
    "  └─ p2 -> p1 -> p3  V=0.00000 u=0.00000 H=0.00000\n"
    "    p1 -> p2: no evidence\n"
    "    p3 -> p1: no evidence\n"
    "  backward p3->p2 0.40000 -> 0.42667\n"
    "  backward p3->p1 0.00000 -> 0.02000\n"
)


def test_trace_tree_golden(chain_graph):
    record = trace_record(retrieve_and_update(chain_graph, "p3"))
    assert render_trace([record]) == FIXTURE_TREE


def test_trace_tree_grouped_by_owner(chain_graph):
    record = trace_record(retrieve_and_update(chain_graph, "p3"))
    text = render_trace({"P1": [record], "P2": []})
    lines = text.splitlines()
    assert lines[0] == "[P1]"
    assert lines[1] == "  target p3: 0.20000 -> 0.16000"
    assert "[P2]" not in text


def test_trace_without_chains():
    record = {"target": "P4", "prior": 0.0, "aggregate": 0.0, "chains": [], "backward_deltas": []}
    assert render_trace([record]) == "target P4: 0.00000 -> 0.00000\n  └─ no supporting chains\n"


def test_empty_trace():
    assert render_trace([]) == "no retrievals recorded\n"
    assert render_trace({"P1": []}) == "no retrievals recorded\n"


def test_game_replay_blocks():
    events = [
        {"round": 1, "phase": "night", "actor": "P1", "action": "kill", "target": "P7",
         "visibility": "private", "tick": 0},
        {"round": 1, "phase": "night", "actor": None, "action": "death", "target": "P7",
         "visibility": "public", "tick": 0},
        {"round": 1, "phase": "day-discussion", "actor": "P6", "action": "speak", "target": None,
         "visibility": "public", "tick": 1, "text": "I am the seer."},
        {"round": 1, "phase": "day-vote", "actor": None, "action": "tie_break", "target": "P1",
         "visibility": "public", "tick": 9, "detail": "P1,P4"},
    ]
    assert render_game(events) == (
        "== round 1 / night ==\n"
        "  P1 kill P7 (private)\n"
        "  moderator death P7\n"
        "== round 1 / day-discussion ==\n"
        '  P6 speak: "I am the seer."\n'
        "== round 1 / day-vote ==\n"
        "  moderator tie_break P1 [P1,P4]\n"
    )
