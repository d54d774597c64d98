import math
import os

import pytest

from backend.config import GraphConfig
from backend.trust_graph import EvidenceItem, append_evidence, init_graph, seed_trust
from pipeline.extraction import load_fixture

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(REPO_ROOT, "data")


@pytest.fixture
def config():
    return GraphConfig()


@pytest.fixture
def chain_graph(config):
    """
    p1 (0.8), p2 (0.6), p3 (0.2); p2 backs p1 with edge 0.5, p3 backs p2 with edge 0.4.
    Credibilities are atanh of the edge weights so one merge reproduces them.
    """
    graph = init_graph(["p1", "p2", "p3"], config)
    seed_trust(graph, "p1", 0.8)
    seed_trust(graph, "p2", 0.6)
    seed_trust(graph, "p3", 0.2)
    append_evidence(graph, EvidenceItem("p2", "p1", "p2 backs p1", math.atanh(0.5), None, 1))
    append_evidence(graph, EvidenceItem("p3", "p2", "p3 backs p2", math.atanh(0.4), None, 2))
    return graph


@pytest.fixture
def werewolf_rules():
    return load_fixture(os.path.join(DATA_DIR, "werewolf_extraction.jsonl"))


@pytest.fixture
def intent_rules():
    return load_fixture(os.path.join(DATA_DIR, "intent_extraction.jsonl"))


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for key in ("GRATR_API_URL", "GRATR_API_KEY", "GRATR_MODEL"):
        monkeypatch.delenv(key, raising=False)
