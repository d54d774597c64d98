"""
Intent Classifier — per-author trust toward two party anchors, in timeline order.

Every author gets one two-node graph per party view, {author, anchor}, with
the anchor seeded at +1. A message's evidence toward an anchor is applied to
that view, then the author's trust is retrieved. The prediction is the
graph label (strongest view, ε neutral band) unless that is neutral, in
which case the message's own strongest item decides.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from backend.config import GraphConfig
from backend.errors import GratrError
from backend.retrieval import retrieve_and_update
from backend.trust_graph import EvidenceItem, TrustGraph, apply_update, init_graph, seed_trust
from pipeline.extraction import Observation
from pipeline.intent.dataset import IntentLabel, LabeledMessage

logger = logging.getLogger(__name__)

DEMOCRAT_ANCHOR = "democrat-entity"
REPUBLICAN_ANCHOR = "republican-entity"
ANCHORS = (DEMOCRAT_ANCHOR, REPUBLICAN_ANCHOR)

_PRO = {DEMOCRAT_ANCHOR: IntentLabel.PRO_DEMOCRAT, REPUBLICAN_ANCHOR: IntentLabel.PRO_REPUBLICAN}
_ANTI = {DEMOCRAT_ANCHOR: IntentLabel.ANTI_DEMOCRAT, REPUBLICAN_ANCHOR: IntentLabel.ANTI_REPUBLICAN}

ExtractorFactory = Callable[[Sequence[str]], object]


@dataclass(frozen=True)
class Prediction:
    id: str
    predicted: IntentLabel
    graph_label: IntentLabel
    message_label: IntentLabel


def label_for(anchor: str, trust: float, epsilon: float) -> IntentLabel:
    if abs(trust) <= epsilon:
        return IntentLabel.NEUTRAL
    return _PRO[anchor] if trust > 0 else _ANTI[anchor]


def message_label(items: Sequence[EvidenceItem]) -> IntentLabel:
    """Label carried by the message alone: its strongest anchor-directed item, sign only."""
    anchored = [i for i in items if i.target in ANCHORS]
    if not anchored:
        return IntentLabel.NEUTRAL
    strongest = max(anchored, key=lambda i: abs(i.credibility))
    if strongest.credibility == 0:
        return IntentLabel.NEUTRAL
    return _PRO[strongest.target] if strongest.credibility > 0 else _ANTI[strongest.target]


class IntentClassifier:
    """Holds the per-(author, anchor) views for one stream."""

    def __init__(self, make_extractor: ExtractorFactory, config: Optional[GraphConfig] = None):
        self.make_extractor = make_extractor
        self.config = config or GraphConfig()
        self.views: Dict[Tuple[str, str], TrustGraph] = {}
        self._extractors: Dict[str, object] = {}

    def view(self, author: str, anchor: str) -> TrustGraph:
        key = (author, anchor)
        if key not in self.views:
            graph = init_graph([author, anchor], self.config)
            seed_trust(graph, anchor, 1.0)
            self.views[key] = graph
        return self.views[key]

    def author_trust(self, author: str, anchor: str) -> float:
        graph = self.views.get((author, anchor))
        return graph.node(author).trust if graph is not None else 0.0

    def graph_label(self, author: str) -> IntentLabel:
        dem = self.author_trust(author, DEMOCRAT_ANCHOR)
        rep = self.author_trust(author, REPUBLICAN_ANCHOR)
        anchor, trust = (DEMOCRAT_ANCHOR, dem) if abs(dem) >= abs(rep) else (REPUBLICAN_ANCHOR, rep)
        return label_for(anchor, trust, self.config.epsilon)

    def _extractor(self, author: str):
        if author not in self._extractors:
            self._extractors[author] = self.make_extractor([author, *ANCHORS])
        return self._extractors[author]

    def classify(self, message: LabeledMessage, tick: int) -> Prediction:
        if message.author in ANCHORS:
            logger.warning("[classifier] message %s: author collides with an anchor id, predicted neutral", message.id)
            return Prediction(message.id, IntentLabel.NEUTRAL, IntentLabel.NEUTRAL, IntentLabel.NEUTRAL)
        try:
            observation = Observation(speaker=message.author, text=message.text, tick=tick)
            items = self._extractor(message.author).extract(observation).items
            for anchor in ANCHORS:
                toward = [i for i in items if i.target == anchor]
                if not toward:
                    continue
                graph = self.view(message.author, anchor)
                apply_update(graph, toward)
                retrieve_and_update(graph, message.author)
        except GratrError as exc:
            logger.warning("[classifier] message %s: %s, predicted neutral", message.id, exc)
            return Prediction(message.id, IntentLabel.NEUTRAL, IntentLabel.NEUTRAL, IntentLabel.NEUTRAL)

        from_graph = self.graph_label(message.author)
        own = message_label(items)
        predicted = own if from_graph is IntentLabel.NEUTRAL else from_graph
        return Prediction(message.id, predicted, from_graph, own)


def classify_stream(
    messages: Sequence[LabeledMessage],
    make_extractor: ExtractorFactory,
    config: Optional[GraphConfig] = None,
) -> List[Prediction]:
    """Classify a timeline-ordered stream. Order matters: earlier messages shape later predictions."""
    classifier = IntentClassifier(make_extractor, config)
    return [classifier.classify(message, tick) for tick, message in enumerate(messages)]
