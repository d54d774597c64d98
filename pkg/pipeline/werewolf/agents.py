"""
Werewolf Agents — decision makers seated by the engine.

    NoopAgent         never acts, never speaks
    RandomVoteAgent   votes uniformly at random, otherwise idle
    TrustAgent        owns a trust graph fed by every public observation;
                      kind gratr runs retrieval before deciding, kind
                      baseline acts on directly updated node trust only

With a live backend a TrustAgent asks the model for each decision through
the reasoning prompt and falls back to its trust heuristic when the reply is
unusable.
"""
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from backend.config import GraphConfig
from backend.errors import ExtractionError, GratrError, TrustGraphError
from backend.retrieval import RetrievalResult, retrieve_and_update
from backend.trust_graph import (
    Stance,
    TrustGraph,
    apply_update,
    classify_stance,
    init_graph,
    seed_trust,
)
from pipeline.extraction import (
    Observation,
    ReasoningContext,
    build_reasoning_prompt,
    parse_reply,
    reasoning_context,
)
from pipeline.llm_client import CompletionParams
from pipeline.prompts import render_decision
from pipeline.werewolf.models import AgentKind, Phase, Role

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlayerView:
    """What one player is allowed to see when asked for a decision."""

    player_id: str
    role: Role
    round: int
    phase: Phase
    alive: Tuple[str, ...]
    teammates: Tuple[str, ...] = ()
    kill_target: Optional[str] = None
    heal_available: bool = False
    poison_available: bool = False
    last_guarded: Optional[str] = None

    @property
    def others(self) -> List[str]:
        return [p for p in self.alive if p != self.player_id]


class Agent:
    kind = AgentKind.NOOP

    def __init__(self, player_id: str, role: Role):
        self.player_id = player_id
        self.role = role

    def start(self, view: PlayerView) -> None:
        pass

    def observe(self, observation: Observation) -> None:
        pass

    def learn(self, player: str, is_wolf: bool) -> None:
        pass

    def choose_kill(self, view: PlayerView) -> Optional[str]:
        return None

    def choose_guard(self, view: PlayerView) -> Optional[str]:
        return None

    def choose_check(self, view: PlayerView) -> Optional[str]:
        return None

    def choose_heal(self, view: PlayerView) -> bool:
        return False

    def choose_poison(self, view: PlayerView) -> Optional[str]:
        return None

    def speak(self, view: PlayerView) -> str:
        return ""

    def choose_vote(self, view: PlayerView) -> Optional[str]:
        return None


class NoopAgent(Agent):
    kind = AgentKind.NOOP


class RandomVoteAgent(Agent):
    kind = AgentKind.RANDOM

    def __init__(self, player_id: str, role: Role, seed: int):
        super().__init__(player_id, role)
        self.rng = random.Random(f"{seed}:{player_id}")

    def choose_vote(self, view: PlayerView) -> Optional[str]:
        others = view.others
        return self.rng.choice(others) if others else None


# ── Live decisions ────────────────────────────────────────────────────────────

class LiveDecider:
    def __init__(self, backend, params: CompletionParams):
        self.backend = backend
        self.params = params

    def decide(self, agent: "TrustAgent", view: PlayerView, action: str,
               candidates: Sequence[str]) -> Tuple[Optional[str], Optional[str]]:
        contexts = [build_reasoning_prompt(agent.context_for(p)) for p in candidates]
        prompt = render_decision(agent.player_id, agent.role.value, view.round, action, candidates, contexts)
        raw = self.backend.complete(prompt, self.params)
        data = parse_reply(raw)

        target = data.get("target")
        if target is not None and target not in candidates:
            raise ExtractionError(f"target {target!r} not allowed for {action}", raw_response=raw)
        speech = data.get("speech")
        if not isinstance(speech, str) or not speech.strip():
            speech = None
        return target, speech


# ── Trust agents ──────────────────────────────────────────────────────────────

class TrustAgent(Agent):
    """
    Agent backed by a trust graph over all seats.

    Known roles (self, wolf teammates, seer checks) are seeded at ±1 and
    never re-derived. A village agent believes the first player who claims
    the seer role in public and takes that player's role reports as known.
    Retrieval, when enabled, runs once per phase for each alive player whose
    role the agent does not know.
    """

    def __init__(
        self,
        player_id: str,
        role: Role,
        players: Sequence[str],
        config: GraphConfig,
        extractor,
        use_retrieval: bool = True,
        decider: Optional[LiveDecider] = None,
    ):
        super().__init__(player_id, role)
        self.kind = AgentKind.GRATR if use_retrieval else AgentKind.BASELINE
        self.graph: TrustGraph = init_graph(players, config)
        self.extractor = extractor
        self.use_retrieval = use_retrieval
        self.decider = decider
        self.known: Dict[str, bool] = {}
        self.results: List[RetrievalResult] = []
        self._latest: Dict[str, RetrievalResult] = {}
        self._refreshed: Optional[Tuple[int, Phase]] = None
        self.believed_seer: Optional[str] = None

    @property
    def is_wolf(self) -> bool:
        return self.role is Role.WEREWOLF

    # ── Knowledge ─────────────────────────────────────────────────────────────

    def _know(self, player: str, is_wolf: bool) -> None:
        self.known[player] = is_wolf
        seed_trust(self.graph, player, 1.0 if is_wolf == self.is_wolf else -1.0)

    def start(self, view: PlayerView) -> None:
        self._know(self.player_id, self.is_wolf)
        if self.is_wolf:
            for player in self.graph.players:
                if player != self.player_id:
                    self._know(player, player in view.teammates)

    def learn(self, player: str, is_wolf: bool) -> None:
        self._know(player, is_wolf)

    def observe(self, observation: Observation) -> None:
        try:
            outcome = self.extractor.extract(observation)
        except GratrError as exc:
            logger.warning("[agents] %s skipped observation %d: %s", self.player_id, observation.tick, exc)
            return
        if outcome.claim == Role.SEER.value:
            self._hear_seer_claim(observation.speaker)
        try:
            apply_update(self.graph, outcome.items)
        except TrustGraphError as exc:
            logger.warning("[agents] %s rejected evidence at tick %d: %s", self.player_id, observation.tick, exc)
        if observation.speaker == self.believed_seer:
            self._adopt_reports(outcome.items)

    def _hear_seer_claim(self, speaker: str) -> None:
        if self.is_wolf or speaker == self.player_id:
            return
        if self.role is Role.SEER:
            # only a werewolf would claim a role it does not hold
            if speaker not in self.known:
                self._know(speaker, True)
            return
        if self.believed_seer is not None or self.known.get(speaker) is True:
            return
        self.believed_seer = speaker
        self._know(speaker, False)
        logger.debug("[agents] %s believes %s is the seer", self.player_id, speaker)

    def _adopt_reports(self, items) -> None:
        for item in items:
            if item.role_guess not in ("werewolf", "village"):
                continue
            if item.target == self.player_id or item.target in self.known:
                continue
            self._know(item.target, item.role_guess == "werewolf")

    # ── Reasoning ─────────────────────────────────────────────────────────────

    def trust(self, player: str) -> float:
        return self.graph.node(player).trust

    def _refresh(self, view: PlayerView) -> None:
        if not self.use_retrieval or self._refreshed == (view.round, view.phase):
            return
        self._refreshed = (view.round, view.phase)
        for player in view.others:
            if player in self.known:
                continue
            result = retrieve_and_update(self.graph, player)
            self.results.append(result)
            self._latest[player] = result

    def context_for(self, player: str) -> ReasoningContext:
        result = self._latest.get(player)
        if result is not None:
            return reasoning_context(self.graph, result)
        return ReasoningContext(player, self.trust(player), (), classify_stance(self.graph, player))

    def _opponents(self, view: PlayerView) -> List[str]:
        return [p for p in view.others if p not in view.teammates]

    def _lowest(self, candidates: Sequence[str]) -> Optional[str]:
        if not candidates:
            return None
        return min(candidates, key=lambda p: (self.trust(p), p))

    def _highest(self, candidates: Sequence[str]) -> Optional[str]:
        if not candidates:
            return None
        return min(candidates, key=lambda p: (-self.trust(p), p))

    def _adversary(self, player: Optional[str]) -> Optional[str]:
        if player is None:
            return None
        return player if classify_stance(self.graph, player) is Stance.ADVERSARY else None

    def _decide(self, view: PlayerView, action: str, candidates: Sequence[str],
                fallback: Optional[str]) -> Optional[str]:
        if self.decider is None or not candidates:
            return fallback
        try:
            target, _ = self.decider.decide(self, view, action, candidates)
            return target
        except GratrError as exc:
            logger.warning("[agents] %s live %s failed (%s), using trust heuristic", self.player_id, action, exc)
            return fallback

    # ── Decisions ─────────────────────────────────────────────────────────────

    def choose_kill(self, view: PlayerView) -> Optional[str]:
        self._refresh(view)
        candidates = self._opponents(view)
        return self._decide(view, "choose a player to kill tonight", candidates, self._lowest(candidates))

    def choose_guard(self, view: PlayerView) -> Optional[str]:
        self._refresh(view)
        candidates = [p for p in view.others if p != view.last_guarded]
        return self._decide(view, "choose a player to protect tonight", candidates, self._highest(candidates))

    def choose_check(self, view: PlayerView) -> Optional[str]:
        self._refresh(view)
        candidates = [p for p in view.others if p not in self.known]
        fallback = min(candidates, key=lambda p: (abs(self.trust(p)), p)) if candidates else None
        return self._decide(view, "choose a player whose role to check tonight", candidates, fallback)

    def choose_heal(self, view: PlayerView) -> bool:
        victim = view.kill_target
        if victim is None or not view.heal_available:
            return False
        self._refresh(view)
        fallback = victim == self.player_id or classify_stance(self.graph, victim) is Stance.ALLY
        chosen = self._decide(view, f"{victim} was attacked tonight; answer {victim} to heal or null to let it happen",
                              [victim], victim if fallback else None)
        return chosen == victim

    def choose_poison(self, view: PlayerView) -> Optional[str]:
        if not view.poison_available:
            return None
        self._refresh(view)
        candidates = self._opponents(view)
        return self._decide(view, "choose a player to poison, or null to keep the potion",
                            candidates, self._adversary(self._lowest(candidates)))

    def choose_vote(self, view: PlayerView) -> Optional[str]:
        self._refresh(view)
        candidates = self._opponents(view)
        return self._decide(view, "vote a player out, or null to abstain",
                            candidates, self._adversary(self._lowest(candidates)))

    def _heuristic_speech(self, view: PlayerView) -> str:
        if self.role is Role.SEER:
            reports = [
                f"{p} is a werewolf." if self.known[p] else f"{p} is good."
                for p in view.alive
                if p != self.player_id and p in self.known
            ]
            return " ".join(["I am the seer."] + reports) if reports else ""
        suspect = self._adversary(self._lowest(self._opponents(view)))
        return f"I suspect {suspect}." if suspect else ""

    def speak(self, view: PlayerView) -> str:
        self._refresh(view)
        fallback = self._heuristic_speech(view)
        if self.decider is None:
            return fallback
        try:
            _, speech = self.decider.decide(self, view, "say one sentence to the table", self._opponents(view))
        except GratrError as exc:
            logger.warning("[agents] %s live speech failed (%s), using trust heuristic", self.player_id, exc)
            return fallback
        return speech or fallback


# ── Factory ───────────────────────────────────────────────────────────────────

class SharedExtractor:
    """Extracts each observation once per match and hands the result to every agent."""

    def __init__(self, extractor):
        self.extractor = extractor
        self._cache: Dict[Tuple[str, int, str], object] = {}

    def extract(self, observation: Observation):
        key = (observation.speaker, observation.tick, observation.text)
        if key not in self._cache:
            self._cache[key] = self.extractor.extract(observation)
        return self._cache[key]


def build_agents(
    state,
    config: GraphConfig,
    extractor,
    decider: Optional[LiveDecider] = None,
) -> Dict[str, Agent]:
    """One agent per seat, chosen by the seat's kind. Live decisions apply to gratr seats only."""
    shared = SharedExtractor(extractor)
    players = state.player_ids
    agents: Dict[str, Agent] = {}
    for seat in state.players:
        if seat.kind is AgentKind.GRATR:
            agents[seat.player_id] = TrustAgent(seat.player_id, seat.role, players, config, shared,
                                                use_retrieval=True, decider=decider)
        elif seat.kind is AgentKind.BASELINE:
            agents[seat.player_id] = TrustAgent(seat.player_id, seat.role, players, config, shared,
                                                use_retrieval=False)
        elif seat.kind is AgentKind.RANDOM:
            agents[seat.player_id] = RandomVoteAgent(seat.player_id, seat.role, state.rng_seed)
        else:
            agents[seat.player_id] = NoopAgent(seat.player_id, seat.role)
    return agents
