"""
Scoring — per-action scores by role plus the base win bonus.

    werewolf            ±0.5
    witch/guard/seer    ±1.5
    villager            ±1.0
    winning side        +5 per player

An action is correct when it is directed against the opposing side
(vote, kill, poison, check an opponent) or protects an ally (guard, heal).
"""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List

from backend.errors import GameError
from pipeline.werewolf.models import ActionKind, GameState, Phase, Role, ScoredAction, Side

ROLE_SCORES = {
    Role.WEREWOLF: 0.5,
    Role.WITCH: 1.5,
    Role.GUARD: 1.5,
    Role.SEER: 1.5,
    Role.VILLAGER: 1.0,
}

WIN_BONUS = 5.0

SCORED_ACTIONS = {ActionKind.KILL, ActionKind.GUARD, ActionKind.CHECK,
                  ActionKind.HEAL, ActionKind.POISON, ActionKind.VOTE}
_PROTECTIVE = {ActionKind.GUARD, ActionKind.HEAL}


def score_action(role: Role, correct: bool) -> float:
    value = ROLE_SCORES[role]
    return value if correct else -value


def is_correct(state: GameState, actor: str, action: ActionKind, target: str) -> bool:
    same_side = state.side_of(actor) == state.side_of(target)
    return same_side if action in _PROTECTIVE else not same_side


def record_action(state: GameState, actor: str, action: ActionKind, target: str) -> ScoredAction:
    if action not in SCORED_ACTIONS:
        raise GameError(f"{action.value} is not a scored action")
    correct = is_correct(state, actor, action, target)
    entry = ScoredAction(
        actor=actor,
        action=action,
        target=target,
        correct=correct,
        delta=score_action(state.role_of(actor), correct),
        round=state.round,
    )
    state.scores.append(entry)
    return entry


@dataclass
class ActionScore:
    winner: Side
    capped: bool
    per_player: Dict[str, float]
    entries: List[ScoredAction]
    per_kind: Dict[str, float] = field(default_factory=dict)
    per_kind_role: Dict[str, Dict[str, float]] = field(default_factory=dict)


def finalize_scores(state: GameState) -> ActionScore:
    if state.phase is not Phase.ENDED or state.winner is None:
        raise GameError("scores can only be finalized once the match is over")

    totals = {pid: 0.0 for pid in state.player_ids}
    for entry in state.scores:
        totals[entry.actor] += entry.delta
    for seat in state.players:
        if seat.role.side is state.winner:
            totals[seat.player_id] += WIN_BONUS

    by_kind: Dict[str, List[float]] = defaultdict(list)
    by_kind_role: Dict[str, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for seat in state.players:
        by_kind[seat.kind.value].append(totals[seat.player_id])
        by_kind_role[seat.kind.value][seat.role.value].append(totals[seat.player_id])

    return ActionScore(
        winner=state.winner,
        capped=state.capped,
        per_player=totals,
        entries=list(state.scores),
        per_kind={k: sum(v) / len(v) for k, v in by_kind.items()},
        per_kind_role={
            k: {r: sum(v) / len(v) for r, v in sorted(roles.items())}
            for k, roles in by_kind_role.items()
        },
    )
