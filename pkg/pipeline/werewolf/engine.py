"""
Werewolf Engine — match setup, phase stepping and win detection.

One call to step() advances exactly one phase:

    night           wolves nominate → guard → seer check → witch → deaths
    day-discussion  alive players speak in seat order
    day-vote        votes collected, announced, plurality eliminated

This module is the ONLY place where GameState changes. Every transition and
every action (valid, coerced or tie-broken) is recorded in the game log.
"""
import logging
import random
from collections import Counter
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from backend.errors import GameError
from pipeline.extraction import Observation
from pipeline.werewolf.agents import Agent, PlayerView
from pipeline.werewolf.models import (
    LEADER_TRIPLE,
    PHASE_TRANSITIONS,
    SEAT_COUNT,
    WEREWOLF_TRIPLE,
    ActionKind,
    AgentKind,
    GameState,
    Phase,
    Role,
    Seat,
    Side,
    player_id,
)
from pipeline.werewolf.scoring import record_action

logger = logging.getLogger(__name__)

SEATS_PER_KIND = 4

Lineup = Mapping[Union[AgentKind, str], int]


# ── Setup ─────────────────────────────────────────────────────────────────────

def _parse_lineup(lineup: Lineup) -> List[AgentKind]:
    if len(lineup) != 2:
        raise GameError(f"lineup must name exactly 2 agent kinds, got {len(lineup)}")
    kinds = []
    for key, count in lineup.items():
        try:
            kind = AgentKind(key)
        except ValueError:
            raise GameError(f"unknown agent kind in lineup: {key!r}")
        if count != SEATS_PER_KIND:
            raise GameError(f"each kind needs {SEATS_PER_KIND} seats, {kind.value} has {count}")
        kinds.append(kind)
    if kinds[0] is kinds[1]:
        raise GameError("lineup kinds must differ")
    return kinds


def new_match(seed: int, lineup: Lineup, max_rounds: int = 15) -> GameState:
    """
    Seat eight players and deal roles.

    A seeded coin hands one kind the werewolf triple and the other the leader
    triple; each kind's fourth seat is a villager. Same seed, same deal.
    """
    kinds = _parse_lineup(lineup)
    if max_rounds < 1:
        raise GameError(f"max_rounds must be >= 1, got {max_rounds}")

    rng = random.Random(seed)
    triples = [WEREWOLF_TRIPLE, LEADER_TRIPLE]
    rng.shuffle(triples)
    seat_numbers = list(range(1, SEAT_COUNT + 1))
    rng.shuffle(seat_numbers)

    seats: Dict[int, Seat] = {}
    for i, kind in enumerate(kinds):
        numbers = seat_numbers[i * SEATS_PER_KIND:(i + 1) * SEATS_PER_KIND]
        roles = list(triples[i])
        rng.shuffle(roles)
        roles.append(Role.VILLAGER)
        for number, role in zip(numbers, roles):
            seats[number] = Seat(player_id(number), role, kind)

    players = [seats[n] for n in range(1, SEAT_COUNT + 1)]
    state = GameState(
        players=players,
        rng_seed=seed,
        rng=rng,
        alive={s.player_id for s in players},
        max_rounds=max_rounds,
    )
    for seat in players:
        state.log.record(0, Phase.NIGHT.value, ActionKind.REVEAL.value, actor=seat.player_id,
                         visibility="private", detail=f"{seat.role.value}/{seat.kind.value}")
    logger.debug("[engine] seed %s: %s", seed, ", ".join(f"{s.player_id}={s.role.value}" for s in players))
    return state


# ── Helpers ───────────────────────────────────────────────────────────────────

def game_over(state: GameState) -> Optional[Side]:
    wolves = sum(1 for pid in state.alive if state.role_of(pid) is Role.WEREWOLF)
    others = len(state.alive) - wolves
    if wolves == 0:
        return Side.VILLAGE
    if wolves >= others:
        return Side.WEREWOLF
    return None


def tally_votes(
    votes: Mapping[str, str],
    rng: random.Random,
    order: Sequence[str],
) -> Tuple[Optional[str], List[str]]:
    """
    Plurality target and the tied leaders (seat order).

    An empty ballot gives (None, []). A tie is broken with rng.choice over the
    leaders, so the outcome only depends on the rng state.
    """
    counts = Counter(votes.values())
    if not counts:
        return None, []
    top = max(counts.values())
    leaders = [p for p in order if counts.get(p) == top]
    if len(leaders) == 1:
        return leaders[0], leaders
    return rng.choice(leaders), leaders


def _advance(state: GameState, phase: Phase) -> None:
    if phase not in PHASE_TRANSITIONS[state.phase]:
        raise GameError(f"illegal phase transition {state.phase.value} -> {phase.value}")
    state.phase = phase


def _end(state: GameState, winner: Side, capped: bool = False) -> None:
    phase = state.phase
    _advance(state, Phase.ENDED)
    state.winner = winner
    state.capped = capped
    detail = f"{winner.value} (capped)" if capped else winner.value
    state.log.record(state.round, phase.value, ActionKind.END.value, tick=state.tick, detail=detail)
    logger.debug("[engine] match over after round %d: %s", state.round, detail)


def view_for(state: GameState, pid: str, kill_target: Optional[str] = None) -> PlayerView:
    role = state.role_of(pid)
    ledger = state.pending
    teammates = tuple(w for w in state.wolves() if w != pid) if role is Role.WEREWOLF else ()
    return PlayerView(
        player_id=pid,
        role=role,
        round=state.round,
        phase=state.phase,
        alive=tuple(state.alive_ids()),
        teammates=teammates,
        kill_target=kill_target,
        heal_available=not ledger.heal_used,
        poison_available=not ledger.poison_used,
        last_guarded=ledger.last_guarded,
    )


def _coerce(state: GameState, actor: str, action: ActionKind, target, reason: str) -> None:
    logger.warning("[engine] %s %s %r coerced to no-op: %s", actor, action.value, target, reason)
    state.log.record(state.round, state.phase.value, ActionKind.COERCED.value, actor=actor,
                     target=target if isinstance(target, str) else None,
                     visibility="private", tick=state.tick, detail=f"{action.value}: {reason}")


def _valid_target(state: GameState, actor: str, target) -> Optional[str]:
    """Reason the target is unusable, or None when it is an alive other player."""
    if not isinstance(target, str) or target not in state.alive:
        return "target is not an alive player"
    if target == actor:
        return "target is the actor"
    return None


def _broadcast(state: GameState, agents: Mapping[str, Agent], speaker: str, text: str,
               action: ActionKind, target: Optional[str] = None) -> None:
    state.tick += 1
    state.log.record(state.round, state.phase.value, action.value, actor=speaker, target=target,
                     tick=state.tick, text=text)
    observation = Observation(speaker=speaker, text=text, tick=state.tick)
    for pid in state.player_ids:
        agents[pid].observe(observation)


# ── Night ─────────────────────────────────────────────────────────────────────

def _wolf_kill(state: GameState, agents: Mapping[str, Agent]) -> Optional[str]:
    nominations: Dict[str, str] = {}
    for wolf in state.alive_with_role(Role.WEREWOLF):
        target = agents[wolf].choose_kill(view_for(state, wolf))
        if target is None:
            continue
        reason = _valid_target(state, wolf, target)
        if reason is None and state.role_of(target) is Role.WEREWOLF:
            reason = "target is a werewolf"
        if reason:
            _coerce(state, wolf, ActionKind.KILL, target, reason)
            continue
        nominations[wolf] = target
        record_action(state, wolf, ActionKind.KILL, target)
        state.log.record(state.round, state.phase.value, ActionKind.KILL.value, actor=wolf, target=target,
                         visibility="private", tick=state.tick)

    target, leaders = tally_votes(nominations, state.rng, state.alive_ids())
    if len(leaders) > 1:
        state.log.record(state.round, state.phase.value, ActionKind.TIE_BREAK.value, target=target,
                         visibility="private", tick=state.tick, detail=",".join(leaders))
    return target


def _guard(state: GameState, agents: Mapping[str, Agent]) -> Optional[str]:
    ledger = state.pending
    chosen = None
    for guard in state.alive_with_role(Role.GUARD):
        target = agents[guard].choose_guard(view_for(state, guard))
        if target is None:
            break
        if target not in state.alive:
            _coerce(state, guard, ActionKind.GUARD, target, "target is not an alive player")
        elif target == ledger.last_guarded:
            _coerce(state, guard, ActionKind.GUARD, target, "same target as last night")
        else:
            chosen = target
            record_action(state, guard, ActionKind.GUARD, target)
            state.log.record(state.round, state.phase.value, ActionKind.GUARD.value, actor=guard,
                             target=target, visibility="private", tick=state.tick)
    ledger.last_guarded = chosen
    return chosen


def _seer_check(state: GameState, agents: Mapping[str, Agent]) -> None:
    for seer in state.alive_with_role(Role.SEER):
        target = agents[seer].choose_check(view_for(state, seer))
        if target is None:
            continue
        reason = _valid_target(state, seer, target)
        if reason:
            _coerce(state, seer, ActionKind.CHECK, target, reason)
            continue
        is_wolf = state.role_of(target) is Role.WEREWOLF
        state.pending.seer_checks[state.round] = (target, is_wolf)
        record_action(state, seer, ActionKind.CHECK, target)
        state.log.record(state.round, state.phase.value, ActionKind.CHECK.value, actor=seer, target=target,
                         visibility="private", tick=state.tick,
                         detail=Side.WEREWOLF.value if is_wolf else Side.VILLAGE.value)
        agents[seer].learn(target, is_wolf)


def _witch(state: GameState, agents: Mapping[str, Agent], kill_target: Optional[str]) -> Tuple[bool, Optional[str]]:
    ledger = state.pending
    healed, poisoned = False, None
    for witch in state.alive_with_role(Role.WITCH):
        agent = agents[witch]
        if agent.choose_heal(view_for(state, witch, kill_target)):
            if ledger.heal_used:
                _coerce(state, witch, ActionKind.HEAL, kill_target, "heal potion already used")
            elif kill_target is None:
                _coerce(state, witch, ActionKind.HEAL, None, "no pending kill")
            else:
                ledger.heal_used = True
                healed = True
                record_action(state, witch, ActionKind.HEAL, kill_target)
                state.log.record(state.round, state.phase.value, ActionKind.HEAL.value, actor=witch,
                                 target=kill_target, visibility="private", tick=state.tick)

        target = agent.choose_poison(view_for(state, witch, kill_target))
        if target is None:
            continue
        reason = "poison already used" if ledger.poison_used else _valid_target(state, witch, target)
        if reason:
            _coerce(state, witch, ActionKind.POISON, target, reason)
            continue
        ledger.poison_used = True
        poisoned = target
        record_action(state, witch, ActionKind.POISON, target)
        state.log.record(state.round, state.phase.value, ActionKind.POISON.value, actor=witch, target=target,
                         visibility="private", tick=state.tick)
    return healed, poisoned


def _night(state: GameState, agents: Mapping[str, Agent]) -> None:
    if state.round == 1:
        for pid in state.player_ids:
            agents[pid].start(view_for(state, pid))

    ledger = state.pending
    ledger.kill_target = _wolf_kill(state, agents)
    ledger.guard_target = _guard(state, agents)
    _seer_check(state, agents)
    healed, poisoned = _witch(state, agents, ledger.kill_target)

    deaths: List[str] = []
    kill = ledger.kill_target
    if kill is not None and kill != ledger.guard_target and not healed:
        deaths.append(kill)
    if poisoned is not None and poisoned not in deaths:
        deaths.append(poisoned)
    for pid in deaths:
        state.alive.discard(pid)
        state.log.record(state.round, state.phase.value, ActionKind.DEATH.value, target=pid, tick=state.tick)
    logger.debug("[engine] night %d: deaths %s", state.round, deaths or "none")

    winner = game_over(state)
    if winner is not None:
        _end(state, winner)
    else:
        _advance(state, Phase.DISCUSSION)


# ── Day ───────────────────────────────────────────────────────────────────────

def _discussion(state: GameState, agents: Mapping[str, Agent]) -> None:
    for pid in state.alive_ids():
        text = agents[pid].speak(view_for(state, pid))
        if text and text.strip():
            _broadcast(state, agents, pid, text.strip(), ActionKind.SPEAK)
    _advance(state, Phase.VOTE)


def _vote(state: GameState, agents: Mapping[str, Agent]) -> None:
    votes: Dict[str, str] = {}
    for pid in state.alive_ids():
        target = agents[pid].choose_vote(view_for(state, pid))
        if target is None:
            continue
        reason = _valid_target(state, pid, target)
        if reason:
            _coerce(state, pid, ActionKind.VOTE, target, reason)
            continue
        votes[pid] = target

    # ballots are secret until everyone has voted
    for voter in state.alive_ids():
        if voter in votes:
            record_action(state, voter, ActionKind.VOTE, votes[voter])
            _broadcast(state, agents, voter, f"I vote for {votes[voter]}.", ActionKind.VOTE, votes[voter])

    target, leaders = tally_votes(votes, state.rng, state.alive_ids())
    if len(leaders) > 1:
        state.log.record(state.round, state.phase.value, ActionKind.TIE_BREAK.value, target=target,
                         tick=state.tick, detail=",".join(leaders))
    if target is not None:
        state.alive.discard(target)
        state.log.record(state.round, state.phase.value, ActionKind.ELIMINATE.value, target=target,
                         tick=state.tick)
    logger.debug("[engine] day %d: %d votes, eliminated %s", state.round, len(votes), target)

    winner = game_over(state)
    if winner is not None:
        _end(state, winner)
    elif state.round >= state.max_rounds:
        _end(state, Side.WEREWOLF, capped=True)
    else:
        _advance(state, Phase.NIGHT)
        state.round += 1


_PHASE_HANDLERS = {
    Phase.NIGHT: _night,
    Phase.DISCUSSION: _discussion,
    Phase.VOTE: _vote,
}


def step(state: GameState, agents: Mapping[str, Agent]) -> GameState:
    """Advance one phase. Raises GameError once the match has ended."""
    if state.phase is Phase.ENDED:
        raise GameError("cannot step a finished match")
    missing = set(state.player_ids) - set(agents)
    if missing:
        raise GameError(f"no agent for seats {sorted(missing)}")
    _PHASE_HANDLERS[state.phase](state, agents)
    return state


def play_out(state: GameState, agents: Mapping[str, Agent]) -> GameState:
    while state.phase is not Phase.ENDED:
        step(state, agents)
    return state
