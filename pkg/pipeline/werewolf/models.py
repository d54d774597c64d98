"""
Werewolf Models — roles, phases, seats and the mutable match state.

Pure data, no side effects. The engine is the only writer of GameState.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from pipeline.werewolf.audit import GameLog


# ── Enums ──────────────────────────────────────────────────────────────────────

class Side(str, Enum):
    WEREWOLF = "werewolf"
    VILLAGE = "village"


class Role(str, Enum):
    WEREWOLF = "werewolf"
    WITCH = "witch"
    GUARD = "guard"
    SEER = "seer"
    VILLAGER = "villager"

    @property
    def side(self) -> Side:
        return Side.WEREWOLF if self is Role.WEREWOLF else Side.VILLAGE

    @property
    def is_leader(self) -> bool:
        return self in (Role.WITCH, Role.GUARD, Role.SEER)


class Phase(str, Enum):
    NIGHT = "night"
    DISCUSSION = "day-discussion"
    VOTE = "day-vote"
    ENDED = "ended"


class AgentKind(str, Enum):
    GRATR = "gratr"
    BASELINE = "baseline"
    RANDOM = "random"
    NOOP = "noop"


class ActionKind(str, Enum):
    REVEAL = "reveal"
    KILL = "kill"
    GUARD = "guard"
    CHECK = "check"
    HEAL = "heal"
    POISON = "poison"
    DEATH = "death"
    SPEAK = "speak"
    VOTE = "vote"
    TIE_BREAK = "tie_break"
    ELIMINATE = "eliminate"
    COERCED = "coerced"
    END = "end"


# Roles each lineup kind can be dealt, besides its one villager seat
WEREWOLF_TRIPLE: Tuple[Role, ...] = (Role.WEREWOLF, Role.WEREWOLF, Role.WEREWOLF)
LEADER_TRIPLE: Tuple[Role, ...] = (Role.WITCH, Role.GUARD, Role.SEER)

SEAT_COUNT = 8

# night → discussion → vote → night; any phase may end the match
PHASE_TRANSITIONS = {
    Phase.NIGHT: {Phase.DISCUSSION, Phase.ENDED},
    Phase.DISCUSSION: {Phase.VOTE, Phase.ENDED},
    Phase.VOTE: {Phase.NIGHT, Phase.ENDED},
    Phase.ENDED: set(),
}


def player_id(seat: int) -> str:
    return f"P{seat}"


# ── State ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Seat:
    player_id: str
    role: Role
    kind: AgentKind


@dataclass
class NightLedger:
    kill_target: Optional[str] = None
    guard_target: Optional[str] = None
    last_guarded: Optional[str] = None
    heal_used: bool = False
    poison_used: bool = False
    seer_checks: Dict[int, Tuple[str, bool]] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoredAction:
    actor: str
    action: ActionKind
    target: str
    correct: bool
    delta: float
    round: int


@dataclass
class GameState:
    players: List[Seat]
    rng_seed: int
    rng: random.Random = field(repr=False, compare=False)
    phase: Phase = Phase.NIGHT
    round: int = 1
    alive: Set[str] = field(default_factory=set)
    pending: NightLedger = field(default_factory=NightLedger)
    log: GameLog = field(default_factory=GameLog)
    scores: List[ScoredAction] = field(default_factory=list)
    tick: int = 0
    max_rounds: int = 15
    winner: Optional[Side] = None
    capped: bool = False

    def seat(self, pid: str) -> Seat:
        for s in self.players:
            if s.player_id == pid:
                return s
        raise KeyError(pid)

    def role_of(self, pid: str) -> Role:
        return self.seat(pid).role

    def side_of(self, pid: str) -> Side:
        return self.seat(pid).role.side

    @property
    def player_ids(self) -> List[str]:
        return [s.player_id for s in self.players]

    def alive_ids(self) -> List[str]:
        """Alive players in seat order."""
        return [s.player_id for s in self.players if s.player_id in self.alive]

    def alive_with_role(self, role: Role) -> List[str]:
        return [pid for pid in self.alive_ids() if self.role_of(pid) is role]

    def wolves(self) -> List[str]:
        return [s.player_id for s in self.players if s.role is Role.WEREWOLF]

    def seats_of_kind(self, kind: AgentKind) -> List[Seat]:
        return [s for s in self.players if s.kind is kind]

    def kinds(self) -> List[AgentKind]:
        out: List[AgentKind] = []
        for s in self.players:
            if s.kind not in out:
                out.append(s.kind)
        return out
