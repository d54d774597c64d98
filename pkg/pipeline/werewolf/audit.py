"""
Game Log — immutable append-only event log for one match.

Every night action, utterance, vote, tie-break, coerced action and death is
recorded here in order. The log is kept in memory and exported as JSONL,
one event per line.

This module does NOT make decisions. It only records facts.
"""
import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple


@dataclass(frozen=True)
class GameEvent:
    round: int
    phase: str
    actor: Optional[str]
    action: str
    target: Optional[str]
    visibility: str
    tick: int
    text: Optional[str] = None
    detail: Optional[str] = None

    def to_record(self) -> Dict[str, Any]:
        record = {
            "round": self.round,
            "phase": self.phase,
            "actor": self.actor,
            "action": self.action,
            "target": self.target,
            "visibility": self.visibility,
            "tick": self.tick,
        }
        if self.text is not None:
            record["text"] = self.text
        if self.detail is not None:
            record["detail"] = self.detail
        return record


class GameLog:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._events: List[GameEvent] = []

    def record(
        self,
        round_no: int,
        phase: str,
        action: str,
        actor: Optional[str] = None,
        target: Optional[str] = None,
        visibility: str = "public",
        tick: int = 0,
        text: Optional[str] = None,
        detail: Optional[str] = None,
    ) -> GameEvent:
        """
        Append an immutable event.

        Args:
            round_no: Match round the event belongs to.
            phase: night | day-discussion | day-vote | ended.
            action: What happened (kill, vote, speak, death, ...).
            actor: Player who acted, None for moderator events.
            target: Player acted upon, if any.
            visibility: public, or private to the actor.
            tick: Observation clock at the time of the event.
            text: Utterance text for speak events.
            detail: Free-text note (tie candidates, coercion reason, winner).
        """
        event = GameEvent(round_no, phase, actor, action, target, visibility, tick, text, detail)
        with self._lock:
            self._events.append(event)
        return event

    @property
    def events(self) -> Tuple[GameEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def to_records(self) -> List[Dict[str, Any]]:
        return [e.to_record() for e in self.events]
