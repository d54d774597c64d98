"""
Evidence Extraction — observations in, validated EvidenceItems out.

Two extractors share one validation path, so no item with an unknown
participant or an out-of-range credibility ever reaches a graph:

    ScriptedExtractor  fixture-driven (JSONL rules), deterministic
    LLMExtractor       renders the extraction prompt, parses a JSON reply

Also assembles the reasoning context that summarizes a retrieval result.
"""
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from backend.errors import ConfigError, ExtractionError
from backend.retrieval import RetrievalResult
from backend.trust_graph import EvidenceItem, Stance, TrustGraph, classify_stance
from pipeline import prompts
from pipeline.llm_client import CompletionParams
from pipeline.storage import read_jsonl

logger = logging.getLogger(__name__)

_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


# ── Types ─────────────────────────────────────────────────────────────────────

class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


@dataclass(frozen=True)
class Observation:
    speaker: str
    text: str
    tick: int
    visibility: Visibility = Visibility.PUBLIC

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise ExtractionError(f"empty observation text from {self.speaker!r}")


@dataclass
class ExtractionOutcome:
    items: List[EvidenceItem] = field(default_factory=list)
    raw_response: str = ""
    # role the speaker publicly claims for themselves
    claim: Optional[str] = None


@dataclass(frozen=True)
class ChainSummary:
    path: Tuple[str, ...]
    u: float
    v: float
    h: float
    evidence: Tuple[str, ...] = ()

    @property
    def weight(self) -> float:
        return self.v - self.h

    def render(self) -> str:
        line = f"{' -> '.join(self.path)} | u={self.u:.5f} V={self.v:.5f} H={self.h:.5f}"
        if self.evidence:
            line += " | evidence: " + "; ".join(self.evidence)
        return line


@dataclass(frozen=True)
class ReasoningContext:
    target: str
    target_trust: float
    chains: Tuple[ChainSummary, ...]
    stance: Stance


# ── Validation ────────────────────────────────────────────────────────────────

def _validate_item(raw: Dict[str, Any], observation: Observation, participants: Sequence[str]) -> Optional[EvidenceItem]:
    """Normalise one raw item. Returns None (and logs) when it must be dropped."""
    target = raw.get("target")
    if not isinstance(target, str) or target not in participants:
        logger.warning("[extraction] dropped item from %s: unknown target %r", observation.speaker, target)
        return None
    if target == observation.speaker:
        logger.warning("[extraction] dropped self-directed item from %s", observation.speaker)
        return None

    cred = raw.get("credibility")
    if isinstance(cred, bool) or not isinstance(cred, (int, float)) or not (-1.0 <= cred <= 1.0):
        logger.warning("[extraction] dropped item %s->%s: credibility %r out of range",
                       observation.speaker, target, cred)
        return None

    role_guess = raw.get("role_guess")
    if role_guess is not None and not isinstance(role_guess, str):
        role_guess = None
    description = raw.get("description") or ""
    if not isinstance(description, str):
        description = str(description)

    return EvidenceItem(
        actor=observation.speaker,
        target=target,
        description=description,
        credibility=float(cred),
        role_guess=role_guess,
        tick=observation.tick,
    )


def _outcome_json(items: Iterable[EvidenceItem], claim: Optional[str] = None) -> str:
    return json.dumps({"items": [
        {"target": i.target, "credibility": i.credibility, "role_guess": i.role_guess, "description": i.description}
        for i in items
    ], "claim": claim})


def _normalise_claim(value: Any) -> Optional[str]:
    if not isinstance(value, str) or not value.strip():
        return None
    return value.strip().lower()


def split_sentences(text: str) -> List[str]:
    return [s for s in _SENTENCE_BREAK.split(text.strip()) if s]


# ── Scripted extractor ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FixtureRule:
    speaker: str
    pattern: re.Pattern
    items: Tuple[Dict[str, Any], ...]
    claim: Optional[str] = None

    def applies_to(self, speaker: str) -> bool:
        return self.speaker == "*" or self.speaker == speaker


def load_fixture(path: str) -> List[FixtureRule]:
    """Read a JSONL rule file: {speaker, pattern, items: [{target, cred, role_guess, desc}], claim?}."""
    try:
        records = read_jsonl(path)
    except FileNotFoundError:
        raise ConfigError(f"extraction fixture not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"extraction fixture {path} has a malformed line: {exc}")

    rules = []
    for lineno, rec in enumerate(records, start=1):
        try:
            items = tuple(rec["items"])
            for item in items:
                if "target" not in item or "cred" not in item:
                    raise KeyError("target/cred")
            claim = rec.get("claim")
            if claim is not None and not isinstance(claim, str):
                raise TypeError(f"claim must be a string, got {claim!r}")
            rules.append(FixtureRule(str(rec["speaker"]), re.compile(rec["pattern"]), items, claim))
        except (KeyError, TypeError, re.error) as exc:
            raise ConfigError(f"extraction fixture {path} record {lineno} invalid: {exc}")
    return rules


class ScriptedExtractor:
    """Deterministic lookup by (speaker, sentence pattern); first matching rule per sentence."""

    def __init__(self, rules: Sequence[FixtureRule], participants: Sequence[str]):
        self.rules = list(rules)
        self.participants = list(participants)

    def _expand(self, rule: FixtureRule, groups: Dict[str, str], observation: Observation) -> List[EvidenceItem]:
        out = []
        for template in rule.items:
            try:
                raw = {
                    "target": str(template["target"]).format(**groups),
                    "credibility": template["cred"],
                    "role_guess": template.get("role_guess"),
                    "description": str(template.get("desc", "")).format(**groups),
                }
            except (KeyError, IndexError) as exc:
                raise ExtractionError(f"fixture template references missing group {exc}")
            item = _validate_item(raw, observation, self.participants)
            if item is not None:
                out.append(item)
        return out

    def extract(self, observation: Observation) -> ExtractionOutcome:
        items: List[EvidenceItem] = []
        claim: Optional[str] = None
        for sentence in split_sentences(observation.text):
            for rule in self.rules:
                if not rule.applies_to(observation.speaker):
                    continue
                match = rule.pattern.search(sentence)
                if match is None:
                    continue
                groups = {"speaker": observation.speaker}
                groups.update({k: v for k, v in match.groupdict().items() if v is not None})
                items.extend(self._expand(rule, groups, observation))
                if rule.claim is not None and claim is None:
                    try:
                        claim = _normalise_claim(rule.claim.format(**groups))
                    except (KeyError, IndexError) as exc:
                        raise ExtractionError(f"fixture claim references missing group {exc}")
                break
        return ExtractionOutcome(items=items, raw_response=_outcome_json(items, claim), claim=claim)


# ── LLM extractor ─────────────────────────────────────────────────────────────

def parse_reply(text: str) -> Dict[str, Any]:
    """Parse a JSON object out of a model reply, tolerating markdown fences."""
    cleaned = text.strip()
    if cleaned.startswith("```"):
        lines = [l for l in cleaned.split("\n") if not l.strip().startswith("```")]
        cleaned = "\n".join(lines).strip()

    try:
        data = json.loads(cleaned)
    except json.JSONDecodeError:
        start = cleaned.find("{")
        end = cleaned.rfind("}")
        if start == -1 or end <= start:
            raise ExtractionError("reply holds no JSON object", raw_response=text)
        try:
            data = json.loads(cleaned[start:end + 1])
        except json.JSONDecodeError:
            raise ExtractionError("reply JSON is malformed", raw_response=text)

    if not isinstance(data, dict):
        raise ExtractionError("reply is not a JSON object", raw_response=text)
    return data


class LLMExtractor:
    def __init__(self, backend, participants: Sequence[str], params: CompletionParams,
                 setting: str = "an eight-player Werewolf game"):
        self.backend = backend
        self.participants = list(participants)
        self.params = params
        self.setting = setting

    def extract(self, observation: Observation) -> ExtractionOutcome:
        prompt = prompts.render_extraction(self.setting, self.participants, observation.speaker, observation.text)
        raw = self.backend.complete(prompt, self.params)
        data = parse_reply(raw)
        raw_items = data.get("items")
        if not isinstance(raw_items, list):
            raise ExtractionError("reply has no 'items' list", raw_response=raw)

        items = []
        for entry in raw_items:
            if not isinstance(entry, dict):
                logger.warning("[extraction] dropped non-object item in reply for %s", observation.speaker)
                continue
            item = _validate_item(entry, observation, self.participants)
            if item is not None:
                items.append(item)
        return ExtractionOutcome(items=items, raw_response=raw, claim=_normalise_claim(data.get("claim")))


# ── Reasoning context ─────────────────────────────────────────────────────────

def _top_descriptions(hops: Sequence[Sequence[EvidenceItem]], limit: int = 2) -> Tuple[str, ...]:
    pool = [item for hop in hops for item in hop if item.description]
    pool.sort(key=lambda i: (-abs(i.credibility), -i.tick, i.description))
    return tuple(i.description for i in pool[:limit])


def reasoning_context(graph: TrustGraph, result: RetrievalResult) -> ReasoningContext:
    chains = tuple(
        ChainSummary(
            path=tuple(c.path),
            u=c.propagated_trust,
            v=c.value,
            h=c.uncertainty,
            evidence=_top_descriptions(c.edge_evidence),
        )
        for c in result.chains
    )
    return ReasoningContext(
        target=result.target,
        target_trust=graph.node(result.target).trust,
        chains=chains,
        stance=classify_stance(graph, result.target),
    )


def build_reasoning_prompt(context: ReasoningContext) -> str:
    ordered = sorted(context.chains, key=lambda c: (-abs(c.weight), c.path))
    return prompts.render_reasoning(
        target=context.target,
        trust=f"{context.target_trust:.5f}",
        stance=context.stance.value,
        chain_lines=[c.render() for c in ordered],
    )
