"""
Render — plain-text views of retrieval traces and game logs.

Templates live in templates/ and are rendered with the same Jinja2 settings
as the prompts; numbers are formatted here, before rendering.
"""
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

_TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "templates")

_env = Environment(
    loader=FileSystemLoader(_TEMPLATE_DIR),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    undefined=StrictUndefined,
    autoescape=False,
)

TraceFile = Union[Sequence[Mapping[str, Any]], Mapping[str, Sequence[Mapping[str, Any]]]]


def _num(value: float) -> str:
    return f"{value:.5f}"


def _hop_line(later: str, earlier: str, evidence: Sequence[Mapping[str, Any]]) -> str:
    if not evidence:
        return f"{later} -> {earlier}: no evidence"
    latest = evidence[-1]
    return f'{later} -> {earlier}: {len(evidence)} evidence, latest "{latest["desc"]}" (cred {latest["cred"]:+.2f})'


def _trace_view(record: Mapping[str, Any]) -> Dict[str, Any]:
    chains = []
    for k, chain in enumerate(record["chains"]):
        path = chain["path"]
        last = k == len(record["chains"]) - 1
        hops = [
            _hop_line(path[i + 1], path[i], chain["evidence"][i] if i < len(chain["evidence"]) else [])
            for i in range(len(path) - 1)
        ]
        chains.append({
            "path": " -> ".join(path),
            "V": _num(chain["V"]),
            "u": _num(chain["u"]),
            "H": _num(chain["H"]),
            "hops": hops,
            "branch": "└─" if last else "├─",
            "stem": " " if last else "│",
        })
    return {
        "target": record["target"],
        "prior": _num(record["prior"]),
        "aggregate": _num(record["aggregate"]),
        "chains": chains,
        "deltas": [f"{d['edge']} {_num(d['old'])} -> {_num(d['new'])}" for d in record["backward_deltas"]],
    }


def render_trace(traces: TraceFile) -> str:
    """
    Text tree of retrieval traces.

    Accepts a bare list of trace records or a {player: [records]} map as
    written per game by `simulate`.
    """
    if isinstance(traces, Mapping):
        groups = [
            {"owner": f"[{owner}]", "indent": "  ", "traces": [_trace_view(r) for r in records]}
            for owner, records in traces.items()
            if records
        ]
    else:
        groups = [{"owner": None, "indent": "", "traces": [_trace_view(r) for r in traces]}] if traces else []
    return _env.get_template("trace_tree.txt.j2").render(groups=groups)


def _event_line(event: Mapping[str, Any]) -> str:
    parts = [event.get("actor") or "moderator", event["action"]]
    if event.get("target"):
        parts.append(event["target"])
    line = " ".join(parts)
    if event.get("text"):
        line += f': "{event["text"]}"'
    if event.get("detail"):
        line += f" [{event['detail']}]"
    if event.get("visibility") == "private":
        line += " (private)"
    return line


def render_game(events: Sequence[Mapping[str, Any]]) -> str:
    blocks: List[Dict[str, Any]] = []
    current: Optional[Dict[str, Any]] = None
    for event in events:
        key = (event["round"], event["phase"])
        if current is None or (current["round"], current["phase"]) != key:
            current = {"round": event["round"], "phase": event["phase"], "lines": []}
            blocks.append(current)
        current["lines"].append(_event_line(event))
    return _env.get_template("game_replay.txt.j2").render(blocks=blocks)
