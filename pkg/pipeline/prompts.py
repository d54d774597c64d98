"""
Prompts — extraction, reasoning-context and decision templates.

Rendered with Jinja2 (StrictUndefined, trimmed blocks) so output is a pure
function of the template variables. Numbers are formatted before rendering.
"""
from jinja2 import Environment, StrictUndefined

_env = Environment(
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    undefined=StrictUndefined,
    autoescape=False,
)

NO_CHAINS_SENTINEL = "no supporting chains"


EXTRACTION_TEMPLATE = _env.from_string("""\
You extract directed intentions from one utterance in {{ setting }}.

Participants: {{ participants | join(", ") }}
Speaker: {{ speaker }}
Utterance: {{ text }}

List every intention the speaker expresses towards another participant.
Credibility is a number in [-1, 1] in steps of 0.1: negative for hostility
or accusation, positive for support or defence. role_guess is the role the
speaker attributes to the target, or null. claim is the role the speaker
openly claims for themselves, or null.

Reply with JSON only:
{"items": [{"target": "<participant>", "credibility": <number>, "role_guess": "<role or null>", "description": "<short intention>"}], "claim": "<role or null>"}
Reply {"items": []} when the utterance has no directed intention.
""")


REASONING_TEMPLATE = _env.from_string("""\
Target: {{ target }}
Trust: {{ trust }} ({{ stance }})
Evidence chains:
{% for line in chain_lines %}
- {{ line }}
{% else %}
- {{ sentinel }}
{% endfor %}
""")


DECISION_TEMPLATE = _env.from_string("""\
You are {{ player }}, playing the {{ role }} in an eight-player Werewolf game (round {{ round }}).
Decision: {{ action }}
Allowed targets: {{ candidates | join(", ") }}

Trust assessment of the other players:

{% for context in contexts %}
{{ context }}
{% endfor %}
Reply with JSON only:
{"target": "<one allowed target, or null to pass>", "speech": "<one short sentence to say in public>"}
""")


def render_extraction(setting: str, participants, speaker: str, text: str) -> str:
    return EXTRACTION_TEMPLATE.render(
        setting=setting, participants=list(participants), speaker=speaker, text=text
    )


def render_reasoning(target: str, trust: str, stance: str, chain_lines) -> str:
    return REASONING_TEMPLATE.render(
        target=target, trust=trust, stance=stance,
        chain_lines=list(chain_lines), sentinel=NO_CHAINS_SENTINEL,
    )


def render_decision(player: str, role: str, round_no: int, action: str, candidates, contexts) -> str:
    return DECISION_TEMPLATE.render(
        player=player, role=role, round=round_no, action=action,
        candidates=list(candidates), contexts=list(contexts),
    )
