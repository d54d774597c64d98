import math
import os
import re

import pandas as pd
import pytest

from backend.errors import DatasetError, EvaluationError, ExtractionError
from pipeline.extraction import FixtureRule, ScriptedExtractor
from pipeline.intent.classifier import (
    DEMOCRAT_ANCHOR,
    IntentClassifier,
    classify_stream,
    label_for,
)
from pipeline.intent.dataset import LABELS, IntentLabel, LabeledMessage, ingest
from pipeline.intent.metrics import evaluate
from tests.conftest import DATA_DIR

HEADER = "id,author,timestamp,text,label\n"


def _msg(message_id, text, author="a01", minute=0, gold=IntentLabel.NEUTRAL):
    return LabeledMessage(
        id=message_id,
        author=author,
        timestamp=pd.Timestamp("2024-03-01T00:00:00Z") + pd.Timedelta(minutes=minute),
        text=text,
        gold=gold,
    )


def _factory(rules):
    return lambda participants: ScriptedExtractor(rules, participants)


def _rule(pattern, cred, target=DEMOCRAT_ANCHOR):
    return FixtureRule("*", re.compile(pattern), ({"target": target, "cred": cred},))


# ── ingest ────────────────────────────────────────────────────────────────────

def test_ingest_sorts_by_timestamp_then_id(tmp_path):
    path = tmp_path / "three.csv"
    path.write_text(
        HEADER
        + "m3,a1,2024-03-01T10:00:00Z,third,neutral\n"
        + "m2,a2,2024-03-01T09:00:00+02:00,first,neutral\n"
        + "m1,a3,2024-03-01T10:00:00Z,tied,pro-democrat\n",
        encoding="utf-8",
    )
    dataset = ingest(str(path))
    assert [m.id for m in dataset.messages] == ["m2", "m1", "m3"]
    assert str(dataset.messages[0].timestamp.tz) == "UTC"
    assert dataset.messages[0].engagement is None
    assert dataset.skipped == 0


def test_bundled_dataset_skips_unknown_label():
    dataset = ingest(os.path.join(DATA_DIR, "intent_messages.csv"))
    assert len(dataset.messages) == 200
    assert dataset.total_rows == 201
    assert dataset.skipped == 1
    assert dataset.diagnostics[0].startswith("line 202: label 'pro-green'")
    assert dataset.messages[0].engagement.views == 137


def test_ingest_empty_files(tmp_path):
    blank = tmp_path / "blank.csv"
    blank.write_text("", encoding="utf-8")
    with pytest.raises(DatasetError):
        ingest(str(blank))
    header_only = tmp_path / "header.csv"
    header_only.write_text(HEADER, encoding="utf-8")
    with pytest.raises(DatasetError):
        ingest(str(header_only))


def test_ingest_aborts_over_ten_percent_invalid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        HEADER
        + "m1,a1,2024-03-01T10:00:00Z,ok,neutral\n"
        + "m2,a1,not-a-date,broken,neutral\n"
        + "m3,a1,2024-03-01T11:00:00Z,,neutral\n",
        encoding="utf-8",
    )
    with pytest.raises(DatasetError) as info:
        ingest(str(path))
    assert len(info.value.diagnostics) == 2
    assert info.value.diagnostics[0].startswith("line 3:")
    assert info.value.diagnostics[1] == "line 4: text is empty"


def test_diagnostic_lines_count_multiline_fields(tmp_path):
    path = tmp_path / "multiline.csv"
    path.write_text(
        HEADER
        + 'm1,a1,2024-03-01T10:00:00Z,"first line\nsecond line\nthird line",neutral\n'
        + "m2,a1,not-a-date,broken,neutral\n"
        + "m3,a->b,2024-03-01T11:00:00Z,arrow author,neutral\n",
        encoding="utf-8",
    )
    with pytest.raises(DatasetError) as info:
        ingest(str(path))
    assert info.value.diagnostics[0].startswith("line 5:")
    assert info.value.diagnostics[1] == "line 6: author 'a->b' contains '->'"


def test_ingest_missing_columns_and_file(tmp_path):
    path = tmp_path / "cols.csv"
    path.write_text("id,author\nm1,a1\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="lacks columns"):
        ingest(str(path))
    with pytest.raises(DatasetError):
        ingest(str(tmp_path / "missing.csv"))


def test_ingest_jsonl(tmp_path):
    rows = [
        '{"id": "j%d", "author": "a1", "timestamp": "2024-03-01T00:%02d:00Z", "text": "t", "label": "neutral"}' % (i, i)
        for i in range(20)
    ]
    rows.insert(4, "{not json")
    rows.append('{"id": "j0", "author": "a1", "timestamp": "2024-03-01T01:00:00Z", "text": "t", "label": "neutral"}')
    path = tmp_path / "messages.jsonl"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    dataset = ingest(str(path))
    assert len(dataset.messages) == 20
    assert dataset.diagnostics[0].startswith("line 5: malformed JSON")
    assert dataset.diagnostics[1] == "line 22: duplicate id 'j0'"


# ── classify_stream ───────────────────────────────────────────────────────────

def test_label_for_bands():
    assert label_for(DEMOCRAT_ANCHOR, 0.3, 0.3) is IntentLabel.NEUTRAL
    assert label_for(DEMOCRAT_ANCHOR, 0.31, 0.3) is IntentLabel.PRO_DEMOCRAT
    assert label_for(DEMOCRAT_ANCHOR, -0.5, 0.3) is IntentLabel.ANTI_DEMOCRAT


def test_graph_prior_carries_an_ambiguous_message(intent_rules):
    classifier = IntentClassifier(_factory(intent_rules))
    for tick in range(3):
        prediction = classifier.classify(_msg(f"m{tick}", "I stand with the Democrats."), tick)
        assert prediction.predicted is IntentLabel.PRO_DEMOCRAT
    assert classifier.author_trust("a01", DEMOCRAT_ANCHOR) == pytest.approx(math.tanh(0.8 * 0.81 + 0.8 * 0.9 + 0.8))

    prediction = classifier.classify(_msg("m3", "Long day at work."), 3)
    assert prediction.message_label is IntentLabel.NEUTRAL
    assert prediction.graph_label is IntentLabel.PRO_DEMOCRAT
    assert prediction.predicted is IntentLabel.PRO_DEMOCRAT


def test_first_message_trust_is_merged_edge(intent_rules):
    classifier = IntentClassifier(_factory(intent_rules))
    classifier.classify(_msg("m1", "Republicans are lying again."), 0)
    assert classifier.author_trust("a01", "republican-entity") == pytest.approx(math.tanh(-0.8))
    assert classifier.graph_label("a01") is IntentLabel.ANTI_REPUBLICAN


def test_zero_credibility_first_message_is_neutral():
    predictions = classify_stream([_msg("m1", "meh")], _factory([_rule("meh", 0.0)]))
    assert predictions[0].predicted is IntentLabel.NEUTRAL


def test_timeline_order_changes_predictions():
    rules = [_rule("love", 0.8), _rule("doubt", -0.4)]
    first = _msg("m1", "I love them.", minute=0)
    second = _msg("m2", "I doubt them.", minute=1)

    forward = classify_stream([first, second], _factory(rules))
    reverse = classify_stream([second, first], _factory(rules))
    assert forward[1].predicted is IntentLabel.PRO_DEMOCRAT
    assert reverse[0].predicted is IntentLabel.ANTI_DEMOCRAT
    assert {p.id: p.predicted for p in forward} != {p.id: p.predicted for p in reverse}


def test_authors_are_independent(intent_rules):
    messages = [
        _msg("m1", "I stand with the Democrats.", author="a01"),
        _msg("m2", "Nothing to add.", author="a02", minute=1),
    ]
    predictions = classify_stream(messages, _factory(intent_rules))
    assert [p.predicted for p in predictions] == [IntentLabel.PRO_DEMOCRAT, IntentLabel.NEUTRAL]


def test_extraction_failure_defaults_to_neutral(intent_rules):
    class Broken:
        def extract(self, observation):
            raise ExtractionError("reply holds no JSON object")

    predictions = classify_stream([_msg("m1", "I stand with the Democrats.")], lambda participants: Broken())
    assert predictions[0].predicted is IntentLabel.NEUTRAL


def test_anchor_named_author_is_neutral(intent_rules):
    predictions = classify_stream(
        [_msg("m1", "I stand with the Democrats.", author=DEMOCRAT_ANCHOR)], _factory(intent_rules)
    )
    assert predictions[0].predicted is IntentLabel.NEUTRAL


def test_stream_is_deterministic(intent_rules):
    messages = ingest(os.path.join(DATA_DIR, "intent_messages.csv")).messages
    assert classify_stream(messages, _factory(intent_rules)) == classify_stream(messages, _factory(intent_rules))


# ── evaluate ──────────────────────────────────────────────────────────────────

def test_all_correct():
    gold = {f"m{i}": label for i, label in enumerate(LABELS)}
    report = evaluate(dict(gold), gold)
    assert report.accuracy == 1.0
    assert report.macro_f1 == pytest.approx(1.0)


CONFUSION_FIXTURE = [
    ("pro-democrat", "pro-democrat"),
    ("pro-democrat", "pro-democrat"),
    ("pro-democrat", "neutral"),
    ("pro-republican", "pro-republican"),
    ("pro-republican", "pro-republican"),
    ("anti-democrat", "anti-democrat"),
    ("anti-democrat", "anti-republican"),
    ("anti-republican", "anti-republican"),
    ("neutral", "neutral"),
    ("neutral", "pro-democrat"),
]


def test_ten_message_confusion_fixture():
    gold = {f"m{i:02d}": g for i, (g, _) in enumerate(CONFUSION_FIXTURE)}
    predicted = {f"m{i:02d}": p for i, (_, p) in enumerate(CONFUSION_FIXTURE)}
    report = evaluate(predicted, gold)

    assert report.accuracy == pytest.approx(0.7)
    # rows gold, columns predicted: anti-dem, anti-rep, pro-dem, pro-rep, neutral
    assert report.confusion == [
        [1, 1, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 2, 0, 1],
        [0, 0, 0, 2, 0],
        [0, 0, 1, 0, 1],
    ]
    assert report.per_class["anti-democrat"].f1 == pytest.approx(2 / 3)
    assert report.per_class["anti-republican"].precision == pytest.approx(0.5)
    assert report.per_class["pro-democrat"].f1 == pytest.approx(2 / 3)
    assert report.per_class["pro-republican"].f1 == pytest.approx(1.0)
    assert report.per_class["neutral"].f1 == pytest.approx(0.5)
    assert report.macro_f1 == pytest.approx((2 / 3 * 3 + 1.0 + 0.5) / 5)


def test_absent_class_counts_as_zero():
    gold = {"m1": "pro-democrat", "m2": "neutral"}
    report = evaluate(dict(gold), gold)
    assert report.accuracy == 1.0
    assert report.per_class["anti-republican"].f1 == 0.0
    assert report.per_class["anti-republican"].support == 0
    assert report.macro_f1 == pytest.approx(0.4)


def test_metrics_ignore_id_permutation():
    gold = {f"m{i:02d}": g for i, (g, _) in enumerate(CONFUSION_FIXTURE)}
    predicted = {f"m{i:02d}": p for i, (_, p) in enumerate(CONFUSION_FIXTURE)}
    renamed = {f"x{9 - int(k[1:]):02d}": v for k, v in gold.items()}
    renamed_pred = {f"x{9 - int(k[1:]):02d}": v for k, v in predicted.items()}
    assert evaluate(predicted, gold).to_dict() == evaluate(renamed_pred, renamed).to_dict()


def test_evaluate_errors():
    with pytest.raises(EvaluationError):
        evaluate({"m1": "neutral"}, {"m2": "neutral"})
    with pytest.raises(EvaluationError):
        evaluate({}, {})
    with pytest.raises(EvaluationError):
        evaluate({"m1": "pro-green"}, {"m1": "neutral"})
