import math

import pytest
from rich.console import Console

from backend.config import GraphConfig, load_config
from backend.errors import GameError
from pipeline.werewolf.models import Side
from pipeline.werewolf.tournament import (
    MatchSettings,
    default_lineup,
    derive_seeds,
    play_match,
    report_table,
    run_tournament,
)


@pytest.fixture
def settings(werewolf_rules):
    return MatchSettings(graph=GraphConfig(), rules=tuple(werewolf_rules))


def test_derive_seeds():
    assert derive_seeds(7, 3) == derive_seeds(7, 3)
    assert derive_seeds(7, 3)[:2] == derive_seeds(7, 2)
    assert len(set(derive_seeds(7, 50))) == 50
    assert all(0 <= s < 16 ** 8 for s in derive_seeds(7, 10))


def test_identical_seeds_identical_report(settings):
    seeds = derive_seeds(7, 2)
    first, _ = run_tournament(2, seeds, default_lineup("noop"), settings)
    second, _ = run_tournament(2, seeds, default_lineup("noop"), settings)
    assert first == second


def test_worker_count_does_not_change_report(settings):
    seeds = derive_seeds(3, 4)
    serial, _ = run_tournament(4, seeds, default_lineup("random"), settings, workers=1)
    pooled, _ = run_tournament(4, seeds, default_lineup("random"), settings, workers=3)
    assert serial == pooled


def test_gratr_beats_noop_on_every_seed(settings):
    report, records = run_tournament(10, derive_seeds(7, 10), default_lineup("noop"), settings)
    assert report["twr"] == 1.0
    assert report["werewolf_games"] + report["leader_games"] == 10
    assert all(r.focus_won for r in records)


def test_gratr_beats_random_vote_floor(settings):
    report, _ = run_tournament(30, derive_seeds(7, 30), default_lineup("random"), settings)
    assert report["twr"] >= 0.7
    assert report["n_games"] == 30


@pytest.mark.parametrize("opponent", ["noop", "random", "baseline"])
def test_report_schema(settings, opponent):
    report, records = run_tournament(3, derive_seeds(11, 3), default_lineup(opponent), settings)
    for key in ("twr", "wwr", "lwr"):
        assert 0.0 <= report[key] <= 1.0
    assert set(report["mean_scores"]) == {"gratr", opponent}
    assert all(math.isfinite(v) for v in report["mean_scores"].values())
    assert report["n_games"] == 3 == len(report["games"])
    assert [g["index"] for g in report["games"]] == [0, 1, 2]
    assert report["focus"] == "gratr"
    assert len(records) == 3


def test_match_record_carries_traces_and_snapshots(werewolf_rules):
    settings = MatchSettings(graph=GraphConfig(), rules=tuple(werewolf_rules), keep_snapshots=True)
    record = play_match(0, 7, default_lineup("baseline"), settings)
    assert set(record.traces) == set(record.snapshots)
    assert len(record.traces) == 8
    assert record.winner in (Side.WEREWOLF, Side.VILLAGE)
    assert record.events[0]["action"] == "reveal"


def test_tournament_rejects_bad_counts(settings):
    with pytest.raises(GameError):
        run_tournament(0, [], default_lineup("noop"), settings)
    with pytest.raises(GameError):
        run_tournament(3, [1, 2], default_lineup("noop"), settings)


def test_settings_from_config():
    settings = MatchSettings.from_config(load_config())
    assert settings.rules
    assert not settings.live
    assert settings.decider() is None


def test_report_table_renders(settings):
    report, _ = run_tournament(1, derive_seeds(7, 1), default_lineup("noop"), settings)
    console = Console(record=True, width=100)
    console.print(report_table(report))
    text = console.export_text()
    assert "TWR" in text
    assert "100.0%" in text
