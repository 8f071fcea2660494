"""Deterrence arithmetic: exact bounds cross-checked against a grid search."""

from __future__ import annotations

from fractions import Fraction

import pytest

from threatbench.errors import OutOfRange, UnknownScenario
from threatbench.risk import (
    IncentiveGame,
    is_deterred,
    min_deposit,
    parse_rational,
    rational_to_text,
    score_scenario,
)

F = Fraction


def grid_search_min_deposit(cheat, honest, p, step=F(1, 1000), limit=F(10_000)):
    """Independent oracle: walk a fine deposit grid until cheating stops paying."""
    deposit = F(0)
    while deposit <= limit:
        if cheat - p * deposit <= honest:
            return deposit
        deposit += step
    raise AssertionError("oracle ran off its grid")


# Frozen from grid_search_min_deposit before min_deposit was implemented.
FROZEN_DEPOSITS = [
    (F(10), F(4), F(1), F(6)),
    (F(10), F(4), F(1, 2), F(12)),
    (F(7), F(7), F(1, 2), F(0)),
    (F(3), F(8), F(1), F(0)),
    (F(5, 2), F(1, 2), F(1, 4), F(8)),
]


@pytest.mark.parametrize("cheat,honest,p,expected", FROZEN_DEPOSITS)
def test_min_deposit_frozen(cheat, honest, p, expected):
    assert min_deposit(cheat, honest, p) == expected
    assert grid_search_min_deposit(cheat, honest, p) == expected


def test_min_deposit_is_the_extra_payoff_at_certain_detection():
    assert min_deposit(F(10), F(4), F(1)) == F(6)


def test_min_deposit_rejects_bad_probability():
    for p in (F(0), F(-1, 2), F(3, 2)):
        with pytest.raises(OutOfRange):
            min_deposit(F(10), F(4), p)


def test_is_deterred_examples():
    game = IncentiveGame(F(0), F(10), F(1, 2), deposit=F(20))
    result = is_deterred(game)
    assert result.deterred
    assert result.expected_cheat_payoff == F(0)

    boundary = IncentiveGame(F(4), F(10), F(1), deposit=min_deposit(F(10), F(4), F(1)))
    res = is_deterred(boundary)
    assert res.deterred and res.expected_cheat_payoff == F(4)  # equality at the bound

    undeterred = IncentiveGame(F(4), F(10), F(1, 2), deposit=F(0))
    assert not is_deterred(undeterred).deterred


def test_deterrence_boundary_is_sharp():
    cheat, honest, p = F(10), F(4), F(1, 3)
    bound = min_deposit(cheat, honest, p)
    at = IncentiveGame(honest, cheat, p, deposit=bound)
    below = IncentiveGame(honest, cheat, p, deposit=bound - F(1, 10**9))
    assert is_deterred(at).deterred
    assert not is_deterred(below).deterred


def test_monotone_in_deposit_and_probability():
    cheat, honest = F(9), F(2)
    p = F(1, 2)
    bound = min_deposit(cheat, honest, p)
    for extra in (F(0), F(1), F(7, 3), F(100)):
        assert is_deterred(IncentiveGame(honest, cheat, p, deposit=bound + extra)).deterred
    for better_p in (p, F(3, 4), F(1)):
        assert is_deterred(IncentiveGame(honest, cheat, better_p, deposit=bound)).deterred


def test_game_invariants():
    with pytest.raises(OutOfRange):
        IncentiveGame(F(1), F(2), F(0))
    with pytest.raises(OutOfRange):
        IncentiveGame(F(1), F(2), F(1), deposit=F(-1))


def test_score_scenario(compucoin_triaged):
    model = compucoin_triaged.model
    scored = score_scenario(model, "s1", 5, 5)
    assert scored.scores[-1].score == 25
    assert scored.version == model.version + 1
    rescored = score_scenario(scored, "s1", 5, 5, "unchanged")
    assert len(rescored.scores) == 1
    assert rescored.scores[0].score == 25
    low = score_scenario(model, "s1", 1, 3)
    assert low.scores[-1].score == 3
    with pytest.raises(UnknownScenario):
        score_scenario(model, "s99", 3, 3)
    with pytest.raises(OutOfRange):
        score_scenario(model, "s1", 0, 3)
    with pytest.raises(OutOfRange):
        score_scenario(model, "s1", 3, 6)


def test_rational_text_round_trip():
    for text, value in [("10", F(10)), ("0.5", F(1, 2)), ("2/3", F(2, 3))]:
        assert parse_rational(text) == value
    assert rational_to_text(F(6)) == "6"
    assert rational_to_text(F(2, 3)) == "2/3"
    with pytest.raises(OutOfRange):
        parse_rational("not-a-number")
