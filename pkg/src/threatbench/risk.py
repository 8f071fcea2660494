"""Risk scoring and detect-and-punish deterrence arithmetic.

Scores use 1-5 likelihood and severity scales multiplied together. The
deterrence model is a single-round, risk-neutral escrow game: a cheater
keeps the gross cheating gain, but with probability p the cheat is
detected and the penalty deposit is revoked. All payoff arithmetic is
exact (``fractions.Fraction``) so the deterrence boundary is sharp.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import OutOfRange
from .model import ThreatModel

Rational = Fraction


@dataclass(frozen=True)
class RiskScore:
    """Analyst-assigned likelihood and severity for one scenario."""

    scenario_ref: str
    likelihood: int
    severity: int
    notes: str = ""

    @property
    def score(self) -> int:
        return self.likelihood * self.severity


@dataclass(frozen=True)
class IncentiveGame:
    """One cheat-or-stay-honest decision under detect-and-punish."""

    honest_payoff: Fraction
    cheat_payoff: Fraction
    detection_probability: Fraction
    deposit: Fraction = Fraction(0)

    def __post_init__(self):
        if not 0 < self.detection_probability <= 1:
            raise OutOfRange("detection probability must be in (0, 1]")
        if self.deposit < 0:
            raise OutOfRange("deposit cannot be negative")


@dataclass(frozen=True)
class DeterrenceResult:
    deterred: bool
    expected_cheat_payoff: Fraction


def score_scenario(
    model: ThreatModel,
    scenario_id: str,
    likelihood: int,
    severity: int,
    notes: str = "",
) -> ThreatModel:
    """Record (or replace) the risk score of a scenario."""
    model.scenario(scenario_id)
    for factor in (likelihood, severity):
        if not isinstance(factor, int) or not 1 <= factor <= 5:
            raise OutOfRange("likelihood and severity must be integers in 1..5")
    score = RiskScore(scenario_id, likelihood, severity, notes)
    others = tuple(s for s in model.scores if s.scenario_ref != scenario_id)
    return model.bump(scores=others + (score,))


def min_deposit(
    cheat_payoff: Fraction, honest_payoff: Fraction, detection_probability: Fraction
) -> Fraction:
    """Smallest deposit that makes cheating no better than honesty.

    With certain detection this is exactly the cheater's additional payoff
    over honest behavior; imperfect detection scales it by 1/p.
    """
    p = Fraction(detection_probability)
    if not 0 < p <= 1:
        raise OutOfRange("detection probability must be in (0, 1]")
    bound = (Fraction(cheat_payoff) - Fraction(honest_payoff)) / p
    return max(Fraction(0), bound)


def expected_cheat_payoff(game: IncentiveGame) -> Fraction:
    """Cheater's expected payoff: the gross gain minus the expected penalty."""
    return game.cheat_payoff - game.detection_probability * game.deposit


def is_deterred(game: IncentiveGame) -> DeterrenceResult:
    """Whether a rational party prefers honesty under this game."""
    expected = expected_cheat_payoff(game)
    return DeterrenceResult(deterred=expected <= game.honest_payoff, expected_cheat_payoff=expected)


def parse_rational(text: str) -> Fraction:
    """Accept integers, decimals, and num/den forms; never floats."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise OutOfRange(f"not a rational number: {text!r}") from exc


def rational_to_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
