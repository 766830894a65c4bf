"""Plan score composition, plan potential and 0-1 normalisation.

Everything is exact rational arithmetic internally (so repeating decimals
like 18.53... stay exact Fractions); values only become floats at report
time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ZeroLengthGroundTruth
from .lcs import LcsResult
from .pddl import Plan
from .similarity import PairingResult, QualityLabel

ZERO = Fraction(0)
ONE = Fraction(1)

#: Bonus per pair whose action names match (correct / misplaced / same_act).
PAIR_BONUS = Fraction(1, 2)
SUBSTRING_BONUS_PER_ACTION = Fraction(2)
SUBSEQUENCE_BONUS_PER_ACTION = Fraction(1)

#: Per-action ceiling used by the 0-1 normalisation: 1 base + 1 flat pair
#: similarity + 0.5 pair bonus + 2 substring, with the subsequence bonus
#: absorbed by capping at 1.
M_MAX = Fraction(9, 2)

DEFAULT_VALIDITY_REWARD = Fraction(1)

_NAME_MATCH_LABELS = frozenset(
    {QualityLabel.CORRECT, QualityLabel.MISPLACED, QualityLabel.SAME_ACT}
)


@dataclass(frozen=True)
class ScoreBreakdown:
    base: Fraction
    similarity_sum: Fraction
    pair_bonus: Fraction
    substring_bonus: Fraction
    subsequence_bonus: Fraction
    length_penalty: Fraction
    total: Fraction
    valid: bool

    def audit(self) -> bool:
        """Recompute the total from components; must hold exactly, always."""
        return self.total == (
            self.base + self.similarity_sum + self.pair_bonus
            + self.substring_bonus + self.subsequence_bonus - self.length_penalty
        )


@dataclass(frozen=True)
class PotentialScore:
    score0: Fraction
    score1: Fraction
    potential: Fraction
    validity_reward: Fraction  # amount added; zero when the plan was invalid


def length_penalty(n: int, m: int) -> Fraction:
    """Quadratic deviation from the optimal length; short plans pay double."""
    if m < 1:
        raise ZeroLengthGroundTruth("length penalty undefined for an empty ground truth")
    gap = Fraction((n - m) ** 2, m)
    return gap if n >= m else 2 * gap


def plan_score(plan: Plan, gt: Plan, pairing: PairingResult, lcs: LcsResult,
               valid: bool) -> ScoreBreakdown:
    """Compose the plan score.

    Valid plans are only penalised for sub-optimal length; invalid plans get
    the full composition of base length credit, per-action similarity, pair
    bonuses and LCS bonuses minus the length penalty.
    """
    base = Fraction(len(plan))
    penalty = length_penalty(len(plan), len(gt))
    if valid:
        return ScoreBreakdown(base, ZERO, ZERO, ZERO, ZERO, penalty,
                              base - penalty, True)
    similarity_sum = sum(pairing.per_action_scores, ZERO)
    pair_bonus = PAIR_BONUS * sum(
        1 for pair in pairing.pairs if pair.label in _NAME_MATCH_LABELS
    )
    substring_bonus = SUBSTRING_BONUS_PER_ACTION * len(lcs.substring)
    subsequence_bonus = SUBSEQUENCE_BONUS_PER_ACTION * len(lcs.subsequence)
    total = (base + similarity_sum + pair_bonus + substring_bonus
             + subsequence_bonus - penalty)
    return ScoreBreakdown(base, similarity_sum, pair_bonus, substring_bonus,
                          subsequence_bonus, penalty, total, False)


def potential(score0: Fraction, score1: Fraction, n0: int, valid0: bool,
              reward: Fraction = DEFAULT_VALIDITY_REWARD) -> PotentialScore:
    """Per-action mean of the raw and best-variant scores, plus the validity
    reward when the raw plan was already valid."""
    if n0 < 1:
        raise ZeroLengthGroundTruth("potential undefined for an empty candidate plan")
    mean_per_action = (score0 + score1) / (2 * n0)
    applied = Fraction(reward) if valid0 else ZERO
    return PotentialScore(score0, score1, mean_per_action + applied, applied)


def normalize_score(breakdown: ScoreBreakdown, plan: Plan, gt: Plan) -> Fraction:
    """Scale the total to roughly [0, 1] via the per-action ceiling.

    Capped above at 1; large length penalties are allowed to stay negative.
    An empty candidate plan is normalised by the ground-truth length instead.
    """
    n = len(plan) if len(plan) > 0 else len(gt)
    if n == 0:
        return ZERO
    value = breakdown.total / (n * M_MAX)
    return value if value < ONE else ONE
