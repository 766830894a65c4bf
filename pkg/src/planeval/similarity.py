"""Action pairing, per-action similarity and quality labels (AQM, NP-AQM).

The similarity of two actions is ``S = sigma(name, name') + C(params,
params')`` where ``C = 0.25*F + 0.1*M - 0.1*|arity gap|``: F counts exact
positional parameter matches and M counts objects present in both argument
lists but never at a shared position.

Name similarity is pluggable.  The strict provider (1.0 on equal names,
else a synonym-table lookup, else 0.0) is the pipeline default, so no
credit leaks across different action names; :class:`CharLcsSimilarity` is
the fuzzier character-overlap alternative.

All scores are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping

from .errors import ConfigError
from .pddl import GroundAction, Plan

ZERO = Fraction(0)
ONE = Fraction(1)

#: Flat per-pair score for correct and misplaced pairs (not sigma + C).
FLAT_MATCH_SCORE = ONE

NameSimilarityProvider = Callable[[str, str], Fraction]


class QualityLabel(enum.Enum):
    CORRECT = "correct"
    MISPLACED = "misplaced"
    SAME_ACT = "same_act"
    DIFF_ACT = "diff_act"
    REDUNDANT = "redundant"

    def __str__(self) -> str:
        return self.value


#: Quality values used by the 0-1 normalised AQM score.
LABEL_VALUES: Mapping[QualityLabel, int] = {
    QualityLabel.CORRECT: 4,
    QualityLabel.MISPLACED: 3,
    QualityLabel.SAME_ACT: 2,
    QualityLabel.DIFF_ACT: 1,
    QualityLabel.REDUNDANT: 0,
}


# ---------------------------------------------------------------------------
# Name similarity providers
# ---------------------------------------------------------------------------


def char_lcs_len(a: str, b: str) -> int:
    """Length of the longest common character subsequence (rolling row DP)."""
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    current = [0] * (len(b) + 1)
    for ch_a in a:
        for j, ch_b in enumerate(b, start=1):
            if ch_a == ch_b:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous, current = current, previous
    return previous[len(b)]


def exact_name_similarity(a: str, b: str) -> Fraction:
    """Strict provider: 1.0 on case-insensitive equality, otherwise 0.0."""
    return ONE if a.lower() == b.lower() else ZERO


class CharLcsSimilarity:
    """Fuzzy provider: ``2*|charLCS| / (|a|+|b|)`` when above *floor*, else 0."""

    def __init__(self, floor: Fraction = Fraction(1, 2)):
        self.floor = Fraction(floor)

    def __call__(self, a: str, b: str) -> Fraction:
        a, b = a.lower(), b.lower()
        if a == b:
            return ONE
        if not a or not b:
            return ZERO
        ratio = Fraction(2 * char_lcs_len(a, b), len(a) + len(b))
        return ratio if ratio >= self.floor else ZERO


class SynonymTable:
    """Strict provider with user-supplied synonym scores.

    The table file holds one ``name1 name2 score`` entry per line, with
    ``score`` in [0, 1]; lookups are symmetric and case-insensitive.
    """

    def __init__(self, table: Mapping[tuple[str, str], Fraction] | None = None):
        self.table: dict[tuple[str, str], Fraction] = {}
        for (a, b), score in (table or {}).items():
            self._add(a, b, Fraction(score))

    def _add(self, a: str, b: str, score: Fraction) -> None:
        if not ZERO <= score <= ONE:
            raise ConfigError(f"synonym score for ({a}, {b}) outside [0, 1]: {score}")
        key = tuple(sorted((a.lower(), b.lower())))
        self.table[key] = score  # type: ignore[index]

    @classmethod
    def load(cls, path: str | Path) -> "SynonymTable":
        provider = cls()
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise ConfigError(f"synonym table line {line_no}: expected 'name1 name2 score'")
            try:
                provider._add(parts[0], parts[1], Fraction(parts[2]))
            except ValueError as exc:
                raise ConfigError(f"synonym table line {line_no}: {exc}") from exc
        return provider

    def __call__(self, a: str, b: str) -> Fraction:
        a, b = a.lower(), b.lower()
        if a == b:
            return ONE
        return self.table.get(tuple(sorted((a, b))), ZERO)  # type: ignore[arg-type]


def name_similarity(a: str, b: str, provider: NameSimilarityProvider | None = None) -> Fraction:
    """Name similarity under *provider* (character-LCS provider by default)."""
    if provider is None:
        provider = CharLcsSimilarity()
    return Fraction(provider(a, b))


# ---------------------------------------------------------------------------
# Parameter and action similarity
# ---------------------------------------------------------------------------


def param_score(p: tuple[str, ...] | list[str], q: tuple[str, ...] | list[str]) -> Fraction:
    """Parameter alignment ``C = 0.25*F + 0.1*M - 0.1*|arity gap|`` (may be < 0)."""
    p = [x.lower() for x in p]
    q = [x.lower() for x in q]
    exact_positions = {x for x, y in zip(p, q) if x == y}
    f_count = sum(1 for x, y in zip(p, q) if x == y)
    m_count = sum(1 for obj in set(p) & set(q) if obj not in exact_positions)
    return (Fraction(1, 4) * f_count + Fraction(1, 10) * m_count
            - Fraction(1, 10) * abs(len(p) - len(q)))


def action_similarity(a: GroundAction, b: GroundAction,
                      provider: NameSimilarityProvider | None = None) -> Fraction:
    """``S = sigma + C`` floored at zero; pairing requires S > 0."""
    if provider is None:
        provider = exact_name_similarity
    score = Fraction(provider(a.key[0], b.key[0])) + param_score(a.args, b.args)
    return score if score > ZERO else ZERO


def make_similarity_cache(provider: NameSimilarityProvider | None = None
                          ) -> Callable[[GroundAction, GroundAction], Fraction]:
    """Memoised ``action_similarity``, keyed by action identity."""
    cache: dict[tuple, Fraction] = {}

    def sim(a: GroundAction, b: GroundAction) -> Fraction:
        key = (a.key, b.key)
        value = cache.get(key)
        if value is None:
            value = action_similarity(a, b, provider)
            cache[key] = value
        return value

    return sim


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionPair:
    candidate_index: int  # 1-based
    gt_index: int  # 1-based
    label: QualityLabel
    score: Fraction


@dataclass(frozen=True)
class PairingResult:
    plan: Plan
    gt: Plan
    pairs: tuple[ActionPair, ...]
    per_action_scores: tuple[Fraction, ...]
    unpaired: tuple[int, ...]  # 1-based candidate indices left redundant

    def pair_for(self, candidate_index: int) -> ActionPair | None:
        for pair in self.pairs:
            if pair.candidate_index == candidate_index:
                return pair
        return None


@dataclass(frozen=True)
class ActionQualityMap:
    labels: tuple[QualityLabel, ...]
    variant: str = "positional"

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def entries(self) -> dict[int, QualityLabel]:
        """1-based index view, matching the reporting convention."""
        return {i: label for i, label in enumerate(self.labels, start=1)}

    def label_names(self) -> tuple[str, ...]:
        return tuple(label.value for label in self.labels)


def pair_actions(plan: Plan, gt: Plan,
                 provider: NameSimilarityProvider | None = None,
                 sim: Callable[[GroundAction, GroundAction], Fraction] | None = None,
                 ) -> tuple[PairingResult, ActionQualityMap]:
    """One-to-one pairing of candidate actions against ground-truth actions.

    Three phases, in label priority order:

    1. identical action at the identical index -> ``correct``
    2. identical action elsewhere (candidate order, earliest free ground-truth
       occurrence) -> ``misplaced``
    3. greedy best-similarity matching of the remainder; ties break to the
       earliest ground-truth action.  Names equal -> ``same_act``, else
       ``diff_act``; zero similarity or an empty pool -> ``redundant``.

    Correct and misplaced pairs carry the flat score 1.0; phase-3 pairs carry
    their recomputed similarity.
    """
    if sim is None:
        sim_provider = provider if provider is not None else exact_name_similarity
        sim = make_similarity_cache(sim_provider)
    n, m = len(plan), len(gt)
    labels: list[QualityLabel | None] = [None] * n
    scores: list[Fraction] = [ZERO] * n
    taken = [False] * m
    pairs: list[ActionPair] = []

    for i in range(min(n, m)):
        if plan[i].key == gt[i].key:
            labels[i] = QualityLabel.CORRECT
            scores[i] = FLAT_MATCH_SCORE
            taken[i] = True
            pairs.append(ActionPair(i + 1, i + 1, QualityLabel.CORRECT, FLAT_MATCH_SCORE))

    for i in range(n):
        if labels[i] is not None:
            continue
        for j in range(m):
            if not taken[j] and plan[i].key == gt[j].key:
                labels[i] = QualityLabel.MISPLACED
                scores[i] = FLAT_MATCH_SCORE
                taken[j] = True
                pairs.append(ActionPair(i + 1, j + 1, QualityLabel.MISPLACED,
                                        FLAT_MATCH_SCORE))
                break

    for i in range(n):
        if labels[i] is not None:
            continue
        best = ZERO
        best_j = -1
        for j in range(m):
            if taken[j]:
                continue
            score = sim(plan[i], gt[j])
            if score > best:
                best = score
                best_j = j
        if best_j >= 0:
            label = (QualityLabel.SAME_ACT if plan[i].key[0] == gt[best_j].key[0]
                     else QualityLabel.DIFF_ACT)
            labels[i] = label
            scores[i] = best
            taken[best_j] = True
            pairs.append(ActionPair(i + 1, best_j + 1, label, best))

    unpaired = []
    for i in range(n):
        if labels[i] is None:
            labels[i] = QualityLabel.REDUNDANT
            unpaired.append(i + 1)

    result = PairingResult(plan, gt, tuple(pairs), tuple(scores), tuple(unpaired))
    aqm = ActionQualityMap(tuple(labels), variant="positional")  # type: ignore[arg-type]
    return result, aqm


def non_positional_aqm(aqm: ActionQualityMap, pairing: PairingResult,
                       provider: NameSimilarityProvider | None = None) -> ActionQualityMap:
    """Position-agnostic relabelling: misplaced becomes correct and redundant
    actions are relabelled against the full (re-usable) ground-truth pool;
    redundant survives only at zero similarity to every ground-truth action."""
    if provider is None:
        provider = exact_name_similarity
    plan, gt = pairing.plan, pairing.gt
    gt_names = {action.key[0] for action in gt}
    labels = list(aqm.labels)
    for i, label in enumerate(labels):
        if label is QualityLabel.MISPLACED:
            labels[i] = QualityLabel.CORRECT
        elif label is QualityLabel.REDUNDANT:
            action = plan[i]
            if action.key[0] in gt_names:
                labels[i] = QualityLabel.SAME_ACT
            elif any(action_similarity(action, g, provider) > ZERO for g in gt):
                labels[i] = QualityLabel.DIFF_ACT
    return ActionQualityMap(tuple(labels), variant="non_positional")


def aqm_score(aqm: ActionQualityMap) -> Fraction:
    """Mean label value scaled to [0, 1]; an empty map scores 0."""
    if len(aqm) == 0:
        return ZERO
    total = sum(LABEL_VALUES[label] for label in aqm.labels)
    return Fraction(total, 4 * len(aqm))
