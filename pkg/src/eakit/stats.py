"""Dual-rater assessment math: Kendall tau-b, its confidence interval,
and category-weighted rating aggregation.

Ratings are 1 (totally correct) to 5 (incorrect), one score per question
per rater, exactly two raters. Agreement between the raters is measured
with the tie-corrected Kendall coefficient (tau-b): 1-to-5 integer scales
over a couple dozen questions guarantee heavy ties, so the uncorrected
variant would be misleading. The confidence interval uses the normal
approximation with the null variance 2(2n+5)/(9n(n-1)); it is our choice
of method and reports are labelled accordingly.

The overall rating is the question-count-weighted mean of the category
means, which coincides with the plain mean of all per-question scores.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Any, Iterable, Mapping, Sequence

from .llm.bank import QuestionCategory, QuestionItem

__all__ = [
    "RatingRecord",
    "RatingMatrix",
    "AgreementReport",
    "CategoryStats",
    "CategoryReport",
    "LengthMismatch",
    "DegenerateInput",
    "BadLevel",
    "TooFewSamples",
    "UnknownQuestion",
    "IncompleteMatrix",
    "OutOfRange",
    "kendall_tau_b",
    "tau_confidence_interval",
    "rater_agreement",
    "aggregate",
    "grade_band",
    "read_ratings_csv",
    "DEFAULT_GRADE_THRESHOLDS",
]


class StatsError(ValueError):
    """Base class for assessment-math input errors."""


class LengthMismatch(StatsError):
    """Score vectors differ in length."""


class DegenerateInput(StatsError):
    """The tau-b denominator is undefined (a constant vector, or n < 2)."""


class BadLevel(StatsError):
    """Confidence level outside (0, 1)."""


class TooFewSamples(StatsError):
    """Too few observations for an interval."""


class UnknownQuestion(StatsError):
    """A rated question id is absent from the question bank."""


class IncompleteMatrix(StatsError):
    """Not every (question, rater) cell is filled exactly once."""


class OutOfRange(StatsError):
    """A rating value outside the 1-to-5 scale."""


@dataclass(frozen=True)
class RatingRecord:
    """One rater's score for one question."""

    question_id: str
    rater_id: str
    score: int

    def __post_init__(self) -> None:
        if not 1 <= self.score <= 5:
            raise OutOfRange(
                f"score {self.score} for {self.question_id!r} is outside 1..5"
            )


@dataclass(frozen=True)
class RatingMatrix:
    """Complete question-by-rater score table for exactly two raters."""

    questions: tuple[str, ...]
    raters: tuple[str, str]
    scores: Mapping[tuple[str, str], int]  # (question_id, rater_id) -> score

    @classmethod
    def from_records(cls, records: Iterable[RatingRecord]) -> "RatingMatrix":
        """Build and check completeness: every cell filled, no duplicates."""
        scores: dict[tuple[str, str], int] = {}
        questions: list[str] = []
        raters: list[str] = []
        for record in records:
            key = (record.question_id, record.rater_id)
            if key in scores:
                raise IncompleteMatrix(
                    f"duplicate rating for question {record.question_id!r} "
                    f"by rater {record.rater_id!r}"
                )
            scores[key] = record.score
            if record.question_id not in questions:
                questions.append(record.question_id)
            if record.rater_id not in raters:
                raters.append(record.rater_id)
        if len(raters) != 2:
            raise IncompleteMatrix(
                f"expected exactly two raters, found {len(raters)}"
            )
        for question_id in questions:
            for rater_id in raters:
                if (question_id, rater_id) not in scores:
                    raise IncompleteMatrix(
                        f"missing rating for question {question_id!r} by "
                        f"rater {rater_id!r}"
                    )
        return cls(tuple(questions), (raters[0], raters[1]), scores)

    def rater_scores(self, rater_id: str) -> list[int]:
        """Scores of one rater, in question order."""
        return [self.scores[(q, rater_id)] for q in self.questions]

    def question_mean(self, question_id: str) -> float:
        return (
            self.scores[(question_id, self.raters[0])]
            + self.scores[(question_id, self.raters[1])]
        ) / 2.0


def read_ratings_csv(path: str | Path) -> RatingMatrix:
    """Load a ``question_id,rater_id,score`` CSV into a matrix."""
    records: list[RatingRecord] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        expected = {"question_id", "rater_id", "score"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise IncompleteMatrix(
                "ratings CSV must have header question_id,rater_id,score"
            )
        for row in reader:
            records.append(
                RatingRecord(
                    row["question_id"].strip(),
                    row["rater_id"].strip(),
                    int(row["score"]),
                )
            )
    return RatingMatrix.from_records(records)


def _tie_term(values: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for value in values:
        counts[value] = counts.get(value, 0) + 1
    return sum(t * (t - 1) // 2 for t in counts.values())


def _joint_tie_term(pairs: Sequence[tuple[int, int]]) -> int:
    counts: dict[tuple[int, int], int] = {}
    for pair in pairs:
        counts[pair] = counts.get(pair, 0) + 1
    return sum(t * (t - 1) // 2 for t in counts.values())


def _count_inversions(values: list[int]) -> int:
    """Pairs (i < j) with values[i] > values[j], by merge counting."""
    if len(values) < 2:
        return 0
    mid = len(values) // 2
    left = values[:mid]
    right = values[mid:]
    inversions = _count_inversions(left) + _count_inversions(right)
    merged: list[int] = []
    i = j = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            inversions += len(left) - i
            merged.append(right[j])
            j += 1
        else:
            merged.append(left[i])
            i += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    values[:] = merged
    return inversions


def kendall_tau_b(x: Sequence[int], y: Sequence[int]) -> float:
    """Tie-corrected Kendall rank correlation between two score vectors.

    tau_b = (C - D) / sqrt((n0 - n1)(n0 - n2)) with n0 = n(n-1)/2 and
    n1, n2 the per-vector tie corrections. Computed by sorting on x and
    merge-counting discordant swaps in y, O(n log n); the test suite holds
    this against a brute-force pair enumeration.
    """
    if len(x) != len(y):
        raise LengthMismatch(f"got vectors of length {len(x)} and {len(y)}")
    n = len(x)
    n0 = n * (n - 1) // 2
    n1 = _tie_term(x)
    n2 = _tie_term(y)
    if n0 == 0 or n0 == n1 or n0 == n2:
        raise DegenerateInput(
            "tau-b is undefined when a vector is constant or has fewer "
            "than two entries"
        )
    pairs = sorted(zip(x, y))
    n3 = _joint_tie_term(pairs)
    swaps = _count_inversions([yi for _, yi in pairs])
    numerator = n0 - n1 - n2 + n3 - 2 * swaps
    return numerator / math.sqrt((n0 - n1) * (n0 - n2))


def tau_confidence_interval(
    tau: float, n: int, level: float = 0.95
) -> tuple[float, float]:
    """Normal-approximation interval around tau, clamped to [-1, 1].

    Half-width is z * sqrt(2(2n+5) / (9n(n-1))); z is 1.959964 at the
    default 95% level.
    """
    if not 0.0 < level < 1.0:
        raise BadLevel(f"confidence level must be in (0, 1), got {level}")
    if n < 3:
        raise TooFewSamples(f"need at least 3 observations, got {n}")
    if not -1.0 <= tau <= 1.0:
        raise OutOfRange(f"tau must be in [-1, 1], got {tau}")
    z = NormalDist().inv_cdf((1.0 + level) / 2.0)
    half_width = z * math.sqrt(2.0 * (2 * n + 5) / (9.0 * n * (n - 1)))
    return (max(tau - half_width, -1.0), min(tau + half_width, 1.0))


@dataclass(frozen=True)
class AgreementReport:
    """Two-rater agreement: tau-b with its 95% interval."""

    tau_b: float
    ci_low: float
    ci_high: float
    n: int

    @property
    def percent(self) -> float:
        """The coefficient expressed as a percentage, for comparability."""
        return self.tau_b * 100.0

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "tau_b": self.tau_b,
            "ci": [self.ci_low, self.ci_high],
            "percent": self.percent,
            "n": self.n,
        }


def rater_agreement(matrix: RatingMatrix, level: float = 0.95) -> AgreementReport:
    """Kendall tau-b between the two raters' score vectors."""
    x = matrix.rater_scores(matrix.raters[0])
    y = matrix.rater_scores(matrix.raters[1])
    tau = kendall_tau_b(x, y)
    low, high = tau_confidence_interval(tau, len(x), level)
    return AgreementReport(tau, low, high, len(x))


@dataclass(frozen=True)
class CategoryStats:
    mean: float
    count: int


@dataclass(frozen=True)
class CategoryReport:
    """Per-category rating means and their count-weighted overall mean."""

    per_category: Mapping[QuestionCategory, CategoryStats]
    overall: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "categories": {
                category.value.lower(): {"mean": stats.mean, "count": stats.count}
                for category, stats in self.per_category.items()
            },
            "overall": self.overall,
        }


def aggregate(matrix: RatingMatrix, bank: Sequence[QuestionItem]) -> CategoryReport:
    """Average the two raters per question, then per category.

    The overall value is the question-count-weighted mean of the category
    means, which equals the flat mean of all per-question scores.
    """
    categories_by_id = {item.id: item.category for item in bank}
    question_scores: dict[QuestionCategory, list[float]] = {}
    for question_id in matrix.questions:
        category = categories_by_id.get(question_id)
        if category is None:
            raise UnknownQuestion(
                f"rated question {question_id!r} is not in the question bank"
            )
        question_scores.setdefault(category, []).append(
            matrix.question_mean(question_id)
        )

    per_category = {
        category: CategoryStats(sum(scores) / len(scores), len(scores))
        for category, scores in question_scores.items()
    }
    total = sum(stats.count for stats in per_category.values())
    overall = (
        sum(stats.mean * stats.count for stats in per_category.values()) / total
    )
    return CategoryReport(per_category, overall)


#: Upper bounds of the default grade bands; anything above the last bound
#: is an F. The mapping is configurable because any single scale is a
#: convention.
DEFAULT_GRADE_THRESHOLDS: tuple[tuple[float, str], ...] = (
    (1.5, "A"),
    (2.5, "B"),
    (3.5, "C"),
    (4.5, "D"),
)


def grade_band(
    overall: float,
    thresholds: Sequence[tuple[float, str]] = DEFAULT_GRADE_THRESHOLDS,
) -> str:
    """Letter grade for an overall rating (bounds are inclusive)."""
    if not 1.0 <= overall <= 5.0:
        raise OutOfRange(f"overall rating must be in [1, 5], got {overall}")
    for bound, label in thresholds:
        if overall <= bound:
            return label
    return "F"
