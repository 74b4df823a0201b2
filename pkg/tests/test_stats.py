"""Assessment math against independent oracles.

The tau-b oracle enumerates all pairs (O(n^2)) and applies the
tie-corrected formula directly; the implementation under test uses merge
counting, so the two share no code path.
"""

from __future__ import annotations

import math
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from eakit.llm.bank import default_question_bank
from eakit.stats import (
    AgreementReport,
    BadLevel,
    DegenerateInput,
    IncompleteMatrix,
    LengthMismatch,
    OutOfRange,
    RatingMatrix,
    RatingRecord,
    TooFewSamples,
    UnknownQuestion,
    aggregate,
    grade_band,
    kendall_tau_b,
    rater_agreement,
    read_ratings_csv,
    tau_confidence_interval,
)


def brute_force_tau_b(x, y) -> float:
    """Oracle: concordant/discordant counts over every pair."""
    n = len(x)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            sx = (x[i] > x[j]) - (x[i] < x[j])
            sy = (y[i] > y[j]) - (y[i] < y[j])
            if sx * sy > 0:
                concordant += 1
            elif sx * sy < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    n1 = sum(t * (t - 1) // 2 for t in Counter(x).values())
    n2 = sum(t * (t - 1) // 2 for t in Counter(y).values())
    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


score_vectors = st.lists(st.integers(1, 5), min_size=2, max_size=50)


class TestKendallTauB:
    def test_perfect_agreement(self):
        assert kendall_tau_b([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0

    def test_perfect_reversal(self):
        assert kendall_tau_b([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0

    def test_tied_example_matches_oracle(self):
        x, y = [1, 1, 2, 3], [1, 2, 2, 3]
        expected = brute_force_tau_b(x, y)
        assert expected == pytest.approx(0.8)  # 4 concordant, 0 discordant
        assert kendall_tau_b(x, y) == pytest.approx(expected, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            kendall_tau_b([1, 2], [1, 2, 3])

    @pytest.mark.parametrize(
        "x,y",
        [
            ([2, 2, 2], [1, 2, 3]),
            ([1, 2, 3], [4, 4, 4]),
            ([1], [1]),
            ([], []),
        ],
    )
    def test_degenerate_inputs(self, x, y):
        with pytest.raises(DegenerateInput):
            kendall_tau_b(x, y)

    @given(score_vectors, st.randoms(use_true_random=False))
    def test_matches_oracle_on_random_vectors(self, x, rng):
        y = [rng.randint(1, 5) for _ in x]
        if len(set(x)) == 1 or len(set(y)) == 1:
            return
        assert kendall_tau_b(x, y) == pytest.approx(
            brute_force_tau_b(x, y), abs=1e-12
        )

    @given(score_vectors, st.randoms(use_true_random=False))
    def test_symmetry(self, x, rng):
        y = [rng.randint(1, 5) for _ in x]
        if len(set(x)) == 1 or len(set(y)) == 1:
            return
        assert kendall_tau_b(x, y) == pytest.approx(kendall_tau_b(y, x), abs=1e-15)

    @given(score_vectors, st.randoms(use_true_random=False))
    def test_invariant_under_monotone_transform(self, x, rng):
        y = [rng.randint(1, 5) for _ in x]
        if len(set(x)) == 1 or len(set(y)) == 1:
            return
        doubled = [2 * value for value in x]
        assert kendall_tau_b(doubled, y) == pytest.approx(
            kendall_tau_b(x, y), abs=1e-15
        )

    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = random.Random(7)
        for _ in range(25):
            x = [rng.randint(1, 5) for _ in range(22)]
            y = [rng.randint(1, 5) for _ in range(22)]
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            expected = scipy_stats.kendalltau(x, y, variant="b").statistic
            assert kendall_tau_b(x, y) == pytest.approx(expected, abs=1e-12)


class TestConfidenceInterval:
    def test_symmetric_around_zero(self):
        low, high = tau_confidence_interval(0.0, 200)
        assert low == pytest.approx(-high)

    def test_clamped_at_one(self):
        low, high = tau_confidence_interval(1.0, 10)
        assert high == 1.0
        assert low < 1.0

    def test_width_formula(self):
        # independent arithmetic for n=22 at 95%
        z = 1.959964
        half = z * math.sqrt(2 * (2 * 22 + 5) / (9 * 22 * 21))
        # tau=0.75: the raw upper end (1.0509) clamps to 1.0, so only the
        # lower end shows the formula directly
        low, high = tau_confidence_interval(0.75, 22)
        assert low == pytest.approx(0.75 - half, abs=1e-6)
        assert high == 1.0
        # tau=0: no clamping, full width is 2 z sigma
        low, high = tau_confidence_interval(0.0, 22)
        assert high - low == pytest.approx(2 * half, abs=1e-6)

    def test_bad_level(self):
        for level in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(BadLevel):
                tau_confidence_interval(0.5, 10, level)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            tau_confidence_interval(0.5, 2)

    def test_tau_out_of_range(self):
        with pytest.raises(OutOfRange):
            tau_confidence_interval(1.5, 10)

    def test_interval_brackets_tau(self):
        for tau in (-1.0, -0.3, 0.0, 0.6, 1.0):
            low, high = tau_confidence_interval(tau, 22)
            assert low <= tau <= high
            assert -1.0 <= low and high <= 1.0


class TestRatingMatrix:
    def _records(self):
        return [
            RatingRecord("Q1", "r1", 1),
            RatingRecord("Q1", "r2", 2),
            RatingRecord("Q2", "r1", 3),
            RatingRecord("Q2", "r2", 3),
        ]

    def test_build_and_read(self):
        matrix = RatingMatrix.from_records(self._records())
        assert matrix.questions == ("Q1", "Q2")
        assert matrix.raters == ("r1", "r2")
        assert matrix.rater_scores("r1") == [1, 3]
        assert matrix.question_mean("Q1") == 1.5

    def test_missing_cell(self):
        with pytest.raises(IncompleteMatrix):
            RatingMatrix.from_records(self._records()[:-1])

    def test_duplicate_cell(self):
        with pytest.raises(IncompleteMatrix):
            RatingMatrix.from_records(self._records() + [RatingRecord("Q1", "r1", 4)])

    def test_wrong_rater_count(self):
        with pytest.raises(IncompleteMatrix):
            RatingMatrix.from_records(
                [RatingRecord("Q1", "r1", 1)]
            )
        with pytest.raises(IncompleteMatrix):
            RatingMatrix.from_records(
                self._records()
                + [RatingRecord("Q1", "r3", 1), RatingRecord("Q2", "r3", 1)]
            )

    def test_score_bounds(self):
        with pytest.raises(OutOfRange):
            RatingRecord("Q1", "r1", 0)
        with pytest.raises(OutOfRange):
            RatingRecord("Q1", "r1", 6)

    def test_read_csv(self):
        matrix = read_ratings_csv(FIXTURES / "ratings_table3.csv")
        assert len(matrix.questions) == 22
        assert matrix.raters == ("r1", "r2")

    def test_read_csv_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("question,who,score\nQ1,r1,1\n", encoding="utf-8")
        with pytest.raises(IncompleteMatrix):
            read_ratings_csv(path)


class TestAggregate:
    def test_published_category_means(self):
        matrix = read_ratings_csv(FIXTURES / "ratings_table3.csv")
        report = aggregate(matrix, default_question_bank())
        means = {
            category.value: stats.mean
            for category, stats in report.per_category.items()
        }
        counts = {
            category.value: stats.count
            for category, stats in report.per_category.items()
        }
        assert counts == {"Structural": 8, "Semantic": 7, "Generation": 7}
        assert means["Structural"] == pytest.approx(1.125)
        assert means["Semantic"] == pytest.approx(25 / 14)
        assert means["Generation"] == pytest.approx(19 / 14)
        assert report.overall == pytest.approx(1.40, abs=0.02)

    def test_overall_equals_flat_mean(self):
        matrix = read_ratings_csv(FIXTURES / "ratings_table3.csv")
        report = aggregate(matrix, default_question_bank())
        flat = sum(matrix.question_mean(q) for q in matrix.questions) / len(
            matrix.questions
        )
        assert report.overall == pytest.approx(flat, abs=1e-12)

    def test_constant_scores(self):
        records = []
        for item in default_question_bank():
            records.append(RatingRecord(item.id, "a", 1))
            records.append(RatingRecord(item.id, "b", 1))
        report = aggregate(RatingMatrix.from_records(records), default_question_bank())
        assert report.overall == 1.0
        assert all(s.mean == 1.0 for s in report.per_category.values())

    def test_two_point_mean(self):
        records = [RatingRecord("S1", "a", 1), RatingRecord("S1", "b", 2)]
        matrix = RatingMatrix.from_records(records)
        report = aggregate(matrix, default_question_bank())
        assert report.overall == 1.5

    def test_unknown_question(self):
        records = [RatingRecord("ZZZ", "a", 1), RatingRecord("ZZZ", "b", 1)]
        with pytest.raises(UnknownQuestion):
            aggregate(RatingMatrix.from_records(records), default_question_bank())


class TestGradeBand:
    @pytest.mark.parametrize(
        "overall,expected",
        [
            (1.40, "A"),
            (1.5, "A"),
            (2.5, "B"),
            (3.0, "C"),
            (4.0, "D"),
            (4.6, "F"),
            (5.0, "F"),
        ],
    )
    def test_default_bands(self, overall, expected):
        assert grade_band(overall) == expected

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            grade_band(0.5)
        with pytest.raises(OutOfRange):
            grade_band(5.5)

    def test_custom_thresholds(self):
        assert grade_band(2.0, thresholds=((1.0, "gold"), (3.0, "silver"))) == "silver"
        assert grade_band(4.9, thresholds=((1.0, "gold"),)) == "F"


class TestAgreementReport:
    def test_identical_raters(self):
        records = []
        for index, item in enumerate(default_question_bank()):
            score = 1 + (index % 4)
            records.append(RatingRecord(item.id, "a", score))
            records.append(RatingRecord(item.id, "b", score))
        report = rater_agreement(RatingMatrix.from_records(records))
        assert report.tau_b == 1.0
        assert report.percent == 100.0
        assert report.n == 22

    def test_report_shape(self):
        matrix = read_ratings_csv(FIXTURES / "ratings_table3.csv")
        report = rater_agreement(matrix)
        assert isinstance(report, AgreementReport)
        assert report.ci_low <= report.tau_b <= report.ci_high
        data = report.to_json_dict()
        assert set(data) == {"tau_b", "ci", "percent", "n"}
