import mpmath
import numpy as np
import pytest

from sentpair import metrics as mx


@pytest.fixture
def rng():
    return np.random.RandomState(23)


def pearson_oracle(pred, gold):
    with mpmath.workdps(60):
        p = [mpmath.mpf(repr(float(v))) for v in pred]
        g = [mpmath.mpf(repr(float(v))) for v in gold]
        n = len(p)
        mp = mpmath.fsum(p) / n
        mg = mpmath.fsum(g) / n
        cov = mpmath.fsum((a - mp) * (b - mg) for a, b in zip(p, g))
        vp = mpmath.fsum((a - mp) ** 2 for a in p)
        vg = mpmath.fsum((b - mg) ** 2 for b in g)
        return float(cov / mpmath.sqrt(vp * vg))


class TestPearson:
    def test_perfect_correlation(self):
        x = [1.0, 2.0, 5.0, 3.0]
        assert mx.pearson(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_anticorrelation(self):
        gold = [1.0, 2.0, 5.0, 3.0]
        pred = [-v + 7.0 for v in gold]
        assert mx.pearson(pred, gold) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_high_precision_oracle(self, rng):
        pred = rng.normal(size=10) * 2 + 3
        gold = pred * 0.5 + rng.normal(size=10)
        assert abs(mx.pearson(pred, gold) - pearson_oracle(pred, gold)) <= 1e-12

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError, match="variance"):
            mx.pearson([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal-length"):
            mx.pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_bounded(self, rng):
        for _ in range(100):
            r = mx.pearson(rng.normal(size=8), rng.normal(size=8))
            assert -1.0 <= r <= 1.0


class TestSpearman:
    def test_monotone_transform_gives_one(self):
        gold = [1.0, 2.0, 3.0, 4.0]
        pred = [v ** 3 for v in gold]
        assert mx.spearman(pred, gold) == pytest.approx(1.0, abs=1e-12)

    def test_ties_use_average_ranks(self):
        # ranks of [1, 2, 2, 4]: [1, 2.5, 2.5, 4]
        ranks = mx._average_ranks(np.array([1.0, 2.0, 2.0, 4.0]))
        assert np.array_equal(ranks, np.array([1.0, 2.5, 2.5, 4.0]))

    def test_reversed_order_gives_minus_one(self):
        gold = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert mx.spearman(list(reversed(gold)), gold) == pytest.approx(-1.0, abs=1e-12)


class TestMse:
    def test_exact_match_zero(self):
        assert mx.mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_computed(self):
        assert mx.mse([1.0, 3.0], [2.0, 5.0]) == pytest.approx(2.5, abs=1e-15)


class TestAccuracy:
    def test_identical(self):
        assert mx.accuracy([0, 1, 2], [0, 1, 2]) == 1.0

    def test_quarter(self):
        assert mx.accuracy([0, 0, 0, 0], [0, 1, 1, 1]) == 0.25

    def test_counting_oracle(self, rng):
        pred = rng.randint(0, 3, size=1000).tolist()
        gold = rng.randint(0, 3, size=1000).tolist()
        want = sum(1 for p, g in zip(pred, gold) if p == g) / 1000
        assert mx.accuracy(pred, gold) == want

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            mx.accuracy([], [])


class TestConfusion:
    def test_counts_sum_to_examples(self, rng):
        pred = rng.randint(0, 3, size=50).tolist()
        gold = rng.randint(0, 3, size=50).tolist()
        counts = mx.confusion(pred, gold, 3)
        assert counts.sum() == 50
        assert counts[1, 2] == sum(1 for p, g in zip(pred, gold) if g == 1 and p == 2)


class TestReport:
    def test_format_mentions_available_metrics(self):
        report = mx.MetricsReport(n_examples=4, pearson_r=0.5, spearman_rho=0.4, mse=1.0)
        text = report.format()
        assert "pearson" in text and "0.5" in text
        assert "accuracy" not in text

    def test_format_confusion(self):
        counts = np.array([[2, 0], [1, 1]])
        report = mx.MetricsReport(n_examples=4, accuracy=0.75, confusion=counts,
                                  labels=("YES", "NO"))
        text = report.format()
        assert "YES" in text and "confusion" in text
