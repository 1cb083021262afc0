import math

import mpmath
import numpy as np
import pytest

from sentpair import autodiff as ad
from sentpair import objectives as obj
from sentpair.autodiff import Tape, constant, parameter


@pytest.fixture
def rng():
    return np.random.RandomState(17)


def kl_oracle(p, logits):
    """Extended-precision KL(p || softmax(logits))."""
    with mpmath.workdps(60):
        zs = [mpmath.mpf(repr(float(v))) for v in logits]
        m = max(zs)
        exps = [mpmath.e ** (z - m) for z in zs]
        total = mpmath.fsum(exps)
        acc = mpmath.mpf(0)
        for pi, e in zip(p, exps):
            if pi > 0:
                q = e / total
                pi = mpmath.mpf(repr(float(pi)))
                acc += pi * (mpmath.log(pi) - mpmath.log(q))
        return float(acc)


class TestSparseTarget:
    def test_fractional_example(self):
        p = obj.sparse_target(3.6, 5)
        assert np.max(np.abs(p - np.array([0.0, 0.0, 0.4, 0.6, 0.0]))) <= 1e-15

    def test_integer_scores_one_hot(self):
        for y in range(1, 6):
            p = obj.sparse_target(float(y), 5)
            want = np.zeros(5)
            want[y - 1] = 1.0
            assert np.array_equal(p, want)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            obj.sparse_target(0.5, 5)
        with pytest.raises(ValueError, match="outside"):
            obj.sparse_target(5.0001, 5)

    def test_property_sweep(self, rng):
        r = np.arange(1, 6, dtype=np.float64)
        for y in rng.uniform(1.0, 5.0, size=10000):
            p = obj.sparse_target(float(y), 5)
            assert np.all(p >= 0.0)
            assert abs(p.sum() - 1.0) <= 1e-12
            assert abs(r @ p - y) <= 1e-12
            support = np.nonzero(p)[0]
            assert len(support) <= 2
            if len(support) == 2:
                assert support[1] - support[0] == 1


class TestKlToTarget:
    def test_one_hot_against_uniform_is_log_k(self):
        p = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
        loss = obj.kl_to_target(p, constant(np.zeros(5)))
        assert abs(loss.item() - math.log(5.0)) <= 1e-12

    def test_matching_distributions_give_zero(self, rng):
        logits = rng.normal(size=5)
        p = np.exp(logits - logits.max())
        p /= p.sum()
        loss = obj.kl_to_target(p, constant(logits))
        assert abs(loss.item()) <= 1e-14

    def test_matches_high_precision_oracle(self, rng):
        for _ in range(50):
            k = rng.randint(2, 7)
            y = rng.uniform(1.0, float(k))
            p = obj.sparse_target(float(y), k)
            logits = rng.normal(size=k) * 3
            got = obj.kl_to_target(p, constant(logits)).item()
            assert abs(got - kl_oracle(p, logits)) <= 1e-12

    def test_nonnegative(self, rng):
        for _ in range(200):
            p = obj.sparse_target(float(rng.uniform(1, 5)), 5)
            loss = obj.kl_to_target(p, constant(rng.normal(size=5) * 4))
            assert loss.item() >= 0.0


class TestRelatednessLoss:
    def test_uniform_one_hot_closed_form(self, rng):
        head = obj.OrdinalHead(w=parameter(np.zeros((4, 5))), b=parameter(np.zeros(5)))
        loss = obj.relatedness_loss([constant(rng.normal(size=4))], [5.0], head, 0.0, [])
        assert abs(loss.item() - math.log(5.0)) <= 1e-12

    def test_l2_term_added(self, rng):
        head = obj.init_ordinal_head(rng, 4)
        xs = [constant(rng.normal(size=4))]
        lam = 0.01
        plain = obj.relatedness_loss(xs, [2.5], head, 0.0, [])
        reg = obj.relatedness_loss(xs, [2.5], head, lam, [head.w, head.b])
        norm = np.sum(head.w.data ** 2) + np.sum(head.b.data ** 2)
        assert abs(reg.item() - plain.item() - lam / 2.0 * norm) <= 1e-12

    def test_empty_batch_rejected(self, rng):
        head = obj.init_ordinal_head(rng, 4)
        with pytest.raises(ValueError, match="nonempty"):
            obj.relatedness_loss([], [], head, 0.0, [])

    def test_negative_lambda_rejected(self, rng):
        head = obj.init_ordinal_head(rng, 4)
        with pytest.raises(ValueError, match=">= 0"):
            obj.relatedness_loss([constant(np.zeros(4))], [3.0], head, -1.0, [])

    def test_gradients_match_finite_differences(self, rng):
        head = obj.init_ordinal_head(rng, 4)
        x = parameter(rng.normal(size=4))

        def build():
            return obj.relatedness_loss([x], [3.6], head, 1e-2, [head.w, head.b])

        report = ad.grad_check(build, [x, head.w, head.b], rng=np.random.RandomState(4))
        assert report.passed(1e-6), report.format()


class TestEntailmentLoss:
    def test_zero_logits_closed_form(self, rng):
        head = obj.ClassHead(w=parameter(np.zeros((4, 3))), b=parameter(np.zeros(3)))
        xs = [constant(rng.normal(size=4)) for _ in range(3)]
        loss = obj.entailment_loss(xs, [0, 1, 2], head, 0.0, [])
        assert abs(loss.item() - math.log(3.0)) <= 1e-12

    def test_saturated_correct_logit_leaves_only_l2(self, rng):
        head = obj.ClassHead(w=parameter(np.zeros((2, 3))), b=parameter(np.array([80.0, 0.0, 0.0])))
        lam = 0.01
        loss = obj.entailment_loss([constant(np.zeros(2))], [0], head, lam, [head.b])
        l2 = lam / 2.0 * np.sum(head.b.data ** 2)
        assert abs(loss.item() - l2) <= 1e-12

    def test_invalid_label_rejected(self, rng):
        head = obj.init_class_head(rng, 4)
        with pytest.raises(ValueError, match="label"):
            obj.entailment_loss([constant(np.zeros(4))], [3], head, 0.0, [])

    def test_gradients_match_finite_differences(self, rng):
        head = obj.init_class_head(rng, 4)
        x = parameter(rng.normal(size=4))

        def build():
            return obj.entailment_loss([x], [1], head, 1e-2, [head.w, head.b])

        report = ad.grad_check(build, [x, head.w, head.b], rng=np.random.RandomState(6))
        assert report.passed(1e-6), report.format()


class TestPredictScore:
    def test_uniform_gives_midpoint(self, rng):
        head = obj.OrdinalHead(w=parameter(np.zeros((4, 5))), b=parameter(np.zeros(5)))
        assert obj.predict_score(constant(rng.normal(size=4)), head) == pytest.approx(3.0, abs=1e-12)

    def test_saturating_top_bin(self):
        head = obj.OrdinalHead(w=parameter(np.zeros((2, 5))), b=parameter(np.array([0.0, 0.0, 0.0, 0.0, 200.0])))
        assert obj.predict_score(constant(np.zeros(2)), head) == pytest.approx(5.0, abs=1e-12)

    def test_always_in_range(self, rng):
        head = obj.init_ordinal_head(rng, 6)
        for _ in range(300):
            s = obj.predict_score(constant(rng.normal(size=6) * 10), head)
            assert 1.0 <= s <= 5.0

    def test_shift_invariance(self, rng):
        for _ in range(50):
            logits = rng.normal(size=5) * 3
            c = rng.normal() * 10
            head_a = obj.OrdinalHead(w=parameter(np.zeros((1, 5))), b=parameter(logits))
            head_b = obj.OrdinalHead(w=parameter(np.zeros((1, 5))), b=parameter(logits + c))
            x = constant(np.zeros(1))
            assert abs(obj.predict_score(x, head_a) - obj.predict_score(x, head_b)) <= 1e-12

    def test_matches_independent_evaluation(self, rng):
        for _ in range(50):
            head = obj.init_ordinal_head(rng, 3)
            x = rng.normal(size=3)
            got = obj.predict_score(constant(x), head)
            logits = x @ head.w.data + head.b.data
            with mpmath.workdps(50):
                zs = [mpmath.mpf(repr(float(v))) for v in logits]
                exps = [mpmath.e ** (z - max(zs)) for z in zs]
                total = mpmath.fsum(exps)
                want = float(mpmath.fsum((i + 1) * e for i, e in enumerate(exps)) / total)
            assert abs(got - want) <= 1e-12


class TestPredictLabel:
    def test_argmax(self):
        head = obj.ClassHead(w=parameter(np.zeros((1, 3))), b=parameter(np.array([0.1, 0.7, 0.2])))
        assert obj.predict_label(constant(np.zeros(1)), head) == 1

    def test_tie_breaks_low(self):
        head = obj.ClassHead(w=parameter(np.zeros((1, 3))), b=parameter(np.array([1.0, 1.0, 0.0])))
        assert obj.predict_label(constant(np.zeros(1)), head) == 0

    def test_argmax_of_softmax_equals_argmax_of_logits(self, rng):
        for _ in range(100):
            logits = rng.normal(size=3) * 5
            probs = np.exp(logits - logits.max())
            probs /= probs.sum()
            assert int(np.argmax(probs)) == int(np.argmax(logits))
