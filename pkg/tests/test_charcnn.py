import numpy as np
import pytest

from sentpair import autodiff as ad
from sentpair import charcnn as cc
from sentpair import embeddings as emb
from sentpair.autodiff import Tape, constant, parameter


@pytest.fixture
def rng():
    return np.random.RandomState(42)


@pytest.fixture
def small_params(rng):
    return cc.init_char_cnn(rng, l0=6, width=3, frames=8, hidden=5, out_dim=7)


def conv_oracle(grid, weight, bias, width):
    """Loop-based temporal conv + relu, independent of the library kernels."""
    t_out = grid.shape[0] - width + 1
    frames = weight.shape[0]
    out = np.zeros((t_out, frames))
    for t in range(t_out):
        window = grid[t:t + width].reshape(-1)
        for f in range(frames):
            v = bias[f]
            for k in range(window.size):
                v += window[k] * weight[f, k]
            out[t, f] = v if v > 0 else 0.0
    return out


class TestTemporalConv:
    def test_output_shape(self, small_params):
        grid = constant(emb.quantize("abcdef", 6))
        out = cc.temporal_conv(grid, small_params.conv_w, small_params.conv_b, 3)
        assert out.shape == (4, 8)

    def test_matches_loop_oracle(self, rng):
        for _ in range(25):
            l0 = rng.randint(3, 9)
            width = rng.randint(1, min(4, l0) + 1)
            frames = rng.randint(1, 6)
            grid = rng.normal(size=(l0, 4))
            weight = rng.normal(size=(frames, width * 4))
            bias = rng.normal(size=(frames,))
            got = cc.temporal_conv(constant(grid), constant(weight), constant(bias), width)
            want = conv_oracle(grid, weight, bias, width)
            assert np.max(np.abs(got.data - want)) <= 1e-12

    def test_relu_applied(self, small_params):
        grid = constant(emb.quantize("zzzzzz", 6))
        out = cc.temporal_conv(grid, small_params.conv_w, small_params.conv_b, 3)
        assert np.all(out.data >= 0.0)


class TestMaxOverTime:
    def test_picks_column_maxima(self):
        frames = constant(np.array([[1.0, 5.0], [3.0, 2.0], [2.0, 4.0]]))
        out = cc.max_over_time(frames)
        assert np.array_equal(out.data, np.array([3.0, 5.0]))

    def test_tie_routes_gradient_to_first_row(self):
        x = parameter(np.array([[2.0, 0.0], [2.0, 1.0]]))
        with Tape() as tape:
            loss = ad.sum_all(cc.max_over_time(x))
            tape.backward(loss)
        assert np.array_equal(x.grad, np.array([[1.0, 0.0], [0.0, 1.0]]))


class TestHighway:
    def test_gate_shut_passes_input_through(self, rng):
        p = cc.init_char_cnn(rng, l0=4, width=3, frames=6, hidden=4, out_dim=3)
        p.gate_b.data[:] = -40.0
        y = constant(rng.normal(size=(4,)))
        z = cc.highway(y, p)
        assert np.max(np.abs(z.data - y.data)) <= 1e-12

    def test_gate_open_passes_transform(self, rng):
        p = cc.init_char_cnn(rng, l0=4, width=3, frames=6, hidden=4, out_dim=3)
        p.gate_b.data[:] = 40.0
        p.gate_w.data[:] = 0.0
        y = constant(rng.normal(size=(4,)))
        z = cc.highway(y, p)
        want = np.maximum(y.data @ p.hw_w.data + p.hw_b.data, 0.0)
        assert np.max(np.abs(z.data - want)) <= 1e-12

    def test_vector_and_batched_rows_agree(self, rng):
        p = cc.init_char_cnn(rng, l0=4, width=3, frames=6, hidden=5, out_dim=3)
        batch = rng.normal(size=(4, 5))
        rows = [cc.highway(constant(batch[i]), p).data for i in range(4)]
        stacked = cc.highway(constant(batch), p).data
        assert np.max(np.abs(stacked - np.stack(rows))) <= 1e-12


class TestCharEmbed:
    def test_output_shape_and_determinism(self, small_params):
        a = cc.char_embed("cat", small_params)
        b = cc.char_embed("cat", small_params)
        assert a.shape == (7,)
        assert np.array_equal(a.data, b.data)

    def test_every_token_embeddable(self, small_params):
        for token in ["a", "zebra91", "...", "héllo", "x" * 40]:
            out = cc.char_embed(token, small_params)
            assert out.shape == (7,)
            assert np.all(np.isfinite(out.data))

    def test_sentence_path_matches_per_token(self, small_params):
        tokens = ["the", "dog4", "ran"]
        stacked = cc.char_embed_tokens(tokens, small_params)
        assert stacked.shape == (3, 7)
        for i, token in enumerate(tokens):
            single = cc.char_embed(token, small_params)
            assert np.max(np.abs(stacked.data[i] - single.data)) <= 1e-12

    def test_empty_sentence_rejected(self, small_params):
        with pytest.raises(ValueError, match="empty"):
            cc.char_embed_tokens([], small_params)

    def test_gradients_match_finite_differences(self, rng):
        p = cc.init_char_cnn(rng, l0=5, width=2, frames=4, hidden=3, out_dim=3)
        params = [tensor for _, tensor in p.named_tensors()]

        # Tokens fill l0 with in-alphabet chars so no conv window is all-zero:
        # a zero window with zero bias sits exactly on the relu kink, where
        # central differences and the subgradient legitimately disagree.
        def build():
            out = cc.char_embed_tokens(["ab1de", "cd0xy"], p)
            return ad.sum_all(ad.mul(out, out))

        report = ad.grad_check(build, params, max_entries=6, rng=np.random.RandomState(0))
        assert report.passed(1e-6), report.format()


class TestInit:
    def test_shapes_and_gate_bias(self, rng):
        p = cc.init_char_cnn(rng, l0=16, width=3, frames=100, hidden=50, out_dim=100)
        assert p.conv_w.shape == (100, 3 * 36)
        assert p.proj_in_w.shape == (100, 50)
        assert p.hw_w.shape == (50, 50)
        assert p.proj_out_w.shape == (50, 100)
        assert np.all(p.gate_b.data == -2.0)
        assert np.all(p.conv_b.data == 0.0)

    def test_l0_shorter_than_width_rejected(self, rng):
        with pytest.raises(ValueError, match="width"):
            cc.init_char_cnn(rng, l0=2, width=3)

    def test_all_tensors_trainable_and_named(self, small_params):
        names = []
        for name, tensor in small_params.named_tensors():
            assert tensor.requires_grad
            names.append(name)
        assert len(names) == len(set(names)) == 10
