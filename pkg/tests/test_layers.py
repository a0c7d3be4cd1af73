import numpy as np
import pytest

from gradcheck import max_rel_error, numeric_grad
from tweetsent.exceptions import AllPositionsMasked, DegenerateBatch, IndexOutOfRange
from tweetsent.neural import glorot_uniform
from tweetsent.neural import layers as L

TOL = 1e-4


class TestGlorot:
    def test_bound(self, rng):
        w = glorot_uniform((3, 3), rng)
        assert np.all(np.abs(w) <= 1.0)

    def test_deterministic(self):
        a = glorot_uniform((4, 5), np.random.default_rng(7))
        b = glorot_uniform((4, 5), np.random.default_rng(7))
        assert a.tobytes() == b.tobytes()

    def test_mean_and_spread(self, rng):
        w = glorot_uniform((100, 100), rng)
        limit = np.sqrt(6 / 200)
        assert abs(w.mean()) < 0.02
        # variance of U(-a, a) is a^2 / 3
        assert w.var() == pytest.approx(limit ** 2 / 3, rel=0.05)


class TestEmbedding:
    def test_lookup(self):
        E = np.eye(5)
        out = L.embedding_forward(np.array([[3]]), E)
        np.testing.assert_array_equal(out[0, 0], np.eye(5)[3])

    def test_pad_rows(self, rng):
        E = rng.normal(size=(4, 3))
        out = L.embedding_forward(np.zeros((2, 3), dtype=int), E)
        np.testing.assert_array_equal(out, np.broadcast_to(E[0], (2, 3, 3)))

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            L.embedding_forward(np.array([[5]]), np.zeros((5, 2)))

    def test_gradient(self, rng):
        E = rng.normal(size=(6, 3))
        idx = np.array([[1, 4, 4], [0, 1, 2]])
        R = rng.normal(size=(2, 3, 3))
        dE = L.embedding_backward(idx, R, 6)
        num = numeric_grad(lambda: np.sum(L.embedding_forward(idx, E) * R), E)
        assert max_rel_error(dE, num) < TOL
        # rows 3 and 5 never looked up
        assert not dE[[3, 5]].any()


def bn(x, gamma, beta, mode, mean=None, var=None):
    C = x.shape[-1]
    mean = np.zeros(C) if mean is None else mean.copy()
    var = np.ones(C) if var is None else var.copy()
    return L.batchnorm_forward(x, gamma, beta, mean, var, mode)


class TestBatchNorm:
    def test_constant_input(self):
        y, _ = bn(np.full((2, 3, 4), 7.0), np.ones(4), np.zeros(4), "train")
        np.testing.assert_allclose(y, 0.0, atol=1e-12)

    def test_shift(self, rng):
        x = rng.normal(size=(4, 5, 3))
        x = (x - x.reshape(-1, 3).mean(0)) / x.reshape(-1, 3).std(0)
        y, _ = bn(x, np.ones(3), np.full(3, 5.0), "train")
        np.testing.assert_allclose(y.reshape(-1, 3).mean(0), 5.0, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateBatch):
            bn(np.ones((1, 1, 3)), np.ones(3), np.zeros(3), "train")

    def test_single_position_ok_in_infer(self):
        y, _ = bn(np.ones((1, 1, 3)), np.ones(3), np.zeros(3), "infer")
        assert y.shape == (1, 1, 3)

    def test_running_stats(self, rng):
        x = rng.normal(2.0, 3.0, size=(8, 4, 2))
        mean, var = np.zeros(2), np.ones(2)
        L.batchnorm_forward(x, np.ones(2), np.zeros(2), mean, var, "train", momentum=0.99)
        flat = x.reshape(-1, 2)
        np.testing.assert_allclose(mean, 0.01 * flat.mean(0))
        np.testing.assert_allclose(var, 0.99 + 0.01 * flat.var(0))

    def test_infer_uses_running(self):
        mean, var = np.array([1.0]), np.array([4.0])
        y, _ = L.batchnorm_forward(np.array([[[3.0]]]), np.ones(1), np.zeros(1),
                                   mean, var, "infer", eps=0.0)
        assert y.item() == pytest.approx(1.0)

    @pytest.mark.parametrize("mode", ["train", "infer"])
    def test_gradient(self, rng, mode):
        x = rng.normal(size=(2, 3, 4))
        gamma, beta = rng.normal(size=4), rng.normal(size=4)
        mean, var = rng.normal(size=4), rng.uniform(0.5, 2, size=4)
        R = rng.normal(size=x.shape)

        def f():
            return np.sum(bn(x, gamma, beta, mode, mean, var)[0] * R)

        _, cache = bn(x, gamma, beta, mode, mean, var)
        dx, dg, db = L.batchnorm_backward(R, cache)
        assert max_rel_error(dx, numeric_grad(f, x)) < TOL
        assert max_rel_error(dg, numeric_grad(f, gamma)) < TOL
        assert max_rel_error(db, numeric_grad(f, beta)) < TOL


def gate_params(rng, d, H, prefix="cell", scale=0.5):
    p = {}
    for g in L.GATES:
        p[f"{prefix}.W_{g}"] = rng.normal(0, scale, (d, H))
        p[f"{prefix}.U_{g}"] = rng.normal(0, scale, (H, H))
        p[f"{prefix}.b_{g}"] = rng.normal(0, scale, H)
    return p


class TestLSTMCell:
    def test_zero_weights_tanh(self):
        p = {k: np.zeros_like(v) for k, v in gate_params(np.random.default_rng(0), 3, 2).items()}
        h, c = L.lstm_cell(np.ones((1, 3)), np.zeros((1, 2)), np.zeros((1, 2)), p, "tanh")
        np.testing.assert_array_equal(c, 0.0)
        np.testing.assert_array_equal(h, 0.0)

    def test_zero_weights_sigmoid(self):
        p = {k: np.zeros_like(v) for k, v in gate_params(np.random.default_rng(0), 3, 2).items()}
        h, c = L.lstm_cell(np.ones((1, 3)), np.zeros((1, 2)), np.zeros((1, 2)), p, "sigmoid")
        np.testing.assert_array_equal(c, 0.0)
        # o = 0.5 and sigmoid(0) = 0.5
        np.testing.assert_allclose(h, 0.25, atol=1e-15)

    def test_saturated_forget(self, rng):
        p = gate_params(rng, 3, 2)
        p["cell.b_f"][:] = 50.0
        p["cell.b_i"][:] = -50.0
        c_prev = rng.normal(size=(4, 2))
        _, c = L.lstm_cell(rng.normal(size=(4, 3)), rng.normal(size=(4, 2)), c_prev, p)
        assert np.max(np.abs(c - c_prev)) < 1e-6

    @pytest.mark.parametrize("act", ["tanh", "sigmoid"])
    def test_gradient(self, rng, act):
        p = gate_params(rng, 3, 2)
        W, U, b = L.pack_gates(p, "cell")
        x, h0, c0 = rng.normal(size=(3, 3)), rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
        Rh, Rc = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))

        def f():
            h, c, _ = L.lstm_cell_forward(x, h0, c0, W, U, b, act)
            return np.sum(h * Rh) + np.sum(c * Rc)

        _, _, cache = L.lstm_cell_forward(x, h0, c0, W, U, b, act)
        dx, dh0, dc0, dW, dU, db = L.lstm_cell_backward(Rh, Rc, cache, W, U)
        for analytic, arr in [(dx, x), (dh0, h0), (dc0, c0), (dW, W), (dU, U), (db, b)]:
            assert max_rel_error(analytic, numeric_grad(f, arr)) < TOL


class TestBiLSTM:
    def test_length_one(self, rng):
        p = gate_params(rng, 3, 2, "l.fwd")
        p.update(gate_params(rng, 3, 2, "l.bwd"))
        x = rng.normal(size=(2, 1, 3))
        out, _ = L.bilstm_forward(x, np.array([1, 1]), p, "l")
        zeros = np.zeros((2, 2))
        h_f, _ = L.lstm_cell(x[:, 0], zeros, zeros, p, prefix="l.fwd")
        h_b, _ = L.lstm_cell(x[:, 0], zeros, zeros, p, prefix="l.bwd")
        np.testing.assert_allclose(out[:, 0], np.concatenate([h_f, h_b], axis=1), atol=1e-15)

    def test_palindrome_symmetry(self, rng):
        fwd = gate_params(rng, 3, 2, "l.fwd")
        p = dict(fwd)
        p.update({k.replace("l.fwd", "l.bwd"): v for k, v in fwd.items()})
        half = rng.normal(size=(1, 2, 3))
        x = np.concatenate([half, half[:, ::-1]], axis=1)  # length-4 palindrome
        out, _ = L.bilstm_forward(x, np.array([4]), p, "l")
        swapped = np.concatenate([out[:, ::-1, 2:], out[:, ::-1, :2]], axis=2)
        np.testing.assert_allclose(out, swapped, atol=1e-12)

    def test_padding_outputs_zero(self, rng):
        p = gate_params(rng, 3, 2, "l.fwd")
        p.update(gate_params(rng, 3, 2, "l.bwd"))
        out, _ = L.bilstm_forward(rng.normal(size=(2, 5, 3)), np.array([2, 5]), p, "l")
        assert not out[0, 2:].any()
        assert np.all(out[1] != 0)

    def test_padding_does_not_leak(self, rng):
        p = gate_params(rng, 3, 2, "l.fwd")
        p.update(gate_params(rng, 3, 2, "l.bwd"))
        x = rng.normal(size=(1, 5, 3))
        y = x.copy()
        y[:, 3:] = rng.normal(size=(1, 2, 3))
        a, _ = L.bilstm_forward(x, np.array([3]), p, "l")
        b, _ = L.bilstm_forward(y, np.array([3]), p, "l")
        np.testing.assert_array_equal(a, b)

    def test_infer_ignores_dropout(self, rng):
        p = gate_params(rng, 3, 2, "l.fwd")
        p.update(gate_params(rng, 3, 2, "l.bwd"))
        x = rng.normal(size=(2, 4, 3))
        lengths = np.array([4, 2])
        a, _ = L.bilstm_forward(x, lengths, p, "l", dropout=0.4, recurrent_dropout=0.4, mode="infer")
        b, _ = L.bilstm_forward(x, lengths, p, "l", dropout=0.0, recurrent_dropout=0.0,
                                rng=np.random.default_rng(1), mode="train")
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("act", ["sigmoid", "tanh"])
    def test_gradient_with_dropout(self, rng, act):
        p = gate_params(rng, 3, 2, "l.fwd")
        p.update(gate_params(rng, 3, 2, "l.bwd"))
        x = rng.normal(size=(3, 4, 3))
        lengths = np.array([4, 1, 3])
        R = rng.normal(size=(3, 4, 4))

        def run():
            return L.bilstm_forward(x, lengths, p, "l", act, 0.4, 0.4,
                                    np.random.default_rng(3), "train")

        def f():
            return np.sum(run()[0] * R)

        _, cache = run()
        dx, grads = L.bilstm_backward(R, cache)
        assert max_rel_error(dx, numeric_grad(f, x)) < TOL
        for name, g in grads.items():
            assert max_rel_error(g, numeric_grad(f, p[name])) < TOL, name


class TestDropoutMask:
    def test_expectation(self):
        rng = np.random.default_rng(0)
        x = np.linspace(0.5, 2.0, 16)
        draws = np.stack([x * L.dropout_mask(rng, x.shape, 0.4) for _ in range(10_000)])
        np.testing.assert_allclose(draws.mean(axis=0), x, rtol=0.02)

    def test_rate_bounds(self, rng):
        with pytest.raises(ValueError):
            L.dropout_mask(rng, (2,), 1.0)


class TestAttention:
    def params(self, rng, D):
        return rng.normal(size=(D, D)), rng.normal(size=D), rng.normal(size=D)

    def test_single_position(self, rng):
        h = rng.normal(size=(2, 1, 4))
        ctx, alpha, _ = L.attention_forward(h, *self.params(rng, 4), np.ones((2, 1), bool))
        np.testing.assert_array_equal(alpha, 1.0)
        np.testing.assert_allclose(ctx, h[:, 0])

    def test_identical_steps_uniform(self, rng):
        h = np.repeat(rng.normal(size=(1, 1, 4)), 5, axis=1)
        mask = np.array([[True, True, True, False, False]])
        _, alpha, _ = L.attention_forward(h, *self.params(rng, 4), mask)
        np.testing.assert_allclose(alpha[0, :3], 1 / 3, atol=1e-15)
        assert np.all(alpha[0, 3:] == 0.0)

    def test_weights_normalized(self, rng):
        h = rng.normal(size=(3, 6, 4))
        mask = L.length_mask([6, 2, 4], 6)
        _, alpha, _ = L.attention_forward(h, *self.params(rng, 4), mask)
        assert np.all(alpha >= 0)
        np.testing.assert_allclose(alpha.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(alpha[~mask] == 0.0)

    def test_all_masked(self, rng):
        with pytest.raises(AllPositionsMasked):
            L.attention_forward(rng.normal(size=(2, 3, 4)), *self.params(rng, 4),
                                np.array([[True, False, False], [False, False, False]]))

    def test_gradient_with_l2(self, rng):
        h = rng.normal(size=(2, 3, 4))
        W_a, b_a, u_a = self.params(rng, 4)
        mask = L.length_mask([3, 2], 3)
        R = rng.normal(size=(2, 4))
        lw, lb = 0.3, 0.7

        def f():
            ctx, _, _ = L.attention_forward(h, W_a, b_a, u_a, mask)
            return np.sum(ctx * R) + L.l2_penalty(W_a, b_a, lw, lb)

        _, _, cache = L.attention_forward(h, W_a, b_a, u_a, mask)
        dh, dW, db, du = L.attention_backward(R, cache)
        dW = dW + 2 * lw * W_a
        db = db + 2 * lb * b_a
        for analytic, arr in [(dh, h), (dW, W_a), (db, b_a), (du, u_a)]:
            assert max_rel_error(analytic, numeric_grad(f, arr)) < TOL


class TestHeadAndLoss:
    def test_zero_weights_uniform(self, rng):
        probs, _ = L.output_head_forward(rng.normal(size=(3, 4)), rng.normal(size=(3, 10)),
                                         np.zeros((14, 4)), np.zeros(4))
        np.testing.assert_array_equal(probs, 0.25)

    def test_biased_argmax(self, rng):
        probs, _ = L.output_head_forward(rng.normal(size=(1, 4)), rng.normal(size=(1, 10)),
                                         np.zeros((14, 4)), np.array([10.0, 0, 0, 0]))
        assert probs.argmax() == 0
        assert probs[0, 0] == pytest.approx(np.exp(10) / (np.exp(10) + 3), abs=1e-15)
        assert probs[0, 0] > 0.9998

    def test_rows_sum_to_one(self, rng):
        probs, _ = L.output_head_forward(rng.normal(size=(50, 4)), rng.normal(size=(50, 10)),
                                         rng.normal(size=(14, 4)) * 5, rng.normal(size=4))
        assert np.all(probs >= 0)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_head_gradient(self, rng):
        ctx, feats = rng.normal(size=(3, 4)), rng.normal(size=(3, 2))
        W, b = rng.normal(size=(6, 4)), rng.normal(size=4)
        gold, w = np.array([0, 3, 1]), np.array([1.0, 2.0, 0.5, 1.5])

        def f():
            return L.weighted_crossentropy(L.output_head_forward(ctx, feats, W, b)[0], gold, w)[0]

        probs, inp = L.output_head_forward(ctx, feats, W, b)
        _, gz = L.weighted_crossentropy(probs, gold, w)
        dctx, dW, db = L.output_head_backward(gz, inp, W, 4)
        for analytic, arr in [(dctx, ctx), (dW, W), (db, b)]:
            assert max_rel_error(analytic, numeric_grad(f, arr)) < TOL

    def test_perfect_prediction(self):
        loss, _ = L.weighted_crossentropy(np.eye(4), np.arange(4), np.ones(4))
        assert loss == 0.0

    def test_uniform_loss(self):
        loss, _ = L.weighted_crossentropy(np.full((3, 4), 0.25), [0, 1, 2], np.ones(4))
        assert loss == pytest.approx(np.log(4), abs=1e-12)
        assert loss == pytest.approx(1.3863, abs=1e-4)

    def test_weight_linearity(self, rng):
        probs = L.softmax(rng.normal(size=(1, 4)))
        w1 = np.ones(4)
        w2 = w1.copy()
        w2[2] = 2.0
        l1, g1 = L.weighted_crossentropy(probs, [2], w1)
        l2, g2 = L.weighted_crossentropy(probs, [2], w2)
        assert l2 == 2 * l1
        np.testing.assert_array_equal(g2, 2 * g1)

    def test_clamped_log(self):
        loss, _ = L.weighted_crossentropy(np.array([[1.0, 0.0]]), [1], np.ones(2))
        assert np.isfinite(loss) and loss == pytest.approx(-np.log(1e-12))

    def test_logit_gradient(self, rng):
        z = rng.normal(size=(4, 4))
        gold, w = np.array([1, 1, 0, 3]), np.array([0.5, 1.0, 2.0, 3.0])
        _, gz = L.weighted_crossentropy(L.softmax(z), gold, w)
        num = numeric_grad(lambda: L.weighted_crossentropy(L.softmax(z), gold, w)[0], z)
        assert max_rel_error(gz, num) < TOL
