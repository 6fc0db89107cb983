import numpy as np
import pytest
import scipy.sparse as sp

from docgat import autodiff as ad
from docgat.autodiff import Tape, Tensor, backward, finite_diff_check


def loss_fn(params, build):
    """Wrap a tape-building closure into the (loss, grads) shape the
    finite-difference checker consumes."""

    def compute():
        tape = Tape(params)
        loss = build(tape)
        value = float(loss.values[0, 0])
        grads = backward(tape, loss)
        return value, grads

    return compute


class TestTensor:
    def test_promotes_scalars_and_vectors(self):
        assert Tensor(3.0).shape == (1, 1)
        assert Tensor([1.0, 2.0]).shape == (1, 2)

    def test_rejects_3d(self):
        with pytest.raises(ValueError, match="2-D"):
            Tensor(np.zeros((2, 2, 2)))


class TestForwardValues:
    def test_uniform_logits_cross_entropy(self):
        loss = ad.cross_entropy_with_logits(None, Tensor([[0.0, 0.0, 0.0, 0.0]]), 2)
        assert loss.values[0, 0] == pytest.approx(np.log(4.0), abs=1e-12)

    def test_leaky_relu_negative_side(self):
        out = ad.leaky_relu(None, Tensor([[-1.0]]), 0.2)
        assert out.values[0, 0] == pytest.approx(-0.2)

    def test_masked_softmax_symmetric_row(self):
        out = ad.masked_row_softmax(None, Tensor([[0.0, 0.0, 0.0]]), np.array([[True] * 3]))
        np.testing.assert_allclose(out.values, [[1 / 3] * 3])

    def test_masked_softmax_masks_exactly_zero(self):
        out = ad.masked_row_softmax(
            None, Tensor([[5.0, 1.0, -2.0]]), np.array([[True, False, True]])
        )
        assert out.values[0, 1] == 0.0
        assert out.values[0].sum() == pytest.approx(1.0, abs=1e-12)

    def test_masked_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        s = Tensor(rng.normal(size=(6, 6)) * 50)
        mask = rng.random((6, 6)) < 0.6
        np.fill_diagonal(mask, True)
        out = ad.masked_row_softmax(None, s, mask)
        np.testing.assert_allclose(out.values.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(out.values >= 0.0) and np.all(out.values <= 1.0)

    def test_masked_softmax_all_false_row_error(self):
        with pytest.raises(ValueError, match="row 1"):
            ad.masked_row_softmax(
                None, Tensor(np.zeros((2, 2))), np.array([[True, True], [False, False]])
            )

    def test_masked_softmax_overflow_safe(self):
        out = ad.masked_row_softmax(
            None, Tensor([[1000.0, 999.0]]), np.array([[True, True]])
        )
        assert np.isfinite(out.values).all()

    def test_elu_zero_is_zero(self):
        assert ad.elu(None, Tensor([[0.0]])).values[0, 0] == 0.0

    def test_shape_errors_name_both_shapes(self):
        with pytest.raises(ValueError, match=r"\(1, 2\).*\(1, 3\)"):
            ad.add(None, Tensor([[1.0, 2.0]]), Tensor([[1.0, 2.0, 3.0]]))
        with pytest.raises(ValueError, match=r"\(1, 2\).*\(1, 3\)"):
            ad.matmul(None, Tensor([[1.0, 2.0]]), Tensor([[1.0, 2.0, 3.0]]))


class TestDropout:
    def test_eval_mode_is_exact_identity(self):
        x = Tensor(np.ones((2, 3)))
        assert ad.dropout(None, x, 0.5, train_mode=False) is x

    def test_keep_prob_one_is_exact_identity(self):
        x = Tensor(np.ones((2, 3)))
        assert ad.dropout(None, x, 1.0, train_mode=True) is x

    def test_train_mode_scales_survivors(self):
        rng = np.random.default_rng(0)
        x = Tensor(np.ones((200, 200)))
        out = ad.dropout(None, x, 0.25, train_mode=True, rng=rng)
        vals = out.values.ravel()
        assert set(np.unique(vals)) <= {0.0, 4.0}
        assert abs((vals != 0).mean() - 0.25) < 0.02

    def test_train_mode_requires_rng(self):
        with pytest.raises(ValueError, match="generator"):
            ad.dropout(None, Tensor(np.ones((2, 2))), 0.5, train_mode=True)

    def test_keep_prob_validated(self):
        with pytest.raises(ValueError, match="keep_prob"):
            ad.dropout(None, Tensor([[1.0]]), 0.0, train_mode=True)


class TestBackward:
    def test_linear_case(self):
        w = ad.parameter([[3.0]])
        x = Tensor([[2.0]])
        tape = Tape([w])
        loss = ad.matmul(tape, w, x)
        grads = backward(tape, loss)
        assert grads[w][0, 0] == 2.0

    def test_unused_parameter_gets_zeros(self):
        w = ad.parameter([[3.0]])
        unused = ad.parameter(np.ones((2, 2)))
        tape = Tape([w, unused])
        loss = ad.scale(tape, w, 2.0)
        grads = backward(tape, loss)
        np.testing.assert_array_equal(grads[unused], np.zeros((2, 2)))

    def test_leaky_relu_gradient_at_negative_input(self):
        w = ad.parameter([[-1.0]])
        tape = Tape([w])
        loss = ad.leaky_relu(tape, w, 0.2)
        grads = backward(tape, loss)
        assert grads[w][0, 0] == pytest.approx(0.2)

    def test_non_scalar_loss_rejected(self):
        w = ad.parameter(np.ones((2, 2)))
        tape = Tape([w])
        out = ad.scale(tape, w, 1.0)
        with pytest.raises(ValueError, match="1x1"):
            backward(tape, out)

    def test_repeated_passes_bit_identical(self):
        rng = np.random.default_rng(7)
        w = ad.parameter(rng.normal(size=(4, 3)))
        x = Tensor(rng.normal(size=(2, 4)))

        def run():
            tape = Tape([w])
            h = ad.elu(tape, ad.matmul(tape, x, w))
            loss = ad.cross_entropy_with_logits(tape, ad.row_mean(tape, h), 1)
            return backward(tape, loss)[w].copy()

        np.testing.assert_array_equal(run(), run())

    def test_fan_out_accumulates(self):
        # loss = (w + w) so dloss/dw = 2
        w = ad.parameter([[5.0]])
        tape = Tape([w])
        loss = ad.add(tape, w, w)
        grads = backward(tape, loss)
        assert grads[w][0, 0] == 2.0


class TestGradientsAgainstFiniteDifferences:
    def setup_method(self):
        self.rng = np.random.default_rng(42)

    def _check(self, params, build, tol=1e-6):
        err = finite_diff_check(loss_fn(params, build), params, 1e-5)
        assert err <= tol, f"finite-difference mismatch: {err}"

    def test_matmul_add_scale(self):
        a = ad.parameter(self.rng.normal(size=(3, 4)))
        b = ad.parameter(self.rng.normal(size=(4, 4)))
        c = ad.parameter(self.rng.normal(size=(3, 4)))

        def build(tape):
            h = ad.add(tape, ad.matmul(tape, a, b), c)
            return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, ad.scale(tape, h, 1.7)), 2)

        self._check([a, b, c], build)

    def test_concat_and_slice(self):
        a = ad.parameter(self.rng.normal(size=(6, 1)))
        b = ad.parameter(self.rng.normal(size=(3, 2)))

        def build(tape):
            top = ad.slice_rows(tape, a, 0, 3)
            bottom = ad.slice_rows(tape, a, 3, 6)
            joined = ad.concat_cols(tape, ad.concat_cols(tape, top, bottom), b)
            return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, joined), 1)

        self._check([a, b], build)

    def test_elu_leaky_softmax_chain(self):
        s = ad.parameter(self.rng.normal(size=(4, 4)))
        mask = self.rng.random((4, 4)) < 0.7
        np.fill_diagonal(mask, True)

        def build(tape):
            act = ad.leaky_relu(tape, ad.elu(tape, s), 0.2)
            alpha = ad.masked_row_softmax(tape, act, mask)
            return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, alpha), 0)

        self._check([s], build)

    def test_outer_add(self):
        s = ad.parameter(self.rng.normal(size=(4, 1)))
        t = ad.parameter(self.rng.normal(size=(4, 1)))
        w = ad.parameter(self.rng.normal(size=(4, 4)))

        def build(tape):
            e = ad.outer_add(tape, s, t)
            h = ad.matmul(tape, e, w)
            return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, h), 3)

        self._check([s, t, w], build)

    def test_input_matmul_sparse_and_dense(self):
        x_sparse = sp.random(4, 9, density=0.5, random_state=0, format="csr")
        x_dense = np.asarray(x_sparse.todense())
        for x in (x_sparse, x_dense):
            w = ad.parameter(self.rng.normal(size=(9, 3)))

            def build(tape):
                h = ad.elu(tape, ad.input_matmul(tape, x, w))
                return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, h), 1)

            self._check([w], build)

    def test_dropout_fixed_mask(self):
        w = ad.parameter(self.rng.normal(size=(2, 5)))

        class FixedRng:
            def random(self, shape):
                return np.array([[0.1, 0.9, 0.2, 0.8, 0.4], [0.6, 0.3, 0.99, 0.0, 0.5]])

        def build(tape):
            h = ad.dropout(tape, ad.scale(tape, w, 1.0), 0.5, True, FixedRng())
            return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, h), 0)

        self._check([w], build)

    def test_gat_attention_matches_composed_primitives(self):
        for trial in range(4):
            rng = np.random.default_rng(trial)
            n, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
            p = ad.parameter(rng.normal(size=(n, d)))
            a = ad.parameter(rng.normal(size=(2 * d, 1)))
            mask = rng.random((n, n)) < 0.5
            np.fill_diagonal(mask, True)

            fused = ad.gat_attention(None, p, a, mask, 0.2)
            s = ad.matmul(None, p, ad.slice_rows(None, a, 0, d))
            t = ad.matmul(None, p, ad.slice_rows(None, a, d, 2 * d))
            composed = ad.masked_row_softmax(
                None, ad.leaky_relu(None, ad.outer_add(None, s, t), 0.2), mask
            )
            np.testing.assert_allclose(fused.values, composed.values, atol=1e-15)

            def build(tape):
                alpha = ad.gat_attention(tape, p, a, mask, 0.2)
                return ad.cross_entropy_with_logits(tape, ad.row_mean(tape, alpha), 1)

            self._check([p, a], build, tol=1e-5)


class TestFiniteDiffCheck:
    def test_quadratic_is_nearly_exact(self):
        w = ad.parameter([[3.0]])

        def compute():
            # L(w) = w^2, dL/dw = 6 at w = 3
            value = float(w.values[0, 0]) ** 2
            return value, {w: 2.0 * w.values}

        assert finite_diff_check(compute, [w], 1e-5) <= 1e-9

    def test_no_parameters_returns_zero(self):
        assert finite_diff_check(lambda: (0.0, {}), [], 1e-5) == 0.0

    def test_eps_validated(self):
        with pytest.raises(ValueError, match="eps"):
            finite_diff_check(lambda: (0.0, {}), [], 0.0)

    def test_kink_gap_reported(self):
        x = ad.parameter([[0.5, -2.0]])
        tape = Tape([x])
        ad.leaky_relu(tape, x, 0.2)
        assert ad.min_kink_gap(tape) == pytest.approx(0.5)
        assert ad.min_kink_gap(Tape([])) == np.inf
