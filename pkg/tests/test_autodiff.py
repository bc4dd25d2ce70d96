"""Tests for the tensor tape and the differentiable primitives."""
import numpy as np
import pytest

from vnoip.autodiff import (
    MASK_BLOCKED, Tape, Tensor, backward_mask, concat, erf, exp, forward_mask, getitem,
    grad_check, grad_check_params, inverse_mills_ratio, layer_norm, log, log1p, log2p1,
    masked_softmax, relu, sigmoid, softmax, softplus, sqrt, stack, tanh,
)
from vnoip.utils.errors import (
    DegenerateMaskError, DimensionError, NumericDomainError, ShapeError, TapeError,
)

PRIMITIVE_TOL = 1e-6


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


class TestTape:
    """Recording and backward semantics."""

    def test_square_gradient(self):
        tape = Tape()
        x = tape.watch([1.0, 2.0])
        grads = tape.backward((x * x).sum())
        np.testing.assert_allclose(grads[x], [2.0, 4.0])

    def test_constants_are_not_recorded(self):
        tape = Tape()
        result = Tensor([1.0, 2.0]) * 3.0
        assert not result.participating
        assert len(tape) == 0

    def test_unused_tensor_has_no_gradient(self):
        tape = Tape()
        x = tape.watch([1.0])
        y = tape.watch([5.0])
        grads = tape.backward((x * 2.0).sum())
        assert x in grads
        assert y not in grads
        assert grads.get(y) is None
        with pytest.raises(KeyError):
            _ = grads[y]

    def test_fan_out_accumulates(self):
        tape = Tape()
        x = tape.watch(3.0)
        loss = x * x + x * 4.0
        assert tape.backward(loss)[x] == pytest.approx(10.0)

    def test_backward_is_single_shot(self):
        tape = Tape()
        x = tape.watch(2.0)
        loss = x * x
        tape.backward(loss)
        with pytest.raises(TapeError):
            tape.backward(loss)
        with pytest.raises(TapeError):
            tape.watch(1.0)

    def test_non_scalar_loss_rejected(self):
        tape = Tape()
        x = tape.watch([1.0, 2.0])
        with pytest.raises(ShapeError):
            tape.backward(x * 2.0)

    def test_operands_from_two_tapes_rejected(self):
        a = Tape().watch(1.0)
        b = Tape().watch(2.0)
        with pytest.raises(TapeError):
            _ = a + b

    def test_values_are_immutable(self):
        x = Tensor([1.0, 2.0])
        with pytest.raises(ValueError):
            x.data[0] = 5.0

    def test_broadcast_gradient_is_reduced(self):
        tape = Tape()
        bias = tape.watch([1.0, 2.0, 3.0])
        matrix = Tensor(np.ones((4, 3)))
        grads = tape.backward((matrix + bias).sum())
        np.testing.assert_allclose(grads[bias], [4.0, 4.0, 4.0])


class TestPrimitiveErrors:
    """Domain and shape contracts."""

    def test_log_domain(self):
        with pytest.raises(NumericDomainError):
            log([0.0, 1.0])

    def test_log1p_domain(self):
        with pytest.raises(NumericDomainError):
            log1p([-1.0])

    def test_sqrt_domain(self):
        with pytest.raises(NumericDomainError):
            sqrt([-0.5])

    def test_division_by_zero(self):
        with pytest.raises(NumericDomainError):
            _ = Tensor([1.0]) / Tensor([0.0])

    def test_fractional_power_of_negative(self):
        with pytest.raises(NumericDomainError):
            _ = Tensor([-2.0]) ** 0.5
        assert (Tensor([-2.0]) ** 2).item() == pytest.approx(4.0)

    def test_matmul_inner_mismatch(self):
        with pytest.raises(DimensionError):
            _ = Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))

    def test_broadcast_mismatch(self):
        with pytest.raises(DimensionError):
            _ = Tensor(np.ones(3)) + Tensor(np.ones(4))

    def test_item_needs_one_element(self):
        with pytest.raises(ShapeError):
            Tensor([1.0, 2.0]).item()


class TestPrimitiveGradients:
    """Central-difference checks for every primitive."""

    @pytest.mark.parametrize("fn", [
        lambda x: (x * x * x).sum(),
        lambda x: (x / (x * x + 1.0)).sum(),
        lambda x: (x ** 3).sum(),
        lambda x: exp(x).sum(),
        lambda x: tanh(x).sum(),
        lambda x: sigmoid(x).sum(),
        lambda x: softplus(x).sum(),
        lambda x: erf(x).sum(),
        lambda x: (relu(x) * x).sum(),
        lambda x: (x - 2.0 * x.mean()).sum() + (x * x).mean(),
    ])
    def test_elementwise(self, fn, rng):
        x = rng.uniform(0.2, 1.5, size=5) * rng.choice([-1.0, 1.0], size=5)
        assert grad_check(fn, x) < PRIMITIVE_TOL

    @pytest.mark.parametrize("fn", [
        lambda x: log(x).sum(),
        lambda x: log1p(x).sum(),
        lambda x: log2p1(x).sum(),
        lambda x: sqrt(x).sum(),
    ])
    def test_positive_domain(self, fn, rng):
        assert grad_check(fn, rng.uniform(0.5, 3.0, size=4)) < PRIMITIVE_TOL

    def test_matmul_and_transpose(self, rng):
        b = rng.normal(size=(3, 2))
        v = rng.normal(size=2)
        assert grad_check(lambda a: ((a @ b) @ v).sum(), rng.normal(size=(4, 3))) < PRIMITIVE_TOL
        assert grad_check(lambda a: (a.T @ a).sum(), rng.normal(size=(3, 3))) < PRIMITIVE_TOL
        assert grad_check(lambda a: (a @ b).sum(), rng.normal(size=3)) < PRIMITIVE_TOL

    def test_structural(self, rng):
        assert grad_check(lambda x: (x.reshape(2, 3)[1] * 2.0).sum(), rng.normal(size=6)) < PRIMITIVE_TOL
        assert grad_check(lambda x: (getitem(x, [0, 0, 2]) ** 2).sum(), rng.normal(size=3)) < PRIMITIVE_TOL
        assert grad_check(lambda x: (concat([x, x * 2.0]) ** 2).sum(), rng.normal(size=3)) < PRIMITIVE_TOL
        assert grad_check(lambda x: (stack([x, x * x], axis=1) ** 2).sum(), rng.normal(size=3)) < PRIMITIVE_TOL
        assert grad_check(lambda x: (x.sum(axis=0) ** 2).sum(), rng.normal(size=(3, 2))) < PRIMITIVE_TOL

    def test_softmax_family(self, rng):
        weights = rng.normal(size=(3, 3))
        assert grad_check(lambda s: (softmax(s) * weights).sum(), rng.normal(size=(3, 3))) < PRIMITIVE_TOL
        mask = forward_mask(3)
        assert grad_check(lambda s: (masked_softmax(s, mask) * weights).sum(),
                          rng.normal(size=(3, 3))) < PRIMITIVE_TOL

    def test_layer_norm(self, rng):
        gain = rng.normal(size=4)
        bias = rng.normal(size=4)
        weights = rng.normal(size=(2, 4))
        assert grad_check(lambda x: (layer_norm(x, gain, bias) * weights).sum(),
                          rng.normal(size=(2, 4))) < PRIMITIVE_TOL

    def test_inverse_mills_ratio(self):
        alpha = np.array([-3.0, -0.5, 0.0, 1.2, 4.0, 8.0])
        assert grad_check(lambda a: inverse_mills_ratio(a).sum(), alpha) < PRIMITIVE_TOL

    def test_named_parameters(self, rng):
        params = {"w": rng.normal(size=(2, 3)), "b": rng.normal(size=3)}
        x = rng.normal(size=2)

        def loss(p):
            return tanh(x @ p["w"] + p["b"]).sum()

        assert grad_check_params(loss, params) < PRIMITIVE_TOL
        assert grad_check_params(loss, params, max_coords=4, seed=3) < PRIMITIVE_TOL


class TestAttentionPieces:
    """Masks, masked softmax and layer normalization values."""

    def test_masks(self):
        np.testing.assert_array_equal(forward_mask(2), [[0.0, MASK_BLOCKED], [0.0, 0.0]])
        np.testing.assert_array_equal(backward_mask(2), [[0.0, 0.0], [MASK_BLOCKED, 0.0]])

    def test_masked_rows_are_distributions(self, rng):
        out = masked_softmax(rng.normal(size=(4, 4)), forward_mask(4)).data
        np.testing.assert_allclose(out.sum(axis=1), np.ones(4))
        assert np.all(np.triu(out, k=1) < 1e-300)

    def test_fully_blocked_row(self):
        mask = np.zeros((2, 2))
        mask[1] = MASK_BLOCKED
        with pytest.raises(DegenerateMaskError):
            masked_softmax(np.zeros((2, 2)), mask)

    def test_mask_shape_mismatch(self):
        with pytest.raises(DimensionError):
            masked_softmax(np.zeros((2, 2)), forward_mask(3))

    def test_layer_norm_statistics(self, rng):
        out = layer_norm(rng.normal(size=(3, 8)) * 5.0, np.ones(8), np.zeros(8)).data
        np.testing.assert_allclose(out.mean(axis=1), np.zeros(3), atol=1e-12)
        np.testing.assert_allclose(out.var(axis=1), np.ones(3), atol=1e-5)


class TestInverseMillsRatio:
    """Hazard of the standard normal."""

    def test_at_zero(self):
        assert inverse_mills_ratio(0.0).item() == pytest.approx(np.sqrt(2.0 / np.pi), abs=1e-9)

    def test_left_tail_vanishes(self):
        assert inverse_mills_ratio(-12.0).item() < 1e-20

    def test_right_tail_is_finite(self):
        values = inverse_mills_ratio([6.5, 40.0, 1e6]).data
        assert np.all(np.isfinite(values))
        assert values[1] == pytest.approx(40.0 + 1.0 / 40.0)

    def test_positive(self):
        assert np.all(inverse_mills_ratio(np.linspace(-10, 10, 41)).data > 0.0)
