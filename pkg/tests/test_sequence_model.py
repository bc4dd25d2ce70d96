"""Tests for the bidirectional jump-ODE cascade encoder."""
import numpy as np
import pytest

from vnoip.autodiff import Tensor, grad_check_params, layer_norm
from vnoip.data import CascadeSample
from vnoip.model import (
    BiContext, ModelParams, SequenceEncoder, bidirectional_context, sample_context, temporal_encoding,
)
from vnoip.solvers import EULER_DEFAULT, SolveConfig
from vnoip.utils.errors import DimensionError, EmptySequenceError

SEQUENCE_GRAD_TOL = 1e-4


def make_encoder(embed_dim=4, hidden_dim=3, seed=0, bidirectional=True, solver=EULER_DEFAULT):
    params = ModelParams()
    encoder = SequenceEncoder(params, embed_dim, hidden_dim, np.random.default_rng(seed), solver,
                              bidirectional=bidirectional)
    return params, encoder


def random_context(rng, n, d):
    return bidirectional_context(rng.normal(size=(n, d)), rng.normal(size=(n, d)))


def make_sample(n=4, d=4, seed=3) -> CascadeSample:
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, 0.3, size=n))
    times[0] = 0.0
    return CascadeSample(
        cascade_id="toy",
        users=tuple(range(n)),
        times=times,
        global_rows=rng.normal(size=(n, d)),
        cascade_rows=rng.normal(size=(n, d)),
        context_popularity=np.arange(1, n + 1),
        observation_time=0.3,
        observed_popularity=float(n),
        grid_times=np.array([0.65, 1.0]),
        grid_popularity_values=np.array([n + 2.0, n + 3.0]),
        label_value=3.0,
    )


def np_sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class TestTemporalEncoding:
    def test_zero_time(self):
        code = temporal_encoding(0.0, 8)
        np.testing.assert_array_equal(code[0::2], np.ones(4))
        np.testing.assert_array_equal(code[1::2], np.zeros(4))

    def test_bounded(self):
        codes = temporal_encoding(np.linspace(0.0, 1.0, 37), 16)
        assert codes.shape == (37, 16)
        assert np.all(np.abs(codes) <= 1.0)

    def test_first_component_half_turn(self):
        assert temporal_encoding(np.pi / 100.0, 8)[0] == pytest.approx(-1.0, abs=1e-12)

    def test_third_component_frequency(self):
        d = 8
        t = np.pi * 10000.0 ** (2.0 / d) / 100.0
        assert temporal_encoding(t, d)[2] == pytest.approx(-1.0, abs=1e-12)

    def test_even_component_uses_next_exponent(self):
        d = 8
        t = 0.5 * np.pi * 10000.0 ** (2.0 / d) / 100.0
        assert temporal_encoding(t, d)[1] == pytest.approx(1.0, abs=1e-12)

    def test_odd_size_rejected(self):
        with pytest.raises(DimensionError):
            temporal_encoding(0.1, 5)


class TestBidirectionalContext:
    def test_single_event_attends_to_itself(self):
        sg, sc = np.array([[1.0, 2.0]]), np.array([[3.0, -1.0]])
        ctx = bidirectional_context(sg, sc)
        expected = np.array([[3.0, -1.0, 1.0, 2.0]])
        np.testing.assert_allclose(ctx.forward.numpy(), expected)
        np.testing.assert_allclose(ctx.backward.numpy(), expected)

    def test_shapes(self):
        ctx = random_context(np.random.default_rng(0), 5, 3)
        assert ctx.forward.shape == (5, 6)
        assert ctx.backward.shape == (5, 6)
        assert ctx.n_events == 5

    def test_orthonormal_first_row_is_its_own_value(self):
        rows = np.eye(2)
        ctx = bidirectional_context(rows, rows)
        np.testing.assert_array_equal(ctx.forward.numpy()[0], [1.0, 0.0, 1.0, 0.0])
        np.testing.assert_array_equal(ctx.backward.numpy()[1], [0.0, 1.0, 0.0, 1.0])

    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_forward_rows_ignore_later_positions(self, j):
        rng = np.random.default_rng(7)
        sg, sc = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
        base = bidirectional_context(sg, sc)
        sg2, sc2 = sg.copy(), sc.copy()
        sg2[j] += 5.0
        sc2[j] -= 3.0
        moved = bidirectional_context(sg2, sc2)
        np.testing.assert_array_equal(moved.forward.numpy()[:j], base.forward.numpy()[:j])
        assert not np.array_equal(moved.forward.numpy()[j], base.forward.numpy()[j])

    @pytest.mark.parametrize("j", [0, 1, 2, 3])
    def test_backward_rows_ignore_earlier_positions(self, j):
        rng = np.random.default_rng(8)
        sg, sc = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
        base = bidirectional_context(sg, sc)
        sc2 = sc.copy()
        sc2[j] += 2.0
        moved = bidirectional_context(sg, sc2)
        np.testing.assert_array_equal(moved.backward.numpy()[j + 1:], base.backward.numpy()[j + 1:])

    def test_empty_sequence(self):
        with pytest.raises(EmptySequenceError):
            bidirectional_context(np.zeros((0, 3)), np.zeros((0, 3)))

    def test_view_mismatch(self):
        with pytest.raises(DimensionError):
            bidirectional_context(np.zeros((2, 3)), np.zeros((2, 4)))

    def test_sample_context_adds_temporal_code_to_cascade_view(self):
        sample = make_sample()
        ctx = sample_context(sample)
        manual = bidirectional_context(sample.global_rows,
                                       sample.cascade_rows + temporal_encoding(sample.times, 4))
        np.testing.assert_array_equal(ctx.forward.numpy(), manual.forward.numpy())


class TestSelfGate:
    def test_zero_state(self):
        params, encoder = make_encoder()
        params.set("seq.H0", np.zeros(3))
        forward, backward = encoder.self_gate_init(params.bind())
        np.testing.assert_array_equal(forward.numpy(), np.zeros(3))
        np.testing.assert_array_equal(backward.numpy(), np.zeros(3))

    def test_zero_gate_halves(self):
        params, encoder = make_encoder()
        for name in ("seq.gate_f.weight", "seq.gate_b.weight", "seq.gate_f.bias", "seq.gate_b.bias"):
            params.set(name, np.zeros_like(params[name]))
        forward, backward = encoder.self_gate_init(params.bind())
        np.testing.assert_allclose(forward.numpy(), params["seq.H0"] / 2.0)
        np.testing.assert_allclose(backward.numpy(), params["seq.H0"] / 2.0)

    def test_gate_shrinks(self):
        params, encoder = make_encoder(hidden_dim=6, seed=5)
        forward, backward = encoder.self_gate_init(params.bind())
        assert np.all(np.abs(forward.numpy()) <= np.abs(params["seq.H0"]))
        assert np.all(np.abs(backward.numpy()) <= np.abs(params["seq.H0"]))


class TestJumpOdePass:
    def test_single_event_is_one_jump(self):
        params, encoder = make_encoder()
        p = params.bind()
        ctx = random_context(np.random.default_rng(1), 1, 4)
        forward, backward = encoder.jump_ode_pass(p, ctx, [0.0])
        start_forward, start_backward = encoder.self_gate_init(p)
        assert len(forward) == len(backward) == 1
        np.testing.assert_array_equal(forward[0].numpy(), encoder.gru_forward(p, ctx.forward[0], start_forward).numpy())
        np.testing.assert_array_equal(backward[0].numpy(), encoder.gru_backward(p, ctx.backward[0], start_backward).numpy())

    def test_state_counts(self):
        params, encoder = make_encoder()
        ctx = random_context(np.random.default_rng(2), 6, 4)
        forward, backward = encoder.jump_ode_pass(params.bind(), ctx, np.linspace(0.0, 0.5, 6))
        assert len(forward) == len(backward) == 6
        assert all(state.shape == (3,) for state in forward + backward)

    def test_zero_drift_chains_gru_updates(self):
        params, encoder = make_encoder()
        for name in ("seq.drift_f.2.weight", "seq.drift_f.2.bias"):
            params.set(name, np.zeros_like(params[name]))
        p = params.bind()
        ctx = random_context(np.random.default_rng(3), 3, 4)
        forward, _ = encoder.jump_ode_pass(p, ctx, [0.0, 0.4, 0.9])
        state, _ = encoder.self_gate_init(p)
        for i in range(3):
            state = encoder.gru_forward(p, ctx.forward[i], state)
            np.testing.assert_allclose(forward[i].numpy(), state.numpy(), rtol=0, atol=1e-15)

    def test_matches_hand_unrolled_scalar_state(self):
        params, encoder = make_encoder(embed_dim=2, hidden_dim=1, seed=11)
        ctx = random_context(np.random.default_rng(4), 2, 2)
        forward, _ = encoder.jump_ode_pass(params.bind(), ctx, [0.0, 0.5])

        v = {name: value for name, value in params.items()}

        def gru(x, h):
            r = np_sigmoid(x @ v["seq.gru_f.W_r"] + h @ v["seq.gru_f.U_r"] + v["seq.gru_f.b_r"])
            z = np_sigmoid(x @ v["seq.gru_f.W_z"] + h @ v["seq.gru_f.U_z"] + v["seq.gru_f.b_z"])
            n = np.tanh(x @ v["seq.gru_f.W_n"] + v["seq.gru_f.b_n"]
                        + r * (h @ v["seq.gru_f.U_n"] + v["seq.gru_f.c_n"]))
            return (1.0 - z) * n + z * h

        def drift(h):
            for k in range(3):
                h = h @ v[f"seq.drift_f.{k}.weight"] + v[f"seq.drift_f.{k}.bias"]
                if k < 2:
                    h = np.logaddexp(0.0, h)
            return h

        h = v["seq.H0"] * np_sigmoid(v["seq.H0"] @ v["seq.gate_f.weight"] + v["seq.gate_f.bias"])
        h = gru(ctx.forward.numpy()[0], h)
        np.testing.assert_allclose(forward[0].numpy(), h, rtol=0, atol=1e-12)
        for k in range(10):
            dt = 0.05 if k < 9 else 0.5 - 9 * 0.05
            h = h + drift(h) * dt
        h = gru(ctx.forward.numpy()[1], h)
        np.testing.assert_allclose(forward[1].numpy(), h, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_forward_states_are_causal(self, j):
        params, encoder = make_encoder(seed=2)
        rng = np.random.default_rng(9)
        sg, sc = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
        times = np.array([0.0, 0.1, 0.3, 0.35])
        base, _ = encoder.jump_ode_pass(params.bind(), bidirectional_context(sg, sc), times)

        sg2, sc2, times2 = sg.copy(), sc.copy(), times.copy()
        sg2[j:] += 1.5
        sc2[j:] *= -1.0
        times2[j:] += 0.2
        moved, _ = encoder.jump_ode_pass(params.bind(), bidirectional_context(sg2, sc2), times2)
        for i in range(j):
            np.testing.assert_array_equal(moved[i].numpy(), base[i].numpy())

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_backward_states_are_causal(self, j):
        params, encoder = make_encoder(seed=2)
        rng = np.random.default_rng(10)
        sg, sc = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
        times = np.array([0.0, 0.1, 0.3, 0.35])
        _, base = encoder.jump_ode_pass(params.bind(), bidirectional_context(sg, sc), times)

        sg2, times2 = sg.copy(), times.copy()
        sg2[:j + 1] -= 2.0
        times2[1:j + 1] -= 0.05
        _, moved = encoder.jump_ode_pass(params.bind(), bidirectional_context(sg2, sc), times2)
        for i in range(j + 1, 4):
            np.testing.assert_array_equal(moved[i].numpy(), base[i].numpy())

    def test_reversal_mirrors_directions(self):
        params, encoder = make_encoder(seed=4)
        ctx = random_context(np.random.default_rng(5), 4, 4)
        times = np.array([0.0, 0.25, 0.5, 1.0])
        forward, backward = encoder.jump_ode_pass(params.bind(), ctx, times)

        def swap(name):
            return name.replace("_f.", "_tmp.").replace("_b.", "_f.").replace("_tmp.", "_b.")

        mirrored_params, mirrored_encoder = make_encoder(seed=99)
        mirrored_params.load_state({swap(name): value for name, value in params.items()})
        mirrored_ctx = BiContext(forward=Tensor(ctx.backward.numpy()[::-1]),
                                 backward=Tensor(ctx.forward.numpy()[::-1]))
        forward2, backward2 = mirrored_encoder.jump_ode_pass(mirrored_params.bind(), mirrored_ctx,
                                                             1.0 - times[::-1])
        for k in range(4):
            np.testing.assert_array_equal(forward2[k].numpy(), backward[3 - k].numpy())
            np.testing.assert_array_equal(backward2[k].numpy(), forward[3 - k].numpy())

    def test_empty_times(self):
        params, encoder = make_encoder()
        ctx = random_context(np.random.default_rng(0), 1, 4)
        with pytest.raises(EmptySequenceError):
            encoder.jump_ode_pass(params.bind(), ctx, [])

    def test_row_count_mismatch(self):
        params, encoder = make_encoder()
        ctx = random_context(np.random.default_rng(0), 2, 4)
        with pytest.raises(DimensionError):
            encoder.jump_ode_pass(params.bind(), ctx, [0.0, 0.1, 0.2])

    def test_forward_only_has_no_backward_states(self):
        params, encoder = make_encoder(bidirectional=False)
        assert "seq.gru_b.W_r" not in params
        ctx = random_context(np.random.default_rng(0), 3, 4)
        forward, backward = encoder.jump_ode_pass(params.bind(), ctx, [0.0, 0.1, 0.2])
        assert len(forward) == 3
        assert backward == []


class TestFuse:
    def test_identical_directions(self):
        params, encoder = make_encoder()
        p = params.bind()
        v = [Tensor([0.5, -1.0, 2.0]), Tensor([1.0, 0.0, 3.0])]
        fused = encoder.fuse(p, v, v)
        expected = layer_norm(np.array([[0.5, -1.0, 2.0], [1.0, 0.0, 3.0]]), np.ones(3), np.zeros(3))
        np.testing.assert_allclose(fused.numpy(), expected.numpy(), atol=1e-12)

    def test_weights_are_a_distribution(self):
        params, encoder = make_encoder(seed=6)
        rng = np.random.default_rng(6)
        gamma = encoder.fusion_weights(params.bind(), Tensor(rng.normal(size=(5, 3))),
                                       Tensor(rng.normal(size=(5, 3)))).numpy()
        assert gamma.shape == (5, 2)
        assert np.all(gamma > 0.0)
        np.testing.assert_allclose(gamma.sum(axis=1), np.ones(5))

    def test_zero_query_weights_equally(self):
        params, encoder = make_encoder(seed=6)
        params.set("seq.fuse_a", np.zeros(3))
        rng = np.random.default_rng(6)
        gamma = encoder.fusion_weights(params.bind(), Tensor(rng.normal(size=(4, 3))),
                                       Tensor(rng.normal(size=(4, 3)))).numpy()
        np.testing.assert_allclose(gamma, np.full((4, 2), 0.5))

    def test_encode_shape(self):
        params, encoder = make_encoder()
        states = encoder.encode(params.bind(), make_sample(n=5))
        assert states.shape == (5, 3)


class TestSequenceGradients:
    def test_jump_ode_pass_and_fuse(self):
        params, encoder = make_encoder(embed_dim=4, hidden_dim=3, seed=21,
                                       solver=SolveConfig(method="euler", step=0.05))
        ctx = random_context(np.random.default_rng(21), 3, 4)
        times = [0.0, 0.12, 0.3]
        readout = np.random.default_rng(22).normal(size=(3, 3))

        def objective(p):
            forward, backward = encoder.jump_ode_pass(p, ctx, times)
            return (encoder.fuse(p, forward, backward) * readout).sum()

        error = grad_check_params(objective, params.state_dict(), h=1e-5)
        assert error < SEQUENCE_GRAD_TOL
