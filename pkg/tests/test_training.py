"""Tests for Adam, the epoch loop, early stopping and divergence handling."""
import math
from types import SimpleNamespace

import numpy as np
import pytest

from vnoip.autodiff import Tape
from vnoip.model import VNOIP, ModelConfig, ModelParams, training_noise
from vnoip.training import AdamState, TrainConfig, Trainer, TrainingResult, adam_step
from vnoip.training.checkpoint import entries_equal
from vnoip.training.gradcheck_suite import toy_cascade
from vnoip.utils.errors import DataError, TrainingDivergedError
from vnoip.utils.events import EventType

TOY_MODEL = ModelConfig(hidden_dim=3, latent_dim=2, embed_dim=4)


def single_param(value):
    params = ModelParams()
    params.add("w", np.asarray(value, dtype=float))
    return params


class EventRecorder:
    def __init__(self):
        self.events = []

    def __call__(self, event):
        self.events.append(event)

    def types(self):
        return [e.event_type for e in self.events]


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        params = single_param([1.0, -2.0, 0.5])
        adam_step(params, {"w": np.array([3.0, -0.1, 40.0])}, AdamState(), lr=0.01)
        np.testing.assert_allclose(params["w"], [0.99, -1.99, 0.49], atol=1e-6)

    def test_missing_gradient_decays_moments_only(self):
        params = single_param([1.0, 1.0])
        state = adam_step(params, {"w": np.array([1.0, 1.0])}, AdamState(), lr=0.1)
        before = params["w"].copy()
        after = adam_step(params, {}, state, lr=0.1, beta1=0.9, beta2=0.999)
        np.testing.assert_allclose(after.first["w"], 0.9 * state.first["w"])
        np.testing.assert_allclose(after.second["w"], 0.999 * state.second["w"])
        # Bias-corrected first moment is still positive, so the step continues.
        assert np.all(params["w"] < before)

    def test_zero_gradient_from_fresh_state_keeps_params(self):
        params = single_param([0.3, -0.7])
        state = adam_step(params, {"w": np.zeros(2)}, AdamState(), lr=0.5)
        np.testing.assert_array_equal(params["w"], [0.3, -0.7])
        assert state.step == 1

    def test_state_is_not_mutated(self):
        params = single_param([1.0])
        state = AdamState()
        new = adam_step(params, {"w": np.array([2.0])}, state, lr=0.1)
        assert state.step == 0 and state.first == {}
        assert new.step == 1

    def test_deterministic(self):
        grads = [{"w": np.array([0.5, -1.5])}, {"w": np.array([-0.2, 0.1])}]
        results = []
        for _ in range(2):
            params, state = single_param([0.0, 0.0]), AdamState()
            for g in grads:
                state = adam_step(params, g, state, lr=0.05)
            results.append(params["w"].copy())
        np.testing.assert_array_equal(results[0], results[1])


def scripted_evaluate(values):
    remaining = list(values)

    def fake(model, samples):
        return SimpleNamespace(msle=remaining.pop(0))

    return fake


class TestTrainer:
    @pytest.fixture
    def small_sets(self, tiny_splits):
        return tiny_splits.train[:4], tiny_splits.val[:2]

    @pytest.mark.asyncio
    async def test_empty_split_rejected(self, small_sets):
        train, _ = small_sets
        trainer = Trainer(VNOIP(TOY_MODEL, n_grid=2), TrainConfig(max_epochs=1))
        with pytest.raises(DataError):
            await trainer.train(train, [])

    @pytest.mark.asyncio
    async def test_patience_stops_after_best_epoch(self, small_sets, monkeypatch):
        monkeypatch.setattr("vnoip.training.trainer.evaluate",
                            scripted_evaluate([5.0, 4.0, 3.0, 3.5, 3.2, 3.1, 0.1, 0.1]))
        model = VNOIP(TOY_MODEL, n_grid=2)
        trainer = Trainer(model, TrainConfig(batch_size=4, max_epochs=20, patience=3))
        result = await trainer.train(*small_sets)
        assert result.best_epoch == 3
        assert result.best_val_msle == 3.0
        assert result.epochs_run == 6
        assert result.stopped_early
        assert [h["epoch"] for h in result.history] == [1, 2, 3, 4, 5, 6]

    @pytest.mark.asyncio
    async def test_best_parameters_restored(self, small_sets, monkeypatch):
        monkeypatch.setattr("vnoip.training.trainer.evaluate", scripted_evaluate([1.0, 2.0, 3.0]))
        model = VNOIP(TOY_MODEL, n_grid=2)
        trainer = Trainer(model, TrainConfig(batch_size=2, max_epochs=3, patience=5))
        result = await trainer.train(*small_sets)
        assert result.best_epoch == 1
        assert entries_equal(model.params.state_dict(), result.best_state)

    @pytest.mark.asyncio
    async def test_same_seed_same_run(self, small_sets):
        runs = []
        for _ in range(2):
            model = VNOIP(TOY_MODEL, n_grid=2, seed=5)
            result = await Trainer(model, TrainConfig(batch_size=2, max_epochs=2, seed=5)).train(*small_sets)
            runs.append((result.history, model.params.state_dict()))
        assert runs[0][0] == runs[1][0]
        assert entries_equal(runs[0][1], runs[1][1])

    @pytest.mark.asyncio
    async def test_event_sequence(self, small_sets):
        recorder = EventRecorder()
        trainer = Trainer(VNOIP(TOY_MODEL, n_grid=2), TrainConfig(batch_size=2, max_epochs=2), task_id="t1")
        trainer.add_subscriber(recorder)
        await trainer.train(*small_sets)
        types = recorder.types()
        assert types.count(EventType.BATCH_COMPLETED) == 4
        assert types.count(EventType.EPOCH_COMPLETED) == 2
        assert types[-1] == EventType.TRAINING_COMPLETED
        assert EventType.NEW_BEST_FOUND in types
        assert all(e.task_id == "t1" for e in recorder.events)

    @pytest.mark.asyncio
    async def test_stop_marks_interrupted(self, small_sets):
        trainer = Trainer(VNOIP(TOY_MODEL, n_grid=2), TrainConfig(batch_size=1, max_epochs=5))

        def stop_on_first_batch(event):
            if event.event_type == EventType.BATCH_COMPLETED:
                trainer.stop()

        trainer.add_subscriber(stop_on_first_batch)
        result = await trainer.train(*small_sets)
        assert result.interrupted
        assert result.epochs_run == 0
        assert result.history == []

    @pytest.mark.asyncio
    async def test_divergence_reports_diagnostics(self, small_sets):
        model = VNOIP(TOY_MODEL.model_copy(update={"variant": "no_trend"}), n_grid=2)
        model.params.set("trend.decoder.1.bias", np.array([np.nan]))
        recorder = EventRecorder()
        trainer = Trainer(model, TrainConfig(batch_size=2, max_epochs=1))
        trainer.add_subscriber(recorder)
        with pytest.raises(TrainingDivergedError) as info:
            await trainer.train(*small_sets)
        assert info.value.diagnostics["epoch"] == 1
        assert "cascade_id" in info.value.diagnostics
        assert recorder.types() == [EventType.TRAINING_ERROR]

    @pytest.mark.asyncio
    async def test_non_finite_gradient_stops_before_update(self, small_sets, monkeypatch):
        class NaNGradientTape(Tape):
            def backward(self, loss):
                grads = super().backward(loss)

                def get(tensor):
                    g = grads.get(tensor)
                    return None if g is None else np.full_like(g, np.nan)

                return SimpleNamespace(get=get)

        monkeypatch.setattr("vnoip.training.trainer.Tape", NaNGradientTape)
        model = VNOIP(TOY_MODEL, n_grid=2)
        before = model.params.state_dict()
        trainer = Trainer(model, TrainConfig(batch_size=2, max_epochs=1))
        with pytest.raises(TrainingDivergedError) as info:
            await trainer.train(*small_sets)
        assert "parameter" in info.value.diagnostics
        assert math.isfinite(info.value.diagnostics["total"])
        assert entries_equal(model.params.state_dict(), before)

    def test_checkpoint_metadata(self):
        model = VNOIP(TOY_MODEL, n_grid=2)
        trainer = Trainer(model, TrainConfig())
        result = TrainingResult(best_epoch=4, best_val_msle=0.25, best_state=model.params.state_dict())
        checkpoint = trainer.checkpoint(result, test_msle=0.3)
        assert checkpoint.metadata["epoch"] == 4
        assert checkpoint.metadata["best_val_msle"] == 0.25
        assert checkpoint.metadata["test_msle"] == 0.3
        assert checkpoint.metadata["n_grid"] == 2
        assert len(checkpoint.metadata["config_hash"]) == 64


class TestConvergence:
    @pytest.mark.asyncio
    async def test_overfits_single_cascade(self):
        sample = toy_cascade()
        model = VNOIP(TOY_MODEL, n_grid=2, seed=1)
        config = TrainConfig(batch_size=1, learning_rate=0.02, max_epochs=300, patience=300, seed=1)
        result = await Trainer(model, config).train([sample], [sample])
        assert result.best_val_msle < 0.05

    def test_distillation_pulls_latents_together(self):
        """With a heavy alignment weight the prior and posterior horizon latents converge."""
        sample = toy_cascade()
        model = VNOIP(TOY_MODEL, n_grid=2, seed=3)
        zero = np.zeros(TOY_MODEL.latent_dim)

        def horizon_gap():
            result = model.forward(model.params.bind(), sample, noise=zero, training=True)
            gap = result.prior_trend.final_latent.numpy() - result.post_trend.final_latent.numpy()
            return float(np.linalg.norm(gap))

        gaps = [horizon_gap()]
        state = AdamState()
        for step in range(1, 81):
            tape = Tape()
            bound = model.params.bind(tape)
            noise = training_noise(3, step, 0, TOY_MODEL.latent_dim)
            loss = model.loss(bound, sample, noise=noise, lambda_fit=0.0, lambda_align=10.0)
            grads = tape.backward(loss.total)
            state = adam_step(model.params, {name: grads.get(bound[name]) for name in model.params.names()},
                              state, lr=0.01)
            if step % 40 == 0:
                gaps.append(horizon_gap())
        assert math.isfinite(gaps[0]) and gaps[0] > 0
        assert gaps[0] > gaps[1] > gaps[2]
