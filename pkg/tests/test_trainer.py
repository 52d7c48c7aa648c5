import numpy as np
import pandas as pd
import pytest
from scipy import special

from lfads.datasets import InMemoryDataModule
from lfads.exceptions import ConfigHashMismatchError, MetricError, NonFiniteLossError, TruncatedCheckpointError
from lfads.trainer import (
    CHECKPOINT_DIR,
    LAST_CHECKPOINT,
    LOSS_CURVE_FILE,
    METRICS_FILE,
    POSTERIOR_MEANS_FILE,
    Adam,
    EarlyStopping,
    MetricsRow,
    PlateauSchedule,
    Trainer,
    TrainerConfig,
    adam_step,
    bits_per_spike,
    clip_grad_norm,
    co_bps,
    evaluate_run,
    fp_bps,
    load_checkpoint,
    poisson_nll_sum,
    posterior_means,
    r2_rates,
    rate_bits_per_spike,
    save_checkpoint,
    save_posterior_means,
    smooth,
    train,
)


def tiny_config(**overrides):
    kwargs = dict(batch_size=6, max_epochs=4, lr_init=0.01, seed=5, save_plot=False)
    kwargs.update(overrides)
    return TrainerConfig(**kwargs)


def test_trainer_config_validation():
    with pytest.raises(ValueError):
        TrainerConfig(lr_decay=1.0)
    with pytest.raises(ValueError):
        TrainerConfig(smoothing=1.0)
    with pytest.raises(ValueError):
        TrainerConfig(grad_clip=0.0)
    with pytest.raises(ValueError):
        TrainerConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainerConfig(n_posterior_samples=0)


def test_smooth():
    assert smooth(None, 3.0, 0.7) == 3.0
    assert smooth(3.0, 1.0, 0.7) == pytest.approx(0.7 * 3.0 + 0.3 * 1.0)


def test_plateau_schedule():
    schedule = PlateauSchedule(lr=1.0, decay=0.5, patience=2, min_lr=0.3)
    assert not schedule.step(5.0)
    assert not schedule.step(6.0)
    assert schedule.step(6.0)
    assert schedule.lr == 0.5
    schedule.step(7.0)
    schedule.step(7.0)
    assert schedule.lr == 0.3
    assert not schedule.step(8.0) and not schedule.step(8.0)
    assert schedule.lr == 0.3


def test_early_stopping():
    stopper = EarlyStopping(patience=2)
    assert not stopper.step(1.0)
    assert not stopper.step(0.5)
    assert not stopper.step(0.6)
    assert stopper.step(0.7)


def test_adam_first_step_moves_by_learning_rate():
    param = np.array([1.0, -2.0, 0.5])
    grad = np.array([0.3, -4.0, 1e-3])
    updated, m, v = adam_step(param, grad, np.zeros(3), np.zeros(3), 0.1, 0.9, 0.999, 1e-12, step=1)
    np.testing.assert_allclose(updated, param - 0.1 * np.sign(grad), rtol=1e-6)
    np.testing.assert_allclose(m, 0.1 * grad)
    np.testing.assert_allclose(v, 0.001 * grad ** 2)


def test_clip_grad_norm():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    assert clip_grad_norm(grads, 1.0) == pytest.approx(5.0)
    np.testing.assert_allclose(grads["a"], [0.6])
    np.testing.assert_allclose(grads["b"], [0.8])
    untouched = {"a": np.array([0.1])}
    clip_grad_norm(untouched, 1.0)
    np.testing.assert_array_equal(untouched["a"], [0.1])


def test_adam_state_round_trip(model_factory, tiny_lorenz):
    model = model_factory(tiny_lorenz)
    optimizer = Adam()
    grads = {name: np.ones_like(t.data) for name, t in model.params.items()}
    optimizer.step(model.params, grads, 0.01)
    state = optimizer.state_arrays()
    restored = Adam()
    restored.load_state(optimizer.t, state["m"], state["v"])
    assert restored.t == 1
    for name in state["m"]:
        np.testing.assert_array_equal(restored.m[name], optimizer.m[name])


def test_poisson_nll_and_bits_per_spike():
    spikes = np.array([[[0.0, 2.0], [1.0, 3.0]]])
    rates = np.array([[[0.5, 1.5], [1.0, 2.5]]])
    expected = sum(r - k * np.log(r) + special.gammaln(k + 1.0)
                   for r, k in zip(rates.ravel(), spikes.ravel()))
    assert poisson_nll_sum(rates, spikes) == pytest.approx(expected, rel=1e-12)

    null = spikes.reshape(-1, 2).mean(axis=0)
    assert rate_bits_per_spike(np.broadcast_to(null, spikes.shape), spikes) == pytest.approx(0.0, abs=1e-12)
    assert rate_bits_per_spike(rates, spikes) > 0.0

    with pytest.raises(MetricError):
        bits_per_spike(1.0, np.zeros((1, 2, 2)))


def test_slab_metrics_need_their_slabs():
    data = np.ones((2, 4, 3))
    with pytest.raises(MetricError):
        co_bps(data, data, n_heldin=3, encod_steps=4)
    with pytest.raises(MetricError):
        fp_bps(data, data, encod_steps=4)


def test_r2_rates():
    truth = np.random.default_rng(0).gamma(2.0, 1.0, size=(3, 5, 4))
    assert r2_rates(truth, truth) == pytest.approx(1.0)
    assert r2_rates(truth * 0.0 + truth.mean(axis=(0, 1)), truth, n_neurons=2) == pytest.approx(0.0, abs=1e-12)


def test_training_writes_run_files(model_factory, tiny_lorenz, tmp_path):
    model = model_factory(tiny_lorenz)
    result = train(model, tiny_lorenz, tiny_config(max_epochs=2, save_plot=True), run_dir=tmp_path)

    assert len(result.history) == 2
    assert result.best_epoch in (1, 2)
    assert (tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT).exists()
    assert (tmp_path / LOSS_CURVE_FILE).read_text().lstrip().startswith("<?xml")

    frame = pd.read_csv(tmp_path / METRICS_FILE)
    expected = [name for name in MetricsRow.__dataclass_fields__ if name != "wall_clock"]
    assert list(frame.columns) == expected
    assert frame["epoch"].tolist() == [1, 2]
    row = result.history[-1]
    assert row.train_total == pytest.approx(row.train_recon + row.train_kl_ic + row.train_kl_co + row.train_l2)


def test_training_is_deterministic(model_factory, tiny_lorenz):
    a = train(model_factory(tiny_lorenz), tiny_lorenz, tiny_config(max_epochs=2))
    b = train(model_factory(tiny_lorenz), tiny_lorenz, tiny_config(max_epochs=2))
    assert [r.to_dict() for r in a.history] == [r.to_dict() for r in b.history]
    for name, value in a.params.items():
        np.testing.assert_array_equal(value, b.params[name])


def test_resume_matches_uninterrupted_run(model_factory, tiny_lorenz, tmp_path):
    straight = train(model_factory(tiny_lorenz), tiny_lorenz, tiny_config(), restore_best=False)

    first = model_factory(tiny_lorenz)
    train(first, tiny_lorenz, tiny_config(), run_dir=tmp_path, epochs=2, restore_best=False)
    resumed_model = model_factory(tiny_lorenz)
    resumed = train(
        resumed_model, tiny_lorenz, tiny_config(),
        run_dir=tmp_path / "resumed",
        resume_from=tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT,
        restore_best=False,
    )

    assert [r.to_dict() for r in resumed.history] == [r.to_dict() for r in straight.history]
    for name, value in straight.params.items():
        np.testing.assert_array_equal(resumed.params[name], value)


def test_restore_best_and_reset_lr(model_factory, tiny_lorenz, tmp_path):
    model = model_factory(tiny_lorenz)
    trainer = Trainer(tiny_config(max_epochs=3), run_dir=tmp_path)
    trainer.fit(model, tiny_lorenz)
    for name, value in trainer.best_params.items():
        np.testing.assert_array_equal(model.params[name].data, value)

    record = load_checkpoint(tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT, expected_hash=model.config_hash())
    assert set(record.best_params) == set(model.params.names())

    other = Trainer(tiny_config(max_epochs=3, lr_init=0.5))
    other.schedule.lr = 1e-4
    other.restore(model_factory(tiny_lorenz), record, reset_lr=True)
    assert other.lr == 0.5
    assert other.epoch == 3


def test_checkpoint_hash_mismatch(model_factory, tiny_lorenz, tmp_path):
    model = model_factory(tiny_lorenz)
    train(model, tiny_lorenz, tiny_config(max_epochs=1), run_dir=tmp_path)
    path = tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT
    with pytest.raises(ConfigHashMismatchError):
        load_checkpoint(path, expected_hash=model_factory(tiny_lorenz, gen_dim=9).config_hash())
    with pytest.raises(ConfigHashMismatchError):
        Trainer(tiny_config()).resume(model_factory(tiny_lorenz, fac_dim=2), path)


def test_checkpoint_resave_is_byte_identical(model_factory, tiny_lorenz, tmp_path):
    train(model_factory(tiny_lorenz), tiny_lorenz, tiny_config(max_epochs=2), run_dir=tmp_path)
    path = tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT
    again = tmp_path / "again.ckpt"
    save_checkpoint(load_checkpoint(path), again)
    assert again.read_bytes() == path.read_bytes()


def test_truncated_checkpoint(model_factory, tiny_lorenz, tmp_path):
    model = model_factory(tiny_lorenz)
    train(model, tiny_lorenz, tiny_config(max_epochs=1), run_dir=tmp_path)
    payload = (tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT).read_bytes()
    for cut in (4, len(payload) // 2, len(payload) - 1):
        broken = tmp_path / f"broken_{cut}.ckpt"
        broken.write_bytes(payload[:cut])
        with pytest.raises(TruncatedCheckpointError):
            load_checkpoint(broken)


def test_non_finite_loss_stops_training(model_factory, tiny_lorenz):
    model = model_factory(tiny_lorenz)
    model.params["readout.b"].data[:] = np.nan
    with pytest.raises(NonFiniteLossError):
        train(model, tiny_lorenz, tiny_config(max_epochs=1))


def test_early_stopping_ends_the_run(model_factory, tiny_lorenz):
    result = train(
        model_factory(tiny_lorenz), tiny_lorenz,
        tiny_config(max_epochs=50, lr_init=0.0, lr_min=0.0, early_stop_patience=1),
    )
    assert result.stopped_early
    assert len(result.history) < 50


def test_posterior_means_and_evaluation(model_factory, tiny_lorenz, tmp_path):
    model = model_factory(tiny_lorenz)
    datamodule = InMemoryDataModule(tiny_lorenz, batch_size=5)
    train(model, datamodule, tiny_config(max_epochs=1))

    arrays = posterior_means(model, tiny_lorenz, n_samples=2, batch_size=4, rng=np.random.default_rng(0))
    n_valid = len(tiny_lorenz.indices("valid"))
    assert arrays["valid_rates"].shape == (n_valid, tiny_lorenz.recon_steps, tiny_lorenz.n_recon)
    assert arrays["train_factors"].shape == (len(tiny_lorenz.indices("train")), tiny_lorenz.recon_steps, 3)

    save_posterior_means(model, datamodule, tmp_path / POSTERIOR_MEANS_FILE, n_samples=2)
    results = evaluate_run(tmp_path, tiny_lorenz)
    assert set(results) == {"co_bps", "fp_bps", "r2_heldin"}


@pytest.mark.slow
def test_long_runs_write_identical_metrics(model_factory, tiny_lorenz, tmp_path):
    config = tiny_config(max_epochs=25, early_stop_patience=100)
    train(model_factory(tiny_lorenz), tiny_lorenz, config, run_dir=tmp_path / "a", restore_best=False)
    train(model_factory(tiny_lorenz), tiny_lorenz, config, run_dir=tmp_path / "b", restore_best=False)
    expected = (tmp_path / "a" / METRICS_FILE).read_bytes()
    assert (tmp_path / "b" / METRICS_FILE).read_bytes() == expected

    train(model_factory(tiny_lorenz), tiny_lorenz, config, run_dir=tmp_path / "c", epochs=12, restore_best=False)
    train(
        model_factory(tiny_lorenz), tiny_lorenz, config,
        run_dir=tmp_path / "d",
        resume_from=tmp_path / "c" / CHECKPOINT_DIR / LAST_CHECKPOINT,
        restore_best=False,
    )
    assert (tmp_path / "d" / METRICS_FILE).read_bytes() == expected
