import numpy as np
import pytest

from lfads.datasets import (
    DATASET_MAGIC,
    FileDataModule,
    InMemoryDataModule,
    LorenzConfig,
    SyntheticLorenzDataModule,
    TrialBatch,
    TrialDataset,
    batch_indices,
    batches,
    calibrate_scale,
    generate_lorenz,
    integrate_lorenz,
    load_dataset,
    save_dataset,
)
from lfads.exceptions import ContainerFormatError, DatasetError, EmptySplitError, MissingArrayError
from lfads.utils import decode_container, encode_container, write_container


def small_dataset(n_train=3, n_valid=2, t_enc=4, t_recon=5, n_in=2, n_out=3):
    rng = np.random.default_rng(0)
    n = n_train + n_valid
    recon = rng.poisson(1.0, size=(n, t_recon, n_out)).astype(float)
    encod = recon[:, :t_enc, :n_in]
    split = np.array(["train"] * n_train + ["valid"] * n_valid)
    return TrialDataset(encod, recon, split, name="small")


def test_dataset_properties():
    dataset = small_dataset()
    assert dataset.n_trials == 5
    assert (dataset.encod_steps, dataset.recon_steps, dataset.fp_steps) == (4, 5, 1)
    assert (dataset.n_heldin, dataset.n_recon, dataset.n_heldout) == (2, 3, 1)
    assert list(dataset.neuron_roles) == ["held-in", "held-in", "held-out"]
    assert dataset.slab_matches
    assert dataset.is_count_data
    np.testing.assert_array_equal(dataset.indices("valid"), [3, 4])


def test_dataset_is_immutable():
    dataset = small_dataset()
    with pytest.raises(ValueError):
        dataset.recon_data[0, 0, 0] = 5.0


@pytest.mark.parametrize("encod_shape, recon_shape, split", [
    ((2, 4, 2), (2, 3, 2), ["train", "valid"]),
    ((2, 4, 3), (2, 4, 2), ["train", "valid"]),
    ((2, 4, 2), (3, 4, 2), ["train", "valid"]),
    ((2, 4, 2), (2, 4, 2), ["train", "test"]),
    ((2, 4), (2, 4, 2), ["train", "valid"]),
])
def test_dataset_rejects_inconsistent_arrays(encod_shape, recon_shape, split):
    with pytest.raises(DatasetError):
        TrialDataset(np.zeros(encod_shape), np.zeros(recon_shape), np.array(split))


def test_empty_split():
    dataset = small_dataset(n_valid=0)
    with pytest.raises(EmptySplitError):
        dataset.split_arrays("valid")
    with pytest.raises(EmptySplitError):
        list(batches(dataset, "valid", 2))


def test_save_and_load(tmp_path):
    dataset = small_dataset()
    path = tmp_path / "small.lfds"
    save_dataset(dataset, path)
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.encod_data, dataset.encod_data)
    np.testing.assert_array_equal(loaded.recon_data, dataset.recon_data)
    np.testing.assert_array_equal(loaded.split, dataset.split)
    assert loaded.truth is None
    assert loaded.name == "small"


def test_container_bytes_are_canonical():
    a = {"b": np.arange(3.0), "a": np.ones((2, 2))}
    b = {"a": np.ones((2, 2)), "b": np.arange(3.0)}
    assert encode_container(a, DATASET_MAGIC) == encode_container(b, DATASET_MAGIC)
    decoded = decode_container(encode_container(a, DATASET_MAGIC), DATASET_MAGIC)
    assert decoded["a"].shape == (2, 2)


def test_container_rejects_bad_bytes():
    payload = encode_container({"x": np.arange(4.0)}, DATASET_MAGIC)
    with pytest.raises(ContainerFormatError):
        decode_container(payload[:-3], DATASET_MAGIC)
    with pytest.raises(ContainerFormatError):
        decode_container(b"NOTLFDS!" + payload[8:], DATASET_MAGIC)


def test_missing_array(tmp_path):
    path = tmp_path / "partial.lfds"
    write_container(path, {
        "train_encod_data": np.zeros((2, 3, 1)),
        "train_recon_data": np.zeros((2, 3, 1)),
        "valid_encod_data": np.zeros((1, 3, 1)),
    }, DATASET_MAGIC)
    with pytest.raises(MissingArrayError, match="valid_recon_data"):
        load_dataset(path)


def test_truth_must_cover_both_splits(tmp_path):
    path = tmp_path / "truth.lfds"
    arrays = {f"{s}_{k}": np.ones((2, 3, 1)) for s in ("train", "valid") for k in ("encod_data", "recon_data")}
    arrays["train_truth"] = np.ones((2, 3, 1))
    write_container(path, arrays, DATASET_MAGIC)
    with pytest.raises(DatasetError):
        load_dataset(path)


def test_batch_indices_partition():
    rng = np.random.default_rng(3)
    groups = batch_indices(np.arange(10), 4, shuffle=True, rng=rng)
    assert [len(g) for g in groups] == [4, 4, 2]
    assert sorted(np.concatenate(groups).tolist()) == list(range(10))
    again = batch_indices(np.arange(10), 4, shuffle=True, rng=np.random.default_rng(3))
    assert all(np.array_equal(g, h) for g, h in zip(groups, again))


def test_batch_indices_errors():
    with pytest.raises(DatasetError):
        batch_indices(np.arange(3), 0)
    with pytest.raises(DatasetError):
        batch_indices(np.arange(3), 2, shuffle=True)


def test_batches_follow_split_order():
    dataset = small_dataset()
    got = [b.indices.tolist() for b in batches(dataset, "train", 2)]
    assert got == [[0, 1], [2]]


def test_trial_batch_defaults():
    batch = TrialBatch(np.zeros((2, 3, 1)), np.zeros((2, 3, 2)))
    np.testing.assert_array_equal(batch.sample_mask, np.ones((2, 3, 2)))
    np.testing.assert_array_equal(batch.indices, [0, 1])
    with pytest.raises(DatasetError):
        TrialBatch(np.zeros((2, 3, 1)), np.zeros((2, 3, 2)), sample_mask=np.ones((2, 3, 1)))


def test_rk4_converges_when_step_is_halved():
    initial = np.array([[1.0, 1.0, 20.0], [-5.0, 3.0, 30.0]])
    coarse = integrate_lorenz(initial, n_samples=11, dt=0.001, steps_per_sample=10)
    fine = integrate_lorenz(initial, n_samples=11, dt=0.0005, steps_per_sample=20)
    assert coarse.shape == (2, 11, 3)
    np.testing.assert_allclose(coarse, fine, atol=1e-5)


def test_rk4_is_fourth_order():
    initial = np.array([[1.0, 1.0, 20.0]])
    reference = integrate_lorenz(initial, n_samples=2, dt=0.00125, steps_per_sample=80)[:, -1]
    err_coarse = np.abs(integrate_lorenz(initial, n_samples=2, dt=0.01, steps_per_sample=10)[:, -1] - reference).max()
    err_fine = np.abs(integrate_lorenz(initial, n_samples=2, dt=0.005, steps_per_sample=20)[:, -1] - reference).max()
    assert err_coarse / err_fine > 10.0


def test_generate_lorenz_shapes_and_rate():
    cfg = LorenzConfig(n_trials=20, n_bins=8, n_neurons=4, n_heldout=2, fp_steps=3, burn_in=50, base_rate=0.4)
    dataset = generate_lorenz(cfg)
    assert dataset.encod_data.shape == (20, 8, 4)
    assert dataset.recon_data.shape == (20, 11, 6)
    assert dataset.truth.shape == (20, 11, 6)
    assert dataset.slab_matches
    assert list(dataset.split).count("valid") == 4
    assert dataset.truth.mean() == pytest.approx(0.4, rel=1e-8)


def test_generate_lorenz_is_seeded():
    cfg = LorenzConfig(n_trials=6, n_bins=5, n_neurons=3, burn_in=10, seed=7)
    np.testing.assert_array_equal(generate_lorenz(cfg).recon_data, generate_lorenz(cfg).recon_data)


def test_lorenz_config_validation():
    with pytest.raises(DatasetError):
        LorenzConfig(n_neurons=2)
    with pytest.raises(DatasetError):
        LorenzConfig(valid_fraction=1.0)
    with pytest.raises(DatasetError):
        LorenzConfig(dt=0.0)
    with pytest.raises(DatasetError):
        LorenzConfig(floor_fraction=1.0)


def test_readout_scale_calibration():
    rng = np.random.default_rng(3)
    drive = rng.standard_normal((200, 5))
    drive -= drive.mean()
    offset = np.log(0.1)
    scale = calibrate_scale(drive, offset, 0.3)
    assert scale > 0
    assert np.exp(scale * drive + offset).mean() == pytest.approx(0.3, rel=1e-10)
    assert np.exp(2.0 * scale * drive + offset).mean() > 0.3
    with pytest.raises(ValueError):
        calibrate_scale(drive, np.log(0.3), 0.3)


def test_datamodules(tmp_path):
    synthetic = SyntheticLorenzDataModule(batch_size=4, n_trials=10, n_bins=6, n_neurons=3, burn_in=10)
    dims = synthetic.dims()
    assert dims == {"encod_steps": 6, "recon_steps": 6, "n_heldin": 3, "n_recon": 3}
    assert synthetic.dataset is synthetic.dataset

    path = tmp_path / "lorenz.lfds"
    save_dataset(synthetic.dataset, path)
    from_file = FileDataModule(path, batch_size=4)
    assert from_file.dims() == dims

    in_memory = InMemoryDataModule(synthetic.dataset, batch_size=3)
    sizes = [b.size for b in in_memory.train_batches(np.random.default_rng(0))]
    assert sum(sizes) == len(synthetic.dataset.indices("train"))
    assert max(sizes) == 3
    assert in_memory.split_batch("valid").size == len(synthetic.dataset.indices("valid"))
