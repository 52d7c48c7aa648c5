import numpy as np
import pytest
from scipy import stats

from lfads.augmentations import (
    AugmentationStack,
    CoordinatedDropout,
    SelectiveBackpropThruTime,
    TemporalShift,
    shift_time,
)
from lfads.datasets import TrialBatch
from lfads.exceptions import AugmentationError, ShapeError
from lfads.tensor import Tensor, backward, reduce_sum


def make_batch(n=3, t_enc=6, t_recon=8, n_in=4, n_out=5, seed=0):
    rng = np.random.default_rng(seed)
    recon = rng.poisson(2.0, size=(n, t_recon, n_out)).astype(float) + 1.0
    return TrialBatch(recon[:, :t_enc, :n_in].copy(), recon)


def test_coordinated_dropout_masks_are_complementary(rng):
    batch = make_batch()
    cd = CoordinatedDropout(rate=0.3)
    out = cd.process_batch(batch, rng)
    keep = cd.keep_mask
    grad = cd.grad_mask(batch.recon_data.shape)

    np.testing.assert_array_equal(out.encod_data, np.where(keep, batch.encod_data, 0.0))
    slab = grad[:, :6, :4]
    np.testing.assert_array_equal(keep.astype(float) + slab, np.ones_like(slab))
    np.testing.assert_array_equal(grad[:, 6:, :], 1.0)
    np.testing.assert_array_equal(grad[:, :, 4:], 1.0)
    np.testing.assert_array_equal(cd.drop_mask, ~keep)


def test_coordinated_dropout_zero_rate_is_identity(rng):
    batch = make_batch()
    cd = CoordinatedDropout(rate=0.0)
    out = cd.process_batch(batch, rng)
    assert out is batch
    np.testing.assert_array_equal(cd.loss_mask(batch), np.ones_like(batch.recon_data))


def test_coordinated_dropout_rescale(rng):
    batch = make_batch()
    cd = CoordinatedDropout(rate=0.5, rescale=True)
    out = cd.process_batch(batch, rng)
    kept = cd.keep_mask
    np.testing.assert_allclose(out.encod_data[kept], batch.encod_data[kept] * 2.0)


@pytest.mark.parametrize("rate", [0.1, 0.3, 0.5])
def test_coordinated_dropout_drop_fraction(rate):
    rng = np.random.default_rng(int(rate * 100))
    batch = TrialBatch(np.ones((100, 100, 100)), np.ones((100, 100, 100)))
    cd = CoordinatedDropout(rate=rate)
    cd.process_batch(batch, rng)
    n = cd.keep_mask.size
    low, high = stats.binom.interval(0.9973, n, rate)
    assert low <= cd.drop_mask.sum() <= high


def test_coordinated_dropout_complement_holds_every_step(rng):
    batch = make_batch()
    cd = CoordinatedDropout(rate=0.3)
    for _ in range(100):
        cd.process_batch(batch, rng)
        slab = cd.grad_mask(batch.recon_data.shape)[:, :6, :4]
        assert np.array_equal(cd.keep_mask.astype(float) + slab, np.ones_like(slab))
        cd.reset()


def test_coordinated_dropout_rate_bounds():
    with pytest.raises(AugmentationError):
        CoordinatedDropout(rate=1.0)
    with pytest.raises(AugmentationError):
        CoordinatedDropout(rate=-0.1)


def test_coordinated_dropout_blocks_gradient_on_kept_inputs(rng):
    batch = make_batch()
    stack = AugmentationStack([CoordinatedDropout(rate=0.4)])
    augmented = stack.apply_batch(batch, rng)
    elements = Tensor(np.ones_like(batch.recon_data), requires_grad=True)
    backward(reduce_sum(stack.apply_loss(elements, augmented)))
    keep = stack.transforms[0].keep_mask
    assert np.all(elements.grad[:, :6, :4][keep] == 0.0)
    assert np.all(elements.grad[:, :6, :4][~keep] == 1.0)


def test_sbtt_zero_gradient_at_unobserved_steps(rng):
    batch = make_batch()
    sbtt = SelectiveBackpropThruTime(keep_every=3, offset=1)
    stack = AugmentationStack([sbtt])
    augmented = stack.apply_batch(batch, rng)

    observed = sbtt.observed(8)
    np.testing.assert_array_equal(np.flatnonzero(observed), [1, 4, 7])
    assert np.all(augmented.encod_data[:, ~observed[:6], :] == 0.0)

    elements = Tensor(np.ones_like(batch.recon_data), requires_grad=True)
    backward(reduce_sum(stack.apply_loss(elements, augmented)))
    assert np.all(elements.grad[:, ~observed, :] == 0.0)
    assert np.all(elements.grad[:, observed, :] == 1.0)


def test_sbtt_explicit_steps():
    sbtt = SelectiveBackpropThruTime(observed_steps=[5, 0, 2])
    np.testing.assert_array_equal(np.flatnonzero(sbtt.observed(6)), [0, 2, 5])
    with pytest.raises(AugmentationError):
        SelectiveBackpropThruTime()
    with pytest.raises(AugmentationError):
        SelectiveBackpropThruTime(keep_every=2, observed_steps=[1])


def test_shift_time():
    data = np.arange(5.0).reshape(1, 5, 1)
    out, defined = shift_time(data, np.array([[2]]))
    np.testing.assert_array_equal(out[0, :, 0], [0.0, 0.0, 0.0, 1.0, 2.0])
    np.testing.assert_array_equal(defined[0, :, 0], [False, False, True, True, True])
    out, _ = shift_time(data, np.array([[-1]]))
    np.testing.assert_array_equal(out[0, :, 0], [1.0, 2.0, 3.0, 4.0, 0.0])


def test_temporal_shift_moves_input_and_target_together(rng):
    batch = make_batch(t_enc=8)
    ts = TemporalShift(max_shift=2)
    out = ts.process_batch(batch, rng)
    shifts = ts.shifts
    assert shifts.shape == (3, 5)
    assert np.all(np.abs(shifts) <= 2)
    assert np.all(shifts == shifts[:, :1])
    np.testing.assert_array_equal(out.encod_data, out.recon_data[:, :, :4])
    mask = ts.loss_mask(out)
    for trial, s in enumerate(shifts[:, 0]):
        assert mask[trial].sum() == (8 - abs(s)) * 5
    ts.reset()
    assert ts.shifts is None


def test_temporal_shift_relative_leaves_targets(rng):
    batch = make_batch()
    ts = TemporalShift(max_shift=1, per_neuron=True, relative=True)
    out = ts.process_batch(batch, rng)
    np.testing.assert_array_equal(out.recon_data, batch.recon_data)
    assert ts.loss_mask(out) is None


def test_stack_orders_and_composition(rng):
    batch = make_batch()
    stack = AugmentationStack(
        [CoordinatedDropout(rate=0.3), SelectiveBackpropThruTime(keep_every=2)],
        batch_order=[1, 0],
        loss_order=[0, 1],
    )
    augmented = stack.apply_batch(batch, rng)
    mask = stack.combined_mask(augmented)
    expected = stack.transforms[0].loss_mask(augmented) * stack.transforms[1].loss_mask(augmented)
    np.testing.assert_array_equal(mask, expected)
    stack.reset()
    assert stack.transforms[0].keep_mask is None


def test_empty_stack_is_identity(rng):
    batch = make_batch()
    stack = AugmentationStack()
    assert stack.apply_batch(batch, rng) is batch
    elements = Tensor(np.ones_like(batch.recon_data))
    assert stack.apply_loss(elements, batch) is elements


def test_stack_validation(rng):
    with pytest.raises(AugmentationError):
        AugmentationStack([CoordinatedDropout()], batch_order=[1])
    with pytest.raises(AugmentationError):
        AugmentationStack([CoordinatedDropout(), TemporalShift()], loss_order=[0, 0])
    batch = make_batch()
    with pytest.raises(ShapeError):
        AugmentationStack().apply_loss(Tensor(np.ones((1, 2, 3))), batch)
