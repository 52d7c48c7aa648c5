from __future__ import annotations

from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import LFADSConfig
from .gru import GRUParams, gru_cell, initial_state, run_gru
from .output import LFADSOutput
from .params import LFADSParams
from ..augmentations import AugmentationStack
from ..datasets.data import TrialBatch
from ..exceptions import ShapeError
from ..priors import (
    GaussianPosterior,
    MultivariateNormal,
    Prior,
    kl_gaussian_diag,
    kl_sampled,
    sample,
)
from ..recons import Poisson, Reconstruction
from ..tensor import Tensor, concat, expand, linear, matmul, reduce_mean, reduce_sum, reshape, square, stack
from ..tensor.ops import mul, transpose, zeros
from ..utils.files import sha256_hex

PHASES = ("train", "infer")


class LFADS:
    """
    Sequential variational autoencoder for trial-structured neural data.

    The initial-condition encoder summarizes the encoder input into a
    posterior over the generator's initial state; the optional controller
    reads a second encoding step by step and emits inferred inputs; the
    generator unrolls over the reconstruction window; its state is read out
    into factors and then into observation-model parameters.
    """

    def __init__(
            self,
            recon: Optional[Reconstruction] = None,
            ic_prior: Optional[Prior] = None,
            co_prior: Optional[Prior] = None,
            train_aug_stack: Optional[AugmentationStack] = None,
            infer_aug_stack: Optional[AugmentationStack] = None,
            seed: int = 0,
            **hparams: Any,
    ) -> None:
        """
        :param recon: Observation model, Poisson by default.
        :param ic_prior: Prior over the initial condition.
        :param co_prior: Prior over the inferred inputs.
        :param train_aug_stack: Augmentations applied while training.
        :param infer_aug_stack: Augmentations applied for validation and inference.
        :param seed: Seed of the weight initialization.
        :param hparams: Fields of :class:`LFADSConfig`.
        """
        self.config = LFADSConfig(**hparams)
        self.recon = (recon or Poisson()).setup(self.config.n_recon)
        self.ic_prior = (ic_prior or MultivariateNormal()).build(self.config.ic_dim)
        self.co_prior: Optional[Prior] = None
        if self.config.has_controller:
            self.co_prior = (co_prior or MultivariateNormal()).build(self.config.co_dim)
        self.train_aug_stack = train_aug_stack or AugmentationStack()
        self.infer_aug_stack = infer_aug_stack or AugmentationStack()
        self.seed = seed

        self.params = LFADSParams.initialize(self.config, self.recon.n_params, np.random.default_rng(seed))
        self.params.register("recon", self.recon.parameters())
        self.params.register("ic_prior", self.ic_prior.parameters())
        if self.co_prior is not None:
            self.params.register("co_prior", self.co_prior.parameters())

    def __repr__(self) -> str:
        c = self.config
        return (
            f"LFADS(n_heldin={c.n_heldin}, n_recon={c.n_recon}, ic_dim={c.ic_dim}, "
            f"co_dim={c.co_dim}, gen_dim={c.gen_dim}, fac_dim={c.fac_dim}, recon={self.recon.name})"
        )

    def architecture(self) -> Dict[str, Any]:
        """
        :return: Everything that determines the parameter layout.
        """
        arch = self.config.architecture()
        arch["recon"] = repr(self.recon)
        arch["recon_params"] = self.recon.n_params
        arch["ic_prior"] = self.ic_prior.__class__.__name__
        arch["co_prior"] = None if self.co_prior is None else self.co_prior.__class__.__name__
        arch["params"] = {name: list(t.shape) for name, t in self.params.items()}
        return arch

    def config_hash(self) -> str:
        """
        Digest of :meth:`architecture`, checked when a checkpoint is loaded.

        Only the parameter layout is hashed. Loss weights, ramps, dropout and
        clipping settings are left out, so a checkpoint still loads after
        population-based training changes them.

        :return: Hexadecimal SHA-256 digest.
        """
        return sha256_hex(self.architecture())

    def stack_for(self, phase: str) -> AugmentationStack:
        if phase not in PHASES:
            raise ValueError(f"Unknown phase '{phase}'; expected one of {PHASES}.")
        return self.train_aug_stack if phase == "train" else self.infer_aug_stack

    def augment(self, batch: TrialBatch, rng: np.random.Generator, phase: str = "train") -> TrialBatch:
        """
        Run the batch phase of the stack selected by ``phase``.
        """
        return self.stack_for(phase).apply_batch(batch, rng)

    def _check_batch(self, batch: TrialBatch) -> None:
        c = self.config
        expected_encod = (c.encod_steps, c.n_heldin)
        expected_recon = (c.recon_steps, c.n_recon)
        if batch.encod_data.shape[1:] != expected_encod:
            raise ShapeError("LFADS.forward", batch.encod_data.shape[1:], expected_encod,
                             reason="encod_data does not match the model configuration.")
        if batch.recon_data.shape[1:] != expected_recon:
            raise ShapeError("LFADS.forward", batch.recon_data.shape[1:], expected_recon,
                             reason="recon_data does not match the model configuration.")

    def _dropout(self, x: Tensor, rng: Optional[np.random.Generator], active: bool) -> Tensor:
        rate = self.config.dropout_rate
        if not active or rate == 0.0:
            return x
        keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
        return mul(x, Tensor(keep))

    def _encode(self, prefix: str, steps: List[Tensor], batch: int) -> Tuple[List[Tensor], List[Tensor]]:
        clip_value = self.config.cell_clip
        fwd = GRUParams.from_params(self.params.tensors, f"{prefix}.fwd")
        bwd = GRUParams.from_params(self.params.tensors, f"{prefix}.bwd")
        h_fwd = initial_state(self.params[f"{prefix}.fwd.h0"], batch)
        h_bwd = initial_state(self.params[f"{prefix}.bwd.h0"], batch)
        return (
            run_gru(fwd, steps, h_fwd, clip_value),
            run_gru(bwd, steps, h_bwd, clip_value, reverse=True),
        )

    def _factors(self, state: Tensor, rng: Optional[np.random.Generator], dropout: bool) -> Tensor:
        return matmul(self._dropout(state, rng, dropout), transpose(self.params["factors.w"]))

    def forward(
            self,
            batch: TrialBatch,
            rng: Optional[np.random.Generator] = None,
            deterministic: bool = False,
            training: bool = False,
    ) -> LFADSOutput:
        """
        Run the network on a batch.

        :param batch: Batch after the augmentation batch phase.
        :param rng: Generator for posterior samples and dropout.
        :param deterministic: Use posterior means and disable dropout.
        :param training: Enable dropout.
        :return: The forward-pass record.
        """
        self._check_batch(batch)
        c = self.config
        p = self.params
        n = batch.size
        dropout = training and not deterministic
        if not deterministic and rng is None:
            raise ValueError("A stochastic forward pass needs a random generator.")

        encod = self._dropout(Tensor(batch.encod_data), rng, dropout)
        steps = [encod[:, t, :] for t in range(c.encod_steps)]

        ic_fwd, ic_bwd = self._encode("ic_enc", steps, n)
        ic_summary = concat([ic_fwd[-1], ic_bwd[0]], axis=1)
        ic_posterior = self.ic_prior.make_posterior(linear(ic_summary, p["ic_to_post.w"], p["ic_to_post.b"]))
        ic_sample = sample(ic_posterior, rng, deterministic)
        gen_state = linear(ic_sample, p["ic_to_g0.w"], p["ic_to_g0.b"])
        gen_init = gen_state

        gen = GRUParams.from_params(p.tensors, "gen")
        factors = self._factors(gen_state, rng, dropout)

        co_means, co_logvars, co_samples, gen_inputs = [], [], [], []
        ci_fwd = ci_bwd = None
        con_state = None
        con = None
        if c.has_controller:
            ci_fwd, ci_bwd = self._encode("ci_enc", steps, n)
            con = GRUParams.from_params(p.tensors, "con")
            con_state = initial_state(p["con.h0"], n)
            prior_mean = expand(self.co_prior.mean(), (n, c.co_dim))

        all_factors = []
        for t in range(c.recon_steps):
            u = None
            if c.has_controller:
                if t < c.encod_steps:
                    lagged = t + c.ci_lag
                    bwd = ci_bwd[lagged] if lagged < c.encod_steps else zeros((n, c.ci_enc_dim))
                    con_input = concat([ci_fwd[t], bwd, factors], axis=1)
                    con_state = gru_cell(con, con_input, con_state, c.cell_clip)
                    co_raw = linear(con_state, p["con_to_post.w"], p["con_to_post.b"])
                    co_posterior = self.co_prior.make_posterior(co_raw)
                    u = sample(co_posterior, rng, deterministic)
                    co_means.append(co_posterior.mean)
                    co_logvars.append(co_posterior.logvar)
                    co_samples.append(u)
                else:
                    u = prior_mean
                gen_inputs.append(u)
            gen_state = gru_cell(gen, u, gen_state, c.cell_clip)
            factors = self._factors(gen_state, rng, dropout)
            all_factors.append(factors)

        factors_seq = stack(all_factors, axis=1)
        flat = reshape(factors_seq, (n * c.recon_steps, c.fac_dim))
        raw_flat = linear(flat, p["readout.w"], p["readout.b"])
        raw = reshape(raw_flat, (n, c.recon_steps, raw_flat.shape[1]))
        means = self.recon.mean(raw)

        co_posterior_seq = co_sample_seq = gen_input_seq = None
        if c.has_controller:
            co_posterior_seq = GaussianPosterior(stack(co_means, axis=1), stack(co_logvars, axis=1))
            co_sample_seq = stack(co_samples, axis=1)
            gen_input_seq = stack(gen_inputs, axis=1)

        return LFADSOutput(
            batch=batch,
            ic_posterior=ic_posterior,
            ic_sample=ic_sample,
            factors=factors_seq,
            raw=raw,
            means=means,
            gen_init=gen_init,
            co_posterior=co_posterior_seq,
            co_sample=co_sample_seq,
            gen_inputs=gen_input_seq,
        )

    def recon_elements(self, output: LFADSOutput, phase: str = "train") -> Tensor:
        """
        Per-element reconstruction NLL after sample weights and loss-phase augmentation.

        :return: Tensor shaped like ``recon_data``.
        """
        batch = output.batch
        nll = self.recon.nll(output.raw, batch.recon_data, mask=batch.sample_mask)
        if not np.all(batch.sample_mask == 1.0):
            nll = mul(nll, Tensor(batch.sample_mask))
        return self.stack_for(phase).apply_loss(nll, batch)

    def l2_penalty(self, prefix: str) -> Tensor:
        total = Tensor(0.0)
        for weight in self.params.recurrent_weights(prefix):
            total = total + reduce_sum(square(weight)) * 0.5
        return total

    def kl_ic(self, output: LFADSOutput) -> Tensor:
        if isinstance(self.ic_prior, MultivariateNormal):
            per_trial = kl_gaussian_diag(output.ic_posterior, self.ic_prior)
        else:
            per_trial = kl_sampled(output.ic_posterior, self.ic_prior, output.ic_sample)
        return reduce_mean(per_trial)

    def kl_co(self, output: LFADSOutput) -> Tensor:
        if output.co_posterior is None:
            return Tensor(0.0)
        return reduce_mean(kl_sampled(output.co_posterior, self.co_prior, output.co_sample))

    def loss(
            self,
            output: LFADSOutput,
            step: int,
            phase: str = "train",
    ) -> Tuple[Tensor, Dict[str, float]]:
        """
        The training objective.

        ``total = recon + kl_ramp * (kl_ic_scale * KL_ic + kl_co_scale * KL_co)
        + l2_ramp * (l2_gen_scale * L2_gen + l2_con_scale * L2_con)`` where
        ``recon`` is the masked NLL summed per trial and averaged over trials.

        :param output: The forward pass to score.
        :param step: Global optimizer step, used by the ramps.
        :param phase: Selects the augmentation stack whose loss phase applies.
        :return: The scalar loss and a record of its weighted components,
            the ramp values and ``total_full``, the total at full ramp weight.
        """
        c = self.config
        elements = self.recon_elements(output, phase)
        recon = reduce_mean(reduce_sum(elements, axis=(1, 2)))
        kl_ic = self.kl_ic(output)
        kl_co = self.kl_co(output)
        l2 = self.l2_penalty("gen") * c.l2_gen_scale
        if c.has_controller:
            l2 = l2 + self.l2_penalty("con") * c.l2_con_scale

        kl_ramp, l2_ramp = c.kl_ramp(step), c.l2_ramp(step)
        kl_ic_term = kl_ic * (kl_ramp * c.kl_ic_scale)
        kl_co_term = kl_co * (kl_ramp * c.kl_co_scale)
        l2_term = l2 * l2_ramp
        total = recon + kl_ic_term + kl_co_term + l2_term

        components = {
            "recon": recon.item(),
            "kl_ic": kl_ic_term.item(),
            "kl_co": kl_co_term.item(),
            "l2": l2_term.item(),
            "total": total.item(),
            "kl_ramp": kl_ramp,
            "l2_ramp": l2_ramp,
            "total_full": recon.item() + c.kl_ic_scale * kl_ic.item()
                          + c.kl_co_scale * kl_co.item() + l2.item(),
        }
        return total, components

    def posterior_average(
            self,
            batch: TrialBatch,
            n_samples: int,
            rng: np.random.Generator,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Average output means and factors over stochastic forward passes.

        :param batch: Unaugmented batch.
        :param n_samples: Number of posterior samples, at least 1.
        :param rng: Generator for the posterior samples.
        :return: Averaged means [batch x T_recon x N_recon] and factors [batch x T_recon x fac_dim].
        """
        if n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {n_samples}.")
        means = np.zeros(batch.recon_data.shape)
        factors = np.zeros((batch.size, self.config.recon_steps, self.config.fac_dim))
        for _ in range(n_samples):
            output = self.forward(batch, rng=rng, deterministic=False, training=False)
            means += output.means.data
            factors += output.factors.data
        return means / n_samples, factors / n_samples
