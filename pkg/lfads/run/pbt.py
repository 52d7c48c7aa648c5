"""
Population-based training.

Every member trains for a generation; members are then ranked by their best
smoothed validation loss. Each member of the bottom quantile copies the
checkpoint (weights, optimizer moments, schedules) of a member drawn from the
top quantile and perturbs the copied hyperparameters. Copied members restart
their learning rate schedule from the new `lr_init`; survivors keep theirs.
Weights change only by training and by these copies.
"""
import asyncio
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import compose_config, set_path
from .instantiate import Registry, default_registry, validate_targets
from .multi import TrainJob, make_executor, run_bounded
from .space import SearchSpace, apply_values
from ..exceptions import PopulationError
from ..trainer import CHECKPOINT_DIR, LAST_CHECKPOINT
from ..utils.files import atomic_write_bytes, atomic_write_text
from ..utils.logger import logger

STATE_FILE = "pbt_state.json"


@dataclass
class Member:
    id: int
    hparams: Dict[str, Any]
    run_dir: str
    checkpoint: Optional[str] = None
    last_loss: Optional[float] = None
    best_loss: Optional[float] = None
    reset_lr: bool = False

    @property
    def rank_key(self) -> Tuple[float, int]:
        loss = self.best_loss
        return (math.inf if loss is None or not math.isfinite(loss) else loss), self.id

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Generation:
    generation: int
    members: List[Dict[str, Any]]
    events: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def best_loss(self) -> float:
        losses = [m["best_loss"] for m in self.members if m["best_loss"] is not None]
        return min(losses) if losses else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {"generation": self.generation, "best_loss": self.best_loss,
                "members": self.members, "events": self.events}


def quantile_size(population_size: int, quantile: float) -> int:
    return max(1, int(math.floor(quantile * population_size)))


def _snapshot(source: Union[str, Path], target: Path) -> str:
    atomic_write_bytes(target, Path(source).read_bytes())
    return str(target)


def _write_state(out_dir: Path, history: List[Generation], space: SearchSpace, settings: Dict[str, Any]) -> None:
    state = {
        "settings": settings,
        "space": space.to_dict(),
        "generations": [g.to_dict() for g in history],
    }
    atomic_write_text(out_dir / STATE_FILE, json.dumps(state, indent=2, sort_keys=True, default=str))


async def run_pbt_async(
        config_path: Union[str, Path],
        space: SearchSpace,
        population_size: int,
        generation_epochs: int,
        n_generations: int,
        exploit_quantile: float = 0.25,
        perturb_factors: Sequence[float] = (0.8, 1.2),
        seed: int = 0,
        out_dir: Union[str, Path] = "runs/pbt",
        overrides: Sequence[str] = (),
        n_workers: Optional[int] = None,
        registry: Registry = default_registry,
        executor: str = "process",
) -> List[Dict[str, Any]]:
    if population_size < 2:
        raise ValueError(f"population_size must be at least 2, got {population_size}.")
    if not 0.0 < exploit_quantile <= 0.5:
        raise ValueError(f"exploit_quantile must lie in (0, 0.5], got {exploit_quantile}.")
    if generation_epochs < 1 or n_generations < 1:
        raise ValueError("generation_epochs and n_generations must be at least 1.")

    out_dir = Path(out_dir)
    base = compose_config(config_path, overrides=overrides)
    space.validate(base)
    validate_targets(base, registry)
    set_path(base, "trainer.max_epochs", generation_epochs * n_generations, create=True)

    rng = np.random.default_rng(seed)
    n_workers = n_workers or population_size
    n_cut = quantile_size(population_size, exploit_quantile)
    members = [
        Member(id=i, hparams=space.sample(rng), run_dir=str(out_dir / f"member_{i:03d}"))
        for i in range(population_size)
    ]
    settings = {
        "population_size": population_size,
        "generation_epochs": generation_epochs,
        "n_generations": n_generations,
        "exploit_quantile": exploit_quantile,
        "perturb_factors": list(perturb_factors),
        "seed": seed,
    }
    history: List[Generation] = []

    logger.info(
        f"PBT: {population_size} members, {n_generations} generations of {generation_epochs} epochs, "
        f"exploiting the bottom {n_cut}"
    )
    with make_executor(executor, n_workers) as pool:
        for generation in range(1, n_generations + 1):
            jobs = [
                TrainJob(
                    apply_values(base, m.hparams),
                    Path(m.run_dir),
                    registry,
                    {
                        "resume_from": m.checkpoint,
                        "epochs": generation_epochs,
                        "reset_lr": m.reset_lr,
                        "restore_best": False,
                        "write_posterior": generation == n_generations,
                    },
                )
                for m in members
            ]
            for member in members:
                member.reset_lr = False
            outcomes = await run_bounded(
                jobs, n_workers, pool, labels=[f"generation {generation} member {m.id}" for m in members],
            )

            record = Generation(generation=generation, members=[])
            failed: Dict[int, str] = {}
            for member, outcome in zip(members, outcomes):
                if isinstance(outcome, BaseException):
                    failed[member.id] = f"{outcome.__class__.__name__}: {outcome}"
                    logger.warning(f"Member {member.id} failed in generation {generation}: {failed[member.id]}")
                    member.last_loss = member.best_loss = None
                    continue
                member.last_loss = outcome["last_loss"]
                member.best_loss = outcome["best_loss"]
                member.checkpoint = _snapshot(
                    Path(member.run_dir) / CHECKPOINT_DIR / LAST_CHECKPOINT,
                    Path(member.run_dir) / CHECKPOINT_DIR / f"gen_{generation:03d}.ckpt",
                )
            if len(failed) == len(members):
                raise PopulationError(generation, failed)

            ranked = sorted((m for m in members if m.id not in failed), key=lambda m: m.rank_key)
            top = ranked[:n_cut]

            for member in members:
                if member.id not in failed:
                    continue
                donor = top[int(rng.integers(len(top)))]
                member.checkpoint = _snapshot(
                    donor.checkpoint, Path(member.run_dir) / CHECKPOINT_DIR / f"restart_{generation:03d}.ckpt",
                )
                member.hparams = space.sample(rng)
                member.reset_lr = True
                member.best_loss, member.last_loss = donor.best_loss, donor.last_loss
                record.events.append({
                    "kind": "restart", "member": member.id, "from": donor.id,
                    "from_checkpoint": donor.checkpoint, "to_checkpoint": member.checkpoint,
                    "error": failed[member.id], "hparams": dict(member.hparams),
                })
                logger.info(f"Restarted member {member.id} from member {donor.id} with {member.hparams}")

            if generation < n_generations:
                top_ids = {m.id for m in top}
                bottom = [m for m in ranked[-n_cut:] if m.id not in top_ids]
                for member in bottom:
                    donor = top[int(rng.integers(len(top)))]
                    member.checkpoint = _snapshot(
                        donor.checkpoint, Path(member.run_dir) / CHECKPOINT_DIR / f"exploit_{generation:03d}.ckpt",
                    )
                    before = dict(donor.hparams)
                    member.hparams, actions = space.explore(before, rng, tuple(perturb_factors))
                    member.reset_lr = True
                    member.best_loss, member.last_loss = donor.best_loss, donor.last_loss
                    record.events.append({
                        "kind": "exploit", "member": member.id, "from": donor.id,
                        "from_checkpoint": donor.checkpoint, "to_checkpoint": member.checkpoint,
                        "copied": before, "explored": dict(member.hparams), "actions": actions,
                    })
                    logger.info(
                        f"Member {member.id} exploits member {donor.id}; explore {actions} -> {member.hparams}"
                    )

            record.members = [m.to_dict() for m in members]
            history.append(record)
            _write_state(out_dir, history, space, settings)
            logger.info(f"Generation {generation} done; best smoothed validation loss {record.best_loss:.4f}")

    return [g.to_dict() for g in history]


def run_pbt(
        config_path: Union[str, Path],
        space: SearchSpace,
        population_size: int,
        generation_epochs: int,
        n_generations: int,
        exploit_quantile: float = 0.25,
        perturb_factors: Sequence[float] = (0.8, 1.2),
        seed: int = 0,
        out_dir: Union[str, Path] = "runs/pbt",
        overrides: Sequence[str] = (),
        n_workers: Optional[int] = None,
        registry: Registry = default_registry,
        executor: str = "process",
) -> List[Dict[str, Any]]:
    """
    Train a population with periodic exploit and explore steps.

    :param config_path: Main config file.
    :param space: The hyperparameters to explore and their bounds.
    :param population_size: Number of members, at least 2.
    :param generation_epochs: Epochs trained per generation.
    :param n_generations: Number of generations.
    :param exploit_quantile: Fraction of members in the top and bottom groups, in (0, 0.5].
    :param perturb_factors: Multiplicative perturbations of continuous hyperparameters.
    :param seed: Seed of the coordinator's draws.
    :param out_dir: Directory receiving member run directories and ``pbt_state.json``.
    :param overrides: Overrides applied to the base config.
    :param n_workers: Concurrent members, the whole population by default.
    :param registry: Known components.
    :param executor: "process" or "thread" worker pool.
    :return: One record per generation with member states and exploit/explore events.
    """
    return asyncio.run(run_pbt_async(
        config_path, space, population_size, generation_epochs, n_generations, exploit_quantile,
        perturb_factors, seed, out_dir, overrides, n_workers, registry, executor,
    ))
