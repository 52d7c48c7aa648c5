from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional


ARCHITECTURE_FIELDS = (
    "encod_dim", "ci_enc_dim", "ic_dim", "ci_lag", "con_dim", "co_dim", "gen_dim", "fac_dim",
    "n_heldin", "n_recon", "encod_steps", "recon_steps",
)


def ramp(step: int, start: int, increase: int) -> float:
    """
    Linear warm-up weight ``clamp((step - start) / increase, 0, 1)``.

    With ``increase == 0`` the weight jumps from 0 to 1 at ``start``.

    :param step: Global optimizer step.
    :param start: First step of the ramp.
    :param increase: Number of steps until full weight.
    :return: The weight in [0, 1].
    """
    if increase <= 0:
        return 1.0 if step >= start else 0.0
    return float(min(max((step - start) / increase, 0.0), 1.0))


@dataclass
class LFADSConfig:
    """
    Dimensions, loss weights and schedules of an LFADS model.

    ``co_dim == 0`` removes the controller, the inferred-input encoder and the
    inferred-input KL term. The data dimensions (``n_heldin``, ``n_recon``,
    ``encod_steps``, ``recon_steps``) are normally supplied by the datamodule.
    """
    n_heldin: int = 1
    n_recon: int = 1
    encod_steps: int = 1
    recon_steps: int = 1

    encod_dim: int = 64
    ci_enc_dim: Optional[int] = None
    ic_dim: int = 64
    ci_lag: int = 1
    con_dim: int = 32
    co_dim: int = 4
    gen_dim: int = 100
    fac_dim: int = 20

    dropout_rate: float = 0.0
    cell_clip: float = 5.0

    kl_ic_scale: float = 1.0
    kl_co_scale: float = 1.0
    l2_gen_scale: float = 0.0
    l2_con_scale: float = 0.0
    kl_start: int = 0
    kl_increase: int = 0
    l2_start: int = 0
    l2_increase: int = 0

    def __post_init__(self) -> None:
        if self.ci_enc_dim is None:
            self.ci_enc_dim = self.encod_dim

        positive = ("n_heldin", "n_recon", "encod_steps", "recon_steps", "encod_dim",
                    "ci_enc_dim", "ic_dim", "gen_dim", "fac_dim")
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"LFADSConfig.{name} must be at least 1, got {getattr(self, name)}.")
        if self.co_dim < 0:
            raise ValueError(f"LFADSConfig.co_dim must be non-negative, got {self.co_dim}.")
        if self.co_dim and self.con_dim < 1:
            raise ValueError("LFADSConfig.con_dim must be at least 1 when the controller is enabled.")
        if self.ci_lag < 0:
            raise ValueError(f"LFADSConfig.ci_lag must be non-negative, got {self.ci_lag}.")
        if self.n_recon < self.n_heldin or self.recon_steps < self.encod_steps:
            raise ValueError(
                f"Reconstruction ({self.recon_steps} x {self.n_recon}) must cover the encoder input "
                f"({self.encod_steps} x {self.n_heldin})."
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"LFADSConfig.dropout_rate must lie in [0, 1), got {self.dropout_rate}.")
        weights = ("kl_ic_scale", "kl_co_scale", "l2_gen_scale", "l2_con_scale", "cell_clip")
        for name in weights:
            if getattr(self, name) < 0:
                raise ValueError(f"LFADSConfig.{name} must be non-negative, got {getattr(self, name)}.")

    @property
    def has_controller(self) -> bool:
        return self.co_dim > 0

    @property
    def fp_steps(self) -> int:
        return self.recon_steps - self.encod_steps

    def kl_ramp(self, step: int) -> float:
        return ramp(step, self.kl_start, self.kl_increase)

    def l2_ramp(self, step: int) -> float:
        return ramp(step, self.l2_start, self.l2_increase)

    def architecture(self) -> Dict[str, Any]:
        """
        The fields that determine parameter shapes.

        :return: Mapping of architecture field to value.
        """
        return {name: getattr(self, name) for name in ARCHITECTURE_FIELDS}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def field_names(cls) -> frozenset:
        return frozenset(f.name for f in fields(cls))
