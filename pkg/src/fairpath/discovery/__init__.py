"""Structure learning: stable PC, GES, FCI and linear NOTEARS."""

from dataclasses import dataclass, field

from ..errors import DataError
from ..stats import Dataset


@dataclass(frozen=True)
class NotearsConfig:
    lambda_l1: float = 0.1
    threshold: float = 0.0
    max_dual_iters: int = 100
    tol: float = 1e-8
    rho_max: float = 1e16

    def __post_init__(self):
        if self.lambda_l1 < 0:
            raise DataError("lambda must be >= 0")
        if self.threshold < 0:
            raise DataError("threshold must be >= 0")


@dataclass(frozen=True)
class DiscoveryConfig:
    alpha: float = 0.05
    max_cond_set: int = None  # None = unlimited
    standardize: bool = True
    notears: NotearsConfig = field(default_factory=NotearsConfig)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DataError("alpha must be in (0, 1)")
        if self.max_cond_set is not None and self.max_cond_set < 0:
            raise DataError("max_cond_set must be >= 0")


def prepare(data: Dataset, cfg: DiscoveryConfig) -> Dataset:
    """Shared preprocessing: size guard plus optional standardization."""
    if data.n < data.d + 4:
        raise DataError(
            f"need n >= d + 4 for discovery (n={data.n}, d={data.d})"
        )
    return data.standardized() if cfg.standardize else data


from .pc import pc  # noqa: E402
from .ges import ges  # noqa: E402
from .fci import fci  # noqa: E402
from .notears import notears_linear  # noqa: E402

ALGORITHMS = ("pc", "ges", "fci", "notears")


def run(algo: str, data: Dataset, cfg: DiscoveryConfig):
    """Dispatch by algorithm name; returns the learned graph."""
    if algo == "pc":
        return pc(data, cfg)[0]
    if algo == "ges":
        return ges(data, cfg)
    if algo == "fci":
        return fci(data, cfg)
    if algo == "notears":
        return notears_linear(data, cfg).graph
    raise DataError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
