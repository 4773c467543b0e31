import logging
import math
import warnings
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, field_validator, model_validator

from src.core.exceptions import InvalidRange, LengthMismatch, ZeroMeanWarning

logger = logging.getLogger(__name__)

Ranges = Tuple[float, float, float, float]


class SchemeTag(str, Enum):
    PARALLEL = "parallel"
    SEQUENTIAL = "sequential"
    SWITCH_CONTROL = "switch_control"
    SWITCH_JOINT = "switch_joint"
    ION_TRAP = "ion_trap"
    BETA_PROBE = "beta_probe"


class ProblemInstance(BaseModel):
    """The 2N hidden displacements and the target A = x_bar * p_bar.

    Built directly, bad displacements surface as pydantic's ValidationError;
    make_instance raises InvalidRange or LengthMismatch instead.
    """

    model_config = ConfigDict(frozen=True)

    xs: Tuple[float, ...]
    ps: Tuple[float, ...]

    @field_validator("xs", "ps")
    @classmethod
    def _finite(cls, values: Tuple[float, ...]) -> Tuple[float, ...]:
        if not values:
            raise InvalidRange("An instance needs at least one box of each kind (n >= 1)")
        if not all(math.isfinite(v) for v in values):
            raise InvalidRange("Displacements must be finite")
        return values

    @model_validator(mode="after")
    def _same_length(self) -> "ProblemInstance":
        if len(self.xs) != len(self.ps):
            raise LengthMismatch(f"{len(self.xs)} x displacements but {len(self.ps)} p displacements")
        return self

    @computed_field
    @property
    def n(self) -> int:
        return len(self.xs)

    @computed_field
    @property
    def x_bar(self) -> float:
        return math.fsum(self.xs) / len(self.xs)

    @computed_field
    @property
    def p_bar(self) -> float:
        return math.fsum(self.ps) / len(self.ps)

    @computed_field
    @property
    def A(self) -> float:
        return self.x_bar * self.p_bar

    @property
    def switch_phase(self) -> float:
        """N²A, the phase the SWITCH imprints on the control."""
        return self.n ** 2 * self.A

    @property
    def has_zero_mean(self) -> bool:
        return self.x_bar == 0.0 or self.p_bar == 0.0


class SchemeOutcomes(BaseModel):
    """Raw measurement record of nu repetitions of one scheme."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scheme_tag: SchemeTag
    nu: int
    control_counts: Optional[Tuple[int, int]] = None
    heterodyne: Optional[np.ndarray] = None
    homodyne: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _consistent_lengths(self) -> "SchemeOutcomes":
        if self.control_counts is not None and sum(self.control_counts) != self.nu:
            raise LengthMismatch(f"Counts {self.control_counts} do not sum to nu = {self.nu}")
        for name in ("heterodyne", "homodyne"):
            samples = getattr(self, name)
            if samples is not None and samples.shape[0] != self.nu:
                raise LengthMismatch(f"{name} record has {samples.shape[0]} rows, expected {self.nu}")
        return self


def _check_range(lo: float, hi: float, label: str) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidRange(f"{label} range [{lo}, {hi}] is not finite")
    if lo > hi:
        raise InvalidRange(f"{label} range has min {lo} > max {hi}")


def make_instance(
    n: int,
    ranges: Optional[Ranges] = None,
    rng: Optional[np.random.Generator] = None,
    xs: Optional[Sequence[float]] = None,
    ps: Optional[Sequence[float]] = None,
) -> ProblemInstance:
    """Draw the 2N displacements uniformly from the ranges, or pass explicit lists through."""
    if n < 1:
        raise InvalidRange(f"Number of boxes per kind must be >= 1, got {n}")

    if xs is None or ps is None:
        if ranges is None or rng is None:
            raise InvalidRange("Either explicit xs/ps or ranges and a generator are required")
        x_min, x_max, p_min, p_max = ranges
        _check_range(x_min, x_max, "x")
        _check_range(p_min, p_max, "p")
        xs = rng.uniform(x_min, x_max, size=n) if xs is None else xs
        ps = rng.uniform(p_min, p_max, size=n) if ps is None else ps

    if len(xs) != n or len(ps) != n:
        raise LengthMismatch(f"Expected {n} displacements per kind, got {len(xs)} and {len(ps)}")
    if not all(math.isfinite(v) for v in (*xs, *ps)):
        raise InvalidRange("Displacements must be finite")

    instance = ProblemInstance(xs=tuple(float(x) for x in xs), ps=tuple(float(p) for p in ps))
    if instance.has_zero_mean:
        message = f"Instance with x_bar = {instance.x_bar}, p_bar = {instance.p_bar} blocks Fisher-matrix operations"
        logger.warning(message)
        warnings.warn(message, ZeroMeanWarning, stacklevel=2)
    return instance


def uniform_instance(n: int, x_bar: float, p_bar: float) -> ProblemInstance:
    """All x boxes equal to x_bar, all p boxes equal to p_bar."""
    return make_instance(n, xs=[x_bar] * n, ps=[p_bar] * n)


def switch_instance(n: int, phase: float) -> ProblemInstance:
    """Instance with x_bar = p_bar = √phase / N, so that N²A = phase."""
    z_bar = math.sqrt(phase) / n
    return uniform_instance(n, z_bar, z_bar)


def instances_from_ranges(n: int, ranges: Ranges, rng: np.random.Generator, count: int) -> List[ProblemInstance]:
    return [make_instance(n, ranges=ranges, rng=rng) for _ in range(count)]
