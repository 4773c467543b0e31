"""
Closed-form precision limits and energy bounds.
"""
import math
from typing import Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from src.core.cv_state import VACUUM_ENERGY
from src.core.exceptions import InvalidRange, LengthMismatch, NonPositiveInput, SingularParameterization
from src.core.weyl import SQRT2


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise NonPositiveInput(f"{name} must be positive, got {value}")


class BoundQuery(BaseModel):
    """Inputs shared by the analytic bounds."""

    model_config = ConfigDict(frozen=True)

    n: int
    nu: int
    energy: float = VACUUM_ENERGY
    x_bar: float
    p_bar: float
    z_max: float

    @field_validator("n", "nu")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("energy")
    @classmethod
    def _physical_energy(cls, value: float) -> float:
        if value < VACUUM_ENERGY:
            raise ValueError(f"probe energy cannot be below the vacuum value {VACUUM_ENERGY}")
        return value

    @classmethod
    def from_ranges(
        cls,
        n: int,
        nu: int,
        x_range: Tuple[float, float],
        p_range: Tuple[float, float],
        energy: float = VACUUM_ENERGY,
        x_bar: Optional[float] = None,
        p_bar: Optional[float] = None,
    ) -> "BoundQuery":
        """z_max = max(|x_min|, |x_max|, |p_min|, |p_max|); means default to range midpoints."""
        for lo, hi in (x_range, p_range):
            if lo > hi:
                raise InvalidRange(f"Range [{lo}, {hi}] has min > max")
        return cls(
            n=n,
            nu=nu,
            energy=energy,
            x_bar=sum(x_range) / 2 if x_bar is None else x_bar,
            p_bar=sum(p_range) / 2 if p_bar is None else p_bar,
            z_max=max(abs(v) for v in (*x_range, *p_range)),
        )


def single_displacement_crb(energy: float, nu: int) -> float:
    """Δz >= 1/√(8 ν E) for any displacement estimated with probe energy E."""
    _positive("energy", energy)
    _positive("nu", nu)
    return 1.0 / math.sqrt(8.0 * nu * energy)


def phase_rmse(nu: int) -> float:
    """RMSE 1/√ν of the control phase read out from nu binary outcomes."""
    _positive("nu", nu)
    return 1.0 / math.sqrt(nu)


def switch_rmse_control(n: int, nu: int) -> float:
    _positive("n", n)
    _positive("nu", nu)
    return 1.0 / (math.sqrt(nu) * n ** 2)


def switch_rmse_joint(x_bar: float, p_bar: float, n: int, nu: int) -> float:
    """Control plus heterodyne readout; never above switch_rmse_control."""
    spread = x_bar ** 2 + p_bar ** 2
    if spread == 0:
        raise SingularParameterization("Joint RMSE is undefined for x_bar = p_bar = 0")
    return switch_rmse_control(n, nu) * math.sqrt(spread / (spread + 1.0 / n ** 2))


def ion_trap_rmse(n: int, nu: int) -> float:
    return switch_rmse_control(n, nu) / 2.0


def parallel_rmse(x_bar: float, p_bar: float, n: int, nu: int) -> float:
    """Vacuum homodyne on every box, Â = x̂ p̂ from the 2N sample means."""
    _positive("n", n)
    _positive("nu", nu)
    return math.sqrt((x_bar ** 2 + p_bar ** 2) / (2.0 * nu * n))


def sequential_rmse(x_bar: float, p_bar: float, n: int, nu: int) -> float:
    """Two probes accumulating N x_bar and N p_bar, homodyned on vacuum."""
    _positive("n", n)
    _positive("nu", nu)
    return math.sqrt(x_bar ** 2 + p_bar ** 2) / (n * math.sqrt(2.0 * nu))


def fixed_order_bound(x_bar: float, p_bar: float, energy: float, n: int, nu: int) -> float:
    """Floor on any fixed-order scheme: min(|x_bar|, |p_bar|) / (√(8 ν E) N)."""
    _positive("n", n)
    return min(abs(x_bar), abs(p_bar)) * single_displacement_crb(energy, nu) / n


def general_fixed_order_bound(c: Sequence[float], delta_z: Sequence[float], n: int) -> float:
    """min_j |c_j| Δz_j / N over the 2N displacements."""
    _positive("n", n)
    if len(c) != 2 * n or len(delta_z) != 2 * n:
        raise LengthMismatch(f"Expected {2 * n} coefficients and errors, got {len(c)} and {len(delta_z)}")
    if any(dz < 0 for dz in delta_z):
        raise InvalidRange("Per-displacement errors must be non-negative")
    return min(abs(cj) * dz for cj, dz in zip(c, delta_z)) / n


def energy_recursion(e0: float, gate_energies: Sequence[float], z_max: float, steps: int) -> float:
    """Largest energy reachable after `steps` displacements of size <= z_max.

    Each step obeys √E_{k+1} <= √E_k + z_max/√2 + √e_k; missing gate energies count as 0.
    """
    if e0 < 0 or any(e < 0 for e in gate_energies):
        raise NonPositiveInput("Energies must be non-negative")
    if steps < 0:
        raise InvalidRange(f"steps must be >= 0, got {steps}")
    gates = list(gate_energies[:steps])
    root = math.fsum([math.sqrt(e0), steps * abs(z_max) / SQRT2] + [math.sqrt(e) for e in gates])
    return root ** 2


def energy_budget_bound(steps: int, z_max: float, budget: float) -> float:
    """(steps z_max/√2 + √((steps + 1) E))², when the total energy requirement is at most E."""
    if budget < 0 or steps < 0:
        raise NonPositiveInput("Budget and step count must be non-negative")
    return (steps * abs(z_max) / SQRT2 + math.sqrt((steps + 1) * budget)) ** 2


def superposition_bound(p_bar: float, n: int, nu: int, z_max: float, energy_budget: float) -> float:
    """Precision limit for coherent superpositions of causally ordered circuits.

    ΔA >= p̄ / (4 √ν N² (z_max + √((2N + 1) E / (2N²)))); scales as 1/N².
    """
    _positive("p_bar", p_bar)
    _positive("n", n)
    _positive("nu", nu)
    if energy_budget < 0:
        raise NonPositiveInput(f"Energy budget must be non-negative, got {energy_budget}")
    spread = abs(z_max) + math.sqrt((2 * n + 1) * energy_budget / (2 * n ** 2))
    _positive("z_max + energy term", spread)
    return p_bar / (4.0 * math.sqrt(nu) * n ** 2 * spread)
