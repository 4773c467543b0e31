"""
Coherent-state phase-space simulation.

Displacements keep a coherent state coherent, so a probe is fully described
by its complex amplitude. Homodyne outcomes are Gaussian with variance 1/2
around √2 Re(alpha) (X) or √2 Im(alpha) (P); heterodyne outcomes are
alpha plus complex Gaussian noise with independent N(0, 1/2) components.
"""
import math
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.weyl import SQRT2, Displacement, DisplacementWord

VACUUM_ENERGY = 0.5
SHOT_NOISE_STD = math.sqrt(0.5)


class Quadrature(str, Enum):
    X = "X"
    P = "P"


class CoherentState(BaseModel):
    """Coherent probe |alpha>; the vacuum has alpha = 0."""

    model_config = ConfigDict(frozen=True)

    alpha: complex = 0j


class HeterodyneSample(BaseModel):
    """One heterodyne outcome beta."""

    model_config = ConfigDict(frozen=True)

    beta: complex


def displace(s: CoherentState, d: Displacement) -> CoherentState:
    return CoherentState(alpha=s.alpha + d.alpha)


def apply_word(s: CoherentState, word: DisplacementWord) -> CoherentState:
    """Apply every factor of a word; the global phase is weyl.normalize's business."""
    return CoherentState(alpha=s.alpha + word.total_alpha)


def energy(s: CoherentState) -> float:
    """E = <(X² + P²)/2> = |alpha|² + 1/2."""
    return abs(s.alpha) ** 2 + VACUUM_ENERGY


def energy_trajectory(s: CoherentState, word: DisplacementWord) -> List[float]:
    """Energies after each factor, in time order (rightmost factor first)."""
    energies = []
    state = s
    for d in reversed(word.factors):
        state = displace(state, d)
        energies.append(energy(state))
    return energies


def mean_quadratures(s: CoherentState) -> Tuple[float, float]:
    return SQRT2 * s.alpha.real, SQRT2 * s.alpha.imag


def sample_homodyne(
    s: CoherentState,
    quadrature: Union[Quadrature, str],
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """Homodyne outcome(s) of X or P on a coherent state."""
    quadrature = Quadrature(quadrature)
    mean_x, mean_p = mean_quadratures(s)
    mean = mean_x if quadrature is Quadrature.X else mean_p
    sample = rng.normal(loc=mean, scale=SHOT_NOISE_STD, size=size)
    return float(sample) if size is None else sample


def sample_heterodyne(
    s: CoherentState,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> Union[HeterodyneSample, np.ndarray]:
    """Heterodyne outcome(s); with size set, a complex array of betas."""
    shape = (2,) if size is None else (2, size)
    noise = rng.normal(loc=0.0, scale=SHOT_NOISE_STD, size=shape)
    betas = s.alpha + noise[0] + 1j * noise[1]
    if size is None:
        return HeterodyneSample(beta=complex(betas))
    return betas


def heterodyne_density(s: CoherentState, beta: Union[complex, np.ndarray]) -> Union[float, np.ndarray]:
    """(1/π) exp(-|alpha - beta|²)."""
    density = np.exp(-np.abs(s.alpha - np.asarray(beta)) ** 2) / np.pi
    return float(density) if np.ndim(density) == 0 else density
