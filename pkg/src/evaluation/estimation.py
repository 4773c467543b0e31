"""
Estimators and Fisher information for the estimation protocols.

Parameters of the joint SWITCH readout are ordered (A, x_bar); p_bar = A / x_bar.
"""
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize_scalar
from scipy.special import xlogy

from src.core.exceptions import (
    ConfigurationError,
    DegenerateCounts,
    InvalidRange,
    NonPositiveInput,
    OptimizationDiverged,
    SingularFisher,
    SingularParameterization,
)
from src.core.weyl import SQRT2
from src.schemes.instances import SchemeOutcomes, SchemeTag

logger = logging.getLogger(__name__)

Window = Tuple[float, float]

GUP_COEFFICIENT = 7.0 / 3.0
JOINT_GRID_POINTS = 129
X_WINDOW_WIDTH = 10.0
REAL_ROOT_TOLERANCE = 1e-9


class FisherMatrix2(BaseModel):
    """Symmetric 2x2 Fisher information in the (A, x_bar) parameterization."""

    model_config = ConfigDict(frozen=True)

    f11: float
    f12: float
    f22: float

    @property
    def determinant(self) -> float:
        return self.f11 * self.f22 - self.f12 ** 2

    def as_array(self) -> np.ndarray:
        return np.array([[self.f11, self.f12], [self.f12, self.f22]])

    def inverse(self) -> np.ndarray:
        det = self.determinant
        if not (self.f11 > 0 and det > 0):
            raise SingularFisher(f"Fisher matrix is not positive definite (f11 = {self.f11}, det = {det})")
        return np.array([[self.f22, -self.f12], [-self.f12, self.f11]]) / det


# Product estimator for the fixed-order baselines

def estimate_product(outcomes: SchemeOutcomes, n: int) -> float:
    """x_bar_hat * p_bar_hat from homodyne sample means."""
    if outcomes.homodyne is None:
        raise ConfigurationError(f"{outcomes.scheme_tag.value} outcomes carry no homodyne record")
    record = outcomes.homodyne
    if outcomes.scheme_tag is SchemeTag.PARALLEL:
        x_hat = float(np.mean(record[:, :n]))
        p_hat = float(np.mean(record[:, n:]))
    elif outcomes.scheme_tag is SchemeTag.SEQUENTIAL:
        x_hat = float(np.mean(record[:, 0])) / n
        p_hat = float(np.mean(record[:, 1])) / n
    else:
        raise ConfigurationError(f"No product estimator for scheme {outcomes.scheme_tag.value}")
    return x_hat * p_hat


# Control-only readout

def _control_window(n: int, multiplier: int, window: Optional[Window]) -> Window:
    period = math.pi / (multiplier * n ** 2)
    if window is None:
        return 0.0, period
    lo, hi = window
    if not (0.0 <= lo < hi <= period):
        raise InvalidRange(f"Window {window} is not inside [0, {period:.6g}]")
    return lo, hi


def mle_control(
    counts: Tuple[int, int],
    n: int,
    window: Optional[Window] = None,
    multiplier: int = 1,
    strict: bool = False,
) -> float:
    """Binomial MLE of A from control counts on the principal branch.

    p(+|A) = (1 + cos(multiplier n² A))/2; multiplier = 2 for the ion-trap gate.
    """
    n_plus, n_minus = counts
    nu = n_plus + n_minus
    if nu < 1 or n_plus < 0 or n_minus < 0:
        raise NonPositiveInput(f"Need at least one control outcome, got counts {counts}")
    lo, hi = _control_window(n, multiplier, window)

    if n_plus == 0 or n_minus == 0:
        message = f"All {nu} control outcomes are '{'+' if n_minus == 0 else '-'}'; estimate pinned to the window edge"
        if strict:
            raise DegenerateCounts(message)
        logger.warning(message)

    c = min(max(2.0 * n_plus / nu - 1.0, -1.0), 1.0)
    a_hat = math.acos(c) / (multiplier * n ** 2)
    return min(max(a_hat, lo), hi)


def control_log_likelihood(counts: Tuple[int, int], a: Union[float, np.ndarray], n: int, multiplier: int = 1):
    phase = multiplier * n ** 2 * np.asarray(a, dtype=float)
    c = np.cos(phase)
    return xlogy(counts[0], (1.0 + c) / 2.0) + xlogy(counts[1], (1.0 - c) / 2.0)


def fisher_control(a: float, n: int, method: str = "analytic", step: Optional[float] = None) -> float:
    """Fisher information of A carried by one control outcome.

    "analytic" evaluates Σ_m (∂p_m)²/p_m in closed form, which reduces to n⁴;
    "finite_difference" takes central differences of p(±|A).
    """
    phase = n ** 2 * a
    if method == "analytic":
        s, c = math.sin(phase), math.cos(phase)
        denominator = 1.0 - c * c
        if denominator < 1e-300:
            return float(n ** 4)
        return n ** 4 * s * s / denominator
    if method == "finite_difference":
        h = step if step is not None else 1e-4 / n ** 2
        total = []
        for sign in (1.0, -1.0):
            p = (1.0 + sign * math.cos(phase)) / 2.0
            dp = ((1.0 + sign * math.cos(n ** 2 * (a + h))) - (1.0 + sign * math.cos(n ** 2 * (a - h)))) / (4.0 * h)
            if p > 0.0:
                total.append(dp * dp / p)
        return math.fsum(total)
    raise ConfigurationError(f"Unknown Fisher method {method!r}")


# Joint control + heterodyne readout

def fisher_joint(x_bar: float, p_bar: float, n: int) -> FisherMatrix2:
    """Closed-form Fisher matrix of the joint readout with a vacuum probe."""
    if x_bar == 0:
        raise SingularParameterization("The (A, x_bar) parameterization needs x_bar != 0")
    n2 = n ** 2
    ratio = 1.0 / x_bar ** 2
    return FisherMatrix2(
        f11=n2 ** 2 + n2 * ratio,
        f12=-n2 * p_bar * ratio,
        f22=n2 + n2 * p_bar ** 2 * ratio,
    )


def _joint_log_density(sign: float, gamma: np.ndarray, beta_center: complex, a: float, x: float, n: int) -> np.ndarray:
    """log p(±, β | A, x) up to the constant -log(2π), at β = beta_center + gamma."""
    mean = n * complex(x, a / x) / SQRT2
    beta = beta_center + gamma
    return np.log1p(sign * math.cos(n ** 2 * a)) - np.abs(mean - beta) ** 2


def fisher_joint_quadrature(x_bar: float, p_bar: float, n: int, order: int = 64) -> FisherMatrix2:
    """Fisher matrix by Gauss-Hermite quadrature over β and a sum over control outcomes.

    Scores are central finite differences of the log joint density, so this
    checks fisher_joint independently of its algebra.
    """
    if x_bar == 0 or p_bar == 0:
        raise SingularParameterization("Quadrature Fisher matrix needs x_bar != 0 and p_bar != 0")
    a = x_bar * p_bar
    phase = n ** 2 * a
    if abs(math.sin(phase)) < 1e-8:
        raise SingularParameterization(f"Control probabilities are degenerate at N²A = {phase}")

    nodes, weights = hermgauss(order)
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    gamma = u + 1j * v
    weight = np.outer(weights, weights) / math.pi
    center = n * complex(x_bar, p_bar) / SQRT2
    h_a = 1e-5 * abs(a)
    h_x = 1e-5 * abs(x_bar)

    entries = np.zeros((2, 2))
    for sign in (1.0, -1.0):
        mass = (1.0 + sign * math.cos(phase)) / 2.0
        score_a = (
            _joint_log_density(sign, gamma, center, a + h_a, x_bar, n)
            - _joint_log_density(sign, gamma, center, a - h_a, x_bar, n)
        ) / (2.0 * h_a)
        score_x = (
            _joint_log_density(sign, gamma, center, a, x_bar + h_x, n)
            - _joint_log_density(sign, gamma, center, a, x_bar - h_x, n)
        ) / (2.0 * h_x)
        entries[0, 0] += mass * np.sum(weight * score_a * score_a)
        entries[0, 1] += mass * np.sum(weight * score_a * score_x)
        entries[1, 1] += mass * np.sum(weight * score_x * score_x)
    return FisherMatrix2(f11=float(entries[0, 0]), f12=float(entries[0, 1]), f22=float(entries[1, 1]))


def _quartic_roots(a_values: np.ndarray, scale: float, r: float, s: float) -> np.ndarray:
    """Roots in x of scale x⁴ - r x³ + s A x - scale A² = 0 for every A, via companion matrices."""
    k = a_values.shape[0]
    companion = np.zeros((k, 4, 4))
    companion[:, 0, 0] = r / scale
    companion[:, 0, 2] = -s * a_values / scale
    companion[:, 0, 3] = a_values ** 2
    companion[:, 1, 0] = companion[:, 2, 1] = companion[:, 3, 2] = 1.0
    return np.linalg.eigvals(companion)


def _profile(a_values: np.ndarray, scale: float, r: float, s: float, x_window: Window) -> Tuple[np.ndarray, np.ndarray]:
    """Best x and min |scale (x + i A/x) - (r + i s)|² for every A, over the x window."""
    lo, hi = x_window
    roots = _quartic_roots(a_values, scale, r, s)
    real = roots.real
    usable = (np.abs(roots.imag) <= REAL_ROOT_TOLERANCE * np.maximum(1.0, np.abs(real))) & (real > lo) & (real < hi)
    candidates = np.concatenate([
        np.where(usable, real, np.nan),
        np.broadcast_to([[lo, hi]], (a_values.shape[0], 2)),
    ], axis=1)
    a_col = a_values[:, None]
    distance = (scale * candidates - r) ** 2 + (scale * a_col / candidates - s) ** 2
    distance = np.where(np.isnan(distance), np.inf, distance)
    best = np.argmin(distance, axis=1)
    rows = np.arange(a_values.shape[0])
    return candidates[rows, best], distance[rows, best]


def mle_joint(
    outcomes: SchemeOutcomes,
    n: int,
    a_window: Optional[Window] = None,
    x_window: Optional[Window] = None,
    probe_alpha: complex = 0j,
    grid_points: int = JOINT_GRID_POINTS,
) -> Tuple[float, float]:
    """Joint MLE of (A, x_bar) from control counts and heterodyne samples.

    x_bar is profiled out exactly for each A (stationary points of the
    Gaussian term solve a quartic); the profile likelihood in A is scanned on
    a grid that includes the control-only estimate and refined with a bounded
    scalar search.
    """
    if outcomes.control_counts is None or outcomes.heterodyne is None:
        raise ConfigurationError("Joint MLE needs control counts and heterodyne samples")
    nu = outcomes.nu
    if nu < 2:
        raise NonPositiveInput(f"Joint MLE needs nu >= 2, got {nu}")
    counts = outcomes.control_counts
    lo_a, hi_a = _control_window(n, 1, a_window)

    mean_beta = complex(np.mean(outcomes.heterodyne)) - complex(probe_alpha)
    scale = n / SQRT2
    r, s = mean_beta.real, mean_beta.imag
    x0 = r / scale
    if x_window is None:
        half_width = X_WINDOW_WIDTH / (n * math.sqrt(nu))
        x_window = (x0 - half_width, x0 + half_width)
        if x_window[0] <= 0.0 <= x_window[1]:
            raise SingularParameterization(
                f"Heterodyne mean x = {x0:.3g} cannot resolve the sign of x_bar at nu = {nu}"
            )
    x_lo, x_hi = x_window
    if not x_lo < x_hi or x_lo <= 0.0 <= x_hi:
        raise InvalidRange(f"x window {x_window} must be non-empty and exclude 0")

    def profile_log_likelihood(a_values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x_best, distance = _profile(a_values, scale, r, s, x_window)
        return control_log_likelihood(counts, a_values, n) - nu * distance, x_best

    a0 = mle_control(counts, n, window=(lo_a, hi_a))
    grid = np.unique(np.append(np.linspace(lo_a, hi_a, grid_points), a0))
    values, _ = profile_log_likelihood(grid)
    if not np.any(np.isfinite(values)):
        raise OptimizationDiverged("Joint likelihood is not finite anywhere on the A grid")
    i = int(np.nanargmax(np.where(np.isfinite(values), values, -np.inf)))

    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, grid.shape[0] - 1)]
    result = minimize_scalar(
        lambda a: -float(profile_log_likelihood(np.array([a]))[0][0]),
        bounds=(left, right),
        method="bounded",
        options={"xatol": 1e-14 * max(hi_a, 1.0)},
    )
    a_hat = float(result.x) if result.fun <= -values[i] else float(grid[i])
    best, x_best = profile_log_likelihood(np.array([a_hat]))
    x_hat = float(x_best[0])

    if not np.isfinite(best[0]):
        raise OptimizationDiverged(f"Joint likelihood is not finite at A = {a_hat}")
    if min(x_hat - x_lo, x_hi - x_hat) <= 1e-12 * max(abs(x_lo), abs(x_hi)):
        raise OptimizationDiverged(f"x_bar estimate {x_hat:.6g} sits on the window edge {x_window}")
    logger.debug("Joint MLE: A = %.8g, x_bar = %.8g", a_hat, x_hat)
    return a_hat, x_hat


# Cramér-Rao bound

def crb(fisher: Union[float, FisherMatrix2], nu: int) -> float:
    """1/√(ν F) for a scalar Fisher information, √((F⁻¹)₁₁/ν) for a matrix."""
    if nu < 1:
        raise NonPositiveInput(f"nu must be >= 1, got {nu}")
    if isinstance(fisher, FisherMatrix2):
        return math.sqrt(fisher.inverse()[0, 0] / nu)
    fisher = float(fisher)
    if not (math.isfinite(fisher) and fisher > 0):
        raise SingularFisher(f"Fisher information must be positive, got {fisher}")
    return 1.0 / math.sqrt(nu * fisher)


# Modified-commutator probe

def fisher_beta(x: float, p: float) -> float:
    """Fisher information of beta_gup per control outcome: (dphase/dbeta)²."""
    return (x * p * GUP_COEFFICIENT * p ** 2) ** 2


def estimate_beta(counts: Tuple[int, int], x: float, p: float) -> float:
    """beta_gup from control counts, picking the phase branch closest to the beta = 0 phase xp."""
    if x == 0 or p == 0:
        raise SingularParameterization("beta_gup is not identifiable with x = 0 or p = 0")
    n_plus, n_minus = counts
    nu = n_plus + n_minus
    if nu < 1:
        raise NonPositiveInput(f"Need at least one control outcome, got counts {counts}")
    base = x * p
    principal = math.acos(min(max(2.0 * n_plus / nu - 1.0, -1.0), 1.0))
    turns = round(base / (2.0 * math.pi))
    candidates = [
        sign * principal + 2.0 * math.pi * k
        for sign in (1.0, -1.0)
        for k in (turns - 1, turns, turns + 1)
    ]
    phase = min(candidates, key=lambda c: abs(c - base))
    return (phase / base - 1.0) / (GUP_COEFFICIENT * p ** 2)
