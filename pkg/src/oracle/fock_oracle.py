"""
Brute-force truncated Fock-space oracle.

Everything here is dense linear algebra on a number basis of dimension
`dim`, kept independent from the closed-form algebra in src.core so the two
can be checked against each other.
"""
import logging
import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from src.core.exceptions import ConfigurationError, TruncationTooSmall
from src.core.weyl import ControlledWord, Displacement, DisplacementWord, normalize, switch_word

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
MAX_ORACLE_N = 3


class TruncatedOperator(BaseModel):
    """dim x dim complex matrix on the truncated number basis."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int
    entries: np.ndarray

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return TruncatedOperator(dim=self.dim, entries=self.entries @ other.entries)


class ControlProbeState(BaseModel):
    """Control qubit ⊗ truncated oscillator; amplitudes[c * dim + n].

    Direct construction reports a bad shape or norm as pydantic's
    ValidationError; build() raises ConfigurationError itself.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int
    amplitudes: np.ndarray

    @staticmethod
    def check_amplitudes(dim: int, amplitudes: np.ndarray) -> None:
        if amplitudes.shape != (2 * dim,):
            raise ConfigurationError(f"Expected {2 * dim} amplitudes, got shape {amplitudes.shape}")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ConfigurationError(f"Control-probe state not normalized: norm = {norm!r}")

    @classmethod
    def build(cls, dim: int, amplitudes: np.ndarray) -> "ControlProbeState":
        cls.check_amplitudes(dim, amplitudes)
        return cls(dim=dim, amplitudes=amplitudes)

    @model_validator(mode="after")
    def _check_norm(self) -> "ControlProbeState":
        self.check_amplitudes(self.dim, self.amplitudes)
        return self

    @property
    def branch0(self) -> np.ndarray:
        return self.amplitudes[: self.dim]

    @property
    def branch1(self) -> np.ndarray:
        return self.amplitudes[self.dim:]


def annihilation(dim: int) -> np.ndarray:
    """a[n-1, n] = √n."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def quadratures(dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """X = (a + a†)/√2 and P = i(a† - a)/√2."""
    a = annihilation(dim)
    a_dag = creation(dim)
    return (a + a_dag) / math.sqrt(2.0), 1j * (a_dag - a) / math.sqrt(2.0)


def recommended_dim(alpha: complex) -> int:
    return max(32, 8 * math.ceil(abs(alpha) ** 2))


def _check_truncation(alpha: complex, dim: int) -> None:
    if dim < 2:
        raise ConfigurationError(f"Truncation dimension must be at least 2, got {dim}")
    if abs(alpha) ** 2 > dim / 4:
        raise TruncationTooSmall(alpha, dim, recommended_dim(alpha))


@lru_cache(maxsize=512)
def _displacement_entries(alpha: complex, dim: int) -> np.ndarray:
    a = annihilation(dim)
    generator = alpha * a.conj().T - np.conj(alpha) * a
    entries = expm(generator)
    entries.setflags(write=False)
    return entries


def displacement_matrix(alpha: complex, dim: int) -> TruncatedOperator:
    """exp(alpha a† - conj(alpha) a) on the truncated space (scaling-and-squaring Padé)."""
    alpha = complex(alpha)
    _check_truncation(alpha, dim)
    return TruncatedOperator(dim=dim, entries=_displacement_entries(alpha, dim))


def displacement_matrix_laguerre(alpha: complex, dim: int) -> np.ndarray:
    """Closed-form <m|D(alpha)|n> from generalized Laguerre polynomials.

    Exact matrix elements of the untruncated operator, restricted to the
    first `dim` levels; agrees with displacement_matrix away from the cutoff.
    """
    alpha = complex(alpha)
    _check_truncation(alpha, dim)
    m, n = np.indices((dim, dim))
    lo = np.minimum(m, n)
    hi = np.maximum(m, n)
    k = hi - lo
    r2 = abs(alpha) ** 2
    prefactor = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - r2 / 2)
    base = np.where(m >= n, alpha, -np.conj(alpha))
    return prefactor * base ** k * eval_genlaguerre(lo, k, r2)


def word_matrix(word: DisplacementWord, dim: int) -> TruncatedOperator:
    """Operator product of the word; every intermediate amplitude must fit the truncation."""
    running = 0j
    for d in reversed(word.factors):
        running += d.alpha
        _check_truncation(running, dim)

    product = TruncatedOperator(dim=dim, entries=np.eye(dim, dtype=complex))
    for d in word.factors:
        product = product @ displacement_matrix(d.alpha, dim)
    return product


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Number-basis amplitudes e^{-|alpha|²/2} alpha^n / √n!."""
    amplitudes = np.empty(dim, dtype=complex)
    amplitudes[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amplitudes[n] = amplitudes[n - 1] * alpha / math.sqrt(n)
    return amplitudes


def vacuum_vector(dim: int) -> np.ndarray:
    vector = np.zeros(dim, dtype=complex)
    vector[0] = 1.0
    return vector


def apply_word(word: DisplacementWord, vector: np.ndarray) -> np.ndarray:
    return word_matrix(word, vector.shape[0]).entries @ vector


def plus_state(probe: np.ndarray) -> ControlProbeState:
    """|+> ⊗ |probe>."""
    amplitudes = np.concatenate([probe, probe]) / math.sqrt(2.0)
    return ControlProbeState.build(probe.shape[0], amplitudes)


def control_basis_state(bit: int, probe: np.ndarray) -> ControlProbeState:
    """|bit> ⊗ |probe>."""
    zeros = np.zeros_like(probe)
    parts = [probe, zeros] if bit == 0 else [zeros, probe]
    return ControlProbeState.build(probe.shape[0], np.concatenate(parts))


def apply_controlled_word(cw: ControlledWord, state: ControlProbeState) -> ControlProbeState:
    """Branch 0's product acts on the |0> component, branch 1's on the |1> component."""
    out0 = word_matrix(cw.branch0, state.dim).entries @ state.branch0
    out1 = word_matrix(cw.branch1, state.dim).entries @ state.branch1
    return ControlProbeState.build(state.dim, np.concatenate([out0, out1]))


def control_coherence(state: ControlProbeState) -> complex:
    """2 <psi_1|psi_0>, twice the off-diagonal of the reduced control state."""
    return complex(2.0 * np.vdot(state.branch1, state.branch0))


def control_outcome_probs(state: ControlProbeState) -> Tuple[float, float]:
    """Probabilities of |+> and |-> on the control."""
    plus = (state.branch0 + state.branch1) / math.sqrt(2.0)
    minus = (state.branch0 - state.branch1) / math.sqrt(2.0)
    return float(np.vdot(plus, plus).real), float(np.vdot(minus, minus).real)


def heterodyne_density(vector: np.ndarray, beta: complex) -> float:
    """|<beta|psi>|² / π."""
    overlap = np.vdot(coherent_vector(beta, vector.shape[0]), vector)
    return float(abs(overlap) ** 2 / math.pi)


def joint_outcome_density(state: ControlProbeState, sign: int, beta: complex) -> float:
    """Density of (control outcome ±, heterodyne outcome beta)."""
    projected = (state.branch0 + sign * state.branch1) / math.sqrt(2.0)
    return heterodyne_density(projected, beta)


class OracleReport(BaseModel):
    """Worst deviations between the closed-form algebra and the oracle."""

    cases: int
    dim: int
    max_probability_error: float
    max_phase_error: float
    max_switch_phase_error: float
    min_fidelity: float
    probability_tolerance: float = 1e-8
    phase_tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return (
            self.max_probability_error <= self.probability_tolerance
            and self.max_phase_error <= self.phase_tolerance
            and self.max_switch_phase_error <= self.phase_tolerance
            and self.min_fidelity >= 1.0 - self.probability_tolerance
        )


def _wrap(angle: float) -> float:
    return float(np.angle(np.exp(1j * angle)))


def _random_word(n: int, magnitude: float, rng: np.random.Generator) -> DisplacementWord:
    factors = []
    for _ in range(2 * n):
        z = rng.uniform(-magnitude, magnitude)
        factors.append(Displacement.position(z) if rng.random() < 0.5 else Displacement.momentum(z))
    return DisplacementWord(factors=tuple(factors))


def run_oracle_suite(
    cases: int = 200,
    max_n: int = MAX_ORACLE_N,
    magnitude: float = 0.5,
    dim: int = 64,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> OracleReport:
    """Compare SWITCH probabilities and normal-form phases with the oracle on random cases."""
    if max_n > MAX_ORACLE_N:
        raise ConfigurationError(
            f"Oracle comparisons are restricted to N <= {MAX_ORACLE_N}, got {max_n}"
        )
    if cases < 1:
        raise ConfigurationError("At least one oracle case is required")
    rng = rng if rng is not None else np.random.default_rng(seed)

    prob_err = phase_err = switch_err = 0.0
    min_fidelity = 1.0
    vacuum = vacuum_vector(dim)
    for _ in range(cases):
        n = int(rng.integers(1, max_n + 1))
        xs = rng.uniform(-magnitude, magnitude, size=n)
        ps = rng.uniform(-magnitude, magnitude, size=n)
        area = float(np.sum(xs) * np.sum(ps))

        out = apply_controlled_word(switch_word(xs, ps), plus_state(vacuum))
        p_plus, _ = control_outcome_probs(out)
        prob_err = max(prob_err, abs(p_plus - (1 + math.cos(area)) / 2))
        switch_err = max(switch_err, abs(_wrap(np.angle(control_coherence(out)) - area)))

        word = _random_word(n, magnitude, rng)
        nf = normalize(word)
        overlap = np.vdot(coherent_vector(nf.total_alpha, dim), apply_word(word, vacuum))
        min_fidelity = min(min_fidelity, float(abs(overlap) ** 2))
        phase_err = max(phase_err, abs(_wrap(np.angle(overlap) - nf.phase)))

    report = OracleReport(
        cases=cases,
        dim=dim,
        max_probability_error=prob_err,
        max_phase_error=phase_err,
        max_switch_phase_error=switch_err,
        min_fidelity=min_fidelity,
    )
    logger.info(
        "Oracle suite: %d cases, max |dp| = %.2e, max |dphi| = %.2e, passed = %s",
        cases, prob_err, max(phase_err, switch_err), report.passed,
    )
    return report
