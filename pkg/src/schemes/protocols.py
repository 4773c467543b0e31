"""
Estimation protocols: parallel and sequential fixed-order baselines, the
quantum SWITCH with control-only or joint readout, the ion-trap simulation of
the SWITCH and the modified-commutator probe.

Every run maps a hidden ProblemInstance and a generator to a SchemeOutcomes
record. SWITCH-family probabilities come from the Weyl algebra of the
corresponding controlled word, never from a hard-coded phase.
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np

from src.core import cv_state
from src.core.cv_state import CoherentState, Quadrature
from src.core.exceptions import NonPositiveInput
from src.core.weyl import (
    Displacement,
    DisplacementWord,
    commutator_word,
    ion_trap_word,
    switch_phase,
    switch_word,
)
from src.evaluation import bounds, estimation
from src.schemes.instances import ProblemInstance, SchemeOutcomes, SchemeTag

logger = logging.getLogger(__name__)

GUP_COEFFICIENT = 7.0 / 3.0


def _check_nu(nu: int) -> None:
    if nu < 1:
        raise NonPositiveInput(f"Number of repetitions nu must be >= 1, got {nu}")


def control_probabilities(phase: float) -> Tuple[float, float]:
    """(p(+), p(-)) = ((1 + cos phase)/2, (1 - cos phase)/2)."""
    c = math.cos(phase)
    return (1.0 + c) / 2.0, (1.0 - c) / 2.0


def _control_counts(phase: float, nu: int, rng: np.random.Generator) -> Tuple[int, int]:
    p_plus, _ = control_probabilities(phase)
    n_plus = int(rng.binomial(nu, min(max(p_plus, 0.0), 1.0)))
    return n_plus, nu - n_plus


def run_parallel(inst: ProblemInstance, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
    """One vacuum probe per box per repetition, homodyned on the displaced quadrature.

    Column j < N holds the X outcomes of box x_j, column N + j the P outcomes of box p_j.
    """
    _check_nu(nu)
    columns = []
    for x in inst.xs:
        probe = cv_state.displace(CoherentState(), Displacement.position(x))
        columns.append(cv_state.sample_homodyne(probe, Quadrature.X, rng, size=nu))
    for p in inst.ps:
        probe = cv_state.displace(CoherentState(), Displacement.momentum(p))
        columns.append(cv_state.sample_homodyne(probe, Quadrature.P, rng, size=nu))
    return SchemeOutcomes(scheme_tag=SchemeTag.PARALLEL, nu=nu, homodyne=np.column_stack(columns))


def run_sequential(inst: ProblemInstance, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
    """One probe through all x boxes (homodyne X), another through all p boxes (homodyne P)."""
    _check_nu(nu)
    x_word = DisplacementWord(factors=tuple(Displacement.position(x) for x in inst.xs))
    p_word = DisplacementWord(factors=tuple(Displacement.momentum(p) for p in inst.ps))
    x_probe = cv_state.apply_word(CoherentState(), x_word)
    p_probe = cv_state.apply_word(CoherentState(), p_word)
    homodyne = np.column_stack([
        cv_state.sample_homodyne(x_probe, Quadrature.X, rng, size=nu),
        cv_state.sample_homodyne(p_probe, Quadrature.P, rng, size=nu),
    ])
    return SchemeOutcomes(scheme_tag=SchemeTag.SEQUENTIAL, nu=nu, homodyne=homodyne)


def run_switch_control(inst: ProblemInstance, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
    """SWITCH on |+> ⊗ |0>, control measured in the {|+>, |->} basis."""
    _check_nu(nu)
    word = switch_word(inst.xs, inst.ps)
    phase = switch_phase(word.branch0, word.branch1)
    logger.debug("SWITCH phase %.6g for N = %d", phase, inst.n)
    return SchemeOutcomes(
        scheme_tag=SchemeTag.SWITCH_CONTROL,
        nu=nu,
        control_counts=_control_counts(phase, nu, rng),
    )


def run_switch_joint(
    inst: ProblemInstance,
    nu: int,
    rng: np.random.Generator,
    probe_alpha: complex = 0j,
) -> SchemeOutcomes:
    """SWITCH with the control measured and the probe heterodyned.

    The joint density factorizes, so control outcomes and heterodyne samples
    are drawn independently. A nonzero probe_alpha is an unvalidated
    extension: the closed-form Fisher matrix assumes the vacuum.
    """
    _check_nu(nu)
    word = switch_word(inst.xs, inst.ps)
    phase = switch_phase(word.branch0, word.branch1)
    probe = cv_state.apply_word(CoherentState(alpha=probe_alpha), word.branch0)
    return SchemeOutcomes(
        scheme_tag=SchemeTag.SWITCH_JOINT,
        nu=nu,
        control_counts=_control_counts(phase, nu, rng),
        heterodyne=cv_state.sample_heterodyne(probe, rng, size=nu),
    )


def run_ion_trap(inst: ProblemInstance, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
    """Spin-motion gate sequence; the control picks up twice the SWITCH phase."""
    _check_nu(nu)
    word = ion_trap_word(inst.xs, inst.ps)
    phase = switch_phase(word.branch0, word.branch1)
    return SchemeOutcomes(
        scheme_tag=SchemeTag.ION_TRAP,
        nu=nu,
        control_counts=_control_counts(phase, nu, rng),
    )


def gup_phase(x: float, p: float, beta_gup: float) -> float:
    """xp [1 + (7/3) beta p²], first order in beta."""
    base = switch_phase(DisplacementWord(), commutator_word(x, p))
    return base * (1.0 + GUP_COEFFICIENT * beta_gup * p ** 2)


def run_beta_probe(x: float, p: float, beta_gup: float, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
    """Control counts for the commutator phase under a modified [X, P]; x = N x_bar, p = N p_bar."""
    _check_nu(nu)
    return SchemeOutcomes(
        scheme_tag=SchemeTag.BETA_PROBE,
        nu=nu,
        control_counts=_control_counts(gup_phase(x, p, beta_gup), nu, rng),
    )


class EstimationScheme(ABC):
    """Abstract base class for an estimation protocol and its estimator."""

    tag: SchemeTag

    @abstractmethod
    def run(self, inst: ProblemInstance, nu: int, rng: np.random.Generator) -> SchemeOutcomes:
        """Simulate nu repetitions on a hidden instance."""
        pass

    @abstractmethod
    def estimate(self, outcomes: SchemeOutcomes, inst: ProblemInstance) -> float:
        """Estimate of the target parameter from the outcomes."""
        pass

    @abstractmethod
    def predicted_rmse(self, inst: ProblemInstance, nu: int) -> float:
        """Analytic RMSE the estimator should reach asymptotically."""
        pass

    def target(self, inst: ProblemInstance) -> float:
        """True value of the estimated parameter."""
        return inst.A


class ParallelScheme(EstimationScheme):
    tag = SchemeTag.PARALLEL

    def run(self, inst, nu, rng):
        return run_parallel(inst, nu, rng)

    def estimate(self, outcomes, inst):
        return estimation.estimate_product(outcomes, inst.n)

    def predicted_rmse(self, inst, nu):
        return bounds.parallel_rmse(inst.x_bar, inst.p_bar, inst.n, nu)


class SequentialScheme(EstimationScheme):
    tag = SchemeTag.SEQUENTIAL

    def run(self, inst, nu, rng):
        return run_sequential(inst, nu, rng)

    def estimate(self, outcomes, inst):
        return estimation.estimate_product(outcomes, inst.n)

    def predicted_rmse(self, inst, nu):
        return bounds.sequential_rmse(inst.x_bar, inst.p_bar, inst.n, nu)


class SwitchControlScheme(EstimationScheme):
    tag = SchemeTag.SWITCH_CONTROL

    def run(self, inst, nu, rng):
        return run_switch_control(inst, nu, rng)

    def estimate(self, outcomes, inst):
        return estimation.mle_control(outcomes.control_counts, inst.n)

    def predicted_rmse(self, inst, nu):
        return bounds.switch_rmse_control(inst.n, nu)


class SwitchJointScheme(EstimationScheme):
    tag = SchemeTag.SWITCH_JOINT

    def __init__(self, probe_alpha: complex = 0j):
        self.probe_alpha = complex(probe_alpha)

    def run(self, inst, nu, rng):
        return run_switch_joint(inst, nu, rng, probe_alpha=self.probe_alpha)

    def estimate(self, outcomes, inst):
        a_hat, _ = estimation.mle_joint(outcomes, inst.n, probe_alpha=self.probe_alpha)
        return a_hat

    def predicted_rmse(self, inst, nu):
        return bounds.switch_rmse_joint(inst.x_bar, inst.p_bar, inst.n, nu)


class IonTrapScheme(EstimationScheme):
    tag = SchemeTag.ION_TRAP

    def run(self, inst, nu, rng):
        return run_ion_trap(inst, nu, rng)

    def estimate(self, outcomes, inst):
        return estimation.mle_control(outcomes.control_counts, inst.n, multiplier=2)

    def predicted_rmse(self, inst, nu):
        return bounds.ion_trap_rmse(inst.n, nu)


class BetaProbeScheme(EstimationScheme):
    """Estimates beta_gup at known x = N x_bar, p = N p_bar."""

    tag = SchemeTag.BETA_PROBE

    def __init__(self, beta_gup: float = 0.0):
        self.beta_gup = beta_gup

    def run(self, inst, nu, rng):
        return run_beta_probe(inst.n * inst.x_bar, inst.n * inst.p_bar, self.beta_gup, nu, rng)

    def estimate(self, outcomes, inst):
        return estimation.estimate_beta(outcomes.control_counts, inst.n * inst.x_bar, inst.n * inst.p_bar)

    def predicted_rmse(self, inst, nu):
        fisher = estimation.fisher_beta(inst.n * inst.x_bar, inst.n * inst.p_bar)
        return estimation.crb(fisher, nu)

    def target(self, inst):
        return self.beta_gup


SCHEMES: Dict[SchemeTag, type] = {
    SchemeTag.PARALLEL: ParallelScheme,
    SchemeTag.SEQUENTIAL: SequentialScheme,
    SchemeTag.SWITCH_CONTROL: SwitchControlScheme,
    SchemeTag.SWITCH_JOINT: SwitchJointScheme,
    SchemeTag.ION_TRAP: IonTrapScheme,
    SchemeTag.BETA_PROBE: BetaProbeScheme,
}


def get_scheme(tag, **options) -> EstimationScheme:
    """Instantiate the scheme registered under tag."""
    return SCHEMES[SchemeTag(tag)](**options)
