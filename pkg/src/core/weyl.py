"""
Exact algebra of displacement operators.

Conventions: hbar = 1, X = (a + a†)/√2, P = i(a† - a)/√2 and
D(alpha) = exp(alpha a† - conj(alpha) a). A position displacement
D_x = exp(-i x P) has alpha = x/√2, a momentum displacement
D_p = exp(i p X) has alpha = i p/√2. Products obey

    D(a) D(b) = exp(i Im(a conj(b))) D(a + b)

so every word of displacements reduces to one displacement and a real phase.
Phases are kept unreduced; wrapping to [0, 2π) only happens in outcome
probabilities.
"""
import math
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from src.core.exceptions import BranchMismatch


SQRT2 = math.sqrt(2.0)
BRANCH_TOLERANCE = 1e-9


class Displacement(BaseModel):
    """A single phase-space displacement D(alpha)."""

    model_config = ConfigDict(frozen=True)

    alpha: complex = 0j

    @classmethod
    def position(cls, x: float) -> "Displacement":
        """D_x = exp(-i x P), shifts X by x."""
        return cls(alpha=complex(x / SQRT2, 0.0))

    @classmethod
    def momentum(cls, p: float) -> "Displacement":
        """D_p = exp(i p X), shifts P by p."""
        return cls(alpha=complex(0.0, p / SQRT2))

    @classmethod
    def along(cls, angle: float, z: float) -> "Displacement":
        """exp(-i z X_angle) with X_angle = (e^{i angle} a + e^{-i angle} a†)/√2.

        angle = -π/2 gives a position displacement, angle = π a momentum one.
        """
        alpha = -1j * z * complex(math.cos(angle), -math.sin(angle)) / SQRT2
        return cls(alpha=alpha)

    def inverse(self) -> "Displacement":
        return Displacement(alpha=-self.alpha)

    @property
    def is_identity(self) -> bool:
        return self.alpha == 0


IDENTITY = Displacement()


class DisplacementWord(BaseModel):
    """Ordered product of displacements; the leftmost factor is applied last."""

    model_config = ConfigDict(frozen=True)

    factors: Tuple[Displacement, ...] = ()

    @classmethod
    def of(cls, *factors: Displacement) -> "DisplacementWord":
        return cls(factors=tuple(factors))

    def then(self, d: Displacement) -> "DisplacementWord":
        """The word followed in time by d (d becomes the leftmost factor)."""
        return DisplacementWord(factors=(d,) + self.factors)

    def concat(self, later: "DisplacementWord") -> "DisplacementWord":
        """Operator product later · self."""
        return DisplacementWord(factors=later.factors + self.factors)

    def inverse(self) -> "DisplacementWord":
        return DisplacementWord(factors=tuple(d.inverse() for d in reversed(self.factors)))

    @property
    def total_alpha(self) -> complex:
        return complex(math.fsum(d.alpha.real for d in self.factors),
                       math.fsum(d.alpha.imag for d in self.factors))

    def __len__(self) -> int:
        return len(self.factors)


class NormalForm(BaseModel):
    """Canonical reduction e^{i phase} D(total_alpha) of a word."""

    model_config = ConfigDict(frozen=True)

    total_alpha: complex = 0j
    phase: float = 0.0

    @property
    def displacement(self) -> Displacement:
        return Displacement(alpha=self.total_alpha)


class ControlledWord(BaseModel):
    """|0><0| ⊗ branch0 + |1><1| ⊗ branch1."""

    model_config = ConfigDict(frozen=True)

    branch0: DisplacementWord = DisplacementWord()
    branch1: DisplacementWord = DisplacementWord()


def _cocycle(a: complex, b: complex) -> float:
    return (a * b.conjugate()).imag


def compose(a: Displacement, b: Displacement) -> Tuple[Displacement, float]:
    """Return (D(alpha_a + alpha_b), phi) with D(a) D(b) = e^{i phi} D(alpha_a + alpha_b)."""
    return Displacement(alpha=a.alpha + b.alpha), _cocycle(a.alpha, b.alpha)


def normalize(word: DisplacementWord) -> NormalForm:
    """Left fold of compose over the word."""
    if not word.factors:
        return NormalForm()

    running = word.factors[0].alpha
    phases: List[float] = []
    for d in word.factors[1:]:
        phases.append(_cocycle(running, d.alpha))
        running = running + d.alpha
    return NormalForm(total_alpha=word.total_alpha, phase=math.fsum(phases))


def switch_phase(branch0: DisplacementWord, branch1: DisplacementWord) -> float:
    """Relative phase between the two branches of a controlled word.

    Returns normalize(branch0).phase - normalize(branch1).phase, which is
    +N²A for branch0 = ∏D_p ∏D_x and branch1 = ∏D_x ∏D_p. The |1> amplitude
    of the control picks up exp(-i * switch_phase).
    """
    nf0 = normalize(branch0)
    nf1 = normalize(branch1)
    delta = nf1.total_alpha - nf0.total_alpha
    if abs(delta) >= BRANCH_TOLERANCE:
        raise BranchMismatch(delta)
    return nf0.phase - nf1.phase


def _positions(xs: Sequence[float]) -> Tuple[Displacement, ...]:
    return tuple(Displacement.position(x) for x in xs)


def _momenta(ps: Sequence[float]) -> Tuple[Displacement, ...]:
    return tuple(Displacement.momentum(p) for p in ps)


def switch_word(xs: Sequence[float], ps: Sequence[float]) -> ControlledWord:
    """The quantum-SWITCH gate on 2N boxes: x's first in branch 0, p's first in branch 1."""
    x_block = _positions(xs)
    p_block = _momenta(ps)
    return ControlledWord(
        branch0=DisplacementWord(factors=p_block + x_block),
        branch1=DisplacementWord(factors=x_block + p_block),
    )


def ion_trap_word(xs: Sequence[float], ps: Sequence[float]) -> ControlledWord:
    """Spin-motion simulation of the SWITCH: all U_j, then the D_p's, then all V_j.

    U_j = |0><0| ⊗ D_{x_j} + |1><1| ⊗ D_{x_j}†,
    V_j = |0><0| ⊗ D_{x_j}† + |1><1| ⊗ D_{x_j}.
    """
    forward = tuple(reversed(_positions(xs)))
    backward = tuple(d.inverse() for d in forward)
    p_block = tuple(reversed(_momenta(ps)))
    return ControlledWord(
        branch0=DisplacementWord(factors=backward + p_block + forward),
        branch1=DisplacementWord(factors=forward + p_block + backward),
    )


def commutator_word(x: float, p: float) -> DisplacementWord:
    """D_{-x} D_{-p} D_x D_p, equal to exp(-i x p) times the identity."""
    return DisplacementWord.of(
        Displacement.position(-x),
        Displacement.momentum(-p),
        Displacement.position(x),
        Displacement.momentum(p),
    )
