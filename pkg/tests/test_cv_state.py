import math

import numpy as np
import pytest
from scipy import stats

from src.core import cv_state
from src.core.cv_state import CoherentState, HeterodyneSample, Quadrature
from src.core.weyl import Displacement, DisplacementWord
from src.evaluation.bounds import energy_recursion

DRAWS = 100_000


def test_displace_vacuum():
    state = cv_state.displace(CoherentState(), Displacement.position(0.6))
    assert state.alpha == pytest.approx(0.6 / math.sqrt(2))


def test_displace_adds_amplitudes():
    state = cv_state.displace(CoherentState(alpha=1.0), Displacement.momentum(0.5))
    assert state.alpha == pytest.approx(1 + 0.35355339j)


def test_full_word_from_vacuum():
    word = DisplacementWord.of(*[Displacement.momentum(0.2)] * 5, *[Displacement.position(0.2)] * 5)
    state = cv_state.apply_word(CoherentState(), word)
    assert state.alpha == pytest.approx(0.70710678 + 0.70710678j)


def test_energy():
    assert cv_state.energy(CoherentState()) == 0.5
    assert cv_state.energy(CoherentState(alpha=1.0)) == 1.5
    x = 0.9
    shifted = cv_state.displace(CoherentState(), Displacement.position(x))
    assert cv_state.energy(shifted) == pytest.approx(x ** 2 / 2 + 0.5)
    assert cv_state.energy(shifted) <= 0.5 + x ** 2 / 2 + x


def test_mean_quadratures():
    state = CoherentState(alpha=complex(0.8, 0.4) / math.sqrt(2))
    assert cv_state.mean_quadratures(state) == pytest.approx((0.8, 0.4))


class TestHomodyne:
    def test_vacuum_mean(self, rng):
        samples = cv_state.sample_homodyne(CoherentState(), Quadrature.X, rng, size=DRAWS)
        assert abs(samples.mean()) < 0.01

    def test_position_moments(self, rng):
        state = cv_state.displace(CoherentState(), Displacement.position(0.8))
        samples = cv_state.sample_homodyne(state, "X", rng, size=DRAWS)
        assert samples.mean() == pytest.approx(0.8, abs=0.01)
        assert samples.var() == pytest.approx(0.5, abs=0.02)

    def test_momentum_mean(self, rng):
        state = cv_state.displace(CoherentState(), Displacement.momentum(0.4))
        samples = cv_state.sample_homodyne(state, Quadrature.P, rng, size=DRAWS)
        assert samples.mean() == pytest.approx(0.4, abs=0.01)

    def test_scalar_draw_is_reproducible(self):
        first = cv_state.sample_homodyne(CoherentState(), Quadrature.X, np.random.Generator(np.random.Philox(3)))
        second = cv_state.sample_homodyne(CoherentState(), Quadrature.X, np.random.Generator(np.random.Philox(3)))
        assert isinstance(first, float)
        assert first == second


class TestHeterodyne:
    def test_vacuum_moments(self, rng):
        betas = cv_state.sample_heterodyne(CoherentState(), rng, size=DRAWS)
        assert abs(betas.mean()) < 0.01
        assert betas.real.var() == pytest.approx(0.5, abs=0.02)
        assert betas.imag.var() == pytest.approx(0.5, abs=0.02)

    def test_displaced_mean(self, rng):
        state = CoherentState(alpha=5 * complex(0.4, 0.2) / math.sqrt(2))
        betas = cv_state.sample_heterodyne(state, rng, size=DRAWS)
        assert betas.mean().real == pytest.approx(1.4142, abs=0.01)
        assert betas.mean().imag == pytest.approx(0.7071, abs=0.01)

    def test_single_sample_type(self, rng):
        assert isinstance(cv_state.sample_heterodyne(CoherentState(), rng), HeterodyneSample)

    def test_density_goodness_of_fit(self, rng):
        """Radial distance |beta - mu|² is exponential with unit mean under (1/π) exp(-|mu - beta|²)."""
        mu = 0.3 - 0.7j
        betas = cv_state.sample_heterodyne(CoherentState(alpha=mu), rng, size=20_000)
        result = stats.kstest(np.abs(betas - mu) ** 2, "expon")
        assert result.pvalue > 0.01

    def test_density_normalization(self):
        state = CoherentState(alpha=0.5 + 0.2j)
        assert cv_state.heterodyne_density(state, 0.5 + 0.2j) == pytest.approx(1 / math.pi)
        grid = np.linspace(-6, 6, 241)
        u, v = np.meshgrid(grid, grid)
        density = cv_state.heterodyne_density(state, u + 1j * v)
        assert density.sum() * (grid[1] - grid[0]) ** 2 == pytest.approx(1.0, rel=1e-6)


class TestEnergyAudit:
    def test_single_step_bound(self, rng):
        z_max = 0.5
        for _ in range(1000):
            state = CoherentState(alpha=complex(*rng.normal(size=2)))
            d = Displacement.along(rng.uniform(0, 2 * math.pi), rng.uniform(-z_max, z_max))
            e_out = cv_state.energy(cv_state.displace(state, d))
            assert e_out <= (math.sqrt(cv_state.energy(state)) + z_max / math.sqrt(2)) ** 2 + 1e-12

    def test_random_sequences_respect_recursion(self, rng):
        z_max = 0.5
        for _ in range(10_000):
            steps = int(rng.integers(1, 9))
            zs = rng.uniform(-z_max, z_max, size=steps)
            factors = [
                Displacement.position(z) if rng.random() < 0.5 else Displacement.momentum(z) for z in zs
            ]
            energies = cv_state.energy_trajectory(CoherentState(), DisplacementWord.of(*factors))
            assert len(energies) == steps
            assert max(energies) <= energy_recursion(0.5, [], z_max, steps) + 1e-12

    def test_in_phase_sequence_saturates(self):
        word = DisplacementWord.of(*[Displacement.position(0.5)] * 4)
        assert cv_state.energy_trajectory(CoherentState(), word)[-1] == pytest.approx(2.5)
        assert energy_recursion(0.5, [], 0.5, 4) == pytest.approx(4.5)
