import math

import pytest
from pydantic import ValidationError

from src.core.exceptions import InvalidRange, LengthMismatch, NonPositiveInput, SingularParameterization
from src.evaluation import bounds
from src.evaluation.bounds import BoundQuery
from src.evaluation.metrics import scaling_fit


class TestSingleDisplacement:
    def test_vacuum_probe(self):
        assert bounds.single_displacement_crb(0.5, 1) == pytest.approx(0.5)

    def test_energy_and_repetitions(self):
        assert bounds.single_displacement_crb(2.0, 1) == pytest.approx(0.25)
        assert bounds.single_displacement_crb(0.5, 16) == pytest.approx(0.125)

    def test_rejects_non_positive(self):
        with pytest.raises(NonPositiveInput):
            bounds.single_displacement_crb(0.0, 1)
        with pytest.raises(NonPositiveInput):
            bounds.single_displacement_crb(0.5, 0)


class TestSwitchBounds:
    def test_phase_rmse(self):
        assert bounds.phase_rmse(100) == pytest.approx(0.1)

    def test_control_only(self):
        assert bounds.switch_rmse_control(5, 10) == pytest.approx(0.012649, abs=1e-6)
        assert bounds.switch_rmse_control(5, 10 ** 4) == pytest.approx(4e-4)

    def test_joint_readout(self):
        assert bounds.switch_rmse_joint(0.2, 0.2, 5, 1) == pytest.approx(0.032660, abs=1e-6)

    def test_joint_never_worse(self, rng):
        for _ in range(200):
            x_bar, p_bar = rng.uniform(-1, 1, size=2)
            n = int(rng.integers(1, 50))
            nu = int(rng.integers(1, 10 ** 5))
            assert bounds.switch_rmse_joint(x_bar, p_bar, n, nu) <= bounds.switch_rmse_control(n, nu)

    def test_joint_tends_to_control_for_large_n(self):
        ratio = bounds.switch_rmse_joint(0.3, 0.3, 1000, 1) / bounds.switch_rmse_control(1000, 1)
        assert ratio == pytest.approx(1.0, abs=1e-5)

    def test_joint_zero_means(self):
        with pytest.raises(SingularParameterization):
            bounds.switch_rmse_joint(0.0, 0.0, 5, 1)

    def test_ion_trap_halves(self):
        assert bounds.ion_trap_rmse(5, 10) == pytest.approx(0.0063246, abs=1e-7)


class TestFixedOrderBounds:
    def test_crossover_point(self):
        floor = bounds.fixed_order_bound(0.4, 0.4, 0.5, 5, 10)
        assert floor == pytest.approx(0.012649, abs=1e-6)
        assert floor == pytest.approx(bounds.switch_rmse_control(5, 10))

    def test_uses_smaller_mean(self):
        assert bounds.fixed_order_bound(0.4, -0.1, 0.5, 2, 1) == pytest.approx(0.1 * 0.5 / 2)

    def test_schemes_sit_above_floor(self):
        for n in (1, 4, 16):
            floor = bounds.fixed_order_bound(0.3, 0.5, 0.5, n, 100)
            assert bounds.sequential_rmse(0.3, 0.5, n, 100) >= floor
            assert bounds.parallel_rmse(0.3, 0.5, n, 100) >= floor

    def test_general_bound_uniform_case(self):
        n = 3
        c = [0.5] * (2 * n)
        delta_z = [0.2] * (2 * n)
        assert bounds.general_fixed_order_bound(c, delta_z, n) == pytest.approx(0.5 * 0.2 / 3)

    def test_general_bound_takes_minimum(self):
        assert bounds.general_fixed_order_bound([1.0, -2.0, 0.5, 3.0], [0.1, 0.01, 1.0, 0.2], 2) == pytest.approx(0.01)

    def test_general_bound_validation(self):
        with pytest.raises(LengthMismatch):
            bounds.general_fixed_order_bound([1.0, 1.0], [0.1, 0.1, 0.1], 1)
        with pytest.raises(InvalidRange):
            bounds.general_fixed_order_bound([1.0, 1.0], [0.1, -0.1], 1)


class TestEnergyBounds:
    def test_recursion_from_vacuum(self):
        assert bounds.energy_recursion(0.5, [], 0.5, 4) == pytest.approx(4.5)

    def test_zero_steps(self):
        assert bounds.energy_recursion(0.7, [1.0, 2.0], 0.5, 0) == pytest.approx(0.7)

    def test_gate_energies_add_in_root(self):
        assert bounds.energy_recursion(1.0, [1.0, 4.0], 0.0, 2) == pytest.approx(16.0)

    def test_recursion_validation(self):
        with pytest.raises(NonPositiveInput):
            bounds.energy_recursion(-0.1, [], 0.5, 1)
        with pytest.raises(InvalidRange):
            bounds.energy_recursion(0.5, [], 0.5, -1)

    def test_budget_bound_contains_recursion(self):
        # gate energies summing to the budget never beat the bound
        budget = 2.0
        gates = [budget / 4] * 3
        reached = bounds.energy_recursion(budget / 4, gates, 0.3, 3)
        assert reached <= bounds.energy_budget_bound(3, 0.3, budget) + 1e-12


class TestSuperpositionBound:
    def test_worked_value(self):
        assert bounds.superposition_bound(0.4, 5, 10, 0.5, 1.0) == pytest.approx(0.0013054, abs=1e-7)

    def test_below_switch_rmse(self):
        for n in (1, 5, 20):
            assert bounds.superposition_bound(0.4, n, 10, 0.5, 1.0) <= bounds.switch_rmse_control(n, 10)

    def test_heisenberg_scaling_limit(self):
        p_bar, nu, z_max = 0.4, 10, 0.5
        n = 10 ** 8
        scaled = n ** 2 * bounds.superposition_bound(p_bar, n, nu, z_max, 1.0)
        assert scaled == pytest.approx(p_bar / (4 * math.sqrt(nu) * z_max), rel=1e-3)

    def test_slope_is_minus_two(self):
        ns = [10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7]
        fit = scaling_fit([(n, bounds.superposition_bound(0.4, n, 10, 0.5, 1.0)) for n in ns])
        assert fit.slope == pytest.approx(-2.0, abs=0.01)

    def test_validation(self):
        with pytest.raises(NonPositiveInput):
            bounds.superposition_bound(0.0, 5, 10, 0.5, 1.0)
        with pytest.raises(NonPositiveInput):
            bounds.superposition_bound(0.4, 5, 10, 0.5, -1.0)
        with pytest.raises(NonPositiveInput):
            bounds.superposition_bound(0.4, 5, 10, 0.0, 0.0)


class TestAnalyticScaling:
    @pytest.mark.parametrize(
        "rmse, slope",
        [
            (lambda n: bounds.parallel_rmse(0.3, 0.3, n, 100), -0.5),
            (lambda n: bounds.sequential_rmse(0.3, 0.3, n, 100), -1.0),
            (lambda n: bounds.switch_rmse_control(n, 100), -2.0),
            (lambda n: bounds.ion_trap_rmse(n, 100), -2.0),
        ],
    )
    def test_slopes(self, rmse, slope):
        fit = scaling_fit([(n, rmse(n)) for n in (3, 5, 8, 12, 20)])
        assert fit.slope == pytest.approx(slope, abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0)


class TestBoundQuery:
    def test_from_ranges(self):
        query = BoundQuery.from_ranges(5, 10, (-0.6, 0.4), (0.1, 0.5))
        assert query.z_max == pytest.approx(0.6)
        assert query.x_bar == pytest.approx(-0.1)
        assert query.p_bar == pytest.approx(0.3)
        assert query.energy == 0.5

    def test_inverted_range(self):
        with pytest.raises(InvalidRange):
            BoundQuery.from_ranges(5, 10, (0.4, -0.6), (0.1, 0.5))

    def test_sub_vacuum_energy(self):
        with pytest.raises(ValueError):
            BoundQuery(n=5, nu=10, energy=0.1, x_bar=0.1, p_bar=0.1, z_max=0.5)

    def test_frozen(self):
        query = BoundQuery(n=5, nu=10, x_bar=0.1, p_bar=0.1, z_max=0.5)
        with pytest.raises(ValidationError):
            query.n = 6
