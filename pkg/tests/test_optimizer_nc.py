import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risopt.channel import channel_no_coupling, end_to_end_channel
from risopt.em_model import ImpedanceNetwork
from risopt.errors import InvalidResistance, LoadClampWarning, ProblemTooLarge, ResonantPhase
from risopt.optimizer_nc import (
    NcProblem,
    brute_force_phases,
    build_nc_problem,
    nc_objective,
    optimal_phases,
    phases_to_loads,
    solve_no_coupling,
    stationarity_residual,
)

from conftest import paper_network

ZSS = 0.19 - 1509j


def random_problem(rng, n):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return NcProblem(a, complex(*rng.normal(size=2)), 0.39, ZSS, 0.2)


complex_numbers = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


class TestBuildProblem:
    def test_coefficients(self):
        net = ImpedanceNetwork(0.1, [1 + 1j, 2.0], [1j, -1.0], np.diag([3 - 5j, 3 - 5j]))
        p = build_nc_problem(net, 1.0)
        assert p.x_abs == pytest.approx(4.0)
        assert np.allclose(p.a, np.array([(1 + 1j) * 1j, -2.0]) / 8.0)
        assert p.b == pytest.approx(0.1 - p.a.sum())

    def test_unequal_diagonal(self):
        net = ImpedanceNetwork(0, [1, 1], [1, 1], np.diag([1 - 1j, 2 - 1j]))
        with pytest.raises(ValueError):
            build_nc_problem(net, 0.2)

    def test_invalid_resistance(self):
        net = ImpedanceNetwork(0, [1], [1], [[-1 + 0j]])
        with pytest.raises(InvalidResistance):
            build_nc_problem(net, 0.5)


class TestClosedForm:
    def test_single_element_aligns(self):
        p = NcProblem(np.array([1j]), 2.0 + 0j, 1.0, ZSS, 0.2)
        phi = optimal_phases(p)
        assert phi[0] == pytest.approx(np.pi / 2)
        assert nc_objective(phi, p) == pytest.approx(3.0)

    def test_dark_element(self):
        p = NcProblem(np.array([0.0, 1.0 + 0j]), 1.0 + 0j, 1.0, ZSS, 0.2)
        assert optimal_phases(p)[0] == 0.0

    def test_zero_b(self):
        p = NcProblem(np.array([1.0 + 1j, -2.0 + 0j]), 0j, 1.0, ZSS, 0.2)
        assert nc_objective(optimal_phases(p), p) == pytest.approx(p.optimum, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(complex_numbers, min_size=1, max_size=12), complex_numbers)
    def test_attains_upper_bound(self, a, b):
        p = NcProblem(np.array(a, dtype=complex), complex(b), 1.0, ZSS, 0.2)
        assert nc_objective(optimal_phases(p), p) == pytest.approx(p.optimum, rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_no_random_phase_beats_it(self, n, seed):
        r = np.random.default_rng(seed)
        p = random_problem(r, n)
        best = nc_objective(optimal_phases(p), p)
        trials = r.uniform(-np.pi, np.pi, size=(200, n))
        assert max(nc_objective(t, p) for t in trials) <= best * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_stationary(self, n, seed):
        p = random_problem(np.random.default_rng(seed), n)
        res = stationarity_residual(optimal_phases(p), p)
        assert np.abs(res).max() <= 1e-9 * p.optimum * np.abs(p.a).max()

    def test_residual_is_scaled_gradient(self, rng):
        p = random_problem(rng, 3)
        phi = rng.uniform(-np.pi, np.pi, 3)
        h = 1e-6
        grad = np.array([(nc_objective(phi + h * e, p) - nc_objective(phi - h * e, p)) / (2 * h) for e in np.eye(3)])
        expected = -nc_objective(phi, p) * grad
        assert np.allclose(stationarity_residual(phi, p), expected, rtol=1e-6, atol=1e-8)


class TestLoads:
    def test_loads_realize_phases(self, rng):
        p = random_problem(rng, 5)
        phi = rng.uniform(-3.0, 3.0, 5)
        load = phases_to_loads(phi, p)
        assert np.all(load.reactances.imag == 0)
        assert load.R0 == 0.2
        # 1/(Z_SS + Z) = (1 + e^{j phi}) / (2|x|)
        inv = 1.0 / (ZSS + load.diagonal)
        assert np.allclose(inv, (1 + np.exp(1j * phi)) / (2 * p.x_abs), rtol=1e-9)

    def test_zero_phase_is_matched_load(self):
        p = NcProblem(np.ones(1, dtype=complex), 0j, 0.39, ZSS, 0.2)
        load = phases_to_loads([0.0], p)
        assert load.reactances[0] == pytest.approx(1509.0)

    def test_resonant_phase(self):
        p = NcProblem(np.ones(2, dtype=complex), 0j, 0.39, ZSS, 0.2)
        with pytest.raises(ResonantPhase):
            phases_to_loads([0.0, np.pi], p)

    def test_clamp_warning(self):
        p = NcProblem(np.ones(1, dtype=complex), 0j, 10.0, 9.8 - 1509j, 0.2)
        with pytest.warns(LoadClampWarning):
            load = phases_to_loads([np.pi - 1e-8], p)
        assert abs(load.reactances[0]) == 1e9

    def test_resistance_exact_near_resonance(self):
        p = NcProblem(np.ones(1, dtype=complex), 0j, 0.39, ZSS, 0.2)
        load = phases_to_loads([np.pi - 1e-8], p)
        assert load.diagonal[0].real == 0.2
        # reactance follows -|x| tan(phi/2) - Im Z_SS
        assert load.reactances[0] == pytest.approx(-0.39 / np.tan(0.5e-8) + 1509.0, rel=1e-6)

    def test_solve_on_paper_network(self):
        net = paper_network(8, 0.25).diagonal_only()
        sol = solve_no_coupling(net, 0.2)
        h = end_to_end_channel(net, sol.loads).h
        assert abs(h) == pytest.approx(sol.predicted_gain, rel=1e-9)
        assert channel_no_coupling(net, sol.loads).h == pytest.approx(h, rel=1e-10)


class TestBruteForce:
    def test_finds_known_optimum(self):
        # optimum sits exactly on the grid
        p = NcProblem(np.array([1.0 + 0j, 1j]), -1.0 + 0j, 1.0, ZSS, 0.2)
        phases, value = brute_force_phases(p, 8)
        assert value == pytest.approx(3.0)
        assert np.allclose(phases, [0.0, -np.pi / 2])

    def test_ties_pick_lowest_tuple(self):
        p = NcProblem(np.array([1.0 + 0j]), 0j, 1.0, ZSS, 0.2)
        phases, value = brute_force_phases(p, 16)
        assert phases[0] == -np.pi
        assert value == pytest.approx(1.0)

    def test_matches_numpy_enumeration(self, rng):
        p = random_problem(rng, 3)
        G = 24
        grid = -np.pi + 2 * np.pi * np.arange(G) / G
        mesh = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), -1).reshape(-1, 3)
        values = np.abs(p.b - np.exp(1j * mesh) @ p.a)
        phases, value = brute_force_phases(p, G)
        assert value == pytest.approx(values.max(), rel=1e-12)
        assert np.allclose(phases, mesh[np.argmax(values)])

    def test_never_beats_closed_form(self, rng):
        for n in (1, 2, 3):
            p = random_problem(rng, n)
            _, value = brute_force_phases(p, 90)
            assert value <= p.optimum * (1 + 1e-12)
            assert p.optimum - value <= np.abs(p.a).sum() * np.pi / 90

    def test_limits(self, rng):
        with pytest.raises(ProblemTooLarge):
            brute_force_phases(random_problem(rng, 5), 8)
        with pytest.raises(ValueError):
            brute_force_phases(random_problem(rng, 2), 4)
