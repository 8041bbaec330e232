import math

import numpy as np
import pytest

from exclusionlab.evolve import (
    exact_mean_height_profile,
    mixing_time,
    sep_instance,
    shuffle_instance,
    worst_case_distance,
)
from exclusionlab.generator import build_sep_generator
from exclusionlab.heights import scaled_shuffle_heights, top_height_values
from exclusionlab.spectral import (
    EigenPair,
    eigenfunction,
    eigenvalue,
    heat_min_bound,
    heat_modes,
    heat_solution,
    heat_sup_bound,
    rough_upper_bound,
    rough_upper_bound_shuffle,
    theorem_lower_bound,
    verify_eigenpair,
    wilson_lower_bound,
)
from exclusionlab.states import Params, sep_space, top_shuffle


class TestEigenvalue:
    def test_zero_mode(self):
        assert eigenvalue(5, 3, 0) == 0.0

    def test_closed_forms(self):
        assert eigenvalue(2, 1, 1) == pytest.approx(2.0, abs=1e-14)
        assert eigenvalue(4, 2, 1) == pytest.approx(4 - 2 * math.sqrt(2), abs=1e-14)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            eigenvalue(4, 2, 4)


class TestEigenfunctions:
    def test_mode_zero_counts_particles(self):
        params = Params(2, 3, 4)
        states, _ = sep_space(params)
        pair = eigenfunction(params, 0)
        assert np.allclose(pair.particle_values(states), 4.0)
        assert np.allclose(pair.height_values(states), 0.0)

    def test_two_state_values(self):
        params = Params(1, 2, 1)
        states, _ = sep_space(params)
        pair = eigenfunction(params, 1)
        values = dict(zip((s.gamma for s in states), pair.particle_values(states)))
        assert values[(1, 0)] == pytest.approx(math.sqrt(2) / 2, abs=1e-14)
        assert values[(0, 1)] == pytest.approx(-math.sqrt(2) / 2, abs=1e-14)

    @pytest.mark.parametrize("k,N,m", [(1, 4, 2), (2, 3, 2), (2, 3, 4), (3, 2, 3)])
    def test_residuals_both_forms(self, k, N, m):
        params = Params(k, N, m)
        Q = build_sep_generator(params)
        for j in range(N):
            pair = eigenfunction(params, j)
            assert verify_eigenpair(Q, pair, "particle") < 1e-9
            assert verify_eigenpair(Q, pair, "height") < 1e-9

    def test_wrong_rate_is_detected(self):
        params = Params(2, 3, 2)
        Q = build_sep_generator(params)
        good = eigenfunction(params, 1)
        bad = EigenPair(1, good.rate * 1.05, params)
        assert verify_eigenpair(Q, bad, "particle") > 1e-3

    def test_rates_appear_in_generator_spectrum(self):
        # each closed-form rate matches some eigenvalue of the full generator
        params = Params(2, 3, 2)
        Q = build_sep_generator(params).matrix.toarray()
        spectrum = np.linalg.eigvals(Q)
        for j in range(params.N):
            target = -eigenvalue(params.N, params.k, j)
            assert np.min(np.abs(spectrum - target)) < 1e-8


class TestWilsonBound:
    def test_zero_case(self):
        assert wilson_lower_bound(1.0, 2.0, 1 / 8, 1.0) == 0.0

    def test_doubling_r(self):
        rate = 1.7
        a = wilson_lower_bound(5.0, rate, 1.0, 0.3)
        b = wilson_lower_bound(5.0, rate, 2.0, 0.3)
        assert a - b == pytest.approx(math.log(2) / (2 * rate), abs=1e-12)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            wilson_lower_bound(1.0, 0.0, 1.0, 0.5)

    @pytest.mark.parametrize("k,N,m", [(1, 2, 1), (1, 4, 2), (2, 3, 2), (2, 4, 4)])
    @pytest.mark.parametrize("eps", [0.1, 0.25, 0.5])
    def test_dominated_by_exact_mixing_time(self, k, N, m, eps):
        params = Params(k, N, m)
        gen, mu = sep_instance(params)
        assert theorem_lower_bound(params, eps) <= mixing_time(gen, mu, eps) + 1e-9

    def test_bound_explodes_as_eps_to_one(self):
        params = Params(2, 4, 4)
        a = theorem_lower_bound(params, 0.9)
        b = theorem_lower_bound(params, 0.999)
        c = theorem_lower_bound(params, 0.999999)
        assert a > b > c

    def test_requires_light_filling(self):
        with pytest.raises(ValueError):
            theorem_lower_bound(Params(1, 4, 3), 0.25)

    @pytest.mark.parametrize("N", [8, 16, 32])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_top_state_value_large(self, N, k):
        # the slowest height-form mode at the left-packed state clears m N / 16
        m = k * N // 2
        params = Params(k, N, m)
        weights = np.sin(np.arange(N + 1) * math.pi / N)
        value = float(top_height_values(params) @ weights)
        assert value >= m * N / 16


class TestRoughBound:
    def test_clamped_at_zero_time(self):
        assert rough_upper_bound(Params(2, 4, 3), 0.0) == 1.0

    def test_two_state_domination(self):
        params = Params(1, 2, 1)
        gen, mu = sep_instance(params)
        for t in np.linspace(0.0, 5.0, 21):
            assert worst_case_distance(gen, mu, t) <= rough_upper_bound(params, t)

    def test_shuffle_variant(self):
        assert rough_upper_bound_shuffle(2, 4, 0.0) == 1.0
        t_large = 200.0
        assert rough_upper_bound_shuffle(2, 4, t_large) < 1e-6

    @pytest.mark.parametrize("k,N", [(2, 2), (1, 4), (3, 2)])
    def test_shuffle_bound_dominates_exact_distance(self, k, N):
        gen, mu = shuffle_instance(k, N)
        for t in np.linspace(0.0, 6.0, 25):
            assert worst_case_distance(gen, mu, t) <= rough_upper_bound_shuffle(
                k, N, t
            ) + 1e-12

    @pytest.mark.parametrize("k,N", [(2, 2), (1, 4), (3, 2)])
    def test_shuffle_spectral_gap_matches_closed_form(self, k, N):
        gen, mu = shuffle_instance(k, N)
        root = np.sqrt(mu)
        sym = (root[:, None] / root[None, :]) * gen.matrix.toarray()
        spectrum = np.sort(np.linalg.eigvalsh(sym))
        assert -spectrum[-2] == pytest.approx(eigenvalue(N, k, 1), abs=1e-10)

    def test_empty_system(self):
        assert rough_upper_bound(Params(2, 3, 0), 0.0) == 0.0


class TestHeat:
    def test_zero_stays_zero(self):
        sol = heat_solution(np.zeros(9), 2, 1.3)
        assert np.allclose(sol.values, 0.0)

    def test_pure_mode_decay(self):
        N, k, t = 8, 2, 0.9
        x = np.arange(N + 1)
        f0 = np.sin(math.pi * x / N)
        sol = heat_solution(f0, k, t)
        assert np.abs(sol.values - f0 * math.exp(-eigenvalue(N, k, 1) * t)).max() < 1e-12

    def test_boundary_violation_rejected(self):
        with pytest.raises(ValueError):
            heat_solution(np.ones(5), 1, 0.1)

    def test_matches_exact_mean_heights(self):
        k, N = 2, 3
        gen, _mu = shuffle_instance(k, N)
        one = top_shuffle(k, N)
        nu0 = np.zeros(gen.dim)
        nu0[gen.index[one.sigma]] = 1.0
        h0 = scaled_shuffle_heights(one) / N
        for y in (1, 3, 5):
            for t in (0.0, 0.2, 0.9, 2.5):
                exact = exact_mean_height_profile(gen, nu0, y, t)
                eig = heat_solution(h0[:, y], k, t).values
                assert np.abs(exact - eig).max() < 1e-9

    def test_profile_bounds_from_top_deck(self):
        k, N = 2, 3
        one = top_shuffle(k, N)
        h0 = scaled_shuffle_heights(one) / N
        for y in range(1, k * N):
            for t in (0.0, 0.3, 1.1):
                sol = heat_solution(h0[:, y], k, t).values
                assert sol.max() <= heat_sup_bound(y, k, N, t) + 1e-12
                for x in range(1, N):
                    assert sol[x] >= heat_min_bound(x, y, k, N, t) - 1e-12

    def test_mode_coefficients_invert(self):
        rng = np.random.default_rng(3)
        N = 6
        f0 = np.concatenate(([0.0], rng.normal(size=N - 1), [0.0]))
        c = heat_modes(f0)
        x = np.arange(N + 1)
        rebuilt = sum(
            c[j - 1] * np.sin(math.pi * j * x / N) for j in range(1, N)
        )
        assert np.abs(rebuilt - f0).max() < 1e-12
