import itertools
import math

import numpy as np
import pytest

from exclusionlab.states import (
    Configuration,
    EnumerationBudgetError,
    InfeasibleStateError,
    Params,
    collapse_theta,
    count_configurations,
    count_kpermutations,
    enumerate_configurations,
    enumerate_kpermutations,
    extremal_states,
    format_configuration,
    format_kpermutation,
    make_kpermutation,
    parse_configuration,
    parse_kpermutation,
    project_phi,
    stationary_sep_measure,
    top_shuffle,
)


def brute_force_configurations(k, N, m):
    """Independent oracle: filter the full product space."""
    return [g for g in itertools.product(range(k + 1), repeat=N) if sum(g) == m]


def inclusion_exclusion_count(k, N, m):
    """Independent count oracle: bounded compositions by inclusion-exclusion."""
    total = 0
    for j in range(N + 1):
        rem = m - j * (k + 1)
        if rem < 0:
            break
        total += (-1) ** j * math.comb(N, j) * math.comb(rem + N - 1, N - 1)
    return total


class TestParams:
    def test_rejects_overfull(self):
        with pytest.raises(InfeasibleStateError):
            Params(1, 2, 3)

    def test_rejects_tiny_segment(self):
        with pytest.raises(InfeasibleStateError):
            Params(1, 1, 1)

    def test_m_optional_for_shuffle(self):
        p = Params(2, 3)
        with pytest.raises(ValueError):
            p.require_m()


class TestEnumerateConfigurations:
    def test_two_placements(self):
        got = [c.gamma for c in enumerate_configurations(Params(1, 2, 1))]
        assert sorted(got) == [(0, 1), (1, 0)]

    def test_capacity_two(self):
        got = [c.gamma for c in enumerate_configurations(Params(2, 2, 2))]
        assert got == [(0, 2), (1, 1), (2, 0)]

    def test_full_occupancy_unique(self):
        got = [c.gamma for c in enumerate_configurations(Params(2, 3, 6))]
        assert got == [(2, 2, 2)]

    @pytest.mark.parametrize("k,N,m", [(1, 4, 2), (2, 3, 3), (3, 3, 4), (2, 4, 5)])
    def test_matches_brute_force_and_lexicographic(self, k, N, m):
        got = [c.gamma for c in enumerate_configurations(Params(k, N, m))]
        expected = brute_force_configurations(k, N, m)
        assert got == sorted(expected)
        assert got == sorted(got)

    @pytest.mark.parametrize(
        "k,N,m", [(1, 5, 2), (2, 4, 4), (3, 4, 6), (2, 6, 7), (3, 5, 0)]
    )
    def test_count_oracles_agree(self, k, N, m):
        n_enum = len(enumerate_configurations(Params(k, N, m)))
        assert n_enum == count_configurations(k, N, m)
        assert n_enum == inclusion_exclusion_count(k, N, m)


class TestEnumerateKPermutations:
    @pytest.mark.parametrize("k,N,expected", [(1, 2, 2), (2, 2, 6), (3, 2, 20)])
    def test_counts(self, k, N, expected):
        states = enumerate_kpermutations(k, N)
        assert len(states) == expected
        assert len(states) == count_kpermutations(k, N)

    def test_matches_collapse_of_all_permutations(self):
        k, N = 2, 2
        via_theta = {
            collapse_theta(p, k).sigma
            for p in itertools.permutations(range(1, k * N + 1))
        }
        direct = {s.sigma for s in enumerate_kpermutations(k, N)}
        assert via_theta == direct

    def test_no_duplicates_and_valid(self):
        states = enumerate_kpermutations(2, 3)
        assert len({s.sigma for s in states}) == len(states) == 90

    def test_budget(self):
        with pytest.raises(EnumerationBudgetError):
            enumerate_kpermutations(2, 4, max_states=100)


class TestStationaryMeasure:
    def test_k1_uniform(self):
        mu = stationary_sep_measure(Params(1, 3, 1))
        assert np.allclose(mu, 1 / 3)

    def test_product_formula_values(self):
        mu = stationary_sep_measure(Params(2, 2, 2))
        states = [c.gamma for c in enumerate_configurations(Params(2, 2, 2))]
        lookup = dict(zip(states, mu))
        assert lookup[(2, 0)] == pytest.approx(1 / 6, abs=1e-15)
        assert lookup[(1, 1)] == pytest.approx(4 / 6, abs=1e-15)
        assert lookup[(0, 2)] == pytest.approx(1 / 6, abs=1e-15)

    @pytest.mark.parametrize("k,N,m", [(2, 3, 2), (3, 2, 4), (1, 5, 3), (2, 4, 7)])
    def test_normalised_and_positive(self, k, N, m):
        mu = stationary_sep_measure(Params(k, N, m))
        assert abs(mu.sum() - 1.0) < 1e-12
        assert np.all(mu > 0)


class TestProjections:
    def test_phi_single_card(self):
        s = make_kpermutation([(1, 4), (2, 3)], 2)
        assert project_phi(s, 1).gamma == (1, 0)
        assert project_phi(s, 2).gamma == (1, 1)
        assert project_phi(s, 4).gamma == (2, 2)

    def test_theta_identity_is_top(self):
        assert collapse_theta((1, 2, 3, 4), 2).sigma == top_shuffle(2, 2).sigma

    def test_theta_example(self):
        assert collapse_theta((1, 3, 2, 4), 2).sigma == ((1, 3), (2, 4))

    def test_theta_fiber_of_top(self):
        # all (k!)^N = 4 within-packet reorderings collapse to the same deck
        k, N = 2, 2
        top = top_shuffle(k, N).sigma
        fiber = set()
        for p1 in itertools.permutations((1, 2)):
            for p2 in itertools.permutations((3, 4)):
                fiber.add(collapse_theta(p1 + p2, k).sigma)
        assert fiber == {top}

    def test_theta_rejects_non_bijection(self):
        with pytest.raises(InfeasibleStateError):
            collapse_theta((1, 1, 2, 3), 2)


class TestExtremalStates:
    def test_pushed_left_right(self):
        top, bot = extremal_states(Params(1, 4, 2))
        assert top.gamma == (1, 1, 0, 0)
        assert bot.gamma == (0, 0, 1, 1)

    def test_empty(self):
        top, bot = extremal_states(Params(2, 3, 0))
        assert top.gamma == bot.gamma == (0, 0, 0)

    def test_partial_block(self):
        top, _ = extremal_states(Params(2, 3, 3))
        assert top.gamma == (2, 1, 0)


class TestSerialization:
    def test_configuration_round_trip(self):
        c = Configuration((1, 1, 0), Params(2, 3, 2))
        text = format_configuration(c)
        assert text == "k=2 N=3 m=2 : 1 1 0"
        assert parse_configuration(text) == c

    def test_kpermutation_round_trip(self):
        s = make_kpermutation([(1, 4), (2, 3)], 2)
        text = format_kpermutation(s)
        assert text == "k=2 N=2 : {1,4}|{2,3}"
        assert parse_kpermutation(text) == s

    def test_golden_file(self, tmp_path):
        import pathlib

        golden = pathlib.Path(__file__).parent / "golden" / "states.txt"
        for line in golden.read_text().splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            if " m=" in line:
                state = parse_configuration(line)
                assert format_configuration(state) == line
            else:
                state = parse_kpermutation(line)
                assert format_kpermutation(state) == line

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_configuration("k=2 N=3 : 1 1 0")
        with pytest.raises(ValueError):
            parse_kpermutation("k=2 N=2 : 1,4|2,3")
