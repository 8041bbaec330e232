import itertools

import numpy as np
import pytest

from exclusionlab.action import (
    act,
    band_group_order,
    count_action_matches,
    fiber_of_semi_skeleton,
    iter_band_group,
    most_ordered_preimage,
    stabilizer_coset_count,
)
from exclusionlab.heights import Order, compare_order, semi_skeleton_key
from exclusionlab.states import (
    EnumerationBudgetError,
    collapse_theta,
    enumerate_kpermutations,
    make_kpermutation,
    top_shuffle,
)


class TestAction:
    def test_identity_fixes_everything(self):
        for s in enumerate_kpermutations(2, 2):
            rho = tuple(range(1, 5))
            assert act(rho, s) == s

    def test_worked_example(self):
        # relabel 1<->2 and 3<->4 on the deck {3,5}|{2,6}|{1,4}
        omega = make_kpermutation([(3, 5), (2, 6), (1, 4)], 2)
        rho = (2, 1, 4, 3, 5, 6)
        assert act(rho, omega).sigma == ((4, 5), (1, 6), (2, 3))

    def test_band_permutations_preserve_semi_skeleton(self):
        rng = np.random.default_rng(20240817)
        k, N, R = 2, 3, 3
        decks = enumerate_kpermutations(k, N)
        band = list(iter_band_group(k, N, R))
        for _ in range(100):
            omega = decks[rng.integers(len(decks))]
            rho = band[rng.integers(len(band))]
            assert semi_skeleton_key(act(rho, omega), R) == semi_skeleton_key(omega, R)

    def test_preimage_is_fiber_maximum(self):
        # the chosen pre-image dominates every other collapse pre-image
        k, N = 2, 2
        for omega in enumerate_kpermutations(k, N):
            base = most_ordered_preimage(omega)
            base_deck = collapse_theta(base, 1)  # view as 1-permutation
            blocks = [omega.sigma[x] for x in range(N)]
            for orders in itertools.product(
                *(itertools.permutations(b) for b in blocks)
            ):
                flat = tuple(v for block in orders for v in block)
                assert collapse_theta(flat, k) == omega
                other_deck = collapse_theta(flat, 1)
                assert compare_order(base_deck, other_deck) in (Order.GEQ, Order.EQ)


class TestCounting:
    def test_zero_off_fiber_constant_on_fiber(self):
        decks = enumerate_kpermutations(2, 2)
        for R in (1, 2):
            fibers = fiber_of_semi_skeleton(decks, R)
            for omega in decks:
                key = semi_skeleton_key(omega, R)
                counts = {}
                for omega_p in decks:
                    c = count_action_matches(omega, omega_p, R)
                    if semi_skeleton_key(omega_p, R) != key:
                        assert c == 0
                    else:
                        counts[omega_p.sigma] = c
                assert len(set(counts.values())) == 1
                # the constant equals |band group| / fiber size and matches the
                # independent subgroup-intersection count
                value = next(iter(counts.values()))
                assert value == band_group_order(2, 2, R) // len(fibers[key])
                assert value == stabilizer_coset_count(omega, R)

    def test_identity_always_matches(self):
        omega = make_kpermutation([(2, 5), (1, 6), (3, 4)], 2)
        assert count_action_matches(omega, omega, 3) >= 1

    def test_trivial_group_single_orbit(self):
        # k=1, N=2, R=1: the band group is all of S_2 and the fiber is everything
        decks = enumerate_kpermutations(1, 2)
        for omega in decks:
            for omega_p in decks:
                assert count_action_matches(omega, omega_p, 1) == 1

    def test_budget_guard(self):
        omega = top_shuffle(2, 4)
        with pytest.raises(EnumerationBudgetError):
            count_action_matches(omega, omega, 1, max_group=10)
