"""Relabeling action of card permutations on decks, and its fiber counting.

A deck omega has a distinguished pre-image under the packet-collapse map: list
every packet's cards in increasing order, packets in order.  A permutation rho
of the cards then acts by relabeling that pre-image and collapsing again.
Permutations that only shuffle cards within the value bands cut at y_1 < y_2 <
... preserve the semi-skeleton, and every deck in a semi-skeleton fiber is hit
by the same number of band permutations.
"""

from __future__ import annotations

import itertools
import math

from .heights import semi_skeleton_key, skeleton_cuts
from .states import EnumerationBudgetError, KPermutation, collapse_theta

DEFAULT_MAX_GROUP = 2_000_000


def most_ordered_preimage(omega: KPermutation) -> tuple:
    """One-line permutation of {1..kN}: packet x ascending at positions (x-1)k+1..xk.

    Among the (k!)^N permutations collapsing to omega this is the maximal one
    in the height order on S_{kN}.
    """
    out = []
    for block in omega.sigma:
        out.extend(block)
    return tuple(out)


def act(rho, omega: KPermutation) -> KPermutation:
    """Relabel the distinguished pre-image of omega by rho and collapse."""
    rho = tuple(rho)
    base = most_ordered_preimage(omega)
    composed = tuple(rho[v - 1] for v in base)
    return collapse_theta(composed, omega.params.k)


def band_sizes(k: int, N: int, R: int) -> tuple:
    xs, ys = skeleton_cuts(k, N, R)
    return tuple(ys[i] - ys[i - 1] for i in range(1, R + 1))


def band_group_order(k: int, N: int, R: int) -> int:
    """Order of the band-preserving subgroup: product of (y_i - y_{i-1})!."""
    return math.prod(math.factorial(d) for d in band_sizes(k, N, R))


def iter_band_group(k: int, N: int, R: int):
    """All card permutations preserving each value band {y_{i-1}+1 .. y_i}."""
    _, ys = skeleton_cuts(k, N, R)
    bands = [tuple(range(ys[i - 1] + 1, ys[i] + 1)) for i in range(1, R + 1)]
    for parts in itertools.product(*(itertools.permutations(b) for b in bands)):
        rho = [0] * (k * N)
        for band, image in zip(bands, parts):
            for src, dst in zip(band, image):
                rho[src - 1] = dst
        yield tuple(rho)


def count_action_matches(
    omega: KPermutation,
    omega_prime: KPermutation,
    R: int,
    max_group: int = DEFAULT_MAX_GROUP,
) -> int:
    """Brute-force |{rho band-preserving : rho . omega = omega'}|.

    Zero whenever the semi-skeletons differ; constant on each semi-skeleton
    fiber otherwise.
    """
    k, N = omega.params.k, omega.params.N
    order = band_group_order(k, N, R)
    if order > max_group:
        raise EnumerationBudgetError(
            f"band group has {order} elements, over the budget of {max_group}"
        )
    target = omega_prime.sigma
    return sum(1 for rho in iter_band_group(k, N, R) if act(rho, omega).sigma == target)


def stabilizer_coset_count(
    omega: KPermutation, R: int, max_group: int = DEFAULT_MAX_GROUP
) -> int:
    """|{band-preserving} ∩ pre(omega) G pre(omega)^{-1}| with G the within-packet group.

    Independent route to the fiber multiplicity: conjugate each within-packet
    position permutation by the distinguished pre-image and test whether the
    result preserves every value band.
    """
    k, N = omega.params.k, omega.params.N
    if math.factorial(k) ** N > max_group:
        raise EnumerationBudgetError("within-packet group over budget")
    base = most_ordered_preimage(omega)
    inv = [0] * (k * N)
    for pos, val in enumerate(base, start=1):
        inv[val - 1] = pos
    _, ys = skeleton_cuts(k, N, R)

    def band_of(v: int) -> int:
        for i in range(1, len(ys)):
            if v <= ys[i]:
                return i
        raise AssertionError

    count = 0
    packet_positions = [tuple(range(x * k + 1, (x + 1) * k + 1)) for x in range(N)]
    for parts in itertools.product(
        *(itertools.permutations(p) for p in packet_positions)
    ):
        g = [0] * (k * N)
        for packet, image in zip(packet_positions, parts):
            for src, dst in zip(packet, image):
                g[src - 1] = dst
        # conjugate: rho(v) = base[g[inv[v]]]
        ok = True
        for v in range(1, k * N + 1):
            rho_v = base[g[inv[v - 1] - 1] - 1]
            if band_of(rho_v) != band_of(v):
                ok = False
                break
        if ok:
            count += 1
    return count


def fiber_of_semi_skeleton(states, R: int):
    """Group an enumerated shuffle space by semi-skeleton key."""
    fibers: dict = {}
    for s in states:
        fibers.setdefault(semi_skeleton_key(s, R), []).append(s)
    return fibers
