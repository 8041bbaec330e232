"""Height functions, the partial order they carry, and skeleton projections.

A configuration gamma lifts to the lattice path
``eta(x) = sum_{z<=x} gamma(z) - x*m/N`` and a deck sigma lifts to the surface
``h(x, y) = sum_{z<=x} |sigma(z) cap {1..y}| - x*y/N``.  Both maps are
injective, so comparing states pointwise through their heights defines a
partial order with the left-packed states on top.

Heights have denominator N only, so we store ``N * height`` as integers and
all order comparisons and skeleton keys are exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .states import (
    Configuration,
    InfeasibleStateError,
    KPermutation,
    Params,
)


class Order(enum.Enum):
    LEQ = "leq"
    GEQ = "geq"
    EQ = "eq"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class HeightFunctionSEP:
    """Lattice path of a configuration; ``scaled[x] = N * eta(x)`` for x in 0..N."""

    scaled: tuple
    params: Params

    def __post_init__(self) -> None:
        N = self.params.N
        m = self.params.require_m()
        k = self.params.k
        if len(self.scaled) != N + 1:
            raise InfeasibleStateError(f"expected {N + 1} heights, got {len(self.scaled)}")
        if self.scaled[0] != 0 or self.scaled[N] != 0:
            raise InfeasibleStateError("height must vanish at both endpoints")
        for x in range(1, N + 1):
            step = self.scaled[x] - self.scaled[x - 1] + m
            if step % N != 0 or not 0 <= step // N <= k:
                raise InfeasibleStateError(
                    f"increment at x={x} does not come from an occupancy in 0..{k}"
                )

    @property
    def values(self) -> np.ndarray:
        """eta as floats, eta(0) .. eta(N)."""
        return np.asarray(self.scaled, dtype=float) / self.params.N


@dataclass(frozen=True)
class HeightFunctionShuffle:
    """Height surface of a deck; ``scaled[x][y] = N * h(x, y)``."""

    scaled: tuple  # (N+1) rows, each of length kN+1
    params: Params

    def __post_init__(self) -> None:
        N, cards = self.params.N, self.params.cards
        if len(self.scaled) != N + 1 or any(len(r) != cards + 1 for r in self.scaled):
            raise InfeasibleStateError("height surface has the wrong shape")
        if any(self.scaled[0][y] != 0 for y in range(cards + 1)):
            raise InfeasibleStateError("row x=0 must vanish")
        if any(self.scaled[x][0] != 0 for x in range(N + 1)):
            raise InfeasibleStateError("column y=0 must vanish")
        if any(self.scaled[N][y] != 0 for y in range(cards + 1)):
            raise InfeasibleStateError("row x=N must vanish")

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.scaled, dtype=float) / self.params.N


def height_of_configuration(c: Configuration) -> HeightFunctionSEP:
    N = c.params.N
    m = c.params.require_m()
    scaled = [0]
    running = 0
    for x in range(1, N + 1):
        running += c.gamma[x - 1]
        scaled.append(running * N - x * m)
    return HeightFunctionSEP(tuple(scaled), c.params)


def height_of_kpermutation(s: KPermutation) -> HeightFunctionShuffle:
    k, N = s.params.k, s.params.N
    cards = k * N
    # occupancy[x][c] = 1 iff card c sits in packet x
    cum = np.zeros((N + 1, cards + 1), dtype=np.int64)
    for x in range(1, N + 1):
        row = np.zeros(cards + 1, dtype=np.int64)
        for c in s.sigma[x - 1]:
            row[c] = 1
        cum[x] = cum[x - 1] + np.cumsum(row)
    xs = np.arange(N + 1, dtype=np.int64)[:, None]
    ys = np.arange(cards + 1, dtype=np.int64)[None, :]
    scaled = cum * N - xs * ys
    return HeightFunctionShuffle(tuple(tuple(int(v) for v in r) for r in scaled), s.params)


def scaled_sep_heights(c: Configuration) -> np.ndarray:
    """N * eta as an int array, without constructing the dataclass."""
    N = c.params.N
    m = c.params.require_m()
    cums = np.concatenate(([0], np.cumsum(c.gamma, dtype=np.int64)))
    return cums * N - np.arange(N + 1, dtype=np.int64) * m


def scaled_shuffle_heights(s: KPermutation) -> np.ndarray:
    """N * h as an (N+1, kN+1) int array."""
    k, N = s.params.k, s.params.N
    cards = k * N
    occ = np.zeros((N, cards), dtype=np.int64)
    for x, block in enumerate(s.sigma):
        for c in block:
            occ[x, c - 1] = 1
    cum = np.zeros((N + 1, cards + 1), dtype=np.int64)
    cum[1:, 1:] = occ.cumsum(axis=0).cumsum(axis=1)
    xs = np.arange(N + 1, dtype=np.int64)[:, None]
    ys = np.arange(cards + 1, dtype=np.int64)[None, :]
    return cum * N - xs * ys


def invert_height(eta: HeightFunctionSEP) -> Configuration:
    """Recover the occupancy vector; inverse of height_of_configuration."""
    N = eta.params.N
    m = eta.params.require_m()
    gamma = tuple(
        (eta.scaled[x] - eta.scaled[x - 1] + m) // N for x in range(1, N + 1)
    )
    return Configuration(gamma, eta.params)


def _scaled_of(state) -> np.ndarray:
    if isinstance(state, Configuration):
        return scaled_sep_heights(state)
    if isinstance(state, KPermutation):
        return scaled_shuffle_heights(state)
    if isinstance(state, HeightFunctionSEP):
        return np.asarray(state.scaled, dtype=np.int64)
    if isinstance(state, HeightFunctionShuffle):
        return np.asarray(state.scaled, dtype=np.int64)
    raise TypeError(f"cannot order a {type(state).__name__}")


def compare_order(a, b) -> Order:
    """Pointwise comparison of the height functions of two same-shaped states."""
    if type(a) is not type(b):
        raise TypeError("states of different kinds are not comparable")
    if a.params != b.params:
        raise ValueError("states with different parameters are not comparable")
    ha, hb = _scaled_of(a), _scaled_of(b)
    if np.array_equal(ha, hb):
        return Order.EQ
    if np.all(ha >= hb):
        return Order.GEQ
    if np.all(ha <= hb):
        return Order.LEQ
    return Order.INCOMPARABLE


def top_height_values(params: Params) -> np.ndarray:
    """Closed form for the left-packed path: min(x*k, m) - x*m/N at each x."""
    k, N = params.k, params.N
    m = params.require_m()
    x = np.arange(N + 1)
    return np.minimum(x * k, m) - x * m / N


# ---------------------------------------------------------------------------
# skeleton projections
# ---------------------------------------------------------------------------


def skeleton_cuts(k: int, N: int, R: int) -> tuple:
    """Position cuts x_j = ceil(jN/R) and value cuts y_j = k * x_j, j = 0..R."""
    if R < 1:
        raise ValueError("R must be a positive integer")
    xs = tuple(-(-j * N // R) for j in range(R + 1))
    ys = tuple(k * x for x in xs)
    return xs, ys


@dataclass(frozen=True)
class SkeletonData:
    """Semi-skeleton and skeleton of one deck, stored as N-scaled integers.

    ``semi[x][j] = N * h(x, y_j)`` for x in 0..N, j in 0..R and
    ``skel[i][j] = N * h(x_i, y_j)``.
    """

    R: int
    xs: tuple
    ys: tuple
    semi: tuple
    skel: tuple
    params: Params

    @property
    def semi_values(self) -> np.ndarray:
        return np.asarray(self.semi, dtype=float) / self.params.N

    @property
    def skel_values(self) -> np.ndarray:
        return np.asarray(self.skel, dtype=float) / self.params.N


def skeleton_data(s: KPermutation, R: int) -> SkeletonData:
    k, N = s.params.k, s.params.N
    xs, ys = skeleton_cuts(k, N, R)
    h = scaled_shuffle_heights(s)
    semi = tuple(tuple(int(h[x, y]) for y in ys) for x in range(N + 1))
    skel = tuple(tuple(int(h[x, y]) for y in ys) for x in xs)
    return SkeletonData(R, xs, ys, semi, skel, s.params)


def semi_skeleton_key(s: KPermutation, R: int) -> tuple:
    """Hashable exact key identifying the semi-skeleton fiber of a deck."""
    return skeleton_data(s, R).semi


def skeleton_key(s: KPermutation, R: int) -> tuple:
    return skeleton_data(s, R).skel
