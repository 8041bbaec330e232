"""Closed-form eigenpairs, mixing-time bounds, and the discrete heat solution.

The exclusion generator kills the functions below exactly, in two guises: a
cosine sum over occupancies and a sine sum over heights.  Both are verified
against the matrix, never assumed equal to each other; mode j relaxes at rate
``2k(1 - cos(j pi / N))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generator import RateMatrix
from .heights import scaled_sep_heights, top_height_values
from .states import (
    DEFAULT_MAX_STATES,
    Params,
    count_configurations,
    sep_space,
    stationary_sep_measure,
)


def eigenvalue(N: int, k: int, j: int) -> float:
    """Relaxation rate of mode j: 2k(1 - cos(j pi / N)); zero only for j = 0."""
    if not 0 <= j <= N - 1:
        raise ValueError(f"mode index {j} outside 0..{N - 1}")
    return 2.0 * k * (1.0 - math.cos(j * math.pi / N))


def spectral_gap(k: int, N: int) -> float:
    return eigenvalue(N, k, 1)


@dataclass(frozen=True)
class EigenPair:
    """Mode index, its rate, and the two functional forms on configurations."""

    j: int
    rate: float
    params: Params

    def particle_value(self, gamma) -> float:
        N, j = self.params.N, self.j
        return sum(
            g * math.cos((2 * x - 1) * j * math.pi / (2 * N))
            for x, g in enumerate(gamma, start=1)
        )

    def height_value(self, state) -> float:
        N, j = self.params.N, self.j
        eta = scaled_sep_heights(state) / N
        return float(
            sum(eta[x] * math.sin(x * j * math.pi / N) for x in range(1, N + 1))
        )

    def particle_values(self, states) -> np.ndarray:
        N, j = self.params.N, self.j
        G = np.array([s.gamma for s in states], dtype=float)
        weights = np.cos((2 * np.arange(1, N + 1) - 1) * j * np.pi / (2 * N))
        return G @ weights

    def height_values(self, states) -> np.ndarray:
        N, j = self.params.N, self.j
        H = np.array([scaled_sep_heights(s) for s in states], dtype=float) / N
        weights = np.sin(np.arange(N + 1) * j * np.pi / N)
        return H @ weights


def eigenfunction(params: Params, j: int) -> EigenPair:
    return EigenPair(j, eigenvalue(params.N, params.k, j), params)


def verify_eigenpair(Q: RateMatrix, pair: EigenPair, form: str = "particle") -> float:
    """max |Q f + rate * f| over the enumerated states."""
    if Q.params.k != pair.params.k or Q.params.N != pair.params.N:
        raise ValueError("generator and eigenpair have mismatched parameters")
    if form == "particle":
        f = pair.particle_values(Q.states)
    elif form == "height":
        f = pair.height_values(Q.states)
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(np.abs(Q.matrix @ f + pair.rate * f).max())


# ---------------------------------------------------------------------------
# mixing-time bounds
# ---------------------------------------------------------------------------


def wilson_lower_bound(psi_sup: float, rate: float, R: float, eps: float) -> float:
    """log(sup)/rate - log(8R/eps)/(2 rate): lower bound on t_mix(1 - eps).

    May be negative, in which case the bound is vacuous and returned as-is.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if psi_sup <= 0 or R <= 0 or eps <= 0:
        raise ValueError("sup norm, variance bound and eps must be positive")
    return math.log(psi_sup) / rate - math.log(8.0 * R / eps) / (2.0 * rate)


def theorem_lower_bound(
    params: Params,
    eps: float,
    constant: float = 1.0,
    max_states: int = DEFAULT_MAX_STATES,
) -> float:
    """Mixing-time lower bound from the slowest mode, at threshold eps.

    The slowest height-form mode has sup attained at the left-packed state.
    When the space fits the budget, the sup and the stationary variance are
    computed exactly; otherwise the sup falls back on the left-packed value
    and the variance on ``constant * m * N**2``.  Requires m <= kN/2.
    """
    k, N = params.k, params.N
    m = params.require_m()
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if 2 * m > k * N:
        raise ValueError("the bound is stated for m <= kN/2")
    rate = eigenvalue(N, k, 1)
    lemma_eps = 1.0 - eps
    if count_configurations(k, N, m) <= max_states:
        states, _ = sep_space(params)
        pair = eigenfunction(params, 1)
        values = pair.height_values(states)
        mu = stationary_sep_measure(params)
        psi_sup = float(np.abs(values).max())
        mean = float(mu @ values)
        variance = float(mu @ (values - mean) ** 2)
    else:
        weights = np.sin(np.arange(N + 1) * np.pi / N)
        psi_sup = float(top_height_values(params) @ weights)
        variance = constant * m * N * N
    return wilson_lower_bound(psi_sup, rate, variance, lemma_eps)


def rough_upper_bound(params: Params, t: float) -> float:
    """10 m exp(-t * gap), clamped to [0, 1]: worst-case TV upper bound."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    m = params.require_m()
    val = 10.0 * m * math.exp(-t * spectral_gap(params.k, params.N))
    return min(1.0, max(0.0, val))


def rough_upper_bound_shuffle(k: int, N: int, t: float) -> float:
    """10 kN exp(-t * gap): the shuffle version, clamped to [0, 1]."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    val = 10.0 * k * N * math.exp(-t * spectral_gap(k, N))
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# discrete heat equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeatProfile:
    """Mean-height profile f(x, t) on 0..N with pinned-zero boundary."""

    values: np.ndarray
    t: float
    k: int

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if abs(v[0]) > 1e-12 or abs(v[-1]) > 1e-12:
            raise ValueError("profile must vanish at x = 0 and x = N")
        object.__setattr__(self, "values", v)


def heat_modes(initial) -> np.ndarray:
    """Sine coefficients c_j (j = 1..N-1) of a profile vanishing at 0 and N."""
    f0 = np.asarray(initial, dtype=float)
    N = len(f0) - 1
    if abs(f0[0]) > 1e-12 or abs(f0[-1]) > 1e-12:
        raise ValueError("initial profile must vanish at the boundary")
    x = np.arange(1, N)
    j = np.arange(1, N)
    S = np.sin(np.outer(j, x) * math.pi / N)  # (N-1, N-1)
    return (2.0 / N) * (S @ f0[1:-1])


def heat_solution(initial, k: int, t: float) -> HeatProfile:
    """Exact mean-height evolution: mode j decays at rate 2k(1 - cos(j pi/N)).

    Solves df/dt = k * (f(x+1) - 2 f(x) + f(x-1)) with f(0) = f(N) = 0.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    f0 = np.asarray(initial, dtype=float)
    N = len(f0) - 1
    c = heat_modes(f0)
    j = np.arange(1, N)
    rates = 2.0 * k * (1.0 - np.cos(j * math.pi / N))
    x = np.arange(N + 1)
    S = np.sin(np.outer(x, j) * math.pi / N)  # (N+1, N-1)
    vals = S @ (c * np.exp(-rates * t))
    vals[0] = 0.0
    vals[-1] = 0.0
    return HeatProfile(vals, t, k)


def heat_sup_bound(y: int, k: int, N: int, t: float) -> float:
    """4 min(y, kN - y) exp(-gap t): bound on max_x E[h_t(x, y)], any start."""
    return 4.0 * min(y, k * N - y) * math.exp(-spectral_gap(k, N) * t)


def heat_min_bound(x: int, y: int, k: int, N: int, t: float) -> float:
    """(min(y, kN - y)/pi) sin(x pi/N) exp(-gap t): lower bound from the top deck."""
    return (
        min(y, k * N - y)
        / math.pi
        * math.sin(x * math.pi / N)
        * math.exp(-spectral_gap(k, N) * t)
    )
