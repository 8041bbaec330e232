"""Exact transient laws, total-variation distances, and mixing times.

Everything here is brute force over an enumerated state space: distributions
are dense row vectors aligned with the generator's enumeration, evolved by
uniformization (a Poisson mixture of powers of the uniformized kernel) with
the tail truncated below 1e-13.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy import stats

from .censoring import CensoringScheme
from .generator import (
    RateMatrix,
    build_censored_shuffle_generator,
    build_sep_generator,
    build_shuffle_generator,
)
from .heights import scaled_shuffle_heights
from .states import DEFAULT_MAX_STATES, Params, shuffle_space, stationary_sep_measure

_TAIL = 1e-13


def tv_distance(nu: np.ndarray, mu: np.ndarray) -> float:
    """Total variation distance, half the L1 difference."""
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if nu.shape != mu.shape:
        raise ValueError("distributions live on different spaces")
    return 0.5 * float(np.abs(nu - mu).sum())


def _as_sparse(Q) -> sp.csr_matrix:
    return Q.matrix if isinstance(Q, RateMatrix) else sp.csr_matrix(Q)


def _poisson_weights(rate_t: float):
    """Poisson(rate_t) pmf out to where the right tail is below _TAIL."""
    if rate_t == 0.0:
        return np.array([1.0])
    n_hi = int(rate_t + 12 * math.sqrt(rate_t) + 40)
    n = np.arange(n_hi + 1)
    w = stats.poisson.pmf(n, rate_t)
    # extend in the unlikely event the tail is still heavy
    while w.sum() < 1.0 - _TAIL:
        n_hi = int(n_hi * 1.5) + 10
        n = np.arange(n_hi + 1)
        w = stats.poisson.pmf(n, rate_t)
    return w


def transient_distribution(Q, nu0: np.ndarray, t: float) -> np.ndarray:
    """Law at time t of the chain started from nu0: nu0 expm(tQ)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    M = _as_sparse(Q)
    nu = np.asarray(nu0, dtype=float).copy()
    if t == 0.0:
        return nu
    lam = float(-M.diagonal().min())
    if lam == 0.0:
        return nu
    P = sp.eye(M.shape[0], format="csr") + M.multiply(1.0 / lam)
    P = P.tocsr()
    w = _poisson_weights(lam * t)
    acc = w[0] * nu
    v = nu
    cum = w[0]
    for n in range(1, len(w)):
        v = v @ P
        acc = acc + w[n] * v
        cum += w[n]
        if 1.0 - cum < _TAIL:
            break
    return acc


def transition_matrix(Q, t: float) -> np.ndarray:
    """Dense expm(tQ); rows are the laws from each Dirac start."""
    M = _as_sparse(Q)
    dim = M.shape[0]
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return np.eye(dim)
    lam = float(-M.diagonal().min())
    if lam == 0.0:
        return np.eye(dim)
    P = (sp.eye(dim, format="csr") + M.multiply(1.0 / lam)).tocsr()
    w = _poisson_weights(lam * t)
    acc = w[0] * np.eye(dim)
    V = np.eye(dim)
    cum = w[0]
    for n in range(1, len(w)):
        V = P.T @ V.T  # (V @ P) computed through the sparse side
        V = V.T
        acc += w[n] * V
        cum += w[n]
        if 1.0 - cum < _TAIL:
            break
    return acc


def distance_from_state(Q, mu: np.ndarray, t: float, i: int) -> float:
    nu0 = np.zeros(len(mu))
    nu0[i] = 1.0
    return tv_distance(transient_distribution(Q, nu0, t), mu)


class SpectralEvolver:
    """Dense expm(tQ) for a reversible generator via one symmetric eigensolve.

    Conjugating by sqrt(mu) turns detailed balance into symmetry, so a single
    eigendecomposition serves every t; used to keep bisection affordable.
    """

    def __init__(self, Q, mu: np.ndarray):
        M = _as_sparse(Q).toarray()
        root = np.sqrt(np.asarray(mu, dtype=float))
        sym = (root[:, None] / root[None, :]) * M
        if np.abs(sym - sym.T).max() > 1e-8:
            raise ValueError("generator is not reversible with respect to mu")
        sym = 0.5 * (sym + sym.T)
        self.eigvals, vecs = np.linalg.eigh(sym)
        self.left = vecs / root[:, None]
        self.right = vecs * root[:, None]

    def transition_matrix(self, t: float) -> np.ndarray:
        decay = np.exp(self.eigvals * t)
        return (self.left * decay[None, :]) @ self.right.T


def worst_case_distance(Q, mu: np.ndarray, t: float, evolver=None) -> float:
    """d(t): the largest TV distance to mu over all Dirac starts."""
    P_t = evolver.transition_matrix(t) if evolver is not None else transition_matrix(Q, t)
    return float(0.5 * np.abs(P_t - mu[None, :]).sum(axis=1).max())


def mixing_time(
    Q,
    mu: np.ndarray,
    eps: float,
    bracket_hi: float | None = None,
    tol: float = 1e-6,
) -> float:
    """First time the worst-case distance drops to eps, by bisection.

    d(t) is nonincreasing, so bisection on [0, hi] converges; the default hi
    is a generous multiple of the diffusive scale and is doubled if it is not
    yet past the target.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if bracket_hi is None:
        if isinstance(Q, RateMatrix):
            k, N = Q.params.k, Q.params.N
            m = Q.params.m if Q.params.m is not None else k * N
            scale = max(m, k * N, 2)
            bracket_hi = 10.0 * N * N * math.log(scale) / (2 * k * math.pi**2)
        else:
            bracket_hi = 1.0  # the doubling loop below finds the true bracket
    evolver = None
    if _as_sparse(Q).shape[0] <= 4000:
        try:
            evolver = SpectralEvolver(Q, mu)
        except ValueError:
            evolver = None  # non-reversible: fall back to uniformization
    if worst_case_distance(Q, mu, 0.0, evolver) <= eps:
        return 0.0
    hi = bracket_hi
    for _ in range(60):
        if worst_case_distance(Q, mu, hi, evolver) <= eps:
            break
        hi *= 2.0
    else:
        raise RuntimeError("mixing time bracket failed to capture the target")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if worst_case_distance(Q, mu, mid, evolver) <= eps:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def censored_transient_distribution(
    k: int,
    N: int,
    nu0: np.ndarray,
    scheme: CensoringScheme,
    t: float,
    max_states: int = DEFAULT_MAX_STATES,
) -> np.ndarray:
    """Law at time t of the shuffle run through a piecewise-constant scheme.

    Each piece contributes expm(duration * Q_piece) where Q_piece keeps only
    the permitted swaps.
    """
    if (scheme.k, scheme.N) != (k, N):
        raise ValueError("scheme was built for different parameters")
    nu = np.asarray(nu0, dtype=float).copy()
    cache: dict = {}
    for _lo, _hi, permitted in scheme.pieces(t):
        key = permitted
        if key not in cache:
            cache[key] = build_censored_shuffle_generator(k, N, permitted, max_states)
        nu = transient_distribution(cache[key], nu, _hi - _lo)
    return nu


# ---------------------------------------------------------------------------
# exact mean heights of the shuffle (used against the heat-equation solution)
# ---------------------------------------------------------------------------


def shuffle_height_table(k: int, N: int, y: int, max_states: int = DEFAULT_MAX_STATES):
    """H[row, x] = height h(x, y) of the enumerated deck `row`."""
    states, _ = shuffle_space(k, N, max_states)
    H = np.empty((len(states), N + 1))
    for r, s in enumerate(states):
        H[r] = scaled_shuffle_heights(s)[:, y] / N
    return H


def exact_mean_height_profile(
    shuffle_gen: RateMatrix, nu0: np.ndarray, y: int, t: float
) -> np.ndarray:
    """E[h_t(x, y)] for x = 0..N under the exact transient law."""
    k, N = shuffle_gen.params.k, shuffle_gen.params.N
    H = shuffle_height_table(k, N, y)
    nu_t = transient_distribution(shuffle_gen, nu0, t)
    return nu_t @ H


def sep_instance(params: Params, max_states: int = DEFAULT_MAX_STATES):
    """(generator, stationary law) for one exclusion instance."""
    gen = build_sep_generator(params, max_states)
    mu = stationary_sep_measure(params)
    return gen, mu


def shuffle_instance(k: int, N: int, max_states: int = DEFAULT_MAX_STATES):
    """(generator, uniform law) for one shuffle instance."""
    gen = build_shuffle_generator(k, N, max_states)
    mu = np.full(gen.dim, 1.0 / gen.dim)
    return gen, mu
