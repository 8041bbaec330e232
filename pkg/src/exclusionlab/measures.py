"""Fiber smoothing of shuffle laws, skeleton marginals, FKG and domination checks."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .heights import (
    compare_order,
    Order,
    scaled_shuffle_heights,
    semi_skeleton_key,
    skeleton_cuts,
    skeleton_key,
)
from .states import DEFAULT_MAX_STATES, Params, shuffle_space

UPSET_ENUMERATION_LIMIT = 30


def smooth_and_project(nu: np.ndarray, k: int, N: int, R: int,
                       max_states: int = DEFAULT_MAX_STATES):
    """Average nu over each semi-skeleton fiber and push it onto the projections.

    Returns (nu_tilde, nu_hat, nu_bar): the fiber-constant law on decks, the
    induced law on semi-skeletons and the induced law on skeletons.  Averaging
    uniformly over a fiber agrees with averaging over the band-preserving
    relabelings because every deck in a fiber is hit equally often.
    """
    states, _ = shuffle_space(k, N, max_states)
    nu = np.asarray(nu, dtype=float)
    if len(nu) != len(states):
        raise ValueError("law has the wrong dimension for this space")
    semi_keys = [semi_skeleton_key(s, R) for s in states]
    skel_keys = [skeleton_key(s, R) for s in states]
    nu_hat: dict = {}
    fiber_size: dict = {}
    for key, p in zip(semi_keys, nu):
        nu_hat[key] = nu_hat.get(key, 0.0) + p
        fiber_size[key] = fiber_size.get(key, 0) + 1
    nu_tilde = np.array([nu_hat[key] / fiber_size[key] for key in semi_keys])
    nu_bar: dict = {}
    for key, p in zip(skel_keys, nu):
        nu_bar[key] = nu_bar.get(key, 0.0) + p
    return nu_tilde, nu_hat, nu_bar


def skeleton_entry_pushforward(nu: np.ndarray, k: int, N: int, R: int,
                               i: int, j: int,
                               max_states: int = DEFAULT_MAX_STATES) -> dict:
    """Law of the single skeleton entry (i, j), keyed by N-scaled height."""
    states, _ = shuffle_space(k, N, max_states)
    xs, ys = skeleton_cuts(k, N, R)
    out: dict = {}
    for s, p in zip(states, np.asarray(nu, dtype=float)):
        v = int(scaled_shuffle_heights(s)[xs[i], ys[j]])
        out[v] = out.get(v, 0.0) + p
    return out


def tv_dict(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in keys)


def skeleton_marginal(params: Params, R: int, i: int, j: int):
    """Stationary law of skeleton entry (i, j): hypergeometric counts, shifted.

    Under the uniform deck, the number of cards with value <= y_j among the
    first x_i packets is hypergeometric; entry (i, j) of the skeleton is that
    count minus x_i * y_j / N.  Returns (counts, heights, probs).
    """
    k, N = params.k, params.N
    xs, ys = skeleton_cuts(k, N, R)
    if not (0 <= i <= R and 0 <= j <= R):
        raise ValueError("skeleton indices out of range")
    cards = k * N
    draw = k * xs[i]
    good = ys[j]
    lo = max(0, draw - (cards - good))
    hi = min(good, draw)
    counts = np.arange(lo, hi + 1)
    probs = np.array(
        [
            math.comb(good, int(c)) * math.comb(cards - good, draw - int(c))
            for c in counts
        ],
        dtype=float,
    ) / math.comb(cards, draw)
    heights = counts - xs[i] * ys[j] / N
    return counts, heights, probs


def fkg_check(k: int, N: int, f, g, max_states: int = DEFAULT_MAX_STATES):
    """(mean of f*g, mean f * mean g) under the uniform deck.

    For increasing f and g the first entry dominates the second.
    """
    states, _ = shuffle_space(k, N, max_states)
    fv = np.array([f(s) for s in states], dtype=float)
    gv = np.array([g(s) for s in states], dtype=float)
    lhs = float(fv @ gv) / len(states)
    rhs = float(fv.mean() * gv.mean())
    return lhs, rhs


def height_coordinate(x: int, y: int):
    """f(sigma) = h(x, y): the basic increasing coordinate."""

    def f(s):
        return scaled_shuffle_heights(s)[x, y] / s.params.N

    return f


def random_increasing_function(k: int, N: int, rng: np.random.Generator):
    """Random nonnegative combination of height coordinates plus a threshold term.

    Nonnegative combinations and indicator thresholds of increasing
    coordinates are increasing, so these are valid FKG inputs.
    """
    cards = k * N
    n_terms = int(rng.integers(1, 4))
    coords = [
        (int(rng.integers(1, N)), int(rng.integers(1, cards)))
        for _ in range(n_terms)
    ]
    weights = rng.uniform(0.1, 2.0, size=n_terms)
    tx, ty = int(rng.integers(1, N)), int(rng.integers(1, cards))
    cut = rng.uniform(-1.0, 1.0)
    bump = float(rng.uniform(0.0, 1.5))

    def f(s):
        h = scaled_shuffle_heights(s) / s.params.N
        val = sum(w * h[x, y] for w, (x, y) in zip(weights, coords))
        if h[tx, ty] >= cut:
            val += bump
        return val

    return f


# ---------------------------------------------------------------------------
# stochastic domination between laws on an enumerated partial order
# ---------------------------------------------------------------------------


def _leq_matrix(states) -> np.ndarray:
    n = len(states)
    leq = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(n):
            cmp = compare_order(states[a], states[b])
            leq[a, b] = cmp in (Order.LEQ, Order.EQ)
    return leq


def _iter_upsets(leq: np.ndarray):
    """All up-closed subsets, grown one maximal-first element at a time."""
    n = leq.shape[0]
    # above[i] = states strictly above i; deciding those before i makes the
    # closure constraint checkable at inclusion time
    above = [frozenset(np.nonzero(leq[i])[0]) - {i} for i in range(n)]
    order = sorted(range(n), key=lambda i: len(above[i]))  # maximal elements first

    def rec(pos: int, chosen: frozenset):
        if pos == n:
            yield chosen
            return
        i = order[pos]
        yield from rec(pos + 1, chosen)  # leave i out: nothing below it chosen yet
        if above[i] <= chosen:
            yield from rec(pos + 1, chosen | {i})

    yield from rec(0, frozenset())


def dominates(nu_hi: np.ndarray, nu_lo: np.ndarray, states, atol: float = 1e-9) -> bool:
    """True when nu_hi stochastically dominates nu_lo on the states' order.

    Spaces up to 30 states are settled by checking every up-closed event;
    larger spaces solve the Strassen coupling feasibility problem instead.
    """
    nu_hi = np.asarray(nu_hi, dtype=float)
    nu_lo = np.asarray(nu_lo, dtype=float)
    leq = _leq_matrix(states)
    n = len(states)
    if n <= UPSET_ENUMERATION_LIMIT:
        for upset in _iter_upsets(leq):
            idx = list(upset)
            if nu_hi[idx].sum() < nu_lo[idx].sum() - atol:
                return False
        return True
    # Strassen: a coupling supported on {lo <= hi} with the right marginals
    pairs = [(a, b) for a in range(n) for b in range(n) if leq[a, b]]
    n_var = len(pairs)
    a_eq = np.zeros((2 * n, n_var))
    for col, (a, b) in enumerate(pairs):
        a_eq[a, col] = 1.0  # row marginal: the dominated law
        a_eq[n + b, col] = 1.0  # column marginal: the dominating law
    b_eq = np.concatenate([nu_lo, nu_hi])
    res = linprog(
        c=np.zeros(n_var),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * n_var,
        method="highs",
    )
    return bool(res.status == 0)
