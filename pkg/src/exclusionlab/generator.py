"""Exact generator matrices over the enumerated state spaces.

Rates follow the continuous-time conventions: off-diagonal entry Q[i, j] is
the jump rate from state i to state j and each diagonal entry is minus the
row's off-diagonal sum.  Distributions are row vectors evolving as
``nu_t = nu_0 expm(tQ)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .states import (
    DEFAULT_MAX_STATES,
    EnumerationBudgetError,
    KPermutation,
    Params,
    count_configurations,
    count_kpermutations,
    project_phi,
    sep_space,
    shuffle_space,
)


@dataclass
class RateMatrix:
    """Sparse generator plus the state enumeration it is indexed by."""

    matrix: sp.csr_matrix
    states: list
    index: dict
    params: Params
    kind: str  # "sep" or "shuffle"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def rate(self, a, b) -> float:
        return float(self.matrix[self.index[a], self.index[b]])


def _assemble(dim, rows, cols, vals) -> sp.csr_matrix:
    off = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def build_sep_generator(
    params: Params, max_states: int = DEFAULT_MAX_STATES
) -> RateMatrix:
    """Generator of the capacity-k exclusion chain.

    Across each bond (x, x+1) a particle hops right with rate
    gamma(x) * (k - gamma(x+1)) and left with rate gamma(x+1) * (k - gamma(x)).
    """
    k, N = params.k, params.N
    m = params.require_m()
    n_states = count_configurations(k, N, m)
    if n_states > max_states:
        raise EnumerationBudgetError(
            f"{n_states} configurations exceed the budget of {max_states}"
        )
    states, index = sep_space(params)
    rows, cols, vals = [], [], []
    for i, c in enumerate(states):
        g = c.gamma
        for x in range(N - 1):
            a, b = g[x], g[x + 1]
            if a > 0 and b < k:  # right hop across bond x+1
                target = g[:x] + (a - 1, b + 1) + g[x + 2 :]
                rows.append(i)
                cols.append(index[target])
                vals.append(float(a * (k - b)))
            if b > 0 and a < k:  # left hop
                target = g[:x] + (a + 1, b - 1) + g[x + 2 :]
                rows.append(i)
                cols.append(index[target])
                vals.append(float(b * (k - a)))
    matrix = _assemble(len(states), rows, cols, vals)
    return RateMatrix(matrix, list(states), dict(index), params, "sep")


def shuffle_moves(s: KPermutation):
    """Yield (x, i, j, target_blocks) for every cross-packet card swap.

    x is the bond (1-based), i and j index the current ascending order of the
    two packets.  Every swap of two distinct cards changes the deck.
    """
    k, N = s.params.k, s.params.N
    blocks = s.sigma
    for x in range(1, N):
        left, right = blocks[x - 1], blocks[x]
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                a, b = left[i - 1], right[j - 1]
                new_left = tuple(sorted(left[: i - 1] + left[i:] + (b,)))
                new_right = tuple(sorted(right[: j - 1] + right[j:] + (a,)))
                target = blocks[: x - 1] + (new_left, new_right) + blocks[x + 1 :]
                yield x, i, j, target


def build_shuffle_generator(
    k: int, N: int, max_states: int = DEFAULT_MAX_STATES
) -> RateMatrix:
    """Generator of the packet shuffle: every cross-packet card pair swaps at rate 1."""
    count = count_kpermutations(k, N)
    if count > max_states:
        raise EnumerationBudgetError(
            f"{count} decks exceed the budget of {max_states}"
        )
    states, index = shuffle_space(k, N, max_states)
    rows, cols, vals = [], [], []
    for i, s in enumerate(states):
        for _x, _i, _j, target in shuffle_moves(s):
            rows.append(i)
            cols.append(index[target])
            vals.append(1.0)
    matrix = _assemble(len(states), rows, cols, vals)
    return RateMatrix(matrix, list(states), dict(index), Params(k, N), "shuffle")


def build_censored_shuffle_generator(
    k: int, N: int, allowed, max_states: int = DEFAULT_MAX_STATES
) -> RateMatrix:
    """Shuffle generator keeping only the swaps (x, i, j) in ``allowed``."""
    states, index = shuffle_space(k, N, max_states)
    allowed = frozenset(allowed)
    rows, cols, vals = [], [], []
    for i, s in enumerate(states):
        for x, ii, jj, target in shuffle_moves(s):
            if (x, ii, jj) in allowed:
                rows.append(i)
                cols.append(index[target])
                vals.append(1.0)
    matrix = _assemble(len(states), rows, cols, vals)
    return RateMatrix(matrix, list(states), dict(index), Params(k, N), "shuffle")


def lump_check(k: int, N: int, m: int, max_states: int = DEFAULT_MAX_STATES) -> float:
    """Max defect between the fiber-summed shuffle rates and the exclusion rates.

    For every deck sigma and every occupancy vector c', the summed rate from
    sigma into the fiber over c' must equal the exclusion rate out of
    phi(sigma) into c'; the defect is the largest absolute discrepancy, over
    all decks and all target occupancies (diagonal included).
    """
    shuffle = build_shuffle_generator(k, N, max_states)
    sep = build_sep_generator(Params(k, N, m), max_states)
    n_conf = sep.dim
    defect = 0.0
    Q = shuffle.matrix
    for i, s in enumerate(shuffle.states):
        fiber_rates = np.zeros(n_conf)
        start, end = Q.indptr[i], Q.indptr[i + 1]
        src_conf = project_phi(s, m).gamma
        src_idx = sep.index[src_conf]
        for ptr in range(start, end):
            j = Q.indices[ptr]
            if j == i:
                continue
            tgt_conf = project_phi(shuffle.states[j], m).gamma
            fiber_rates[sep.index[tgt_conf]] += Q.data[ptr]
        # within-fiber churn belongs on the lumped diagonal
        lumped_row = fiber_rates.copy()
        lumped_row[src_idx] -= fiber_rates.sum()
        sep_row = sep.matrix[src_idx].toarray().ravel()
        defect = max(defect, float(np.abs(lumped_row - sep_row).max()))
    return defect
