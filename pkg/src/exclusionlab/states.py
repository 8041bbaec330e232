"""State spaces for the capacity-k exclusion chain and the packet shuffle.

Two kinds of states live here:

* ``Configuration`` -- an occupancy vector gamma: sites 1..N -> {0..k} with a
  fixed particle total m.
* ``KPermutation`` -- a "deck of packets": N pairwise-disjoint k-subsets of the
  card set {1..kN} whose union is the whole card set.

Sites are numbered 1..N and cards 1..k*N in every public interface; tuples are
0-indexed internally.  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

DEFAULT_MAX_STATES = 200_000


class InfeasibleStateError(ValueError):
    """The requested (k, N, m) admits no states, or a state is malformed."""


class EnumerationBudgetError(RuntimeError):
    """An enumeration would exceed the caller's state budget."""


@dataclass(frozen=True)
class Params:
    """Instance size: site capacity ``k``, site/packet count ``N``, particle count ``m``.

    ``m`` is omitted (None) in pure-shuffle contexts.
    """

    k: int
    N: int
    m: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InfeasibleStateError(f"capacity k must be >= 1, got {self.k}")
        if self.N < 2:
            raise InfeasibleStateError(f"need at least two sites, got N={self.N}")
        if self.m is not None and not 0 <= self.m <= self.k * self.N:
            raise InfeasibleStateError(
                f"particle count m={self.m} outside [0, {self.k * self.N}]: "
                "empty state space"
            )

    @property
    def cards(self) -> int:
        return self.k * self.N

    def require_m(self) -> int:
        if self.m is None:
            raise ValueError("this operation needs a particle count m")
        return self.m


@dataclass(frozen=True)
class Configuration:
    """Occupancy vector of the exclusion chain, entries in {0..k} summing to m."""

    gamma: tuple
    params: Params

    def __post_init__(self) -> None:
        k, N = self.params.k, self.params.N
        m = self.params.require_m()
        if len(self.gamma) != N:
            raise InfeasibleStateError(f"expected {N} sites, got {len(self.gamma)}")
        if any(not 0 <= g <= k for g in self.gamma):
            raise InfeasibleStateError(f"occupancies must lie in 0..{k}: {self.gamma}")
        if sum(self.gamma) != m:
            raise InfeasibleStateError(
                f"occupancies sum to {sum(self.gamma)}, expected m={m}"
            )

    def occupancy(self, x: int) -> int:
        """Particles at site x (1-based)."""
        return self.gamma[x - 1]


@dataclass(frozen=True)
class KPermutation:
    """Deck of N packets, each a sorted k-subset of the cards {1..kN}."""

    sigma: tuple
    params: Params

    def __post_init__(self) -> None:
        k, N = self.params.k, self.params.N
        if len(self.sigma) != N:
            raise InfeasibleStateError(f"expected {N} packets, got {len(self.sigma)}")
        seen = set()
        for block in self.sigma:
            if len(block) != k or tuple(sorted(block)) != tuple(block):
                raise InfeasibleStateError(f"packet {block} is not a sorted {k}-set")
            seen.update(block)
        if seen != set(range(1, k * N + 1)):
            raise InfeasibleStateError("packets do not partition the card set")

    def packet(self, x: int) -> tuple:
        """Cards in packet x (1-based), ascending."""
        return self.sigma[x - 1]

    def card(self, x: int, i: int) -> int:
        """The i-th smallest card of packet x (both 1-based)."""
        return self.sigma[x - 1][i - 1]


def make_configuration(gamma: Sequence[int], k: int) -> Configuration:
    gamma = tuple(int(g) for g in gamma)
    return Configuration(gamma, Params(k, len(gamma), sum(gamma)))


def make_kpermutation(blocks: Sequence[Sequence[int]], k: int) -> KPermutation:
    sigma = tuple(tuple(sorted(int(c) for c in b)) for b in blocks)
    return KPermutation(sigma, Params(k, len(sigma)))


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def count_configurations(k: int, N: int, m: int) -> int:
    """Number of occupancy vectors in {0..k}^N with total m, by dynamic programming."""
    if m < 0 or m > k * N:
        return 0
    row = [1] + [0] * m
    for _ in range(N):
        new = [0] * (m + 1)
        for total in range(m + 1):
            if row[total]:
                for g in range(min(k, m - total) + 1):
                    new[total + g] += row[total]
        row = new
    return row[m]


def count_kpermutations(k: int, N: int) -> int:
    """|S_{k,N}| = (kN)! / (k!)^N."""
    return math.factorial(k * N) // math.factorial(k) ** N


def enumerate_configurations(params: Params) -> list:
    """Every occupancy vector with the given particle total, lexicographically.

    The order is ascending lexicographic on the tuple, so it is deterministic
    and states index generator rows reproducibly.
    """
    k, N = params.k, params.N
    m = params.require_m()
    out = []

    def extend(prefix: tuple, remaining: int, sites_left: int) -> None:
        if sites_left == 0:
            if remaining == 0:
                out.append(Configuration(prefix, params))
            return
        lo = max(0, remaining - k * (sites_left - 1))
        hi = min(k, remaining)
        for g in range(lo, hi + 1):
            extend(prefix + (g,), remaining - g, sites_left - 1)

    extend((), m, N)
    return out


def enumerate_kpermutations(
    k: int, N: int, max_states: int = DEFAULT_MAX_STATES
) -> list:
    """All decks of N packets over {1..kN}, lexicographic on the block sequence."""
    total = count_kpermutations(k, N)
    if total > max_states:
        raise EnumerationBudgetError(
            f"S_{{{k},{N}}} has {total} states, over the budget of {max_states}"
        )
    params = Params(k, N)
    cards = k * N
    out = []

    def extend(blocks: tuple, free: tuple) -> None:
        if not free:
            out.append(KPermutation(blocks, params))
            return
        # packets are ordered (packet 1 is distinct from packet 2), so every
        # k-subset of the free cards may open the next packet
        for choice in itertools.combinations(free, k):
            remaining = tuple(c for c in free if c not in choice)
            extend(blocks + (choice,), remaining)

    extend((), tuple(range(1, cards + 1)))
    return out


# ---------------------------------------------------------------------------
# stationary measures
# ---------------------------------------------------------------------------


def stationary_sep_measure(params: Params) -> np.ndarray:
    """Reversible law of the exclusion chain, aligned with enumerate_configurations.

    The weight of gamma is proportional to the product over sites of
    C(k, gamma(x)); the normaliser is C(Nk, m).
    """
    k = params.k
    states = enumerate_configurations(params)
    weights = np.array(
        [np.prod([math.comb(k, g) for g in c.gamma]) for c in states], dtype=float
    )
    total = math.comb(params.cards, params.require_m())
    mu = weights / total
    # the product weights sum to C(Nk, m) exactly (Vandermonde), so mu sums to 1
    return mu


def uniform_shuffle_measure(k: int, N: int) -> float:
    """Probability of a single deck under the uniform law on S_{k,N}."""
    return 1.0 / count_kpermutations(k, N)


# ---------------------------------------------------------------------------
# projections between the two spaces
# ---------------------------------------------------------------------------


def project_phi(sigma: KPermutation, m: int) -> Configuration:
    """Collapse a deck to an occupancy vector by counting cards with value <= m."""
    k, N = sigma.params.k, sigma.params.N
    if not 0 <= m <= k * N:
        raise InfeasibleStateError(f"m={m} outside [0, {k * N}]")
    gamma = tuple(sum(1 for c in block if c <= m) for block in sigma.sigma)
    return Configuration(gamma, Params(k, N, m))


def collapse_theta(pi: Sequence[int], k: int) -> KPermutation:
    """Collapse a permutation of {1..kN} (one-line form) into a deck of packets.

    Packet x collects the images of positions (x-1)k+1 .. xk.
    """
    pi = tuple(int(v) for v in pi)
    if len(pi) % k != 0:
        raise InfeasibleStateError(f"domain size {len(pi)} is not a multiple of k={k}")
    N = len(pi) // k
    if sorted(pi) != list(range(1, len(pi) + 1)):
        raise InfeasibleStateError("input is not a permutation of 1..kN")
    blocks = tuple(
        tuple(sorted(pi[(x - 1) * k : x * k])) for x in range(1, N + 1)
    )
    return KPermutation(blocks, Params(k, N))


# ---------------------------------------------------------------------------
# extremal states
# ---------------------------------------------------------------------------


def extremal_states(params: Params) -> tuple:
    """(top, bottom): particles pushed fully left and fully right.

    The left-packed state dominates every other state in the height order and
    the right-packed state is dominated by every other state.
    """
    k, N = params.k, params.N
    m = params.require_m()
    q, r = divmod(m, k)
    top = tuple([k] * q + ([r] if r else []) + [0] * (N - q - (1 if r else 0)))
    bottom = tuple(reversed(top))
    return Configuration(top, params), Configuration(bottom, params)


def top_shuffle(k: int, N: int) -> KPermutation:
    """The maximal deck: packet x holds cards (x-1)k+1 .. xk."""
    blocks = tuple(tuple(range((x - 1) * k + 1, x * k + 1)) for x in range(1, N + 1))
    return KPermutation(blocks, Params(k, N))


# ---------------------------------------------------------------------------
# compact text form
# ---------------------------------------------------------------------------

_CONF_RE = re.compile(r"^k=(\d+)\s+N=(\d+)\s+m=(\d+)\s*:\s*(.*)$")
_PERM_RE = re.compile(r"^k=(\d+)\s+N=(\d+)\s*:\s*(.*)$")


def format_configuration(c: Configuration) -> str:
    p = c.params
    body = " ".join(str(g) for g in c.gamma)
    return f"k={p.k} N={p.N} m={p.require_m()} : {body}"


def parse_configuration(text: str) -> Configuration:
    mo = _CONF_RE.match(text.strip())
    if not mo:
        raise ValueError(f"not a configuration line: {text!r}")
    k, N, m = int(mo.group(1)), int(mo.group(2)), int(mo.group(3))
    gamma = tuple(int(tok) for tok in mo.group(4).split())
    return Configuration(gamma, Params(k, N, m))


def format_kpermutation(s: KPermutation) -> str:
    p = s.params
    body = "|".join("{" + ",".join(str(c) for c in b) + "}" for b in s.sigma)
    return f"k={p.k} N={p.N} : {body}"


def parse_kpermutation(text: str) -> KPermutation:
    mo = _PERM_RE.match(text.strip())
    if not mo:
        raise ValueError(f"not a k-permutation line: {text!r}")
    k, N = int(mo.group(1)), int(mo.group(2))
    blocks = []
    for tok in mo.group(3).split("|"):
        tok = tok.strip()
        if not (tok.startswith("{") and tok.endswith("}")):
            raise ValueError(f"malformed packet {tok!r}")
        blocks.append(tuple(int(v) for v in tok[1:-1].split(",")))
    return KPermutation(tuple(tuple(sorted(b)) for b in blocks), Params(k, N))


@lru_cache(maxsize=32)
def _cached_shuffle_space(k: int, N: int, max_states: int):
    states = enumerate_kpermutations(k, N, max_states=max_states)
    index = {s.sigma: i for i, s in enumerate(states)}
    return states, index


def shuffle_space(k: int, N: int, max_states: int = DEFAULT_MAX_STATES):
    """Enumerated S_{k,N} plus a sigma -> row index map (cached)."""
    return _cached_shuffle_space(k, N, max_states)


@lru_cache(maxsize=64)
def _cached_sep_space(k: int, N: int, m: int):
    params = Params(k, N, m)
    states = enumerate_configurations(params)
    index = {c.gamma: i for i, c in enumerate(states)}
    return states, index


def sep_space(params: Params):
    """Enumerated occupancy vectors plus a gamma -> row index map (cached)."""
    return _cached_sep_space(params.k, params.N, params.require_m())
