"""Piecewise-constant censoring schedules for the shuffle dynamics.

A scheme is a right-continuous step function of time whose value is the set of
permitted swaps (x, i, j): bond x between packets x and x+1, rank i in the
left packet, rank j in the right.  A ring whose triple is not permitted at
that moment is skipped for every tracked state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .heights import skeleton_cuts
from .states import Params


def all_triples(k: int, N: int) -> frozenset:
    return frozenset(
        (x, i, j)
        for x in range(1, N)
        for i in range(1, k + 1)
        for j in range(1, k + 1)
    )


def triples_excluding_bonds(k: int, N: int, bonds) -> frozenset:
    blocked = set(bonds)
    return frozenset(t for t in all_triples(k, N) if t[0] not in blocked)


@dataclass(frozen=True)
class CensoringScheme:
    """Intervals [start_i, start_{i+1}) each carrying a permitted-swap set."""

    starts: tuple  # ascending, starts[0] == 0.0
    allowed: tuple  # same length; frozensets of (x, i, j)
    horizon: float
    k: int
    N: int

    def __post_init__(self) -> None:
        if not self.starts or self.starts[0] != 0.0:
            raise ValueError("intervals must start at time 0")
        if len(self.starts) != len(self.allowed):
            raise ValueError("each interval needs a permitted set")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise ValueError("interval starts must be strictly increasing")
        if self.horizon <= self.starts[-1]:
            raise ValueError("horizon must exceed the last interval start")
        universe = all_triples(self.k, self.N)
        for s in self.allowed:
            if not frozenset(s) <= universe:
                raise ValueError("permitted set contains an out-of-range swap")

    def at(self, t: float) -> frozenset:
        """Permitted set in force at time t (right-continuous)."""
        if t < 0 or t > self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        idx = 0
        for i, s in enumerate(self.starts):
            if s <= t:
                idx = i
        return self.allowed[idx]

    def pieces(self, until: float):
        """(start, end, permitted) covering [0, until]."""
        if until > self.horizon:
            raise ValueError(f"horizon {self.horizon} too short for t={until}")
        out = []
        for i, s in enumerate(self.starts):
            end = self.starts[i + 1] if i + 1 < len(self.starts) else self.horizon
            lo, hi = s, min(end, until)
            if hi > lo:
                out.append((lo, hi, self.allowed[i]))
            if end >= until:
                break
        return out

    def describe(self) -> list:
        """JSON-friendly description for run manifests."""
        full = len(all_triples(self.k, self.N))
        return [
            {
                "start": s,
                "permitted_swaps": len(a),
                "censored_swaps": full - len(a),
            }
            for s, a in zip(self.starts, self.allowed)
        ]


def permit_all(k: int, N: int, horizon: float) -> CensoringScheme:
    return CensoringScheme((0.0,), (all_triples(k, N),), horizon, k, N)


def permit_none(k: int, N: int, horizon: float) -> CensoringScheme:
    return CensoringScheme((0.0,), (frozenset(),), horizon, k, N)


def censor_bonds(k: int, N: int, bonds, horizon: float) -> CensoringScheme:
    """Block every swap across the listed bonds for the whole horizon."""
    return CensoringScheme(
        (0.0,), (triples_excluding_bonds(k, N, bonds),), horizon, k, N
    )


def three_phase_schedule(params: Params, delta: float) -> CensoringScheme:
    """Censor the cut bonds, release, censor again.

    With R = ceil(1/delta) the bonds at the position cuts x_1 .. x_{R-1} are
    blocked on [0, t1), everything runs on [t1, t2), and the cut bonds are
    blocked again on [t2, t3), where
    t1 = (delta/3) * N^2 log(kN) / (2 k pi^2),
    t2 = (1 + 2 delta/3) * same scale, and t3 = (1 + delta) * same scale.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    k, N = params.k, params.N
    R = math.ceil(1 / delta)
    scale = N * N * math.log(k * N) / (2 * k * math.pi**2)
    t1 = (delta / 3) * scale
    t2 = (1 + 2 * delta / 3) * scale
    t3 = (1 + delta) * scale
    xs, _ = skeleton_cuts(k, N, R)
    cut_bonds = sorted({x for x in xs[1:-1] if 1 <= x <= N - 1})
    censored = triples_excluding_bonds(k, N, cut_bonds)
    everything = all_triples(k, N)
    if not cut_bonds:
        return CensoringScheme((0.0,), (everything,), t3, k, N)
    return CensoringScheme(
        (0.0, t1, t2), (censored, everything, censored), t3, k, N
    )
