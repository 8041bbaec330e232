"""Compiled event loops for the coupled dynamics.

Randomness comes from per-replica SplitMix64 streams, so every run is
replayable from (seed, replica index) and ensemble results do not depend on
thread count.  Exclusion states are carried as cumulative particle counts
``s[x] = sum_{z<=x} gamma(z)`` (so the height order is the pointwise order on
``s``), decks as row-sorted card arrays of shape (N, k).

Ring generation uses one master Poisson stream per run.  For the paired
exclusion dynamics each (bond, level, direction) clock must ring at rate k^2,
with the two trajectories sharing a clock exactly when they share a level;
rings are drawn at the maximal rate and thinned: a ring addressed to the lower
slot is discarded when both trajectories sit on the same level.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_MASK = U64(0xFFFFFFFFFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

STATUS_OK = 0
STATUS_BUDGET = 1


@njit(inline="always", cache=True)
def _mix64(z):
    z = U64((z ^ (z >> U64(30))) * _MIX1)
    z = U64((z ^ (z >> U64(27))) * _MIX2)
    return U64(z ^ (z >> U64(31)))


@njit(inline="always", cache=True)
def stream_seed(master, idx):
    return _mix64(U64(master) ^ _mix64(U64(idx + 1) * _GOLDEN))


@njit(inline="always", cache=True)
def _next_u64(st):
    st = U64(st + _GOLDEN)
    return st, _mix64(st)


@njit(inline="always", cache=True)
def _next_unit(st):
    """Uniform in [0, 1)."""
    st, z = _next_u64(st)
    return st, (z >> U64(11)) * _INV53


@njit(inline="always", cache=True)
def _next_exp(st):
    """Standard exponential (uses a uniform in (0, 1])."""
    st, z = _next_u64(st)
    return st, -math.log(((z >> U64(11)) + U64(1)) * _INV53)


@njit(inline="always", cache=True)
def _next_below(st, n):
    """Unbiased integer in [0, n)."""
    nn = U64(n)
    lim = U64((_MASK // nn) * nn)
    while True:
        st, z = _next_u64(st)
        if z < lim:
            return st, np.int64(z % nn)


# ---------------------------------------------------------------------------
# paired exclusion dynamics on cumulative-count states
# ---------------------------------------------------------------------------


@njit(inline="always", cache=True)
def _pair_record(s_top, s_bot, k, si, rec_area, rec_bsize, rec_d, rec_u):
    N = s_top.shape[0] - 1
    area = 0
    for x in range(1, N):
        area += s_top[x] - s_bot[x]
    bsize = 0
    d = 0
    u = 0
    for x in range(1, N):
        active = False
        for y in range(x - 1, x + 2):
            if s_top[y] > s_bot[y]:
                active = True
                break
        if active:
            bsize += 1
            at = s_top[x] - s_top[x - 1]
            bt = s_top[x + 1] - s_top[x]
            ab = s_bot[x] - s_bot[x - 1]
            bb = s_bot[x + 1] - s_bot[x]
            d += at * (k - bt) + bb * (k - ab)
            u += bt * (k - at) + ab * (k - bb)
    rec_area[si] = area
    rec_bsize[si] = bsize
    rec_d[si] = d
    rec_u[si] = u


@njit(cache=True)
def sep_pair_run(
    s_top,
    s_bot,
    k,
    horizon,
    seed,
    sample_times,
    rec_area,
    rec_bsize,
    rec_d,
    rec_u,
    snap_top,
    snap_bot,
    want_snaps,
    max_events,
):
    """Evolve an ordered pair of exclusion states under the shared-clock coupling.

    Every bond carries one clock pair for the top trajectory's level; bonds
    where the levels differ carry a second clock pair for the bottom level.
    The instantaneous ring rate is therefore 2 k^2 (#bonds + #disagreements),
    and a ring on a shared level drives both trajectories with one uniform.

    Returns (status, coalescence_time, rings, applied).  The pair glues when
    the area between the heights hits zero and never separates, so once the
    area vanishes and no snapshots are pending the loop stops early; records
    past that point are exact zeros.
    """
    N = s_top.shape[0] - 1
    n_bonds = N - 1
    kk = float(k * k)
    base_rate = 2.0 * kk
    st = U64(seed)
    area = 0
    for x in range(1, N):
        area += s_top[x] - s_bot[x]
    coal = 0.0 if area == 0 else math.inf
    # indexable set of bonds whose levels disagree
    dis_list = np.empty(n_bonds, np.int64)
    dis_where = np.full(N + 1, -1, np.int64)
    n_dis = 0
    for x in range(1, N):
        if s_top[x] != s_bot[x]:
            dis_list[n_dis] = x
            dis_where[x] = n_dis
            n_dis += 1
    t = 0.0
    si = 0
    n_s = sample_times.shape[0]
    rings = 0
    applied = 0
    while True:
        st, e = _next_exp(st)
        t_next = t + e / (base_rate * (n_bonds + n_dis))
        while si < n_s and sample_times[si] < t_next:
            _pair_record(s_top, s_bot, k, si, rec_area, rec_bsize, rec_d, rec_u)
            if want_snaps:
                for x in range(N + 1):
                    snap_top[si, x] = s_top[x]
                    snap_bot[si, x] = s_bot[x]
            si += 1
        if t_next > horizon:
            break
        if area == 0 and not want_snaps:
            if si >= n_s:
                break
            # glued: every pending record is zero
            while si < n_s:
                rec_area[si] = 0
                rec_bsize[si] = 0
                rec_d[si] = 0
                rec_u[si] = 0
                si += 1
            break
        if rings >= max_events:
            return STATUS_BUDGET, coal, rings, applied
        rings += 1
        t = t_next
        st, z = _next_u64(st)
        up = (z >> U64(63)) == U64(0)
        idx = np.int64(z % U64(n_bonds + n_dis))
        st, u = _next_unit(st)
        moved = False
        if idx < n_bonds:
            x = idx + 1
            zt = s_top[x]
            if zt == s_bot[x]:
                # shared level: one clock drives both with the same uniform
                at = zt - s_top[x - 1]
                bt = s_top[x + 1] - zt
                ab = zt - s_bot[x - 1]
                bb = s_bot[x + 1] - zt
                if up:
                    mt = 1 if u * kk < bt * (k - at) else 0
                    mb = 1 if u * kk < bb * (k - ab) else 0
                else:
                    mt = -1 if u * kk < at * (k - bt) else 0
                    mb = -1 if u * kk < ab * (k - bb) else 0
                if mt != 0:
                    s_top[x] += mt
                    applied += 1
                if mb != 0:
                    s_bot[x] += mb
                    applied += 1
                area += mt - mb
                moved = mt != 0 or mb != 0
            else:
                # differing levels: the per-bond clock addresses the top level
                a = zt - s_top[x - 1]
                b = s_top[x + 1] - zt
                if up:
                    if u * kk < b * (k - a):
                        s_top[x] += 1
                        area += 1
                        applied += 1
                        moved = True
                else:
                    if u * kk < a * (k - b):
                        s_top[x] -= 1
                        area -= 1
                        applied += 1
                        moved = True
        else:
            # extra clock of a disagreeing bond: addresses the bottom level
            x = dis_list[idx - n_bonds]
            zb = s_bot[x]
            a = zb - s_bot[x - 1]
            b = s_bot[x + 1] - zb
            if up:
                if u * kk < b * (k - a):
                    s_bot[x] += 1
                    area -= 1
                    applied += 1
                    moved = True
            else:
                if u * kk < a * (k - b):
                    s_bot[x] -= 1
                    area += 1
                    applied += 1
                    moved = True
        if moved:
            now_dis = s_top[x] != s_bot[x]
            if now_dis and dis_where[x] < 0:
                dis_list[n_dis] = x
                dis_where[x] = n_dis
                n_dis += 1
            elif not now_dis and dis_where[x] >= 0:
                slot = dis_where[x]
                last = dis_list[n_dis - 1]
                dis_list[slot] = last
                dis_where[last] = slot
                dis_where[x] = -1
                n_dis -= 1
            if area == 0 and coal == math.inf:
                coal = t
    return STATUS_OK, coal, rings, applied


@njit(cache=True, parallel=True)
def sep_pair_ensemble(
    s_top0,
    s_bot0,
    k,
    horizon,
    master_seed,
    n_runs,
    sample_times,
    max_events,
):
    """Independent replicas of the paired dynamics.

    Returns (status, coal_times, rings, applied, rec_area, rec_bsize, rec_d,
    rec_u); the record arrays have shape (n_runs, len(sample_times)).
    """
    N = s_top0.shape[0] - 1
    n_s = sample_times.shape[0]
    coal = np.empty(n_runs, np.float64)
    rings = np.zeros(n_runs, np.int64)
    applied = np.zeros(n_runs, np.int64)
    status = np.zeros(n_runs, np.int64)
    rec_area = np.zeros((n_runs, n_s), np.int64)
    rec_bsize = np.zeros((n_runs, n_s), np.int64)
    rec_d = np.zeros((n_runs, n_s), np.int64)
    rec_u = np.zeros((n_runs, n_s), np.int64)
    dummy = np.zeros((0, N + 1), np.int64)
    for r in prange(n_runs):
        top = s_top0.copy()
        bot = s_bot0.copy()
        seed_r = stream_seed(master_seed, r)
        stt, c, ri, ap = sep_pair_run(
            top,
            bot,
            k,
            horizon,
            seed_r,
            sample_times,
            rec_area[r],
            rec_bsize[r],
            rec_d[r],
            rec_u[r],
            dummy,
            dummy,
            False,
            max_events,
        )
        status[r] = stt
        coal[r] = c
        rings[r] = ri
        applied[r] = ap
    return status, coal, rings, applied, rec_area, rec_bsize, rec_d, rec_u


@njit(cache=True, parallel=True)
def sep_final_ensemble(s0, k, horizon, master_seed, n_runs, max_events):
    """Final cumulative-count states of single exclusion trajectories.

    A single trajectory is the glued pair, which shares every ring and stays
    glued, so its marginal law is the plain exclusion dynamics.
    """
    N = s0.shape[0] - 1
    finals = np.empty((n_runs, N + 1), np.int64)
    status = np.zeros(n_runs, np.int64)
    empty_t = np.zeros(0, np.float64)
    empty_i = np.zeros((1, 0), np.int64)
    dummy = np.zeros((0, N + 1), np.int64)
    for r in prange(n_runs):
        top = s0.copy()
        bot = s0.copy()
        seed_r = stream_seed(master_seed, r)
        stt, _c, _ri, _ap = sep_pair_run(
            top,
            bot,
            k,
            horizon,
            seed_r,
            empty_t,
            empty_i[0],
            empty_i[0],
            empty_i[0],
            empty_i[0],
            dummy,
            dummy,
            True,
            max_events,
        )
        status[r] = stt
        finals[r] = top
    return status, finals


# ---------------------------------------------------------------------------
# grand-coupled deck dynamics
# ---------------------------------------------------------------------------


@njit(inline="always", cache=True)
def _reinsert(row, pos):
    """Bubble the freshly replaced entry of a sorted row back into place."""
    k = row.shape[0]
    p = pos
    while p > 0 and row[p - 1] > row[p]:
        row[p - 1], row[p] = row[p], row[p - 1]
        p -= 1
    while p < k - 1 and row[p] > row[p + 1]:
        row[p], row[p + 1] = row[p + 1], row[p]
        p += 1


@njit(cache=True)
def shuffle_family_run(
    blocks,
    horizon,
    seed,
    sched_starts,
    sched_mask,
    sample_times,
    snaps,
    want_snaps,
    log_t,
    log_mark,
    want_log,
    max_events,
):
    """Run every tracked deck through one shared stream of sort/unsort rings.

    ``blocks`` has shape (T, N, k) with each row ascending; rings are shared
    by all T decks (one grand coupling).  ``sched_mask[piece, bond, i, j]``
    permits the swap; pieces switch at ``sched_starts``.  Returns
    (status, rings, applied, logged).
    """
    T, N, k = blocks.shape
    n_bonds = N - 1
    total_rate = 2.0 * k * k * n_bonds
    inv_rate = 1.0 / total_rate
    st = U64(seed)
    t = 0.0
    si = 0
    n_s = sample_times.shape[0]
    piece = 0
    n_pieces = sched_starts.shape[0]
    rings = 0
    applied = 0
    logged = 0
    log_cap = log_t.shape[0]
    while True:
        st, e = _next_exp(st)
        t_next = t + e * inv_rate
        while si < n_s and sample_times[si] < t_next:
            if want_snaps:
                for tr in range(T):
                    for x in range(N):
                        for c in range(k):
                            snaps[si, tr, x, c] = blocks[tr, x, c]
            si += 1
        if t_next > horizon:
            break
        if rings >= max_events:
            return STATUS_BUDGET, rings, applied, logged
        rings += 1
        t = t_next
        while piece + 1 < n_pieces and sched_starts[piece + 1] <= t:
            piece += 1
        st, xb = _next_below(st, n_bonds)
        st, i = _next_below(st, k)
        st, j = _next_below(st, k)
        st, ub = _next_below(st, 2)
        permitted = sched_mask[piece, xb, i, j]
        moved_any = False
        if permitted:
            for tr in range(T):
                a = blocks[tr, xb, i]
                b = blocks[tr, xb + 1, j]
                if (ub == 1 and b < a) or (ub == 0 and b > a):
                    blocks[tr, xb, i] = b
                    _reinsert(blocks[tr, xb], i)
                    blocks[tr, xb + 1, j] = a
                    _reinsert(blocks[tr, xb + 1], j)
                    applied += 1
                    moved_any = True
        if want_log and logged < log_cap:
            log_t[logged] = t
            log_mark[logged, 0] = xb + 1
            log_mark[logged, 1] = i + 1
            log_mark[logged, 2] = j + 1
            log_mark[logged, 3] = ub
            log_mark[logged, 4] = 1 if permitted else 0
            log_mark[logged, 5] = 1 if moved_any else 0
            logged += 1
    return STATUS_OK, rings, applied, logged


@njit(cache=True, parallel=True)
def shuffle_final_ensemble(
    blocks0, horizon, master_seed, n_runs, sched_starts, sched_mask, max_events
):
    """Final decks of independent single-trajectory runs."""
    N, k = blocks0.shape
    finals = np.empty((n_runs, N, k), np.int64)
    status = np.zeros(n_runs, np.int64)
    empty_t = np.zeros(0, np.float64)
    snaps = np.zeros((0, 1, N, k), np.int64)
    log_t = np.zeros(0, np.float64)
    log_mark = np.zeros((0, 6), np.int64)
    for r in prange(n_runs):
        b = np.empty((1, N, k), np.int64)
        b[0] = blocks0
        seed_r = stream_seed(master_seed, r)
        stt, _ri, _ap, _lg = shuffle_family_run(
            b,
            horizon,
            seed_r,
            sched_starts,
            sched_mask,
            empty_t,
            snaps,
            False,
            log_t,
            log_mark,
            False,
            max_events,
        )
        status[r] = stt
        finals[r] = b[0]
    return status, finals
