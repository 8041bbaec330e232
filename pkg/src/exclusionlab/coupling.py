"""Seeded simulation of the coupled dynamics, at scales beyond enumeration.

All randomness flows from one master seed through per-replica SplitMix64
streams, so every result is replayable and independent of thread count.  The
deck dynamics drive any number of initial states through one shared ring
stream (the grand coupling); the exclusion dynamics drive an ordered pair
through shared level clocks, which is what the coalescence bound needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .censoring import CensoringScheme, permit_all, three_phase_schedule  # noqa: F401
from .heights import HeightFunctionSEP, compare_order, Order, scaled_sep_heights
from .states import Configuration, KPermutation, Params

DEFAULT_MAX_EVENTS = 1_000_000

_MASK63 = (1 << 63) - 1
_MASK64 = (1 << 64) - 1


def derive_seed(master: int, idx: int) -> int:
    """Python-side SplitMix64 stream derivation, kept in int64 range."""
    z = (master ^ ((idx + 1) * 0x9E3779B97F4A7C15)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK63


class SimulationBudgetError(RuntimeError):
    """A replica exceeded its ring budget before reaching the horizon."""


def _check_status(status) -> None:
    if np.any(np.asarray(status) == kernels.STATUS_BUDGET):
        raise SimulationBudgetError(
            "event budget exhausted; raise max_events or shorten the horizon"
        )


def _scheme_arrays(scheme: Optional[CensoringScheme], k: int, N: int, horizon: float):
    if scheme is None:
        scheme = permit_all(k, N, horizon * (1 + 1e-9) + 1e-9)
    if (scheme.k, scheme.N) != (k, N):
        raise ValueError("censoring scheme built for different parameters")
    if scheme.horizon < horizon:
        raise ValueError("censoring scheme horizon too short")
    starts = np.asarray(scheme.starts, dtype=float)
    mask = np.zeros((len(scheme.starts), N - 1, k, k), dtype=np.bool_)
    for p, permitted in enumerate(scheme.allowed):
        for (x, i, j) in permitted:
            mask[p, x - 1, i - 1, j - 1] = True
    return starts, mask


def _sample_array(sample_times, horizon: float) -> np.ndarray:
    if sample_times is None:
        return np.zeros(0, dtype=float)
    ts = np.asarray(sample_times, dtype=float)
    if ts.ndim != 1 or (len(ts) and (np.any(np.diff(ts) <= 0) or ts[0] < 0)):
        raise ValueError("sample times must be strictly increasing and nonnegative")
    if len(ts) and ts[-1] > horizon:
        raise ValueError("sample times must not exceed the horizon")
    return ts


@dataclass
class EventStream:
    """Replayable record of one run's rings (kept only when requested)."""

    seed: int
    horizon: float
    times: np.ndarray  # ring times
    marks: np.ndarray  # columns: bond x, i, j, sort bit, permitted, applied


@dataclass
class CoupledTrajectory:
    """States driven by one ring stream, observed at the requested times."""

    initials: list
    finals: list
    sample_times: np.ndarray
    samples: list  # samples[si] = list of states, one per tracked initial
    rings: int
    applied: int
    events: Optional[EventStream] = None
    raw_samples: Optional[np.ndarray] = None  # kernel-level snapshots
    coalescence_time: Optional[float] = None  # pair runs only
    kernel_records: Optional[dict] = None  # pair runs: incremental area stats


# ---------------------------------------------------------------------------
# deck dynamics
# ---------------------------------------------------------------------------


def _blocks_of(s: KPermutation) -> np.ndarray:
    return np.array(s.sigma, dtype=np.int64)


def _deck_of(blocks: np.ndarray, params: Params) -> KPermutation:
    return KPermutation(tuple(tuple(int(c) for c in row) for row in blocks), params)


def simulate_shuffle_grand_coupling(
    initials: Sequence[KPermutation],
    horizon: float,
    seed: int,
    scheme: Optional[CensoringScheme] = None,
    sample_times=None,
    record_events: bool = False,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> CoupledTrajectory:
    """Drive every initial deck through one shared stream of sort/unsort rings.

    Each bond carries k^2 rate-2 clocks; a ring sorts or reverse-sorts the
    addressed card pair according to its fair coin, simultaneously in every
    tracked deck, unless the scheme censors the triple at that moment.
    """
    if not initials:
        raise ValueError("need at least one initial deck")
    params = initials[0].params
    if any(s.params != params for s in initials):
        raise ValueError("initial decks must share parameters")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    k, N = params.k, params.N
    starts, mask = _scheme_arrays(scheme, k, N, horizon)
    ts = _sample_array(sample_times, horizon)
    T = len(initials)
    blocks = np.stack([_blocks_of(s) for s in initials])
    snaps = np.zeros((len(ts), T, N, k), dtype=np.int64)
    log_cap = 0
    if record_events:
        mean_rings = 2.0 * k * k * (N - 1) * horizon
        log_cap = int(mean_rings + 10.0 * math.sqrt(mean_rings) + 100)
    log_t = np.zeros(log_cap, dtype=float)
    log_mark = np.zeros((log_cap, 6), dtype=np.int64)
    run_seed = derive_seed(int(seed) & _MASK63, 0)
    status, rings, applied, logged = kernels.shuffle_family_run(
        blocks,
        float(horizon),
        run_seed,
        starts,
        mask,
        ts,
        snaps,
        len(ts) > 0,
        log_t,
        log_mark,
        record_events,
        int(max_events),
    )
    _check_status([status])
    samples = [
        [_deck_of(snaps[si, tr], params) for tr in range(T)] for si in range(len(ts))
    ]
    events = None
    if record_events:
        events = EventStream(seed, horizon, log_t[:logged].copy(), log_mark[:logged].copy())
    return CoupledTrajectory(
        initials=list(initials),
        finals=[_deck_of(blocks[tr], params) for tr in range(T)],
        sample_times=ts,
        samples=samples,
        rings=int(rings),
        applied=int(applied),
        events=events,
        raw_samples=snaps if len(ts) else None,
    )


def deck_prefix_counts(blocks: np.ndarray) -> np.ndarray:
    """Cumulative card-prefix counts of deck arrays: (..., N+1, kN+1).

    Entry (x, y) counts cards <= y among the first x packets; comparing two
    decks pointwise through these tables is the height order.
    """
    arr = np.asarray(blocks)
    N, k = arr.shape[-2], arr.shape[-1]
    cards = N * k
    flat = arr.reshape(-1, N, k)
    B = flat.shape[0]
    occ = np.zeros((B, N, cards + 1), dtype=np.int64)
    b_idx = np.arange(B)[:, None, None]
    x_idx = np.arange(N)[None, :, None]
    occ[b_idx, x_idx, flat] = 1
    cum = occ.cumsum(axis=2).cumsum(axis=1)
    out = np.zeros((B, N + 1, cards + 1), dtype=np.int64)
    out[:, 1:, :] = cum
    return out.reshape(arr.shape[:-2] + (N + 1, cards + 1))


def simulate_sep_coupling(
    initials: Sequence[Configuration],
    horizon: float,
    seed: int,
    sample_times=None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> CoupledTrajectory:
    """Drive one configuration, or an ordered pair, through shared level clocks.

    For a pair the first initial must dominate the second in the height
    order; the two trajectories share a clock exactly when their heights
    agree at a bond, which preserves the order pathwise.
    """
    if len(initials) not in (1, 2):
        raise ValueError("exclusion coupling tracks one state or an ordered pair")
    params = initials[0].params
    if any(c.params != params for c in initials):
        raise ValueError("initial states must share parameters")
    if len(initials) == 2:
        if compare_order(initials[0], initials[1]) not in (Order.GEQ, Order.EQ):
            raise ValueError("pass the dominating state first")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    k, N = params.k, params.N
    ts = _sample_array(sample_times, horizon)
    top_c = initials[0]
    bot_c = initials[1] if len(initials) == 2 else initials[0]
    s_top = _cumulative(top_c)
    s_bot = _cumulative(bot_c)
    n_s = len(ts)
    rec_area = np.zeros(n_s, dtype=np.int64)
    rec_bsize = np.zeros(n_s, dtype=np.int64)
    rec_d = np.zeros(n_s, dtype=np.int64)
    rec_u = np.zeros(n_s, dtype=np.int64)
    snap_top = np.zeros((n_s, N + 1), dtype=np.int64)
    snap_bot = np.zeros((n_s, N + 1), dtype=np.int64)
    run_seed = derive_seed(int(seed) & _MASK63, 0)
    status, coal, rings, applied = kernels.sep_pair_run(
        s_top,
        s_bot,
        params.k,
        float(horizon),
        run_seed,
        ts,
        rec_area,
        rec_bsize,
        rec_d,
        rec_u,
        snap_top,
        snap_bot,
        True,
        int(max_events),
    )
    _check_status([status])
    samples = []
    for si in range(n_s):
        row = [_config_of(snap_top[si], params)]
        if len(initials) == 2:
            row.append(_config_of(snap_bot[si], params))
        samples.append(row)
    finals = [_config_of(s_top, params)]
    if len(initials) == 2:
        finals.append(_config_of(s_bot, params))
    return CoupledTrajectory(
        initials=list(initials),
        finals=finals,
        sample_times=ts,
        samples=samples,
        rings=int(rings),
        applied=int(applied),
        raw_samples=np.stack([snap_top, snap_bot]) if n_s else None,
        coalescence_time=float(coal),
        kernel_records={
            "area": rec_area,
            "active": rec_bsize,
            "down_rate": rec_d,
            "up_rate": rec_u,
        },
    )


def _cumulative(c: Configuration) -> np.ndarray:
    return np.concatenate(
        ([0], np.cumsum(np.asarray(c.gamma, dtype=np.int64)))
    ).astype(np.int64)


def _config_of(s: np.ndarray, params: Params) -> Configuration:
    gamma = tuple(int(v) for v in np.diff(s))
    return Configuration(gamma, params)


# ---------------------------------------------------------------------------
# coalescence of the extremal pair
# ---------------------------------------------------------------------------


def wilson_ci(successes: int, n: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class CoalescenceResult:
    """Per-replica meet times of the extremal pair, inf when past the horizon."""

    params: Params
    horizon: float
    seed: int
    times: np.ndarray

    @property
    def n_runs(self) -> int:
        return len(self.times)

    def survival(self, ts, z: float = 1.96):
        """(p_hat, lo, hi) of P(pair apart at t) at each requested time."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any(ts > self.horizon):
            raise ValueError("survival is only observed up to the horizon")
        out = np.empty((len(ts), 3))
        for r, t in enumerate(ts):
            alive = int((self.times > t).sum())
            lo, hi = wilson_ci(alive, self.n_runs, z)
            out[r] = (alive / self.n_runs, lo, hi)
        return out

    def quantile(self, level: float, z: float = 1.96) -> tuple:
        """(point, lo, hi) for the level-quantile of the meet time.

        The confidence range comes from binomial order statistics; fails if
        the needed order statistic is censored at the horizon.
        """
        times = np.sort(self.times)
        n = len(times)
        point_rank = min(n - 1, max(0, int(math.ceil(level * n)) - 1))
        spread = z * math.sqrt(n * level * (1 - level))
        lo_rank = max(0, int(math.floor(level * n - spread)))
        hi_rank = min(n - 1, int(math.ceil(level * n + spread)))
        point, lo, hi = times[point_rank], times[lo_rank], times[hi_rank]
        if not np.isfinite(hi):
            raise ValueError(
                f"quantile {level} not resolved by horizon {self.horizon}"
            )
        return float(point), float(lo), float(hi)

    def mixing_time_estimate(self, eps: float, z: float = 1.96) -> tuple:
        """Survival-threshold crossing: the (1-eps)-quantile of the meet time."""
        return self.quantile(1.0 - eps, z)


def coalescence_estimate(
    params: Params,
    horizon: float,
    n_runs: int,
    seed: int,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> CoalescenceResult:
    """Seeded replicas of the extremal pair, reporting when each pair met."""
    from .states import extremal_states

    if n_runs < 1:
        raise ValueError("need at least one replica")
    top, bot = extremal_states(params)
    status, coal, rings, applied, *_ = kernels.sep_pair_ensemble(
        _cumulative(top),
        _cumulative(bot),
        params.k,
        float(horizon),
        int(seed) & _MASK63,
        int(n_runs),
        np.zeros(0, dtype=float),
        int(max_events),
    )
    _check_status(status)
    return CoalescenceResult(params, horizon, seed, coal)


# ---------------------------------------------------------------------------
# area process of the extremal pair
# ---------------------------------------------------------------------------


@dataclass
class AreaRecord:
    """Direct scan of the gap between the paired heights at one instant."""

    t: float
    area: int
    active: tuple  # bonds with a strict gap within distance one
    top_counts: dict  # (a, b) -> number of active bonds with those occupancies, top
    bot_counts: dict
    down_rate: int
    up_rate: int


def area_record_from_states(
    t: float, top: Configuration, bot: Configuration
) -> AreaRecord:
    """Scan two configurations for the gap, active bonds, and drift rates."""
    params = top.params
    k, N = params.k, params.N
    s_top = _cumulative(top)
    s_bot = _cumulative(bot)
    diff = s_top - s_bot
    if np.any(diff < 0):
        raise ValueError("area records need an ordered pair, top first")
    area = int(diff[1:N].sum())
    active = []
    top_counts: dict = {}
    bot_counts: dict = {}
    down = 0
    up = 0
    for x in range(1, N):
        if any(diff[y] > 0 for y in (x - 1, x, x + 1)):
            active.append(x)
            at, bt = top.gamma[x - 1], top.gamma[x]
            ab, bb = bot.gamma[x - 1], bot.gamma[x]
            top_counts[(at, bt)] = top_counts.get((at, bt), 0) + 1
            bot_counts[(ab, bb)] = bot_counts.get((ab, bb), 0) + 1
            down += at * (k - bt) + bb * (k - ab)
            up += bt * (k - at) + ab * (k - bb)
    return AreaRecord(t, area, tuple(active), top_counts, bot_counts, down, up)


def area_process(trajectory: CoupledTrajectory) -> list:
    """AreaRecords at the trajectory's sample times, recomputed by direct scan.

    The trajectory must track the dominating state first; the scan is
    independent of the kernel's incremental bookkeeping, so agreement between
    the two is a real consistency check.
    """
    if len(trajectory.initials) != 2:
        raise ValueError("the area process needs the extremal pair")
    records = []
    for t, (top, bot) in zip(trajectory.sample_times, trajectory.samples):
        records.append(area_record_from_states(float(t), top, bot))
    return records


@dataclass
class AreaEnsemble:
    """Kernel-recorded area statistics across replicas at shared sample times."""

    params: Params
    sample_times: np.ndarray
    area: np.ndarray  # (n_runs, n_samples)
    active: np.ndarray
    down_rate: np.ndarray
    up_rate: np.ndarray
    seed: int

    def mean_area(self):
        """(mean, stderr) of the area at each sample time."""
        mean = self.area.mean(axis=0)
        stderr = self.area.std(axis=0, ddof=1) / math.sqrt(self.area.shape[0])
        return mean, stderr

    def paired_increments(self):
        """(mean, stderr) of per-replica area increments between sample times."""
        inc = np.diff(self.area, axis=1)
        mean = inc.mean(axis=0)
        stderr = inc.std(axis=0, ddof=1) / math.sqrt(inc.shape[0])
        return mean, stderr


def area_trace_ensemble(
    params: Params,
    sample_times,
    n_runs: int,
    seed: int,
    horizon: Optional[float] = None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> AreaEnsemble:
    """Replicated extremal-pair runs recording (area, active, d, u) at each time."""
    from .states import extremal_states

    ts = np.asarray(sample_times, dtype=float)
    if horizon is None:
        horizon = float(ts[-1]) * (1 + 1e-12) + 1e-9
    ts = _sample_array(ts, horizon)
    top, bot = extremal_states(params)
    status, coal, rings, applied, rec_a, rec_b, rec_d, rec_u = kernels.sep_pair_ensemble(
        _cumulative(top),
        _cumulative(bot),
        params.k,
        float(horizon),
        int(seed) & _MASK63,
        int(n_runs),
        ts,
        int(max_events),
    )
    _check_status(status)
    return AreaEnsemble(params, ts, rec_a, rec_b, rec_d, rec_u, seed)


# ---------------------------------------------------------------------------
# bad configurations for the drift argument
# ---------------------------------------------------------------------------


def bad_configuration_flags(state, params: Optional[Params] = None) -> tuple:
    """(tall_excursion, flat_run) membership of one state.

    ``tall_excursion``: some |height| reaches sqrt(m) log m.  ``flat_run``:
    some full window of length 2 (N/m) (log m)^2 is entirely empty or
    entirely at capacity; windows that do not fit in the segment never
    qualify.  Needs m >= 2 so that log m > 0.
    """
    if isinstance(state, HeightFunctionSEP):
        params = state.params
        eta = np.asarray(state.scaled, dtype=float) / params.N
        gamma = np.diff(np.asarray(state.scaled)) / params.N + params.require_m() / params.N
        gamma = np.rint(gamma).astype(int)
    elif isinstance(state, Configuration):
        params = state.params
        eta = scaled_sep_heights(state) / params.N
        gamma = np.asarray(state.gamma)
    else:
        raise TypeError("expected a configuration or its height function")
    m = params.require_m()
    if m < 2:
        raise ValueError("the bad-set thresholds need m >= 2")
    k, N = params.k, params.N
    log_m = math.log(m)
    tall = bool(np.abs(eta).max() >= math.sqrt(m) * log_m)
    span = 2.0 * (N / m) * log_m * log_m
    flat = False
    if span <= N - 1:
        width = int(math.floor(span)) + 1  # sites x .. x + span
        for x in range(1, N - width + 2):
            window = gamma[x - 1 : x - 1 + width]
            if np.all(window == 0) or np.all(window == k):
                flat = True
                break
    return tall, flat


# ---------------------------------------------------------------------------
# Monte Carlo mean heights
# ---------------------------------------------------------------------------


def mc_mean_height(
    start,
    x: int,
    t: float,
    n_runs: int,
    seed: int,
    y: Optional[int] = None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> tuple:
    """(mean, stderr) of the height at x (deck start: at (x, y)) at time t."""
    if n_runs < 2:
        raise ValueError("need at least two replicas for a standard error")
    if t < 0:
        raise ValueError("time must be nonnegative")
    params = start.params
    k, N = params.k, params.N
    if isinstance(start, KPermutation):
        if y is None:
            raise ValueError("deck starts need the card cut y")
        if t == 0.0:
            h0 = float(np.sum([sum(1 for c in b if c <= y) for b in start.sigma[:x]]))
            return h0 - x * y / N, 0.0
        starts_arr = np.zeros(1, dtype=float)
        mask = np.ones((1, N - 1, k, k), dtype=np.bool_)
        status, finals = kernels.shuffle_final_ensemble(
            _blocks_of(start),
            float(t),
            int(seed) & _MASK63,
            int(n_runs),
            starts_arr,
            mask,
            int(max_events),
        )
        _check_status(status)
        prefix = (finals[:, :x, :] <= y).sum(axis=(1, 2))
        values = prefix - x * y / N
    elif isinstance(start, Configuration):
        if t == 0.0:
            return float(scaled_sep_heights(start)[x]) / N, 0.0
        status, finals = kernels.sep_final_ensemble(
            _cumulative(start),
            params.k,
            float(t),
            int(seed) & _MASK63,
            int(n_runs),
            int(max_events),
        )
        _check_status(status)
        m = params.require_m()
        values = finals[:, x] - x * m / N
    else:
        raise TypeError("start must be a deck or a configuration")
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n_runs))
    return mean, stderr


def shuffle_final_ensemble_decks(
    start: KPermutation,
    t: float,
    n_runs: int,
    seed: int,
    scheme: Optional[CensoringScheme] = None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> np.ndarray:
    """Final deck arrays (n_runs, N, k) of independent runs from one deck."""
    params = start.params
    k, N = params.k, params.N
    starts_arr, mask = _scheme_arrays(scheme, k, N, t)
    status, finals = kernels.shuffle_final_ensemble(
        _blocks_of(start),
        float(t),
        int(seed) & _MASK63,
        int(n_runs),
        starts_arr,
        mask,
        int(max_events),
    )
    _check_status(status)
    return finals


def sep_final_ensemble_configs(
    start: Configuration,
    t: float,
    n_runs: int,
    seed: int,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> np.ndarray:
    """Final occupancy vectors (n_runs, N) of independent runs from one state."""
    status, finals = kernels.sep_final_ensemble(
        _cumulative(start),
        start.params.k,
        float(t),
        int(seed) & _MASK63,
        int(n_runs),
        int(max_events),
    )
    _check_status(status)
    return np.diff(finals, axis=1)
