"""Command-line harness: run a check, drop reproducible CSV/JSON artifacts.

Exit codes: 0 all checks passed, 1 an asserted inequality failed, 2 a budget
or usage problem.  Every CSV is accompanied by a JSON manifest carrying the
exact config text, the seed, tolerances and wall time; CSVs themselves are
byte-identical across repeat runs of the same (config, seed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .censoring import (
    CensoringScheme,
    all_triples,
    censor_bonds,
    three_phase_schedule,
    triples_excluding_bonds,
)
from .coupling import area_trace_ensemble, coalescence_estimate
from .evolve import (
    censored_transient_distribution,
    exact_mean_height_profile,
    mixing_time,
    sep_instance,
    shuffle_instance,
    transient_distribution,
    tv_distance,
    worst_case_distance,
)
from .generator import build_sep_generator
from .heights import scaled_shuffle_heights
from .measures import fkg_check, random_increasing_function
from .spectral import (
    eigenfunction,
    heat_min_bound,
    heat_solution,
    heat_sup_bound,
    rough_upper_bound,
    theorem_lower_bound,
    verify_eigenpair,
)
from .states import (
    EnumerationBudgetError,
    Params,
    extremal_states,
    top_shuffle,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

RESIDUAL_TOL = 1e-9
EXACT_TOL = 1e-12


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


class Artifacts:
    """Funnel for every file a command writes, plus its manifest."""

    def __init__(self, outdir: Path, command: str, cfg, tolerances: dict):
        self.outdir = outdir
        self.command = command
        self.cfg = cfg
        self.tolerances = tolerances
        self.columns: dict = {}
        self.files: list = []
        self.extra: dict = {}
        self.t0 = time.monotonic()
        outdir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, columns, rows) -> Path:
        path = self.outdir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self.columns[name] = list(columns)
        self.files.append(name)
        return path

    def gnuplot(self, name: str, csv_name: str, title: str, ycols, logy=False) -> None:
        path = self.outdir / name
        lines = [
            f'set title "{title}"',
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set xlabel 't'",
        ]
        if logy:
            lines.append("set logscale y")
        plots = ", ".join(
            f"'{csv_name}' using 1:{c} with linespoints" for c in ycols
        )
        lines.append(f"plot {plots}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.files.append(name)

    def manifest(self, name: str = None) -> Path:
        name = name or f"{self.command.replace('-', '_')}.manifest.json"
        payload = {
            "command": self.command,
            "config": cfgmod.dumps(self.cfg),
            "seed": self.cfg.seed,
            "tolerances": self.tolerances,
            "outputs": self.files,
            "columns": self.columns,
            "wall_time_s": time.monotonic() - self.t0,
        }
        payload.update(self.extra)
        path = self.outdir / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _params(cfg) -> Params:
    cfg.require("k", "N")
    return Params(cfg.k, cfg.N, cfg.m)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eigencheck(cfg, corrupt: bool = False) -> int:
    cfg.require("k", "N", "m")
    params = Params(cfg.k, cfg.N, cfg.m)
    art = Artifacts(Path(cfg.out), "eigencheck", cfg, {"residual": RESIDUAL_TOL})
    Q = build_sep_generator(params, cfg.max_states)
    if corrupt:
        # test hook: damage one off-diagonal rate so residuals blow up
        data = Q.matrix.data
        data[np.argmax(data)] += 0.37
    rows = []
    worst = 0.0
    for j in range(params.N):
        pair = eigenfunction(params, j)
        rp = verify_eigenpair(Q, pair, "particle")
        rh = verify_eigenpair(Q, pair, "height")
        worst = max(worst, rp, rh)
        rows.append((j, pair.rate, rp, rh))
        print(f"j={j} rate={pair.rate:.12g} residual_particle={rp:.3e} residual_height={rh:.3e}")
    art.csv("eigencheck.csv", ["j", "lambda", "residual_particle", "residual_height"], rows)
    art.manifest()
    if worst > RESIDUAL_TOL:
        print(f"FAIL: worst residual {worst:.3e} > {RESIDUAL_TOL}")
        return EXIT_VIOLATION
    print(f"PASS: worst residual {worst:.3e}")
    return EXIT_OK


def cmd_tvcurve(cfg) -> int:
    cfg.require("k", "N", "m", "t_grid")
    params = Params(cfg.k, cfg.N, cfg.m)
    eps = cfg.eps if cfg.eps is not None else 0.25
    art = Artifacts(Path(cfg.out), "tvcurve", cfg, {"monotone_slack": 1e-10})
    gen, mu = sep_instance(params, cfg.max_states)
    top, bot = extremal_states(params)
    i_top, i_bot = gen.index[top.gamma], gen.index[bot.gamma]
    wilson = (
        theorem_lower_bound(params, eps, max_states=cfg.max_states)
        if 2 * params.m <= params.k * params.N
        else float("-inf")
    )
    vacuous = 1 if wilson <= 0 else 0
    rows, rows_ext = [], []
    prev = None
    monotone_ok = True
    bound_ok = True
    for t in cfg.t_grid:
        d = worst_case_distance(gen, mu, t)
        nu_top = np.zeros(gen.dim)
        nu_top[i_top] = 1.0
        nu_bot = np.zeros(gen.dim)
        nu_bot[i_bot] = 1.0
        d_top = tv_distance(transient_distribution(gen, nu_top, t), mu)
        d_bot = tv_distance(transient_distribution(gen, nu_bot, t), mu)
        rough = rough_upper_bound(params, t)
        rows.append((t, d, rough, vacuous))
        rows_ext.append((t, d, d_top, d_bot))
        if prev is not None and d > prev + 1e-10:
            monotone_ok = False
        if d > rough + EXACT_TOL:
            bound_ok = False
        prev = d
    art.csv(
        "tvcurve.csv",
        ["t", "d_exact", "bound_rough", "bound_wilson_vacuous_flag"],
        rows,
    )
    art.csv(
        "tvcurve_extremal.csv",
        ["t", "d_exact", "d_from_top", "d_from_bottom"],
        rows_ext,
    )
    art.gnuplot("tvcurve.gp", "tvcurve.csv", "worst-case TV distance", (2, 3), logy=True)
    art.extra["wilson_lower_bound"] = wilson
    art.manifest()
    if not monotone_ok:
        print("FAIL: d(t) is not nonincreasing along the grid")
        return EXIT_VIOLATION
    if not bound_ok:
        print("FAIL: exact distance exceeded the rough upper bound")
        return EXIT_VIOLATION
    print(f"PASS: {len(rows)} grid points, wilson bound {wilson:.6g} (vacuous={vacuous})")
    return EXIT_OK


def cmd_cutoff_scan(cfg) -> int:
    cfg.require("k", "N_list")
    eps_list = cfg.eps_list or (0.75, 0.5, 0.25)
    if list(cfg.N_list) != sorted(set(cfg.N_list)):
        print("usage error: N_list must be strictly increasing")
        return EXIT_USAGE
    art = Artifacts(Path(cfg.out), "cutoff-scan", cfg, {"lower_bound": "must sit below"})
    rows = []
    cols = ["N", "k", "m"]
    for e in eps_list:
        cols.append(f"t_hat_eps{int(round(100 * e))}")
        if cfg.mode == "coupling":
            cols += [
                f"ci_lo_eps{int(round(100 * e))}",
                f"ci_hi_eps{int(round(100 * e))}",
            ]
    cols += ["ratio_to_scale", "lower_bound", "spread_over_mid"]
    ok = True
    for N in cfg.N_list:
        m = cfg.m if cfg.m is not None else cfg.k * N // 2
        params = Params(cfg.k, N, m)
        scale = N * N * math.log(max(m, 2)) / (2 * cfg.k * math.pi**2)
        row = [N, cfg.k, m]
        t_hats = {}
        if cfg.mode == "exact":
            gen, mu = sep_instance(params, cfg.max_states)
            for e in eps_list:
                t_hats[e] = mixing_time(gen, mu, e)
                row.append(t_hats[e])
        elif cfg.mode == "coupling":
            cfg.require("n_runs")
            horizon = 2.6 * scale + 1.0
            for _attempt in range(7):
                res = coalescence_estimate(
                    params, horizon, cfg.n_runs, cfg.seed, max_events=cfg.max_events
                )
                try:
                    estimates = {e: res.mixing_time_estimate(e) for e in eps_list}
                    break
                except ValueError:
                    horizon *= 2.0  # tail not yet resolved at this horizon
            else:
                print(f"usage error: N={N} never resolved the requested quantiles")
                return EXIT_USAGE
            for e in eps_list:
                point, lo, hi = estimates[e]
                t_hats[e] = point
                row += [point, lo, hi]
            curve_ts = np.linspace(horizon / 40, horizon * 0.95, 40)
            curve = res.survival(curve_ts)
            art.csv(
                f"survival_N{N}.csv",
                ["t", "p_hat", "ci_lo", "ci_hi"],
                [
                    (t, curve[i, 0], curve[i, 1], curve[i, 2])
                    for i, t in enumerate(curve_ts)
                ],
            )
        else:
            print(f"usage error: unknown mode {cfg.mode!r}")
            return EXIT_USAGE
        e_ref = min(eps_list)
        row.append(t_hats[e_ref] / scale)
        lb = theorem_lower_bound(params, e_ref, max_states=cfg.max_states)
        row.append(lb)
        e_hi, e_mid = max(eps_list), sorted(eps_list)[len(eps_list) // 2]
        spread = (t_hats[e_ref] - t_hats[e_hi]) / t_hats[e_mid]
        row.append(spread)
        rows.append(tuple(row))
        if any(lb > t_hats[e] + 1e-9 for e in eps_list):
            ok = False
        print(
            f"N={N} m={m} t_hat={[round(t_hats[e], 3) for e in sorted(eps_list, reverse=True)]} "
            f"ratio={t_hats[e_ref] / scale:.4f} lb={lb:.4g} spread={spread:.4f}"
        )
    art.csv("cutoff_scan.csv", cols, rows)
    art.gnuplot("cutoff_scan.gp", "cutoff_scan.csv", "cutoff scan", (len(cols) - 2,))
    art.manifest()
    if not ok:
        print("FAIL: a lower bound exceeded an estimate")
        return EXIT_VIOLATION
    print(f"PASS: scanned {len(rows)} sizes")
    return EXIT_OK


def _censor_schemes(k: int, N: int, horizon: float, delta: float):
    """A spread of piecewise-constant schemes for the inequality check."""
    mid = N // 2 if N // 2 >= 1 else 1
    everything = all_triples(k, N)
    single = frozenset([(1, 1, 1)])
    schemes = {
        "block_bond1": censor_bonds(k, N, [1], horizon),
        "block_mid_bond": censor_bonds(k, N, [mid], horizon),
        "freeze_then_free": CensoringScheme(
            (0.0, horizon / 3), (frozenset(), everything), horizon, k, N
        ),
        "only_one_swap": CensoringScheme((0.0,), (single,), horizon, k, N),
        "alternating": CensoringScheme(
            (0.0, horizon / 4, horizon / 2),
            (
                triples_excluding_bonds(k, N, [1]),
                everything,
                triples_excluding_bonds(k, N, [max(1, N - 2)]),
            ),
            horizon,
            k,
            N,
        ),
    }
    tp = three_phase_schedule(Params(k, N), delta)
    # rescale the three-phase shape onto the requested horizon
    ratio = horizon / tp.horizon
    schemes["three_phase"] = CensoringScheme(
        tuple(s * ratio for s in tp.starts), tp.allowed, horizon, k, N
    )
    return schemes


def cmd_censorcheck(cfg, negate: bool = False) -> int:
    cfg.require("k", "N", "t_grid")
    delta = cfg.delta if cfg.delta is not None else 0.5
    art = Artifacts(Path(cfg.out), "censorcheck", cfg, {"slack": EXACT_TOL})
    k, N = cfg.k, cfg.N
    gen, mu = shuffle_instance(k, N, cfg.max_states)
    top = top_shuffle(k, N)
    nu0 = np.zeros(gen.dim)
    nu0[gen.index[top.sigma]] = 1.0
    horizon = float(cfg.t_grid[-1]) + 1e-9
    schemes = _censor_schemes(k, N, horizon, delta)
    rows = []
    ok = True
    for name, scheme in schemes.items():
        for t in cfg.t_grid:
            free = tv_distance(transient_distribution(gen, nu0, t), mu)
            censored = tv_distance(
                censored_transient_distribution(k, N, nu0, scheme, t, cfg.max_states),
                mu,
            )
            holds = free <= censored + EXACT_TOL
            if negate:
                holds = censored < free - EXACT_TOL
            if not holds:
                ok = False
            rows.append((name, t, free, censored, int(holds)))
    art.csv(
        "censorcheck.csv",
        ["scheme", "t", "d_uncensored", "d_censored", "holds"],
        rows,
    )
    art.extra["schemes"] = {name: s.describe() for name, s in schemes.items()}
    art.manifest()
    if not ok:
        print("FAIL: censoring inequality violated")
        return EXIT_VIOLATION
    print(f"PASS: {len(rows)} scheme/time combinations")
    return EXIT_OK


def cmd_fkgcheck(cfg, negate: bool = False) -> int:
    cfg.require("k", "N")
    n_pairs = cfg.n_runs if cfg.n_runs is not None else 50
    art = Artifacts(Path(cfg.out), "fkgcheck", cfg, {"slack": EXACT_TOL})
    rng = np.random.default_rng(cfg.seed)
    rows = []
    ok = True
    for pid in range(n_pairs):
        f = random_increasing_function(cfg.k, cfg.N, rng)
        g = random_increasing_function(cfg.k, cfg.N, rng)
        lhs, rhs = fkg_check(cfg.k, cfg.N, f, g, cfg.max_states)
        holds = lhs >= rhs - EXACT_TOL
        if negate:
            holds = lhs < rhs - EXACT_TOL
        if not holds:
            ok = False
        rows.append((pid, lhs, rhs, lhs - rhs, int(holds)))
    art.csv("fkgcheck.csv", ["pair", "mean_fg", "mean_f_mean_g", "margin", "holds"], rows)
    art.manifest()
    if not ok:
        print("FAIL: positive-correlation inequality violated")
        return EXIT_VIOLATION
    print(f"PASS: {n_pairs} increasing pairs")
    return EXIT_OK


def cmd_heatcheck(cfg, negate: bool = False) -> int:
    cfg.require("k", "N", "t_grid")
    k, N = cfg.k, cfg.N
    art = Artifacts(
        Path(cfg.out), "heatcheck", cfg, {"match": RESIDUAL_TOL, "bounds": EXACT_TOL}
    )
    gen, _mu = shuffle_instance(k, N, cfg.max_states)
    one = top_shuffle(k, N)
    nu0 = np.zeros(gen.dim)
    nu0[gen.index[one.sigma]] = 1.0
    h0 = scaled_shuffle_heights(one) / N
    rows = []
    ok = True
    worst = 0.0
    for y in range(1, k * N):
        prof0 = h0[:, y]
        for t in cfg.t_grid:
            exact = exact_mean_height_profile(gen, nu0, y, t)
            eig = heat_solution(prof0, k, t).values
            err = float(np.abs(exact - eig).max())
            worst = max(worst, err)
            sup_b = heat_sup_bound(y, k, N, t)
            for x in range(1, N):
                low_b = heat_min_bound(x, y, k, N, t)
                holds = (
                    err <= RESIDUAL_TOL
                    and exact[x] <= sup_b + EXACT_TOL
                    and exact[x] >= low_b - EXACT_TOL
                )
                if negate:
                    holds = not holds
                if not holds:
                    ok = False
                rows.append((t, x, y, exact[x], eig[x], sup_b, low_b, int(holds)))
    art.csv(
        "heatcheck.csv",
        ["t", "x", "y", "exact_mean", "eigen_mean", "upper_bound", "lower_bound", "holds"],
        rows,
    )
    art.extra["worst_match_error"] = worst
    art.manifest()
    if not ok:
        print("FAIL: heat-equation check violated")
        return EXIT_VIOLATION
    print(f"PASS: worst exact-vs-eigenexpansion error {worst:.3e}")
    return EXIT_OK


def cmd_areatrace(cfg, negate: bool = False) -> int:
    cfg.require("k", "N", "m", "t_grid", "n_runs")
    params = Params(cfg.k, cfg.N, cfg.m)
    art = Artifacts(Path(cfg.out), "areatrace", cfg, {"supermartingale_sigmas": 2.0})
    k = cfg.k
    ens = area_trace_ensemble(
        params, cfg.t_grid, cfg.n_runs, cfg.seed, max_events=cfg.max_events
    )
    diff = ens.down_rate - ens.up_rate
    member_ok = bool(
        np.all(diff >= 0) and np.all(diff <= 2 * k * k) and np.all(diff % k == 0)
    )
    inc_mean, inc_se = ens.paired_increments()
    super_ok = bool(np.all(inc_mean <= 2.0 * inc_se + 1e-12))
    mean_a, se_a = ens.mean_area()
    rows = [
        (
            t,
            mean_a[i],
            float(ens.active[:, i].mean()),
            float(ens.down_rate[:, i].mean()),
            float(ens.up_rate[:, i].mean()),
        )
        for i, t in enumerate(ens.sample_times)
    ]
    art.csv("areatrace.csv", ["t", "A", "B_size", "d", "u"], rows)
    art.gnuplot("areatrace.gp", "areatrace.csv", "mean area between extremal heights", (2,))
    art.extra["n_runs"] = cfg.n_runs
    art.manifest()
    ok = member_ok and super_ok
    if negate:
        ok = not ok
    if not ok:
        print(
            f"FAIL: membership={member_ok} supermartingale={super_ok}"
        )
        return EXIT_VIOLATION
    print(f"PASS: {len(rows)} sampled records over {cfg.n_runs} replicas")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--k", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-list", dest="eps_list", type=str)
    p.add_argument("--t-grid", dest="t_grid", type=str)
    p.add_argument("--N-list", dest="N_list", type=str)
    p.add_argument("--n-runs", dest="n_runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--mode", type=str)
    p.add_argument("--max-states", dest="max_states", type=int)
    p.add_argument("--max-events", dest="max_events", type=int)
    p.add_argument("--negate", action="store_true", help=argparse.SUPPRESS)


COMMANDS = {
    "eigencheck": cmd_eigencheck,
    "tvcurve": cmd_tvcurve,
    "cutoff-scan": cmd_cutoff_scan,
    "censorcheck": cmd_censorcheck,
    "fkgcheck": cmd_fkgcheck,
    "heatcheck": cmd_heatcheck,
    "areatrace": cmd_areatrace,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exclusion-lab",
        description="exact and stochastic checks for the capacity-k exclusion chain "
        "and the packet shuffle",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "eigencheck":
            p.add_argument(
                "--corrupt-generator", action="store_true", help=argparse.SUPPRESS
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config) if args.config else cfgmod.ExperimentConfig()
        overrides = {}
        for key in (
            "k",
            "N",
            "m",
            "R",
            "delta",
            "eps",
            "n_runs",
            "seed",
            "out",
            "mode",
            "max_states",
            "max_events",
        ):
            overrides[key] = getattr(args, key, None)
        if args.t_grid is not None:
            overrides["t_grid"] = cfgmod._parse_float_list(args.t_grid)
        if args.N_list is not None:
            overrides["N_list"] = cfgmod._parse_int_list(args.N_list)
        if args.eps_list is not None:
            overrides["eps_list"] = cfgmod._parse_float_list(args.eps_list)
        overrides["command"] = args.command
        cfg = cfg.replace(**overrides)
        fn = COMMANDS[args.command]
        kwargs = {}
        if args.command == "eigencheck":
            kwargs["corrupt"] = bool(getattr(args, "corrupt_generator", False))
        elif args.command in ("censorcheck", "fkgcheck", "heatcheck", "areatrace"):
            kwargs["negate"] = bool(args.negate)
        return fn(cfg, **kwargs)
    except (cfgmod.ConfigError, EnumerationBudgetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
