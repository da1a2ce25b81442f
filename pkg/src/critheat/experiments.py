"""Named experiments: build data, run, monitor, and emit CSV/JSON.

Each experiment writes `series.csv` (one diagnostics record per row,
fixed columns) and `summary.json` (fitted exponents, verdicts, constants,
T_box, a full config echo, and the version stamp) into the output
directory, and reports pass/fail through the exit code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from . import bubble as bb
from . import decay as dc
from . import diagnostics as dg
from . import evolution as ev
from .config import ConfigError, EXPERIMENT_NAMES, HarnessConfig, parse_config
from .spectral import (
    SpectralField,
    TorusGrid,
    set_fft_workers,
    sobolev_norm_sq,
    transform_forward,
)

GRAD_W_L2_SQ = 32.0 * np.pi**2 / 3.0   # ||grad W||^2, Beta-integral value
BUBBLE_ENERGY = 8.0 * np.pi**2 / 3.0
L2_GROWTH_SLOPE = 128.0 * np.pi**2     # d/d(ln R) of the truncated mass of W^2


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    config_path: str | None
    out_dir: Path
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.name not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENT_NAMES)}"
            )


def build_datum(cfg: HarnessConfig, grid: TorusGrid) -> tuple[SpectralField, float]:
    """Initial spectral datum and its nominal q* per the config."""
    if cfg.datum == "bump":
        datum = bb.subcritical_datum(grid, cfg.delta)
        return transform_forward(datum.field), cfg.nominal_q_star()
    if cfg.datum == "power_law":
        raw = dc.synthesize_datum(grid, cfg.profile_r, cfg.cutoff_rho, amplitude=1.0)
        h1 = np.sqrt(sobolev_norm_sq(raw, 1.0))
        target = cfg.delta * np.sqrt(GRAD_W_L2_SQ)
        scale = target / h1 if h1 > 0 else 0.0
        return SpectralField(grid, raw.coefficients * scale), cfg.profile_r
    field, _, _ = ev.load_checkpoint(cfg.datum_file)
    if field.grid != grid:
        raise ConfigError(
            f"datum file grid (N={field.grid.points_per_dim}, L={field.grid.side_length}) "
            f"does not match config grid (N={grid.points_per_dim}, L={grid.side_length})"
        )
    return transform_forward(field), cfg.nominal_q_star()


@dataclass
class RunResult:
    records: dict[str, list[dg.DiagnosticsRecord]]
    balances: list[ev.BalanceSnapshot]
    final: ev.SolverState


def run_simulation(
    cfg: HarnessConfig,
    schedules: Mapping[str, dg.SplittingSchedule],
    grid: TorusGrid | None = None,
    dt: float | None = None,
) -> RunResult:
    """Advance the configured problem through its log-spaced snapshots."""
    grid = grid or TorusGrid(cfg.points_per_dim, cfg.side_length)
    u0_hat, _ = build_datum(cfg, grid)
    t_end = cfg.resolved_t_end()
    times = ev.log_spaced_snapshots(cfg.resolved_snapshot_t_min(), t_end, cfg.snapshot_count)
    state = ev.initial_state(u0_hat, nonlinear=cfg.nonlinearity)
    records: dict[str, list[dg.DiagnosticsRecord]] = {k: [] for k in schedules}
    balances = [ev.balance_snapshot(state)]
    for key, sched in schedules.items():
        records[key].append(dg.record(state, sched))
    for t_snap in times:
        state = ev.advance(state, t_snap, dt if dt is not None else cfg.dt)
        balances.append(ev.balance_snapshot(state))
        for key, sched in schedules.items():
            records[key].append(dg.record(state, sched))
    return RunResult(records, balances, state)


# ----------------------------------------------------------------- writers


def write_series_csv(path: Path, records: Sequence[dg.DiagnosticsRecord]) -> None:
    lines = [",".join(dg.CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(format(v, ".17g") for v in dg.csv_row(rec)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _base_summary(name: str, cfg: HarnessConfig) -> dict:
    return {
        "experiment": name,
        "version": __version__,
        "config": cfg.echo(),
        "t_box": cfg.t_box,
    }


# ------------------------------------------------------------- experiments


def _bubble_constants(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    consts = bb.bubble_constants()
    checks = {
        "grad_l2_sq": (consts.grad_l2_sq, GRAD_W_L2_SQ),
        "l4_fourth": (consts.l4_fourth, GRAD_W_L2_SQ),
        "energy": (consts.energy, BUBBLE_ENERGY),
        "sobolev_constant": (consts.sobolev_constant, (3.0 / (32.0 * np.pi**2)) ** 0.25),
    }
    verdicts = {
        key: abs(got / want - 1.0) <= 1e-6 for key, (got, want) in checks.items()
    }
    verdicts["general_n_formula"] = (
        abs(bb.sobolev_constant_general(4) / consts.grad_l2_sq**-0.25 - 1.0) <= 1e-6
    )
    verdicts["quarter_energy_identity"] = (
        abs(consts.energy - 0.25 * consts.grad_l2_sq) <= 1e-10 * consts.grad_l2_sq
    )

    rng = np.random.default_rng(0)
    pts = rng.uniform(-8.0, 8.0, size=(100, 4))
    h_grid = (0.02, 0.01, 0.005)
    residuals = [max(bb.stationarity_residual(pts, h)) for h in h_grid]
    orders = [
        float(np.log2(residuals[i] / residuals[i + 1])) for i in range(len(h_grid) - 1)
    ]
    verdicts["stationarity_order"] = all(abs(o - 2.0) <= 0.1 for o in orders)

    radii = np.geomspace(1e2, 1e4, 9)
    masses = bb.truncated_l2_growth(radii)
    slope = float(np.polyfit(np.log(radii), masses, 1)[0])
    verdicts["l2_growth_slope"] = abs(slope / L2_GROWTH_SLOPE - 1.0) <= 0.02

    summary = _base_summary("bubble-constants", cfg)
    summary.update(
        {
            "constants": {
                "grad_l2_sq": consts.grad_l2_sq,
                "l4_fourth": consts.l4_fourth,
                "energy": consts.energy,
                "sobolev_constant": consts.sobolev_constant,
                "quadrature_truncation": consts.quadrature_truncation,
            },
            "expected": {k: want for k, (_, want) in checks.items()},
            "stationarity": {
                "h_fd": list(h_grid),
                "max_residuals": residuals,
                "orders": orders,
            },
            "l2_growth": {
                "radii": list(map(float, radii)),
                "masses": masses,
                "slope_vs_lnR": slope,
                "expected_slope": L2_GROWTH_SLOPE,
            },
            "verdicts": verdicts,
        }
    )
    return summary, [], all(verdicts.values())


def _decay_character(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    recovery = {}
    for r in (-1.0, 0.0, 1.0, 2.0):
        est = dc.estimate_decay_character(dc.power_law_profile(r))
        recovery[f"r={r:g}"] = {"estimate": est.r_star, "error": est.r_star - r}
    verdicts = {
        "power_law_recovery": all(
            abs(v["error"]) <= 0.05 for v in recovery.values()
        )
    }

    classifiers = {
        "lp_p_4_3": dc.classify_lp(4.0 / 3.0, 4),
        "lp_p_3_2": dc.classify_lp(1.5, 4),
        "weighted_gamma_1_zero_mean": dc.classify_weighted(1.0, True),
        "weighted_gamma_05_nonzero_mean": dc.classify_weighted(0.5, False),
    }
    verdicts["classifiers"] = (
        classifiers["lp_p_4_3"] == -1.0
        and abs(classifiers["lp_p_3_2"] + 4.0 / 3.0) < 1e-14
        and classifiers["weighted_gamma_1_zero_mean"] == 1.0
        and classifiers["weighted_gamma_05_nonzero_mean"] == 0.0
    )

    gauss = dc.estimate_decay_character(dc.gaussian_profile())
    verdicts["gaussian_flat"] = abs(gauss.r_star) <= 0.05

    grid = TorusGrid(cfg.points_per_dim, cfg.side_length)
    datum = dc.synthesize_datum(grid, cfg.profile_r, cfg.cutoff_rho, 1.0)
    grid_est = dc.estimate_decay_character_grid(
        datum, weight_power=1.0, rho_max=cfg.cutoff_rho / 2.0
    )
    verdicts["grid_shell_fit"] = abs(grid_est.r_star - cfg.profile_r) <= 0.1

    summary = _base_summary("decay-character", cfg)
    summary.update(
        {
            "power_law_recovery": recovery,
            "classifiers": classifiers,
            "gaussian_estimate": gauss.r_star,
            "grid_estimate": {
                "q_star": grid_est.r_star,
                "target": cfg.profile_r,
                "fit_window": list(grid_est.fit_window),
                "slope_residual": grid_est.slope_residual,
            },
            "verdicts": verdicts,
        }
    )
    return summary, [], all(verdicts.values())


def _linear_decay(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    times = np.geomspace(1e2, 1e6, 41)
    oracle_cases = []
    oracle_ok = True
    for r_star in (-1.0, -0.5, 0.0, 1.0):
        for alpha in (1.0, 0.5):
            sym = dc.DissipationSymbol(c=1.0, alpha=alpha)
            prof = dc.power_law_profile(r_star)
            vals = dc.radial_linear_evolution(prof, sym, times)
            slope = float(np.polyfit(np.log1p(times), np.log(vals), 1)[0])
            want = -dc.linear_decay_exponent(r_star, sym, 4)
            ok = abs(slope - want) <= 0.05
            oracle_ok &= ok
            oracle_cases.append(
                {"r_star": r_star, "alpha": alpha, "fit": slope, "expected": want, "pass": ok}
            )

    gauss = dc.gaussian_profile()
    t_check = [0.0, 0.5, 1.0, 10.0, 1e3]
    gvals = dc.radial_linear_evolution(gauss, dc.DissipationSymbol(), t_check)
    gerr = max(
        abs(v / (np.pi**2 / (1.0 + 2.0 * t) ** 2) - 1.0) for v, t in zip(gvals, t_check)
    )

    sched = dg.SplittingSchedule(cfg.schedule, cfg.resolved_schedule_alpha(), cfg.c_tilde)
    result = run_simulation(cfg, {"primary": sched})
    records = result.records["primary"]
    window = cfg.resolved_fit_window()
    fit = dg.fit_decay_rate(records, window)
    q_star = cfg.nominal_q_star()
    expected_exponent = 2.0 + q_star

    verdicts = {
        "oracle_grid": oracle_ok,
        "gaussian_closed_form": gerr <= 1e-8,
        "torus_exponent": abs(-fit.exponent - expected_exponent) <= 0.1,
    }
    summary = _base_summary("linear-decay", cfg)
    summary.update(
        {
            "oracle_cases": oracle_cases,
            "gaussian_max_rel_err": gerr,
            "torus_fit": {
                "exponent": fit.exponent,
                "expected": expected_exponent,
                "window": list(fit.window),
                "residual": fit.residual,
            },
            "q_star": q_star,
            "verdicts": verdicts,
        }
    )
    return summary, records, all(verdicts.values())


def _partition_defect(records: Sequence[dg.DiagnosticsRecord]) -> float:
    worst = 0.0
    for rec in records:
        if rec.h1_sq > 0:
            worst = max(worst, abs(rec.low_sq + rec.high_sq - rec.h1_sq) / rec.h1_sq)
    return worst


def _nonlinear_decay(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    power = dg.SplittingSchedule(dg.POWER, cfg.resolved_schedule_alpha(), cfg.c_tilde)
    logc = dg.SplittingSchedule(dg.LOG_CUBED, c_tilde=cfg.c_tilde)
    result = run_simulation(cfg, {"power": power, "log_cubed": logc})
    records = result.records["power"]
    window = cfg.resolved_fit_window()
    fit = dg.fit_decay_rate(records, window)
    q_star = cfg.nominal_q_star()
    bound_ok = dg.bound_check(q_star, fit, cfg.bound_tol)
    partition = max(
        _partition_defect(result.records["power"]),
        _partition_defect(result.records["log_cubed"]),
    )
    key_power = dg.key_inequality_check(result.records["power"], power)
    key_log = dg.key_inequality_check(result.records["log_cubed"], logc)

    verdicts = {
        "bound_check": bound_ok,
        "partition_exact": partition <= 1e-13,
        "key_inequality_power": key_power.passed,
        "key_inequality_log_cubed": key_log.passed,
    }
    summary = _base_summary("nonlinear-decay", cfg)
    summary.update(
        {
            "q_star": q_star,
            "decay_bound": min(2.0 + q_star, 1.0),
            "bound_tol": cfg.bound_tol,
            "fit": {
                "exponent": fit.exponent,
                "window": list(fit.window),
                "residual": fit.residual,
            },
            "partition_max_defect": partition,
            "key_inequality": {
                "power_max_margin": key_power.max_margin,
                "log_cubed_max_margin": key_log.max_margin,
            },
            "verdicts": verdicts,
        }
    )
    return summary, records, all(verdicts.values())


def _lyapunov(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    sched = dg.SplittingSchedule(cfg.schedule, cfg.resolved_schedule_alpha(), cfg.c_tilde)
    result = run_simulation(cfg, {"primary": sched})
    records = result.records["primary"]
    report = dg.lyapunov_check(records, cfg.lyapunov_tol)
    pairing = dg.pairing_ratio_report(records)
    summary = _base_summary("lyapunov", cfg)
    summary.update(
        {
            "snapshots": len(records),
            "lyapunov": {
                "passed": report.passed,
                "tol": report.tol,
                "violations": [list(v) for v in report.violations],
            },
            "pairing": {
                "max_ratio": pairing.max_ratio,
                "t_at_max": pairing.t_at_max,
            },
            "verdicts": {"lyapunov": report.passed},
        }
    )
    return summary, records, report.passed


def _energy_identity(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    sched = dg.SplittingSchedule(cfg.schedule, cfg.resolved_schedule_alpha(), cfg.c_tilde)
    residuals = []
    records: list[dg.DiagnosticsRecord] = []
    for level in range(cfg.refinement_levels):
        dt = cfg.dt / 2**level
        result = run_simulation(cfg, {"primary": sched}, dt=dt)
        residuals.append(dg.energy_identity_residual(result.balances))
        if level == 0:
            records = result.records["primary"]
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    verdicts = {
        "baseline_residual": residuals[0] <= 1e-6,
        "refinement_factor": all(r >= 4.0 for r in ratios),
    }
    summary = _base_summary("energy-identity", cfg)
    summary.update(
        {
            "dt_levels": [cfg.dt / 2**k for k in range(cfg.refinement_levels)],
            "residuals": residuals,
            "refinement_ratios": ratios,
            "verdicts": verdicts,
        }
    )
    return summary, records, all(verdicts.values())


def _splitting(cfg: HarnessConfig) -> tuple[dict, list, bool]:
    power = dg.SplittingSchedule(dg.POWER, cfg.resolved_schedule_alpha(), cfg.c_tilde)
    logc = dg.SplittingSchedule(dg.LOG_CUBED, c_tilde=cfg.c_tilde)
    result = run_simulation(cfg, {"power": power, "log_cubed": logc})
    records = result.records["power"]
    partition = max(
        _partition_defect(result.records["power"]),
        _partition_defect(result.records["log_cubed"]),
    )
    key_power = dg.key_inequality_check(result.records["power"], power)
    key_log = dg.key_inequality_check(result.records["log_cubed"], logc)
    verdicts = {
        "partition_exact": partition <= 1e-13,
        "key_inequality_power": key_power.passed,
        "key_inequality_log_cubed": key_log.passed,
    }
    summary = _base_summary("splitting", cfg)
    summary.update(
        {
            "radius_at_zero": {
                "log_cubed": logc.radius(0.0),
                "power": power.radius(0.0),
            },
            "partition_max_defect": partition,
            "key_inequality": {
                "power_max_margin": key_power.max_margin,
                "log_cubed_max_margin": key_log.max_margin,
            },
            "verdicts": verdicts,
        }
    )
    return summary, records, all(verdicts.values())


_RUNNERS = {
    "bubble-constants": _bubble_constants,
    "decay-character": _decay_character,
    "linear-decay": _linear_decay,
    "nonlinear-decay": _nonlinear_decay,
    "lyapunov": _lyapunov,
    "energy-identity": _energy_identity,
    "splitting": _splitting,
}


def run_experiment(spec: ExperimentSpec) -> int:
    """Run one named experiment; exit code 0 pass, 1 check failure, 2 config error."""
    try:
        cfg = parse_config(spec.config_path, spec.name)
        workers = spec.threads if spec.threads else cfg.resolved_threads()
        set_fft_workers(workers)
        spec.out_dir.mkdir(parents=True, exist_ok=True)
        summary, records, passed = _RUNNERS[spec.name](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}")
        return 2
    summary["passed"] = passed
    write_series_csv(spec.out_dir / "series.csv", records)
    write_summary_json(spec.out_dir / "summary.json", summary)
    for key, value in sorted(summary.get("verdicts", {}).items()):
        print(f"[{'PASS' if value else 'FAIL'}] {spec.name}: {key}")
    return 0 if passed else 1
