"""
The experiment commands. Each takes an ExperimentConfig, writes its CSV artifacts
under the output directory and returns the ExperimentRecord that goes into the ledger.
"""
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from src import __version__
from src.analytics.analyzer import ExperimentAnalyzer, c_hat_spread, degenerate_summary, fit_decay, stacking_summary
from src.analytics.ledger import exponent_ledger
from src.errors import DomainError, FavardLabError, InvariantViolation, PlancherelTruncationError
from src.etl.database import ExperimentDatabase
from src.etl.writers import write_csv, write_traces
from src.experiments.config import ExperimentConfig, RunSettings
from src.experiments.pool import serial_map, worker_pool
from src.experiments.records import ExperimentRecord
from src.fourier.energy import FrequencySet, cetsq_ratio, cetsq_trial, p1_energy, plancherel_check
from src.fourier.products import RieszProduct, riesz_audit, riesz_period_mean
from src.geometry.systems import parse_preset, triangle_config, triangle_system
from src.projection.combinatorics import bootstrap_check, l2_constant, stacking_ratio
from src.projection.degenerate import jacobian_audit
from src.projection.engine import buffon_estimate, cached_cells, check_mass, favard_profile, multiplicity
from src.tiling.verifier import (
    _scan_task,
    critical_indices,
    domination_audit,
    sample_centres,
    ssv_scan,
    stability_audit,
)
from src.zeros.continuation import continue_zero, g_functions, velocity_bound, window_counts
from src.zeros.finder import Rect, band_growth, branch_candidates, find_zeros

logger = logging.getLogger(__name__)

# Fixed substreams of the configured seed
RNG_BUFFON = 1
RNG_RIESZ = 10
RNG_CRITICAL = 11
RNG_TILING = 20

MONOTONE_RTOL = 1e-9
BUFFON_SAMPLES = 200_000
TILING_WINDOW = (0.01, 40.0, -1.0, 1.0)
ENDPOINT_BOX = 0.05
CRITICAL_TRIALS = 500
CRITICAL_M = 6


def _record(cfg: ExperimentConfig, command: str) -> ExperimentRecord:
    return ExperimentRecord(cfg.config_hash, command, __version__, datetime.now())


def _write(record: ExperimentRecord, frame: pd.DataFrame, cfg: ExperimentConfig, name: str) -> Path:
    return write_csv(frame, Path(cfg.output_dir) / name, cfg.config_hash, __version__, record.command)


def _midpoint_angles(count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) * math.pi / count


def _t_grid(count: int, m: int) -> list[float]:
    """Midpoint grid on (0, 1) with the exceptional window |t - 1/2| <= 3^{-m} removed."""
    ts = (np.arange(count) + 0.5) / count
    return [float(t) for t in ts if abs(t - 0.5) > 3.0 ** (-m)]


# -- favard-sweep ----------------------------------------------------------

def run_favard_sweep(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "favard-sweep")
    system = parse_preset(cfg.preset)
    timings = {}
    for n in range(cfg.n_max + 1):
        result = favard_profile(system, n, cfg.theta_samples, cfg.quadrature, cfg.merge_eps, cfg.generation_cap, pmap)
        record.add_row(
            n=n,
            theta_samples=result.theta_samples,
            favard=result.favard,
            support_min=result.support_min,
            support_max=result.support_max,
        )
        timings[n] = result.wall_ms

    favs = [row["favard"] for row in record.rows]
    bad = [
        {"n": n + 1, "favard": favs[n + 1], "previous": favs[n]}
        for n in range(len(favs) - 1)
        if favs[n + 1] > favs[n] * (1 + MONOTONE_RTOL)
    ]

    n_mc = min(cfg.n_max, 6)
    mc = buffon_estimate(cached_cells(system, n_mc, cfg.generation_cap), BUFFON_SAMPLES, cfg.rng(RNG_BUFFON))
    deviation = abs(mc.estimate - favs[n_mc]) / mc.standard_error if mc.standard_error > 0 else 0.0

    record.summary.update(
        preset=cfg.preset,
        wall_ms=timings,
        buffon_generation=n_mc,
        buffon_estimate=mc.estimate,
        buffon_standard_error=mc.standard_error,
        buffon_deviation_sigma=deviation,
        counterexamples=bad,
    )
    if deviation > 3:
        logger.warning("Buffon estimate is %.1f standard errors from the quadrature at n=%d", deviation, n_mc)
    _write(record, record.to_frame(), cfg, "favard_sweep.csv")
    return record.finish(passed=not bad)


# -- decay-fit -------------------------------------------------------------

def run_decay_fit(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    sweep = db.latest("favard-sweep", cfg.config_hash) if db else None
    if sweep is None:
        logger.info("no stored favard-sweep for %s, running it first", cfg.config_hash)
        sweep = run_favard_sweep(cfg, pmap, db)
        if db:
            db.insert_record(sweep)

    fit = fit_decay(sweep)
    record = _record(cfg, "decay-fit")
    record.add_row(
        exponent=fit.exponent,
        intercept=fit.intercept,
        prefactor=fit.prefactor,
        residual_norm=fit.residual_norm,
        log_constant=fit.log_constant,
        n_min=min(fit.n),
        n_max=max(fit.n),
    )
    shape_ok = 0 < fit.exponent <= 1 and fit.log_constant > 0
    record.summary.update(source_record=sweep.id, shape_ok=shape_ok)
    if not shape_ok:
        logger.warning("decay shape outside (0, 1]: p=%.4f, c=%.4g", fit.exponent, fit.log_constant)
    _write(record, record.to_frame(), cfg, "decay_fit.csv")

    if db:
        report = ExperimentAnalyzer(db).generate_report(cfg.config_hash)
        path = Path(cfg.output_dir) / "decay_report.json"
        path.write_text(json.dumps({"config_hash": cfg.config_hash, "version": __version__} | report, default=str))
        record.summary.update(ledger_records=report["ledger"]["total_records"])
    return record.finish()


# -- lemma-suite -----------------------------------------------------------

def _check_mass_conservation(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    system = parse_preset(cfg.preset)
    worst = 0.0
    bad = []
    for n in range(min(cfg.n_max, 10) + 1):
        cloud = cached_cells(system, n, cfg.generation_cap)
        for theta in _midpoint_angles(64):
            f = multiplicity(cloud, float(theta), cfg.merge_eps)
            try:
                worst = max(worst, check_mass(f, cloud))
            except InvariantViolation as e:
                bad.append({"n": n, "theta": float(theta), "error": str(e)})
    return not bad, worst, bad


def _check_riesz_domination(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    audit = riesz_audit(cfg.riesz_audit_samples, cfg.rng(RNG_RIESZ), slack=cfg.riesz_slack)
    return audit.violations == 0, audit.worst_excess, audit.counterexamples


def _check_riesz_mean(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    errors = []
    for ell in range(1, 7):
        mean = riesz_period_mean(RieszProduct(1, ell))
        errors.append(abs(mean - (7 / 9) ** ell) / (7 / 9) ** ell)
    bad = [{"ell": i + 1, "relative_error": e} for i, e in enumerate(errors) if e >= 1e-6]
    return not bad, max(errors), bad


def _check_plancherel(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    system = parse_preset(cfg.preset)
    worst = 0.0
    bad = []
    for n in range(min(cfg.n_max, 3) + 1):
        try:
            result = plancherel_check(
                system, n, 0.4, x_scale=cfg.plancherel_x_scale, tol=cfg.plancherel_tol,
                merge_eps=cfg.merge_eps, cap=cfg.generation_cap,
            )
        except PlancherelTruncationError as e:
            bad.append({"n": n, "error": str(e)})
            continue
        worst = max(worst, result.gap)
        if result.gap >= cfg.plancherel_tol:
            bad.append(result.to_dict())
    return not bad, worst, bad


def _check_branch_points(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    ts = (np.arange(1000) + 0.5) / 1000
    bad = []
    for t in ts:
        for c in branch_candidates(float(t), residual_tol=cfg.residual_tol):
            bad.append({"t": float(t), "re_z": c.z.real, "im_z": c.z.imag})
    return not bad, float(len(bad)), bad


def _check_zero_round_trip(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    zeros = find_zeros(0.5, Rect(4.0, 5.0, -1.0, 1.0), cfg.strip_h, cfg.residual_tol)
    if not zeros:
        return False, math.inf, [{"error": "no zero of phi~_{1/2} in [4, 5] x [-1, 1]"}]
    start = zeros[0]
    there = continue_zero(0.5, start, 0.45, m=cfg.m, residual_tol=cfg.residual_tol, strip_h=cfg.strip_h)
    back = continue_zero(0.45, there.endpoint, 0.5, m=cfg.m, residual_tol=cfg.residual_tol, strip_h=cfg.strip_h)
    error = abs(back.endpoint - start)
    ok = abs(start - 4 * math.pi / 3) < 1e-9 and error < cfg.continuation_tol and not (there.truncated or back.truncated)
    detail = {"start": [start.real, start.imag], "return_error": error,
              "truncated": [there.truncated_reason, back.truncated_reason]}
    return ok, error, [] if ok else [detail]


def _check_root_stability(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    audits = [stability_audit(k, cfg.stability_c, cfg.stability_grid) for k in range(1, cfg.m + 1)]
    bad = [a.to_dict() for a in audits if a.violations]
    return not bad, min(a.minimum for a in audits), bad


def _check_critical_uniqueness(cfg: ExperimentConfig, trials: int = CRITICAL_TRIALS, m: int = CRITICAL_M) -> tuple[bool, float, list]:
    """Random rectangles along [3^{-m}, 3^m] never have two critical factors."""
    rng = cfg.rng(RNG_CRITICAL)
    bad = []
    worst = 0
    for _ in range(trials):
        t = float(rng.uniform(0.0, 1.0))
        if abs(t - 0.5) <= 3.0 ** (-m):
            continue
        x0 = float(rng.uniform(3.0 ** (-m), 3.0 ** m))
        rect = Rect.around(complex(x0, 0.0), cfg.tiling_delta)
        found = critical_indices(t, m, rect)
        worst = max(worst, len(found))
        if len(found) > 1:
            bad.append({"t": t, "x0": x0, "critical": sorted(found)})
    return not bad, float(worst), bad


def _check_cetsq_single(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    ratio = cetsq_ratio(FrequencySet(np.array([0.0])))
    ok = abs(ratio - 0.5) < 1e-15
    return ok, ratio, [] if ok else [{"ratio": ratio}]


def _check_stacking(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    system = parse_preset(cfg.preset)
    ratios = []
    bad = []
    for theta in _midpoint_angles(8):
        outcome = stacking_ratio(float(theta), cfg.stacking_n_min, 2, 2, system, cfg.merge_eps, cfg.generation_cap)
        if outcome.vacuous:
            continue
        if not math.isfinite(outcome.ratio):
            bad.append(outcome.to_dict())
        ratios.append(outcome.ratio)
    return not bad, max(ratios, default=0.0), bad


def _check_exponent_ledger(cfg: ExperimentConfig) -> tuple[bool, float, list]:
    ledger = exponent_ledger(cfg.strip_h, betas=(2.0,))
    p_denominator = 1 / ledger.p_max[2.0]
    ok = ledger.alpha_min < 21.86 and abs(1 / ledger.epsilon0_max - 223) <= 1 and abs(p_denominator - 225) <= 1
    if cfg.strip_h == 2.4:
        ok = ok and ledger.M == 5
    return ok, p_denominator, [] if ok else [ledger.to_dict()]


ENERGY_COLUMNS = ["t", "n", "m", "ell", "p1_energy", "ratio_to_3m"]


def energy_table(ell: int, ts: tuple = (0.1, 0.3, 0.7, 0.9), n: int = 8, m: int = 3) -> pd.DataFrame:
    rows = [p1_energy(t, n, m).to_dict() | {"ell": ell} for t in ts]
    return pd.DataFrame(rows).rename(columns={"energy": "p1_energy"})[ENERGY_COLUMNS]


LEMMA_CHECKS = {
    "mass-conservation": _check_mass_conservation,
    "riesz-domination": _check_riesz_domination,
    "riesz-period-mean": _check_riesz_mean,
    "plancherel": _check_plancherel,
    "no-real-branch-points": _check_branch_points,
    "zero-round-trip": _check_zero_round_trip,
    "root-stability": _check_root_stability,
    "unique-critical-factor": _check_critical_uniqueness,
    "cetsq-single-frequency": _check_cetsq_single,
    "stacking-finite": _check_stacking,
    "exponent-ledger": _check_exponent_ledger,
}


def run_lemma_suite(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "lemma-suite")
    failures = {}
    for name, check in LEMMA_CHECKS.items():
        try:
            ok, value, counterexamples = check(cfg)
        except FavardLabError as e:
            ok, value, counterexamples = False, math.nan, [{"error": str(e)}]
        record.add_row(check=name, passed=ok, value=value, counterexamples=len(counterexamples))
        if not ok:
            failures[name] = counterexamples
            logger.error("%s failed (%d counterexamples)", name, len(counterexamples))

    # P1 energy ratios are tracked, not asserted
    _write(record, energy_table(cfg.ell), cfg, "energy.csv")

    if failures:
        path = Path(cfg.output_dir) / "lemma_counterexamples.json"
        path.write_text(json.dumps({"config_hash": cfg.config_hash, "version": __version__, "failures": failures}, default=str))
    record.summary.update(failed=sorted(failures), counterexamples=failures)
    _write(record, record.to_frame(), cfg, "lemma_suite.csv")
    return record.finish(passed=not failures)


# -- zero-trace ------------------------------------------------------------

def _trace_task(args):
    t0, lam0, t1, m, residual_tol, strip_h = args
    try:
        return continue_zero(t0, lam0, t1, m=m, residual_tol=residual_tol, strip_h=strip_h)
    except DomainError as e:
        logger.warning("skipping zero %s: %s", lam0, e)
        return None


def _endpoint_mismatches(traces: list, tol: float, residual_tol: float, strip_h: float) -> list[dict]:
    """Completed traces whose endpoint is not within tol of a zero found afresh at t_end."""
    bad = []
    for i, trace in enumerate(traces):
        if trace.truncated:
            continue
        t_end, end = float(trace.t[-1]), trace.endpoint
        fresh = find_zeros(t_end, Rect.around(end, ENDPOINT_BOX), strip_h, residual_tol)
        distance = min((abs(z - end) for z in fresh), default=math.inf)
        if distance >= tol:
            bad.append({"trace": i, "t_end": t_end, "re_end": end.real, "im_end": end.imag, "distance": distance})
    return bad


def run_zero_trace(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    """
    Continue every zero of phi~ found at trace_t0 in trace_rect up to trace_t1.

    Each completed trace is checked against a fresh zero search at its final t.

    Args:
        cfg: Config; uses trace_t0, trace_t1, trace_rect, m and the tolerances
        pmap: Order-preserving map that spreads the traces over workers
        db: Unused; present for the common command signature

    Returns:
        ExperimentRecord with one row per trace; fails when an endpoint disagrees
        with the fresh search
    """
    record = _record(cfg, "zero-trace")
    t0, t1 = cfg.trace_t0, cfg.trace_t1
    zeros = find_zeros(t0, Rect(*cfg.trace_rect), cfg.strip_h, cfg.residual_tol)
    traces = [tr for tr in pmap(_trace_task, [(t0, z, t1, cfg.m, cfg.residual_tol, cfg.strip_h) for z in zeros]) if tr is not None]

    for i, trace in enumerate(traces):
        row = {
            "trace": i,
            "re_start": trace.lam[0].real,
            "im_start": trace.lam[0].imag,
            "re_end": trace.endpoint.real,
            "im_end": trace.endpoint.imag,
            "t_end": float(trace.t[-1]),
            "samples": len(trace),
            "truncated": trace.truncated_reason or "",
            "velocity_bound": velocity_bound(trace, cfg.m),
        }
        if len(trace) >= 3:
            row.update(g_functions(trace, cfg.m, cfg.g_floor_c).summary())
        record.add_row(**row)

    counts = window_counts(traces, cfg.m, cfg.window_c)
    growth = band_growth(t0, list(range(1, cfg.m + 1)))
    mismatches = _endpoint_mismatches(traces, cfg.continuation_tol, cfg.residual_tol, cfg.strip_h)
    record.summary.update(
        t0=t0,
        t1=t1,
        rect=list(cfg.trace_rect),
        zeros=len(zeros),
        truncated=sum(tr.truncated for tr in traces),
        max_window_count=int(counts.max()) if len(counts) else 0,
        band_growth=growth,
        counterexamples=mismatches,
    )
    write_traces(traces, Path(cfg.output_dir) / "zero_traces.json", cfg.config_hash, __version__)
    _write(record, record.to_frame(), cfg, "zero_trace.csv")
    return record.finish(passed=not mismatches)


# -- tiling-scan -----------------------------------------------------------

def tiling_points(t_samples: int, m_max: int) -> list[tuple[int, float]]:
    """(m, t) pairs for the tiling scan; each m drops its own window |t - 1/2| <= 3^{-m}."""
    return [(m, t) for m in range(1, m_max + 1) for t in _t_grid(t_samples, m)]


def run_tiling_scan(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "tiling-scan")
    rng = cfg.rng(RNG_TILING)
    window = Rect(*TILING_WINDOW)
    zeros_at = {}

    def zeros_for(t: float) -> list[complex]:
        if t not in zeros_at:
            zeros_at[t] = find_zeros(t, window, cfg.strip_h, cfg.residual_tol)
        return zeros_at[t]

    tasks = []
    for m, t in tiling_points(cfg.tiling_t_samples, cfg.tiling_m_max):
        for x0 in sample_centres(zeros_for(t), m, cfg.tiling_zero_samples, rng, cfg.tiling_delta):
            tasks.append((t, m, float(x0), cfg.tiling_delta))

    domination = [
        domination_audit(t, zeros_for(t), k_prime, k_prime, cfg.domination_c, cfg.tiling_delta, cfg.stability_c)
        for t in _t_grid(cfg.tiling_t_samples, cfg.m)
        for k_prime in range(1, cfg.m + 1)
    ]

    scans = pmap(_scan_task, tasks)

    ssv = {}
    for t in _t_grid(cfg.tiling_t_samples, cfg.m):
        report = ssv_scan(t, cfg.m, cfg.epsilon_star, C=cfg.ssv_c)
        ssv[t] = report

    for scan in scans:
        row = scan.to_row()
        row["ssv_interval_count"] = ssv[scan.t].interval_count if scan.m == cfg.m and scan.t in ssv else None
        record.add_row(**row)

    ssv_frame = pd.DataFrame([
        {"t": r.t, "m": r.m, "epsilon_star": r.epsilon_star, "points": r.points,
         "interval_count": r.interval_count, "count_ratio": r.count_ratio,
         "radius": r.radius, "worst_distance": r.worst_distance, "contained": r.contained}
        for r in ssv.values()
    ])
    dom_frame = pd.DataFrame([
        {k: v for k, v in a.to_dict().items() if k != "counterexamples"} for a in domination
    ])

    floor_failures = [s.to_row() for s in scans if not s.cofactor_floor_holds]
    unique_failures = [s.to_row() for s in scans if not s.unique_critical]
    ssv_failures = [{"t": r.t, "worst_distance": r.worst_distance, "radius": r.radius} for r in ssv.values() if not r.contained]
    dom_failures = [c for a in domination for c in a.counterexamples]
    record.summary.update(
        scans=len(scans),
        min_cofactor_ratio=min((s.min_max_cofactor * 3.0 ** s.m for s in scans), default=None),
        ssv_points=int(sum(r.points for r in ssv.values())),
        ssv_max_count_ratio=max((r.count_ratio for r in ssv.values()), default=0.0),
        domination_applicable=int(sum(a.applicable for a in domination)),
        counterexamples={
            "cofactor_floor": floor_failures[:20],
            "unique_critical": unique_failures[:20],
            "ssv_containment": ssv_failures[:20],
            "domination": dom_failures[:20],
        },
    )
    _write(record, record.to_frame(), cfg, "tiling.csv")
    _write(record, ssv_frame, cfg, "ssv.csv")
    _write(record, dom_frame, cfg, "domination.csv")
    passed = not (floor_failures or unique_failures or ssv_failures or dom_failures)
    return record.finish(passed=passed)


# -- cetsq-audit -----------------------------------------------------------

def _cetsq_task(args) -> dict:
    return cetsq_trial(*args)


def run_cetsq_audit(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "cetsq-audit")
    rows = pmap(_cetsq_task, [(cfg.seed, i, cfg.cetsq_max_k) for i in range(cfg.cetsq_trials)])
    for row in rows:
        record.add_row(**row)
    frame = record.to_frame()
    finite = bool(np.isfinite(frame["ratio"]).all())
    record.summary.update(max_ratio=float(frame["ratio"].max()), max_cet_ratio=float(frame["cet_ratio"].max()))
    _write(record, frame, cfg, "cetsq.csv")
    return record.finish(passed=finite)


# -- stacking-audit --------------------------------------------------------

STACKING_LEVELS = (2.0, 3.0, 4.0)
# relative change of C-hat allowed across N
STACKING_SPREAD_TOL = 0.10


def _stacking_task(args) -> list[dict]:
    theta, N, preset, merge_eps, cap = args
    system = parse_preset(preset)
    return [
        stacking_ratio(theta, N, K, M, system, merge_eps, cap).to_dict()
        for K in STACKING_LEVELS for M in STACKING_LEVELS
    ]


def run_stacking_audit(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "stacking-audit")
    system = parse_preset(cfg.preset)
    angles = _midpoint_angles(16)
    tasks = [
        (float(theta), N, cfg.preset, cfg.merge_eps, cfg.generation_cap)
        for N in range(cfg.stacking_n_min, cfg.stacking_n_max + 1)
        for theta in angles
    ]
    for batch in pmap(_stacking_task, tasks):
        for row in batch:
            record.add_row(**row)

    frame = record.to_frame()
    frame["ratio"] = pd.to_numeric(frame["ratio"])
    summary = stacking_summary(frame)
    per_n, spread = c_hat_spread(frame)
    unstable = spread is not None and spread > STACKING_SPREAD_TOL
    if unstable:
        logger.error("C-hat moves by %.1f%% across N = %d..%d", 100 * spread, cfg.stacking_n_min, cfg.stacking_n_max)

    extra = []
    N = cfg.stacking_n_min
    for theta in _midpoint_angles(8):
        for K in STACKING_LEVELS:
            constant = l2_constant(float(theta), K, N, cfg.bad_set_exponent, system, cfg.merge_eps, cfg.generation_cap)
            boot = bootstrap_check(float(theta), N, K, cfg.beta, cfg.bootstrap_c, system, cfg.merge_eps, cfg.generation_cap)
            extra.append(boot.to_dict() | {"l2_constant": constant})

    c_hat = {int(k): (None if pd.isna(v) else float(v)) for k, v in per_n.items()}
    record.summary.update(
        c_hat=c_hat,
        c_hat_spread=spread,
        max_l2_constant=max((e["l2_constant"] for e in extra if e["l2_constant"] is not None), default=None),
        counterexamples=[{"c_hat": c_hat, "spread": spread}] if unstable else [],
    )
    _write(record, frame[["theta", "N", "K", "M", "top", "f_k", "f_m", "ratio"]], cfg, "stacking.csv")
    _write(record, summary, cfg, "stacking_summary.csv")
    _write(record, pd.DataFrame(extra), cfg, "bootstrap.csv")
    finite = bool(np.isfinite(frame["ratio"].dropna()).all())
    return record.finish(passed=finite and not unstable)


# -- degenerate-sweep ------------------------------------------------------

def run_degenerate_sweep(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "degenerate-sweep")
    bad = []
    for delta in cfg.degenerate_deltas:
        triangle = triangle_config(delta)
        audit = jacobian_audit(triangle)
        if audit.violations:
            bad.append(audit.to_dict())
        system = triangle_system(triangle)
        for n in range(cfg.degenerate_n_max + 1):
            result = favard_profile(system, n, cfg.theta_samples, cfg.quadrature, cfg.merge_eps, cfg.generation_cap, pmap)
            record.add_row(
                delta=delta,
                n=n,
                favard=result.favard,
                jacobian_min=audit.min_abs,
                jacobian_max=audit.max_abs,
                jacobian_violations=audit.violations,
            )
    frame = record.to_frame()
    table = degenerate_summary(frame)
    record.summary.update(
        favard_at_n_max={d: float(v) for d, v in table.set_index("n").iloc[-1].items()},
        counterexamples=bad,
    )
    _write(record, frame, cfg, "degenerate.csv")
    _write(record, table, cfg, "degenerate_summary.csv")
    return record.finish(passed=not bad)


# -- exponent-ledger -------------------------------------------------------

def run_exponent_ledger(cfg: ExperimentConfig, pmap: Callable = serial_map, db: Optional[ExperimentDatabase] = None) -> ExperimentRecord:
    record = _record(cfg, "exponent-ledger")
    betas = sorted({2.0, float(cfg.beta)})
    ledger = exponent_ledger(cfg.strip_h, betas)
    for row in ledger.to_frame().to_dict(orient="records"):
        record.add_row(**row)
    cap = 3.0 ** (-ledger.M * cfg.alpha)
    record.summary.update(
        loose_sup_bound=ledger.loose_sup_bound,
        loose_M=ledger.loose_M,
        epsilon_star=cfg.epsilon_star,
        epsilon_star_cap=cap,
        epsilon_star_ok=cfg.epsilon_star < cap,
    )
    _write(record, record.to_frame(), cfg, "ledger.csv")
    return record.finish()


COMMANDS = {
    "favard-sweep": run_favard_sweep,
    "decay-fit": run_decay_fit,
    "lemma-suite": run_lemma_suite,
    "zero-trace": run_zero_trace,
    "tiling-scan": run_tiling_scan,
    "cetsq-audit": run_cetsq_audit,
    "stacking-audit": run_stacking_audit,
    "degenerate-sweep": run_degenerate_sweep,
    "exponent-ledger": run_exponent_ledger,
}


def execute(command: str, settings: RunSettings) -> ExperimentRecord:
    """Run one command in a worker pool, store its record, and raise if any check failed."""
    if command not in COMMANDS:
        raise DomainError(f"unknown command {command!r}; expected one of {sorted(COMMANDS)}")
    cfg = settings.config
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    db = ExperimentDatabase(str(Path(cfg.output_dir) / "experiments.db"))

    with worker_pool(settings.jobs) as pmap:
        record = COMMANDS[command](cfg, pmap, db)
    db.insert_record(record)

    if not record.passed:
        found = record.summary.get("counterexamples") or []
        if isinstance(found, dict):
            found = [{"check": name, "detail": c} for name, items in found.items() for c in items]
        raise InvariantViolation(f"{command} failed under config {cfg.config_hash}", counterexamples=found)
    return record
