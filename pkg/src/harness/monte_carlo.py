"""
Monte Carlo harness: simulates true trajectories, filters them and scores
the estimates.

Every run draws from its own Philox stream seeded by SeedSequence([seed, run]),
so results do not depend on how runs are spread over worker processes.
"""
import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..czset.constrained_zonotope import ReductionTargets
from ..czset.operations import contains_point, interval_hull
from ..dcprog.enclosure import EnclosureKind
from ..filter.czdc_filter import CzdcFilter
from ..filter.system_model import FilterConfig
from ..interval.interval import set_inflation
from ..lp.simplex import SimplexSolver
from ..models.registry import BenchmarkId, build_model
from ..utils.errors import ConfigError, EmptySetError
from ..utils.settings import Settings

logger = logging.getLogger("Harness")

REJECTION_CAP = 100_000


@dataclass
class RunConfig:
    benchmark: BenchmarkId
    steps: int
    runs: int
    seed: int
    enclosure_kind: EnclosureKind
    phi_c: int
    phi_g: int
    out: Optional[str] = None
    stage_enclosure: Dict[str, str] = field(default_factory=dict)
    consistency_enabled: bool = True
    sample_x0: bool = False
    workers: int = 1

    def __post_init__(self):
        self.benchmark = BenchmarkId(self.benchmark)
        self.enclosure_kind = EnclosureKind.parse(self.enclosure_kind)
        if self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        ReductionTargets(self.phi_c, self.phi_g).check(build_model(self.benchmark).n)

    def filter_config(self, settings):
        return FilterConfig.from_settings(
            settings,
            ReductionTargets(self.phi_c, self.phi_g),
            enclosure_kind=self.enclosure_kind,
            stage_enclosure=dict(self.stage_enclosure),
            consistency_enabled=self.consistency_enabled,
            seed=self.seed,
        )


@dataclass
class RunMetrics:
    t_cpu_ms: float
    a_box: float
    containment_violations: int
    empty_stages: int
    runs: int
    steps: int
    per_run_a_box: List[float] = field(default_factory=list)

    @property
    def passed(self):
        return self.containment_violations == 0 and self.empty_stages == 0

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class Trajectory:
    """x_0..x_K, y_0..y_K and the inputs u_0..u_{K-1} handed to the filter."""
    xs: np.ndarray
    ys: np.ndarray
    us: np.ndarray
    ws: np.ndarray
    vs: np.ndarray


def make_rng(seed, run):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(run)])))


def _is_box(X):
    if X.n_h or X.G.shape[0] != X.G.shape[1]:
        return False
    return not np.any(X.G - np.diag(np.diag(X.G)))


def draw_uniform(X, rng, solver=None):
    """
    Uniform draw from X.

    Axis-aligned boxes are sampled componentwise; anything else by rejection
    from its interval hull, giving up after REJECTION_CAP attempts.
    """
    solver = solver or SimplexSolver()
    if X.n_g == 0:
        return X.c.copy()
    if _is_box(X):
        rad = np.abs(np.diag(X.G))
        return X.c + rng.uniform(-1.0, 1.0, X.n) * rad
    hull = interval_hull(X, solver)
    for _ in range(REJECTION_CAP):
        candidate = rng.uniform(hull.lower, hull.upper)
        if contains_point(X, candidate, solver):
            return candidate
    raise EmptySetError(f"No member of the set found in {REJECTION_CAP} draws")


def simulate_truth(model, rng, k_f, x0=None, sample_x0=False, solver=None):
    """
    Generates x_0..x_{k_f} and measurements with noise uniform on W and V.

    With input noise the filter sees u_k = true_input(k) + w_k, and the
    process evolves with the physical rate because f uses u - w.
    """
    solver = solver or SimplexSolver()
    if x0 is None:
        use_nominal = model.x0_nominal is not None and not (sample_x0 and model.g is None)
        x0 = model.x0_nominal if use_nominal else draw_uniform(model.X0, rng, solver)
    x = np.asarray(x0, dtype=float).copy()

    xs, ys, us, ws, vs = [x], [], [], [], []
    v = draw_uniform(model.V, rng, solver)
    ys.append(model.h.eval(np.concatenate([x, v])))
    vs.append(v)
    for k in range(k_f):
        w = draw_uniform(model.W, rng, solver)
        u = model.input_at(k)
        if model.input_noise:
            u = u + w
        x = model.f.eval(np.concatenate([x, u, w]))
        v = draw_uniform(model.V, rng, solver)
        xs.append(x)
        us.append(u)
        ws.append(w)
        vs.append(v)
        ys.append(model.h.eval(np.concatenate([x, v])))
    return Trajectory(np.array(xs), np.array(ys), np.array(us).reshape(k_f, model.p),
                      np.array(ws), np.array(vs))


def average_box_area(hull_runs):
    """
    Mean over runs and steps of prod_i diam([x]_i).

    hull_runs holds one sequence of (lower, upper) pairs per run.
    """
    per_run = [np.mean([np.prod(np.asarray(hi) - np.asarray(lo)) for lo, hi in hulls]) for hulls in hull_runs]
    return float(np.mean(per_run))


def run_single(run_cfg, settings, run):
    """
    One Monte Carlo run. Returns (rows, summary) with rows in CSV order.

    The model is built here so the function can run in a worker process.
    """
    set_inflation(settings.inflation)
    model = build_model(run_cfg.benchmark)
    cfg = run_cfg.filter_config(settings)
    rng = make_rng(run_cfg.seed, run)
    solver = cfg.make_solver()

    truth = simulate_truth(model, rng, run_cfg.steps, sample_x0=run_cfg.sample_x0, solver=solver)
    czdc = CzdcFilter(model, cfg)

    rows, hulls, step_ms = [], [], []
    violations = empties = 0
    czdc.initialize(truth.ys[0])
    for k in range(run_cfg.steps + 1):
        if k > 0:
            czdc.step(truth.us[k - 1], truth.ys[k])
        diag = czdc.state.last
        contained = contains_point(czdc.state.X, truth.xs[k], solver)
        if not contained:
            violations += 1
            logger.warning(f"Run {run}, k={k}: true state outside the estimate")
        empties += len(diag.empty_stages)
        if k > 0:
            hulls.append((diag.hull_lower, diag.hull_upper))
            step_ms.append(diag.total_ms)
        bounds = np.column_stack([diag.hull_lower, diag.hull_upper]).ravel()
        rows.append([run, k, diag.total_ms, diag.area, int(contained), *bounds])

    summary = {
        "run": run,
        "a_box": average_box_area([hulls]),
        "mean_step_ms": float(np.mean(step_ms)),
        "violations": violations,
        "empty_stages": empties,
    }
    return rows, summary


def csv_header(n):
    bounds = [name for i in range(1, n + 1) for name in (f"lo_{i}", f"hi_{i}")]
    return ["run", "k", "stage_time_ms", "area", "contained", *bounds]


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, n, rows):
    """Floats at 17 significant digits; every column but the wall-clock stage_time_ms repeats bit for bit under a fixed seed."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(csv_header(n))
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _collect(run_cfg, settings):
    results = {}
    if run_cfg.workers == 1 or run_cfg.runs == 1:
        for run in range(run_cfg.runs):
            results[run] = run_single(run_cfg, settings, run)
            logger.info(f"Run {run + 1}/{run_cfg.runs}: A_box={results[run][1]['a_box']:.4g}")
        return results

    with ProcessPoolExecutor(max_workers=run_cfg.workers) as executor:
        futures = {executor.submit(run_single, run_cfg, settings, run): run for run in range(run_cfg.runs)}
        for future in as_completed(futures):
            run = futures[future]
            results[run] = future.result()
            logger.info(f"Run {run + 1}/{run_cfg.runs} finished: A_box={results[run][1]['a_box']:.4g}")
    return results


def run_monte_carlo(run_cfg, settings=None):
    """
    Executes all runs and writes the per-step CSV when run_cfg.out is set.

    Returns (RunMetrics, per-run summaries). Rows are emitted in run order
    whatever the worker count.
    """
    settings = settings or Settings()
    started = time.perf_counter()
    results = _collect(run_cfg, settings)
    ordered = [results[run] for run in range(run_cfg.runs)]
    summaries = [summary for _, summary in ordered]

    metrics = RunMetrics(
        t_cpu_ms=float(np.mean([s["mean_step_ms"] for s in summaries])),
        a_box=float(np.mean([s["a_box"] for s in summaries])),
        containment_violations=sum(s["violations"] for s in summaries),
        empty_stages=sum(s["empty_stages"] for s in summaries),
        runs=run_cfg.runs,
        steps=run_cfg.steps,
        per_run_a_box=[s["a_box"] for s in summaries],
    )

    if run_cfg.out:
        n = build_model(run_cfg.benchmark).n
        write_csv(run_cfg.out, n, [row for rows, _ in ordered for row in rows])
        logger.info(f"Wrote {sum(len(rows) for rows, _ in ordered)} rows to {run_cfg.out}")

    logger.info(f"{run_cfg.benchmark.value}: A_box={metrics.a_box:.6g}, T_cpu={metrics.t_cpu_ms:.3f} ms, "
                f"violations={metrics.containment_violations} ({time.perf_counter() - started:.1f} s)")
    return metrics, summaries


def config_echo(run_cfg):
    d = asdict(run_cfg)
    d["benchmark"] = run_cfg.benchmark.value
    d["enclosure_kind"] = run_cfg.enclosure_kind.value
    return d


def write_summary(path, run_cfg, metrics, summaries, diagnostics=None):
    payload = {
        "config": config_echo(run_cfg),
        "metrics": metrics.to_dict(),
        "runs": summaries,
        "diagnostics": diagnostics,
    }
    with open(path, 'w') as f:
        json.dump(payload, f, indent=4)
    return payload


def output_paths(out):
    root, _ = os.path.splitext(out)
    return f"{root}.summary.json", f"{root}.report.md"
