import logging
import time

import numpy as np

from ..czset.operations import interval_hull, is_empty
from ..czset.reduction import reduce
from ..utils.errors import EmptySetError
from .stages import admissibility, consistency, data_assimilate, forecast
from .system_model import FilterState, StepDiagnostics

logger = logging.getLogger("Filter")


class _StageClock:
    """Accumulates wall time per stage into a StepDiagnostics."""

    def __init__(self, diag):
        self.diag = diag

    def run(self, stage, fn, *args):
        start = time.perf_counter()
        try:
            return fn(*args)
        finally:
            elapsed = 1e3 * (time.perf_counter() - start)
            self.diag.stage_ms[stage] = self.diag.stage_ms.get(stage, 0.0) + elapsed


def _guarded_intersection(stage, X_in, fn, clock, cfg, solver):
    """
    Runs an intersecting stage and checks its result for emptiness.

    An empty result means the data contradicts the model at this step; the
    stage is skipped, the pre-intersection set is kept and the stage is
    recorded in the diagnostics.
    """
    def attempt():
        try:
            X_out = fn(X_in)
        except EmptySetError:
            return None
        return None if is_empty(X_out, solver) else X_out

    X_out = clock.run(stage, attempt)
    if X_out is None:
        logger.warning(f"k={clock.diag.k}: {stage} produced an empty set, keeping the previous set")
        clock.diag.empty_stages.append(stage)
        X_out = X_in
    if cfg.record_stage_hulls:
        clock.diag.stage_hulls[stage] = interval_hull(X_out, solver)
    return X_out


def _correct(X, y, model, cfg, solver, clock):
    X = _guarded_intersection(
        "assimilation", X, lambda S: data_assimilate(S, y, model.V, model, cfg, solver), clock, cfg, solver)
    if model.XF is not None:
        X = _guarded_intersection(
            "admissibility", X, lambda S: admissibility(S, model.XF), clock, cfg, solver)
    if model.g is not None and cfg.consistency_enabled:
        X = _guarded_intersection(
            "consistency", X, lambda S: consistency(S, model, cfg, solver), clock, cfg, solver)
    return clock.run("reduction", reduce, X, cfg.targets, cfg.contraction_passes, solver)


def _finish(X, diag, started, solver):
    diag.total_ms = 1e3 * (time.perf_counter() - started)
    # hull bookkeeping stays outside the timed region
    hull = interval_hull(X, solver)
    diag.hull_lower, diag.hull_upper = hull.lower, hull.upper
    diag.n_g, diag.n_h = X.n_g, X.n_h
    return diag


def initial_update(X0, y0, model, cfg, solver=None, diagnostics=None):
    """Correction at k = 0: no forecast, X0 goes straight into assimilation."""
    solver = solver if solver is not None else cfg.make_solver()
    diag = diagnostics if diagnostics is not None else StepDiagnostics(k=0)
    started = time.perf_counter()
    X = _correct(X0, y0, model, cfg, solver, _StageClock(diag))
    _finish(X, diag, started, solver)
    return X


def czdc_step(state, u, y, model, cfg, solver=None):
    """
    One forecast/correction/reduction cycle.

    u is the input measured at k-1 and y the measurement at k. Returns a new
    FilterState whose diagnostics list ends with this step.
    """
    solver = solver if solver is not None else cfg.make_solver()
    diag = StepDiagnostics(k=state.k + 1)
    clock = _StageClock(diag)
    started = time.perf_counter()

    X = clock.run("forecast", forecast, state.X, u, model.W, model, cfg, solver)
    if cfg.record_stage_hulls:
        diag.stage_hulls["forecast"] = interval_hull(X, solver)
    X = _correct(X, y, model, cfg, solver, clock)

    _finish(X, diag, started, solver)
    logger.debug(f"k={diag.k}: n_g={diag.n_g} n_h={diag.n_h} {diag.total_ms:.2f} ms")
    return FilterState(X, diag.k, state.diagnostics + [diag])


class CzdcFilter:
    """
    Drives czdc_step over a measurement sequence for one model.
    """
    def __init__(self, model, cfg):
        cfg.validate_for(model)
        self.model = model
        self.cfg = cfg
        self.solver = cfg.make_solver()
        self.state = None
        self.logger = logging.getLogger(f"Filter.{model.name}")

    def initialize(self, y0, X0=None):
        X0 = self.model.X0 if X0 is None else X0
        diag = StepDiagnostics(k=0)
        X = initial_update(X0, y0, self.model, self.cfg, self.solver, diag)
        self.state = FilterState(X, 0, [diag])
        self.logger.info(f"Initialized: n_g={X.n_g}, n_h={X.n_h}, area={diag.area:.4g}")
        return self.state

    def step(self, u, y):
        if self.state is None:
            raise RuntimeError("Filter not initialized; call initialize(y0) first")
        self.state = czdc_step(self.state, u, y, self.model, self.cfg, self.solver)
        last = self.state.last
        if last.empty_stages:
            self.logger.warning(f"k={last.k}: skipped {', '.join(last.empty_stages)}")
        return self.state

    def run(self, inputs, measurements):
        """
        Filters measurements y_0..y_K with inputs u_0..u_{K-1}.

        Returns the list of StepDiagnostics, k = 0 first.
        """
        measurements = [np.asarray(y, dtype=float) for y in measurements]
        if len(inputs) != len(measurements) - 1:
            raise ValueError(f"Need {len(measurements) - 1} inputs for {len(measurements)} measurements, got {len(inputs)}")
        self.initialize(measurements[0])
        for u, y in zip(inputs, measurements[1:]):
            self.step(u, y)
        self.logger.info(f"Filtered {self.state.k} steps, "
                         f"mean step time {np.mean([d.total_ms for d in self.state.diagnostics[1:]] or [0.0]):.2f} ms")
        return self.state.diagnostics

    @property
    def estimate(self):
        return None if self.state is None else self.state.X
