from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from ..czset.constrained_zonotope import ConstrainedZonotope, ReductionTargets
from ..dcprog.differentiable_map import DcDecomposition, DifferentiableMap
from ..dcprog.enclosure import EnclosureKind
from ..interval.interval import IntervalVector
from ..lp.simplex import SimplexSolver
from ..utils.errors import DimensionMismatchError

STAGES = ("forecast", "assimilation", "admissibility", "consistency", "reduction")


@dataclass(frozen=True)
class SystemModel:
    """
    x_k = f(x_{k-1}, u_{k-1}, w_{k-1}),  y_k = h(x_k, v_k),  g(x_k) = 0,  x_k in XF.

    f acts on z = (x, u, w), h on z = (x, v) and g on x. A noise-affine flag
    means the map is affine in its noise block, so enclosures only need the
    state block.
    """
    name: str
    n: int
    p: int
    q: int
    r: int
    m: int
    f: DifferentiableMap
    h: DifferentiableMap
    W: ConstrainedZonotope
    V: ConstrainedZonotope
    X0: ConstrainedZonotope
    g: Optional[DifferentiableMap] = None
    m_c: int = 0
    XF: Optional[ConstrainedZonotope] = None
    f_noise_affine: bool = False
    h_noise_affine: bool = False
    f_dc: Optional[DcDecomposition] = None
    h_dc: Optional[DcDecomposition] = None
    g_dc: Optional[DcDecomposition] = None
    x0_nominal: Optional[np.ndarray] = None
    # k -> physical input; with input_noise the filter sees true_input(k) + w_k
    true_input: Optional[Callable] = None
    input_noise: bool = False
    operating_box: Optional[IntervalVector] = None

    def __post_init__(self):
        checks = [
            ("f input", self.f.dim_in, self.n + self.p + self.q),
            ("f output", self.f.dim_out, self.n),
            ("h input", self.h.dim_in, self.n + self.r),
            ("h output", self.h.dim_out, self.m),
            ("W", self.W.n, self.q),
            ("V", self.V.n, self.r),
            ("X0", self.X0.n, self.n),
        ]
        if self.g is not None:
            checks += [("g input", self.g.dim_in, self.n), ("g output", self.g.dim_out, self.m_c)]
        if self.XF is not None:
            checks.append(("XF", self.XF.n, self.n))
        for label, dc, dim_in in (("f_dc", self.f_dc, self.f.dim_in),
                                  ("h_dc", self.h_dc, self.h.dim_in),
                                  ("g_dc", self.g_dc, self.n)):
            if dc is not None:
                checks.append((f"{label} input", dc.dim_in, dim_in))
        if self.input_noise:
            checks.append(("input noise (q vs p)", self.q, self.p))
        for label, got, expected in checks:
            if got != expected:
                raise DimensionMismatchError(f"{self.name}: {label} dimension {got}, expected {expected}")

    def input_at(self, k):
        if self.true_input is None:
            return np.zeros(self.p)
        return np.asarray(self.true_input(k), dtype=float).reshape(self.p)


@dataclass(frozen=True)
class FilterConfig:
    """Knobs of one filter run. stage_enclosure overrides enclosure_kind per stage."""
    targets: ReductionTargets
    enclosure_kind: EnclosureKind = EnclosureKind.PARALLELOTOPE
    stage_enclosure: Dict[str, EnclosureKind] = field(default_factory=dict)
    tol_feas: float = 1e-9
    tol_opt: float = 1e-8
    vertex_cap: int = 16
    contraction_passes: int = 1
    convexify_strategy: str = "positive"
    consistency_enabled: bool = True
    record_stage_hulls: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "enclosure_kind", EnclosureKind.parse(self.enclosure_kind))
        object.__setattr__(self, "stage_enclosure",
                           {stage: EnclosureKind.parse(kind) for stage, kind in self.stage_enclosure.items()})
        unknown = set(self.stage_enclosure) - set(STAGES)
        if unknown:
            raise ValueError(f"Unknown stages in stage_enclosure: {sorted(unknown)}")

    @classmethod
    def from_settings(cls, settings, targets, **overrides):
        base = cls(
            targets=targets,
            tol_feas=settings.tol_feas,
            tol_opt=settings.tol_opt,
            vertex_cap=settings.vertex_cap,
            contraction_passes=settings.contraction_passes,
            convexify_strategy=settings.convexify_strategy,
        )
        return replace(base, **overrides)

    def enclosure_for(self, stage):
        return self.stage_enclosure.get(stage, self.enclosure_kind)

    def validate_for(self, model):
        self.targets.check(model.n)

    def make_solver(self):
        return SimplexSolver(self.tol_feas, self.tol_opt)


@dataclass
class StepDiagnostics:
    k: int
    stage_ms: Dict[str, float] = field(default_factory=dict)
    total_ms: float = 0.0
    hull_lower: Optional[np.ndarray] = None
    hull_upper: Optional[np.ndarray] = None
    n_g: int = 0
    n_h: int = 0
    empty_stages: List[str] = field(default_factory=list)
    stage_hulls: Dict[str, IntervalVector] = field(default_factory=dict)

    @property
    def area(self):
        """Product of the hull diameters of the step's output set."""
        return float(np.prod(self.hull_upper - self.hull_lower))


@dataclass
class FilterState:
    X: ConstrainedZonotope
    k: int = 0
    diagnostics: List[StepDiagnostics] = field(default_factory=list)

    @property
    def last(self):
        return self.diagnostics[-1] if self.diagnostics else None
