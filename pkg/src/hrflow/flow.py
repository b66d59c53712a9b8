"""Vector fields, curvature diagnostics and trajectory integration.

The flow of invariant metrics reduces to a planar system in the metric
coefficients (x1, x2) on the two isotropy summands.  Forward integration
runs until a coefficient reaches the collapse threshold; backward
integration probes ancient existence by reversing the vector field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import stepper
from .einstein import EinsteinSet, einstein_roots
from .errors import DomainError, NonpositiveC, OnRoot, SpaceModelError
from .spaces import (
    Coefficients,
    GeneralSpace,
    MaxCoeffs,
    NonMaxCoeffs,
    TwoSummandSpace,
    derive_coeffs,
)


class Direction(Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


class Termination(Enum):
    COLLAPSE_X1 = "CollapseX1"
    COLLAPSE_X2 = "CollapseX2"
    COLLAPSE_BOTH = "CollapseBoth"
    HORIZON_REACHED = "HorizonReached"
    STEP_LIMIT = "StepLimit"

    @property
    def is_collapse(self) -> bool:
        return self in (Termination.COLLAPSE_X1, Termination.COLLAPSE_X2,
                        Termination.COLLAPSE_BOTH)


@dataclass(frozen=True)
class MetricState:
    """Point of the phase space: metric coefficients at a time stamp."""

    t: float
    x1: float
    x2: float

    @property
    def y(self) -> float:
        return self.x1 / self.x2


@dataclass(frozen=True)
class IntegrationOptions:
    direction: Direction = Direction.FORWARD
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    collapse_epsilon: float = 1e-8
    max_time: float = 1e3
    max_steps: int = 500_000
    sample_stride: int = 1
    # fraction of a shrinking coordinate a single step may remove; keeps the
    # sampled tail dense in decades of the distance to the singular time
    # (0.15 yields about fourteen samples per decade)
    approach_factor: float = 0.15
    # step ceiling grows with elapsed time, bounding sample spacing per decade
    step_growth_cap: float = 0.1
    # a collapse counts as simultaneous when the co-vanishing coordinate is
    # within this factor of the threshold at the event
    simultaneous_factor: float = 1e4
    # fixed-step fourth-order fallback for regression runs when set
    fixed_step: float | None = None

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0 and 0.0 < self.abs_tol < 1.0):
            raise ValueError("tolerances must lie in (0, 1)")
        if self.collapse_epsilon <= 0.0:
            raise ValueError("collapse_epsilon must be positive")

    def reversed(self) -> "IntegrationOptions":
        other = (Direction.BACKWARD if self.direction is Direction.FORWARD
                 else Direction.FORWARD)
        return replace(self, direction=other)


@dataclass
class Trajectory:
    """Sampled solution with per-sample curvature diagnostics."""

    direction: Direction
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray
    R: np.ndarray
    kappa: np.ndarray
    first_integral: np.ndarray
    termination: Termination
    T_estimate: float | None
    final_rhs: tuple[float, float]
    t0: float
    coeffs: Coefficients
    options: IntegrationOptions
    einstein: EinsteinSet = field(repr=False, default=None)

    @property
    def n_samples(self) -> int:
        return len(self.t)

    def state(self, idx: int) -> MetricState:
        return MetricState(float(self.t[idx]), float(self.x1[idx]),
                           float(self.x2[idx]))

    @property
    def states(self) -> list[MetricState]:
        return [self.state(i) for i in range(self.n_samples)]

    @property
    def final_state(self) -> MetricState:
        return self.state(-1)

    @property
    def elapsed(self) -> np.ndarray:
        """|t - t0|, the nonnegative integration time."""
        return np.abs(self.t - self.t0)

    def y_monotone_within(self, slack: float = 1e-9) -> bool:
        dy = np.diff(self.y)
        scale = slack * (1.0 + float(np.max(np.abs(self.y))))
        return bool(np.all(dy >= -scale) or np.all(dy <= scale))

    CSV_HEADER = "t,x1,x2,y,R,kappa,first_integral"

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.CSV_HEADER + "\n")
            lam = self.first_integral
            for i in range(self.n_samples):
                cells = [format(v, ".17g") for v in
                         (self.t[i], self.x1[i], self.x2[i], self.y[i],
                          self.R[i], self.kappa[i])]
                cells.append("" if math.isnan(lam[i]) else format(lam[i], ".17g"))
                fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# vector fields


def rhs_general(x, space: GeneralSpace):
    """General flow field for l summands, straight from the table."""
    from .spaces import validate

    l = space.l
    if len(x) != l:
        raise DomainError(f"state length {len(x)} does not match l = {l}")
    for v in x:
        if v <= 0:
            raise DomainError(f"metric coefficients must be positive: {x}")
    validate(space).raise_if_invalid()
    out = []
    for i in range(1, l + 1):
        di = space.d[i - 1]
        xi = x[i - 1]
        interact = 0.0
        self_sq = 0.0
        for j in range(1, l + 1):
            for k in range(1, l + 1):
                tij = float(space.t(i, j, k))
                if tij == 0.0:
                    continue
                interact += tij * x[k - 1] / x[j - 1]
                self_sq += tij * xi * xi / (x[j - 1] * x[k - 1])
        out.append(-float(space.b[i - 1]) + interact / di - self_sq / (2 * di))
    return tuple(out)


def make_rhs(c: Coefficients):
    """Closure (x1, x2) -> (x1', x2') for the planar system."""
    if isinstance(c, NonMaxCoeffs):
        A, B, C, D = float(c.A), float(c.B), float(c.C), float(c.D)

        def f(x1: float, x2: float):
            y = x1 / x2
            return (-C - A * y * y, -D + B * y)

        return f
    A1, B1, C1 = float(c.A1), float(c.B1), float(c.C1)
    A2, B2, C2 = float(c.A2), float(c.B2), float(c.C2)

    def g(x1: float, x2: float):
        y = x1 / x2
        return (-A1 + B1 / y - C1 * y * y, -A2 + B2 * y - C2 / (y * y))

    return g


def rhs_two(state: MetricState, c: Coefficients) -> tuple[float, float]:
    """Planar vector field at a state; the two kinds share the signature."""
    if isinstance(c, NonMaxCoeffs):
        if state.x2 <= 0:
            raise DomainError(f"x2 must be positive: {state}")
    else:
        if state.x1 <= 0 or state.x2 <= 0:
            raise DomainError(f"coefficients must be positive: {state}")
    return make_rhs(c)(state.x1, state.x2)


def scalar_curvature(state: MetricState, c: Coefficients) -> float:
    """Scalar curvature of the invariant metric at the state."""
    if state.x1 <= 0 or state.x2 <= 0:
        raise DomainError(f"coefficients must be positive: {state}")
    return float(_scalar_curvature_arrays(
        np.asarray(state.x1), np.asarray(state.x2), c))


def _scalar_curvature_arrays(x1, x2, c: Coefficients):
    if isinstance(c, NonMaxCoeffs):
        A, B, C, D = float(c.A), float(c.B), float(c.C), float(c.D)
        y = x1 / x2
        return (C * c.d1 / 2 + D * c.d2 / 2 * y - A * c.d1 / 2 * y * y) / x1
    A1, B1 = float(c.A1), float(c.B1)
    A2, B2 = float(c.A2), float(c.B2)
    return (A1 * c.d1 / (2 * x1) + c.d2 * A2 / (2 * x2)
            - c.d1 / 4 * B1 * x2 / (x1 * x1) - c.d2 / 4 * B2 * x1 / (x2 * x2))


def curvature_proxy(state: MetricState, c: Coefficients) -> float:
    """Homogeneity minus-one curvature stand-in used for type decisions.

    kappa = 1/x1 + 1/x2 + x1/x2^2 (+ x2/x1^2 in the maximal kind, where the
    extra interaction term produces that curvature contribution).  It scales
    like 1/c under the homothety g -> c*g, matching the curvature norm.
    """
    if state.x1 <= 0 or state.x2 <= 0:
        raise DomainError(f"coefficients must be positive: {state}")
    return float(_kappa_arrays(np.asarray(state.x1), np.asarray(state.x2), c))


def _kappa_arrays(x1, x2, c: Coefficients):
    w2 = 1.0 if isinstance(c, MaxCoeffs) else 0.0
    return 1.0 / x1 + 1.0 / x2 + x1 / (x2 * x2) + w2 * x2 / (x1 * x1)


# ---------------------------------------------------------------------------
# first integrals of the non-maximal flow


def first_integral(state: MetricState, c: NonMaxCoeffs,
                   es: EinsteinSet | None = None) -> float | None:
    """Conserved quantity of the non-maximal flow, when one exists.

    With two homothety directions y1 < y2 the flow conserves
    (1/x2) * |y - y1|^p1 * |y2 - y|^p2; with a double direction it conserves
    (1/x2) * exp(-(D - y) / ((A+B)(y - ybar))) * |y - ybar|^(-1/(A+B)).
    Returns None when no positive direction pair exists.
    """
    if not isinstance(c, NonMaxCoeffs):
        raise SpaceModelError("first integrals exist only for the non-maximal kind")
    if es is None:
        es = einstein_roots(c)
    if es.case_label not in ("a", "b"):
        return None
    hit = es.on_root(state.y)
    if hit is not None:
        raise OnRoot(f"y = {state.y} is within tolerance of the root {hit}")
    val = _first_integral_arrays(
        np.asarray(state.x2, dtype=float), np.asarray(state.y, dtype=float),
        c, es)
    return float(val)


def _first_integral_arrays(x2, y, c: NonMaxCoeffs, es: EinsteinSet):
    A, B, D = float(c.A), float(c.B), float(c.D)
    s = A + B
    if es.case_label == "a":
        y1, y2 = es.values
        ratio = (D - B * y2) / (y2 - y1)
        p1 = -(B + ratio) / s
        p2 = ratio / s
        with np.errstate(divide="ignore", over="ignore"):
            return (np.abs(y - y1) ** p1) * (np.abs(y2 - y) ** p2) / x2
    ybar = es.values[0]
    with np.errstate(divide="ignore", over="ignore"):
        return (np.exp(-(D - y) / (s * (y - ybar)))
                * np.abs(y - ybar) ** (-1.0 / s)) / x2


# ---------------------------------------------------------------------------
# trajectory integration


def as_coefficients(model) -> Coefficients:
    if isinstance(model, (NonMaxCoeffs, MaxCoeffs)):
        return model
    if isinstance(model, TwoSummandSpace):
        return derive_coeffs(model)
    raise SpaceModelError(
        f"cannot integrate {type(model).__name__}; need a two-summand space "
        "or derived coefficients"
    )


def integrate(model, init: MetricState,
              opts: IntegrationOptions | None = None) -> Trajectory:
    """Integrate the planar flow from init until collapse, horizon or budget.

    Backward runs integrate the reversed field in the elapsed variable and
    report decreasing time stamps.  Collapse events are localised to within
    1e-10 in time; for collapse endings the singular-time estimate comes
    from linear extrapolation of the vanishing coordinate, which vanishes
    linearly along these flows.
    """
    opts = opts or IntegrationOptions()
    c = as_coefficients(model)
    eps = opts.collapse_epsilon
    if min(init.x1, init.x2) <= eps:
        raise DomainError(
            f"initial state {init} is already at the collapse threshold {eps}")
    fwd = make_rhs(c)
    backward = opts.direction is Direction.BACKWARD
    if backward:
        def f(x1, x2):
            d1, d2 = fwd(x1, x2)
            return (-d1, -d2)
    else:
        f = fwd

    raw = stepper.run_adaptive(
        f, (init.x1, init.x2), opts.max_time,
        rtol=opts.rel_tol, atol=opts.abs_tol, eps=eps,
        max_steps=opts.max_steps, approach_factor=opts.approach_factor,
        step_growth_cap=opts.step_growth_cap, stride=opts.sample_stride,
        fixed_step=opts.fixed_step,
    )

    sgn = -1.0 if backward else 1.0
    s = np.asarray(raw.s)
    x1 = np.asarray(raw.x1)
    x2 = np.asarray(raw.x2)
    t = init.t + sgn * s
    y = x1 / x2

    termination, t_est = _terminal_info(raw, c, opts, init.t, sgn)
    es = einstein_roots(c)
    lam = np.full_like(x1, np.nan)
    if isinstance(c, NonMaxCoeffs) and es.case_label in ("a", "b"):
        guard = np.ones_like(y, dtype=bool)
        for r, _ in es.roots:
            guard &= np.abs(y - r) > 1e-9 * (1.0 + abs(r))
        if np.any(guard):
            lam[guard] = _first_integral_arrays(x2[guard], y[guard], c, es)

    return Trajectory(
        direction=opts.direction,
        t=t, x1=x1, x2=x2, y=y,
        R=_scalar_curvature_arrays(x1, x2, c),
        kappa=_kappa_arrays(x1, x2, c),
        first_integral=lam,
        termination=termination,
        T_estimate=t_est,
        final_rhs=(sgn * raw.final_rhs[0], sgn * raw.final_rhs[1]),
        t0=init.t,
        coeffs=c,
        options=opts,
        einstein=es,
    )


def _terminal_info(raw: stepper.RawRun, c: Coefficients,
                   opts: IntegrationOptions, t0: float, sgn: float):
    if raw.status == "horizon":
        return Termination.HORIZON_REACHED, None
    if raw.status == "step_limit":
        return Termination.STEP_LIMIT, None
    eps = opts.collapse_epsilon
    u = (raw.x1[-1], raw.x2[-1])
    near = eps * opts.simultaneous_factor
    crossed = raw.event_coord if raw.event_coord is not None else (
        0 if u[0] <= u[1] else 1)
    if u[1 - crossed] <= near:
        term = Termination.COLLAPSE_BOTH
    elif crossed == 0:
        term = Termination.COLLAPSE_X1
    else:
        term = Termination.COLLAPSE_X2
    # linear extrapolation of the coordinate that crossed the threshold
    xv, slope = u[crossed], raw.final_rhs[crossed]
    t_est = None
    if slope < 0.0:
        s_zero = raw.s[-1] + xv / -slope
        t_est = t0 + sgn * s_zero
    return term, t_est


# ---------------------------------------------------------------------------
# isotropy irreducible spaces: the flow in closed form


@dataclass(frozen=True)
class IrreducibleFlow:
    """Closed-form flow x(t) = x0 - C*t on a one-summand space.

    Shrinks to a point at T = x0 / C (a type I singularity) and extends to
    all earlier times as a type I ancient solution.
    """

    C: float
    T: float
    x0: float

    singular_type = "TypeI"
    ancient_type = "TypeI"

    def value(self, t: float) -> float:
        if t >= self.T:
            raise DomainError(f"flow is defined on (-inf, {self.T}), got {t}")
        return self.x0 - self.C * t

    __call__ = value


def irreducible_flow(b: float, d: int, t111: float, x0: float) -> IrreducibleFlow:
    """Closed-form shrinking of an isotropy irreducible space.

    The single coefficient obeys x' = -(b - [111]/(2d)), a strictly negative
    constant for any effective table.
    """
    if x0 <= 0:
        raise DomainError(f"initial coefficient must be positive: {x0}")
    C = float(b) - float(t111) / (2 * d)
    if C <= 0:
        raise NonpositiveC(f"b - [111]/(2d) = {C} must be positive")
    return IrreducibleFlow(C=C, T=float(x0) / C, x0=float(x0))
