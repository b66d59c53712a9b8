"""Parabolic rescaling near the singular time and the limiting soliton.

Rescaling a collapsing trajectory by the curvature proxy at base times
approaching the singular time produces a limit: a homogeneous Einstein pair
when the whole space shrinks to a point, and a product of the shrunk fiber
with a flat factor of dimension d2 when only the fiber collapses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import Outcome, forward_outcome_of
from .einstein import EinsteinSet
from .errors import OutOfRange, Unclassified
from .flow import Direction, Trajectory

#: successive rescaled values must agree to this relative tolerance
CAUCHY_RTOL = 1e-3


@dataclass(frozen=True)
class RescaledState:
    """One parabolic rescaling: multiply the metric by the proxy curvature
    at the base time and speed time up by the same factor."""

    t_j: float
    scale: float            # proxy curvature at the base time
    x1: float               # scale * x1(t_j)
    x2: float               # scale * x2(t_j)

    def original_time(self, t_rescaled: float) -> float:
        return self.t_j + t_rescaled / self.scale


@dataclass(frozen=True)
class SolitonLimit:
    kind: str                              # "EinsteinPoint" | "RigidProduct"
    pair: tuple[float, float] | None       # rescaled pair, up to scale
    ratio: float | None                    # pair ratio = limiting direction
    fiber_constant: float | None           # rescaled fiber coefficient
    flat_dim: int | None                   # q, dimension of the flat factor

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "pair": None if self.pair is None else list(self.pair),
            "ratio": self.ratio,
            "fiber_constant": self.fiber_constant,
            "flat_dim": self.flat_dim,
        }


def rescale_at(traj: Trajectory, t_j: float) -> RescaledState:
    """Rescale the trajectory at a sampled base time.

    The rescaled state has proxy curvature exactly one, which is the
    normalisation that makes limits comparable across base times.
    """
    t = traj.t
    lo, hi = min(t[0], t[-1]), max(t[0], t[-1])
    if not (lo <= t_j <= hi):
        raise OutOfRange(f"t_j = {t_j} outside the sampled range [{lo}, {hi}]")
    idx = int(np.argmin(np.abs(t - t_j)))
    scale = float(traj.kappa[idx])
    return RescaledState(
        t_j=float(t[idx]),
        scale=scale,
        x1=scale * float(traj.x1[idx]),
        x2=scale * float(traj.x2[idx]),
    )


def soliton_limit(traj: Trajectory, es: EinsteinSet) -> SolitonLimit:
    """Identify the blow-up limit of a forward collapsing trajectory.

    The limit is read at the last sample after a Cauchy check across the
    final decade of the distance to the singular time: successive rescaled
    values must have settled to the CAUCHY_RTOL level.
    """
    if traj.direction is not Direction.FORWARD:
        raise Unclassified("blow-up limits are read from forward trajectories")
    outcome = forward_outcome_of(traj)
    T = traj.T_estimate if traj.T_estimate is not None else float(traj.t[-1])
    gap = T - traj.t
    idx = np.nonzero((gap > 0) & (gap <= gap[-1] * 10.0))[0]
    if len(idx) < 10:
        raise Unclassified(
            f"only {len(idx)} samples in the final decade; need at least 10")

    q1 = traj.kappa[idx] * traj.x1[idx]
    q2 = traj.kappa[idx] * traj.x2[idx]
    if outcome in (Outcome.SHRINK_TO_POINT, Outcome.SIMULTANEOUS_COLLAPSE):
        _require_cauchy(q1, "rescaled x1")
        _require_cauchy(q2, "rescaled x2")
        pair = (float(q1[-1]), float(q2[-1]))
        return SolitonLimit(
            kind="EinsteinPoint",
            pair=pair,
            ratio=pair[0] / pair[1],
            fiber_constant=None,
            flat_dim=None,
        )
    _require_cauchy(q1, "rescaled fiber coefficient")
    return SolitonLimit(
        kind="RigidProduct",
        pair=None,
        ratio=None,
        fiber_constant=float(q1[-1]),
        flat_dim=traj.coeffs.d2,
    )


def _require_cauchy(values: np.ndarray, label: str) -> None:
    tail = values[-5:]
    rel = np.abs(np.diff(tail)) / np.maximum(np.abs(tail[1:]), 1e-300)
    if not np.all(rel <= CAUCHY_RTOL):
        raise Unclassified(
            f"{label} has not settled: successive changes {rel} exceed "
            f"{CAUCHY_RTOL}")
