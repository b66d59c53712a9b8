"""Invariant Einstein directions, critical directions and scalar-zero rays.

An Einstein direction is a ratio y = x1/x2 along which the flow is a pure
homothety.  In the non-maximal kind these are the positive roots of the
quadratic C - D*y + (A+B)*y^2; in the maximal kind the roots of the cubic
-(B2+C1)*y^3 + A2*y^2 - A1*y + (B1+C2), which are always strictly positive
and at least one of which exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import roots as rt
from .errors import NotAnEinsteinRoot
from .spaces import Coefficients, MaxCoeffs, NonMaxCoeffs

#: refuse root-sensitive evaluations within this distance of a root
ROOT_EXCLUSION = 1e-9


@dataclass(frozen=True)
class EinsteinSet:
    """Sorted positive homothety directions with multiplicities.

    case_label is "a", "b", "c" for the non-maximal quadratic with two, one
    double, or no positive roots, "C0" for the vanishing-constant-term
    family (single simple root D/(A+B)), and "d", "e", "f" for the maximal
    cubic with three, two, or one distinct roots.
    """

    roots: tuple[tuple[float, int], ...]
    case_label: str

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.roots)

    @property
    def count_distinct(self) -> int:
        return len(self.roots)

    def nearest(self, y: float) -> tuple[float, int] | None:
        if not self.roots:
            return None
        return min(self.roots, key=lambda rm: abs(rm[0] - y))

    def on_root(self, y: float, tol: float = ROOT_EXCLUSION) -> float | None:
        """The root y sits on, or None."""
        for r, _ in self.roots:
            if abs(y - r) <= tol * (1.0 + abs(r)):
                return r
        return None


@dataclass(frozen=True)
class CriticalDirections:
    """Unique positive zeros of g1 = -C1 y^3 - A1 y + B1 and
    g2 = B2 y^3 - A2 y^2 - C2, bounding the invariant wedge."""

    y_tilde_1: float
    y_tilde_2: float


@dataclass(frozen=True)
class ScalarZeroDirections:
    """Rays y = const through the origin on which the scalar curvature
    vanishes; they separate the definite-sign regions."""

    positive_roots: tuple[float, ...]
    negative_roots: tuple[float, ...]
    has_zero_root: bool = False


def _nonmax_poly(c: NonMaxCoeffs) -> tuple[float, float, float]:
    return (float(c.A + c.B), -float(c.D), float(c.C))


def quadratic_einstein_roots(c: NonMaxCoeffs) -> EinsteinSet:
    """Positive roots of C - D*y + (A+B)*y^2 with case classification."""
    a2, negD, C = _nonmax_poly(c)
    D = -negD
    if C < 1e-300:  # zero, or so small the lower root underflows
        root = D / a2
        root = rt._newton_polish((a2, negD, 0.0), root, 0.0, math.inf)
        return EinsteinSet(((root, 1),), "C0")
    disc = D * D - 4.0 * C * a2
    center = D / (2.0 * a2)
    separation = math.sqrt(abs(disc)) / a2
    if separation <= rt.MERGE_TOL * (1.0 + center):
        return EinsteinSet(((center, 2),), "b")
    if disc < 0.0:
        return EinsteinSet((), "c")
    pair = rt.quadratic_real_roots(a2, negD, C)
    polished = tuple(
        (rt._newton_polish((a2, negD, C), r, 0.0, math.inf), 1) for r in pair
    )
    for r, _ in polished:
        if r <= 0.0:
            raise AssertionError(f"nonpositive Einstein root {r} from {c}")
        assert rt.residual_ok((a2, negD, C), r)
    return EinsteinSet(polished, "a")


def _max_poly(c: MaxCoeffs) -> tuple[float, float, float, float]:
    return (-float(c.B2 + c.C1), float(c.A2), -float(c.A1), float(c.B1 + c.C2))


def cubic_einstein_roots(c: MaxCoeffs) -> EinsteinSet:
    """All (positive) roots of the maximal homothety cubic."""
    coeffs = _max_poly(c)
    found = rt.cubic_real_roots(coeffs)
    if not found:
        raise AssertionError(f"maximal cubic lost all roots for {c}")
    for r, _ in found:
        if r <= 0.0:
            raise AssertionError(f"nonpositive Einstein root {r} from {c}")
        if not rt.residual_ok(coeffs, r):
            raise AssertionError(f"root residual too large at {r} for {c}")
    label = {3: "d", 2: "e", 1: "f"}[len(found)]
    return EinsteinSet(tuple(found), label)


def einstein_roots(c: Coefficients) -> EinsteinSet:
    if isinstance(c, NonMaxCoeffs):
        return quadratic_einstein_roots(c)
    return cubic_einstein_roots(c)


def einstein_scale_constants(c: Coefficients, root: float) -> tuple[float, float]:
    """Linear decay slopes (k1, k2) of the homothety through direction root.

    Near a shrink-to-point singularity the coefficients vanish as
    x_i(t) = k_i * (T - t); the pair is the unique positive solution of the
    shrink-rate system with k1/k2 = root.
    """
    if isinstance(c, NonMaxCoeffs):
        poly = _nonmax_poly(c)
        if not rt.residual_ok(poly, root, rtol=1e-8):
            raise NotAnEinsteinRoot(f"{root} fails the homothety quadratic for {c}")
        k1 = float(c.C) + float(c.A) * root * root
        k2 = float(c.D) - float(c.B) * root
    else:
        poly = _max_poly(c)
        if not rt.residual_ok(poly, root, rtol=1e-8):
            raise NotAnEinsteinRoot(f"{root} fails the homothety cubic for {c}")
        k1 = float(c.A1) - float(c.B1) / root + float(c.C1) * root * root
        k2 = float(c.A2) - float(c.B2) * root + float(c.C2) / (root * root)
    if k1 <= 0.0 or k2 <= 0.0:
        raise NotAnEinsteinRoot(f"nonpositive decay slopes ({k1}, {k2}) at {root}")
    return (k1, k2)


def critical_directions(c: MaxCoeffs) -> CriticalDirections:
    """Positive zeros of the two per-coordinate sign cubics.

    g1(0) = B1 > 0 and g1 is strictly decreasing, g2(0) = -C2 < 0 and g2 has
    a single positive zero; every Einstein root lies strictly between them.
    """
    A1, B1, C1 = float(c.A1), float(c.B1), float(c.C1)
    A2, B2, C2 = float(c.A2), float(c.B2), float(c.C2)
    g1 = (-C1, 0.0, -A1, B1)
    y1 = rt.hybrid_root(g1, 0.0, B1 / A1 + 1e-300)
    g2 = (B2, -A2, 0.0, -C2)
    y2 = rt.hybrid_root(g2, 0.0, rt.root_bound(g2))
    if not y1 < y2:
        raise AssertionError(f"critical directions out of order: {y1} >= {y2}")
    for r, _ in cubic_einstein_roots(c).roots:
        if not (y1 < r < y2):
            raise AssertionError(f"Einstein root {r} outside ({y1}, {y2})")
    return CriticalDirections(y_tilde_1=y1, y_tilde_2=y2)


def scalar_zero_directions(c: Coefficients) -> ScalarZeroDirections:
    """Directions on which the scalar curvature changes sign."""
    if isinstance(c, NonMaxCoeffs):
        A, B, C, D = (float(c.A), float(c.B), float(c.C), float(c.D))
        d1, d2 = c.d1, c.d2
        if C == 0.0:
            return ScalarZeroDirections(
                positive_roots=(2.0 * D / B,), negative_roots=(),
                has_zero_root=True,
            )
        # quadratic in y: A*d1*y^2 - D*d2*y - C*d1 = 0
        pair = rt.quadratic_real_roots(A * d1, -D * d2, -C * d1)
        neg, pos = pair[0], pair[1]
        if not (neg < 0.0 < pos):
            raise AssertionError(f"sign pattern of scalar zeros broken: {pair}")
        if not D / B < pos:
            raise AssertionError(
                f"positive scalar zero {pos} below the stationary ray {D / B}"
            )
        return ScalarZeroDirections(positive_roots=(pos,), negative_roots=(neg,))
    d1, d2 = c.d1, c.d2
    coeffs = (
        -0.25 * d2 * float(c.B2),
        0.5 * d2 * float(c.A2),
        0.5 * d1 * float(c.A1),
        -0.25 * d1 * float(c.B1),
    )
    found = rt.cubic_real_roots(coeffs)
    pos = tuple(r for r, _ in found if r > 0.0)
    neg = tuple(r for r, _ in found if r < 0.0)
    if len(pos) != 2 or len(neg) != 1:
        raise AssertionError(
            f"maximal scalar-zero cubic must have two positive and one "
            f"negative root, got {found}"
        )
    return ScalarZeroDirections(positive_roots=pos, negative_roots=neg)
