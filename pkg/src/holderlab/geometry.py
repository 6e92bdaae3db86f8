"""Tubular-neighborhood charts over height-function boundary patches.

A patch is the graph x3 = a(sigma1, sigma2) of a smooth height function
with analytic first and second derivatives.  Points near the boundary
are addressed by chart coordinates (sigma1, sigma2, s):

    x(sigma, s) = (sigma1, sigma2, a(sigma)) + s * n(sigma)

where n = (d1 a, d2 a, -1)/sqrt(1 + |grad a|^2) is the inward unit
normal (the fluid fills the region below the graph).  The chart
Jacobian J has columns (d_sigma1 x, d_sigma2 x, n); the inverse metric
a_inv = J^-1 J^-T and the volume factor b = |det J| feed the
curvilinear gradient, divergence, and Laplacian in flux form.  The
normal column is unit length, so a_inv has an exact block structure:
entry (3,3) is 1 and the normal-tangential entries vanish, which is
what splits the Laplacian into tangential and straight-line normal
parts.

Derivatives of the metric quantities are taken by centered differences
with step 1e-5 * delta; with analytic patch derivatives this keeps the
FD noise near 1e-10, well inside the 1e-8 identity tolerances used by
the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "SurfacePatch",
    "TubularPoint",
    "MetricData",
    "ChartScalarField",
    "ChartVectorField",
    "make_surface_patch",
    "normal",
    "chart",
    "metric",
    "gradient_curvilinear",
    "divergence_curvilinear",
    "laplacian_curvilinear",
    "tangential_laplacian",
    "normal_laplacian_part",
    "cartesian_scalar_field",
    "cartesian_vector_field",
    "squared_radius_field",
    "make_flat_patch",
    "make_paraboloid_patch",
    "make_saddle_patch",
    "make_sinusoidal_patch",
    "PATCH_BUILDERS",
]

_DET_FLOOR = 1e-8


@dataclass(frozen=True)
class SurfacePatch:
    """Height-function boundary patch with analytic derivatives.

    height(s1, s2) -> float, grad(s1, s2) -> (2,) array, hess(s1, s2)
    -> (2,2) array.  domain is ((s1_min, s1_max), (s2_min, s2_max)) and
    delta the admissible inward depth.  Use :func:`make_surface_patch`,
    which cross-checks the derivatives and scans the chart for
    degeneracy; the raw constructor performs no validation.
    """

    height: Callable[[float, float], float]
    grad: Callable[[float, float], np.ndarray]
    hess: Callable[[float, float], np.ndarray]
    domain: tuple
    delta: float
    name: str = ""


@dataclass(frozen=True)
class TubularPoint:
    """Chart coordinates: surface parameters and inward wall distance."""

    sigma1: float
    sigma2: float
    s: float

    def __post_init__(self):
        if self.s < 0.0:
            raise ValueError(f"s must be nonnegative, got {self.s}")


@dataclass(frozen=True)
class MetricData:
    """Chart Jacobian, inverse metric a_inv = J^-1 J^-T, and b = |det J|."""

    jacobian: np.ndarray
    a_inv: np.ndarray
    b: float


def _check_derivatives(patch: SurfacePatch) -> None:
    (lo1, hi1), (lo2, hi2) = patch.domain
    h = 1e-5 * max(hi1 - lo1, hi2 - lo2)
    for s1 in np.linspace(lo1, hi1, 5):
        for s2 in np.linspace(lo2, hi2, 5):
            g = np.asarray(patch.grad(s1, s2), dtype=float)
            fd_g = np.array(
                [
                    (patch.height(s1 + h, s2) - patch.height(s1 - h, s2)) / (2 * h),
                    (patch.height(s1, s2 + h) - patch.height(s1, s2 - h)) / (2 * h),
                ]
            )
            if not np.allclose(g, fd_g, rtol=1e-5, atol=1e-5):
                raise ValueError("grad is inconsistent with height under FD check")
            H = np.asarray(patch.hess(s1, s2), dtype=float)
            gp1 = np.asarray(patch.grad(s1 + h, s2), dtype=float)
            gm1 = np.asarray(patch.grad(s1 - h, s2), dtype=float)
            gp2 = np.asarray(patch.grad(s1, s2 + h), dtype=float)
            gm2 = np.asarray(patch.grad(s1, s2 - h), dtype=float)
            fd_H = np.column_stack([(gp1 - gm1) / (2 * h), (gp2 - gm2) / (2 * h)])
            if not np.allclose(H, fd_H, rtol=1e-5, atol=1e-5):
                raise ValueError("hess is inconsistent with grad under FD check")
            if not np.allclose(H, H.T, rtol=0, atol=1e-12):
                raise ValueError("hess must be symmetric")


def _scan_degeneracy(patch: SurfacePatch) -> None:
    """Reject the patch if det J vanishes anywhere in the tube.

    J is affine in s at fixed sigma, so det J is a cubic polynomial in
    s; sampling it at four depths and root-finding the cubic catches
    degeneracies between lattice points, including double roots where
    the determinant touches zero without changing sign (the circularly
    symmetric focal point of a bowl-shaped patch is exactly that case).
    """
    (lo1, hi1), (lo2, hi2) = patch.domain
    dets = []
    s_nodes = np.linspace(0.0, patch.delta, 4)
    for s1 in np.linspace(lo1, hi1, 9):
        for s2 in np.linspace(lo2, hi2, 9):
            samples = np.array(
                [np.linalg.det(_jacobian(patch, s1, s2, s)) for s in s_nodes]
            )
            dets.extend(samples)
            coeffs = np.polyfit(s_nodes, samples, 3)
            for root in np.roots(coeffs):
                if abs(root.imag) < 1e-9 and -1e-12 <= root.real <= patch.delta:
                    raise ValueError(
                        "chart degenerates inside the tube: delta exceeds "
                        "the focal distance of the patch"
                    )
    dets = np.asarray(dets)
    if np.min(np.abs(dets)) < _DET_FLOOR or np.min(dets) * np.max(dets) < 0.0:
        raise ValueError(
            "chart degenerates inside the tube: delta exceeds the focal "
            "distance of the patch"
        )


def make_surface_patch(height, grad, hess, domain, delta, name="") -> SurfacePatch:
    """Validated patch constructor.

    Checks grad/hess against centered differences of height on a sample
    lattice, then scans det J over the tube and rejects the patch when
    the determinant falls below 1e-8 in magnitude or changes sign.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    (lo1, hi1), (lo2, hi2) = domain
    if not (hi1 > lo1 and hi2 > lo2):
        raise ValueError("domain rectangle must have positive extent")
    patch = SurfacePatch(height=height, grad=grad, hess=hess,
                         domain=((float(lo1), float(hi1)), (float(lo2), float(hi2))),
                         delta=float(delta), name=name)
    _check_derivatives(patch)
    _scan_degeneracy(patch)
    return patch


def normal(patch: SurfacePatch, sigma1: float, sigma2: float) -> np.ndarray:
    """Inward unit normal (d1 a, d2 a, -1)/sqrt(1 + |grad a|^2)."""
    g = np.asarray(patch.grad(sigma1, sigma2), dtype=float)
    w = math.sqrt(1.0 + g[0] * g[0] + g[1] * g[1])
    return np.array([g[0], g[1], -1.0]) / w


def _normal_jacobian(patch: SurfacePatch, sigma1: float, sigma2: float) -> np.ndarray:
    """3x2 matrix of d n / d sigma_j from the analytic height derivatives."""
    g = np.asarray(patch.grad(sigma1, sigma2), dtype=float)
    H = np.asarray(patch.hess(sigma1, sigma2), dtype=float)
    w = math.sqrt(1.0 + g[0] * g[0] + g[1] * g[1])
    nvec = np.array([g[0], g[1], -1.0]) / w
    dn = np.zeros((3, 2))
    for j in range(2):
        dw = float(g @ H[:, j]) / w
        dn[:2, j] = H[:, j] / w
        dn[:, j] -= nvec * (dw / w)
    return dn


def chart(patch: SurfacePatch, pt: TubularPoint) -> np.ndarray:
    """Cartesian position of the chart point y(sigma) + s n(sigma)."""
    _validate_point(patch, pt)
    base = np.array([pt.sigma1, pt.sigma2, patch.height(pt.sigma1, pt.sigma2)])
    return base + pt.s * normal(patch, pt.sigma1, pt.sigma2)


def _validate_point(patch: SurfacePatch, pt: TubularPoint) -> None:
    (lo1, hi1), (lo2, hi2) = patch.domain
    if not (lo1 <= pt.sigma1 <= hi1 and lo2 <= pt.sigma2 <= hi2):
        raise ValueError(f"({pt.sigma1}, {pt.sigma2}) outside the patch domain")
    if pt.s > patch.delta:
        raise ValueError(f"s={pt.s} exceeds the tube half-width {patch.delta}")


def _jacobian(patch: SurfacePatch, sigma1: float, sigma2: float, s: float) -> np.ndarray:
    g = np.asarray(patch.grad(sigma1, sigma2), dtype=float)
    dn = _normal_jacobian(patch, sigma1, sigma2)
    J = np.empty((3, 3))
    J[:, 0] = np.array([1.0, 0.0, g[0]]) + s * dn[:, 0]
    J[:, 1] = np.array([0.0, 1.0, g[1]]) + s * dn[:, 1]
    J[:, 2] = normal(patch, sigma1, sigma2)
    return J


def _metric_raw(patch: SurfacePatch, sigma1: float, sigma2: float, s: float) -> MetricData:
    J = _jacobian(patch, sigma1, sigma2, s)
    det = np.linalg.det(J)
    if abs(det) < _DET_FLOOR:
        raise ValueError("degenerate chart Jacobian: point past the focal distance")
    Jinv = np.linalg.inv(J)
    return MetricData(jacobian=J, a_inv=Jinv @ Jinv.T, b=abs(det))


def metric(patch: SurfacePatch, pt: TubularPoint) -> MetricData:
    """Jacobian, inverse metric, and volume factor at a chart point."""
    _validate_point(patch, pt)
    return _metric_raw(patch, pt.sigma1, pt.sigma2, pt.s)


@dataclass(frozen=True)
class ChartScalarField:
    """Scalar field of the chart coordinates with exact first partials.

    value(s1, s2, s) -> float; grad(s1, s2, s) -> (3,) array of partials
    with respect to (sigma1, sigma2, s).
    """

    value: Callable
    grad: Callable


@dataclass(frozen=True)
class ChartVectorField:
    """Vector field given by its chart components (v1, v2, v3).

    components(s1, s2, s) -> (3,) array; the physical field is J @ v.
    """

    components: Callable


def gradient_curvilinear(f: ChartScalarField, patch: SurfacePatch, pt: TubularPoint) -> np.ndarray:
    """Cartesian gradient assembled as sum_j J_col_j (a_inv @ chart grad)_j."""
    md = metric(patch, pt)
    gchart = np.asarray(f.grad(pt.sigma1, pt.sigma2, pt.s), dtype=float)
    return md.jacobian @ (md.a_inv @ gchart)


def _h_geom(patch: SurfacePatch) -> float:
    return 1e-5 * patch.delta


def divergence_curvilinear(v: ChartVectorField, patch: SurfacePatch, pt: TubularPoint) -> float:
    """(1/b) sum_i d/dxi_i (b v_i), flux derivatives by centered FD."""
    md = metric(patch, pt)
    h = _h_geom(patch)
    xi = np.array([pt.sigma1, pt.sigma2, pt.s])
    total = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        p_plus, p_minus = xi + e, xi - e
        bp = _metric_raw(patch, *p_plus).b
        bm = _metric_raw(patch, *p_minus).b
        vp = np.asarray(v.components(*p_plus), dtype=float)[i]
        vm = np.asarray(v.components(*p_minus), dtype=float)[i]
        total += (bp * vp - bm * vm) / (2.0 * h)
    return total / md.b


def _flux_laplacian(f: ChartScalarField, patch: SurfacePatch, pt: TubularPoint,
                    directions) -> float:
    md = metric(patch, pt)
    h = _h_geom(patch)
    xi = np.array([pt.sigma1, pt.sigma2, pt.s])
    block = list(directions)
    total = 0.0
    for i in block:
        e = np.zeros(3)
        e[i] = h
        fluxes = []
        for p in (xi + e, xi - e):
            mdp = _metric_raw(patch, *p)
            gp = np.asarray(f.grad(*p), dtype=float)
            fluxes.append(mdp.b * float(mdp.a_inv[i, block] @ gp[block]))
        total += (fluxes[0] - fluxes[1]) / (2.0 * h)
    return total / md.b


def laplacian_curvilinear(f: ChartScalarField, patch: SurfacePatch, pt: TubularPoint) -> float:
    """Full curvilinear Laplacian (1/b) sum_ij d_i(b a_ij d_j f)."""
    return _flux_laplacian(f, patch, pt, (0, 1, 2))


def tangential_laplacian(f: ChartScalarField, patch: SurfacePatch, pt: TubularPoint) -> float:
    """Tangential block (1/b) sum_{i,j<=2} d_i(b a_ij d_j f)."""
    return _flux_laplacian(f, patch, pt, (0, 1))


def normal_laplacian_part(f: ChartScalarField, patch: SurfacePatch, pt: TubularPoint) -> float:
    """(1/b)(d_s b)(d_s f) + d^2_s f, the straight-line normal terms.

    The full Laplacian equals tangential_laplacian plus this quantity
    because the inverse metric carries no normal-tangential coupling.
    """
    md = metric(patch, pt)
    h = _h_geom(patch)
    xi = np.array([pt.sigma1, pt.sigma2, pt.s])
    e = np.array([0.0, 0.0, h])
    b_plus = _metric_raw(patch, *(xi + e)).b
    b_minus = _metric_raw(patch, *(xi - e)).b
    db_ds = (b_plus - b_minus) / (2.0 * h)
    fs_plus = np.asarray(f.grad(*(xi + e)), dtype=float)[2]
    fs_minus = np.asarray(f.grad(*(xi - e)), dtype=float)[2]
    fs = np.asarray(f.grad(*xi), dtype=float)[2]
    fss = (fs_plus - fs_minus) / (2.0 * h)
    return db_ds / md.b * fs + fss


def cartesian_scalar_field(patch: SurfacePatch, value, grad) -> ChartScalarField:
    """Compose a Cartesian scalar F(x), with analytic gradient, with the
    chart: the chart partials are J^T (grad F)(x(xi)), exact."""

    def chart_value(s1, s2, s):
        x = _chart_raw(patch, s1, s2, s)
        return float(value(x))

    def chart_grad(s1, s2, s):
        x = _chart_raw(patch, s1, s2, s)
        J = _jacobian(patch, s1, s2, s)
        return J.T @ np.asarray(grad(x), dtype=float)

    return ChartScalarField(value=chart_value, grad=chart_grad)


def _chart_raw(patch: SurfacePatch, s1: float, s2: float, s: float) -> np.ndarray:
    base = np.array([s1, s2, patch.height(s1, s2)])
    return base + s * normal(patch, s1, s2)


def cartesian_vector_field(patch: SurfacePatch, W) -> ChartVectorField:
    """Pull a Cartesian vector field W(x) back to chart components
    v = J^-1 W(x(xi)); the curvilinear divergence of v then equals the
    Cartesian divergence of W."""

    def components(s1, s2, s):
        x = _chart_raw(patch, s1, s2, s)
        J = _jacobian(patch, s1, s2, s)
        return np.linalg.solve(J, np.asarray(W(x), dtype=float))

    return ChartVectorField(components=components)


def squared_radius_field(patch: SurfacePatch) -> ChartScalarField:
    """|x|^2 composed with the chart; its Laplacian is exactly 6."""
    return cartesian_scalar_field(patch, lambda x: float(x @ x), lambda x: 2.0 * x)


def make_flat_patch(delta: float = 0.2) -> SurfacePatch:
    z = np.zeros(2)
    Z = np.zeros((2, 2))
    return make_surface_patch(
        height=lambda s1, s2: 0.0,
        grad=lambda s1, s2: z,
        hess=lambda s1, s2: Z,
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        delta=delta,
        name="flat",
    )


def make_paraboloid_patch(curvature: float = 0.5, delta: float = 0.2) -> SurfacePatch:
    c = float(curvature)
    return make_surface_patch(
        height=lambda s1, s2: c * (s1 * s1 + s2 * s2),
        grad=lambda s1, s2: np.array([2.0 * c * s1, 2.0 * c * s2]),
        hess=lambda s1, s2: np.array([[2.0 * c, 0.0], [0.0, 2.0 * c]]),
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        delta=delta,
        name="paraboloid",
    )


def make_saddle_patch(coeff: float = 0.4, delta: float = 0.2) -> SurfacePatch:
    c = float(coeff)
    return make_surface_patch(
        height=lambda s1, s2: c * s1 * s2,
        grad=lambda s1, s2: np.array([c * s2, c * s1]),
        hess=lambda s1, s2: np.array([[0.0, c], [c, 0.0]]),
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        delta=delta,
        name="saddle",
    )


def make_sinusoidal_patch(amplitude: float = 0.15, delta: float = 0.15) -> SurfacePatch:
    amp = float(amplitude)
    return make_surface_patch(
        height=lambda s1, s2: amp * math.sin(s1) * math.cos(s2),
        grad=lambda s1, s2: amp * np.array(
            [math.cos(s1) * math.cos(s2), -math.sin(s1) * math.sin(s2)]
        ),
        hess=lambda s1, s2: amp * np.array(
            [
                [-math.sin(s1) * math.cos(s2), -math.cos(s1) * math.sin(s2)],
                [-math.cos(s1) * math.sin(s2), -math.sin(s1) * math.cos(s2)],
            ]
        ),
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        delta=delta,
        name="sinusoidal",
    )


PATCH_BUILDERS = {
    "flat": make_flat_patch,
    "paraboloid": make_paraboloid_patch,
    "saddle": make_saddle_patch,
    "sinusoidal": make_sinusoidal_patch,
}
