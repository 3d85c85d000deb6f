"""Finite-difference residual engine for arbitrary field evaluators.

Verifies that a given field actually satisfies the half-space system by
measuring discrete residuals: a second-order central Laplacian for the
interior equations and a second-order one-sided stencil for the boundary
flux.  Nothing here solves a PDE; fields are only checked.

Field evaluators map point batches (k, N) to component values (k, m) and
must be pure; residual collection is a plain max-reduction, so reports do
not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StencilOutOfDomain
from .exponent_system import EllipticSystemSpec

__all__ = [
    "ResidualReport",
    "ConvergenceReport",
    "fd_laplacian",
    "fd_normal_derivative",
    "residuals_at_points",
    "residual_sweep",
    "convergence_order",
    "fit_loglog_slope",
]

# Residual supremum below this floor (relative to the largest level) is
# rounding noise, not a convergence signal.
DEGENERATE_FLOOR = 1e-13


@dataclass
class ResidualReport:
    """Sup-norm residuals over a sample set, with locations and grid metadata."""

    sup_interior: np.ndarray
    sup_boundary: np.ndarray
    argmax_interior: np.ndarray
    argmax_boundary: np.ndarray
    h: float
    n_interior: int
    n_boundary: int

    def to_dict(self) -> dict:
        return {
            "sup_interior": self.sup_interior.tolist(),
            "sup_boundary": self.sup_boundary.tolist(),
            "argmax_interior": self.argmax_interior.tolist(),
            "argmax_boundary": self.argmax_boundary.tolist(),
            "h": self.h,
            "n_interior": self.n_interior,
            "n_boundary": self.n_boundary,
        }


@dataclass
class ConvergenceReport:
    """Log-log slopes of sup residuals versus step size.

    ``slope`` is the per-component order of the combined (interior and
    boundary) sup; that is the contract value.  Separate interior and
    boundary slopes are kept as diagnostics: one-sided boundary stencils
    superconverge on profiles even in the normal coordinate, which shows
    up there and only there.
    """

    h_list: np.ndarray
    sup_interior: np.ndarray  # (len(h_list), m)
    sup_boundary: np.ndarray
    slope: np.ndarray  # (m,), nan where degenerate
    degenerate: np.ndarray  # (m,) bool
    slope_interior: np.ndarray
    slope_boundary: np.ndarray
    degenerate_interior: np.ndarray
    degenerate_boundary: np.ndarray

    def to_dict(self) -> dict:
        return {
            "h_list": self.h_list.tolist(),
            "sup_interior": self.sup_interior.tolist(),
            "sup_boundary": self.sup_boundary.tolist(),
            "slope": self.slope.tolist(),
            "degenerate": self.degenerate.tolist(),
            "slope_interior": self.slope_interior.tolist(),
            "slope_boundary": self.slope_boundary.tolist(),
            "degenerate_interior": self.degenerate_interior.tolist(),
            "degenerate_boundary": self.degenerate_boundary.tolist(),
        }


def fd_laplacian(f, y: np.ndarray, h: float, min_last: float | None = 0.0) -> float:
    """Second-order central Laplacian of a scalar field at one point.

    ``f`` maps (k, N) to (k,).  With ``min_last`` set (default 0, the
    half-space), the lower stencil point in the last coordinate must stay
    inside the domain; pass ``min_last=None`` for fields on all of R^N.
    """
    y = np.asarray(y, dtype=float)
    N = y.shape[0]
    if min_last is not None and y[-1] - h < min_last:
        raise StencilOutOfDomain(
            f"central stencil at last coordinate {y[-1]} with h={h} leaves the domain"
        )
    pts = np.tile(y, (2 * N + 1, 1))
    for a in range(N):
        pts[1 + 2 * a, a] += h
        pts[2 + 2 * a, a] -= h
    vals = np.asarray(f(pts), dtype=float)
    return float((np.sum(vals[1:]) - 2 * N * vals[0]) / h**2)


def fd_normal_derivative(f, yprime: np.ndarray, h: float) -> float:
    """One-sided second-order derivative into the domain at a boundary point."""
    yprime = np.asarray(yprime, dtype=float)
    pts = np.tile(yprime, (3, 1))
    pts[1, -1] += h
    pts[2, -1] += 2 * h
    vals = np.asarray(f(pts), dtype=float)
    return float((-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h))


def _batched_laplacian(u, points: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central Laplacian of all components at many points; returns (lap, center values)."""
    k, N = points.shape
    stencil = np.tile(points[:, None, :], (1, 2 * N + 1, 1))
    for a in range(N):
        stencil[:, 1 + 2 * a, a] += h
        stencil[:, 2 + 2 * a, a] -= h
    vals = np.asarray(u(stencil.reshape(-1, N)), dtype=float)
    m = vals.shape[1]
    vals = vals.reshape(k, 2 * N + 1, m)
    lap = (vals[:, 1:, :].sum(axis=1) - 2 * N * vals[:, 0, :]) / h**2
    return lap, vals[:, 0, :]


def residuals_at_points(
    spec: EllipticSystemSpec,
    u,
    interior_points: np.ndarray,
    boundary_points: np.ndarray,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point discrete residuals (interior (k, m), boundary (kb, m))."""
    interior_points = np.atleast_2d(np.asarray(interior_points, dtype=float))
    boundary_points = np.atleast_2d(np.asarray(boundary_points, dtype=float))
    if interior_points.size and np.min(interior_points[:, -1]) - h < 0:
        raise StencilOutOfDomain(
            f"interior points need last coordinate >= h={h}; "
            f"got minimum {np.min(interior_points[:, -1])}"
        )

    if interior_points.size:
        lap, center = _batched_laplacian(u, interior_points, h)
        res_int = lap + np.exp(np.log(center) @ spec.A.T)
    else:
        res_int = np.zeros((0, spec.m))

    if boundary_points.size:
        kb, N = boundary_points.shape
        stencil = np.tile(boundary_points[:, None, :], (1, 3, 1))
        stencil[:, 1, -1] += h
        stencil[:, 2, -1] += 2 * h
        vals = np.asarray(u(stencil.reshape(-1, N)), dtype=float).reshape(kb, 3, -1)
        dN = (-3 * vals[:, 0, :] + 4 * vals[:, 1, :] - vals[:, 2, :]) / (2 * h)
        res_bdy = dN - spec.c * np.exp(np.log(vals[:, 0, :]) @ spec.B.T)
    else:
        res_bdy = np.zeros((0, spec.m))
    return res_int, res_bdy


def _lattice(box: np.ndarray, n_per_axis: int, last_min: float) -> np.ndarray:
    axes = []
    for a in range(box.shape[0]):
        lo, hi = box[a]
        if a == box.shape[0] - 1:
            lo = max(lo, last_min)
        axes.append(np.linspace(lo, hi, n_per_axis))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def residual_sweep(
    spec: EllipticSystemSpec,
    u,
    box: np.ndarray,
    n_per_axis: int,
    h: float,
    interior_margin: float | None = None,
) -> ResidualReport:
    """Sup residuals of a field over interior and boundary lattices of a box.

    ``box`` is (N, 2) rows of (lo, hi) inside the closed half-space.  The
    interior lattice keeps its last coordinate at least ``interior_margin``
    (default ``h``) so central stencils stay in the domain; pinning the
    margin across several ``h`` values keeps the lattice identical for
    convergence studies.  Boundary residuals are evaluated on the lattice
    of the ``y_N = 0`` face.
    """
    box = np.asarray(box, dtype=float)
    N = int(spec.N)
    if box.shape != (N, 2):
        raise ValueError(f"box must have shape {(N, 2)}")
    if box[-1, 0] < 0:
        raise StencilOutOfDomain("box extends below the boundary hyperplane")
    margin = h if interior_margin is None else interior_margin
    interior = _lattice(box, n_per_axis, last_min=max(box[-1, 0], margin))
    tangential = _lattice(box[:-1], n_per_axis, last_min=-np.inf)
    boundary = np.hstack([tangential, np.zeros((tangential.shape[0], 1))])

    res_int, res_bdy = residuals_at_points(spec, u, interior, boundary, h)
    abs_int = np.abs(res_int)
    abs_bdy = np.abs(res_bdy)
    idx_int = np.argmax(abs_int, axis=0)
    idx_bdy = np.argmax(abs_bdy, axis=0)
    return ResidualReport(
        sup_interior=abs_int.max(axis=0),
        sup_boundary=abs_bdy.max(axis=0),
        argmax_interior=interior[idx_int],
        argmax_boundary=boundary[idx_bdy],
        h=float(h),
        n_interior=interior.shape[0],
        n_boundary=boundary.shape[0],
    )


def fit_loglog_slope(h_list: np.ndarray, sups: np.ndarray) -> float:
    """Least-squares slope of log(sup) against log(h)."""
    return float(np.polyfit(np.log(np.asarray(h_list, float)), np.log(np.asarray(sups, float)), 1)[0])


def convergence_from_sups(h_list: np.ndarray, sups: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-component slopes with degeneracy flags; sups is (len(h_list), m)."""
    h_list = np.asarray(h_list, dtype=float)
    sups = np.asarray(sups, dtype=float)
    m = sups.shape[1]
    slopes = np.full(m, np.nan)
    degenerate = np.zeros(m, dtype=bool)
    for i in range(m):
        col = sups[:, i]
        floor = DEGENERATE_FLOOR * max(1.0, float(col.max()))
        if np.any(col <= floor):
            degenerate[i] = True
            continue
        slopes[i] = fit_loglog_slope(h_list, col)
    return slopes, degenerate


def convergence_order(
    spec: EllipticSystemSpec,
    u,
    box: np.ndarray,
    h_list: np.ndarray,
    n_per_axis: int = 8,
) -> ConvergenceReport:
    """Fitted order of the discrete residuals of a field over a shrinking-h study.

    The lattice is held fixed across ``h`` (margin pinned to the largest
    step) so only the stencil changes.  Components whose residuals sit at
    the rounding floor are flagged degenerate instead of fitted.  ``u``
    may be a field evaluator or :class:`~halfspace_bubbles.bubble_family.BubbleParams`.
    """
    if not callable(u):
        from .bubble_family import bubble_field

        u = bubble_field(u)
    h_list = np.asarray(h_list, dtype=float)
    if h_list.size < 3 or np.any(np.diff(h_list) >= 0):
        raise ValueError("h_list must be strictly decreasing with at least 3 entries")
    margin = float(h_list[0])
    sups_i, sups_b = [], []
    for h in h_list:
        report = residual_sweep(spec, u, box, n_per_axis, float(h), interior_margin=margin)
        sups_i.append(report.sup_interior)
        sups_b.append(report.sup_boundary)
    sups_i = np.asarray(sups_i)
    sups_b = np.asarray(sups_b)
    slope_c, degen_c = convergence_from_sups(h_list, np.maximum(sups_i, sups_b))
    slope_i, degen_i = convergence_from_sups(h_list, sups_i)
    slope_b, degen_b = convergence_from_sups(h_list, sups_b)
    return ConvergenceReport(
        h_list=h_list,
        sup_interior=sups_i,
        sup_boundary=sups_b,
        slope=slope_c,
        degenerate=degen_c,
        slope_interior=slope_i,
        slope_boundary=slope_b,
        degenerate_interior=degen_i,
        degenerate_boundary=degen_b,
    )
