"""Geodesic distances: closed forms where available, numeric solvers elsewhere.

Developable surfaces (cylinder, cone) get exact distances by unrolling to
the plane; the sphere uses the great-circle arc. Everything else goes
through the initial-value tracer or the boundary-value relaxation solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from . import geometry
from .errors import (
    NoConvergence,
    NotOnSphere,
    NotUnitSpeed,
    OutOfRange,
    SegmentLeavesChart,
    SingularMetric,
    UnsupportedSurface,
)

_BVP_REFINE = 8  # output path is spline-resampled on a grid this much finer


@dataclass
class GeodesicPath:
    """Discretized geodesic in local coordinates with arclength samples."""

    points: np.ndarray
    arclength: np.ndarray
    total_length: float
    exit_arclength: Optional[float] = None

    @property
    def left_chart(self):
        return self.exit_arclength is not None


@dataclass
class BvpSettings:
    segments: int = 64
    max_iters: int = 200
    tol: float = 1e-10

    def __post_init__(self):
        if int(self.segments) < 8:
            raise ValueError("segments must be >= 8")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        self.segments = int(self.segments)
        self.max_iters = int(self.max_iters)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def sphere_distance(u, w):
    """Great-circle distance arccos(u . w) of two unit vectors, in [0, pi].

    Identical inputs short-circuit to exactly zero; arccos of the rounded
    dot product would report ~1e-8 for coincident points.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    for x in (u, w):
        if abs(np.linalg.norm(x) - 1.0) > 1e-10:
            raise NotOnSphere(f"norm {np.linalg.norm(x)!r} differs from 1")
    if np.array_equal(u, w):
        return 0.0
    return float(np.arccos(np.clip(np.dot(u, w), -1.0, 1.0)))


def euclid_geodesic_convert(d, to):
    """Convert between chord length and great-circle arc on the unit sphere.

    ``to="geodesic"`` maps a chord d in [0, 2] to 2 arcsin(d/2);
    ``to="euclidean"`` maps an arc in [0, pi] to 2 sin(d/2). The two
    directions are mutual inverses.
    """
    d = np.asarray(d, dtype=float)
    if to == "geodesic":
        if np.any(d < -1e-12) or np.any(d > 2.0 + 1e-12):
            raise OutOfRange("chord length must lie in [0, 2]")
        return 2.0 * np.arcsin(np.clip(d / 2.0, 0.0, 1.0))
    if to == "euclidean":
        if np.any(d < -1e-12) or np.any(d > np.pi + 1e-12):
            raise OutOfRange("arc length must lie in [0, pi]")
        return 2.0 * np.sin(np.clip(d, 0.0, np.pi) / 2.0)
    raise ValueError(f"unknown conversion target {to!r}")


def _cone_unrolled(chart, v):
    # Unroll the cone to a planar sector around the apex: a point at height
    # z sits at polar radius slant(z) and polar angle theta * r / slant_total.
    ell = np.hypot(chart.r, chart.h)
    rho = (chart.h - v[..., 1]) / chart.h * ell
    psi = v[..., 0] * chart.r / ell
    return rho, psi


def analytic_distances(chart, v_from, v_to):
    """Batched geodesic distance with the surface's closed form.

    ``v_from`` and ``v_to`` broadcast against each other over a trailing
    coordinate axis. Angle differences are taken raw, never wrapped: every
    supported chart covers less than a full turn.
    """
    v_from = np.asarray(v_from, dtype=float)
    v_to = np.asarray(v_to, dtype=float)
    if chart.kind == "sphere-cap":
        # chord -> arc form: exactly zero at coincident points and well
        # conditioned at the small separations the interpolant lives on
        chord = np.linalg.norm(chart.forward(v_from) - chart.forward(v_to), axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    if chart.kind == "cylinder":
        return np.hypot(
            chart.r * (v_from[..., 0] - v_to[..., 0]), v_from[..., 1] - v_to[..., 1]
        )
    if chart.kind == "cone":
        rho_a, psi_a = _cone_unrolled(chart, v_from)
        rho_b, psi_b = _cone_unrolled(chart, v_to)
        d2 = rho_a**2 + rho_b**2 - 2.0 * rho_a * rho_b * np.cos(psi_a - psi_b)
        return np.sqrt(np.maximum(d2, 0.0))
    raise UnsupportedSurface(
        f"no closed-form distance for {chart.kind}; use geodesic_bvp"
    )


def analytic_distance(chart, vA, vB):
    """Closed-form geodesic distance between two in-chart points."""
    geometry._require_in_chart(chart, vA)
    geometry._require_in_chart(chart, vB)
    return float(analytic_distances(chart, np.asarray(vA, float), np.asarray(vB, float)))


# --------------------------------------------------------------------------
# initial value problem: trace a geodesic from a point and direction
# --------------------------------------------------------------------------

def _geodesic_rhs(chart, v, dv):
    _, _, gamma = geometry.metric_arrays(chart, v)
    acc = -np.einsum("...kij,...i,...j->...k", gamma, dv, dv)
    return dv, acc


def geodesic_ivp(chart, v0, dv0_unit, s_end, steps):
    """Trace the unit-speed geodesic leaving v0 with velocity dv0_unit.

    Classical fourth-order Runge-Kutta on the first-order system in
    (v, dv/ds). If the trajectory exits the chart the path is truncated at
    the last in-chart node and flagged with that exit arclength.
    """
    v0 = np.asarray(v0, dtype=float)
    dv0 = np.asarray(dv0_unit, dtype=float)
    steps = int(steps)
    if steps < 16:
        raise ValueError("steps must be >= 16")
    if not s_end > 0:
        raise ValueError("s_end must be positive")
    geometry._require_in_chart(chart, v0)
    g0 = geometry._metric_only(chart, v0)
    speed2 = float(dv0 @ g0 @ dv0)
    if abs(speed2 - 1.0) > 1e-10:
        raise NotUnitSpeed(f"g(dv0, dv0) = {speed2!r}")

    h = float(s_end) / steps
    vs = [v0]
    v, dv = v0.copy(), dv0.copy()
    exited = False
    for _ in range(steps):
        try:
            k1v, k1a = _geodesic_rhs(chart, v, dv)
            k2v, k2a = _geodesic_rhs(chart, v + 0.5 * h * k1v, dv + 0.5 * h * k1a)
            k3v, k3a = _geodesic_rhs(chart, v + 0.5 * h * k2v, dv + 0.5 * h * k2a)
            k4v, k4a = _geodesic_rhs(chart, v + h * k3v, dv + h * k3a)
        except (SingularMetric, FloatingPointError):
            exited = True
            break
        v_new = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        dv_new = dv + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        if not (np.all(np.isfinite(v_new)) and bool(chart.contains(v_new))):
            exited = True
            break
        v, dv = v_new, dv_new
        vs.append(v)

    points = np.asarray(vs)
    arclength = h * np.arange(len(vs), dtype=float)
    return GeodesicPath(
        points=points,
        arclength=arclength,
        total_length=float(arclength[-1]),
        exit_arclength=float(arclength[-1]) if exited else None,
    )


# --------------------------------------------------------------------------
# boundary value problem: geodesic between two points by relaxation
# --------------------------------------------------------------------------

def _bvp_residual(chart, P, dt):
    # central-difference residual of the geodesic equations at interior nodes
    w = (P[2:] - P[:-2]) / (2.0 * dt)
    d2 = (P[2:] - 2.0 * P[1:-1] + P[:-2]) / dt**2
    _, _, gamma = geometry.metric_arrays(chart, P[1:-1])
    R = d2 + np.einsum("mkij,mi,mj->mk", gamma, w, w)
    return R, w, gamma


def _bvp_jacobian_banded(chart, P, w, gamma, dt):
    """Assemble the block-tridiagonal Newton matrix in banded storage."""
    m = P.shape[0] - 2  # interior nodes
    mid = P[1:-1]
    # dGamma/dv by central differences, batched over the interior nodes
    scale = 1e-6 * (1.0 + np.abs(mid))
    dgam = np.empty((m, 2, 2, 2, 2))  # [node, e, k, i, j] = d Gamma^k_ij / d v_e
    for e in range(2):
        shift = np.zeros_like(mid)
        shift[:, e] = scale[:, e]
        _, _, gp = geometry.metric_arrays(chart, mid + shift)
        _, _, gm = geometry.metric_arrays(chart, mid - shift)
        dgam[:, e] = (gp - gm) / (2.0 * scale[:, e])[:, None, None, None]
    M = np.einsum("mkej,mj->mke", gamma, w)  # Gamma^k_{e j} w^j
    G = np.einsum("mekij,mi,mj->mke", dgam, w, w)

    eye = np.eye(2)
    A = eye / dt**2 - M / dt  # coupling to P_{k-1}
    B = -2.0 * eye / dt**2 + G  # coupling to P_k
    C = eye / dt**2 + M / dt  # coupling to P_{k+1}

    n = 2 * m
    ab = np.zeros((7, n))  # (l, u) = (3, 3) banded storage
    rows = np.arange(m)
    for c in range(2):
        for e in range(2):
            i = 2 * rows + c
            # diagonal block
            j = 2 * rows + e
            ab[3 + i[0] - j[0], j] = B[:, c, e]
            # sub block (P_{k-1}) exists for interior rows k >= 2
            j = 2 * (rows[1:] - 1) + e
            ab[3 + (2 * rows[1:] + c)[0] - j[0], j] = A[1:, c, e]
            # super block (P_{k+1}) exists for rows k <= m-1
            j = 2 * (rows[:-1] + 1) + e
            ab[3 + (2 * rows[:-1] + c)[0] - j[0], j] = C[:-1, c, e]
    return ab


def geodesic_bvp(chart, vA, vB, settings=None):
    """Geodesic connecting vA to vB, found by damped Newton relaxation.

    The straight parameter-space segment seeds an (N = segments)-node
    polyline whose interior nodes are updated by Newton steps on the
    central-difference residual of the geodesic equations; each step is
    damped (halved) while it would increase the residual or push a node out
    of the chart. Iteration stops when the applied update's max node norm
    drops below ``tol``. The converged polyline is resampled on an 8x finer
    parameter grid through a cubic spline, which sharpens the trapezoidal
    length estimate without moving the curve.
    """
    settings = settings or BvpSettings()
    vA = np.asarray(vA, dtype=float)
    vB = np.asarray(vB, dtype=float)
    if np.array_equal(vA, vB):
        raise ValueError("BVP endpoints must be distinct")
    geometry._require_in_chart(chart, vA)
    geometry._require_in_chart(chart, vB)

    N = settings.segments
    t = np.linspace(0.0, 1.0, N + 1)
    P = (1.0 - t)[:, None] * vA[None, :] + t[:, None] * vB[None, :]
    if not np.all(chart.contains(P)):
        raise SegmentLeavesChart("straight initial segment exits the chart")

    dt = 1.0 / N
    R, w, gamma = _bvp_residual(chart, P, dt)
    res_norm = float(np.max(np.linalg.norm(R, axis=1)))
    converged = False
    for iteration in range(1, settings.max_iters + 1):
        ab = _bvp_jacobian_banded(chart, P, w, gamma, dt)
        step = solve_banded((3, 3), ab, -R.reshape(-1)).reshape(-1, 2)

        lam = 1.0
        while True:
            trial = P.copy()
            trial[1:-1] += lam * step
            if np.all(chart.contains(trial[1:-1])):
                R_new, w_new, gamma_new = _bvp_residual(chart, trial, dt)
                new_norm = float(np.max(np.linalg.norm(R_new, axis=1)))
                if new_norm <= res_norm or new_norm < settings.tol:
                    break
            lam *= 0.5
            if lam < 1e-8:
                raise NoConvergence("damping underflow", iteration, res_norm)
        P, R, w, gamma, res_norm = trial, R_new, w_new, gamma_new, new_norm
        if lam * float(np.max(np.linalg.norm(step, axis=1))) < settings.tol:
            converged = True
            break
    if not converged:
        raise NoConvergence("max iterations reached", settings.max_iters, res_norm)

    spline = CubicSpline(t, P, axis=0)
    t_fine = np.linspace(0.0, 1.0, _BVP_REFINE * N + 1)
    fine = spline(t_fine)
    fine[0], fine[-1] = vA, vB
    arclength = geometry._cumulative_length(chart, fine)
    return GeodesicPath(
        points=fine, arclength=arclength, total_length=float(arclength[-1])
    )
