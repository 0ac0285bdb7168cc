"""Charts of parametric surfaces and their pointwise differential data.

A chart maps a rectangle of local coordinates v = (v1, v2) into R^3. All
evaluators are vectorized: ``v`` may be a single pair of shape (2,) or a
batch of shape (m, 2), and outputs broadcast accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegeneratePath, OutOfChart, SingularMetric

_DET_TOL = 1e-14
_PROFILE_FD_STEP = 1e-6


class Chart:
    """One parametric patch of a surface in R^3."""

    kind = "abstract"

    def __init__(self, param_rect, params=None):
        a1, b1, a2, b2 = (float(x) for x in param_rect)
        if not (a1 < b1 and a2 < b2):
            raise ValueError("param_rect must be a nondegenerate rectangle")
        self.param_rect = (a1, b1, a2, b2)
        self.params = dict(params or {})

    def forward(self, v):
        raise NotImplementedError

    def jacobian(self, v):
        raise NotImplementedError

    def hessian(self, v):
        raise NotImplementedError

    def contains(self, v):
        """Vectorized membership test for the (closed) chart domain."""
        v = np.asarray(v, dtype=float)
        a1, b1, a2, b2 = self.param_rect
        ok = (v[..., 0] >= a1) & (v[..., 0] <= b1)
        ok = ok & (v[..., 1] >= a2) & (v[..., 1] <= b2)
        return ok

    def implicit_residual(self, u):
        """|F(u)| for the surface's implicit equation, or None if there is none."""
        return None

    def __repr__(self):
        return f"<{type(self).__name__} rect={self.param_rect} params={self.params}>"


class SphereCapChart(Chart):
    """Cap z > 0.5 of the unit sphere, parametrized by its (x, y) projection."""

    kind = "sphere-cap"

    def __init__(self):
        half = np.sqrt(3.0) / 2.0
        super().__init__((-half, half, -half, half), {"radius": 1.0})

    def contains(self, v):
        v = np.asarray(v, dtype=float)
        rho2 = v[..., 0] ** 2 + v[..., 1] ** 2
        return super().contains(v) & (rho2 <= 0.75 + 1e-12)

    def forward(self, v):
        v = np.asarray(v, dtype=float)
        w = np.sqrt(1.0 - v[..., 0] ** 2 - v[..., 1] ** 2)
        return np.stack([v[..., 0], v[..., 1], w], axis=-1)

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        w = np.sqrt(1.0 - v[..., 0] ** 2 - v[..., 1] ** 2)
        J = np.zeros(v.shape[:-1] + (3, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        J[..., 2, 0] = -v[..., 0] / w
        J[..., 2, 1] = -v[..., 1] / w
        return J

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        w2 = 1.0 - v[..., 0] ** 2 - v[..., 1] ** 2
        w = np.sqrt(w2)
        H = np.zeros(v.shape[:-1] + (3, 2, 2))
        for a in range(2):
            for b in range(2):
                H[..., 2, a, b] = -(float(a == b) / w + v[..., a] * v[..., b] / (w2 * w))
        return H

    def implicit_residual(self, u):
        u = np.asarray(u, dtype=float)
        return np.abs(np.sqrt((u**2).sum(axis=-1)) - 1.0)


class CylinderChart(Chart):
    """Circular cylinder of radius r, local coordinates (angle, height)."""

    kind = "cylinder"

    def __init__(self, r, theta_range, z_range):
        rect = (theta_range[0], theta_range[1], z_range[0], z_range[1])
        super().__init__(rect, {"r": float(r)})
        self.r = float(r)

    def forward(self, v):
        v = np.asarray(v, dtype=float)
        return np.stack(
            [self.r * np.cos(v[..., 0]), self.r * np.sin(v[..., 0]), v[..., 1]],
            axis=-1,
        )

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        J = np.zeros(v.shape[:-1] + (3, 2))
        J[..., 0, 0] = -self.r * np.sin(v[..., 0])
        J[..., 1, 0] = self.r * np.cos(v[..., 0])
        J[..., 2, 1] = 1.0
        return J

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        H = np.zeros(v.shape[:-1] + (3, 2, 2))
        H[..., 0, 0, 0] = -self.r * np.cos(v[..., 0])
        H[..., 1, 0, 0] = -self.r * np.sin(v[..., 0])
        return H

    def implicit_residual(self, u):
        u = np.asarray(u, dtype=float)
        return np.abs(np.hypot(u[..., 0], u[..., 1]) - self.r)


class ConeChart(Chart):
    """Cone of base radius r and height h (apex on the z axis at z = h).

    Local coordinates are (angle, height); the parallel radius at height z
    is r (h - z) / h. The rectangle stops short of the apex, where the
    metric degenerates.
    """

    kind = "cone"

    def __init__(self, r, h, theta_range, z_range):
        rect = (theta_range[0], theta_range[1], z_range[0], z_range[1])
        super().__init__(rect, {"r": float(r), "h": float(h)})
        self.r = float(r)
        self.h = float(h)

    def _rho(self, z):
        return self.r * (self.h - z) / self.h

    def forward(self, v):
        v = np.asarray(v, dtype=float)
        rho = self._rho(v[..., 1])
        return np.stack(
            [rho * np.cos(v[..., 0]), rho * np.sin(v[..., 0]), v[..., 1]], axis=-1
        )

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        rho = self._rho(v[..., 1])
        drho = -self.r / self.h
        J = np.zeros(v.shape[:-1] + (3, 2))
        J[..., 0, 0] = -rho * np.sin(v[..., 0])
        J[..., 1, 0] = rho * np.cos(v[..., 0])
        J[..., 0, 1] = drho * np.cos(v[..., 0])
        J[..., 1, 1] = drho * np.sin(v[..., 0])
        J[..., 2, 1] = 1.0
        return J

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        rho = self._rho(v[..., 1])
        drho = -self.r / self.h
        H = np.zeros(v.shape[:-1] + (3, 2, 2))
        H[..., 0, 0, 0] = -rho * np.cos(v[..., 0])
        H[..., 1, 0, 0] = -rho * np.sin(v[..., 0])
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = -drho * np.sin(v[..., 0])
        H[..., 1, 0, 1] = H[..., 1, 1, 0] = drho * np.cos(v[..., 0])
        return H

    def implicit_residual(self, u):
        u = np.asarray(u, dtype=float)
        return np.abs(np.hypot(u[..., 0], u[..., 1]) - self._rho(u[..., 2]))


class TorusChart(Chart):
    """Torus with tube radius r around a circle of radius R in the xy plane."""

    kind = "torus"

    def __init__(self, R, r, v1_range, v2_range):
        rect = (v1_range[0], v1_range[1], v2_range[0], v2_range[1])
        super().__init__(rect, {"R": float(R), "r": float(r)})
        self.R = float(R)
        self.r = float(r)

    def forward(self, v):
        v = np.asarray(v, dtype=float)
        ring = self.R + self.r * np.cos(v[..., 0])
        return np.stack(
            [ring * np.cos(v[..., 1]), ring * np.sin(v[..., 1]), self.r * np.sin(v[..., 0])],
            axis=-1,
        )

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        c1, s1 = np.cos(v[..., 0]), np.sin(v[..., 0])
        c2, s2 = np.cos(v[..., 1]), np.sin(v[..., 1])
        ring = self.R + self.r * c1
        J = np.zeros(v.shape[:-1] + (3, 2))
        J[..., 0, 0] = -self.r * s1 * c2
        J[..., 1, 0] = -self.r * s1 * s2
        J[..., 2, 0] = self.r * c1
        J[..., 0, 1] = -ring * s2
        J[..., 1, 1] = ring * c2
        return J

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        c1, s1 = np.cos(v[..., 0]), np.sin(v[..., 0])
        c2, s2 = np.cos(v[..., 1]), np.sin(v[..., 1])
        ring = self.R + self.r * c1
        H = np.zeros(v.shape[:-1] + (3, 2, 2))
        H[..., 0, 0, 0] = -self.r * c1 * c2
        H[..., 1, 0, 0] = -self.r * c1 * s2
        H[..., 2, 0, 0] = -self.r * s1
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = self.r * s1 * s2
        H[..., 1, 0, 1] = H[..., 1, 1, 0] = -self.r * s1 * c2
        H[..., 0, 1, 1] = -ring * c2
        H[..., 1, 1, 1] = -ring * s2
        return H

    def implicit_residual(self, u):
        u = np.asarray(u, dtype=float)
        ring = np.hypot(u[..., 0], u[..., 1]) - self.R
        return np.abs(ring**2 + u[..., 2] ** 2 - self.r**2)


@dataclass
class RevolutionProfile:
    """Generating curve (alpha(v1), beta(v1)) rotated about the z axis.

    Derivative callables are optional; missing ones are filled in with
    central differences of step 1e-6.
    """

    alpha: Callable
    beta: Callable
    d_alpha: Optional[Callable] = None
    d_beta: Optional[Callable] = None
    dd_alpha: Optional[Callable] = None
    dd_beta: Optional[Callable] = None

    def __post_init__(self):
        h = _PROFILE_FD_STEP
        if self.d_alpha is None:
            f = self.alpha
            self.d_alpha = lambda t: (f(t + h) - f(t - h)) / (2.0 * h)
        if self.d_beta is None:
            f = self.beta
            self.d_beta = lambda t: (f(t + h) - f(t - h)) / (2.0 * h)
        if self.dd_alpha is None:
            f = self.alpha
            self.dd_alpha = lambda t: (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
        if self.dd_beta is None:
            f = self.beta
            self.dd_beta = lambda t: (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)


class RevolutionChart(Chart):
    """Surface of revolution (alpha(v1) cos v2, alpha(v1) sin v2, beta(v1))."""

    kind = "revolution"

    def __init__(self, profile, v1_range, v2_range):
        rect = (v1_range[0], v1_range[1], v2_range[0], v2_range[1])
        super().__init__(rect, {"profile": profile})
        self.profile = profile

    def forward(self, v):
        v = np.asarray(v, dtype=float)
        a = np.asarray(self.profile.alpha(v[..., 0]), dtype=float)
        b = np.asarray(self.profile.beta(v[..., 0]), dtype=float)
        return np.stack(
            [a * np.cos(v[..., 1]), a * np.sin(v[..., 1]), np.broadcast_to(b, a.shape)],
            axis=-1,
        )

    def jacobian(self, v):
        v = np.asarray(v, dtype=float)
        a = self.profile.alpha(v[..., 0])
        da = self.profile.d_alpha(v[..., 0])
        db = self.profile.d_beta(v[..., 0])
        c2, s2 = np.cos(v[..., 1]), np.sin(v[..., 1])
        J = np.zeros(v.shape[:-1] + (3, 2))
        J[..., 0, 0] = da * c2
        J[..., 1, 0] = da * s2
        J[..., 2, 0] = db
        J[..., 0, 1] = -a * s2
        J[..., 1, 1] = a * c2
        return J

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        a = self.profile.alpha(v[..., 0])
        da = self.profile.d_alpha(v[..., 0])
        dda = self.profile.dd_alpha(v[..., 0])
        ddb = self.profile.dd_beta(v[..., 0])
        c2, s2 = np.cos(v[..., 1]), np.sin(v[..., 1])
        H = np.zeros(v.shape[:-1] + (3, 2, 2))
        H[..., 0, 0, 0] = dda * c2
        H[..., 1, 0, 0] = dda * s2
        H[..., 2, 0, 0] = ddb
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = -da * s2
        H[..., 1, 0, 1] = H[..., 1, 1, 0] = da * c2
        H[..., 0, 1, 1] = -a * c2
        H[..., 1, 1, 1] = -a * s2
        return H


# --------------------------------------------------------------------------
# chart factories (experiment constants baked into the defaults)
# --------------------------------------------------------------------------

def sphere_cap():
    """Projection chart of the unit-sphere cap z > 0.5."""
    return SphereCapChart()


def cylinder(r=1.0, theta_range=(2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0), z_range=(0.0, 1.0)):
    """Cylinder chart; the default angular range is the x < -1/2 half for r = 1."""
    return CylinderChart(r, theta_range, z_range)


def cone(r=1.0, h=2.0, theta_range=(np.pi / 2.0, 3.0 * np.pi / 2.0), z_range=None):
    """Cone chart; the default keeps x <= 0 and stops at z = 0.95 h (apex excluded)."""
    if z_range is None:
        z_range = (0.0, 0.95 * h)
    return ConeChart(r, h, theta_range, z_range)


def torus(R=2.0, r=1.0, v1_range=(0.0, 2.0 * np.pi), v2_range=(0.0, 2.0 * np.pi)):
    return TorusChart(R, r, v1_range, v2_range)


def revolution(profile, v1_range, v2_range=(0.0, 2.0 * np.pi)):
    return RevolutionChart(profile, v1_range, v2_range)


def sphere_polar(theta_range=(0.15, np.pi - 0.15), phi_range=(0.0, 2.0 * np.pi)):
    """Unit sphere in spherical coordinates (colatitude, longitude)."""
    profile = RevolutionProfile(
        alpha=np.sin,
        beta=np.cos,
        d_alpha=np.cos,
        d_beta=lambda t: -np.sin(t),
        dd_alpha=lambda t: -np.sin(t),
        dd_beta=lambda t: -np.cos(t),
    )
    return RevolutionChart(profile, theta_range, phi_range)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def _require_in_chart(chart, v):
    v = np.asarray(v, dtype=float)
    inside = np.atleast_1d(chart.contains(v))
    if not inside.all():
        bad = v.reshape(-1, 2)[~inside.reshape(-1)][0]
        raise OutOfChart(f"{bad} outside {chart.kind} chart domain")


def chart_forward(chart, v):
    """Map local coordinates to the ambient point on the surface."""
    _require_in_chart(chart, v)
    return chart.forward(v)


def chart_jacobian(chart, v):
    """3x2 matrix of first partials; columns are the tangent basis."""
    _require_in_chart(chart, v)
    return chart.jacobian(v)


def chart_hessian(chart, v):
    """3x2x2 array of second partials of the forward map."""
    _require_in_chart(chart, v)
    return chart.hessian(v)


@dataclass
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray


def _metric_only(chart, v):
    J = chart.jacobian(v)
    return np.einsum("...ia,...ib->...ab", J, J)


def _invert_2x2(g):
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if np.any(det < _DET_TOL):
        raise SingularMetric(f"det g = {float(np.min(det)):.3e} below {_DET_TOL}")
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1] / det
    inv[..., 1, 1] = g[..., 0, 0] / det
    inv[..., 0, 1] = -g[..., 0, 1] / det
    inv[..., 1, 0] = -g[..., 1, 0] / det
    return inv


def metric_arrays(chart, v):
    """Batched metric, inverse metric and Christoffel symbols at v.

    The derivatives of g feeding the Christoffel symbols come from the
    product rule on the chart Jacobian and Hessian, so they are exact
    wherever the chart's second derivatives are (finite differences enter
    only through numerically-differentiated revolution profiles).
    """
    J = chart.jacobian(v)
    H = chart.hessian(v)
    g = np.einsum("...ia,...ib->...ab", J, J)
    g_inv = _invert_2x2(g)
    # dg[..., a, b, s] = d g_ab / d v_s
    dg = np.einsum("...ias,...ib->...abs", H, J) + np.einsum("...ia,...ibs->...abs", J, H)
    # Gamma^k_ij = 1/2 g^{ks} (d_j g_si + d_i g_js - d_s g_ij)
    bracket = dg + np.einsum("...jsi->...sij", dg) - np.einsum("...ijs->...sij", dg)
    gamma = 0.5 * np.einsum("...ks,...sij->...kij", g_inv, bracket)
    return g, g_inv, gamma


def metric_data(chart, v):
    """MetricData (g, its inverse, Christoffel symbols) at a single point."""
    _require_in_chart(chart, v)
    g, g_inv, gamma = metric_arrays(chart, np.asarray(v, dtype=float))
    return MetricData(g=g, g_inv=g_inv, christoffel=gamma)


def _cumulative_length(chart, path):
    g = _metric_only(chart, path)
    dv = np.diff(path, axis=0)
    sa = np.sqrt(np.einsum("ma,mab,mb->m", dv, g[:-1], dv))
    sb = np.sqrt(np.einsum("ma,mab,mb->m", dv, g[1:], dv))
    return np.concatenate([[0.0], np.cumsum(0.5 * (sa + sb))])


def curve_length(chart, path):
    """Length of a polyline of local points, trapezoidal in the metric.

    The per-segment rule averages the metric norm of the secant at the two
    segment ends, which makes the result exactly additive under path
    concatenation.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2:
        raise DegeneratePath("need at least 2 points")
    _require_in_chart(chart, path)
    return float(_cumulative_length(chart, path)[-1])


def pushforward_derivatives(value_grad_hess, chart, v):
    """Local partials (orders 0..2) of an ambient function restricted to the chart.

    Given f, grad f (3,) and Hess f (3, 3) at the ambient image of v, the
    chain rule gives the partials of the composition with the forward map:
    first order J^T grad, second order J^T Hess J plus the gradient
    contracted against the chart Hessian.
    """
    value, grad, hess = value_grad_hess
    _require_in_chart(chart, v)
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    J = chart.jacobian(v)
    Hc = chart.hessian(v)
    g1 = np.einsum("...ia,...i->...a", J, grad)
    g2 = np.einsum("...ia,...ij,...jb->...ab", J, hess, J)
    g2 = g2 + np.einsum("...i,...iab->...ab", grad, Hc)
    return value, g1, g2
