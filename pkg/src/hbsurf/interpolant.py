"""Incomplete Taylor expansions over multi-index sets and the interpolant H.

H(u) is the cardinal-weighted sum of per-node Taylor expansions; it matches
every stored derivative value at every node because each weight equals the
Kronecker delta there and its derivatives vanish through the data order.
Missing multi-indices simply drop their Taylor terms, so lacunary data
needs no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from . import geodesics
from .basis import BasisConfig, cardinal_weights

MultiIndex = Tuple[int, int]

_FACTORIAL = (1.0, 1.0, 2.0, 6.0, 24.0)  # precomputed through order 4

#: multi-indices through order 2 in graded order (degree, then v1 power first)
GRADED_MULTI_INDICES = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def multi_indices_up_to(order):
    return tuple(b for b in GRADED_MULTI_INDICES if b[0] + b[1] <= order)


@dataclass
class SampleSite:
    """A node: local coordinates, ambient point, and derivative data.

    ``data`` maps a multi-index (b1, b2) to the local-coordinate partial
    derivative value of that order; the key set is the node's index set and
    must always contain (0, 0).
    """

    id: int
    v: np.ndarray
    ambient: np.ndarray
    data: Dict[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.ambient = np.asarray(self.ambient, dtype=float)
        if (0, 0) not in self.data:
            raise ValueError("sample data must include the function value (0, 0)")


@dataclass
class InterpolantConfig:
    basis: BasisConfig
    k: int
    q: int

    def __post_init__(self):
        if self.q > self.k:
            raise ValueError("q cannot exceed k")


def complete_order(samples):
    """Largest order through which every node's index set is complete."""
    q = 0
    for order in (1, 2):
        need = set(multi_indices_up_to(order))
        if all(need <= set(s.data) for s in samples):
            q = order
    return q


def interpolant_config(basis_config, samples):
    """Build an InterpolantConfig, deriving k and q from the sample data."""
    k = max(b[0] + b[1] for s in samples for b in s.data)
    return InterpolantConfig(basis=basis_config, k=k, q=complete_order(samples))


def taylor_eval(site, v_eval):
    """Incomplete Taylor expansion of the node's data at v_eval."""
    dv1 = v_eval[0] - site.v[0]
    dv2 = v_eval[1] - site.v[1]
    total = 0.0
    for (b1, b2), value in site.data.items():
        total += value / (_FACTORIAL[b1] * _FACTORIAL[b2]) * dv1**b1 * dv2**b2
    return total


def hb_eval(samples, config, v_eval, distances):
    """Interpolant value at v_eval given geodesic distances to the samples."""
    v_eval = np.asarray(v_eval, dtype=float)
    weights = cardinal_weights(config.basis, distances)
    total = 0.0
    for site, w in zip(samples, weights):
        if w != 0.0:
            total += w * taylor_eval(site, v_eval)
    return total


def hb_eval_basis_form(samples, config, v_eval, distances):
    """Same value as hb_eval, accumulated term by term over (node, multi-index).

    This is the algebraic rearrangement that treats each product of a
    monomial offset with a cardinal weight as its own basis function.
    """
    v_eval = np.asarray(v_eval, dtype=float)
    weights = cardinal_weights(config.basis, distances)
    total = 0.0
    for site, w in zip(samples, weights):
        if w == 0.0:
            continue
        dv1 = v_eval[0] - site.v[0]
        dv2 = v_eval[1] - site.v[1]
        for (b1, b2), value in site.data.items():
            basis_fn = dv1**b1 * dv2**b2 / (_FACTORIAL[b1] * _FACTORIAL[b2]) * w
            total += value * basis_fn
    return total


def _local_spacing(samples):
    vs = np.stack([s.v for s in samples])
    diffs = vs[:, None, :] - vs[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=-1))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def derivative_match_check(chart, samples, config, order):
    """Max finite-difference residual of the interpolation conditions.

    Central differences of the interpolant at each node are compared with
    the stored derivative values, through the requested order (at most 2).
    The step is 1e-4 times the node's local spacing.
    """
    if order > 2:
        raise ValueError("orders above 2 are not checked")
    spacing = _local_spacing(samples)

    def H(v):
        d = geodesics.analytic_distances(
            chart, v[None, :], np.stack([s.v for s in samples])
        )
        return hb_eval(samples, config, v, d)

    worst = 0.0
    for site, h in zip(samples, spacing * 1e-4):
        v = site.v
        e1 = np.array([h, 0.0])
        e2 = np.array([0.0, h])
        fd = {(0, 0): H(v)}
        if order >= 1:
            fd[(1, 0)] = (H(v + e1) - H(v - e1)) / (2 * h)
            fd[(0, 1)] = (H(v + e2) - H(v - e2)) / (2 * h)
        if order >= 2:
            fd[(2, 0)] = (H(v + e1) - 2 * H(v) + H(v - e1)) / h**2
            fd[(0, 2)] = (H(v + e2) - 2 * H(v) + H(v - e2)) / h**2
            fd[(1, 1)] = (
                H(v + e1 + e2) - H(v + e1 - e2) - H(v - e1 + e2) + H(v - e1 - e2)
            ) / (4 * h**2)
        for beta, approx in fd.items():
            if beta in site.data and beta[0] + beta[1] <= order:
                worst = max(worst, abs(approx - site.data[beta]))
    return worst
