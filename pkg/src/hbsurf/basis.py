"""Distance-based weight functions and cardinal basis weights.

The cardinal weight of node i at a point u is the normalized reciprocal
1/alpha(d_i) of a distance function alpha that vanishes only at d = 0,
optionally localized by a cutoff factor tau of compact support. Weights
form a partition of unity and are exactly the Kronecker vector when the
query point coincides with a node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyStencil

ALPHA_KINDS = ("power", "exp_over_power", "pure_exp")
TAU_KINDS = ("wendland", "indicator", "none")


@dataclass
class BasisConfig:
    """Weight-function family and localization knobs.

    mu defaults to k + 1, the smallest integer exceeding the constraint
    mu >= k that keeps all derivatives through order k vanishing at the
    nodes. delta is the localization radius in geodesic units; it may stay
    None while tau_kind is "none" or until an adaptive radius is chosen.
    """

    k: int = 0
    mu: Optional[float] = None
    alpha_kind: str = "power"
    gamma: float = 1.0
    delta_exp: float = 0.0
    tau_kind: str = "wendland"
    delta: Optional[float] = None
    node_epsilon: float = 1e-12

    def __post_init__(self):
        if self.alpha_kind not in ALPHA_KINDS:
            raise ValueError(f"alpha_kind must be one of {ALPHA_KINDS}")
        if self.tau_kind not in TAU_KINDS:
            raise ValueError(f"tau_kind must be one of {TAU_KINDS}")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.mu is not None and self.mu < self.k:
            raise ValueError(f"mu = {self.mu} violates mu >= k = {self.k}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.delta_exp < 0:
            raise ValueError("delta_exp must be >= 0")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive when given")

    @property
    def mu_value(self):
        return float(self.mu) if self.mu is not None else float(self.k + 1)


def alpha(config, d_g):
    """Distance weight alpha(d). Vectorized over d_g >= 0.

    power:          d^mu
    exp_over_power: d^mu exp(gamma d^mu), whose reciprocal is the rapidly
                    decreasing weight exp(-gamma d^mu) / d^mu
    pure_exp:       exp(delta_exp d^mu), which does not vanish at d = 0 and
                    relies on the coincidence guard for cardinality
    """
    d = np.asarray(d_g, dtype=float)
    dmu = d**config.mu_value
    if config.alpha_kind == "power":
        return dmu
    if config.alpha_kind == "exp_over_power":
        return dmu * np.exp(config.gamma * dmu)
    return np.exp(config.delta_exp * dmu)


def tau(config, d_g):
    """Localization factor in [0, 1], zero for d_g >= delta."""
    d = np.asarray(d_g, dtype=float)
    if config.tau_kind == "none":
        return np.ones_like(d)
    if config.delta is None:
        raise ValueError("localized tau requires a delta radius")
    if config.tau_kind == "indicator":
        return (d < config.delta).astype(float)
    return np.clip(1.0 - d / config.delta, 0.0, None) ** (config.k + 1)


def cardinal_weights(config, distances):
    """Cardinal basis weights g_i(u) from per-node geodesic distances.

    Evaluated in barycentric form with the smallest distance factored out
    of every reciprocal, so nothing overflows as u approaches a node. A
    distance below node_epsilon short-circuits to the exact Kronecker
    vector at that node.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("distances must be a nonempty 1-d array")
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distances must be finite and nonnegative")

    hit = int(np.argmin(d))
    if d[hit] < config.node_epsilon:
        out = np.zeros_like(d)
        out[hit] = 1.0
        return out

    t = tau(config, d)
    active = t > 0.0
    if not np.any(active):
        raise EmptyStencil(
            f"no node within delta = {config.delta} of the evaluation point"
        )
    mu = config.mu_value
    d_min = float(d[active].min())
    dmu = d**mu
    if config.alpha_kind == "pure_exp":
        w = t * np.exp(-config.delta_exp * (dmu - d_min**mu))
    else:
        rate = config.gamma if config.alpha_kind == "exp_over_power" else 0.0
        w = t * (d_min / d) ** mu * np.exp(-rate * (dmu - d_min**mu))
    return w / w.sum()
