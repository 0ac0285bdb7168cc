import numpy as np
import pytest

from hbsurf.basis import BasisConfig, alpha, cardinal_weights, tau
from hbsurf.errors import EmptyStencil
from hbsurf.geodesics import analytic_distances, euclid_geodesic_convert
from hbsurf.geometry import sphere_cap


def cap_points(rng, count):
    pts = []
    while len(pts) < count:
        v = rng.uniform(-0.85, 0.85, size=2)
        if v @ v < 0.72:
            pts.append(v)
    return np.array(pts)


# ------------------------------------------------------------------- alpha/tau

def test_alpha_power():
    cfg = BasisConfig(k=2, mu=3.0)
    assert alpha(cfg, 2.0) == 8.0
    assert alpha(cfg, 0.0) == 0.0


def test_alpha_positive_and_monotone():
    cfg = BasisConfig(k=1, mu=2.0)
    d = np.linspace(0.01, 3.0, 50)
    a = alpha(cfg, d)
    assert np.all(a > 0)
    assert np.all(np.diff(a) > 0)


def test_alpha_exponential_variants_vanish_or_not_at_zero():
    over = BasisConfig(k=1, mu=2.0, alpha_kind="exp_over_power", gamma=0.5)
    pure = BasisConfig(k=1, mu=2.0, alpha_kind="pure_exp", delta_exp=0.5)
    assert alpha(over, 0.0) == 0.0  # reciprocal weight blows up at the node
    assert alpha(pure, 0.0) == 1.0  # cardinality left to the coincidence guard
    assert alpha(over, 1.5) > 0 and alpha(pure, 1.5) > 0


def test_alpha_zonal_identity_on_sphere():
    # evaluating alpha on d_g equals evaluating it on 2 asin(d_E / 2)
    chart = sphere_cap()
    cfg = BasisConfig(k=2, mu=3.0)
    rng = np.random.default_rng(1)
    pts = cap_points(rng, 20)
    u, others = pts[0], pts[1:]
    d_g = analytic_distances(chart, u[None, :], others)
    chord = np.linalg.norm(chart.forward(u) - chart.forward(others), axis=-1)
    via_chord = euclid_geodesic_convert(chord, to="geodesic")
    assert np.abs(alpha(cfg, d_g) - alpha(cfg, via_chord)).max() < 1e-14


def test_tau_wendland_values():
    cfg = BasisConfig(k=2, mu=3.0, delta=1.0)
    assert tau(cfg, 0.0) == 1.0
    assert tau(cfg, 1.0) == 0.0
    assert tau(cfg, 0.5) == pytest.approx(0.125)  # (1 - 1/2)^(k+1)
    assert tau(cfg, 2.0) == 0.0


def test_tau_indicator_and_none():
    ind = BasisConfig(k=0, delta=0.5, tau_kind="indicator")
    assert tau(ind, 0.49) == 1.0 and tau(ind, 0.5) == 0.0
    glob = BasisConfig(k=0, tau_kind="none")
    assert np.all(tau(glob, np.array([0.1, 5.0])) == 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        BasisConfig(k=2, mu=1.0)  # mu < k
    with pytest.raises(ValueError):
        BasisConfig(alpha_kind="cubic")
    with pytest.raises(ValueError):
        BasisConfig(delta=-1.0)
    assert BasisConfig(k=2).mu_value == 3.0  # default mu = k + 1


# ------------------------------------------------------------- cardinal weights

def test_weights_two_equal_distances():
    cfg = BasisConfig(k=0, tau_kind="none")
    w = cardinal_weights(cfg, np.array([0.7, 0.7]))
    assert np.allclose(w, [0.5, 0.5])


def test_weights_kronecker_at_node():
    cfg = BasisConfig(k=1, tau_kind="none")
    w = cardinal_weights(cfg, np.array([0.4, 0.0, 1.2]))
    assert np.array_equal(w, [0.0, 1.0, 0.0])


def test_weights_hand_computed_power_case():
    cfg = BasisConfig(k=1, mu=2.0, tau_kind="none")
    w = cardinal_weights(cfg, np.array([1.0, 2.0, 4.0]))
    assert np.allclose(w, [16.0 / 21.0, 4.0 / 21.0, 1.0 / 21.0], atol=1e-15)


def test_weights_empty_stencil():
    cfg = BasisConfig(k=0, delta=0.1)
    with pytest.raises(EmptyStencil):
        cardinal_weights(cfg, np.array([0.2, 0.5]))


def test_weights_localized_zero_beyond_delta():
    cfg = BasisConfig(k=1, delta=0.5)
    d = np.array([0.1, 0.3, 0.5, 0.9])
    w = cardinal_weights(cfg, d)
    assert w[2] == 0.0 and w[3] == 0.0
    assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_weights_partition_of_unity_random_configs():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = rng.integers(2, 40)
        d = rng.uniform(1e-6, 2.0, size=n)
        kind = rng.choice(["power", "exp_over_power", "pure_exp"])
        k = int(rng.integers(0, 3))
        cfg = BasisConfig(
            k=k,
            mu=float(k + rng.integers(1, 3)),
            alpha_kind=kind,
            gamma=float(rng.uniform(0.1, 2.0)),
            delta_exp=float(rng.uniform(0.0, 2.0)),
            tau_kind=rng.choice(["wendland", "indicator", "none"]),
            delta=float(d.min() + rng.uniform(0.1, 2.0)),
        )
        w = cardinal_weights(cfg, d)
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.all((w >= 0.0) & (w <= 1.0))


def test_weights_no_overflow_near_node():
    cfg = BasisConfig(k=2, mu=3.0, tau_kind="none")
    w = cardinal_weights(cfg, np.array([1e-11, 1.0, 2.0]))
    assert np.isfinite(w).all()
    assert w[0] > 0.999999


def test_weights_ignore_changes_beyond_delta():
    cfg = BasisConfig(k=1, delta=0.4)
    base = np.array([0.1, 0.2, 0.7, 1.5])
    moved = base.copy()
    moved[2:] = [0.9, 2.2]  # still outside the radius
    w0 = cardinal_weights(cfg, base)
    w1 = cardinal_weights(cfg, moved)
    assert np.array_equal(w0, w1)


def test_weights_reject_bad_distances():
    cfg = BasisConfig(k=0, tau_kind="none")
    with pytest.raises(ValueError):
        cardinal_weights(cfg, np.array([0.1, -0.2]))
    with pytest.raises(ValueError):
        cardinal_weights(cfg, np.array([0.1, np.inf]))


def weight_derivative_residual(chart, cfg, nodes, i, j, h):
    """Largest |D^beta g_i(z_j)| estimate for 1 <= |beta| <= cfg.k.

    First derivatives use plain central differences. Second derivatives are
    Richardson-extrapolated over steps h and h/2: the weight field has a
    d^mu kink at each node whose finite-difference footprint is linear in
    the step, and the extrapolation cancels it exactly.
    """

    def g(v):
        return cardinal_weights(cfg, analytic_distances(chart, v[None, :], nodes))[i]

    v = nodes[j]
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    residuals = [
        abs((g(v + e1) - g(v - e1)) / (2 * h)),
        abs((g(v + e2) - g(v - e2)) / (2 * h)),
    ]
    if cfg.k >= 2:

        def second(e, step):
            return (g(v + e * step) - 2 * g(v) + g(v - e * step)) / step**2

        def cross(step):
            a, b = np.array([step, 0.0]), np.array([0.0, step])
            return (g(v + a + b) - g(v + a - b) - g(v - a + b) + g(v - a - b)) / (
                4 * step**2
            )

        for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
            residuals.append(abs(2 * second(e, h / 2) - second(e, h)))
        residuals.append(abs(2 * cross(h / 2) - cross(h)))
    return max(residuals)


def test_weight_derivatives_vanish_at_other_nodes():
    # power weights with mu >= k: all derivatives through order k are zero
    # at every node
    from hbsurf.pointsets import nodes_on_surface

    chart = sphere_cap()
    nodes, _ = nodes_on_surface(chart, 14)
    diffs = nodes[:, None, :] - nodes[None, :, :]
    dist = np.sqrt((diffs**2).sum(-1))
    np.fill_diagonal(dist, np.inf)
    h = 1e-3 * dist.min()
    cfg = BasisConfig(k=2, mu=3.0, tau_kind="none")
    for i in (0, 3, 7):
        for j in (1, 5, 9):
            assert weight_derivative_residual(chart, cfg, nodes, i, j, h) < 1e-4
