"""Quasi-random and structured point generation, point-set statistics,
and radius-based neighbor search on charts.

Distances here are always geodesic. For the three surfaces with closed
forms this module works in an isometric image: the unrolled plane for
cylinder and cone, the ambient chord (monotone in the arc) for the sphere
cap. Nearest-neighbor machinery then reduces to Euclidean KD-trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import geodesics
from .errors import DegenerateSet, UnsupportedSurface

_SPIRAL_STRIDE = 3.6  # longitude increment scale of the generalized spiral


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def _radical_inverse(indices, base):
    idx = np.asarray(indices, dtype=np.int64).copy()
    out = np.zeros(idx.shape, dtype=float)
    f = 1.0 / base
    while np.any(idx > 0):
        out += f * (idx % base)
        idx //= base
        f /= base
    return out


def halton(count, skip=0):
    """Halton pairs in [0, 1]^2 with bases 2 and 3, starting at index skip + 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    idx = np.arange(skip + 1, skip + count + 1, dtype=np.int64)
    return np.stack([_radical_inverse(idx, 2), _radical_inverse(idx, 3)], axis=1)


def _splitmix64_uniform(seed, count):
    # SplitMix64 stream mapped to [0, 1) doubles; replaces an
    # environment-specific uniform generator so runs are reproducible.
    mask = (1 << 64) - 1
    state = seed & mask
    out = np.empty(count, dtype=float)
    for i in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        z ^= z >> 31
        out[i] = (z >> 11) / float(1 << 53)
    return out


def _pairs_to_chart(chart, pq):
    """Map unit-square pairs onto the chart; returns local coords and a keep mask.

    The angular filter is strict (the chart restrictions are x < -1/2 and
    x < 0): dyadic Halton fractions can land exactly on the boundary angle.
    """
    if chart.kind == "sphere-cap":
        half = np.sqrt(3.0) / 2.0
        v = (2.0 * pq - 1.0) * half
        keep = v[:, 0] ** 2 + v[:, 1] ** 2 < 0.75
    elif chart.kind == "cylinder":
        v = np.stack([2.0 * np.pi * pq[:, 0], pq[:, 1]], axis=1)
        a1, b1, _, _ = chart.param_rect
        keep = np.asarray(chart.contains(v)) & (v[:, 0] > a1) & (v[:, 0] < b1)
    elif chart.kind == "cone":
        v = np.stack([2.0 * np.pi * pq[:, 0], chart.h * pq[:, 1]], axis=1)
        a1, b1, _, _ = chart.param_rect
        keep = np.asarray(chart.contains(v)) & (v[:, 0] > a1) & (v[:, 0] < b1)
    else:
        raise UnsupportedSurface(f"no point generator for {chart.kind}")
    return v, keep


def nodes_on_surface(chart, count, skip=0):
    """Deterministic quasi-random nodes on the chart.

    Halton pairs are mapped through the surface equations and rejected
    outside the chart until ``count`` survive. Returns (v, xyz).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    kept = []
    total = 0
    cursor = skip
    block = max(4 * count, 256)
    while total < count:
        pq = halton(block, skip=cursor)
        cursor += block
        v, keep = _pairs_to_chart(chart, pq)
        v = v[keep]
        kept.append(v)
        total += len(v)
    v = np.concatenate(kept)[:count]
    return v, chart.forward(v)


def _spiral_sphere(n_total):
    # Generalized spiral: nearly uniform points from pole to pole.
    h = -1.0 + 2.0 * np.arange(n_total) / (n_total - 1)
    theta = np.arccos(np.clip(h, -1.0, 1.0))
    phi = np.zeros(n_total)
    for k in range(1, n_total - 1):
        phi[k] = (phi[k - 1] + _SPIRAL_STRIDE / np.sqrt(n_total * (1.0 - h[k] ** 2))) % (
            2.0 * np.pi
        )
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
        axis=1,
    )


def eval_points(chart, n_eval, seed=0):
    """Evaluation positions on the chart; returns (v, xyz).

    Sphere cap: generalized-spiral points filtered to the cap (deterministic,
    seed ignored). Cylinder and cone: seeded uniform pairs mapped and
    filtered exactly like the nodes.
    """
    if n_eval < 1:
        raise ValueError("n_eval must be >= 1")
    if chart.kind == "sphere-cap":
        n_total = 4 * n_eval
        while True:
            xyz = _spiral_sphere(n_total)
            xyz = xyz[xyz[:, 2] > 0.5]
            if len(xyz) >= n_eval:
                break
            n_total += max(n_eval, 25)
        xyz = xyz[:n_eval]
        return xyz[:, :2].copy(), xyz
    if chart.kind in ("cylinder", "cone"):
        draw = max(8 * n_eval, 128)
        while True:
            pq = _splitmix64_uniform(seed, draw).reshape(-1, 2)
            v, keep = _pairs_to_chart(chart, pq)
            v = v[keep]
            if len(v) >= n_eval:
                break
            draw *= 2
        v = v[:n_eval]
        return v, chart.forward(v)
    raise UnsupportedSurface(f"no evaluation-point generator for {chart.kind}")


# --------------------------------------------------------------------------
# geodesic nearest-neighbor machinery via isometric embeddings
# --------------------------------------------------------------------------

def _embed(chart, v):
    """Map local points to a space whose Euclidean metric encodes d_g.

    Returns (points, chordal). For cylinder and cone the embedding is an
    exact isometry; for the sphere cap Euclidean distances are chords,
    convertible to arcs (chordal=True).
    """
    v = np.asarray(v, dtype=float)
    if chart.kind == "sphere-cap":
        return chart.forward(v), True
    if chart.kind == "cylinder":
        return np.stack([chart.r * v[..., 0], v[..., 1]], axis=-1), False
    if chart.kind == "cone":
        rho, psi = geodesics._cone_unrolled(chart, v)
        return np.stack([rho * np.cos(psi), rho * np.sin(psi)], axis=-1), False
    raise UnsupportedSurface(f"no closed-form distance for {chart.kind}")


def _to_geodesic(d, chordal):
    return geodesics.euclid_geodesic_convert(d, to="geodesic") if chordal else d


def default_probes(chart, per_axis=200):
    """Parameter grid over the chart rectangle, filtered to the domain."""
    a1, b1, a2, b2 = chart.param_rect
    g1 = np.linspace(a1, b1, per_axis)
    g2 = np.linspace(a2, b2, per_axis)
    vv = np.stack(np.meshgrid(g1, g2, indexing="ij"), axis=-1).reshape(-1, 2)
    return vv[np.asarray(chart.contains(vv))]


def fill_distance(chart, nodes, probes=None):
    """Max over probes of the geodesic distance to the nearest node."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or len(nodes) == 0:
        raise ValueError("nodes must be a nonempty (n, 2) array")
    if probes is None:
        probes = default_probes(chart)
    pts, chordal = _embed(chart, nodes)
    tree = cKDTree(pts)
    d, _ = tree.query(_embed(chart, probes)[0])
    return float(_to_geodesic(np.max(d), chordal))


def separation_distance(chart, nodes):
    """Half the minimum pairwise geodesic distance of the node set."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or len(nodes) < 2:
        raise ValueError("need at least two nodes")
    pts, chordal = _embed(chart, nodes)
    d, _ = cKDTree(pts).query(pts, k=2)
    nearest = d[:, 1].min()
    if nearest < 1e-15:
        raise DegenerateSet("duplicate nodes in the set")
    return 0.5 * float(_to_geodesic(nearest, chordal))


def knn_radius(chart, nodes, queries, k):
    """Geodesic distance from each query to its k-th nearest node."""
    pts, chordal = _embed(chart, np.asarray(nodes, dtype=float))
    tree = cKDTree(pts)
    d, _ = tree.query(_embed(chart, np.asarray(queries, dtype=float))[0], k=k)
    return np.asarray(_to_geodesic(d[..., -1], chordal))


@dataclass
class PointSetStats:
    fill: float
    separation: float
    n: int


def point_set_stats(chart, nodes, probes=None):
    nodes = np.asarray(nodes, dtype=float)
    return PointSetStats(
        fill=fill_distance(chart, nodes, probes),
        separation=separation_distance(chart, nodes),
        n=len(nodes),
    )


# --------------------------------------------------------------------------
# cell index for radius queries
# --------------------------------------------------------------------------

def _param_rates(chart):
    # Conservative parameter-displacement per unit geodesic distance, used
    # to bound the rectangle of candidate cells around a query.
    if chart.kind == "sphere-cap":
        return (1.0, 1.0)
    if chart.kind == "cylinder":
        return (1.0 / chart.r, 1.0)
    if chart.kind == "cone":
        rho_min = chart.r * (chart.h - chart.param_rect[3]) / chart.h
        return (1.0 / max(rho_min, 1e-9), 1.0)
    raise UnsupportedSurface(f"no exact radius search for {chart.kind}")


class CellIndex:
    """Uniform grid over the chart rectangle with per-cell node id lists.

    Candidate cells are read off a conservative parameter-space rectangle
    around the query; candidates are then filtered by exact geodesic
    distance, so query results match a brute-force scan.
    """

    def __init__(self, chart, nodes, cell_size):
        self.chart = chart
        self.nodes = np.array(nodes, dtype=float)
        self.cell_size = float(cell_size)
        self._rates = _param_rates(chart)
        a1, b1, a2, b2 = chart.param_rect
        side1 = self.cell_size * self._rates[0]
        side2 = self.cell_size * self._rates[1]
        self._n1 = max(1, int(np.ceil((b1 - a1) / side1)))
        self._n2 = max(1, int(np.ceil((b2 - a2) / side2)))
        self._origin = (a1, a2)
        self._sides = ((b1 - a1) / self._n1, (b2 - a2) / self._n2)
        i = np.clip(((self.nodes[:, 0] - a1) / self._sides[0]).astype(int), 0, self._n1 - 1)
        j = np.clip(((self.nodes[:, 1] - a2) / self._sides[1]).astype(int), 0, self._n2 - 1)
        flat = i * self._n2 + j
        self._order = np.argsort(flat, kind="stable")
        self._starts = np.searchsorted(
            flat[self._order], np.arange(self._n1 * self._n2 + 1)
        )

    def _candidates(self, u, radius):
        a1, a2 = self._origin
        lo1 = int((u[0] - radius * self._rates[0] - a1) / self._sides[0])
        hi1 = int((u[0] + radius * self._rates[0] - a1) / self._sides[0])
        lo2 = int((u[1] - radius * self._rates[1] - a2) / self._sides[1])
        hi2 = int((u[1] + radius * self._rates[1] - a2) / self._sides[1])
        lo1, hi1 = max(lo1, 0), min(hi1, self._n1 - 1)
        lo2, hi2 = max(lo2, 0), min(hi2, self._n2 - 1)
        chunks = []
        for i in range(lo1, hi1 + 1):
            base = i * self._n2
            s, e = self._starts[base + lo2], self._starts[base + hi2 + 1]
            chunks.append(self._order[s:e])
        return np.concatenate(chunks) if chunks else np.empty(0, dtype=int)


def neighbors_within(index, u, radius):
    """Ids of exactly the nodes with geodesic distance < radius from u."""
    u = np.asarray(u, dtype=float)
    cand = index._candidates(u, radius)
    if len(cand) == 0:
        return np.empty(0, dtype=int)
    d = geodesics.analytic_distances(index.chart, u[None, :], index.nodes[cand])
    ids = cand[d < radius]
    return np.sort(ids)
