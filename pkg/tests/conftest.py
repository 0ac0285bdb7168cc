import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from hbsurf import geometry

AXIS_DIAG = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
KNIGHT = [(1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1)]


def lattice_shortest_path(chart, m, v_from, v_to, offsets):
    """Brute-force metric-graph oracle: Dijkstra over an m x m parameter grid.

    Edge weights are the trapezoidal metric length of each straight segment,
    exactly matching curve_length on the two-point path. Endpoints are
    snapped to the nearest grid node; returns (distance, snapped_from,
    snapped_to).
    """
    a1, b1, a2, b2 = chart.param_rect
    g1 = np.linspace(a1, b1, m)
    g2 = np.linspace(a2, b2, m)
    V = np.stack(np.meshgrid(g1, g2, indexing="ij"), axis=-1).reshape(-1, 2)
    g = geometry._metric_only(chart, V).reshape(m, m, 2, 2)
    idx = np.arange(m * m).reshape(m, m)
    h1, h2 = g1[1] - g1[0], g2[1] - g2[0]

    rows, cols, weights = [], [], []
    for di, dj in offsets:
        dv = np.array([di * h1, dj * h2])
        speed = np.sqrt(np.einsum("ijab,a,b->ij", g, dv, dv))
        i_lo, i_hi = max(0, -di), m - max(0, di)
        j_lo, j_hi = max(0, -dj), m - max(0, dj)
        src = idx[i_lo:i_hi, j_lo:j_hi]
        dst = idx[i_lo + di : i_hi + di, j_lo + dj : j_hi + dj]
        w = 0.5 * (
            speed[i_lo:i_hi, j_lo:j_hi]
            + speed[i_lo + di : i_hi + di, j_lo + dj : j_hi + dj]
        )
        rows.append(src.ravel())
        cols.append(dst.ravel())
        weights.append(w.ravel())
    graph = coo_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m * m, m * m),
    ).tocsr()

    def snap(v):
        i = int(np.argmin(np.abs(g1 - v[0])))
        j = int(np.argmin(np.abs(g2 - v[1])))
        return idx[i, j], np.array([g1[i], g2[j]])

    src_id, v_src = snap(v_from)
    dst_id, v_dst = snap(v_to)
    dist = dijkstra(graph, indices=[src_id])[0, dst_id]
    return float(dist), v_src, v_dst


@pytest.fixture(scope="session")
def torus_dijkstra_oracle():
    """400x400 torus lattice distances for the canonical nearby pair."""
    chart = geometry.torus()
    v_from, v_to = np.array([0.1, 0.1]), np.array([0.2, 0.3])
    d8, v_src, v_dst = lattice_shortest_path(chart, 400, v_from, v_to, AXIS_DIAG)
    d16, _, _ = lattice_shortest_path(chart, 400, v_from, v_to, AXIS_DIAG + KNIGHT)
    return {"chart": chart, "v_from": v_src, "v_to": v_dst, "d8": d8, "d16": d16}
