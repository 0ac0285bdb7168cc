"""Experiment orchestration: test functions, sample building, error tables.

A run sweeps node counts on one surface for one test function and one or
more Taylor orders, evaluating the localized interpolant on a fixed
evaluation set and reporting MAE/RMSE together with point-set statistics.
Runs are deterministic given the seed.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence, Union

import numpy as np

from . import geometry, pointsets
from .basis import BasisConfig
from .errors import EmptyStencil, InsufficientRows, UnknownFunction
from .geodesics import analytic_distances
from .interpolant import (
    GRADED_MULTI_INDICES,
    SampleSite,
    hb_eval,
    interpolant_config,
    multi_indices_up_to,
)

ORDER_NAMES = ("T0", "T1", "T2")
LACUNARY_KINDS = ("none", "half-first-derivatives", "half-second-derivatives")
CSV_HEADER = "n,order,mae,rmse,fill,sep,seconds"
SAMPLE_CSV_HEADER = "id,v1,v2,f,f_v1,f_v2,f_v1v1,f_v1v2,f_v2v2,mask"
POINT_CSV_HEADER = "id,v1,v2,x,y,z"

MIN_STENCIL = 12  # adaptive radius targets at least this many nodes in range


def make_chart(surface):
    if surface == "sphere":
        return geometry.sphere_cap()
    if surface == "cylinder":
        return geometry.cylinder()
    if surface == "cone":
        return geometry.cone()
    if surface == "torus":
        return geometry.torus()
    raise ValueError(f"unknown surface {surface!r}")


# --------------------------------------------------------------------------
# trivariate test functions with analytic derivatives
# --------------------------------------------------------------------------

def test_function(fid, point):
    """Value, gradient and Hessian of a test function at ambient points."""
    p = np.asarray(point, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    zeros = np.zeros_like(x)
    if fid == "f1":
        ex = 0.1 * np.exp(x)
        eyz = 0.2 * np.exp(y + z)
        value = ex + eyz
        grad = np.stack([ex, eyz, eyz], axis=-1)
        hess = np.stack(
            [
                np.stack([ex, zeros, zeros], axis=-1),
                np.stack([zeros, eyz, eyz], axis=-1),
                np.stack([zeros, eyz, eyz], axis=-1),
            ],
            axis=-2,
        )
        return value, grad, hess
    if fid == "f2":
        sx, sy, sz = np.sin(x), np.sin(y), np.sin(z)
        cx, cy, cz = np.cos(x), np.cos(y), np.cos(z)
        value = sx * sy * sz
        grad = np.stack([cx * sy * sz, sx * cy * sz, sx * sy * cz], axis=-1)
        hess = np.stack(
            [
                np.stack([-value, cx * cy * sz, cx * sy * cz], axis=-1),
                np.stack([cx * cy * sz, -value, sx * cy * cz], axis=-1),
                np.stack([cx * sy * cz, sx * cy * cz, -value], axis=-1),
            ],
            axis=-2,
        )
        return value, grad, hess
    raise UnknownFunction(fid)


# --------------------------------------------------------------------------
# configuration and report types
# --------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    surface: str = "sphere"
    function: str = "f1"
    taylor_order: Union[str, Sequence[str]] = ("T0", "T1", "T2")
    n: Sequence[int] = (500, 1000, 2000, 4000, 8000, 16000)
    n_eval: int = 50
    basis: BasisConfig = field(default_factory=BasisConfig)
    lacunary: str = "none"
    seed: int = 2
    out: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.taylor_order, str):
            self.taylor_order = (self.taylor_order,)
        self.taylor_order = tuple(self.taylor_order)
        for name in self.taylor_order:
            if name not in ORDER_NAMES:
                raise ValueError(f"unknown Taylor order {name!r}")
        self.n = tuple(int(x) for x in self.n)
        if any(x <= 0 for x in self.n):
            raise ValueError("n values must be positive")
        if self.lacunary not in LACUNARY_KINDS:
            raise ValueError(f"lacunary must be one of {LACUNARY_KINDS}")
        if isinstance(self.basis, dict):
            self.basis = BasisConfig(**self.basis)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls(**json.load(fh))

    def echo(self):
        d = asdict(self)
        d["basis"] = asdict(self.basis)
        d["taylor_order"] = list(self.taylor_order)
        d["n"] = list(self.n)
        return d


@dataclass
class ExperimentRow:
    n: int
    order: str
    mae: float
    rmse: float
    fill: float
    sep: float
    seconds: float


@dataclass
class ErrorReport:
    rows: List[ExperimentRow]
    config: dict
    wall_seconds: float

    def to_json(self):
        return json.dumps(
            {
                "config": self.config,
                "wall_seconds": self.wall_seconds,
                "rows": [asdict(r) for r in self.rows],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        rows = [ExperimentRow(**r) for r in raw["rows"]]
        return cls(rows=rows, config=raw["config"], wall_seconds=raw["wall_seconds"])


def error_metrics(residuals):
    """(MAE, RMSE) of a residual vector."""
    r = np.abs(np.asarray(residuals, dtype=float))
    return float(r.max()), float(np.sqrt(np.mean(r**2)))


# --------------------------------------------------------------------------
# sample construction
# --------------------------------------------------------------------------

def _order_k(name):
    return ORDER_NAMES.index(name)


def _beta_order(beta):
    return beta[0] + beta[1]


def _hess_slot(beta):
    return {(2, 0): (0, 0), (1, 1): (0, 1), (0, 2): (1, 1)}[beta]


def _lacunary_drop(lacunary):
    if lacunary == "half-first-derivatives":
        return {(1, 0), (0, 1)}
    if lacunary == "half-second-derivatives":
        return {(2, 0), (1, 1), (0, 2)}
    return set()


def _make_samples(chart, fid, nodes_v, nodes_xyz, order_k, lacunary="none"):
    value, grad, hess = test_function(fid, nodes_xyz)
    _, g_loc, h_loc = geometry.pushforward_derivatives(
        (value, grad, hess), chart, nodes_v
    )
    betas = multi_indices_up_to(order_k)
    drop = _lacunary_drop(lacunary)
    samples = []
    for i in range(len(nodes_v)):
        data = {}
        for b in betas:
            if i % 2 == 0 and b in drop:
                continue  # every second node loses these derivatives
            if b == (0, 0):
                data[b] = float(value[i])
            elif _beta_order(b) == 1:
                data[b] = float(g_loc[i, 0] if b == (1, 0) else g_loc[i, 1])
            else:
                a, c = _hess_slot(b)
                data[b] = float(h_loc[i, a, c])
        samples.append(SampleSite(id=i, v=nodes_v[i], ambient=nodes_xyz[i], data=data))
    return samples


def build_samples(config, n=None, order=None):
    """SampleSite list for one node count of the experiment.

    Derivative data is analytic: ambient gradients and Hessians of the test
    function pushed through the chart. The lacunary setting removes its
    multi-indices from every even-id node.
    """
    chart = make_chart(config.surface)
    n = int(n if n is not None else config.n[0])
    order = order if order is not None else max(config.taylor_order, key=_order_k)
    nodes_v, nodes_xyz = pointsets.nodes_on_surface(chart, n)
    return _make_samples(
        chart, config.function, nodes_v, nodes_xyz, _order_k(order), config.lacunary
    )


# --------------------------------------------------------------------------
# experiment runner
# --------------------------------------------------------------------------

def adaptive_radii(chart, nodes_v, eval_v, stencil=MIN_STENCIL):
    # Smallest per-point radius giving each evaluation point at least
    # ``stencil`` nodes strictly in range. A single global radius sized for
    # the sparsest point would balloon stencils in dense regions (the cone
    # apex most of all), dragging in far nodes with large parameter offsets.
    k = min(stencil, len(nodes_v))
    radii = pointsets.knn_radius(chart, nodes_v, eval_v, k)
    return radii * (1.0 + 1e-9) + 1e-12


def _eval_errors(chart, samples, basis_template, index, eval_v, truth, radii):
    predictions = np.empty(len(eval_v))
    for j, u in enumerate(eval_v):
        delta = float(radii[j])
        ids = pointsets.neighbors_within(index, u, delta)
        if len(ids) == 0:
            raise EmptyStencil(f"no nodes within {delta} of evaluation point {u}")
        d = analytic_distances(chart, u[None, :], index.nodes[ids])
        stencil = [samples[i] for i in ids]
        icfg = interpolant_config(replace(basis_template, delta=delta), stencil)
        predictions[j] = hb_eval(stencil, icfg, u, d)
    return predictions - truth


def run_experiment(config):
    """Run the configured sweep and return the assembled ErrorReport."""
    t_start = time.perf_counter()
    chart = make_chart(config.surface)
    rows = []
    for n in config.n:
        nodes_v, nodes_xyz = pointsets.nodes_on_surface(chart, n)
        eval_v, eval_xyz = pointsets.eval_points(chart, config.n_eval, config.seed)
        truth = test_function(config.function, eval_xyz)[0]
        stats = pointsets.point_set_stats(chart, nodes_v)
        if config.basis.delta is not None:
            radii = np.full(len(eval_v), config.basis.delta)
        else:
            radii = adaptive_radii(chart, nodes_v, eval_v)
        index = pointsets.CellIndex(chart, nodes_v, float(np.max(radii)))
        for order in config.taylor_order:
            t_row = time.perf_counter()
            k = _order_k(order)
            samples = _make_samples(
                chart, config.function, nodes_v, nodes_xyz, k, config.lacunary
            )
            bcfg = replace(config.basis, k=k)
            try:
                residuals = _eval_errors(
                    chart, samples, bcfg, index, eval_v, truth, radii
                )
            except EmptyStencil:
                # one retry with the radius doubled, then fail loudly
                try:
                    residuals = _eval_errors(
                        chart, samples, bcfg, index, eval_v, truth, 2.0 * radii
                    )
                except EmptyStencil as exc:
                    raise EmptyStencil(
                        f"row (n={n}, order={order}) failed twice with "
                        f"delta up to {2 * float(np.max(radii)):.4g}: {exc}"
                    ) from exc
            mae, rmse = error_metrics(residuals)
            rows.append(
                ExperimentRow(
                    n=n,
                    order=order,
                    mae=mae,
                    rmse=rmse,
                    fill=stats.fill,
                    sep=stats.separation,
                    seconds=time.perf_counter() - t_row,
                )
            )
    return ErrorReport(
        rows=rows, config=config.echo(), wall_seconds=time.perf_counter() - t_start
    )


def convergence_slope(report):
    """Per-order least-squares slope of log RMSE against log fill distance.

    Returns {order: (slope, fit_residual)}; needs at least four node counts
    per order.
    """
    out = {}
    orders = sorted({r.order for r in report.rows}, key=_order_k)
    for order in orders:
        rows = [r for r in report.rows if r.order == order]
        if len(rows) < 4:
            raise InsufficientRows(f"{order}: {len(rows)} rows, need >= 4")
        x = np.log([r.fill for r in rows])
        y = np.log([r.rmse for r in rows])
        coeffs, residuals, *_ = np.polyfit(x, y, 1, full=True)
        resid = float(np.sqrt(residuals[0] / len(rows))) if len(residuals) else 0.0
        out[order] = (float(coeffs[0]), resid)
    return out


# --------------------------------------------------------------------------
# file interfaces
# --------------------------------------------------------------------------

def emit(report, fmt, path):
    """Write the report as CSV (fixed column set) or JSON (full mirror)."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in report.rows:
                fh.write(
                    f"{r.n},{r.order},{r.mae!r},{r.rmse!r},{r.fill!r},{r.sep!r},{r.seconds!r}\n"
                )
    elif fmt == "json":
        with open(path, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def write_points_csv(path, v, xyz):
    with open(path, "w", newline="") as fh:
        fh.write(POINT_CSV_HEADER + "\n")
        for i, (vi, xi) in enumerate(zip(v, xyz)):
            cells = ",".join(repr(float(x)) for x in (*vi, *xi))
            fh.write(f"{i},{cells}\n")


def read_points_csv(path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return data[:, 1:3], data[:, 3:6]


def write_samples_csv(path, samples):
    """Sample CSV: one row per node, mask flags present multi-indices.

    Bit i of the mask corresponds to the i-th multi-index in graded order
    (f, f_v1, f_v2, f_v1v1, f_v1v2, f_v2v2); absent values are left empty.
    """
    with open(path, "w", newline="") as fh:
        fh.write(SAMPLE_CSV_HEADER + "\n")
        for s in samples:
            mask = 0
            cells = []
            for bit, beta in enumerate(GRADED_MULTI_INDICES):
                if beta in s.data:
                    mask |= 1 << bit
                    cells.append(repr(float(s.data[beta])))
                else:
                    cells.append("")
            v1, v2 = (repr(float(x)) for x in s.v)
            fh.write(f"{s.id},{v1},{v2},{','.join(cells)},{mask}\n")


def read_samples_csv(path, chart, max_order=2):
    """Load SampleSites from the sample CSV, keeping orders <= max_order."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != SAMPLE_CSV_HEADER:
            raise ValueError(f"unexpected sample CSV header {header}")
        for row in reader:
            sid = int(row[0])
            v = np.array([float(row[1]), float(row[2])])
            mask = int(row[9])
            data = {}
            for bit, beta in enumerate(GRADED_MULTI_INDICES):
                if mask & (1 << bit) and _beta_order(beta) <= max_order:
                    data[beta] = float(row[3 + bit])
            samples.append(
                SampleSite(id=sid, v=v, ambient=chart.forward(v), data=data)
            )
    return samples
