import json

import numpy as np
import pytest

from hbsurf.errors import InsufficientRows, UnknownFunction
from hbsurf import harness
from hbsurf.harness import (
    CSV_HEADER,
    ErrorReport,
    ExperimentConfig,
    ExperimentRow,
    build_samples,
    convergence_slope,
    emit,
    error_metrics,
    make_chart,
    read_points_csv,
    read_samples_csv,
    run_experiment,
    write_points_csv,
    write_samples_csv,
)


def fd_hessian_of(fid, p, h=1e-5):
    H = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            ea, eb = np.zeros(3), np.zeros(3)
            ea[a], eb[b] = h, h
            H[a, b] = (
                harness.test_function(fid, p + ea + eb)[0]
                - harness.test_function(fid, p + ea - eb)[0]
                - harness.test_function(fid, p - ea + eb)[0]
                + harness.test_function(fid, p - ea - eb)[0]
            ) / (4 * h * h)
    return H


# -------------------------------------------------------------- test functions

def test_f1_at_origin():
    value, grad, hess = harness.test_function("f1", np.zeros(3))
    assert value == pytest.approx(0.3)
    assert grad == pytest.approx([0.1, 0.2, 0.2])


def test_f2_at_origin():
    value, grad, _ = harness.test_function("f2", np.zeros(3))
    assert value == 0.0
    assert np.allclose(grad, 0.0)


@pytest.mark.parametrize("fid", ["f1", "f2"])
def test_hessians_match_finite_differences(fid):
    rng = np.random.default_rng(2)
    for _ in range(5):
        p = rng.uniform(-1, 1, 3)
        _, _, hess = harness.test_function(fid, p)
        assert np.allclose(hess, hess.T)
        assert np.abs(hess - fd_hessian_of(fid, p)).max() < 1e-6


def test_unknown_function():
    with pytest.raises(UnknownFunction):
        harness.test_function("f3", np.zeros(3))


# ------------------------------------------------------------------- samples

def test_build_samples_t0_sets():
    cfg = ExperimentConfig(surface="sphere", function="f1")
    samples = build_samples(cfg, n=20, order="T0")
    assert all(set(s.data) == {(0, 0)} for s in samples)


def test_build_samples_t2_full_sets():
    cfg = ExperimentConfig(surface="cylinder", function="f2")
    samples = build_samples(cfg, n=20, order="T2")
    assert all(len(s.data) == 6 for s in samples)


def test_build_samples_lacunary_pattern():
    cfg = ExperimentConfig(
        surface="sphere", function="f1", lacunary="half-first-derivatives"
    )
    samples = build_samples(cfg, n=20, order="T1")
    for s in samples:
        if s.id % 2 == 0:
            assert (1, 0) not in s.data and (0, 1) not in s.data
        else:
            assert (1, 0) in s.data and (0, 1) in s.data


def test_build_samples_derivatives_are_pushforwards():
    from hbsurf.geometry import pushforward_derivatives

    cfg = ExperimentConfig(surface="cone", function="f2")
    samples = build_samples(cfg, n=5, order="T2")
    chart = make_chart("cone")
    s = samples[3]
    value, grad, hess = harness.test_function("f2", s.ambient)
    _, g1, g2 = pushforward_derivatives((value, grad, hess), chart, s.v)
    assert s.data[(0, 0)] == pytest.approx(value)
    assert s.data[(1, 0)] == pytest.approx(g1[0])
    assert s.data[(1, 1)] == pytest.approx(g2[0, 1])


# ------------------------------------------------------------------- metrics

def test_error_metrics_by_hand():
    mae, rmse = error_metrics([1.0, 2.0, 2.0])
    assert mae == 2.0
    assert rmse == pytest.approx(np.sqrt(3.0))


def test_rmse_never_exceeds_mae():
    rng = np.random.default_rng(0)
    for _ in range(20):
        mae, rmse = error_metrics(rng.normal(size=30))
        assert rmse <= mae


# --------------------------------------------------------------- experiments

@pytest.fixture(scope="module")
def small_report():
    cfg = ExperimentConfig(surface="sphere", function="f1", n=(200, 400))
    return run_experiment(cfg)


def test_run_experiment_row_shape(small_report):
    assert len(small_report.rows) == 2 * 3
    for row in small_report.rows:
        assert row.rmse <= row.mae
        assert row.fill > 0 and row.sep > 0


def test_run_experiment_order_dominance(small_report):
    for n in (200, 400):
        at = {r.order: r.rmse for r in small_report.rows if r.n == n}
        assert at["T2"] < at["T1"] < at["T0"]


def test_run_experiment_deterministic(small_report):
    cfg = ExperimentConfig(surface="sphere", function="f1", n=(200, 400))
    again = run_experiment(cfg)
    for a, b in zip(small_report.rows, again.rows):
        assert (a.n, a.order, a.mae, a.rmse, a.fill, a.sep) == (
            b.n,
            b.order,
            b.mae,
            b.rmse,
            b.fill,
            b.sep,
        )


def test_run_experiment_reproduces_printed_magnitudes():
    # anchor cells of the reproduced tables, order-of-magnitude agreement
    cfg = ExperimentConfig(surface="cylinder", function="f1", taylor_order="T2", n=(500,))
    row = run_experiment(cfg).rows[0]
    assert 1.38e-5 < row.mae < 1.38e-3  # within 10x of the printed 1.38e-4
    cfg = ExperimentConfig(surface="sphere", function="f1", taylor_order="T2", n=(16000,))
    row = run_experiment(cfg).rows[0]
    assert 7.66e-9 < row.rmse < 7.66e-7  # within 10x of the printed 7.66e-8


def test_run_experiment_fixed_delta():
    cfg = ExperimentConfig(
        surface="cylinder",
        function="f1",
        taylor_order="T1",
        n=(300,),
        basis={"delta": 0.25},
    )
    report = run_experiment(cfg)
    assert report.rows[0].rmse < 0.1


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(taylor_order="T3")
    with pytest.raises(ValueError):
        ExperimentConfig(n=(0,))
    with pytest.raises(ValueError):
        ExperimentConfig(lacunary="most")
    cfg = ExperimentConfig(taylor_order="T1")
    assert cfg.taylor_order == ("T1",)


# ------------------------------------------------------------------- slopes

def synthetic_report(slope):
    rows = []
    for i, n in enumerate((100, 200, 400, 800)):
        fill = 2.0 ** (-i)
        rows.append(
            ExperimentRow(
                n=n, order="T0", mae=2.0 * fill**slope, rmse=fill**slope,
                fill=fill, sep=fill / 3.0, seconds=0.0,
            )
        )
    return ErrorReport(rows=rows, config={}, wall_seconds=0.0)


def test_convergence_slope_recovers_synthetic_rate():
    slopes = convergence_slope(synthetic_report(2.5))
    slope, resid = slopes["T0"]
    assert slope == pytest.approx(2.5, abs=1e-12)
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_convergence_slope_constant_rows():
    slopes = convergence_slope(synthetic_report(0.0))
    assert slopes["T0"][0] == pytest.approx(0.0, abs=1e-12)


def test_convergence_slope_insufficient_rows():
    report = synthetic_report(1.0)
    report.rows = report.rows[:3]
    with pytest.raises(InsufficientRows):
        convergence_slope(report)


# ------------------------------------------------------------- file interfaces

def test_emit_csv_shape(tmp_path, small_report):
    path = tmp_path / "table.csv"
    emit(small_report, "csv", path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(small_report.rows)


def test_emit_csv_stable_modulo_seconds(tmp_path):
    cfg = ExperimentConfig(surface="cone", function="f2", n=(150,))
    paths = []
    for tag in ("a", "b"):
        report = run_experiment(cfg)
        path = tmp_path / f"{tag}.csv"
        emit(report, "csv", path)
        paths.append(path)

    def strip_seconds(p):
        return ["".join(line.split(",")[:-1]) for line in p.read_text().splitlines()]

    assert strip_seconds(paths[0]) == strip_seconds(paths[1])


def test_emit_json_round_trip(tmp_path, small_report):
    path = tmp_path / "report.json"
    emit(small_report, "json", path)
    parsed = ErrorReport.from_json(path.read_text())
    assert parsed == small_report
    assert json.loads(path.read_text())["config"]["surface"] == "sphere"


def test_config_json_round_trip(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "surface": "cylinder",
                "function": "f2",
                "taylor_order": ["T0", "T2"],
                "n": [100, 200],
                "seed": 9,
                "basis": {"mu": 3.0, "k": 2},
            }
        )
    )
    cfg = ExperimentConfig.from_json(path)
    assert cfg.surface == "cylinder"
    assert cfg.taylor_order == ("T0", "T2")
    assert cfg.basis.mu == 3.0


def test_points_csv_round_trip(tmp_path):
    from hbsurf.pointsets import nodes_on_surface

    chart = make_chart("cone")
    v, xyz = nodes_on_surface(chart, 25)
    path = tmp_path / "points.csv"
    write_points_csv(path, v, xyz)
    header = path.read_text().splitlines()[0]
    assert header == "id,v1,v2,x,y,z"
    v2, xyz2 = read_points_csv(path)
    assert np.array_equal(v, v2) and np.array_equal(xyz, xyz2)


def test_samples_csv_round_trip(tmp_path):
    cfg = ExperimentConfig(
        surface="sphere", function="f1", lacunary="half-second-derivatives"
    )
    samples = build_samples(cfg, n=12, order="T2")
    path = tmp_path / "samples.csv"
    write_samples_csv(path, samples)
    header = path.read_text().splitlines()[0]
    assert header == "id,v1,v2,f,f_v1,f_v2,f_v1v1,f_v1v2,f_v2v2,mask"
    loaded = read_samples_csv(path, make_chart("sphere"))
    assert len(loaded) == len(samples)
    for a, b in zip(samples, loaded):
        assert a.id == b.id
        assert a.data == b.data
        assert np.array_equal(a.v, b.v)
