import math

import numpy as np
import pytest

from decobell.bond_spectrum import ModelParams
from decobell.decorated_model import Region
from decobell.phase_analysis import (
    AXIS_J1,
    AXIS_T,
    ScanSeries,
    classify_region,
    contour_grid,
    derivative,
    detect_divergence,
    detect_kink,
    detect_sudden_change,
    iso_lines,
    scan,
    series_derivative,
)


class TestScan:
    def test_temperature_scan_shape(self):
        series = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.06, 1e-3)
        assert len(series.x) == 11
        assert np.all(np.diff(series.x) > 0)
        assert series.errors == []
        assert np.isfinite(series.field("b")).all()

    def test_single_interval(self):
        series = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.051, 1e-3)
        assert len(series.x) == 2

    def test_j1_scan_requires_temperature(self):
        with pytest.raises(ValueError):
            scan(ModelParams(), AXIS_J1, 1.0, 2.0, 0.1)

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            scan(ModelParams(), AXIS_T, 0.2, 0.1, 1e-3)
        with pytest.raises(ValueError):
            scan(ModelParams(), AXIS_T, -0.1, 0.1, 1e-3)

    def test_deterministic(self):
        a = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.06, 1e-3)
        b = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.06, 1e-3)
        np.testing.assert_array_equal(a.field("b"), b.field("b"))

    def test_unknown_field(self):
        series = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.06, 1e-3)
        with pytest.raises(ValueError):
            series.field("banana")

    def test_evaluator_matches_grid(self):
        series = scan(ModelParams(j1=1.2), AXIS_T, 0.05, 0.06, 1e-3)
        fn = series.evaluator("b")
        assert fn(float(series.x[3])) == series.field("b")[3]


class TestDerivative:
    def test_constant_series(self):
        x = np.linspace(0, 1, 20)
        assert np.abs(derivative(x, np.full(20, 3.7))).max() < 1e-12

    def test_linear_series(self):
        x = np.linspace(0, 1, 20)
        np.testing.assert_allclose(derivative(x, 2.5 * x - 1), 2.5, rtol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            derivative(np.array([0.0, 1.0]), np.array([1.0, 2.0]))

    def test_bell_derivative_peaks_at_transition(self):
        # divergence at T_c = 0.063 for J1 = 1.201
        series = scan(ModelParams(j1=1.201), AXIS_T, 0.03, 0.1, 1e-3)
        d = series_derivative(series, "b")
        assert series.x[int(np.argmax(np.abs(d)))] == pytest.approx(0.063, abs=0.002)


class TestDetectDivergence:
    def test_constant_series_empty(self):
        series = ScanSeries.from_values(np.linspace(0, 1, 100), b=np.full(100, 1.5))
        assert detect_divergence(series, "b") == []

    def test_synthetic_log_divergence_flagged(self):
        x0 = 0.5

        def f(x):
            return (x - x0) * math.log(abs(x - x0) + 1e-300) if x != x0 else 0.0

        x = np.linspace(0.005, 1.0, 200)
        series = ScanSeries.from_values(x, b=[f(v) for v in x])
        found = detect_divergence(series, "b", fn=f)
        assert len(found) == 1
        assert found[0].location == pytest.approx(x0, abs=0.01)
        assert found[0].kind == "CRITICAL"

    def test_synthetic_kink_not_flagged(self):
        x0 = 0.5

        def f(x):
            return 10.0 * (x - x0) if x > x0 else 0.0

        x = np.linspace(0.005, 1.0, 200)
        series = ScanSeries.from_values(x, b=[f(v) for v in x])
        assert detect_divergence(series, "b", fn=f) == []

    def test_model_transition_found(self):
        series = scan(ModelParams(j1=1.351), AXIS_T, 0.005, 0.1, 1e-3)
        found = detect_divergence(series, "b")
        assert len(found) == 1
        assert found[0].location == pytest.approx(0.035, abs=0.002)

    def test_kink_never_flagged(self):
        # the scan includes both T_c = 0.063 and the kink T_0 = 0.107
        series = scan(ModelParams(j1=1.802), AXIS_T, 0.02, 0.2, 1e-3)
        found = detect_divergence(series, "b")
        assert len(found) == 1
        assert found[0].location == pytest.approx(0.063, abs=0.002)
        kink = detect_kink(ModelParams(j1=1.802), 0.02, 0.2)
        assert all(abs(c.location - kink.location) > 0.01 for c in found)


class TestDetectSuddenChange:
    def test_smooth_series_empty(self):
        x = np.linspace(0, 1, 300)
        series = ScanSeries.from_values(x, b=np.sin(3 * x))
        assert detect_sudden_change(series, "b") == []

    def test_synthetic_step(self):
        x0 = 0.333

        def f(x):
            return 1.0 if x > x0 else 0.0

        x = np.linspace(0, 1, 501)
        series = ScanSeries.from_values(x, b=[f(v) for v in x])
        found = detect_sudden_change(series, "b", fn=f)
        assert len(found) == 1
        assert found[0].location == pytest.approx(x0, abs=2e-3)

    def test_quantum_transition_jump(self):
        series = scan(ModelParams(), AXIS_J1, 1.0, 2.0, 1e-3, t=0.0015)
        found = detect_sudden_change(series, "b")
        assert len(found) == 1
        assert found[0].location == pytest.approx(1.5, abs=0.002)
        assert found[0].kind == "QPT-JUMP"


class TestDetectKink:
    @pytest.mark.parametrize("j1,expected", [(1.802, 0.107), (2.102, 0.191)])
    def test_reported_kinks(self, j1, expected):
        point = detect_kink(ModelParams(j1=j1), 0.02, 0.5)
        assert point is not None
        assert point.kind == "KINK"
        assert point.location == pytest.approx(expected, abs=0.002)

    def test_no_crossing_returns_none(self):
        assert detect_kink(ModelParams(j1=1.802), 0.02, 0.05) is None

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            detect_kink(ModelParams(j1=1.802), 0.5, 0.2)


class TestClassifyRegion:
    def test_reference_points(self):
        assert classify_region(ModelParams(j1=1.2), 0.01) is Region.I
        assert classify_region(ModelParams(j1=1.9), 0.05) is Region.III
        assert classify_region(ModelParams(j1=1.2), 0.08) is Region.II


class TestContourGrid:
    def test_single_cell(self):
        grid = contour_grid(ModelParams(), 0.1, 0.11, 0.01, 1.0, 1.1, 0.1)
        assert len(grid.measures) == 4  # 2x2 points
        assert grid.field("b").shape == (2, 2)

    def test_row_major_layout(self):
        grid = contour_grid(ModelParams(), 0.1, 0.12, 0.01, 1.0, 1.2, 0.1)
        nj = len(grid.j1_values)
        assert grid.measures[1 * nj + 2].t == pytest.approx(grid.t_values[1])
        assert grid.measures[1 * nj + 2].j1 == pytest.approx(grid.j1_values[2])

    def test_magnetization_column_switch(self):
        # M_z switches on across T_c = 0.115 at J1 = 2.102
        grid = contour_grid(ModelParams(), 0.105, 0.125, 1e-3, 2.102, 2.103, 1e-3)
        col = grid.field("m_z")[:, 0]
        switches = [float(grid.t_values[i + 1])
                    for i in range(len(col) - 1) if (col[i] > 0) != (col[i + 1] > 0)]
        assert len(switches) == 1
        assert switches[0] == pytest.approx(0.115, abs=2e-3)

    def test_region_partition_and_nonlocality_implies_entanglement(self):
        grid = contour_grid(ModelParams(), 0.005, 0.3, 0.005, 0.2, 2.2, 0.02)
        b = grid.field("b")
        c = grid.field("c")
        regions = grid.regions()
        seen = set()
        for it in range(b.shape[0]):
            for ij in range(b.shape[1]):
                r = regions[it, ij]
                seen.add(r)
                if r is Region.I:
                    assert b[it, ij] > 2.0 and c[it, ij] > 0.0
                elif r is Region.II:
                    assert b[it, ij] <= 2.0 and c[it, ij] > 0.0
                else:
                    assert b[it, ij] <= 2.0 and c[it, ij] == 0.0
        assert seen == {Region.I, Region.II, Region.III}

    def test_enhancement_bends_iso_line(self):
        # at low T the B = 2.8 line sits near J1 = 0.40; thermal enhancement
        # pushes it right, so some columns cross it twice in T
        grid = contour_grid(ModelParams(), 0.001, 0.09, 2e-3, 0.3, 0.7, 5e-3)
        b = grid.field("b")
        twice = []
        for ij, j1 in enumerate(grid.j1_values):
            col = b[:, ij]
            crossings = np.sum((col[:-1] - 2.8) * (col[1:] - 2.8) < 0)
            if crossings >= 2:
                twice.append(float(j1))
        assert twice
        assert max(twice) > 0.42


class TestIsoLines:
    def test_linear_field_position(self):
        grid = contour_grid(ModelParams(), 0.1, 0.2, 0.05, 1.0, 1.2, 0.1)
        grid_field = np.tile(np.linspace(0.0, 1.0, len(grid.t_values))[:, None],
                             (1, len(grid.j1_values)))
        grid_synth = grid
        # overwrite the measured field with a synthetic linear ramp in T
        for it in range(len(grid.t_values)):
            for ij in range(len(grid.j1_values)):
                idx = it * len(grid.j1_values) + ij
                ms = grid.measures[idx]
                grid_synth.measures[idx] = type(ms)(
                    b=grid_field[it, ij], n1=ms.n1, n2=ms.n2, c=ms.c,
                    region=ms.region, t=ms.t, j1=ms.j1)
        segments = iso_lines(grid_synth, "b", 0.5)
        assert segments
        for (t1, _), (t2, _) in segments:
            assert t1 == pytest.approx(0.15, abs=1e-9)
            assert t2 == pytest.approx(0.15, abs=1e-9)

    def test_boundary_consistency_with_classifier(self):
        grid = contour_grid(ModelParams(), 0.01, 0.2, 0.005, 0.8, 1.6, 0.02)
        segments = iso_lines(grid, "b", 2.0)
        assert segments
        for (t1, j1a), (t2, j1b) in segments[::5]:
            tm, jm = 0.5 * (t1 + t2), 0.5 * (j1a + j1b)
            labels = set()
            for dt in (-0.006, 0.006):
                labels.add(classify_region(ModelParams(j1=jm), max(tm + dt, 1e-3)))
            for dj in (-0.021, 0.021):
                labels.add(classify_region(ModelParams(j1=jm + dj), tm))
            assert len(labels) >= 2  # the boundary separates distinct regions
