import math

import numpy as np
import pytest

from decobell.bond_spectrum import ModelParams, coefficients_K
from decobell.corrkit import validate_state, xstate_from_correlators
from decobell.decorated_model import (
    Region,
    correlators,
    critical_temperature,
    measures,
    measures_from_correlators,
    qpt_boundary,
    specific_heat,
    zero_temperature_limits,
)
from decobell.errors import DegeneratePointError, RegimeWarning


class TestQptBoundary:
    def test_reference_point(self):
        assert qpt_boundary(1.0, 2.0) == 1.5

    def test_isotropic_limit(self):
        assert qpt_boundary(1.0, 1.0) == 0.0

    def test_linear_in_j(self):
        assert qpt_boundary(2.0, 2.0) == 3.0


class TestCorrelators:
    def test_decoupled_backbone(self):
        p = ModelParams(j1=0.0)
        cs = correlators(p, 1.0)
        k = coefficients_K(p, 1.0)
        assert cs.q_mumu == 0.0
        assert cs.m_z == 0.0
        assert cs.ds_z == 0.0
        assert cs.q_xx == pytest.approx((k.k1 + k.k2) / 8.0, abs=1e-14)
        assert cs.q_zz == pytest.approx((k.k3 + k.k4) / 8.0, abs=1e-14)

    def test_magnetization_onset_at_criticality(self):
        # T_c = 0.115 for J1 = 2.102
        p = ModelParams(j1=2.102)
        assert correlators(p, 0.1145).m_z != 0.0
        assert correlators(p, 0.1155).m_z == 0.0

    def test_neel_phase_order_parameters(self):
        cs = correlators(ModelParams(j1=1.2), 0.01)
        assert cs.m_z == 0.0
        assert cs.ds_z > 0.0
        assert cs.q_mumu < 0.0

    def test_assembled_state_is_physical(self):
        for j1 in (0.0, 0.5, 1.2, 1.6, 2.2):
            for t in (0.0015, 0.02, 0.1, 0.5, 2.0):
                cs = correlators(ModelParams(j1=j1), t)
                state = xstate_from_correlators(cs.m_z, cs.ds_z, cs.q_zz, cs.q_xx)
                assert validate_state(state, tol=1e-9) == []
                assert abs(cs.q_mumu) <= 0.25 + 1e-12
                assert abs(cs.q_xx) <= 0.25 + 1e-12
                assert abs(cs.q_zz) <= 0.25 + 1e-12

    def test_invalid_temperature(self):
        with pytest.raises(ValueError):
            correlators(ModelParams(), 0.0)
        with pytest.raises(ValueError):
            correlators(ModelParams(), -1.0)

    def test_low_temperature_flagged(self):
        with pytest.warns(RegimeWarning):
            correlators(ModelParams(j1=1.0), 5e-5)


class TestMeasures:
    def test_neel_phase_is_nonlocal(self):
        ms = measures(ModelParams(j1=1.2), 0.01)
        assert ms.b > 2.0
        assert ms.region is Region.I

    def test_polarized_phase_local_unentangled(self):
        ms = measures(ModelParams(j1=1.9), 0.01)
        assert ms.b <= 2.0
        assert ms.c == 0.0
        assert ms.region is Region.III

    def test_thermal_destruction(self):
        ms = measures(ModelParams(j1=1.2), 10.0)
        assert ms.b < 2.0
        assert ms.c == 0.0
        assert ms.region is Region.III

    def test_branches_consistent(self):
        ms = measures(ModelParams(j1=1.5), 0.3)
        assert ms.b == max(ms.n1, ms.n2)

    def test_entangled_local_window_exists(self):
        ms = measures(ModelParams(j1=1.2), 0.08)
        assert ms.b <= 2.0 and ms.c > 0.0
        assert ms.region is Region.II


class TestCriticalTemperature:
    @pytest.mark.parametrize("j1,expected", [
        (1.351, 0.035),
        (1.201, 0.063),
        (1.802, 0.063),
        (2.102, 0.115),
    ])
    def test_reported_transition_temperatures(self, j1, expected):
        tc = critical_temperature(ModelParams(j1=j1))
        assert tc == pytest.approx(expected, abs=0.002)

    def test_no_order_without_backbone_coupling(self):
        assert critical_temperature(ModelParams(j1=0.0)) is None

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            critical_temperature(ModelParams(j1=1.0), t_lo=1.0, t_hi=0.5)

    def test_close_transitions_are_distinct(self):
        # the two couplings reported at the same rounded temperature
        # actually order at slightly different points
        t1 = critical_temperature(ModelParams(j1=1.201))
        t2 = critical_temperature(ModelParams(j1=1.802))
        assert abs(t1 - t2) > 1e-4


class TestZeroTemperatureLimits:
    def test_polarized_side(self):
        for j1 in (1.9, 2.0):
            cs = zero_temperature_limits(ModelParams(j1=j1))
            assert (cs.q_xx, cs.q_zz, cs.m_z, cs.ds_z) == (0.0, 0.25, 0.5, 0.0)
            ms = measures_from_correlators(cs, ModelParams(j1=j1))
            assert ms.b == pytest.approx(2.0, abs=1e-14)
            assert ms.c == 0.0

    def test_neel_side(self):
        cs = zero_temperature_limits(ModelParams(j1=1.0))
        omega = math.hypot(1.0, 2.0)
        assert cs.q_xx == pytest.approx(2.0 / (4.0 * omega), rel=1e-15)
        assert cs.q_zz == -0.25
        assert cs.ds_z == pytest.approx(1.0 / (2.0 * omega), rel=1e-15)
        ms = measures_from_correlators(cs, ModelParams(j1=1.0))
        assert ms.b > 2.0

    def test_degenerate_boundary_rejected(self):
        with pytest.raises(DegeneratePointError):
            zero_temperature_limits(ModelParams(j1=1.5))

    def test_decoupled_backbone(self):
        cs = zero_temperature_limits(ModelParams(j1=0.0))
        assert cs.q_mumu == 0.0 and cs.ds_z == 0.0
        assert cs.q_xx == 0.25

    @pytest.mark.parametrize("j1", [1.0, 1.9])
    def test_low_temperature_consistency(self, j1):
        p = ModelParams(j1=j1)
        cold = correlators(p, 0.0015)
        limit = zero_temperature_limits(p)
        for name in ("q_xx", "q_zz", "m_z", "ds_z"):
            assert getattr(cold, name) == pytest.approx(getattr(limit, name), abs=1e-3)
        ms_cold = measures_from_correlators(cold, p)
        ms_limit = measures_from_correlators(limit, p)
        assert ms_cold.b == pytest.approx(ms_limit.b, abs=1e-3)
        assert ms_cold.c == pytest.approx(ms_limit.c, abs=1e-3)


class TestSmoothness:
    def test_branches_smooth_above_transition(self):
        # away from T_c each branch is analytic: the second-derivative
        # estimate must not grow when the grid is refined
        p = ModelParams(j1=1.351)

        def max_second(step):
            ts = np.arange(0.05, 0.1, step)
            n1 = np.array([measures(p, float(t)).n1 for t in ts])
            return np.abs(np.diff(n1, 2)).max() / step**2

        coarse = max_second(1e-3)
        fine = max_second(5e-4)
        assert fine < 1.5 * coarse

    def test_bell_kink_coincides_with_branch_crossing(self):
        from decobell.phase_analysis import detect_kink
        p = ModelParams(j1=1.802)
        kink = detect_kink(p, 0.07, 0.5)
        ms = measures(p, kink.location)
        assert ms.n1 == pytest.approx(ms.n2, abs=1e-5)

    def test_specific_heat_peaks_at_transition(self):
        p = ModelParams(j1=1.351)
        tc = critical_temperature(p)
        near = specific_heat(p, tc * 1.02)
        far = specific_heat(p, tc * 1.8)
        assert near > 2.0 * far
