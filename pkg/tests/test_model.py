"""Tests for the core model: parameter validation, derived rates, and the
nonlinear-coupling estimate."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringsfwm.errors import InvalidParameterError
from ringsfwm.model import (
    EPSILON_0,
    HBAR,
    MaterialEstimate,
    RingSystem,
    derive_rates,
    detuning,
    estimate_nonlinear_couplings,
)


def make_system(**overrides):
    kwargs = dict(
        omega_P=1.216e15, omega_S=1.216e15, omega_I=1.216e15,
        v_P=1.5e8, v_S=1.5e8, v_I=1.5e8,
        Gamma_P=1e10, Gamma_S=1e10, Gamma_I=1e10,
        M_P=1e10, M_S=1e10, M_I=1e10, lambda_fwm=1.0)
    kwargs.update(overrides)
    return RingSystem.from_rates(**kwargs)


class TestValidation:
    def test_negative_speed_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(v_S=-1.0)

    def test_zero_speed_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(v_P=0.0)

    def test_negative_loss_speed_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(u_I=-2.0)

    def test_undamped_mode_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(Gamma_S=0.0, M_S=0.0)

    def test_negative_rate_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(M_I=-1e9)

    def test_nonfinite_detuning_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_system(omega_S=np.inf)

    def test_loss_speed_defaults_to_channel_speed(self):
        sys = make_system(v_S=2.0e8)
        assert sys.u_S == 2.0e8
        assert sys.u_P == sys.v_P


class TestDerivedRates:
    @given(
        g=st.floats(1e6, 1e12),
        m=st.floats(0.0, 1e12),
        v=st.floats(1e6, 1e9),
    )
    @settings(max_examples=50, deadline=None)
    def test_from_rates_roundtrip(self, g, m, v):
        sys = make_system(Gamma_S=g, M_S=m, v_S=v)
        assert sys.Gamma("S") == pytest.approx(g, rel=1e-12)
        assert sys.M("S") == pytest.approx(m, rel=1e-12, abs=1e-3)
        assert sys.Gamma_bar("S") == pytest.approx(g + m, rel=1e-12)

    def test_rates_with_distinct_loss_speed(self):
        sys = make_system(M_I=3e9, u_I=0.7e8)
        assert sys.M("I") == pytest.approx(3e9, rel=1e-12)

    def test_critical_coupling_flags(self):
        rates = derive_rates(make_system())
        assert all(rates.critical_coupling.values())
        rates = derive_rates(make_system(M_S=2e10))
        assert not rates.critical_coupling["S"]
        assert rates.critical_coupling["P"]
        assert rates.Gamma_bar["S"] == pytest.approx(3e10)

    def test_detuning(self):
        sys = make_system(omega_S=1.217e15, omega_I=1.215e15)
        assert detuning(sys) == pytest.approx(0.0, abs=1e3)
        sys = make_system(omega_S=1.217e15)
        assert detuning(sys) == pytest.approx(1e12, rel=1e-9)

    def test_replace(self):
        sys = make_system().replace(lambda_fwm=2.0)
        assert sys.lambda_fwm == 2.0


class TestNonlinearEstimate:
    def test_reference_value(self):
        # Hand evaluation of 3 hbar omega_P^2 chi3 / (4 eps0 n^4 Omega):
        # 3 * 1.054571817e-34 * (1.216e15)^2 * 2.5e-21
        #   / (4 * 8.8541878128e-12 * 16 * 1e-16) = 20.63839262...
        est = MaterialEstimate(chi3=2.5e-21, n=2.0, Omega_ring=1e-16,
                               omega_P=1.216e15)
        nl = estimate_nonlinear_couplings(est)
        assert nl.lambda_fwm == pytest.approx(20.638392624288883, rel=1e-12)

    def test_coupling_ratios(self):
        est = MaterialEstimate(chi3=1e-21, n=1.8, Omega_ring=5e-17,
                               omega_P=1.3e15)
        nl = estimate_nonlinear_couplings(est)
        assert nl.eta_spm == pytest.approx(nl.lambda_fwm / 2.0, rel=1e-15)
        assert nl.zeta_xpm == pytest.approx(2.0 * nl.lambda_fwm, rel=1e-15)

    @given(c=st.floats(1e-22, 1e-20), w=st.floats(5e14, 3e15))
    @settings(max_examples=25, deadline=None)
    def test_linearity_in_chi3_and_quadratic_in_omega(self, c, w):
        base = estimate_nonlinear_couplings(
            MaterialEstimate(chi3=c, n=2.0, Omega_ring=1e-16, omega_P=w))
        doubled = estimate_nonlinear_couplings(
            MaterialEstimate(chi3=2 * c, n=2.0, Omega_ring=1e-16, omega_P=w))
        assert doubled.lambda_fwm == pytest.approx(2 * base.lambda_fwm,
                                                   rel=1e-12)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(InvalidParameterError):
            MaterialEstimate(chi3=1e-21, n=0.0, Omega_ring=1e-16,
                             omega_P=1e15)
        with pytest.raises(InvalidParameterError):
            MaterialEstimate(chi3=1e-21, n=2.0, Omega_ring=-1.0,
                             omega_P=1e15)

    def test_constants(self):
        assert HBAR == pytest.approx(1.054571817e-34, rel=1e-12)
        assert EPSILON_0 == pytest.approx(8.8541878128e-12, rel=1e-12)
