import math

import numpy as np
import pytest

from searange.errors import InvalidInputError
from searange.lti import ONE, FrequencyGrid, Polynomial, RationalTF
from searange.model import (
    PAPER_PLANT,
    Architecture,
    ControllerGains,
    ImpedanceParams,
    PlantParams,
    SeaConfig,
    spring_port,
)
from searange.passivity import (
    load_port_condition,
    passivity_observer,
    positive_real_margin,
    rezl_closed_form_no_dob,
    rezl_coefficients,
    rezl_compare,
    spring_port_condition,
)


class TestPositiveRealMargin:
    def test_passive_first_order(self):
        z = RationalTF(Polynomial((1.0, 1.0)), ONE)  # s + 1
        v = positive_real_margin(z)
        assert v.passive
        assert v.min_real == pytest.approx(1.0, rel=1e-9)

    def test_allpass_like_not_passive(self):
        z = RationalTF(Polynomial((-1.0, 1.0)), Polynomial((1.0, 1.0)))
        v = positive_real_margin(z)
        assert not v.passive
        assert v.min_real == pytest.approx(-1.0, rel=1e-3)

    def test_lossless_spring_is_passive(self):
        z = RationalTF(Polynomial((141350.0,)), Polynomial((0.0, 1.0)))  # K/s
        v = positive_real_margin(z, tol=1e-9 * 141350.0)
        assert v.passive
        assert v.min_real == pytest.approx(0.0, abs=1e-6)
        assert v.unstable_poles == 0

    def test_unstable_reported(self):
        z = RationalTF(ONE, Polynomial((-1.0, 1.0)))  # pole at +1
        v = positive_real_margin(z)
        assert not v.passive
        assert v.unstable_poles == 1

    def test_repeated_axis_pole_rejected(self):
        z = RationalTF(ONE, Polynomial((0.0, 0.0, 1.0)))  # 1/s^2
        v = positive_real_margin(z)
        assert not v.passive
        assert not v.axis_poles_ok

    def test_negative_residue_axis_pole_rejected(self):
        z = RationalTF(Polynomial((-5.0,)), Polynomial((0.0, 1.0)))  # -5/s
        v = positive_real_margin(z)
        assert not v.passive

    def test_refinement_finds_off_grid_dip(self):
        # Re of this band-stop-ish function dips between grid nodes
        z = RationalTF(
            Polynomial((100.0, 0.02, 1.0)), Polynomial((100.0, 20.0, 1.0))
        )
        coarse = FrequencyGrid.log_spaced(1e-1, 1e3, 25)
        v = positive_real_margin(z, coarse)
        dense = np.logspace(-1, 3, 200000)
        vals = np.array([z(1j * w) for w in dense])
        true_min = float(np.min(vals.real))
        assert v.min_real == pytest.approx(true_min, rel=1e-3)


def _cfg(kimp=1000.0, K_p=1.0, K_d=0.01, arch=Architecture.NO_DOB, plant=None):
    return SeaConfig(
        plant=plant or PAPER_PLANT,
        gains=ControllerGains(K_p=K_p, K_d=K_d),
        imp=ImpedanceParams(K_imp=kimp, B_imp=0.0),
        arch=arch,
    )


class TestLoadPortCondition:
    def test_zero_load_damping_matches_spring_condition(self):
        p = PlantParams(B_l=0.0)
        for kimp in (0.5 * p.K, 1.2 * p.K):
            cfg = _cfg(kimp=kimp, plant=p)
            z_s = spring_port(cfg).Z_s
            spring = spring_port_condition(cfg)
            load = load_port_condition(z_s, p, "strict_admittance")
            assert spring.passive == load.passive

    def test_threshold_variant_tracks_spring_sign(self):
        for kimp in (0.9 * PAPER_PLANT.K, 1.5 * PAPER_PLANT.K):
            cfg = _cfg(kimp=kimp)
            z_s = spring_port(cfg).Z_s
            spring = spring_port_condition(cfg)
            thresh = load_port_condition(z_s, PAPER_PLANT, "damping_threshold")
            assert spring.passive == thresh.passive

    def test_strict_is_less_conservative_than_spring(self):
        # a config non-passive at the spring port but fine at the load port
        cfg = _cfg(kimp=1.5 * PAPER_PLANT.K)
        z_s = spring_port(cfg).Z_s
        assert not spring_port_condition(cfg).passive
        assert load_port_condition(z_s, PAPER_PLANT, "strict_admittance").passive

    def test_spring_passive_implies_load_passive(self):
        rng = np.random.default_rng(7)
        for _ in range(8):
            cfg = _cfg(
                kimp=float(rng.uniform(0, PAPER_PLANT.K)),
                K_p=float(rng.uniform(0.2, 10)),
                K_d=float(rng.uniform(0.0, 0.1)),
            )
            z_s = spring_port(cfg).Z_s
            if spring_port_condition(cfg).passive:
                assert load_port_condition(z_s, cfg.plant, "strict_admittance").passive


class TestRezlClosedForm:
    def test_c4_is_exactly_load_damping_times_motor_inertia(self):
        co = rezl_coefficients(PAPER_PLANT, ControllerGains(K_p=2.0, K_d=0.03))
        assert co.c4 == PAPER_PLANT.B_l * PAPER_PLANT.J_m
        # paper parameter values: 100 * 6.4e-6
        assert co.c4 == pytest.approx(6.4e-4)

    def test_rederived_matches_numeric_evaluation(self):
        g = ControllerGains(K_p=1.0, K_d=0.01)
        omegas = np.logspace(-2, 5, 20)
        rows = rezl_compare(PAPER_PLANT, g, omegas)
        for r in rows:
            assert r["rederived"] == pytest.approx(r["numeric"], rel=1e-6)

    def test_degenerate_limit_zero_damping_zero_derivative(self):
        p = PlantParams(B_l=0.0)
        g = ControllerGains(K_p=1.5, K_d=0.0)
        rows = rezl_compare(p, g, np.logspace(-1, 4, 12))
        for r in rows:
            assert r["rederived"] == pytest.approx(r["numeric"], rel=1e-6)

    def test_printed_coefficients_recorded_for_comparison(self):
        g = ControllerGains(K_p=1.0, K_d=0.01)
        co = rezl_coefficients(PAPER_PLANT, g, source="printed")
        assert co.source == "printed"
        assert co.c4 == PAPER_PLANT.B_l * PAPER_PLANT.J_m
        # the printed form is evaluable away from its denominator root
        val = rezl_closed_form_no_dob(PAPER_PLANT, g, 10.0, source="printed")
        assert math.isfinite(val)

    def test_rederived_limits_to_load_damping_at_high_frequency(self):
        g = ControllerGains(K_p=1.0, K_d=0.01)
        v = rezl_closed_form_no_dob(PAPER_PLANT, g, 1e7)
        assert v == pytest.approx(PAPER_PLANT.B_l, rel=1e-3)


class TestPassivityObserver:
    def test_constant_positive_power(self):
        n = 1000
        led = passivity_observer(np.ones(n), np.ones(n), 1e-3)
        assert led.energy[-1] == pytest.approx(1.0)
        assert not led.violation

    def test_lossless_spring_energy_nonnegative(self):
        t = np.arange(0, 20, 1e-3)
        led = passivity_observer(np.sin(t), np.cos(t), 1e-3)
        assert led.min_energy >= -led.tol_energy
        assert not led.violation
        # energy has the (1 - cos 2t)/4-like shape: bounded, oscillating
        assert np.max(led.energy) <= 0.51

    def test_active_source_flagged(self):
        t = np.arange(0, 5, 1e-3)
        tau = np.sin(t) + 0.5
        led = passivity_observer(tau, -tau, 1e-3)
        assert led.violation
        assert np.all(np.diff(led.energy) <= 0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            passivity_observer([1.0, 2.0], [1.0], 1e-3)

    def test_bad_dt_rejected(self):
        with pytest.raises(InvalidInputError):
            passivity_observer([1.0], [1.0], 0.0)

    def test_sign_convention_flips(self):
        n = 100
        pos = passivity_observer(np.ones(n), np.ones(n), 1e-2, sign=1.0)
        neg = passivity_observer(np.ones(n), np.ones(n), 1e-2, sign=-1.0)
        assert neg.violation and not pos.violation
        np.testing.assert_allclose(neg.energy, -pos.energy)
