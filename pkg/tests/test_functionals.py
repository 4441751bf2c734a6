import json
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from conftest import EXAMPLE1, pressureless
from rotgas.certify import constant_state
from rotgas.fields import ROTATION, PhysicalParams, VortexData
from rotgas.functionals import (
    FunctionalSet,
    compute_functionals,
    momentum_evolution,
    monte_carlo_functionals,
)
from rotgas.quadrature import QuadratureError


def _fs_with(I0=(0.0, 0.0), P0=(0.0, 0.0)):
    return FunctionalSet(m0=0.0, e0=0.0, Ek0=0.0, pressure_excess0=0.0, G0=1.0, F10=0.0,
                         F20=0.0, P0=P0, I0=I0, dG0=0.0, A0=0.0, A4=0.0)


def _serial(fs):
    return json.dumps({k: (f"{v:.15g}" if isinstance(v, float) else str(v))
                       for k, v in fs.to_dict().items()}, sort_keys=True)


class TestComputeFunctionals:
    def test_constant_state(self):
        fs = compute_functionals(constant_state(2.0, 1.0))
        for name in ("m0", "e0", "Ek0", "F10", "F20"):
            assert getattr(fs, name) == pytest.approx(0.0, abs=1e-14)
        assert fs.G0 == pytest.approx(math.pi / 4.0, rel=1e-14)
        assert fs.P0 == (0.0, 0.0) and fs.I0 == (0.0, 0.0)

    def test_constant_state_analytic_path(self):
        fs = compute_functionals(VortexData(0.0, 0.0, mode="pressureless"))
        assert fs.G0 == pytest.approx(math.pi / 4.0, rel=1e-13)
        assert fs.m0 == 0.0 and fs.Ek0 == 0.0

    def test_pressureless_closed_forms_eps0(self):
        b = -0.05
        fs = compute_functionals(pressureless(b, 0.0))
        assert abs(fs.F10) < 1e-15
        assert fs.F20 == pytest.approx(math.pi * b / 6.0, abs=1e-12)
        assert fs.F20 == pytest.approx(-0.026180, abs=5e-7)
        assert fs.Ek0 == pytest.approx(math.pi * b * b / 24.0, abs=1e-14)

    @given(st.floats(-5, 5), st.floats(-20, 20))
    def test_pressureless_closed_forms(self, b, eps):
        fs = compute_functionals(pressureless(b, eps))
        assert fs.F10 == pytest.approx(math.pi * b * eps / 6.0, abs=1e-9)
        assert fs.F20 == pytest.approx(math.pi * b / 6.0, abs=1e-9)
        assert fs.Ek0 == pytest.approx(math.pi * (1 + eps * eps) * b * b / 24.0, rel=1e-9, abs=1e-9)
        # The unit-density disk has the background second moment only.
        assert fs.G0 == pytest.approx(math.pi / 4.0, rel=1e-12)
        assert fs.A4 == pytest.approx(2 * fs.e0 + fs.G0 - fs.F20, rel=1e-14)

    def test_derived_constants(self, example1_pos):
        fs = compute_functionals(example1_pos)
        p = example1_pos.params
        g, l = p.gamma, p.l
        assert fs.e0 == pytest.approx(fs.Ek0 + fs.pressure_excess0 / (g - 1), rel=1e-14)
        assert fs.A0 == pytest.approx(2 * (g - 1) * fs.e0 + l * l * fs.G0 - l * fs.F20, rel=1e-14)
        assert fs.dG0 == pytest.approx(fs.F10 + math.pi * p.rho_bar * p.sigma, rel=1e-14)
        assert fs.A1 is None and fs.A3 is None and fs.Gm is None  # gamma = 2, sigma > 0

    def test_gamma3_has_A1(self):
        d = VortexData(-1.0, 2.0, gamma=3.0)
        fs = compute_functionals(d)
        s2 = d.params.sigma ** 2
        assert fs.entropy_condition is True
        assert fs.A1 == pytest.approx(fs.A4 + 2 * (3 - 2) / (3 - 1) * s2 * fs.m0, rel=1e-14)

    def test_pressureless_has_Gm_and_A3(self):
        fs = compute_functionals(pressureless(-0.05, 3.0))
        assert fs.Gm == pytest.approx(0.5 * (fs.m0 + math.pi), rel=1e-14)
        assert fs.A3 == pytest.approx(2 * fs.e0 - (fs.Gm - fs.G0) - fs.F20, rel=1e-14)

    def test_total_mass_nonnegative(self, example1_pos):
        fs = compute_functionals(example1_pos)
        assert fs.m0 + example1_pos.params.rho_bar * math.pi > 0.0

    @pytest.mark.parametrize("rtol", [1e-15, 1e-3])
    def test_rejects_tolerance_out_of_range(self, rtol):
        with pytest.raises(ValueError):
            compute_functionals(pressureless(-0.05, 0.0), rtol)

    def test_quadrature_failure_propagates(self, example1_pos):
        with pytest.raises(QuadratureError) as info:
            compute_functionals(example1_pos, rtol=1e-14, order=2, max_depth=2)
        assert info.value.achieved > 0

    def test_monte_carlo_cross_check(self, example1_pos):
        fs = compute_functionals(example1_pos)
        mean, se = monte_carlo_functionals(example1_pos, 10_000_000, seed=7)
        rho_bar = example1_pos.params.rho_bar
        exact = {
            "m0": fs.m0, "Ek0": fs.Ek0, "pressure_excess0": fs.pressure_excess0,
            "G0": fs.G0, "F10": fs.F10, "F20": fs.F20,
            # MC integrates rho x over the disk; its background share vanishes.
            "P0_1": fs.P0[0], "P0_2": fs.P0[1], "I0_1": fs.I0[0], "I0_2": fs.I0[1],
        }
        assert rho_bar > 0
        for name, value in exact.items():
            assert abs(mean[name] - value) <= 3 * se[name] + 1e-12, name

    def test_monte_carlo_is_seeded(self):
        d = pressureless(-0.05, 1.0)
        a, _ = monte_carlo_functionals(d, 10_000, seed=3)
        b, _ = monte_carlo_functionals(d, 10_000, seed=3)
        assert a == b

    def test_deterministic_serialization_across_threads(self, example1_neg):
        ref = _serial(compute_functionals(example1_neg))
        with ThreadPoolExecutor(max_workers=4) as pool:
            outs = list(pool.map(lambda _: _serial(compute_functionals(example1_neg)), range(8)))
        assert all(o == ref for o in outs)

    def test_holder_on_random_parameter_sets(self):
        # 200 here; the acceptance suite runs the full 1000.
        rng = np.random.default_rng(11)
        for b, eps in rng.uniform(-5, 5, size=(200, 2)):
            try:
                d = VortexData(b, eps)
            except ValueError:
                d = VortexData(b, eps, mode="pressureless")  # Pi_bar + Pi <= 0 somewhere
            fs = compute_functionals(d)
            assert fs.F10**2 <= 4 * fs.G0 * fs.Ek0 * (1 + 1e-12)


class TestMomentumEvolution:
    def test_zero_momentum(self):
        params = PhysicalParams(2.0, 1.0, 1.0, 0.0, 1.0, 0.0)
        P, I = momentum_evolution(_fs_with(P0=(0.3, -0.2)), params, np.linspace(0, 10, 11))
        assert np.all(I == 0.0)
        assert np.all(P[0] == 0.3) and np.all(P[1] == -0.2)

    def test_no_rotation_is_affine(self):
        params = PhysicalParams(2.0, 0.0, 1.0, 0.0, 1.0, 0.0)
        t = np.linspace(0, 5, 6)
        P, I = momentum_evolution(_fs_with(I0=(1.0, 0.0)), params, t)
        np.testing.assert_array_equal(P[0], t)
        np.testing.assert_array_equal(P[1], 0.0)

    def test_quarter_period_against_runge_kutta(self):
        params = PhysicalParams(2.0, 1.0, 1.0, 0.0, 1.0, 0.0)
        I0 = np.array([1.0, 0.0])
        _, I = momentum_evolution(_fs_with(I0=tuple(I0)), params, np.pi / 2)
        np.testing.assert_allclose(I, [0.0, -1.0], atol=1e-15)

        l = params.l
        dI0 = -l * ROTATION @ I0

        def rhs(t, y):
            return np.concatenate([y[2:], -l * l * y[:2]])

        sol = solve_ivp(rhs, (0, np.pi / 2), np.concatenate([I0, dI0]), method="DOP853",
                        rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(I, sol.y[:2, -1], atol=1e-10)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.0, 5.0),
           st.lists(st.floats(0, 100), min_size=100, max_size=100))
    def test_norm_preserved(self, i1, i2, l, ts):
        params = PhysicalParams(2.0, l, 1.0, 0.0, 1.0, 0.0)
        _, I = momentum_evolution(_fs_with(I0=(i1, i2)), params, np.array(ts))
        np.testing.assert_allclose(np.hypot(I[0], I[1]), math.hypot(i1, i2), atol=1e-12)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1), st.floats(0.0, 3.0),
           st.floats(0.1, 10))
    def test_closed_form_satisfies_odes(self, i1, i2, p1, l, t):
        params = PhysicalParams(2.0, l, 1.0, 0.0, 1.0, 0.0)
        fs = _fs_with(I0=(i1, i2), P0=(p1, 0.0))
        h = 5e-4

        def P(s):
            return momentum_evolution(fs, params, s)[0]

        def I(s):
            return momentum_evolution(fs, params, s)[1]

        def d1(f):
            return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)

        np.testing.assert_allclose(d1(P), I(t), atol=1e-10)
        np.testing.assert_allclose(d1(I), -l * ROTATION @ I(t), atol=1e-10)
        # Second differences sit on a ~1e-9 roundoff floor in double precision.
        k = 2e-3
        d2I = (-I(t + 2 * k) + 16 * I(t + k) - 30 * I(t) + 16 * I(t - k) - I(t - 2 * k)) / (12 * k * k)
        np.testing.assert_allclose(d2I + l * l * I(t), 0.0, atol=1e-8)
