import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pitchanchor.control import DISABLED_TEMPLATE, AnchorGains, TemplateParams, total_wrench
from pitchanchor.dynamics import (
    BodyState,
    InertiaModel,
    NumericalAbort,
    Outcome,
    convergence_probe,
    energy,
    energy_rate,
    inertia_stance,
    simulate,
    simulate_probe,
    vector_field,
)
from pitchanchor.so3 import Rotation, random_rotation, rot_x, rot_y, rot_z

finite = st.floats(-5.0, 5.0, allow_nan=False)
quat = st.tuples(finite, finite, finite, finite).filter(
    lambda q: sum(v * v for v in q) > 1e-6).map(np.array)


class TestInertiaModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            InertiaModel((0.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            InertiaModel((1.0, 1.0, 1.0), m=0.0)
        with pytest.raises(ValueError):
            InertiaModel((0.1, 0.1, 1.0))

    def test_stance_inertia_examples(self):
        a, b, c = 0.2, 0.3, 0.4
        inert = InertiaModel((a, b, c))
        np.testing.assert_array_equal(inertia_stance(Rotation.identity(), inert), np.diag([a, b, c]))
        np.testing.assert_allclose(inertia_stance(rot_y(math.pi / 2), inert), np.diag([c, b, a]), atol=1e-15)

    @given(quat)
    def test_spectrum_is_invariant(self, q):
        inert = InertiaModel((0.2, 0.3, 0.4))
        M = inertia_stance(Rotation(q), inert)
        np.testing.assert_allclose(np.linalg.eigvalsh(M), [0.2, 0.3, 0.4], atol=1e-12)
        np.testing.assert_allclose(M, M.T, atol=1e-15)


class TestVectorField:
    def test_equilibrium(self, inert, gains, template):
        d = vector_field(BodyState(), inert, gains, template)
        for part in (d.R_dot, d.q_dot, d.omega_dot):
            assert np.array_equal(part, np.zeros_like(part))
        assert d.p_dot == 0.0 and d.v_dot == 0.0

    @given(st.floats(-3, 3), st.floats(-5, 5))
    def test_steady_pitch_spin(self, pitch, alpha):
        s = BodyState(rot_y(pitch), np.array([0.0, alpha, 0.0]))
        d = vector_field(s, InertiaModel(), AnchorGains(), DISABLED_TEMPLATE)
        np.testing.assert_allclose(d.omega_dot, 0.0, atol=1e-12)

    def test_unit_inertia_quarter_roll(self, unit_inertia):
        s = BodyState(rot_x(math.pi / 2))
        d = vector_field(s, unit_inertia, AnchorGains(1.0, 1.0), DISABLED_TEMPLATE)
        np.testing.assert_allclose(d.omega_dot, [1.0, 0.0, 0.0], atol=1e-15)

    def test_quaternion_rate_matches_rotation_rate(self, rng, inert, gains, template):
        for _ in range(20):
            s = BodyState(random_rotation(rng), rng.standard_normal(3))
            d = vector_field(s, inert, gains, template)
            eps = 1e-7
            plus = Rotation(s.R.q + eps * d.q_dot).matrix
            minus = Rotation(s.R.q - eps * d.q_dot).matrix
            np.testing.assert_allclose((plus - minus) / (2 * eps), d.R_dot, atol=1e-6)

    def test_momentum_balance_along_flow(self, rng, inert, gains, template):
        # d/dt (M(R) w) = tau: an independent check of the Euler equations
        s0 = BodyState(random_rotation(rng), rng.uniform(-1, 1, 3))
        h = 1e-4
        tr = simulate(s0, inert, gains, template, h=h, T=0.05)
        L = np.array([inertia_stance(tr.state(k).R, inert) @ tr.state(k).omega for k in range(len(tr))])
        dL = (L[2:] - L[:-2]) / (2 * h)
        for k in range(1, len(tr) - 1, 50):
            tau = total_wrench(tr.state(k), gains, template).torque
            np.testing.assert_allclose(dL[k - 1], tau, atol=1e-6)


class TestEnergy:
    def test_examples(self):
        assert energy(BodyState(), InertiaModel()) == 0.0
        e = energy(BodyState(omega=np.array([0.0, 2.0, 0.0])), InertiaModel((1.0, 0.5, 1.0)))
        assert e == pytest.approx(1.0)
        assert energy(BodyState(rot_x(math.pi)), InertiaModel()) == pytest.approx(2.0)

    def test_rate_examples(self):
        assert energy_rate(BodyState(omega=np.array([1.0, 0, 0])), AnchorGains(2.0, 1.0)) == -2.0
        assert energy_rate(BodyState(omega=np.array([0.0, 7.0, 0])), AnchorGains()) == 0.0
        assert energy_rate(BodyState(omega=np.array([1.0, 2.0, 1.0])), AnchorGains(2.0, 3.0)) == -5.0


class TestSimulate:
    def test_equilibrium_is_constant(self, inert, gains, template):
        tr = simulate(BodyState(), inert, gains, template, T=2.0)
        assert np.max(np.abs(tr.data[:, 1:] - tr.data[0, 1:])) <= 1e-12

    def test_roll_start_settles(self, inert, gains):
        tr = simulate(BodyState(rot_x(0.5)), inert, gains, DISABLED_TEMPLATE, T=30.0)
        assert np.max(np.diff(tr.eta)) <= 1e-12
        assert tr.swing[-1] <= 1e-6
        half = simulate(BodyState(rot_x(0.5)), inert, gains, DISABLED_TEMPLATE, h=5e-4, T=30.0)
        assert abs(half.swing[-1] - tr.swing[-1]) <= 1e-9

    def test_antipodal_start_stays(self, inert, gains, template):
        tr = simulate(BodyState(rot_x(math.pi)), inert, gains, template, T=10.0)
        assert np.min(tr.swing) >= math.pi - 1e-9

    def test_quaternion_stays_unit(self, rng, inert, gains, template):
        s0 = BodyState(random_rotation(rng), rng.uniform(-3, 3, 3))
        tr = simulate(s0, inert, gains, template, T=10.0)
        assert np.max(np.abs(np.linalg.norm(tr.quaternions, axis=1) - 1.0)) <= 1e-12

    def test_fourth_order(self, inert, gains, template):
        s0 = BodyState(rot_x(0.5) @ rot_z(0.2), np.array([0.5, 1.0, -0.3]), 0.05, -0.1)

        def end(h):
            return simulate(s0, inert, gains, template, h=h, T=2.0).data[-1, 1:10]

        ref = end(0.02 / 16)
        e1 = np.linalg.norm(end(0.02) - ref)
        e2 = np.linalg.norm(end(0.01) - ref)
        assert 12.0 < e1 / e2 < 20.0

    def test_template_drives_pitch_to_target(self, inert, gains):
        t = TemplateParams(pitch0=0.3)
        tr = simulate(BodyState(rot_x(0.4) @ rot_y(-0.5)), inert, gains, t, T=30.0)
        assert tr.column("pitch")[-1] == pytest.approx(0.3, abs=1e-6)
        assert tr.swing[-1] <= 1e-6

    def test_lateral_channel(self, inert, gains, template):
        # decoupled channel m p'' + kd p' + kp p = 0, solved in closed form
        tr = simulate(BodyState(p_y=0.1, v_y=0.2), inert, gains, template, T=10.0)
        A = np.array([[0.0, 1.0], [-gains.kp_lat / inert.m, -gains.kd_lat / inert.m]])
        for k in (0, 1000, 5000, 10000):
            exact = expm(A * tr.t[k]) @ np.array([0.1, 0.2])
            np.testing.assert_allclose([tr.column("py")[k], tr.column("vy")[k]], exact, atol=1e-11)

    def test_time_column(self, inert, gains, template):
        tr = simulate(BodyState(t=1.5), inert, gains, template, h=0.01, T=0.1)
        np.testing.assert_allclose(tr.t, 1.5 + 0.01 * np.arange(11))

    def test_bad_step_rejected(self, inert, gains, template):
        with pytest.raises(ValueError):
            simulate(BodyState(), inert, gains, template, h=0.0)
        with pytest.raises(ValueError):
            simulate(BodyState(), inert, gains, template, h=0.1, T=0.01)

    def test_blow_up_aborts(self, inert, gains, template):
        s0 = BodyState(rot_x(0.3), np.array([1e150, 1e150, 1e150]))
        with pytest.raises(NumericalAbort) as info:
            simulate(s0, inert, gains, template, h=0.1, T=10.0)
        assert info.value.step >= 1
        with pytest.raises(NumericalAbort):
            simulate_probe(s0, inert, gains, template, h=0.1, T=10.0)


class TestConvergence:
    def test_pitch_start(self, inert, gains):
        s0 = BodyState(rot_y(0.4), np.array([0.0, 1.0, 0.0]))
        c = convergence_probe(simulate(s0, inert, gains, DISABLED_TEMPLATE, T=5.0))
        assert c.outcome is Outcome.CONVERGED_P and c.time == 0.0

    def test_antipodal_start(self, inert, gains, template):
        c = convergence_probe(simulate(BodyState(rot_x(math.pi)), inert, gains, template, T=5.0))
        assert c.outcome is Outcome.CONVERGED_Q and c.time == 0.0

    def test_generic_start(self, rng, inert, gains, template):
        s0 = BodyState(random_rotation(rng), rng.uniform(-1, 1, 3))
        c = convergence_probe(simulate(s0, inert, gains, template, T=120.0))
        assert c.outcome is Outcome.CONVERGED_P and 0.0 < c.time < 120.0

    def test_short_run_is_undecided(self, inert, gains, template):
        c = convergence_probe(simulate(BodyState(rot_x(2.0)), inert, gains, template, T=1.0))
        assert c.outcome is Outcome.UNDECIDED and c.time is None

    def test_probe_matches_stored_trajectory(self, rng, inert, gains, template):
        for _ in range(3):
            s0 = BodyState(random_rotation(rng), rng.uniform(-3, 3, 3))
            full = convergence_probe(simulate(s0, inert, gains, template, T=20.0))
            fast = simulate_probe(s0, inert, gains, template, T=20.0)
            assert fast.convergence == full
            assert fast.max_eta_rise <= 1e-9 or template.enabled

    def test_tolerances_must_be_positive(self, inert, gains, template):
        tr = simulate(BodyState(), inert, gains, template, T=0.1)
        with pytest.raises(ValueError):
            convergence_probe(tr, 0.0, 1e-3)


@settings(max_examples=10, deadline=None)
@given(quat, st.tuples(finite, finite, finite))
def test_energy_never_increases_without_template(q, w):
    s0 = BodyState(Rotation(q), np.array(w) * 0.5)
    tr = simulate(s0, InertiaModel(), AnchorGains(), DISABLED_TEMPLATE, T=3.0)
    assert np.max(np.diff(tr.eta)) <= 1e-9
