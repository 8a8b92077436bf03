import numpy as np
import pytest
import scipy.linalg as sla

from flutterbench import fem
from flutterbench.fem import AeroParams, BeamProperties, build_fem
from flutterbench.integrator import (BeamState, GenAlphaConfig, IntegrationError, initial_state,
                                     simulate, step, total_energy)


def undamped(n_elements=20, **kw):
    return build_fem(BeamProperties(zeta=0.0, n_elements=n_elements, **kw))


def first_mode(sys, amplitude):
    w2, V = sla.eigh(sys.K_L[2:, 2:], sys.M[2:, 2:], subset_by_index=[0, 0])
    u = np.zeros(sys.n_dof)
    u[2:] = V[:, 0]
    u *= amplitude / fem.measure_tip(sys, u)
    return u, float(np.sqrt(w2[0]))


def crossings(t, y):
    """Linearly interpolated upward zero crossings."""
    i = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    return t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i])


def test_alpha_parameters():
    c = GenAlphaConfig(1e-3, rho_inf=0.8)
    assert c.alpha_m == pytest.approx(0.6 / 1.8)
    assert c.alpha_f == pytest.approx(0.8 / 1.8)
    assert c.gamma == pytest.approx(0.5 - c.alpha_m + c.alpha_f)
    assert c.beta == pytest.approx(0.25 * (1 - c.alpha_m + c.alpha_f) ** 2)
    with pytest.raises(ValueError):
        GenAlphaConfig(0.0)
    with pytest.raises(ValueError):
        GenAlphaConfig(1e-3, rho_inf=1.5)


def test_zero_state_stays_zero():
    sys = build_fem(BeamProperties(membrane="von_karman"))
    s0 = initial_state(sys, AeroParams(p_inf=9.4))
    tr = simulate(sys, AeroParams(p_inf=9.4), s0, None, 0.05, GenAlphaConfig(1e-3))
    assert not np.any(tr.tip) and not np.any(tr.final.u)


def test_first_mode_period_at_fine_step():
    sys = undamped()
    u0, w1 = first_mode(sys, 1e-6)
    T1 = 2 * np.pi / w1
    dt = T1 / 200
    cfg = GenAlphaConfig(dt)
    tr = simulate(sys, None, initial_state(sys, None, u0), None, 5 * 200 * dt, cfg)
    period = np.mean(np.diff(crossings(tr.t, tr.tip)))
    assert period == pytest.approx(T1, rel=1e-3)


def test_energy_drift_free_vibration():
    sys = undamped()
    u0, w1 = first_mode(sys, 1e-4)
    dt = 2 * np.pi / w1 / 100
    for rho in (1.0, 0.8):
        cfg = GenAlphaConfig(dt, rho_inf=rho)
        tr = simulate(sys, None, initial_state(sys, None, u0), None, 400 * dt, cfg,
                      keep_states=True)
        E = np.array([total_energy(sys, s) for s in tr.states])
        assert np.max(np.abs(E - E[0])) < 1e-3 * E[0]


def test_second_order_convergence():
    sys = undamped(n_elements=4)
    u0, w1 = first_mode(sys, 5e-3)  # large enough for the membrane term to matter
    T1 = 2 * np.pi / w1
    t_end = T1
    s0 = initial_state(sys, None, u0)

    def tip(n):
        dt = t_end / n
        return simulate(sys, None, s0, None, t_end, GenAlphaConfig(dt)).tip[-1]

    ref = tip(3200)
    errs = [abs(tip(n) - ref) for n in (50, 100, 200)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8), rates


def test_large_step_remains_bounded():
    sys = undamped()
    u0, w1 = first_mode(sys, 1e-5)
    dt = 2 * np.pi / w1 / 4
    tr = simulate(sys, None, initial_state(sys, None, u0), None, 200 * dt, GenAlphaConfig(dt),
                  keep_states=True)
    E = np.array([total_energy(sys, s) for s in tr.states])
    assert np.all(np.isfinite(E)) and E.max() <= 1.05 * E[0]


def test_step_response_settles_on_static_deflection():
    sys = build_fem(BeamProperties())
    P = 1e-6
    dt = 2 * np.pi / sys.omega1 / 50
    cfg = GenAlphaConfig(dt)
    t_end = 250 * dt * 10
    tr = simulate(sys, None, initial_state(sys, None), lambda t: (0.0, P), t_end, cfg)
    static = fem.measure_tip(sys, np.linalg.solve(sys.K0, sys.f_c * P))
    assert tr.tip[-1] == pytest.approx(static, rel=1e-3)


def test_damped_decay_rate():
    sys = build_fem(BeamProperties())
    u0, _ = first_mode(sys, 1e-6)
    w1 = sys.omega1
    dt = 2 * np.pi / w1 / 200
    tr = simulate(sys, None, initial_state(sys, None, u0), None, 1000 * dt, GenAlphaConfig(dt))
    y = tr.tip
    peaks = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    ratio = y[peaks[2]] / y[peaks[1]]
    Td = tr.t[peaks[2]] - tr.t[peaks[1]]
    assert ratio == pytest.approx(np.exp(-0.05 * w1 * Td), rel=1e-2)


def test_root_dofs_stay_clamped():
    sys = build_fem(BeamProperties())
    dt = 5e-4
    s = initial_state(sys, None)
    L = sys.props.L
    for k in range(400):
        s, _ = step(sys, None, s, np.sin(20 * k * dt), 0.0, GenAlphaConfig(dt))
        assert abs(s.u[0]) < 1e-8 * L and abs(s.u[1]) < 1e-8
    assert np.abs(s.u).max() > 0


def test_initial_state_relaxes_root_and_balances_acceleration():
    sys = build_fem(BeamProperties())
    u0, _ = first_mode(sys, 1e-3)
    u0[:2] = 1.0
    s = initial_state(sys, None, u0, np.ones(sys.n_dof))
    assert s.v[0] == 0 and s.v[1] == 0
    assert abs(s.u[0]) < 1e-8
    np.testing.assert_allclose(
        sys.M @ s.a, fem.total_force(sys, None, s.u, s.v) - fem.internal_force(sys, s.u),
        atol=1e-9 * np.abs(sys.M @ s.a).max())


def test_newton_iterations_small_for_flutter_preset():
    sys = build_fem(BeamProperties(membrane="von_karman"))
    aero = AeroParams(p_inf=9.4)
    u0, _ = first_mode(sys, 5e-4)
    tr = simulate(sys, aero, initial_state(sys, aero, u0), None, 0.2, GenAlphaConfig(2e-4))
    assert tr.newton_iterations.max() <= 5


def test_newton_budget_exhaustion_raises():
    sys = build_fem(BeamProperties(membrane="von_karman"))
    u0, _ = first_mode(sys, 5e-2)
    cfg = GenAlphaConfig(1e-3, newton_max_iter=1, newton_tol=1e-14)
    with pytest.raises(IntegrationError):
        step(sys, None, initial_state(sys, None, u0), 0.0, 0.0, cfg)


def test_simulate_rejects_fractional_horizon():
    sys = build_fem(BeamProperties(n_elements=4))
    with pytest.raises(ValueError):
        simulate(sys, None, BeamState.zeros(sys.n_dof), None, 0.0105, GenAlphaConfig(1e-3))
