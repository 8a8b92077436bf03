import numpy as np
import pytest

from flutterbench import lti
from flutterbench.closed_loop import (DisturbanceSpec, SampledController, amplitude_metric,
                                      attenuation, controller_step, make_io_runner,
                                      run_closed_loop, run_input_sequence)
from flutterbench.fem import AeroParams, BeamProperties, build_fem
from flutterbench.integrator import GenAlphaConfig, initial_state, simulate
from flutterbench.lti import StateSpace

TS = 5e-3


@pytest.fixture(scope="module")
def small_beam():
    return build_fem(BeamProperties(n_elements=6))


def test_controller_step_examples():
    c = SampledController([[0.5]], [[1.0]], [[1.0]], 1.0)
    assert controller_step(c, 1.0) == 0.0
    assert controller_step(c, 0.0) == 1.0
    assert controller_step(c, 0.0) == 0.5
    z = SampledController(np.eye(2) * 0.3, np.ones((2, 1)), np.ones((1, 2)), 1.0)
    assert z.step(123.0) == 0.0


def test_controller_step_rejects_non_finite():
    with pytest.raises(ValueError):
        controller_step(SampledController([[0.5]], [[1.0]], [[1.0]], 1.0), np.nan)


def test_controller_recursion_matches_impulse_response(rng):
    A = rng.standard_normal((3, 3))
    A *= 0.9 / np.abs(np.linalg.eigvals(A)).max()
    B, C = rng.standard_normal((3, 1)), rng.standard_normal((1, 3))
    c = SampledController(A, B, C, 0.1)
    out = [c.step(1.0 if k == 0 else 0.0) for k in range(100)]
    ref = lti.impulse_response(StateSpace(A, B, C, [[0.0]], 0.1), 100)[:, 0, 0]
    np.testing.assert_allclose(out, ref, atol=1e-13)
    c.reset()
    assert not np.any(c.x)


def test_controller_from_statespace_requires_strictly_proper():
    with pytest.raises(ValueError):
        SampledController.from_statespace(StateSpace([[0.5]], [[1]], [[1]], [[0.1]], 1.0))
    with pytest.raises(ValueError):
        SampledController.from_statespace(StateSpace([[-1.0]], [[1]], [[1]], [[0.0]], None))


def test_disturbance_sequence_and_validation():
    d = DisturbanceSpec(amplitude=2.0, frequency=np.pi / 2)
    np.testing.assert_allclose(d.sequence(4), [0, 2, 0, -2], atol=1e-15)
    np.testing.assert_array_equal(d.sequence(5), d.sequence(5))
    assert not np.any(DisturbanceSpec(kind="impulse").sequence(3))
    with pytest.raises(ValueError):
        DisturbanceSpec(kind="chirp")
    with pytest.raises(ValueError):
        DisturbanceSpec(frequency=4.0)
    with pytest.raises(ValueError):
        DisturbanceSpec(patch=(0.5, 0.4))


def test_zero_disturbance_preserves_equilibrium(small_beam):
    c = SampledController([[0.5]], [[1.0]], [[3.0]], TS)
    rec = run_closed_loop(small_beam, AeroParams(), c, DisturbanceSpec(kind="none"), 0.1, TS, 5)
    assert not np.any(rec.y) and not np.any(rec.u)


def test_zero_order_hold_timing(small_beam):
    u = np.zeros(20)
    u[5:] = 1e-3
    rec = run_input_sequence(small_beam, None, u, TS, 4)
    assert not np.any(rec.y[:6])  # y_5 is sampled before u_5 acts
    assert rec.y[6] != 0.0
    ref = simulate(small_beam, None, initial_state(small_beam, None),
                   lambda t: (0.0, u[int(np.floor(t / TS + 1e-9))]), 20 * TS,
                   GenAlphaConfig(TS / 4))
    np.testing.assert_allclose(rec.y, ref.tip[:-1][::4], rtol=1e-12, atol=1e-20)


def test_io_runner_matches_input_sequence(small_beam, rng):
    u = 1e-3 * rng.standard_normal(30)
    runner = make_io_runner(small_beam, None, TS, 2)
    np.testing.assert_array_equal(runner(u), run_input_sequence(small_beam, None, u, TS, 2).y)


def test_non_integer_substeps_rejected(small_beam):
    with pytest.raises(ValueError):
        run_closed_loop(small_beam, None, None, DisturbanceSpec(), 0.05, TS, 2.5)
    with pytest.raises(ValueError):
        run_closed_loop(small_beam, None, None, DisturbanceSpec(), 0.0513, TS, 2)


def test_controller_period_must_match(small_beam):
    c = SampledController([[0.5]], [[1.0]], [[1.0]], 1e-3)
    with pytest.raises(ValueError):
        run_closed_loop(small_beam, None, c, DisturbanceSpec(), 0.05, TS, 2)


def test_harmonic_runs_are_reproducible_and_logged(small_beam):
    d = DisturbanceSpec()
    a = run_closed_loop(small_beam, None, None, d, 0.2, TS, 2)
    b = run_closed_loop(small_beam, None, None, d, 0.2, TS, 2)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.w, d.sequence(40))
    np.testing.assert_allclose(a.t, TS * np.arange(40))
    assert a.meta["closed_loop"] is False


def test_fine_rate_log(small_beam):
    rec = run_closed_loop(small_beam, None, None, DisturbanceSpec(), 0.05, TS, 5,
                          record_fine=True)
    assert rec.fine_y.size == 50
    np.testing.assert_allclose(rec.fine_y[4::5][:-1], rec.y[1:], rtol=0, atol=0)


def test_controller_off_time_stops_actuation(small_beam):
    c = SampledController([[0.9]], [[1.0]], [[1e3]], TS)
    rec = run_closed_loop(small_beam, None, c, DisturbanceSpec(), 0.2, TS, 2,
                          controller_off_time=0.1)
    assert np.any(rec.u[:20]) and not np.any(rec.u[20:])
    assert np.all(np.isfinite(rec.y))


def test_truncate_on_failure_pads_with_nan(small_beam):
    # a violently destabilizing controller drives the aerodynamic model out of range
    c = SampledController([[0.0]], [[1.0]], [[-5e6]], TS)
    d = DisturbanceSpec(amplitude=1.0)
    with pytest.raises(Exception):
        run_closed_loop(small_beam, AeroParams(), c, d, 0.5, TS, 2)
    rec = run_closed_loop(small_beam, AeroParams(), c, d, 0.5, TS, 2, truncate_on_failure=True)
    k = rec.meta["failure"]["tick"]
    assert np.all(np.isnan(rec.y[k:])) and np.all(np.isfinite(rec.y[:k]))


def test_amplitude_metric_and_attenuation():
    y = np.r_[np.zeros(7), 1.0, -2.0, 1.0]
    assert amplitude_metric(y) == (2.0, pytest.approx(np.sqrt(2.0)))
    assert attenuation(2 * y, y) == pytest.approx(2.0)
    assert attenuation(y, np.zeros(10)) == float("inf")
    with pytest.raises(ValueError):
        amplitude_metric(y, 0.05)
