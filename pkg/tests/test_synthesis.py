import numpy as np
import pytest

from flutterbench import lti
from flutterbench.lti import DiscreteTf, StateSpace
from flutterbench.synthesis import (SynthesisError, SynthesisResult, WeightPair,
                                    build_generalized_plant, design_weights, h2_cost,
                                    hinf_synthesize, weight_preset)

TS = 5e-3


def resonant_plant(dt=TS, theta=np.pi / 3, r=0.97):
    """Lightly damped mode near the harmonic weight peak plus a slow real pole."""
    den = np.convolve([1.0, -2 * r * np.cos(theta), r * r], [1.0, -0.6])
    return DiscreteTf([0.0, 0.02, 0.01, -0.005], den, dt)


def unity(dt=TS):
    one = DiscreteTf([1.0], [1.0], dt)
    return WeightPair(one, one)


def tf_value(tf, z):
    return np.polyval(tf.num, z) / np.polyval(tf.den, z)


# -- weights -------------------------------------------------------------------

def test_weight_presets_are_coefficient_exact():
    h = weight_preset("harmonic")
    np.testing.assert_array_equal(h.Wy.num, [0.0, 7.75, -7.75])
    np.testing.assert_array_equal(h.Wy.den, [1.0, -0.99, 0.98])
    np.testing.assert_array_equal(h.Wu.num, [0.0, 1.0])
    np.testing.assert_array_equal(h.Wu.den, [1.0, 0.01])
    assert h.dt == 5e-3
    f = weight_preset("flutter")
    np.testing.assert_array_equal(f.Wy.num, [0.0, 0.0042, -0.0042])
    np.testing.assert_array_equal(f.Wy.den, [1.0, -1.806, 0.995])
    np.testing.assert_array_equal(f.Wu.num, [0.566, -0.987, 0.52])
    np.testing.assert_array_equal(f.Wu.den, [1.0, -0.987, 0.087])
    assert f.dt == 1e-3
    with pytest.raises(ValueError):
        weight_preset("nope")


def test_designed_weight_peaks_by_twenty_db():
    wd = np.pi / (3 * TS)
    w = design_weights(wd, TS)
    hi = abs(tf_value(w.Wy, np.exp(1j * wd * TS)))
    lo = abs(tf_value(w.Wy, np.exp(1j * wd * TS / 10)))
    assert 20 * np.log10(hi / lo) >= 20
    with pytest.raises(ValueError):
        design_weights(1.01 * np.pi / TS, TS)


def test_unstable_or_mismatched_weights_rejected():
    with pytest.raises(lti.LtiError):
        WeightPair(DiscreteTf([1.0], [1.0, -1.01], TS), DiscreteTf([1.0], [1.0], TS))
    with pytest.raises(lti.LtiError):
        WeightPair(DiscreteTf([1.0], [1.0], TS), DiscreteTf([1.0], [1.0], 1e-3))


# -- generalized plant ------------------------------------------------------------

def test_unity_weights_reduce_to_four_copies_of_G():
    G = resonant_plant()
    P = build_generalized_plant(G, unity())
    w = np.linspace(0, np.pi / TS, 64)
    H = lti.freq_response(P.system, w)
    g = lti.freq_response(lti.tf_to_ss(G), w)[:, 0, 0]
    for i in range(2):
        for j in range(2):
            np.testing.assert_allclose(H[:, i, j], g, rtol=1e-12, atol=1e-14)
    assert P.system.nstates == 3


def test_state_dimension_with_harmonic_weights():
    G = DiscreteTf([0.1, 0, 0, 0, 0], np.poly([0.5, 0.4, 0.3, 0.2, 0.1]), TS)
    P = build_generalized_plant(G, weight_preset("harmonic"))
    assert P.system.nstates == 5 + 2 + 1
    assert P.block_sizes == (5, 1, 2)


def test_plant_validation():
    G = resonant_plant()
    with pytest.raises(lti.LtiError):
        build_generalized_plant(DiscreteTf(G.num, G.den, 1e-3), weight_preset("harmonic"))
    with pytest.raises(ValueError):
        build_generalized_plant(G, weight_preset("harmonic"), performance="x")
    with pytest.raises(ValueError):
        build_generalized_plant(G, weight_preset("harmonic"), measurement="x")


@pytest.mark.parametrize("performance", ["filtered", "output"])
@pytest.mark.parametrize("measurement", ["filtered", "raw"])
def test_closed_loop_matches_transfer_function_formula(performance, measurement, rng):
    G = resonant_plant()
    W = weight_preset("harmonic")
    P = build_generalized_plant(G, W, performance, measurement)
    k = 0.05 * rng.standard_normal()
    cl = lti.feedback_lower(P.system, lti.static_gain([[k]], TS), 1, 1)
    w = np.linspace(0, np.pi / TS, 256)
    z = np.exp(1j * w * TS)
    g, wy, wu = tf_value(G, z), tf_value(W.Wy, z), tf_value(W.Wu, z)
    loop = g * wu * k * (wy if measurement == "filtered" else 1.0)
    y = g / (1 - loop)
    expected = wy * y if performance == "filtered" else y
    np.testing.assert_allclose(lti.freq_response(cl.system, w)[:, 0, 0], expected,
                               rtol=1e-8, atol=1e-8 * np.abs(expected).max())


# -- synthesis -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def harmonic_design():
    P = build_generalized_plant(resonant_plant(), weight_preset("harmonic"), "filtered", "raw")
    return P, hinf_synthesize(P, control_weight=0.5, noise_weight=0.05)


def test_synthesized_controller_certificate(harmonic_design):
    P, res = harmonic_design
    K = res.controller
    assert np.all(K.D == 0)
    cl = lti.feedback_lower(P.system, K, 1, 1)
    assert cl.stable
    norm = lti.hinf_norm(cl)
    assert norm == pytest.approx(res.hinf_closed_loop, rel=1e-3)
    assert norm <= res.gamma * (1 + 1e-4)
    assert res.stability_margin > 0


def test_bisection_reaches_relative_gap(harmonic_design):
    P, res = harmonic_design
    infeasible = [h["gamma"] for h in res.diagnostics["bisection"] if not h["feasible"]]
    lower = max(infeasible) if infeasible else 0.0
    assert res.gamma - lower <= 0.01 * res.gamma * (1 + 1e-12)


def test_closed_loop_reduces_weighted_norm(harmonic_design):
    P, res = harmonic_design
    assert res.hinf_closed_loop < res.diagnostics["gamma_open_loop"]


def test_implemented_controller_composition(harmonic_design):
    P, res = harmonic_design
    w = np.linspace(0, np.pi / TS, 50)
    z = np.exp(1j * w * TS)
    expected = lti.freq_response(res.controller, w)[:, 0, 0] * tf_value(P.weights.Wu, z)
    np.testing.assert_allclose(lti.freq_response(res.implemented, w)[:, 0, 0], expected,
                               rtol=1e-9, atol=1e-12)


def test_filtered_measurement_includes_output_weight():
    P = build_generalized_plant(resonant_plant(), weight_preset("harmonic"), "filtered", "filtered")
    res = hinf_synthesize(P, control_weight=0.5, noise_weight=0.05)
    w = np.linspace(0.1, np.pi / TS, 50)
    z = np.exp(1j * w * TS)
    expected = (lti.freq_response(res.controller, w)[:, 0, 0] * tf_value(P.weights.Wu, z)
                * tf_value(P.weights.Wy, z))
    np.testing.assert_allclose(lti.freq_response(res.implemented, w)[:, 0, 0], expected,
                               rtol=1e-8, atol=1e-12)


def test_synthesis_is_deterministic(harmonic_design):
    P, res = harmonic_design
    again = hinf_synthesize(P, control_weight=0.5, noise_weight=0.05)
    for name in "ABCD":
        np.testing.assert_array_equal(getattr(res.controller, name), getattr(again.controller, name))
    assert res.gamma == again.gamma


def test_gamma_grows_with_control_penalty():
    P = build_generalized_plant(resonant_plant(), weight_preset("harmonic"), "filtered", "raw")
    gammas = [hinf_synthesize(P, control_weight=c, noise_weight=0.05, rel_gap=1e-3).gamma
              for c in (0.1, 0.5, 2.0)]
    assert gammas[0] <= gammas[1] * (1 + 2e-3) and gammas[1] <= gammas[2] * (1 + 2e-3)


def test_unity_weights_never_worse_than_doing_nothing():
    P = build_generalized_plant(resonant_plant(), unity(), "output", "raw")
    res = hinf_synthesize(P, control_weight=0.1, noise_weight=0.1)
    ol = lti.hinf_norm(lti.tf_to_ss(resonant_plant()))
    assert res.hinf_closed_loop <= ol * (1 + 0.01)


@pytest.mark.parametrize("seed", range(3))
def test_random_third_order_plants(seed):
    rng = np.random.default_rng(seed)
    poles = 0.9 * rng.uniform(-1, 1, 3)
    G = DiscreteTf(np.r_[0.0, rng.standard_normal(3)], np.poly(poles), TS)
    P = build_generalized_plant(G, weight_preset("harmonic"), "filtered", "raw")
    res = hinf_synthesize(P, control_weight=0.5, noise_weight=0.1)
    cl = lti.feedback_lower(P.system, res.controller, 1, 1)
    assert cl.stable
    assert lti.hinf_norm(cl) == pytest.approx(res.hinf_closed_loop, rel=1e-3)
    assert res.hinf_closed_loop <= res.gamma * (1 + 1e-4)


def test_infeasible_target_raises(harmonic_design):
    P, res = harmonic_design
    with pytest.raises(SynthesisError, match="no controller found"):
        hinf_synthesize(P, gamma_target=1e-3 * res.gamma, control_weight=0.5, noise_weight=0.05)
    ok = hinf_synthesize(P, gamma_target=1.5 * res.gamma, control_weight=0.5, noise_weight=0.05)
    assert ok.hinf_closed_loop <= 1.5 * res.gamma


def test_regularization_weights_must_be_positive(harmonic_design):
    with pytest.raises(ValueError):
        hinf_synthesize(harmonic_design[0], control_weight=0.0)


def test_h2_cost_checks(harmonic_design):
    P, res = harmonic_design
    cl = lti.feedback_lower(P.system, res.controller, 1, 1)
    assert h2_cost(P, res.controller) == pytest.approx(lti.h2_norm(cl) ** 2, rel=1e-12)
    assert res.h2_cost == pytest.approx(lti.h2_norm_quadrature(cl, 4096) ** 2, rel=1e-3)
    zero = StateSpace(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)), [[0.0]], TS)
    Gzw = P.system.subsystem(slice(0, 1), slice(0, 1))
    assert h2_cost(P, zero) == pytest.approx(lti.h2_norm(Gzw) ** 2, rel=1e-12)
    with pytest.raises(lti.UnstableSystemError):
        h2_cost(P, lti.static_gain([[1e4]], TS))


def test_result_dict_roundtrip(harmonic_design):
    _, res = harmonic_design
    back = SynthesisResult.from_dict(res.to_dict())
    np.testing.assert_array_equal(back.controller.A, res.controller.A)
    assert back.gamma == res.gamma
