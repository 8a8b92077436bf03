import math

import pytest

from flutterbench.config import (ConfigError, PRESETS, config_from_dict, load_config,
                                 parse_config, preset_dict)


def test_presets_load_and_match_expected_constants():
    h = load_config("harmonic")
    assert h.aero is None
    assert h.sampling.Ts == 5e-3 and h.sampling.substeps == 10
    assert h.disturbance.frequency == pytest.approx(math.pi / 3)
    assert h.disturbance.patch == (0.7, 0.8)
    assert h.sysid.orders == list(range(1, 13))
    f = load_config("flutter")
    assert f.aero is not None and f.aero.p_inf == 9.4
    assert f.beam.membrane == "von_karman"
    assert f.sampling.Ts == 1e-3
    assert f.disturbance.kind == "impulse"


def test_hash_is_stable_and_sensitive():
    a, b = load_config("harmonic"), load_config("harmonic")
    assert a.hash == b.hash and len(a.hash) == 64
    assert a.with_overrides(sysid={"seed": 3}).hash != a.hash


def test_dict_roundtrip():
    cfg = load_config("flutter")
    again = config_from_dict(cfg.to_dict())
    assert again.hash == cfg.hash


def test_preset_inheritance_from_yaml():
    cfg = parse_config("preset: harmonic\nname: mine\nsysid:\n  seed: 4\n")
    assert cfg.name == "mine" and cfg.sysid.seed == 4
    assert cfg.sysid.n_samples == PRESETS["harmonic"]["sysid"]["n_samples"]


def test_unknown_key_reports_line():
    text = "preset: harmonic\nsysid:\n  seed: 1\n  foo: 2\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text, "x.yaml")
    assert info.value.line == 4
    assert str(info.value).startswith("x.yaml:4: sysid.foo: unknown key 'foo'")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown key 'bogus'"):
        parse_config("preset: harmonic\nbogus: 1\n")


def test_type_errors_point_at_value():
    with pytest.raises(ConfigError) as info:
        parse_config("preset: harmonic\nsampling:\n  Ts: fast\n", "c.yaml")
    assert info.value.line == 3 and "sampling.Ts" in str(info.value)


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_config("preset: harmonic\nsysid: [1, 2\n", "bad.yaml")
    assert info.value.line is not None and "YAML syntax error" in str(info.value)


@pytest.mark.parametrize("text, fragment", [
    ("sweep: {x_c: [], patches: []}", "sweep lists are empty"),
    ("sampling: {Ts: -1.0}", "sampling.Ts"),
    ("sampling: {substeps: 0}", "sampling.substeps"),
    ("actuator: {x_c: 1.5}", "actuator.x_c"),
    ("disturbance: {patch: [0.8, 0.7]}", "patch"),
    ("sysid: {n_range: [4, 2]}", "n_range"),
    ("sysid: {N: 3}", "sysid.N"),
    ("synthesis: {measurement: other}", "synthesis.measurement"),
    ("synthesis: {control_weight: 0}", "synthesis.control_weight"),
    ("synthesis: {weights: flutter}", "weights are sampled"),
    ("synthesis: {weights: nope}", "unknown weight preset"),
    ("simulation: {t_end: 1.0025}", "simulation.t_end"),
    ("simulation: {metric_start: 20.0}", "simulation.metric_start"),
    ("sweep: {retain_factor: 1.0}", "sweep.retain_factor"),
    ("beam: {membrane: wrong}", "membrane"),
    ("beam: {n_elements: 2.5}", "beam.n_elements"),
])
def test_invalid_values_rejected(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config("preset: harmonic\n" + text + "\n")


def test_unstable_custom_weight_rejected():
    text = """preset: harmonic
synthesis:
  weights:
    Wy: {num: [1.0, -1.0], den: [1.0, -2.0, 1.01]}
    Wu: {num: [1.0], den: [1.0, 0.01]}
"""
    with pytest.raises(ConfigError, match="Wy is not stable"):
        parse_config(text)


def test_custom_weights_accepted():
    text = """preset: harmonic
synthesis:
  weights:
    Wy: {num: [2.0, -2.0], den: [1.0, -0.99, 0.98]}
    Wu: {num: [1.0], den: [1.0, 0.01]}
"""
    cfg = parse_config(text)
    assert cfg.synthesis.weights.Wy.num[-1] == -2.0


def test_patch_sweep_needs_harmonic_disturbance():
    with pytest.raises(ConfigError, match="harmonic"):
        parse_config("preset: flutter\nsweep: {patches: [[0.2, 0.3]]}\n")


def test_duplicate_and_empty_documents():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("preset: harmonic\nname: a\nname: b\n")
    with pytest.raises(ConfigError, match="empty"):
        parse_config("")


def test_missing_file_and_unknown_preset(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "none.yaml")
    with pytest.raises(ConfigError):
        preset_dict("nope")
    with pytest.raises(ConfigError, match="unknown preset"):
        parse_config("preset: nope\n")


def test_load_from_file(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("preset: flutter\nsysid: {seed: 9}\n")
    assert load_config(p).sysid.seed == 9
