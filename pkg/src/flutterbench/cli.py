"""Command-line driver.

Subcommands mirror the campaign steps::

    flutterbench identify        --config CFG --out DIR [--seed N]
    flutterbench synthesize      --config CFG --out DIR [--model PATH]
    flutterbench simulate        --config CFG --out DIR [--controller PATH] [--open-loop]
    flutterbench fft             RECORD.csv  --out DIR [--window hann|rect] [--start T]
    flutterbench sweep           --config CFG --out DIR --controller PATH
    flutterbench reproduce-paper --out DIR [--seed N] [--config CFG ...]

``CFG`` is a YAML file or a preset name (``harmonic``, ``flutter``).
Exit status: 0 on success, 2 for configuration or input errors, 3 for
numerical failures (divergence, infeasible synthesis, rank deficiency).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, pipeline
from .config import ConfigError, ScenarioConfig, load_config
from .fem import AeroPressureError
from .integrator import IntegrationError
from .lti import LtiError, StateSpace
from .records import RecordError, RunRecord, provenance, spectrum, write_json, write_table
from .riccati import RiccatiError
from .synthesis import SynthesisError, SynthesisResult
from .sysid import ArxModel, IdentificationError

log = logging.getLogger("flutterbench")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERICAL_ERRORS = (IntegrationError, AeroPressureError, SynthesisError, IdentificationError,
                    RiccatiError, LtiError, np.linalg.LinAlgError, FloatingPointError)

REFERENCE_PRESETS = ("harmonic", "flutter")


class UsageError(Exception):
    """Missing or inconsistent inputs detected by the driver."""


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> ScenarioConfig:
    if not getattr(args, "config", None):
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        cfg = cfg.with_overrides(sysid={"seed": args.seed})
    return cfg


def _outdir(args, cfg: ScenarioConfig | None) -> Path:
    out = Path(args.out if args.out else (cfg.output_dir if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_json(path, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} file {p} not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from None


def _load_controller(path, cfg: ScenarioConfig) -> StateSpace:
    d = _read_json(path, "controller")
    try:
        K = StateSpace.from_dict(d["implemented"] if "implemented" in d else d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: not a controller file ({exc})") from None
    if K.dt is None or not np.isclose(K.dt, cfg.sampling.Ts, rtol=1e-12):
        raise UsageError(f"{path}: controller period {K.dt} does not match Ts = {cfg.sampling.Ts}")
    return K


def _identify(cfg: ScenarioConfig, out: Path) -> pipeline.Identification:
    idn = pipeline.identify(cfg)
    idn.data.to_csv(out / "identification.csv")
    best = idn.model.n
    write_table(out / "order_sweep.csv", ("n", "rmse", "stable", "cost", "selected"),
                [(n, r, s, c, n == best) for n, r, s, c in idn.sweep.table])
    write_json(out / "model.json", {**idn.model.to_dict(), "provenance": provenance(
        cfg.hash, scenario=cfg.name, excitation=idn.data.description)})
    return idn


def _synthesize(cfg: ScenarioConfig, model: ArxModel, out: Path) -> SynthesisResult:
    res = pipeline.design(cfg, model)
    write_json(out / "controller.json", {
        **res.to_dict(),
        "certified_stable": res.stability_margin > 0,
        "model": model.to_dict(),
        "provenance": provenance(cfg.hash, scenario=cfg.name),
    })
    return res


def _write_pair(out: Path, ol: RunRecord, cl: RunRecord | None):
    ol.write(out / "open_loop.csv")
    if cl is not None:
        cl.write(out / "closed_loop.csv")


def _fft(record: RunRecord, out: Path, stem: str, window: str, start: float) -> dict:
    mask = record.t >= start - 1e-12
    if not np.any(mask):
        raise UsageError(f"no samples after t = {start}")
    if not np.all(np.isfinite(record.y[mask])):
        raise RecordError("series contains non-finite samples")
    spec = spectrum(record.y[mask], record.dt, window)
    spec.write_csv(out / f"{stem}_spectrum.csv")
    info = {"window": spec.window, "start_time": start, "n_samples": spec.n,
            "resolution_hz": spec.resolution, "dominant_frequency_hz": spec.dominant(),
            "dominant_magnitude": float(spec.magnitude[1:].max()) if spec.n > 2 else 0.0}
    write_json(out / f"{stem}_spectrum.json", info)
    return info


def _sweep(cfg: ScenarioConfig, K: StateSpace, out: Path) -> list:
    variants = pipeline.run_sweep(cfg, K)
    sdir = out / "sweep"
    sdir.mkdir(exist_ok=True)
    rows = []
    for v in variants:
        safe = v.label.replace("=", "_")
        v.open_loop.write(sdir / f"{safe}_open_loop.csv")
        v.closed_loop.write(sdir / f"{safe}_closed_loop.csv")
        rows.append(v.summary_row())
    cols = ("variant", "x_c", "l1", "l2", "ol_peak", "cl_peak", "attenuation", "tag")
    write_table(out / "sweep_summary.csv", cols, [[r[c] for c in cols] for r in rows])
    return rows


# ---------------------------------------------------------------------------
# subcommands


def cmd_identify(args) -> int:
    cfg = _config(args)
    out = _outdir(args, cfg)
    idn = _identify(cfg, out)
    print(f"identified order {idn.model.n} (rmse {idn.model.rmse:.6g}); "
          f"wrote {out / 'model.json'}")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = _config(args)
    out = _outdir(args, cfg)
    mpath = Path(args.model) if args.model else out / "model.json"
    d = _read_json(mpath, "model (run 'identify' first or pass --model)")
    try:
        model = ArxModel.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{mpath}: not a model file ({exc})") from None
    if not np.isclose(model.dt, cfg.sampling.Ts, rtol=1e-12):
        raise UsageError(f"model period {model.dt} does not match Ts = {cfg.sampling.Ts}")
    res = _synthesize(cfg, model, out)
    print(f"gamma {res.gamma:.6g} (certified {res.hinf_closed_loop:.6g}); "
          f"wrote {out / 'controller.json'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = _outdir(args, cfg)
    if args.open_loop or not args.controller:
        ol = pipeline.simulate(cfg, None)
        ol.write(out / "open_loop.csv")
        print(f"open loop: peak {ol.metrics['peak']:.6g} m")
        return EXIT_OK
    K = _load_controller(args.controller, cfg)
    ol, cl = pipeline.simulate_pair(cfg, K)
    _write_pair(out, ol, cl)
    print(f"open loop peak {ol.metrics['peak']:.6g} m, closed loop peak "
          f"{cl.metrics['peak']:.6g} m, attenuation {cl.metrics['attenuation']:.4g}")
    return EXIT_OK


def cmd_fft(args) -> int:
    path = Path(args.record)
    if not path.exists():
        raise UsageError(f"record {path} not found")
    rec = RunRecord.from_csv(path)
    out = _outdir(args, None)
    info = _fft(rec, out, path.stem, args.window, args.start)
    print(f"dominant frequency {info['dominant_frequency_hz']:.6g} Hz "
          f"(resolution {info['resolution_hz']:.3g} Hz, {info['window']} window)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = _outdir(args, cfg)
    if not args.controller:
        raise UsageError("sweep needs --controller")
    rows = _sweep(cfg, _load_controller(args.controller, cfg), out)
    for r in rows:
        print(f"{r['variant']:>16}: attenuation {r['attenuation']:.4g} [{r['tag']}]")
    return EXIT_OK


def reproduce_campaign(cfg: ScenarioConfig, out: Path, window: str = "hann") -> dict:
    """Identify, design, simulate, analyse and sweep one scenario into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    idn = _identify(cfg, out)
    res = _synthesize(cfg, idn.model, out)
    rows = _sweep(cfg, res.implemented, out)
    sdir = out / "sweep"
    ol = RunRecord.from_csv(sdir / "nominal_open_loop.csv")
    cl = RunRecord.from_csv(sdir / "nominal_closed_loop.csv")
    _write_pair(out, ol, cl)
    spec = _fft(ol, out, "open_loop", window, 0.0)
    summary = {
        "scenario": cfg.name,
        "selected_order": idn.model.n,
        "gamma": res.gamma,
        "open_loop_peak": ol.metrics["peak"],
        "closed_loop_peak": cl.metrics["peak"],
        "attenuation": cl.metrics["attenuation"],
        "open_loop_dominant_frequency_hz": spec["dominant_frequency_hz"],
        "sweep": rows,
        "provenance": provenance(cfg.hash, scenario=cfg.name),
    }
    write_json(out / "summary.json", summary)
    log.info("%s campaign finished in %.1f s", cfg.name, time.perf_counter() - t0)
    return summary


def cmd_reproduce(args) -> int:
    names = args.config or list(REFERENCE_PRESETS)
    root = Path(args.out or "out")
    root.mkdir(parents=True, exist_ok=True)
    cfgs = []
    for name in names:
        cfg = load_config(name)
        if args.seed is not None:
            if args.seed < 0:
                raise UsageError("--seed must be nonnegative")
            cfg = cfg.with_overrides(sysid={"seed": args.seed})
        cfgs.append(cfg)
    for cfg in cfgs:
        s = reproduce_campaign(cfg, root / cfg.name)
        print(f"[{cfg.name}] order {s['selected_order']}, OL peak {s['open_loop_peak']:.4g} m, "
              f"CL peak {s['closed_loop_peak']:.4g} m, attenuation {s['attenuation']:.4g}, "
              f"OL dominant {s['open_loop_dominant_frequency_hz']:.4g} Hz")
        for r in s["sweep"]:
            print(f"    {r['variant']:>16}: attenuation {r['attenuation']:.4g} [{r['tag']}]")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flutterbench", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", help="YAML scenario file or preset name")
        sp.add_argument("--out", help="output directory (default: the config's output.dir)")
        if seed:
            sp.add_argument("--seed", type=int, help="override the excitation seed")

    sp = sub.add_parser("identify", help="excite the plant and fit ARX models")
    common(sp)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("synthesize", help="design an H-infinity controller")
    common(sp)
    sp.add_argument("--model", help="model JSON (default: OUT/model.json)")
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("simulate", help="run open- and closed-loop simulations")
    common(sp)
    sp.add_argument("--controller", help="controller JSON")
    sp.add_argument("--open-loop", action="store_true", help="simulate without control")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fft", help="amplitude spectrum of a record")
    sp.add_argument("record", help="series CSV written by simulate")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--window", choices=("hann", "rect"), default="hann")
    sp.add_argument("--start", type=float, default=0.0, help="ignore samples before this time")
    sp.set_defaults(func=cmd_fft)

    sp = sub.add_parser("sweep", help="actuator and disturbance placement sweep")
    common(sp)
    sp.add_argument("--controller", help="controller JSON")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce-paper", help="run both reference campaigns end to end")
    sp.add_argument("--config", action="append",
                    help="scenario to run (repeatable; default: both presets)")
    sp.add_argument("--out", help="output root directory")
    sp.add_argument("--seed", type=int, help="override the excitation seed")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError, RecordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
