"""End-to-end campaign steps driven by a :class:`~flutterbench.config.ScenarioConfig`.

The functions here return in-memory results; :mod:`flutterbench.cli` is
responsible for writing them to disk.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import sysid
from .closed_loop import SampledController, run_closed_loop, make_io_runner
from .config import ScenarioConfig, config_from_dict
from .fem import AeroParams, FemSystem, build_fem
from .lti import StateSpace
from .records import RunRecord, provenance, record_metrics
from .synthesis import SynthesisResult, build_generalized_plant, hinf_synthesize

log = logging.getLogger(__name__)

__all__ = [
    "Identification",
    "SweepVariant",
    "build_plant",
    "identify",
    "design",
    "simulate",
    "simulate_pair",
    "run_sweep",
    "classify",
]


def build_plant(cfg: ScenarioConfig, x_c: float | None = None,
                patch=None) -> tuple[FemSystem, AeroParams | None]:
    """Finite-element model and aerodynamic parameters for ``cfg``."""
    fem = build_fem(cfg.beam, x_c=cfg.x_c if x_c is None else x_c,
                    patch=tuple(cfg.disturbance.patch if patch is None else patch))
    return fem, cfg.aero


@dataclass
class Identification:
    data: sysid.IoDataset
    sweep: sysid.SweepResult

    @property
    def model(self) -> sysid.ArxModel:
        return self.sweep.best


def identify(cfg: ScenarioConfig, seed: int | None = None) -> Identification:
    """Excite the nominal plant with seeded Gaussian input and sweep ARX orders.

    Aerodynamic loads are active during the experiment whenever the scenario
    enables them. The harmonic disturbance is applied as well only when
    ``sysid.include_disturbance`` is set.
    """
    s = cfg.sysid
    seed = s.seed if seed is None else seed
    fem, aero = build_plant(cfg)
    dist = cfg.disturbance if s.include_disturbance and cfg.disturbance.kind == "harmonic" else None
    runner = make_io_runner(fem, aero, cfg.sampling.Ts, cfg.sampling.substeps, dist,
                            rho_inf=cfg.sampling.rho_inf)
    data = sysid.excite_and_record(
        runner, cfg.sampling.Ts, s.n_samples, s.amplitude, seed,
        {"scenario": cfg.name, "aero_on": cfg.aero is not None, "x_c": cfg.x_c,
         "disturbance_on": dist is not None})
    result = sysid.order_sweep(data, s.orders, s.N, rtol=s.rtol)
    log.info("identified order %d (rmse %.3e)", result.best.n, result.best.rmse)
    return Identification(data, result)


def design(cfg: ScenarioConfig, model: sysid.ArxModel) -> SynthesisResult:
    """H-infinity controller for the identified model with the scenario weights."""
    sy = cfg.synthesis
    plant = build_generalized_plant(model.tf, sy.weights, sy.performance, sy.measurement)
    return hinf_synthesize(plant, control_weight=sy.control_weight,
                           noise_weight=sy.noise_weight, rel_gap=sy.rel_gap)


def simulate(cfg: ScenarioConfig, controller: StateSpace | None, x_c: float | None = None,
             patch=None, truncate_on_failure: bool = False, **extra_provenance) -> RunRecord:
    """One co-simulation; open loop when ``controller`` is ``None``."""
    fem, aero = build_plant(cfg, x_c, patch)
    ctrl = None if controller is None else SampledController.from_statespace(controller)
    dist = cfg.disturbance
    if patch is not None:
        dist = replace(dist, patch=tuple(patch))
    lr = run_closed_loop(fem, aero, ctrl, dist, cfg.simulation.t_end, cfg.sampling.Ts,
                         cfg.sampling.substeps, rho_inf=cfg.sampling.rho_inf,
                         truncate_on_failure=truncate_on_failure)
    metrics = record_metrics(lr.t, lr.y, lr.dt, cfg.simulation.metric_start)
    metrics["max_newton_iterations"] = int(lr.newton_iterations.max())
    if "failure" in lr.meta:
        metrics["failure"] = lr.meta["failure"]
    prov = provenance(cfg.hash, scenario=cfg.name, x_c=fem.x_c, patch=list(fem.patch),
                      closed_loop=controller is not None, config=cfg.to_dict(),
                      **extra_provenance)
    return RunRecord(lr.t, lr.w, lr.y, lr.u, lr.dt, metrics, prov)


def simulate_pair(cfg: ScenarioConfig, controller: StateSpace, x_c=None, patch=None,
                  truncate_on_failure: bool = False) -> tuple[RunRecord, RunRecord]:
    """Open- and closed-loop runs under the identical disturbance."""
    ol = simulate(cfg, None, x_c, patch, truncate_on_failure)
    cl = simulate(cfg, controller, x_c, patch, truncate_on_failure)
    att = _attenuation(ol.metrics["peak"], cl.metrics["peak"])
    for r in (ol, cl):
        r.metrics["attenuation"] = att
    return ol, cl


def _attenuation(ol_peak: float, cl_peak: float) -> float:
    if not np.isfinite(cl_peak):
        return float("nan")
    return ol_peak / cl_peak if cl_peak > 0 else float("inf")


def classify(attenuation: float, retain_factor: float, failed: bool) -> str:
    """``retained`` (at least ``retain_factor``), ``degraded`` or ``diverged``."""
    if failed or np.isnan(attenuation):
        return "diverged"
    return "retained" if attenuation >= retain_factor else "degraded"


@dataclass
class SweepVariant:
    label: str
    x_c: float
    patch: tuple
    open_loop: RunRecord
    closed_loop: RunRecord
    attenuation: float
    tag: str
    notes: dict = field(default_factory=dict)

    def summary_row(self) -> dict:
        return {"variant": self.label, "x_c": self.x_c, "l1": self.patch[0], "l2": self.patch[1],
                "ol_peak": self.open_loop.metrics["peak"],
                "cl_peak": self.closed_loop.metrics["peak"],
                "attenuation": self.attenuation, "tag": self.tag}


def _variants(cfg: ScenarioConfig) -> list[tuple[str, float, tuple]]:
    nominal_patch = tuple(cfg.disturbance.patch)
    out = [("nominal", cfg.x_c, nominal_patch)]
    out += [(f"x_c={xc:g}", xc, nominal_patch) for xc in cfg.sweep.x_c]
    out += [(f"patch={p[0]:g}-{p[1]:g}", cfg.x_c, tuple(p)) for p in cfg.sweep.patches]
    return out


def _run_variant(cfg_data: dict, controller: dict, label: str, x_c: float, patch: tuple):
    cfg = config_from_dict(cfg_data)
    K = StateSpace.from_dict(controller)
    ol, cl = simulate_pair(cfg, K, x_c, patch, truncate_on_failure=True)
    failed = "failure" in cl.metrics or not np.all(np.isfinite(cl.y))
    att = cl.metrics["attenuation"]
    tag = classify(att, cfg.sweep.retain_factor, failed)
    for r in (ol, cl):
        r.provenance["variant"] = label
    return SweepVariant(label, x_c, tuple(patch), ol, cl, att, tag)


def run_sweep(cfg: ScenarioConfig, controller: StateSpace,
              workers: int | None = None) -> list[SweepVariant]:
    """Run the nominal case and every sweep variant with the same controller.

    Numerical failures are contained per variant and reported with the tag
    ``diverged``. With ``workers > 1`` the variants run in separate
    processes; the results come back in a fixed order regardless.
    """
    workers = cfg.sweep.workers if workers is None else workers
    jobs = _variants(cfg)
    args = [(cfg.to_dict(), controller.to_dict(), *j) for j in jobs]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            futs = [ex.submit(_run_variant, *a) for a in args]
            return [f.result() for f in futs]
    return [_run_variant(*a) for a in args]
