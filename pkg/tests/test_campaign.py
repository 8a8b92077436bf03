"""Checks on the full reproduction artifacts beyond the numbered criteria."""

import csv

import numpy as np
import pytest

from flutterbench.records import RunRecord, record_metrics

pytestmark = pytest.mark.slow


def order_table(campaign):
    with open(campaign["dir"] / "order_sweep.csv", newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.xfail(strict=True, reason="the noise-free simulated beam keeps improving the ARX "
                   "fit up to the top of the order range, so order 5 is never the minimum")
def test_harmonic_selects_fifth_order(campaigns):
    assert campaigns["harmonic"]["summary"]["selected_order"] == 5


@pytest.mark.xfail(strict=True, reason="every identified harmonic model is stable here; the "
                   "unstable high orders come from measurement noise absent in simulation")
def test_harmonic_high_orders_unstable(campaigns):
    rows = order_table(campaigns["harmonic"])
    assert all(r["stable"] == "false" for r in rows if int(r["n"]) > 6)


def test_flutter_selects_twelfth_order(campaigns):
    assert campaigns["flutter"]["summary"]["selected_order"] == 12


@pytest.mark.parametrize("name", ["harmonic", "flutter"])
def test_selected_order_obeys_tie_rule(campaigns, name):
    rows = order_table(campaigns[name])
    costs = {int(r["n"]): float(r["cost"]) for r in rows}
    best = min(costs.values())
    chosen = [int(r["n"]) for r in rows if r["selected"] == "true"]
    assert chosen == [min(n for n, c in costs.items() if c <= 1.01 * best)]


@pytest.mark.parametrize("name", ["harmonic", "flutter"])
def test_newton_iterations_bounded(campaigns, name):
    for path in sorted((campaigns[name]["dir"] / "sweep").glob("*.csv")):
        rec = RunRecord.from_csv(path)
        if "failure" in rec.metrics:
            continue
        assert rec.metrics["max_newton_iterations"] <= 5, path.name


@pytest.mark.parametrize("name", ["harmonic", "flutter"])
def test_metrics_recomputable_from_series(campaigns, name):
    for path in sorted((campaigns[name]["dir"] / "sweep").glob("*.csv")):
        rec = RunRecord.from_csv(path)
        if not np.all(np.isfinite(rec.y)):
            continue
        again = record_metrics(rec.t, rec.y, rec.dt, rec.metrics["metric_start"])
        for key in ("peak", "rms", "dominant_frequency_hz"):
            assert again[key] == pytest.approx(rec.metrics[key], rel=1e-12, abs=1e-300), key


@pytest.mark.parametrize("name", ["harmonic", "flutter"])
def test_paired_runs_share_configuration(campaigns, name):
    sweep = campaigns[name]["dir"] / "sweep"
    for ol_path in sorted(sweep.glob("*_open_loop.csv")):
        cl_path = ol_path.with_name(ol_path.name.replace("_open_loop", "_closed_loop"))
        ol, cl = RunRecord.from_csv(ol_path), RunRecord.from_csv(cl_path)
        assert ol.provenance["config_hash"] == cl.provenance["config_hash"]
        np.testing.assert_array_equal(ol.w, cl.w)


def test_flutter_open_loop_reaches_limit_cycle(campaigns):
    ol = RunRecord.from_csv(campaigns["flutter"]["dir"] / "open_loop.csv")
    late = np.abs(ol.y[ol.t >= 1.5]).max()
    mid = np.abs(ol.y[(ol.t >= 1.0) & (ol.t < 1.5)]).max()
    assert late == pytest.approx(mid, rel=0.05)
    assert late > 1e-4
