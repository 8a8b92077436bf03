import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_stable_ss(rng, n, m=1, p=1, radius=0.9, dt=1.0, feedthrough=True):
    """Random discrete system with spectral radius ``radius``."""
    from flutterbench.lti import StateSpace

    A = rng.standard_normal((n, n))
    rho = max(np.abs(np.linalg.eigvals(A)).max(), 1e-12)
    A *= radius / rho
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, m)) if feedthrough else np.zeros((p, m))
    return StateSpace(A, B, C, D, dt)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting -------------------------------------------------------

ACCEPTANCE_RESULTS: dict = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc_type is not None and exc_type is not AssertionError:
            detail = f"{detail}; error {exc_type.__name__}: {exc}".lstrip("; ")
        elif exc_type is AssertionError and str(exc):
            first = str(exc).splitlines()[0]
            detail = f"{detail}; {first}".lstrip("; ")
        ACCEPTANCE_RESULTS[self.number] = f"criterion {self.number} ({self.title}): {status}" + (
            f" [{detail}]" if detail else "")
        return False


@pytest.fixture
def criterion():
    """``with criterion(n, title) as c:`` records one PASS/FAIL line for criterion ``n``."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])


# -- full campaigns (shared by acceptance and campaign tests) ----------------------

@pytest.fixture(scope="session")
def campaigns(tmp_path_factory):
    """Run ``reproduce-paper`` once for both presets and load the artifacts."""
    import json
    import time

    from flutterbench.cli import main

    root = tmp_path_factory.mktemp("reproduce") / "run1"
    t0 = time.perf_counter()
    code = main(["reproduce-paper", "--out", str(root), "--seed", "0"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    out = {"root": root, "elapsed": elapsed}
    for name in ("harmonic", "flutter"):
        d = root / name
        out[name] = {
            "dir": d,
            "summary": json.loads((d / "summary.json").read_text()),
            "controller": json.loads((d / "controller.json").read_text()),
            "model": json.loads((d / "model.json").read_text()),
        }
    return out
