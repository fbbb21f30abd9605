import numpy as np
import pytest

from artifact.recording import Recording
from artifact.synth import SynthSpec, synth_contaminated_recording


@pytest.fixture(scope="session")
def blink_data():
    """Default synthetic recording with five planted blinks."""
    return synth_contaminated_recording(SynthSpec(seed=1))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_recording(data, fs=100.0, labels=None, eog=None):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    labels = labels or tuple(f"C{i}" for i in range(data.shape[0]))
    return Recording(tuple(labels), fs, (data,), eog_labels=eog)


def artifact_free_recording(seed=0, n=5000):
    """Mixed Laplace sources plus EOG that is independent of the EEG."""
    r = np.random.default_rng(seed)
    eeg = r.standard_normal((6, 6)) @ r.laplace(size=(6, n))
    eog = r.standard_normal((2, n))
    labels = ("Fp1", "Fp2", "Fz", "Cz", "Pz", "Oz", "VEOG", "HEOG")
    return Recording(labels, 250.0, (np.vstack([eeg, eog]),))


# acceptance verdicts, printed once at the end of the run
VERDICTS: list[str] = []
SUITE_BUDGET_S = 60.0
_session = {}


def verdict(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    VERDICTS.append(line)
    print(line)


def pytest_sessionstart(session):
    import time
    _session["t0"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    import time
    elapsed = time.perf_counter() - _session["t0"]
    _session["elapsed"] = elapsed
    if VERDICTS:
        ok = elapsed < SUITE_BUDGET_S
        verdict(10, "full suite runtime", ok, f"{elapsed:.1f} s (limit {SUITE_BUDGET_S:.0f} s)")
        if not ok:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
