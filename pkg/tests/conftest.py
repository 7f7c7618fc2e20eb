"""Shared fixtures: one default parameter set and one cached noise-free pipeline."""

from __future__ import annotations

import numpy as np
import pytest

from quadsid.config import default_values
from quadsid.control.lqr import LqrWeights, lqr_output_weighted
from quadsid.control.pid import PidGains
from quadsid.model import QuadParams
from quadsid.sim import (IdentOptions, LqrLoop, Scenario, SensorModel, default_excitation,
                         excitation_signal, identify, run_blackbox, run_greybox)

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])


@pytest.fixture
def acceptance_report(request):
    """Record one ``PASS``/``FAIL`` line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        lines.append((number, f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"))
        return ok

    return record


@pytest.fixture(scope="session")
def params() -> QuadParams:
    return QuadParams.default()


@pytest.fixture(scope="session")
def pid_gains() -> PidGains:
    return PidGains.default()


@pytest.fixture(scope="session")
def scenario() -> Scenario:
    return Scenario()


@pytest.fixture(scope="session")
def excited_run(params, pid_gains, scenario):
    """Noise-free PID run with the default motor-speed excitation (identification data)."""
    values = default_values()
    sensors = SensorModel.noiseless()
    amplitude = default_excitation(params, float(values["excitation"]))
    signal = excitation_signal(scenario.steps + 1, amplitude, int(values["excitation_hold"]), sensors.seed)
    return run_greybox(scenario, pid_gains, params, sensors, excitation=signal)


@pytest.fixture(scope="session")
def identified(excited_run):
    """Default order-12 model from the noise-free log and its validation fit."""
    return identify(excited_run.log, IdentOptions())


@pytest.fixture(scope="session")
def lqr_loop(identified, params):
    model, _ = identified
    return LqrLoop(model, lqr_output_weighted(model, LqrWeights()), params)


@pytest.fixture(scope="session")
def lqr_runs(lqr_loop, identified, params, scenario):
    """Noise-free grey-box and black-box LQR runs on the reference scenario."""
    model, _ = identified
    grey = run_greybox(scenario, lqr_loop, params, SensorModel.noiseless())
    black = run_blackbox(scenario, lqr_loop, model)
    return grey, black


@pytest.fixture(scope="session")
def pid_run(pid_gains, params, scenario):
    return run_greybox(scenario, pid_gains, params, SensorModel.noiseless())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
