"""Closed-loop simulation of the grey-box and black-box plants and comparison reports."""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .config import take_floats
from .control.lqr import LqrGains, lqr_control, predictor_gain
from .control.pid import PidController, PidGains
from .errors import ConfigError, GimbalLock, NumericalDivergence
from .model import (OUTPUT_INDEX, PHI, PSI, THETA, QuadParams, body_rates_from_euler, hover_speeds,
                    mix_forward, mix_inverse, step_rk4)
from .sysid.dataset import OUTPUT_NAMES, Dataset, FlightLog, InputKind, split_dataset
from .sysid.subspace import (StateSpaceModel, estimate_initial_state, fit_percent, simulate_ss,
                             subspace_identify)

SETTLE_BAND = 0.02
CHANNELS = OUTPUT_NAMES
POSITION_CHANNELS = ("x", "y", "z")


@dataclass(frozen=True)
class SensorModel:
    """Gaussian measurement noise on position and attitude, plus position latency.

    Body rates are passed through noise-free (an IMU stand-in).
    """

    pos_noise_std: float = 0.005
    att_noise_std: float = 0.002
    pos_latency_steps: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (self.pos_noise_std >= 0 and self.att_noise_std >= 0):
            raise ValueError("noise standard deviations must be >= 0")
        if self.pos_latency_steps < 0 or int(self.pos_latency_steps) != self.pos_latency_steps:
            raise ValueError("pos_latency_steps must be a non-negative integer")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def noiseless(cls, seed: int = 0) -> "SensorModel":
        return cls(0.0, 0.0, 0, seed)

    @classmethod
    def from_mapping(cls, values) -> "SensorModel":
        f = take_floats(values, ("pos_noise_std", "att_noise_std", "pos_latency_steps", "seed"))
        for key in ("pos_latency_steps", "seed"):
            if f[key] != int(f[key]):
                raise ValueError(f"{key} must be an integer")
        return cls(f["pos_noise_std"], f["att_noise_std"], int(f["pos_latency_steps"]), int(f["seed"]))

    def noise(self, count: int) -> np.ndarray:
        """Noise samples (count, 6) for ``[X, Y, Z, phi, theta, psi]``."""
        rng = np.random.default_rng([self.seed, 0])
        std = np.array([self.pos_noise_std] * 3 + [self.att_noise_std] * 3)
        return rng.standard_normal((count, 6)) * std


@dataclass(frozen=True)
class Scenario:
    """Setpoint ``(x_d, y_d, z_d, psi_d)``, duration and step in s, initial 12-state."""

    setpoint: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 0.0)
    duration: float = 50.0
    dt: float = 0.001
    initial_state: tuple[float, ...] = (0.0,) * 12

    def __post_init__(self):
        object.__setattr__(self, "setpoint", tuple(float(v) for v in self.setpoint))
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        if len(self.setpoint) != 4 or len(self.initial_state) != 12:
            raise ValueError("setpoint needs 4 values and initial_state 12")
        if not all(math.isfinite(v) for v in self.setpoint + self.initial_state):
            raise ValueError("scenario values must be finite")
        if not (self.duration > 0 and self.dt > 0):
            raise ValueError("duration and dt must be positive")
        steps = self.duration / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError(f"duration/dt = {steps} is not an integer step count")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def reference(self) -> np.ndarray:
        """Output reference ``[x_d, y_d, z_d, 0, 0, psi_d]``."""
        x_d, y_d, z_d, psi_d = self.setpoint
        return np.array([x_d, y_d, z_d, 0.0, 0.0, psi_d])

    @classmethod
    def from_mapping(cls, values) -> "Scenario":
        f = take_floats(values, ("x_d", "y_d", "z_d", "psi_d", "duration", "dt"))
        init = values.get("initial_state", " ".join(["0"] * 12))
        try:
            state = tuple(float(v) for v in str(init).replace(",", " ").split())
        except ValueError:
            raise ValueError("initial_state must be 12 numbers") from None
        return cls((f["x_d"], f["y_d"], f["z_d"], f["psi_d"]), f["duration"], f["dt"], state)


@dataclass
class RunResult:
    """One closed-loop run sampled at ``steps + 1`` instants.

    ``log`` holds the measured (noisy) outputs and the commanded motor
    speeds, ``outputs`` the noise-free plant outputs, ``states`` the plant
    state (the 12-state for grey-box runs, the model state for black-box
    runs) and ``inputs`` the motor speeds applied.
    """

    log: FlightLog
    states: np.ndarray
    outputs: np.ndarray
    inputs: np.ndarray
    setpoint: tuple[float, float, float, float]
    metrics: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return self.log.dt

    @property
    def t(self) -> np.ndarray:
        return self.log.t

    def __len__(self):
        return len(self.log)


# controllers ---------------------------------------------------------------


class Controller:
    """Maps measurements to motor speeds; subclasses keep their own state."""

    def reset(self, scenario: Scenario) -> None:
        raise NotImplementedError

    def command(self, y_meas: np.ndarray, x_meas: np.ndarray) -> np.ndarray:
        """Motor speeds (4,) from measured outputs (6,) and a measured 12-state."""
        raise NotImplementedError

    def applied(self, w: np.ndarray, y_meas: np.ndarray) -> None:
        """Notification of the motor speeds actually applied this step."""


class PidLoop(Controller):
    def __init__(self, gains: PidGains, params: QuadParams):
        self.pid = PidController(gains, params)
        self.params = params

    def reset(self, scenario: Scenario) -> None:
        self.pid.reset()
        self.setpoint = scenario.setpoint
        self.dt = scenario.dt

    def command(self, y_meas, x_meas):
        u = self.pid.step(x_meas, self.setpoint, self.dt)
        w, _ = mix_inverse(u, self.params)
        return w


class LqrLoop(Controller):
    """LQR on an identified model with a predictor for its state and an input bias.

    The predictor runs the augmented model ``x[k+1] = A x + B (du + d)``,
    ``d[k+1] = d``, ``y = C x + D (du + d)`` where ``du`` is the applied input
    relative to ``u0`` and ``d`` is a constant input bias absorbing the
    mismatch between the model and the plant it controls. The command is
    ``u = u0 + Kr ref - Kf x_hat - d_hat``.

    The predictor gain solves the filter Riccati equation with covariances
    ``process_weight * B B'`` on ``x``, ``disturbance_weight * I`` on ``d``
    and ``measurement_weight * I`` on ``y``. ``disturbance_weight = 0`` drops
    the bias states. On the model itself with noise-free outputs the
    innovation is zero, so the predictor equals the model state and
    ``d_hat`` stays at zero.
    """

    def __init__(self, model: StateSpaceModel, gains: LqrGains, params: QuadParams | None = None,
                 input_kind=InputKind.MOTOR_SPEEDS, process_weight: float = 1.0,
                 disturbance_weight: float = 1.0, measurement_weight: float = 1e-4):
        self.model = model
        self.gains = gains
        self.params = params
        self.input_kind = InputKind.parse(input_kind)
        if self.input_kind is InputKind.CONTROL_INPUTS and params is None:
            raise ValueError("control-input models need QuadParams for the mixer")
        if min(process_weight, disturbance_weight) < 0 or not measurement_weight > 0:
            raise ValueError("observer weights must be >= 0 (measurement weight > 0)")
        n, m_in, p = model.n, model.n_inputs, model.n_outputs
        self.n_bias = m_in if disturbance_weight > 0 else 0
        nb = self.n_bias
        A = np.zeros((n + nb, n + nb))
        A[:n, :n] = model.A
        A[:n, n:] = model.B[:, :nb]
        A[n:, n:] = np.eye(nb)
        C = np.hstack([model.C, model.D[:, :nb]])
        BBt = model.B @ model.B.T
        W = np.zeros_like(A)
        W[:n, :n] = process_weight * BBt + 1e-12 * max(np.trace(BBt), 1e-300) * np.eye(n)
        W[n:, n:] = disturbance_weight * np.eye(nb)
        self.A_aug, self.C_aug = A, C
        self.L = predictor_gain(A, C, W, measurement_weight * np.eye(p))

    def reset(self, scenario: Scenario) -> None:
        self.ref = scenario.reference
        self.z_hat = np.zeros(self.model.n + self.n_bias)

    @property
    def x_hat(self) -> np.ndarray:
        return self.z_hat[:self.model.n]

    @property
    def d_hat(self) -> np.ndarray:
        return self.z_hat[self.model.n:]

    def command(self, y_meas, x_meas):
        u = self.model.u0 + lqr_control(self.gains, self.x_hat, self.ref)
        if self.n_bias:
            u = u - self.d_hat
        if self.input_kind is InputKind.MOTOR_SPEEDS:
            return np.maximum(u, 0.0)
        w, _ = mix_inverse(u, self.params)
        return w

    def applied(self, w, y_meas):
        m, n = self.model, self.model.n
        du = model_input(w, m, self.input_kind, self.params)
        e = y_meas - self.C_aug @ self.z_hat - m.D @ du
        z = self.A_aug @ self.z_hat + self.L @ e
        z[:n] += m.B @ du
        self.z_hat = z


def model_input(w, model: StateSpaceModel, input_kind, params: QuadParams | None = None) -> np.ndarray:
    """Motor speeds expressed in the model's input coordinates, relative to ``u0``."""
    if InputKind.parse(input_kind) is InputKind.MOTOR_SPEEDS:
        return np.asarray(w, dtype=float) - model.u0
    return mix_forward(w, params) - model.u0


def make_controller(controller, params: QuadParams) -> Controller:
    if isinstance(controller, Controller):
        return controller
    if isinstance(controller, PidGains):
        return PidLoop(controller, params)
    raise TypeError(f"unsupported controller {type(controller).__name__}")


# runs -----------------------------------------------------------------------


def _measured_state(x, y_meas):
    xm = np.array(x, dtype=float)
    xm[list(OUTPUT_INDEX)] = y_meas
    return xm


def run_greybox(scenario: Scenario, controller, params: QuadParams, sensors: SensorModel,
                excitation: np.ndarray | None = None) -> RunResult:
    """Closed loop on the nonlinear model, integrated with RK4 at ``scenario.dt``.

    Each tick: measure outputs through ``sensors``, compute motor speeds,
    add ``excitation[k]`` if given, clamp at zero, record, advance the plant.

    Raises
    ------
    GimbalLock, NumericalDivergence
        With the failing step index attached.
    """
    ctrl = make_controller(controller, params)
    ctrl.reset(scenario)
    N = scenario.steps
    dt = scenario.dt
    noise = sensors.noise(N + 1)
    lag = sensors.pos_latency_steps

    states = np.empty((N + 1, 12))
    meas = np.empty((N + 1, 6))
    cmds = np.empty((N + 1, 4))
    x = np.array(scenario.initial_state, dtype=float)
    for k in range(N + 1):
        states[k] = x
        src = states[max(k - lag, 0)]
        y_meas = np.empty(6)
        y_meas[:3] = src[:3]
        y_meas[3:] = x[[PHI, THETA, PSI]]
        y_meas += noise[k]
        meas[k] = y_meas
        try:
            w = ctrl.command(y_meas, _measured_state(x, y_meas))
            if excitation is not None:
                w = np.maximum(w + excitation[k], 0.0)
            cmds[k] = w
            ctrl.applied(w, y_meas)
            if k < N:
                x = step_rk4(x, w, params, dt)
        except GimbalLock as exc:
            exc.step = k
            raise
        except NumericalDivergence as exc:
            exc.step = k
            raise
    t = np.arange(N + 1) * dt
    log = FlightLog(dt, t, cmds, meas)
    outputs = states[:, list(OUTPUT_INDEX)]
    return _finish(RunResult(log, states, outputs, cmds.copy(), scenario.setpoint))


def _state_from_outputs(y, y_prev, dt):
    """12-state built from model outputs, with backward-difference rates."""
    rate = (y - y_prev) / dt
    x = np.zeros(12)
    x[list(OUTPUT_INDEX)] = y
    x[3:6] = rate[:3]
    x[9:12] = body_rates_from_euler(y[3], y[4], rate[3:])
    return x


def run_blackbox(scenario: Scenario, controller, model: StateSpaceModel,
                 params: QuadParams | None = None, input_kind=None) -> RunResult:
    """Closed loop on an identified model stepped once per tick.

    The plant starts at ``x = 0`` (the model's operating point, outputs 0) and
    its outputs are fed to the controller without noise. A PID controller
    sees a 12-state rebuilt from the outputs with backward-difference rates.
    ``input_kind`` defaults to the LQR controller's kind, else motor speeds.
    """
    if abs(model.dt - scenario.dt) > 1e-12:
        raise ValueError(f"model dt {model.dt} differs from scenario dt {scenario.dt}")
    if model.n_inputs != 4 or model.n_outputs != 6:
        raise ValueError("black-box runs need a model with 4 inputs and 6 outputs")
    if isinstance(controller, PidGains) and params is None:
        raise ValueError("a PID controller needs QuadParams")
    ctrl = make_controller(controller, params)
    if isinstance(ctrl, LqrLoop):
        input_kind = ctrl.input_kind if input_kind is None else input_kind
        params = ctrl.params if params is None else params
    elif input_kind is None:
        input_kind = InputKind.MOTOR_SPEEDS
    ctrl.reset(scenario)
    N = scenario.steps
    dt = scenario.dt

    xs = np.empty((N + 1, model.n))
    ys = np.empty((N + 1, 6))
    cmds = np.empty((N + 1, 4))
    x = np.zeros(model.n)
    y_prev = None
    for k in range(N + 1):
        xs[k] = x
        # outputs that do not depend on the current input are available before the command
        y_free = model.C @ x
        y_prev = y_free if y_prev is None else y_prev
        w = ctrl.command(y_free, _state_from_outputs(y_free, y_prev, dt))
        du = model_input(w, model, input_kind, params)
        y = y_free + model.D @ du
        ys[k] = y
        cmds[k] = w
        ctrl.applied(w, y)
        x = model.A @ x + model.B @ du
        y_prev = y
    if not np.all(np.isfinite(ys)):
        raise NumericalDivergence("black-box response is not finite")
    t = np.arange(N + 1) * dt
    log = FlightLog(dt, t, cmds, ys)
    return _finish(RunResult(log, xs, ys.copy(), cmds.copy(), scenario.setpoint))


def excitation_signal(count: int, amplitude: float, hold: int = 1, seed: int = 0) -> np.ndarray:
    """Uniform ``+-amplitude`` motor-speed perturbations (count, 4), each value held ``hold`` samples."""
    if amplitude < 0:
        raise ValueError("excitation amplitude must be >= 0")
    if hold < 1:
        raise ValueError("hold must be >= 1")
    rng = np.random.default_rng([seed, 1])
    blocks = -(-count // hold)
    values = rng.uniform(-amplitude, amplitude, size=(blocks, 4))
    return np.repeat(values, hold, axis=0)[:count]


def generate_dataset(scenario: Scenario, controller, params: QuadParams, sensors: SensorModel,
                     excitation: float, hold: int = 1) -> FlightLog:
    """Flight log of an excited closed-loop grey-box run.

    ``excitation`` is the absolute amplitude in rad/s of the uniform
    perturbation added to every commanded motor speed; the perturbation is
    seeded from ``sensors.seed`` and held for ``hold`` samples.
    """
    signal = excitation_signal(scenario.steps + 1, excitation, hold, sensors.seed)
    return run_greybox(scenario, controller, params, sensors, excitation=signal).log


def imu_accelerations(result: RunResult) -> np.ndarray:
    """Second derivatives of ``[X, Y, Z, phi, theta, psi]`` seen by noise-free inertial sensors.

    Central differences of the recorded velocities and of the Euler rates
    built from the body rates, one row per log row.
    """
    s = result.states
    phi, theta = s[:, PHI], s[:, THETA]
    p, q, r = s[:, 9], s[:, 10], s[:, 11]
    sf, cf = np.sin(phi), np.cos(phi)
    rates = np.column_stack([s[:, 3:6],
                             p + (q * sf + r * cf) * np.tan(theta),
                             q * cf - r * sf,
                             (q * sf + r * cf) / np.cos(theta)])
    return np.gradient(rates, result.dt, axis=0)


# metrics --------------------------------------------------------------------


def settling_time(t, y, target: float, initial: float, band: float = SETTLE_BAND) -> float:
    """First time after which ``|y - target| <= band |target - initial|`` holds to the end.

    ``inf`` if the final sample is outside the band, ``nan`` for a zero change.
    """
    change = abs(target - initial)
    if change == 0:
        return math.nan
    outside = np.abs(np.asarray(y) - target) > band * change
    if outside[-1]:
        return math.inf
    if not outside.any():
        return float(t[0])
    last = int(np.flatnonzero(outside)[-1])
    return float(t[last + 1])


def overshoot_percent(y, target: float, initial: float) -> float:
    change = target - initial
    if change == 0:
        return math.nan
    peak = np.max((np.asarray(y) - initial) / change)
    return float(max(0.0, peak - 1.0) * 100.0)


def channel_metrics(result: RunResult) -> dict[str, dict[str, float]]:
    ref = np.array(result.setpoint)[[0, 1, 2, 3]]
    targets = np.array([ref[0], ref[1], ref[2], 0.0, 0.0, ref[3]])
    out = {}
    for j, name in enumerate(CHANNELS):
        y = result.outputs[:, j]
        out[name] = {
            "settling_time": settling_time(result.t, y, targets[j], y[0]),
            "overshoot": overshoot_percent(y, targets[j], y[0]),
            "steady_state_error": float(abs(y[-1] - targets[j])),
        }
    return out


def _finish(result: RunResult) -> RunResult:
    result.metrics = channel_metrics(result)
    return result


@dataclass
class ComparisonReport:
    """Fit of run ``b`` against run ``a`` plus per-run channel metrics."""

    fit: dict[str, float]
    metrics: dict[str, dict[str, dict[str, float]]]
    labels: tuple[str, str] = ("a", "b")

    def rows(self):
        """Long-format ``(run, channel, metric, value)`` rows."""
        for ch in CHANNELS:
            if ch in self.fit:
                yield (self.labels[1], ch, "fit_percent", self.fit[ch])
        for label in self.labels:
            for ch in CHANNELS:
                for metric, value in self.metrics[label][ch].items():
                    yield (label, ch, metric, value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("run,channel,metric,value\n")
        for run, ch, metric, value in self.rows():
            buf.write(f"{run},{ch},{metric},{format(value, '.17g')}\n")
        return buf.getvalue()

    def summary(self) -> str:
        a, b = self.labels
        lines = [f"comparison of {b} against {a}",
                 f"{'channel':<8}{'fit %':>10}{'settle ' + a:>16}{'settle ' + b:>16}"
                 f"{'sse ' + a:>14}{'sse ' + b:>14}"]
        for ch in CHANNELS:
            ma, mb = self.metrics[a][ch], self.metrics[b][ch]
            fit = self.fit.get(ch, math.nan)
            lines.append(f"{ch:<8}{fit:>10.3f}{ma['settling_time']:>16.4f}{mb['settling_time']:>16.4f}"
                         f"{ma['steady_state_error']:>14.3g}{mb['steady_state_error']:>14.3g}")
        return "\n".join(lines) + "\n"


def compare_runs(a: RunResult, b: RunResult, labels=("a", "b")) -> ComparisonReport:
    """Per-channel fit of ``b`` against ``a`` and both runs' settling metrics.

    Channels along which ``a`` is constant have no defined fit and are left
    out of ``fit``.
    """
    if len(a) != len(b) or abs(a.dt - b.dt) > 1e-12:
        raise ValueError("runs must have equal lengths and sample times")
    fit = {}
    for j, ch in enumerate(CHANNELS):
        ya = a.outputs[:, j]
        if np.ptp(ya) == 0:
            continue
        fit[ch] = float(fit_percent(ya[:, None], b.outputs[:, j:j + 1])[0])
    la, lb = labels
    return ComparisonReport(fit, {la: channel_metrics(a), lb: channel_metrics(b)}, (la, lb))


def trajectory_csv(runs: dict[str, RunResult]) -> str:
    """Long-format ``run,t,channel,value`` table of the plant outputs."""
    buf = io.StringIO()
    buf.write("run,t,channel,value\n")
    for label, r in runs.items():
        for j, ch in enumerate(CHANNELS):
            for tk, v in zip(r.t, r.outputs[:, j]):
                buf.write(f"{label},{format(tk, '.17g')},{ch},{format(v, '.17g')}\n")
    return buf.getvalue()


def channel_trajectory_csv(runs: dict[str, RunResult], channel: str) -> str:
    """Wide ``t,<run>,<run>...`` table of one output channel; all runs share ``t``."""
    j = CHANNELS.index(channel)
    labels = list(runs)
    first = runs[labels[0]]
    if any(len(r) != len(first) for r in runs.values()):
        raise ValueError("runs must have equal lengths")
    buf = io.StringIO()
    buf.write(",".join(["t"] + labels) + "\n")
    table = np.column_stack([first.t] + [runs[k].outputs[:, j] for k in labels])
    for row in table:
        buf.write(",".join(format(v, ".17g") for v in row))
        buf.write("\n")
    return buf.getvalue()


# identification studies ----------------------------------------------------


@dataclass
class IdentOptions:
    """Subspace settings; ``horizon`` counts samples after ``decimation``."""

    order: int = 12
    horizon: int = 40
    split_fraction: float = 0.8
    decimation: int = 10

    @classmethod
    def from_mapping(cls, values) -> "IdentOptions":
        f = take_floats(values, ("order", "horizon", "split_fraction", "decimation"))
        for key in ("order", "horizon", "decimation"):
            if f[key] != int(f[key]) or f[key] < 1:
                raise ConfigError(f"key {key!r}: expected a positive integer, got {values[key]!r}")
        return cls(int(f["order"]), int(f["horizon"]), f["split_fraction"], int(f["decimation"]))


def validation_fit(model: StateSpaceModel, val: Dataset) -> np.ndarray:
    """Per-channel fit on ``val`` with the initial state estimated from ``val``."""
    x0 = estimate_initial_state(model, val.U, val.Y)
    return fit_percent(val.Y, simulate_ss(model, val.U, x0))


def identify(log: FlightLog, options: IdentOptions, input_kind=InputKind.MOTOR_SPEEDS,
             params: QuadParams | None = None):
    """Split, identify and validate; returns ``(model, validation_fit)``."""
    data = Dataset.from_log(log, input_kind, params)
    est, val = split_dataset(data, options.split_fraction)
    model = subspace_identify(est, options.order, options.horizon, decimation=options.decimation)
    model = dataclasses.replace(model, dt=log.dt)
    return model, validation_fit(model, val)


@dataclass
class InputKindReport:
    fits: dict[str, np.ndarray]

    @property
    def winner(self) -> str:
        scores = {k: float(np.mean(v)) for k, v in self.fits.items()}
        return max(scores, key=scores.get)

    def rows(self):
        for kind, fit in self.fits.items():
            for ch, v in zip(CHANNELS, fit):
                yield (kind, ch, "validation_fit_percent", float(v))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("run,channel,metric,value\n")
        for run, ch, metric, value in self.rows():
            buf.write(f"{run},{ch},{metric},{format(value, '.17g')}\n")
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{'input kind':<16}" + "".join(f"{ch:>10}" for ch in CHANNELS) + f"{'mean':>10}"]
        for kind, fit in self.fits.items():
            lines.append(f"{kind:<16}" + "".join(f"{v:>10.3f}" for v in fit) + f"{np.mean(fit):>10.3f}")
        lines.append(f"better mean validation fit: {self.winner}")
        return "\n".join(lines) + "\n"


def input_kind_study(scenario: Scenario, params: QuadParams, sensors: SensorModel,
                     controller, excitation: float, hold: int = 1,
                     options: IdentOptions | None = None, log: FlightLog | None = None) -> InputKindReport:
    """Identify from one log with motor-speed inputs and with mixed control inputs."""
    options = options or IdentOptions()
    if log is None:
        log = generate_dataset(scenario, controller, params, sensors, excitation, hold)
    fits = {}
    for kind in InputKind:
        _, fit = identify(log, options, kind, params)
        fits[kind.value] = fit
    return InputKindReport(fits)


def default_excitation(params: QuadParams, fraction: float) -> float:
    """Excitation amplitude in rad/s as a fraction of the hover speed."""
    return float(fraction * hover_speeds(params)[0])
