"""``quadsid`` command-line entry point.

Every command reads one configuration assembled from three layers, highest
precedence first: command-line flags (``--set key=value`` for any key, plus
the dedicated flags of each command), the ``--config`` file, and the packaged
defaults in ``quadsid/data/default.cfg``. Unknown keys are rejected.

Artifacts live in the ``--out`` directory under fixed names, so a full run is::

    quadsid --out run sim --controller pid --excite
    quadsid --out run ident
    quadsid --out run lqr
    quadsid --out run compare

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import check_known, default_values, format_kv, read_kv
from .control.lqr import LqrGains, LqrWeights, closed_loop_dc_gain, lqr_output_weighted, spectral_radius
from .control.pid import PidGains
from .errors import ConfigError, InvalidParams, QuadsidError
from .model import QuadParams, momentum_thrust, thrust_coefficient
from .sim import (CHANNELS, POSITION_CHANNELS, IdentOptions, LqrLoop, RunResult, Scenario, SensorModel,
                  channel_trajectory_csv, compare_runs, default_excitation, excitation_signal,
                  input_kind_study, run_blackbox, run_greybox)
from .sysid.dataset import Dataset, FlightLog, InputKind, split_dataset
from .sysid.subspace import StateSpaceModel, estimate_initial_state, fit_percent, simulate_ss, subspace_identify

LOG_FILE = "log.csv"
METRICS_FILE = "metrics.csv"
MODEL_FILE = "model.txt"
LQR_FILE = "lqr_gains.txt"
PID_FILE = "pid_gains.cfg"
COMPARE_FILE = "compare.csv"
STUDY_FILE = "input_kind.csv"


class CommandFailed(QuadsidError):
    """Runtime failure reported with exit code 1."""


@dataclass
class Config:
    """Validated configuration for one command invocation."""

    values: dict[str, str]
    params: QuadParams
    scenario: Scenario
    sensors: SensorModel
    weights: LqrWeights
    pid: PidGains
    ident: IdentOptions
    input_kind: InputKind
    excitation: float
    excitation_hold: int
    observer: dict[str, float]

    @classmethod
    def load(cls, path: str | Path | None = None, overrides: dict[str, str] | None = None) -> "Config":
        """Defaults, then ``path``, then ``overrides``; raises ConfigError on bad or unknown keys."""
        values = default_values()
        known = set(values)
        for layer in (read_kv(path) if path is not None else {}, overrides or {}):
            check_known(layer, known)
            values.update(layer)
        try:
            floats = {k: float(values[k]) for k in ("Q", "R", "excitation", "excitation_hold",
                                                     "process_weight", "disturbance_weight",
                                                     "measurement_weight")}
        except ValueError as exc:
            raise ConfigError(f"non-numeric configuration value: {exc}") from None
        try:
            hold = floats["excitation_hold"]
            if hold != int(hold) or hold < 1:
                raise ConfigError(f"excitation_hold must be a positive integer, got {values['excitation_hold']!r}")
            if floats["excitation"] < 0:
                raise ConfigError("excitation must be >= 0")
            return cls(
                values=values,
                params=QuadParams.from_mapping(values),
                scenario=Scenario.from_mapping(values),
                sensors=SensorModel.from_mapping(values),
                weights=LqrWeights(floats["Q"], floats["R"]),
                pid=PidGains.from_mapping(values),
                ident=IdentOptions.from_mapping(values),
                input_kind=InputKind.parse(values["input_kind"]),
                excitation=floats["excitation"],
                excitation_hold=int(hold),
                observer={k: floats[k] for k in ("process_weight", "disturbance_weight",
                                                 "measurement_weight")},
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# helpers --------------------------------------------------------------------


def _parse_set(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _load_model(path: Path) -> StateSpaceModel:
    if not path.exists():
        raise CommandFailed(f"missing model: {path} (run 'quadsid ident' first)")
    return StateSpaceModel.load(path)


def _load_gains(path: Path) -> LqrGains:
    if not path.exists():
        raise CommandFailed(f"missing gains: {path} (run 'quadsid lqr' first)")
    return LqrGains.load(path)


def _lqr_loop(cfg: Config, model_path: Path, gains_path: Path) -> LqrLoop:
    gains = _load_gains(gains_path)
    model = _load_model(model_path)
    if gains.Kf.shape != (model.n_inputs, model.n):
        raise CommandFailed(f"gains in {gains_path} do not match the model in {model_path}")
    return LqrLoop(model, gains, cfg.params, cfg.input_kind, **cfg.observer)


def _metrics_csv(label: str, result: RunResult) -> str:
    lines = ["run,channel,metric,value"]
    for ch in CHANNELS:
        for metric, value in result.metrics[ch].items():
            lines.append(f"{label},{ch},{metric},{format(value, '.17g')}")
    return "\n".join(lines) + "\n"


def _run_summary(label: str, result: RunResult) -> str:
    target = dict(zip(POSITION_CHANNELS, result.setpoint[:3]))
    start = dict(zip(POSITION_CHANNELS, result.outputs[0, :3]))
    lines = [f"{label}: {len(result)} samples, dt = {result.dt:g} s",
             f"{'channel':<8}{'final error %':>15}{'settling s':>12}{'overshoot %':>13}"]
    for j, ch in enumerate(POSITION_CHANNELS):
        change = abs(target[ch] - start[ch])
        err = abs(result.outputs[-1, j] - target[ch])
        rel = 100.0 * err / change if change > 0 else float("nan")
        m = result.metrics[ch]
        lines.append(f"{ch:<8}{rel:>15.4f}{m['settling_time']:>12.4f}{m['overshoot']:>13.4f}")
    return "\n".join(lines) + "\n"


# commands -------------------------------------------------------------------


def cmd_coeff(args, cfg: Config) -> int:
    fmt = f".{args.digits - 1}e"
    if args.kind == "thrust":
        print(format(thrust_coefficient(args.T, args.omega), fmt))
    else:
        params = cfg.params
        changes = {k: v for k, v in (("D", args.D), ("rho", args.rho)) if v is not None}
        if changes:
            params = params.replace(**changes)
        print(format(momentum_thrust(args.v, params), fmt))
    return 0


def cmd_sim(args, cfg: Config, out: Path) -> int:
    if args.controller == "pid":
        controller = cfg.pid
    else:
        controller = _lqr_loop(cfg, Path(args.model or out / MODEL_FILE), Path(args.gains or out / LQR_FILE))
    excitation = None
    if args.excite:
        amplitude = default_excitation(cfg.params, cfg.excitation)
        excitation = excitation_signal(cfg.scenario.steps + 1, amplitude, cfg.excitation_hold,
                                       cfg.sensors.seed)
    result = run_greybox(cfg.scenario, controller, cfg.params, cfg.sensors, excitation)
    result.log.write_csv(out / LOG_FILE)
    _write(out / METRICS_FILE, _metrics_csv(args.controller, result))
    print(_run_summary(f"grey-box run with {args.controller}", result), end="")
    print(f"wrote {out / LOG_FILE} and {out / METRICS_FILE}")
    return 0


def cmd_ident(args, cfg: Config, out: Path) -> int:
    log_path = Path(args.log or out / LOG_FILE)
    if not log_path.exists():
        raise CommandFailed(f"missing log: {log_path}")
    log = FlightLog.read_csv(log_path)
    kind = InputKind.parse(args.input_kind) if args.input_kind else cfg.input_kind
    opts = cfg.ident
    data = Dataset.from_log(log, kind, cfg.params)
    est, val = split_dataset(data, opts.split_fraction)
    model = subspace_identify(est, opts.order, opts.horizon, decimation=opts.decimation)
    x0 = estimate_initial_state(model, val.U, val.Y)
    fit = fit_percent(val.Y, simulate_ss(model, val.U, x0))
    path = Path(args.model or out / MODEL_FILE)
    path.parent.mkdir(parents=True, exist_ok=True)
    model.save(path)
    print(f"identified order-{opts.order} model from {len(est)} of {len(data)} samples "
          f"(input kind {kind.value}, decimation {opts.decimation})")
    print("validation fit %: " + "  ".join(f"{ch}={v:.3f}" for ch, v in zip(CHANNELS, fit)))
    sv = model.singular_values
    print("singular values: " + " ".join(f"{v:.6g}" for v in sv[:max(2 * opts.order, 1)]))
    print("eigenvalue magnitudes: " + " ".join(f"{v:.9f}" for v in np.sort(np.abs(model.eigenvalues()))[::-1]))
    print(f"wrote {path}")
    return 0


def cmd_lqr(args, cfg: Config, out: Path) -> int:
    model = _load_model(Path(args.model or out / MODEL_FILE))
    weights = LqrWeights(cfg.weights.Q if args.Q is None else args.Q,
                         cfg.weights.R if args.R is None else args.R)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gains = lqr_output_weighted(model, weights)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    path = Path(args.gains or out / LQR_FILE)
    path.parent.mkdir(parents=True, exist_ok=True)
    gains.save(path)
    rho = spectral_radius(model.A - model.B @ gains.Kf)
    print(f"LQR with Q = {weights.Q:g} I, R = {weights.R:g} I")
    print(f"closed-loop spectral radius: {rho:.12f}")
    if np.any(gains.Kr):
        dc = np.diag(closed_loop_dc_gain(model, gains))
        print("closed-loop DC gain (diagonal): " + " ".join(f"{v:.6f}" for v in dc))
    print(f"wrote {path}")
    return 0


def cmd_pid(args, cfg: Config, out: Path) -> int:
    gains = cfg.pid
    path = Path(args.gains or out / PID_FILE)
    _write(path, format_kv(gains.as_dict()))
    width = max(len(k) for k in gains.as_dict())
    for key, value in gains.as_dict().items():
        print(f"{key:<{width}}  {value:g}")
    print(f"wrote {path}")
    return 0


def cmd_compare(args, cfg: Config, out: Path) -> int:
    if args.study == "input-kind":
        report = input_kind_study(cfg.scenario, cfg.params, cfg.sensors, cfg.pid,
                                  default_excitation(cfg.params, cfg.excitation),
                                  cfg.excitation_hold, cfg.ident)
        _write(out / STUDY_FILE, report.to_csv())
        print(report.summary(), end="")
        print(f"wrote {out / STUDY_FILE}")
        return 0
    model_path = Path(args.model or out / MODEL_FILE)
    model = _load_model(model_path)
    if abs(model.dt - cfg.scenario.dt) > 1e-12:
        raise CommandFailed(f"model dt {model.dt:g} s differs from scenario dt {cfg.scenario.dt:g} s")
    if args.controller == "lqr":
        controller = _lqr_loop(cfg, model_path, Path(args.gains or out / LQR_FILE))
    else:
        controller = cfg.pid
    stage = "grey-box run"
    try:
        grey = run_greybox(cfg.scenario, controller, cfg.params, cfg.sensors)
        stage = "black-box run"
        black = run_blackbox(cfg.scenario, controller, model, cfg.params, cfg.input_kind)
    except (QuadsidError, ArithmeticError, ValueError) as exc:
        raise CommandFailed(f"{stage} failed: {exc}") from exc
    report = compare_runs(grey, black, ("grey", "black"))
    _write(out / COMPARE_FILE, report.to_csv())
    runs = {"grey": grey, "black": black}
    for ch in CHANNELS:
        _write(out / f"trajectory_{ch}.csv", channel_trajectory_csv(runs, ch))
    print(report.summary(), end="")
    print(f"wrote {out / COMPARE_FILE} and trajectory_<channel>.csv")
    return 0


# parser ---------------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadsid", description="Quadrotor grey-box/black-box toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value configuration file layered over the defaults")
    parser.add_argument("--out", default=".", help="directory for all written artifacts (default: .)")
    parser.add_argument("--seed", type=int, help="sensor-noise and excitation seed (overrides 'seed')")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                        help="override one configuration key; repeatable")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeff", help="rotor coefficient calculators")
    csub = p.add_subparsers(dest="kind", required=True)
    t = csub.add_parser("thrust", help="K_T = T / omega^2")
    t.add_argument("--T", type=float, required=True, help="static thrust in N")
    t.add_argument("--omega", type=float, required=True, help="rotor speed in rad/s")
    m = csub.add_parser("thrust-momentum", help="momentum-theory thrust")
    m.add_argument("--v", type=float, required=True, help="induced velocity in m/s")
    m.add_argument("--D", type=float, help="rotor diameter in m (default from config)")
    m.add_argument("--rho", type=float, help="air density in kg/m^3 (default from config)")
    for q in (t, m):
        q.add_argument("--digits", type=_positive_int, default=5, help="significant digits printed")

    p = sub.add_parser("sim", help="closed-loop grey-box run; writes log.csv and metrics.csv")
    p.add_argument("--controller", choices=("pid", "lqr"), default="pid")
    p.add_argument("--excite", action="store_true",
                   help="add the configured motor-speed excitation (identification dataset)")
    p.add_argument("--model", help=f"model file for lqr (default OUT/{MODEL_FILE})")
    p.add_argument("--gains", help=f"LQR gain file (default OUT/{LQR_FILE})")

    p = sub.add_parser("ident", help="subspace identification from a flight log")
    p.add_argument("--log", help=f"flight-log CSV (default OUT/{LOG_FILE})")
    p.add_argument("--input-kind", choices=[k.value for k in InputKind])
    p.add_argument("--model", help=f"model file to write (default OUT/{MODEL_FILE})")

    p = sub.add_parser("lqr", help="LQR gains for an identified model")
    p.add_argument("--model", help=f"model file (default OUT/{MODEL_FILE})")
    p.add_argument("--gains", help=f"gain file to write (default OUT/{LQR_FILE})")
    p.add_argument("--Q", type=float, help="output weight (scalar times identity)")
    p.add_argument("--R", type=float, help="input weight (scalar times identity)")

    p = sub.add_parser("pid", help="validate and write the PID gains")
    p.add_argument("--gains", help=f"gain file to write (default OUT/{PID_FILE})")

    p = sub.add_parser("compare", help="grey-box against black-box closed-loop comparison")
    p.add_argument("--controller", choices=("lqr", "pid"), default="lqr")
    p.add_argument("--model", help=f"model file (default OUT/{MODEL_FILE})")
    p.add_argument("--gains", help=f"LQR gain file (default OUT/{LQR_FILE})")
    p.add_argument("--study", choices=("input-kind",), help="run a study instead of the comparison")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        overrides = _parse_set(args.set)
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        cfg = Config.load(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"quadsid: error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        if args.command == "coeff":
            try:
                return cmd_coeff(args, cfg)
            except InvalidParams as exc:
                print(f"quadsid: error: {exc}", file=sys.stderr)
                return 2
        out.mkdir(parents=True, exist_ok=True)
        handler = {"sim": cmd_sim, "ident": cmd_ident, "lqr": cmd_lqr,
                   "pid": cmd_pid, "compare": cmd_compare}[args.command]
        return handler(args, cfg, out)
    except (QuadsidError, ArithmeticError, ValueError, OSError) as exc:
        print(f"quadsid: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
