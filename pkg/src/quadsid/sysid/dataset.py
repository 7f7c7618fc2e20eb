"""Flight logs, identification datasets and the flight-log CSV format."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import LogFormatError, TooFewSamples
from ..model import QuadParams, mix_forward

CSV_HEADER = "t,w1,w2,w3,w4,x,y,z,phi,theta,psi"
OUTPUT_NAMES = ("x", "y", "z", "phi", "theta", "psi")
MIN_RECORDS = 10
DT_TOL = 1e-9


class InputKind(enum.Enum):
    MOTOR_SPEEDS = "motor-speeds"
    CONTROL_INPUTS = "control-inputs"

    @classmethod
    def parse(cls, value) -> "InputKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown input kind {value!r}; expected one of "
                             f"{', '.join(k.value for k in cls)}") from None


@dataclass
class FlightLog:
    """Time-stamped motor speeds ``w`` (T, 4) and outputs ``y`` (T, 6).

    Outputs are ``[X, Y, Z, phi, theta, psi]`` in m and rad, Z down.
    """

    dt: float
    t: np.ndarray
    w: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.w = np.asarray(self.w, dtype=float).reshape(-1, 4)
        self.y = np.asarray(self.y, dtype=float).reshape(-1, 6)
        n = len(self.t)
        if len(self.w) != n or len(self.y) != n:
            raise LogFormatError("flight log columns have different lengths")
        if n < MIN_RECORDS:
            raise TooFewSamples(f"flight log has {n} records, need at least {MIN_RECORDS}")
        if not self.dt > 0:
            raise LogFormatError("dt must be positive")
        steps = np.diff(self.t)
        if np.any(steps <= 0):
            k = int(np.argmax(steps <= 0)) + 1
            raise LogFormatError(f"timestamps not strictly increasing at record {k}")
        if np.any(np.abs(steps - self.dt) > DT_TOL):
            k = int(np.argmax(np.abs(steps - self.dt) > DT_TOL)) + 1
            raise LogFormatError(f"irregular sample spacing at record {k}")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.y))):
            raise LogFormatError("flight log contains non-finite values")

    def __len__(self):
        return len(self.t)

    def tail(self, start: int) -> "FlightLog":
        return FlightLog(self.dt, self.t[start:], self.w[start:], self.y[start:])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        table = np.column_stack([self.t, self.w, self.y])
        for row in table:
            buf.write(",".join(format(v, ".17g") for v in row))
            buf.write("\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")

    @classmethod
    def from_csv(cls, text: str, source: str = "<csv>") -> "FlightLog":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or lines[0].rstrip("\r") != CSV_HEADER:
            raise LogFormatError(f"{source}: header must be {CSV_HEADER!r}")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            if "\r" in line:
                raise LogFormatError(f"{source}:{lineno}: CR line ending")
            if not line.strip():
                raise LogFormatError(f"{source}:{lineno}: blank line")
            fields = line.split(",")
            if len(fields) != 11:
                raise LogFormatError(f"{source}:{lineno}: expected 11 fields, got {len(fields)}")
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                raise LogFormatError(f"{source}:{lineno}: non-numeric field") from None
        if len(rows) < 2:
            raise TooFewSamples(f"{source}: log has {len(rows)} records, need at least {MIN_RECORDS}")
        table = np.array(rows)
        t = table[:, 0]
        # sample time from the first interval, rounded to the 1e-9 tolerance
        dt = float(np.round(t[1] - t[0], 9))
        return cls(dt=dt, t=t, w=table[:, 1:5], y=table[:, 5:11])

    @classmethod
    def read_csv(cls, path: str | Path) -> "FlightLog":
        path = Path(path)
        return cls.from_csv(path.read_text(encoding="utf-8"), source=str(path))


@dataclass
class Dataset:
    """Input/output matrices for identification (rows are samples)."""

    U: np.ndarray
    Y: np.ndarray
    dt: float
    input_kind: InputKind = InputKind.MOTOR_SPEEDS

    def __post_init__(self):
        self.U = np.atleast_2d(np.asarray(self.U, dtype=float))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if self.U.shape[0] != self.Y.shape[0]:
            raise ValueError(f"U has {self.U.shape[0]} rows but Y has {self.Y.shape[0]}")
        if not (np.all(np.isfinite(self.U)) and np.all(np.isfinite(self.Y))):
            raise ValueError("dataset contains non-finite values")
        self.input_kind = InputKind.parse(self.input_kind)

    def __len__(self):
        return self.U.shape[0]

    @classmethod
    def from_log(cls, log: FlightLog, input_kind=InputKind.MOTOR_SPEEDS,
                 params: QuadParams | None = None) -> "Dataset":
        kind = InputKind.parse(input_kind)
        if kind is InputKind.MOTOR_SPEEDS:
            U = log.w.copy()
        else:
            if params is None:
                raise ValueError("control-input datasets need K_T, b and l from QuadParams")
            U = mix_forward(log.w, params)
        return cls(U=U, Y=log.y.copy(), dt=log.dt, input_kind=kind)


def split_dataset(d: Dataset, estimation_fraction: float) -> tuple[Dataset, Dataset]:
    """Contiguous estimation prefix and validation remainder (no shuffling)."""
    if not 0 < estimation_fraction < 1:
        raise ValueError("estimation_fraction must lie in (0, 1)")
    cut = int(np.floor(len(d) * estimation_fraction + 1e-9))
    if cut < MIN_RECORDS or len(d) - cut < MIN_RECORDS:
        raise TooFewSamples(f"split of {len(d)} rows at {estimation_fraction} gives "
                            f"{cut}/{len(d) - cut} rows; each part needs {MIN_RECORDS}")
    est = Dataset(d.U[:cut], d.Y[:cut], d.dt, d.input_kind)
    val = Dataset(d.U[cut:], d.Y[cut:], d.dt, d.input_kind)
    return est, val
