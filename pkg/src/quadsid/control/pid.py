"""Six-loop PID cascade: outer x/y position loop feeding altitude and attitude loops.

Sign conventions (Z down, mixer as in :mod:`quadsid.model`):

* the altitude law works on height ``h = -z``, so a vehicle below its target
  (``z > z_d``) gets more than hover thrust;
* ``U3`` is the negative pitch moment, so the pitch law is negated;
* derivative terms act on measured rates with zero desired rate.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..config import check_known, default_values, read_kv, take_floats
from ..errors import GimbalLock, InvalidThrust
from ..model import GIMBAL_EPS, PHI, PSI, THETA, VX, VY, VZ, X, Y, Z, QuadParams, euler_rate_map


@dataclass(frozen=True)
class PidGains:
    Kz_P: float
    Kz_D: float
    Kphi_P: float
    Kphi_D: float
    Ktheta_P: float
    Ktheta_D: float
    Kpsi_P: float
    Kpsi_D: float
    Kx_P: float
    Kx_I: float
    Kx_D: float
    Ky_P: float
    Ky_I: float
    Ky_D: float
    a_max: float
    tilt_max_deg: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"PID gain {f.name} is not finite")
        negative = [f.name for f in dataclasses.fields(self)
                    if f.name.endswith(("_P", "_D")) and getattr(self, f.name) < 0]
        if negative:
            raise ValueError(f"proportional/derivative gains must be >= 0: {', '.join(negative)}")
        if not self.a_max > 0 or not 0 < self.tilt_max_deg < 90:
            raise ValueError("a_max must be positive and tilt_max_deg in (0, 90)")

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, values) -> "PidGains":
        return cls(**take_floats(values, cls.field_names()))

    @classmethod
    def default(cls) -> "PidGains":
        return cls.from_mapping(default_values())

    @classmethod
    def from_file(cls, path) -> "PidGains":
        values = read_kv(path)
        check_known(values, cls.field_names())
        return cls.from_mapping({**default_values(), **values})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def _euler_rates(x):
    return euler_rate_map(x[PHI], x[THETA], x[9:12])


def thrust_command(x, z_d: float, gains: PidGains, params: QuadParams) -> float:
    """Altitude law: ``U1 = (g + Kz_D (hdot_d - hdot) + Kz_P (h_d - h)) m / (cos phi cos theta)``."""
    phi, theta = x[PHI], x[THETA]
    if not (abs(phi) < math.pi / 2 - GIMBAL_EPS and abs(theta) < math.pi / 2 - GIMBAL_EPS):
        raise GimbalLock(theta if abs(theta) >= abs(phi) else phi)
    height_err = x[Z] - z_d  # h_d - h with h = -z
    climb_rate = -x[VZ]
    acc = params.g + gains.Kz_D * (0.0 - climb_rate) + gains.Kz_P * height_err
    return acc * params.m / (math.cos(phi) * math.cos(theta))


def pid_inner(x, desired, gains: PidGains, params: QuadParams) -> np.ndarray:
    """Altitude and attitude loops; ``desired = (z_d, phi_d, theta_d, psi_d)``."""
    z_d, phi_d, theta_d, psi_d = desired
    U1 = thrust_command(x, z_d, gains, params)
    phid, thetad, psid = _euler_rates(x)
    U2 = (gains.Kphi_D * (0.0 - phid) + gains.Kphi_P * (phi_d - x[PHI])) * params.Jx
    U3 = -(gains.Ktheta_D * (0.0 - thetad) + gains.Ktheta_P * (theta_d - x[THETA])) * params.Jy
    U4 = (gains.Kpsi_D * (0.0 - psid) + gains.Kpsi_P * wrap_angle(psi_d - x[PSI])) * params.Jz
    return np.array([U1, U2, U3, U4])


def outer_acceleration(x, desired, gains: PidGains, integral=(0.0, 0.0)) -> tuple[float, float]:
    """Commanded horizontal accelerations, each clamped to ``+-a_max``.

    The integral contribution is clamped to ``+-a_max`` on its own as well.
    """
    x_d, y_d = desired
    a_max = gains.a_max
    ix = min(max(gains.Kx_I * integral[0], -a_max), a_max)
    iy = min(max(gains.Ky_I * integral[1], -a_max), a_max)
    ax = gains.Kx_P * (x_d - x[X]) + ix - gains.Kx_D * x[VX]
    ay = gains.Ky_P * (y_d - x[Y]) + iy - gains.Ky_D * x[VY]
    return min(max(ax, -a_max), a_max), min(max(ay, -a_max), a_max)


def tilt_from_acceleration(ax: float, ay: float, psi: float, U1: float, params: QuadParams,
                           tilt_max: float) -> tuple[float, float]:
    """Small-angle inverse of the horizontal translational dynamics."""
    if not U1 > 0:
        raise InvalidThrust(f"U1 must be positive, got {U1}")
    k = params.m / U1
    c, s = math.cos(psi), math.sin(psi)
    theta_d = -k * (ax * c + ay * s)
    phi_d = -k * (ax * s - ay * c)
    clamp = math.radians(tilt_max)
    return min(max(phi_d, -clamp), clamp), min(max(theta_d, -clamp), clamp)


def pid_outer(x, desired, gains: PidGains, U1: float, params: QuadParams,
              integral=(0.0, 0.0)) -> tuple[float, float]:
    """Position loop; returns ``(phi_d, theta_d)`` clamped to ``+-tilt_max_deg``."""
    ax, ay = outer_acceleration(x, desired, gains, integral)
    return tilt_from_acceleration(ax, ay, x[PSI], U1, params, gains.tilt_max_deg)


class PidController:
    """Stateful cascade; one instance per control loop.

    Holds the trapezoidal position-error integrals. :meth:`step` returns
    control inputs ``U1..U4``; convert them with :func:`quadsid.model.mix_inverse`.
    """

    def __init__(self, gains: PidGains, params: QuadParams):
        self.gains = gains
        self.params = params
        self.reset()

    def reset(self):
        self.integral = [0.0, 0.0]
        self._prev_err = None

    def step(self, x, setpoint, dt: float) -> np.ndarray:
        if not dt > 0:
            raise ValueError("dt must be positive")
        x_d, y_d, z_d, psi_d = setpoint
        g = self.gains
        err = (x_d - x[X], y_d - x[Y])
        if self._prev_err is not None:
            for i, (ki, e, e_prev) in enumerate(zip((g.Kx_I, g.Ky_I), err, self._prev_err)):
                self.integral[i] += 0.5 * (e + e_prev) * dt
                if ki > 0:
                    lim = g.a_max / ki
                    self.integral[i] = min(max(self.integral[i], -lim), lim)
        self._prev_err = err
        U1 = thrust_command(x, z_d, g, self.params)
        phi_d, theta_d = pid_outer(x, (x_d, y_d), g, U1, self.params, self.integral)
        return pid_inner(x, (z_d, phi_d, theta_d, psi_d), g, self.params)


def pid_step(controller: PidController, x, setpoint, dt: float) -> np.ndarray:
    return controller.step(x, setpoint, dt)
