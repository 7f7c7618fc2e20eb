"""Grey-box quadrotor model: parameters, kinematics, mixer and 6-DOF dynamics.

Conventions
-----------
Global frame is Z-down: gravity enters ``Zddot`` with a plus sign and thrust
with a minus sign. Arrays are used for the hot-path value types:

* state (12,): ``X, Y, Z, Xdot, Ydot, Zdot, phi, theta, psi, p, q, r``
* motor speeds (4,): ``w1..w4`` in rad/s, motor 1 front, 2 right, 3 back, 4 left
* control inputs (4,): ``U1`` thrust [N], ``U2..U4`` moments [N m]

The mixer follows ``U3 = l K_T (w3^2 - w1^2)``, i.e. ``U3`` is the negative
of the pitch moment that appears in the body-rate dynamics.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .config import check_known, default_values, take_floats
from .errors import GimbalLock, InvalidParams, NumericalDivergence

# state layout
X, Y, Z, VX, VY, VZ, PHI, THETA, PSI, P, Q, R = range(12)
STATE_NAMES = ("X", "Y", "Z", "Xdot", "Ydot", "Zdot", "phi", "theta", "psi", "p", "q", "r")
OUTPUT_INDEX = (X, Y, Z, PHI, THETA, PSI)

GIMBAL_EPS = 1e-6
DIVERGENCE_LIMIT = 1e9


@dataclass(frozen=True)
class QuadParams:
    """Physical constants of the grey-box model (SI units)."""

    m: float
    l: float
    g: float
    Jx: float
    Jy: float
    Jz: float
    Jr: float
    K_T: float
    b: float
    Kd_x: float
    Kd_y: float
    Kd_z: float
    rho: float
    D: float
    K_tau: float
    K_v: float
    R_m: float
    I0: float

    def __post_init__(self):
        bad = [
            name
            for name in ("m", "l", "g", "Jx", "Jy", "Jz", "K_T", "rho")
            if not getattr(self, name) > 0
        ]
        bad += [name for name in ("Jr", "Kd_x", "Kd_y", "Kd_z") if not getattr(self, name) >= 0]
        # b = 0 is allowed: it is the "neglected yaw drag" case
        if not self.b >= 0:
            bad.append("b")
        if bad:
            raise InvalidParams(f"parameters out of range: {', '.join(bad)}")
        for f in dataclasses.fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise InvalidParams(f"parameter {f.name} is not finite")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, values) -> "QuadParams":
        return cls(**take_floats(values, cls.field_names()))

    @classmethod
    def default(cls) -> "QuadParams":
        return cls.from_mapping(default_values())

    @classmethod
    def from_file(cls, path) -> "QuadParams":
        from .config import read_kv

        values = read_kv(path)
        check_known(values, cls.field_names())
        merged = {**default_values(), **values}
        return cls.from_mapping(merged)

    def replace(self, **changes) -> "QuadParams":
        return dataclasses.replace(self, **changes)

    @property
    def hover_speed(self) -> float:
        """Rotor speed at which total thrust balances weight."""
        return math.sqrt(self.m * self.g / (4.0 * self.K_T))


def rotation_body_to_global(phi: float, theta: float, psi: float) -> np.ndarray:
    """ZYX Euler rotation matrix mapping body-frame vectors to the global frame."""
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [cp * ct, cp * sf * st - cf * sp, cf * cp * st + sf * sp],
            [ct * sp, sp * sf * st + cf * cp, sp * cf * st - sf * cp],
            [-st, sf * ct, ct * cf],
        ]
    )


def _check_gimbal(theta: float) -> None:
    if not abs(theta) < math.pi / 2 - GIMBAL_EPS:
        raise GimbalLock(theta)


def euler_rate_map(phi: float, theta: float, body_rates) -> tuple[float, float, float]:
    """Euler-angle rates from body rates ``(p, q, r)``.

    Raises
    ------
    GimbalLock
        If ``|theta| >= pi/2 - 1e-6``.
    """
    _check_gimbal(theta)
    p, q, r = body_rates
    cf, sf = math.cos(phi), math.sin(phi)
    ct, tt = math.cos(theta), math.tan(theta)
    return (
        p + sf * tt * q + cf * tt * r,
        cf * q - sf * r,
        (sf * q + cf * r) / ct,
    )


def body_rates_from_euler(phi, theta, euler_rates):
    """Inverse of :func:`euler_rate_map`; accepts scalars or arrays."""
    phid, thetad, psid = euler_rates
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    p = phid - st * psid
    q = cf * thetad + sf * ct * psid
    r = -sf * thetad + cf * ct * psid
    return p, q, r


def motor_power(tau: float, omega: float, params: QuadParams) -> float:
    """Static electrical power drawn by one motor delivering torque ``tau`` at ``omega``."""
    if params.K_tau == 0:
        raise InvalidParams("K_tau must be nonzero")
    kt, i0, rm = params.K_tau, params.I0, params.R_m
    return (tau + kt * i0) * (kt * i0 * rm + tau * rm + kt * params.K_v * omega) / kt**2


def momentum_thrust(v: float, params: QuadParams) -> float:
    """Momentum-theory rotor thrust with the induced velocity jump taken as ``2 v``."""
    return math.pi / 4.0 * params.D**2 * params.rho * v * (2.0 * v)


def thrust_coefficient(T: float, omega: float) -> float:
    if omega == 0:
        raise InvalidParams("omega must be nonzero")
    return T / omega**2


def mixer_matrix(params: QuadParams) -> np.ndarray:
    """Matrix ``M`` with ``U = M @ w**2``."""
    kt, lk, b = params.K_T, params.l * params.K_T, params.b
    return np.array(
        [
            [kt, kt, kt, kt],
            [0.0, -lk, 0.0, lk],
            [-lk, 0.0, lk, 0.0],
            [-b, b, -b, b],
        ]
    )


def mix_forward(w, params: QuadParams) -> np.ndarray:
    """Motor speeds (..., 4) to control inputs ``U1..U4`` (..., 4)."""
    w2 = np.square(np.asarray(w, dtype=float))
    return w2 @ mixer_matrix(params).T


def mix_inverse(u, params: QuadParams) -> tuple[np.ndarray, bool]:
    """Motor speeds realising control inputs ``u``.

    Negative squared speeds are clamped to zero; the second return value is
    True when that happened (the result then no longer reproduces ``u``).
    Works row-wise on (..., 4) arrays; the flag is True if any row clamped.
    """
    if not (params.K_T > 0 and params.b > 0 and params.l > 0):
        raise InvalidParams("mix_inverse needs K_T, b, l > 0")
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
    base = u1 / (4.0 * params.K_T)
    roll = u2 / (2.0 * params.l * params.K_T)
    pitch = u3 / (2.0 * params.l * params.K_T)
    yaw = u4 / (4.0 * params.b)
    w2 = np.stack([base - pitch - yaw, base - roll + yaw, base + pitch - yaw, base + roll + yaw], axis=-1)
    saturated = bool(np.any(w2 < 0))
    return np.sqrt(np.maximum(w2, 0.0)), saturated


def dynamics_derivatives(x, w, params: QuadParams) -> np.ndarray:
    """Time derivative of the 12-state for constant motor speeds ``w``."""
    _, _, _, vx, vy, vz, phi, theta, psi, p, q, r = (float(v) for v in x)
    w1, w2, w3, w4 = (float(v) for v in w)
    pr = params
    _check_gimbal(theta)

    cf, sf = math.cos(phi), math.sin(phi)
    ct, st, tt = math.cos(theta), math.sin(theta), math.tan(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    s1, s2, s3, s4 = w1 * w1, w2 * w2, w3 * w3, w4 * w4
    thrust = pr.K_T * (s1 + s2 + s3 + s4)
    inv_m = 1.0 / pr.m

    ax = (-(cf * cp * st + sf * sp) * thrust - pr.Kd_x * vx) * inv_m
    ay = (-(cf * sp * st - sf * cp) * thrust - pr.Kd_y * vy) * inv_m
    az = (-(cf * ct) * thrust - pr.Kd_z * vz) * inv_m + pr.g

    gyro = w1 - w2 + w3 - w4
    arm = pr.l * pr.K_T
    pdot = ((pr.Jy - pr.Jz) * q * r - pr.Jr * q * gyro + arm * (s4 - s2)) / pr.Jx
    qdot = ((pr.Jz - pr.Jx) * p * r - pr.Jr * p * gyro + arm * (s1 - s3)) / pr.Jy
    rdot = ((pr.Jx - pr.Jy) * p * q - pr.b * (s1 - s2 + s3 - s4)) / pr.Jz

    return np.array(
        [
            vx, vy, vz,
            ax, ay, az,
            p + sf * tt * q + cf * tt * r,
            cf * q - sf * r,
            (sf * q + cf * r) / ct,
            pdot, qdot, rdot,
        ]
    )


def step_rk4(x, w, params: QuadParams, dt: float) -> np.ndarray:
    """One classical RK4 step with motor speeds held over the interval."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    k1 = dynamics_derivatives(x, w, params)
    k2 = dynamics_derivatives(x + 0.5 * dt * k1, w, params)
    k3 = dynamics_derivatives(x + 0.5 * dt * k2, w, params)
    k4 = dynamics_derivatives(x + dt * k3, w, params)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.abs(out) < DIVERGENCE_LIMIT):
        raise NumericalDivergence()
    return out


def hover_state() -> np.ndarray:
    return np.zeros(12)


def hover_speeds(params: QuadParams) -> np.ndarray:
    return np.full(4, params.hover_speed)
