"""Fixed-step RK4 integration of the vortex system with invariant monitoring."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError
from .model import SystemState, _hamiltonian, _velocities

Y_FLOOR = 1e-9
SEPARATION_FLOOR = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    steps: int
    record_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if self.steps < 1:
            raise DomainError(f"steps must be positive, got {self.steps!r}")
        if not 1 <= self.record_every <= self.steps:
            raise DomainError("record_every must lie in [1, steps]")

    @classmethod
    def from_horizon(cls, T: float, dt: float, record_every: int = 1) -> "IntegratorConfig":
        return cls(dt, max(1, int(round(T / dt))), record_every)


@njit(cache=True)
def _floor_breach(lay, x, y, yfloor, sepfloor):
    n = x.shape[0]
    for i in range(n):
        if not (y[i] > yfloor):
            return True
    for i in range(n):
        for j in range(i + 1, n):
            if lay[i] == lay[j] and math.hypot(x[i] - x[j], y[i] - y[j]) < sepfloor:
                return True
    return False


@njit(cache=True)
def _rk4_run(gam, lay, x0, y0, dt, steps, record_every, yfloor, sepfloor):
    n = x0.shape[0]
    nrec_max = steps // record_every + 1
    xr = np.empty((nrec_max, n))
    yr = np.empty((nrec_max, n))
    tr = np.empty(nrec_max)
    x = x0.copy()
    y = y0.copy()
    xr[0] = x
    yr[0] = y
    tr[0] = 0.0
    nrec = 1
    k1x = np.empty(n); k1y = np.empty(n)
    k2x = np.empty(n); k2y = np.empty(n)
    k3x = np.empty(n); k3y = np.empty(n)
    k4x = np.empty(n); k4y = np.empty(n)
    xt = np.empty(n); yt = np.empty(n)
    for step in range(1, steps + 1):
        if _velocities(gam, lay, x, y, k1x, k1y):
            return xr, yr, tr, nrec, True
        for i in range(n):
            xt[i] = x[i] + 0.5 * dt * k1x[i]
            yt[i] = y[i] + 0.5 * dt * k1y[i]
        if _velocities(gam, lay, xt, yt, k2x, k2y):
            return xr, yr, tr, nrec, True
        for i in range(n):
            xt[i] = x[i] + 0.5 * dt * k2x[i]
            yt[i] = y[i] + 0.5 * dt * k2y[i]
        if _velocities(gam, lay, xt, yt, k3x, k3y):
            return xr, yr, tr, nrec, True
        for i in range(n):
            xt[i] = x[i] + dt * k3x[i]
            yt[i] = y[i] + dt * k3y[i]
        if _velocities(gam, lay, xt, yt, k4x, k4y):
            return xr, yr, tr, nrec, True
        for i in range(n):
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])
            y[i] += dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])
        if _floor_breach(lay, x, y, yfloor, sepfloor):
            return xr, yr, tr, nrec, True
        if step % record_every == 0:
            xr[nrec] = x
            yr[nrec] = y
            tr[nrec] = step * dt
            nrec += 1
    return xr, yr, tr, nrec, False


@njit(cache=True)
def _invariants(gam, lay, xr, yr):
    m = xr.shape[0]
    n = xr.shape[1]
    H = np.empty(m)
    M = np.empty(m)
    dmin = np.empty(m)
    for k in range(m):
        H[k] = _hamiltonian(gam, lay, xr[k], yr[k])
        s = 0.0
        d = np.inf
        for i in range(n):
            s += gam[i] * yr[k, i]
            for j in range(i + 1, n):
                d = min(d, math.hypot(xr[k, i] - xr[k, j], yr[k, i] - yr[k, j]))
        M[k] = s
        dmin[k] = d
    return H, M, dmin


@dataclass(frozen=True)
class TrajectoryRecord:
    """Recorded samples of one run, stored column-wise.

    ``x``, ``y`` have shape (samples, vortices). ``truncated`` is set when a
    floor was breached; the record then ends at the last safe sample.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    H: np.ndarray
    M: np.ndarray
    min_separation: np.ndarray
    gammas: np.ndarray
    layers: np.ndarray
    truncated: bool

    def __len__(self):
        return self.t.shape[0]

    def state(self, k: int) -> SystemState:
        return SystemState.from_arrays(self.gammas, self.layers, self.x[k], self.y[k], self.t[k])

    @property
    def samples(self):
        """List of (time, state, H, M, min_pair_separation) tuples."""
        return [
            (float(self.t[k]), self.state(k), float(self.H[k]), float(self.M[k]), float(self.min_separation[k]))
            for k in range(len(self))
        ]

    @property
    def final_state(self) -> SystemState:
        return self.state(len(self) - 1)

    def relative_energy_drift(self) -> float:
        return float(np.max(np.abs(self.H - self.H[0])) / abs(self.H[0]))

    def momentum_drift(self) -> float:
        return float(np.max(np.abs(self.M - self.M[0])))


def integrate(state: SystemState, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Classical RK4 with fixed step; aborts cleanly at the y / separation floors."""
    if not isinstance(state, SystemState):
        raise DomainError("integrate expects a SystemState")
    gam, lay = state.gammas, state.layers
    xr, yr, tr, nrec, trunc = _rk4_run(
        gam, lay, state.xs.copy(), state.ys.copy(), float(cfg.dt), int(cfg.steps), int(cfg.record_every),
        Y_FLOOR, SEPARATION_FLOOR,
    )
    xr, yr = xr[:nrec].copy(), yr[:nrec].copy()
    tr = tr[:nrec] + state.time
    H, M, dmin = _invariants(gam, lay, xr, yr)
    return TrajectoryRecord(tr, xr, yr, H, M, dmin, gam.copy(), lay.copy(), bool(trunc))


@dataclass(frozen=True)
class CollapseReport:
    t: np.ndarray
    r12: np.ndarray
    monotone_decreasing: bool
    r_min: float
    exp_rate: float          # r12 ~ exp(-exp_rate * t)
    algebraic_exponent: float  # r12 ~ (t_end - t)^algebraic_exponent
    zero_crossing: bool      # separation vector reversed between samples
    truncated: bool

    @property
    def collapsing(self) -> bool:
        return self.monotone_decreasing and not self.zero_crossing and self.r12[-1] < self.r12[0]


def _fit_slope(u, v):
    ok = np.isfinite(u) & np.isfinite(v)
    if ok.sum() < 2 or np.ptp(u[ok]) == 0:
        return math.nan
    return float(np.polyfit(u[ok], v[ok], 1)[0])


def collapse_diagnostic(state: SystemState, cfg: IntegratorConfig) -> CollapseReport:
    """Separation history of a two-vortex run, with decay fits over the final half."""
    if len(state) != 2:
        raise DomainError("collapse_diagnostic needs exactly two vortices")
    rec = integrate(state, cfg)
    dx = rec.x[:, 0] - rec.x[:, 1]
    dy = rec.y[:, 0] - rec.y[:, 1]
    r = np.hypot(dx, dy)
    # the vortices passed through (or onto) each other between samples
    crossing = bool(np.any(r == 0) or np.any(dx[1:] * dx[:-1] + dy[1:] * dy[:-1] < 0))
    t = rec.t
    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.where(r > 0, np.log(r), np.nan)
        exp_rate = -_fit_slope(t[half], logr[half])
        tail = half & (t < t[-1])
        alg = _fit_slope(np.log(t[-1] - t[tail]), logr[tail])
    mono = bool(len(r) > 1 and np.all(np.diff(r) < 0))
    return CollapseReport(t, r, mono, float(r.min()), exp_rate, alg, crossing, rec.truncated)


def write_trajectory_csv(record: TrajectoryRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "idx", "layer", "gamma", "x", "y", "H", "M"])
        f = lambda v: format(float(v), ".17g")
        for k in range(len(record)):
            for i in range(record.x.shape[1]):
                w.writerow([
                    f(record.t[k]), i, int(record.layers[i]), f(record.gammas[i]),
                    f(record.x[k, i]), f(record.y[k, i]), f(record.H[k]), f(record.M[k]),
                ])
