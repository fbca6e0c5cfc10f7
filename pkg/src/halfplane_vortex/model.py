"""Two-layer point vortices on the upper half plane y > 0.

A vortex of strength G at (xs, ys) in layer ``L`` induces, with the
deformation wavenumber fixed to k = 1,

    psi_L  += G [ G_s(r) - G_s(r*) ]      (same layer)
    psi_L' += G [ G_c(r) - G_c(r*) ]      (other layer)

where r, r* are the distances to the vortex and to its mirror image
(xs, -ys), and G_s, G_c are the kernels in :mod:`halfplane_vortex.special`.
The wall y = 0 is a streamline (psi = 0) in both layers.

Vortex i moves with (-d psi/dy, d psi/dx) of its own layer's field, with its
own direct (singular) contribution removed; its own image is retained.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .errors import DomainError, SingularityError
from .special import (
    h_cross_scalar,
    h_same_scalar,
    kernel_cross_scalar,
    kernel_same_scalar,
)

K_DEFORMATION = 1.0
LAYERS = (1, 2)


@dataclass(frozen=True)
class Vortex:
    layer: int
    gamma: float
    x: float
    y: float

    def __post_init__(self):
        if self.layer not in LAYERS:
            raise DomainError(f"layer must be 1 or 2, got {self.layer!r}")
        if not math.isfinite(self.gamma) or self.gamma == 0:
            raise DomainError(f"strength must be finite and nonzero, got {self.gamma!r}")
        if not math.isfinite(self.x) or not math.isfinite(self.y):
            raise DomainError("vortex position must be finite")
        if self.y <= 0:
            raise DomainError(f"vortex must lie in the open upper half plane, got y={self.y!r}")

    @property
    def strength(self) -> float:
        return self.gamma

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SystemState:
    """Immutable ordered collection of vortices at a given time.

    Cross-layer vortices may coincide (the kernel is regular there);
    same-layer coincidence is rejected.
    """

    vortices: tuple[Vortex, ...]
    time: float = 0.0
    _arrays: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vs = tuple(self.vortices)
        object.__setattr__(self, "vortices", vs)
        if not vs:
            raise DomainError("a state needs at least one vortex")
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                a, b = vs[i], vs[j]
                if a.layer == b.layer and a.x == b.x and a.y == b.y:
                    raise SingularityError(f"vortices {i} and {j} coincide in layer {a.layer}")
        arrays = (
            np.array([v.gamma for v in vs], dtype=float),
            np.array([v.layer for v in vs], dtype=np.int64),
            np.array([v.x for v in vs], dtype=float),
            np.array([v.y for v in vs], dtype=float),
        )
        for a in arrays:
            a.setflags(write=False)
        object.__setattr__(self, "_arrays", arrays)

    @classmethod
    def from_arrays(cls, gammas, layers, xs, ys, time=0.0) -> "SystemState":
        return cls(
            tuple(Vortex(int(l), float(g), float(x), float(y)) for g, l, x, y in zip(gammas, layers, xs, ys)),
            float(time),
        )

    def __len__(self):
        return len(self.vortices)

    @property
    def gammas(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def layers(self) -> np.ndarray:
        return self._arrays[1]

    @property
    def xs(self) -> np.ndarray:
        return self._arrays[2]

    @property
    def ys(self) -> np.ndarray:
        return self._arrays[3]

    def with_positions(self, xs, ys, time=None) -> "SystemState":
        return SystemState.from_arrays(self.gammas, self.layers, xs, ys, self.time if time is None else time)

    def shifted(self, dx: float) -> "SystemState":
        return self.with_positions(self.xs + dx, self.ys)


@dataclass(frozen=True)
class PairGeometry:
    r_direct: float
    r_image: float


def pair_geometry(a, b) -> PairGeometry:
    """Distances from ``a`` to ``b`` and to the mirror image of ``b``."""
    (ax, ay), (bx, by) = a, b
    if ay <= 0 or by <= 0:
        raise DomainError("pair_geometry needs both points in y > 0")
    return PairGeometry(math.hypot(ax - bx, ay - by), math.hypot(ax - bx, ay + by))


# --- compiled kernels ---------------------------------------------------------
# Status codes: 0 ok, 1 field point on a same-layer vortex.


@njit(cache=True)
def _dkernel_over_r(r, same):
    if same:
        return h_same_scalar(r) / r
    return h_cross_scalar(r) / r


@njit(cache=True)
def _kernel(r, same):
    if same:
        return kernel_same_scalar(r)
    return kernel_cross_scalar(r)


@njit(cache=True)
def _velocities(gam, lay, x, y, u, v):
    n = x.shape[0]
    for i in range(n):
        gx = 0.0
        gy = 0.0
        for j in range(n):
            same = lay[i] == lay[j]
            dx = x[i] - x[j]
            if j != i:
                dy = y[i] - y[j]
                r = math.hypot(dx, dy)
                if r == 0.0:
                    if same:
                        return 1
                else:
                    q = _dkernel_over_r(r, same)
                    gx += gam[j] * dx * q
                    gy += gam[j] * dy * q
            dyi = y[i] + y[j]
            rs = math.hypot(dx, dyi)
            qs = _dkernel_over_r(rs, same)
            gx -= gam[j] * dx * qs
            gy -= gam[j] * dyi * qs
        u[i] = -gy
        v[i] = gx
    return 0


@njit(cache=True)
def _velocities_batch(gam, lay, X, Y, U, V):
    status = 0
    for k in range(X.shape[0]):
        s = _velocities(gam, lay, X[k], Y[k], U[k], V[k])
        if s != 0:
            U[k, :] = np.nan
            V[k, :] = np.nan
            status = s
    return status


@njit(cache=True)
def _field(layer, gam, lay, sx, sy, px, py, exclude, psi, gx, gy):
    """psi and grad psi of ``layer`` at each point; ``exclude`` drops one direct term."""
    n = sx.shape[0]
    for k in range(px.shape[0]):
        p = 0.0
        ax = 0.0
        ay = 0.0
        for j in range(n):
            same = lay[j] == layer
            dx = px[k] - sx[j]
            dyi = py[k] + sy[j]
            rs = math.hypot(dx, dyi)
            if j != exclude:
                dy = py[k] - sy[j]
                r = math.hypot(dx, dy)
                if r == 0.0:
                    if same:
                        return 1
                    p += gam[j] * (_kernel(0.0, False) - _kernel(rs, False))
                else:
                    p += gam[j] * (_kernel(r, same) - _kernel(rs, same))
                    q = _dkernel_over_r(r, same)
                    ax += gam[j] * dx * q
                    ay += gam[j] * dy * q
            else:
                p -= gam[j] * _kernel(rs, same)
            qs = _dkernel_over_r(rs, same)
            ax -= gam[j] * dx * qs
            ay -= gam[j] * dyi * qs
        psi[k] = p
        gx[k] = ax
        gy[k] = ay
    return 0


@njit(cache=True)
def _hamiltonian(gam, lay, x, y):
    n = x.shape[0]
    h = 0.0
    for i in range(n):
        h -= gam[i] * gam[i] * kernel_same_scalar(2.0 * y[i])
        for j in range(i + 1, n):
            same = lay[i] == lay[j]
            dx = x[i] - x[j]
            r = math.hypot(dx, y[i] - y[j])
            rs = math.hypot(dx, y[i] + y[j])
            if r == 0.0 and same:
                return np.nan
            h += 2.0 * gam[i] * gam[j] * (_kernel(r, same) - _kernel(rs, same))
    return h


# --- public API ---------------------------------------------------------------


def _field_eval(layer, state, p, exclude):
    if layer not in LAYERS:
        raise DomainError(f"layer must be 1 or 2, got {layer!r}")
    px = np.atleast_1d(np.asarray(p[0], dtype=float))
    py = np.atleast_1d(np.asarray(p[1], dtype=float))
    px, py = np.broadcast_arrays(px, py)
    shape = px.shape
    px = np.ascontiguousarray(px.ravel())
    py = np.ascontiguousarray(py.ravel())
    if np.any(py < 0):
        raise DomainError("field points must satisfy y >= 0")
    if exclude is None:
        exclude = -1
    elif not 0 <= exclude < len(state):
        raise DomainError(f"exclude index {exclude} out of range")
    psi = np.empty_like(px)
    gx = np.empty_like(px)
    gy = np.empty_like(px)
    status = _field(layer, state.gammas, state.layers, state.xs, state.ys, px, py, exclude, psi, gx, gy)
    if status:
        raise SingularityError("field point coincides with a same-layer vortex")
    scalar = np.ndim(p[0]) == 0 and np.ndim(p[1]) == 0
    if scalar:
        return float(psi[0]), float(gx[0]), float(gy[0])
    return psi.reshape(shape), gx.reshape(shape), gy.reshape(shape)


def streamfunction(layer: int, state: SystemState, p, exclude: int | None = None):
    """Layer streamfunction at ``p = (x, y)`` (scalars or broadcastable arrays).

    ``exclude`` removes the direct contribution of one vortex, keeping its
    image; this is the field that advects that vortex.
    """
    return _field_eval(layer, state, p, exclude)[0]


def stream_gradient(layer: int, state: SystemState, p, exclude: int | None = None):
    """(d psi/dx, d psi/dy) of the layer streamfunction at ``p``."""
    _, gx, gy = _field_eval(layer, state, p, exclude)
    return gx, gy


def velocities(state: SystemState) -> tuple[np.ndarray, np.ndarray]:
    """(xdot, ydot) arrays for every vortex."""
    u = np.empty(len(state))
    v = np.empty(len(state))
    if _velocities(state.gammas, state.layers, state.xs, state.ys, u, v):
        raise SingularityError("same-layer vortices coincide")
    return u, v


def velocity(state: SystemState, i: int) -> tuple[float, float]:
    if not 0 <= i < len(state):
        raise DomainError(f"vortex index {i} out of range")
    u, v = velocities(state)
    return float(u[i]), float(v[i])


def batch_velocities(gammas, layers, X, Y):
    """Velocities for many configurations sharing strengths and layers.

    ``X``, ``Y`` have shape (m, n); rows with a same-layer coincidence come
    back as NaN.
    """
    X = np.ascontiguousarray(X, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    U = np.empty_like(X)
    V = np.empty_like(X)
    _velocities_batch(np.asarray(gammas, dtype=float), np.asarray(layers, dtype=np.int64), X, Y, U, V)
    return U, V


def hamiltonian(state: SystemState) -> float:
    """Pairwise Hamiltonian with image self-energies.

    For one vortex per layer this is exactly
    G1^2[K0(2y1) - ln 2y1] + 2 G1 G2 [G_c(r12) - G_c(r12*)] + G2^2[K0(2y2) - ln 2y2].
    """
    h = _hamiltonian(state.gammas, state.layers, state.xs, state.ys)
    if math.isnan(h):
        raise SingularityError("same-layer vortices coincide")
    return h


def y_momentum(state: SystemState) -> float:
    return float(np.dot(state.gammas, state.ys))


def separation_rate_squared(state: SystemState) -> float:
    """d(r12^2)/dt / 2 for a two-vortex state."""
    if len(state) != 2:
        raise DomainError("separation_rate_squared needs exactly two vortices")
    u, v = velocities(state)
    return float((state.xs[0] - state.xs[1]) * (u[0] - u[1]) + (state.ys[0] - state.ys[1]) * (v[0] - v[1]))


# --- serialization --------------------------------------------------------------


def state_to_dict(state: SystemState) -> dict:
    return {
        "time": state.time,
        "vortices": [{"layer": v.layer, "gamma": v.gamma, "x": v.x, "y": v.y} for v in state.vortices],
    }


def state_from_dict(d: dict) -> SystemState:
    try:
        vs = [Vortex(int(v["layer"]), float(v["gamma"]), float(v["x"]), float(v["y"])) for v in d["vortices"]]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed state: {exc}") from exc
    return SystemState(tuple(vs), float(d.get("time", 0.0)))


def load_state(path) -> SystemState:
    with open(path) as fh:
        return state_from_dict(json.load(fh))


def dump_state(state: SystemState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh, indent=2)
        fh.write("\n")


def make_state(entries: Sequence[tuple], time: float = 0.0) -> SystemState:
    """Build a state from ``(layer, gamma, x, y)`` tuples."""
    return SystemState(tuple(Vortex(int(l), float(g), float(x), float(y)) for l, g, x, y in entries), time)
