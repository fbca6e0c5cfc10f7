"""Layer-1 streamfunction of two-vortex configurations and its stagnation points.

Configurations (vortex 1 in layer 1, vortex 2 in layer 2)::

    same_sign_horizontal   G = (1,  1) at (0, beta), (alpha, beta)
    same_sign_vertical     G = (1,  1) at (0, alpha), (0, beta - alpha)     0 < alpha < beta
    opposite_horizontal    G = (1, -1) at (0, beta), (alpha, beta)
    opposite_vertical      G = (1, -1) at (0, alpha), (0, alpha - beta)     0 < beta < alpha
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, SingularityError
from .model import SystemState, make_state, stream_gradient
from .phase import FieldGrid, make_field_grid
from .special import _kc_u, _ks_u

NEWTON_TOL = 1e-10
DEDUP_TOL = 1e-6
HESSIAN_STEP = 1e-5
DET_THRESHOLD = 1e-8


class StreamKind(str, Enum):
    SAME_SIGN_HORIZONTAL = "same_sign_horizontal"
    SAME_SIGN_VERTICAL = "same_sign_vertical"
    OPPOSITE_HORIZONTAL = "opposite_horizontal"
    OPPOSITE_VERTICAL = "opposite_vertical"


class StagnationClass(str, Enum):
    SADDLE = "saddle"
    CENTER = "center"
    BOUNDARY = "boundary"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class StreamConfig:
    kind: StreamKind
    alpha: float
    beta: float

    def __post_init__(self):
        kind = StreamKind(self.kind)
        object.__setattr__(self, "kind", kind)
        a, b = self.alpha, self.beta
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError("alpha and beta must be finite")
        if kind in (StreamKind.SAME_SIGN_HORIZONTAL, StreamKind.OPPOSITE_HORIZONTAL):
            if not b > 0:
                raise DomainError("horizontal configurations need beta > 0")
        elif kind is StreamKind.SAME_SIGN_VERTICAL:
            if not 0 < a < b:
                raise DomainError("same_sign_vertical needs 0 < alpha < beta")
        elif not 0 < b < a:
            raise DomainError("opposite_vertical needs 0 < beta < alpha")

    @property
    def gamma2(self) -> float:
        return 1.0 if self.kind in (StreamKind.SAME_SIGN_HORIZONTAL, StreamKind.SAME_SIGN_VERTICAL) else -1.0

    @property
    def vortices(self) -> tuple[tuple[float, float], tuple[float, float]]:
        a, b = self.alpha, self.beta
        k = self.kind
        if k in (StreamKind.SAME_SIGN_HORIZONTAL, StreamKind.OPPOSITE_HORIZONTAL):
            return (0.0, b), (a, b)
        if k is StreamKind.SAME_SIGN_VERTICAL:
            return (0.0, a), (0.0, b - a)
        return (0.0, a), (0.0, a - b)

    def state(self) -> SystemState:
        (x1, y1), (x2, y2) = self.vortices
        return make_state([(1, 1.0, x1, y1), (2, self.gamma2, x2, y2)])

    def default_region(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Search window; wide enough to hold the wall stagnation points."""
        (x1, y1), (x2, y2) = self.vortices
        top = max(y1, y2)
        w = max(3.0, abs(self.alpha) + 3.0) + 2.0 * top
        return (-w, w), (1e-3, top + 4.0)


def stream_psi1(config: StreamConfig, p):
    """psi_1 from its closed-form expression.

    Written with G_s(r) = ln r - K0(r) and G_c(r) = ln r + K0(r), so a field
    point on the layer-2 vortex takes the finite limit of G_c.
    """
    x = np.asarray(p[0], dtype=float)
    y = np.asarray(p[1], dtype=float)
    if np.any(y < 0):
        raise DomainError("field points must satisfy y >= 0")
    (x1, y1), (x2, y2) = config.vortices
    r1 = np.hypot(x - x1, y - y1)
    if np.any(r1 == 0):
        raise SingularityError("field point on the layer-1 vortex")
    r1s = np.hypot(x - x1, y + y1)
    r2 = np.hypot(x - x2, y - y2)
    r2s = np.hypot(x - x2, y + y2)
    out = (_ks_u(r1) - _ks_u(r1s)) + config.gamma2 * (_kc_u(r2) - _kc_u(r2s))
    return float(out) if np.ndim(out) == 0 else out


def field_grid(config: StreamConfig, x_range, y_range, nx: int, ny: int) -> FieldGrid:
    """psi_1 on a grid; the sample on the layer-1 vortex (if any) is flagged out."""
    if nx < 2 or ny < 2:
        raise DomainError("empty grid")
    x = np.linspace(*x_range, nx)
    y = np.linspace(*y_range, ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    (x1, y1), _ = config.vortices
    ok = (Y >= 0) & ~((X == x1) & (Y == y1))
    vals = np.zeros_like(X)
    vals[ok] = stream_psi1(config, (X[ok], Y[ok]))
    return make_field_grid(x, y, vals, ok)


@dataclass(frozen=True)
class StagnationPoint:
    position: tuple[float, float]
    classification: StagnationClass
    hessian_det: float
    gradient_norm: float


def _grad(state, x, y):
    gx, gy = stream_gradient(1, state, (x, y))
    return np.array([gx, gy])


def _jacobian(state, x, y, h):
    """Derivative of the analytic gradient; one-sided in y at the wall."""
    J = np.empty((2, 2))
    J[:, 0] = (_grad(state, x + h, y) - _grad(state, x - h, y)) / (2 * h)
    if y - h >= 0:
        J[:, 1] = (_grad(state, x, y + h) - _grad(state, x, y - h)) / (2 * h)
    else:
        J[:, 1] = (_grad(state, x, y + h) - _grad(state, x, y)) / h
    return J


def _newton2d(state, p, region, max_iter=60):
    (xl, xh), (yl, yh) = region
    p = np.array(p, dtype=float)
    try:
        g = _grad(state, *p)
    except SingularityError:
        return None
    n = np.hypot(*g)
    for _ in range(max_iter):
        if n <= NEWTON_TOL:
            return p
        h = 1e-6 * max(1.0, abs(p[0]), abs(p[1]))
        J = _jacobian(state, p[0], p[1], h)
        try:
            d = -np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _h in range(21):
            q = p + lam * d
            if q[1] > 0 and xl - 1 <= q[0] <= xh + 1 and q[1] <= yh + 1:
                try:
                    gq = _grad(state, *q)
                except SingularityError:
                    gq = None
                if gq is not None and np.hypot(*gq) < n:
                    break
            lam *= 0.5
        else:
            return None
        p, g, n = q, gq, np.hypot(*gq)
    return p if n <= NEWTON_TOL else None


def _wall_root(state, a, b, max_iter=200):
    """Root of d psi/dy (x, 0) in [a, b]; safeguarded secant-bisection."""
    f = lambda x: float(_grad(state, x, 0.0)[1])
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    for _ in range(max_iter):
        x = b - fb * (b - a) / (fb - fa)
        if not (min(a, b) < x < max(a, b)):
            x = 0.5 * (a + b)
        fx = f(x)
        if abs(fx) <= NEWTON_TOL * 1e-2 or abs(b - a) < 1e-15 * max(1.0, abs(x)):
            return x
        if np.sign(fx) == np.sign(fa):
            a, fa = x, fx
        else:
            b, fb = x, fx
        # keep the bracket shrinking even when secant steps stall at one end
        m = 0.5 * (a + b)
        fm = f(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


def hessian_fd(f, p, h: float = HESSIAN_STEP) -> np.ndarray:
    """Central-difference Hessian of a scalar field f(x, y) (one-sided in y at the wall)."""
    x, y = p
    fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h**2
    if y - h >= 0:
        fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h**2
        fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h**2)
    else:
        fyy = (f(x, y + 2 * h) - 2 * f(x, y + h) + f(x, y)) / h**2
        fxy = (f(x + h, y + h) - f(x + h, y) - f(x - h, y + h) + f(x - h, y)) / (2 * h**2)
    return np.array([[fxx, fxy], [fxy, fyy]])


def hessian_psi(config: StreamConfig, p, h: float = HESSIAN_STEP) -> np.ndarray:
    return hessian_fd(lambda a, b: stream_psi1(config, (a, b)), p, h)


def classify_hessian(H: np.ndarray) -> tuple[StagnationClass, float]:
    det = float(H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0])
    if det < -DET_THRESHOLD:
        return StagnationClass.SADDLE, det
    if det > DET_THRESHOLD:
        return StagnationClass.CENTER, det
    return StagnationClass.DEGENERATE, det


def classify_stagnation(field, p) -> StagnationClass:
    """Saddle / center / degenerate from the sign of the Hessian determinant.

    ``field`` is a StreamConfig (its psi_1) or any callable f(x, y).
    """
    f = field if callable(field) else (lambda a, b: stream_psi1(field, (a, b)))
    return classify_hessian(hessian_fd(f, p))[0]


def find_stagnation_points(config: StreamConfig, region=None, grid_seeds: int = 60) -> list[StagnationPoint]:
    """Interior zeros of grad psi_1 and wall zeros of d psi_1/dy, deduplicated."""
    region = region or config.default_region()
    (xl, xh), (yl, yh) = region
    yl = max(yl, 0.0)
    state = config.state()
    (x1, y1), (x2, y2) = config.vortices
    found: list[StagnationPoint] = []

    def add(p, cls=None):
        if not (xl <= p[0] <= xh and yl <= p[1] <= yh) and p[1] != 0.0:
            return
        if min(math.hypot(p[0] - x1, p[1] - y1), math.hypot(p[0] - x2, p[1] - y2)) < 1e-6:
            return
        if any(math.hypot(p[0] - q.position[0], p[1] - q.position[1]) < DEDUP_TOL for q in found):
            return
        g = _grad(state, *p)
        if cls is None:
            cls, det = classify_hessian(hessian_psi(config, p))
        else:
            det = float(np.linalg.det(hessian_psi(config, p)))
        found.append(StagnationPoint((float(p[0]), float(p[1])), cls, det, float(np.hypot(*g))))

    # interior: cells where both gradient components change sign
    xs = np.linspace(xl, xh, grid_seeds)
    ys = np.linspace(max(yl, 1e-3), yh, grid_seeds)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    bad = (np.hypot(X - x1, Y - y1) == 0)
    X = np.where(bad, X + 1e-9, X)
    gx, gy = stream_gradient(1, state, (X, Y))

    def changes(g):
        c = np.stack([g[:-1, :-1], g[1:, :-1], g[1:, 1:], g[:-1, 1:]])
        return (c.min(axis=0) <= 0) & (c.max(axis=0) >= 0)

    cells = changes(gx) & changes(gy)
    for i, j in zip(*np.nonzero(cells)):
        seed = (0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
        p = _newton2d(state, seed, region)
        if p is not None and p[1] > 0:
            add(p)

    # wall: tangential velocity -d psi/dy vanishes
    xw = np.linspace(xl, xh, 4 * grid_seeds + 1)
    gw = stream_gradient(1, state, (xw, np.zeros_like(xw)))[1]
    for k in np.nonzero(np.sign(gw[:-1]) * np.sign(gw[1:]) <= 0)[0]:
        xr = _wall_root(state, xw[k], xw[k + 1])
        add((xr, 0.0), StagnationClass.BOUNDARY)
    found.sort(key=lambda s: (s.position[1] != 0.0, s.position))
    return found


def write_stagnation_csv(config: StreamConfig, points: list[StagnationPoint], path) -> None:
    f = lambda v: format(float(v), ".17g")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "alpha", "beta", "x", "y", "class", "hessian_det"])
        for s in points:
            w.writerow([config.kind.value, f(config.alpha), f(config.beta), f(s.position[0]), f(s.position[1]),
                        s.classification.value, f(s.hessian_det)])
