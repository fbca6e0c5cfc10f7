"""Reduced two-vortex Hamiltonians H(x, y; alpha) and their level curves.

With x = |x1 - x2| and the momentum invariant eliminating y2, each case is a
scalar field on a strip of the (x, y) plane:

* ``two_layer_opposite``  G1 = -G2 = 1, y1 = y, y2 = y - alpha   (y > max(0, alpha))
* ``two_layer_same``      G1 =  G2 = 1, y1 = y, y2 = alpha - y   (0 < y < alpha)
* ``one_layer_case1``     one layer, G1 = -G2 = 1, y1 = y2 = y   (alpha = 0)
* ``one_layer_case2``     one layer, G1 = -G2 = 1, y2 = y - 1    (alpha = 1)
* ``one_layer_case3``     one layer, G1 =  G2 = 1, y2 = 1 - y    (alpha = 1)

In the two-layer forms the product ``ln[(2y)(2 y2)]`` collects both image
self-energies; the pair terms ln(A/B) + 2K0(sqrt A) - 2K0(sqrt B) are
evaluated as 2[G_c(sqrt A) - G_c(sqrt B)] so that A = 0 (stacked vortices)
stays finite.

Every form is even in x, so x may also be read as the signed separation
x2 - x1; orbits around the stacked point then appear as closed curves.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .model import SystemState, make_state
from .special import _k0_u, _kc_u


class PhaseKind(str, Enum):
    TWO_LAYER_OPPOSITE = "two_layer_opposite"
    TWO_LAYER_SAME = "two_layer_same"
    ONE_LAYER_CASE1 = "one_layer_case1"
    ONE_LAYER_CASE2 = "one_layer_case2"
    ONE_LAYER_CASE3 = "one_layer_case3"


_ONE_LAYER_ALPHA = {
    PhaseKind.ONE_LAYER_CASE1: 0.0,
    PhaseKind.ONE_LAYER_CASE2: 1.0,
    PhaseKind.ONE_LAYER_CASE3: 1.0,
}


@dataclass(frozen=True)
class PhaseCase:
    kind: PhaseKind
    alpha: float = 0.0

    def __post_init__(self):
        kind = PhaseKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in _ONE_LAYER_ALPHA:
            object.__setattr__(self, "alpha", _ONE_LAYER_ALPHA[kind])
        elif not np.isfinite(self.alpha):
            raise DomainError("alpha must be finite")
        if kind is PhaseKind.TWO_LAYER_SAME and self.alpha <= 0:
            raise DomainError("two_layer_same needs alpha > 0")

    def in_domain(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a = self.alpha
        k = self.kind
        if k is PhaseKind.TWO_LAYER_OPPOSITE:
            ok = y > max(0.0, a)
        elif k is PhaseKind.TWO_LAYER_SAME:
            ok = (y > 0) & (y < a)
        elif k is PhaseKind.ONE_LAYER_CASE1:
            ok = (y > 0) & (x != 0)
        elif k is PhaseKind.ONE_LAYER_CASE2:
            ok = y > 1
        else:
            ok = (y > 0) & (y < 1)
        return ok & np.isfinite(x) & np.isfinite(y)

    def lower_height(self, y):
        """Height of the second vortex for first-vortex height y."""
        if self.kind in (PhaseKind.TWO_LAYER_OPPOSITE, PhaseKind.ONE_LAYER_CASE2, PhaseKind.ONE_LAYER_CASE1):
            return y - self.alpha
        return self.alpha - y


def _unchecked(case: PhaseCase, x, y):
    a = case.alpha
    k = case.kind
    y2 = case.lower_height(y)
    if k in (PhaseKind.TWO_LAYER_OPPOSITE, PhaseKind.TWO_LAYER_SAME):
        A = np.hypot(x, 2.0 * y - a)
        B = np.hypot(x, a)
        return (
            _k0_u(2.0 * y) + _k0_u(2.0 * y2) - np.log((2.0 * y) * (2.0 * y2))
            + 2.0 * (_kc_u(A) - _kc_u(B))
        )
    if k is PhaseKind.ONE_LAYER_CASE1:
        return 2.0 * np.log(np.hypot(x, 2.0 * y) / (2.0 * y * np.abs(x)))
    ratio = np.log(np.hypot(x, 2.0 * y - 1.0) / np.hypot(x, 1.0))
    return -np.log(4.0 * y * y2) + 2.0 * ratio


def phase_hamiltonian(case: PhaseCase, x, y):
    """Reduced Hamiltonian at (x, y); raises DomainError outside the case domain."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if not np.all(case.in_domain(xa, ya)):
        raise DomainError(f"({x!r}, {y!r}) outside the {case.kind.value} domain")
    out = _unchecked(case, xa, ya)
    return float(out) if np.ndim(out) == 0 else out


def reconstruct_state(case: PhaseCase, x: float, y: float, x1: float = 0.0) -> SystemState:
    """Two-layer state whose full Hamiltonian equals ``phase_hamiltonian(case, x, y)``."""
    if case.kind is PhaseKind.TWO_LAYER_OPPOSITE:
        g2 = -1.0
    elif case.kind is PhaseKind.TWO_LAYER_SAME:
        g2 = 1.0
    else:
        raise DomainError("only the two-layer cases correspond to model states")
    if not case.in_domain(x, y):
        raise DomainError(f"({x!r}, {y!r}) outside the {case.kind.value} domain")
    return make_state([(1, 1.0, x1, y), (2, g2, x1 + x, case.lower_height(y))])


def project_state(case: PhaseCase, state: SystemState) -> tuple[float, float]:
    """(|x1 - x2|, y1) of a two-vortex state."""
    return abs(float(state.xs[0] - state.xs[1])), float(state.ys[0])


@dataclass(frozen=True)
class FieldGrid:
    """Samples ``values[i, j]`` at (x[i], y[j]).

    Out-of-domain cells hold 0.0 and ``in_domain[i, j] = False``.
    """

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    in_domain: np.ndarray

    @property
    def x_range(self):
        return (float(self.x[0]), float(self.x[-1]))

    @property
    def y_range(self):
        return (float(self.y[0]), float(self.y[-1]))

    @property
    def nx(self):
        return self.x.shape[0]

    @property
    def ny(self):
        return self.y.shape[0]

    @property
    def cell(self) -> tuple[float, float]:
        return (float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0]))


def make_field_grid(x, y, values, in_domain=None) -> FieldGrid:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size < 2 or y.size < 2:
        raise DomainError("a field grid needs at least 2 samples per axis")
    if values.shape != (x.size, y.size):
        raise DomainError("values must have shape (nx, ny)")
    mask = np.isfinite(values) if in_domain is None else np.asarray(in_domain, dtype=bool) & np.isfinite(values)
    vals = np.where(mask, values, 0.0)
    for a in (x, y, vals, mask):
        a.setflags(write=False)
    return FieldGrid(x, y, vals, mask)


def grid_evaluate(case: PhaseCase, x_range, y_range, nx: int, ny: int) -> FieldGrid:
    if nx < 2 or ny < 2 or not x_range[1] > x_range[0] or not y_range[1] > y_range[0]:
        raise DomainError("empty grid")
    x = np.linspace(x_range[0], x_range[1], nx)
    y = np.linspace(y_range[0], y_range[1], ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    ok = case.in_domain(X, Y)
    vals = np.zeros_like(X)
    vals[ok] = _unchecked(case, X[ok], Y[ok])
    return make_field_grid(x, y, vals, ok)


# --- marching squares -----------------------------------------------------------------


@dataclass(frozen=True)
class Polyline:
    level: float
    points: np.ndarray  # (k, 2); closed curves repeat the first point at the end
    closed: bool


def _cell_segments(above, center_above):
    """Edge pairs for one cell. Corners ordered 00, 10, 11, 01; edges B, R, T, L."""
    a00, a10, a11, a01 = above
    crossed = []
    if a00 != a10:
        crossed.append("B")
    if a10 != a11:
        crossed.append("R")
    if a01 != a11:
        crossed.append("T")
    if a00 != a01:
        crossed.append("L")
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # saddle cell: the midpoint value decides which diagonal is joined
        if a00 == center_above:
            return [("B", "R"), ("T", "L")]
        return [("L", "B"), ("R", "T")]
    return []


def extract_level_curves(field: FieldGrid, levels) -> list[Polyline]:
    """Marching-squares level curves with linear edge interpolation."""
    x, y, v, ok = field.x, field.y, field.values, field.in_domain
    cell_ok = ok[:-1, :-1] & ok[1:, :-1] & ok[1:, 1:] & ok[:-1, 1:]
    out: list[Polyline] = []
    for level in np.atleast_1d(np.asarray(levels, dtype=float)):
        above = v >= level
        corners = np.stack([above[:-1, :-1], above[1:, :-1], above[1:, 1:], above[:-1, 1:]])
        mixed = cell_ok & corners.any(axis=0) & ~corners.all(axis=0)
        points: dict[tuple, tuple[float, float]] = {}
        segments: list[tuple[tuple, tuple]] = []

        def edge_point(key):
            if key not in points:
                kind, i, j = key
                if kind == "h":
                    a, b = v[i, j], v[i + 1, j]
                    t = (level - a) / (b - a)
                    points[key] = (x[i] + t * (x[i + 1] - x[i]), y[j])
                else:
                    a, b = v[i, j], v[i, j + 1]
                    t = (level - a) / (b - a)
                    points[key] = (x[i], y[j] + t * (y[j + 1] - y[j]))
            return key

        for i, j in zip(*np.nonzero(mixed)):
            keys = {"B": ("h", i, j), "R": ("v", i + 1, j), "T": ("h", i, j + 1), "L": ("v", i, j)}
            center = 0.25 * (v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1])
            for e1, e2 in _cell_segments(tuple(corners[:, i, j]), center >= level):
                segments.append((edge_point(keys[e1]), edge_point(keys[e2])))

        out.extend(_link(level, segments, points))
    return out


def _link(level, segments, points) -> list[Polyline]:
    adj: dict[tuple, list[int]] = {}
    for s, (a, b) in enumerate(segments):
        adj.setdefault(a, []).append(s)
        adj.setdefault(b, []).append(s)
    used = [False] * len(segments)
    lines = []

    def walk(start):
        chain = [start]
        key = start
        while True:
            nxt = [s for s in adj[key] if not used[s]]
            if not nxt:
                return chain
            s = nxt[0]
            used[s] = True
            a, b = segments[s]
            key = b if a == key else a
            chain.append(key)
            if key == start:
                return chain

    # open chains start at degree-1 keys (domain or grid edges); the rest are loops
    starts = sorted(k for k, ss in adj.items() if len(ss) == 1)
    for k in starts + sorted(adj):
        if any(not used[s] for s in adj[k]):
            chain = walk(k)
            closed = len(chain) > 2 and chain[0] == chain[-1]
            pts = np.array([points[c] for c in chain])
            lines.append(Polyline(float(level), pts, closed))
    return lines


def write_field_csv(field: FieldGrid, path) -> None:
    f = lambda v: format(float(v), ".17g")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value", "in_domain"])
        for i in range(field.nx):
            for j in range(field.ny):
                w.writerow([f(field.x[i]), f(field.y[j]), f(field.values[i, j]), int(field.in_domain[i, j])])


def write_polylines_csv(lines: list[Polyline], path) -> None:
    f = lambda v: format(float(v), ".17g")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "segment_id", "x", "y"])
        for sid, line in enumerate(lines):
            for px, py in line.points:
                w.writerow([f(line.level), sid, f(px), f(py)])
