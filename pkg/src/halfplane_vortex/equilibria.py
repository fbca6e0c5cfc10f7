"""Relative equilibria: two-vortex checks and symmetric three-vortex families.

Three-vortex families (G1 = G2 = 1 in layer 1, G3 = -alpha in layer 2)::

    horizontal  (+-x, y), (0, y3),  y3 = (2y - beta)/alpha      unknowns (x, y)
    vertical    (0, Y), (0, y), (0, y3),  y3 = (Y + y - beta)/alpha   unknowns (Y, y)

A relative equilibrium translates rigidly along the wall. Residuals are
differences of model velocities: (ydot1, xdot1 - xdot3) for the horizontal
family, (xdot1 - xdot3, xdot2 - xdot3) for the vertical one. The remaining
conditions hold identically by symmetry.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .model import SystemState, batch_velocities, make_state, velocities
from .special import _k1_u

LAYERS3 = np.array([1, 1, 2], dtype=np.int64)

NEWTON_TOL = 1e-10
DEDUP_TOL = 1e-3
MAX_COORD = 60.0   # roots are sought inside (0, MAX_COORD]; residuals decay to 0 at infinity
FD_REL_STEP = 1e-6
MAX_HALVINGS = 20
MAX_ITER = 100


class FamilyKind(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class EquilibriumFamily:
    kind: FamilyKind
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)) or self.alpha == 0:
            raise DomainError("alpha must be finite and nonzero, beta finite")

    @property
    def gammas(self) -> np.ndarray:
        return np.array([1.0, 1.0, -self.alpha])

    def y3(self, c1, c2):
        if self.kind is FamilyKind.HORIZONTAL:
            return (2.0 * np.asarray(c2) - self.beta) / self.alpha
        return (np.asarray(c1) + np.asarray(c2) - self.beta) / self.alpha

    def positions(self, c1, c2):
        """(X, Y) arrays of shape (m, 3) for coordinate arrays c1, c2."""
        c1 = np.atleast_1d(np.asarray(c1, dtype=float))
        c2 = np.atleast_1d(np.asarray(c2, dtype=float))
        y3 = self.y3(c1, c2)
        zero = np.zeros_like(c1)
        if self.kind is FamilyKind.HORIZONTAL:
            X = np.stack([c1, -c1, zero], axis=1)
            Y = np.stack([c2, c2, y3], axis=1)
        else:
            X = np.stack([zero, zero, zero], axis=1)
            Y = np.stack([c1, c2, y3], axis=1)
        return X, Y

    def valid(self, c1, c2):
        c1 = np.asarray(c1, dtype=float)
        c2 = np.asarray(c2, dtype=float)
        ok = (c1 > 0) & (c2 > 0) & (self.y3(c1, c2) > 0)
        if self.kind is FamilyKind.VERTICAL:
            ok &= c1 != c2
        return ok & np.isfinite(c1) & np.isfinite(c2)

    def state(self, c1: float, c2: float) -> SystemState:
        X, Y = self.positions(c1, c2)
        return make_state([(l, g, x, y) for l, g, x, y in zip(LAYERS3, self.gammas, X[0], Y[0])])


@dataclass(frozen=True)
class EquilibriumSolution:
    family: EquilibriumFamily
    coords: tuple[float, float]
    residual_norm: float
    derived_y3: float
    iterations: int = 0

    @property
    def state(self) -> SystemState:
        return self.family.state(*self.coords)


def _residual_batch(family: EquilibriumFamily, c1, c2):
    """Residual pairs for coordinate arrays; invalid points give NaN."""
    c1 = np.atleast_1d(np.asarray(c1, dtype=float))
    c2 = np.atleast_1d(np.asarray(c2, dtype=float))
    ok = family.valid(c1, c2)
    r = np.full((c1.size, 2), np.nan)
    if ok.any():
        X, Y = family.positions(c1[ok], c2[ok])
        U, V = batch_velocities(family.gammas, LAYERS3, X, Y)
        if family.kind is FamilyKind.HORIZONTAL:
            r[ok, 0] = V[:, 0]
            r[ok, 1] = U[:, 0] - U[:, 2]
        else:
            r[ok, 0] = U[:, 0] - U[:, 2]
            r[ok, 1] = U[:, 1] - U[:, 2]
    return r


def _checked_residual(family, c1, c2):
    if not family.valid(c1, c2):
        raise DomainError(f"({c1!r}, {c2!r}) outside the {family.kind.value} family domain")
    r = _residual_batch(family, c1, c2)[0]
    return float(r[0]), float(r[1])


def residual_horizontal(x: float, y: float, family: EquilibriumFamily) -> tuple[float, float]:
    """(ydot1, xdot1 - xdot3) for the horizontal configuration."""
    if family.kind is not FamilyKind.HORIZONTAL:
        raise DomainError("residual_horizontal needs a horizontal family")
    return _checked_residual(family, x, y)


def residual_vertical(Y: float, y: float, family: EquilibriumFamily) -> tuple[float, float]:
    """(xdot1 - xdot3, xdot2 - xdot3) for the vertical configuration."""
    if family.kind is not FamilyKind.VERTICAL:
        raise DomainError("residual_vertical needs a vertical family")
    return _checked_residual(family, Y, y)


def residual(family: EquilibriumFamily, c1: float, c2: float) -> tuple[float, float]:
    return _checked_residual(family, c1, c2)


def residual_norm(family: EquilibriumFamily, c1: float, c2: float) -> float:
    return float(math.hypot(*residual(family, c1, c2)))


def _in_box(family, c1, c2):
    return family.valid(c1, c2) & (c1 <= MAX_COORD) & (c2 <= MAX_COORD) & (family.y3(c1, c2) <= MAX_COORD)


def newton_batch(family: EquilibriumFamily, c1, c2, tol: float = NEWTON_TOL, max_iter: int = MAX_ITER):
    """Damped Newton from many starts at once.

    Returns (c1, c2, residual_norm, converged, iterations). The Jacobian is
    a central difference with relative step 1e-6; a step is halved up to 20
    times until the residual norm decreases inside the search box.
    """
    c = np.stack([np.asarray(c1, dtype=float).ravel(), np.asarray(c2, dtype=float).ravel()], axis=1).copy()
    m = c.shape[0]
    F = _residual_batch(family, c[:, 0], c[:, 1])
    norm = np.hypot(F[:, 0], F[:, 1])
    active = np.isfinite(norm) & _in_box(family, c[:, 0], c[:, 1])
    norm[~active] = np.inf
    conv = active & (norm <= tol)
    iters = np.zeros(m, dtype=int)
    for _ in range(max_iter):
        work = active & ~conv
        if not work.any():
            break
        idx = np.nonzero(work)[0]
        cw = c[idx]
        J = np.empty((idx.size, 2, 2))
        for k in range(2):
            h = FD_REL_STEP * np.maximum(np.abs(cw[:, k]), 1e-3)
            cp = cw.copy()
            cm = cw.copy()
            cp[:, k] += h
            cm[:, k] -= h
            Fp = _residual_batch(family, cp[:, 0], cp[:, 1])
            Fm = _residual_batch(family, cm[:, 0], cm[:, 1])
            J[:, :, k] = (Fp - Fm) / (2.0 * h)[:, None]
        Fw = F[idx]
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            d0 = -(J[:, 1, 1] * Fw[:, 0] - J[:, 0, 1] * Fw[:, 1]) / det
            d1 = -(-J[:, 1, 0] * Fw[:, 0] + J[:, 0, 0] * Fw[:, 1]) / det
        step = np.stack([d0, d1], axis=1)
        good = np.all(np.isfinite(step), axis=1)
        lam = np.ones(idx.size)
        accepted = np.zeros(idx.size, dtype=bool)
        newc = cw.copy()
        newF = Fw.copy()
        newn = norm[idx].copy()
        pending = good.copy()
        for _h in range(MAX_HALVINGS + 1):
            if not pending.any():
                break
            p = np.nonzero(pending)[0]
            trial = cw[p] + lam[p, None] * step[p]
            inbox = _in_box(family, trial[:, 0], trial[:, 1])
            Ft = np.full((p.size, 2), np.nan)
            if inbox.any():
                Ft[inbox] = _residual_batch(family, trial[inbox, 0], trial[inbox, 1])
            nt = np.hypot(Ft[:, 0], Ft[:, 1])
            ok = inbox & np.isfinite(nt) & (nt < norm[idx][p])
            acc = p[ok]
            newc[acc] = trial[ok]
            newF[acc] = Ft[ok]
            newn[acc] = nt[ok]
            accepted[acc] = True
            pending[acc] = False
            lam[p[~ok]] *= 0.5
        c[idx] = newc
        F[idx] = newF
        norm[idx] = newn
        iters[idx] += 1
        stalled = idx[~accepted]
        active[stalled] = False
        conv |= active & (norm <= tol)
    return c[:, 0], c[:, 1], norm, conv, iters


@dataclass(frozen=True)
class MultistartSpec:
    grid_n: int = 16
    grid_lo: float = 0.01
    grid_hi: float = 30.0
    random_starts: int = 200
    seed: int = 42
    extra_starts: tuple = field(default_factory=tuple)

    def starts(self) -> np.ndarray:
        g = np.geomspace(self.grid_lo, self.grid_hi, self.grid_n)
        G1, G2 = np.meshgrid(g, g, indexing="ij")
        pts = [np.stack([G1.ravel(), G2.ravel()], axis=1)]
        if self.random_starts:
            rng = np.random.default_rng(self.seed)
            pts.append(rng.uniform(self.grid_lo, self.grid_hi, size=(self.random_starts, 2)))
        if self.extra_starts:
            pts.append(np.asarray(self.extra_starts, dtype=float).reshape(-1, 2))
        return np.concatenate(pts)


def solve_family(family: EquilibriumFamily, search: MultistartSpec | None = None) -> list[EquilibriumSolution]:
    """All distinct converged roots reachable from the multistart set, sorted by coordinates."""
    search = search or MultistartSpec()
    s = search.starts()
    c1, c2, norm, conv, iters = newton_batch(family, s[:, 0], s[:, 1])
    found: list[EquilibriumSolution] = []
    for k in np.nonzero(conv)[0]:
        p = np.array([c1[k], c2[k]])
        if any(np.hypot(*(p - np.array(f.coords))) < DEDUP_TOL for f in found):
            continue
        found.append(EquilibriumSolution(family, (float(c1[k]), float(c2[k])), float(norm[k]),
                                         float(family.y3(c1[k], c2[k])), int(iters[k])))
    found.sort(key=lambda f: f.coords)
    return found


def refine(family: EquilibriumFamily, c1: float, c2: float) -> EquilibriumSolution | None:
    """Newton from a single point; None when it does not converge."""
    a, b, n, conv, it = newton_batch(family, [c1], [c2])
    if not conv[0]:
        return None
    return EquilibriumSolution(family, (float(a[0]), float(b[0])), float(n[0]), float(family.y3(a[0], b[0])), int(it[0]))


# --- two-vortex results -----------------------------------------------------------------


def opposite_pair_gap(y1, y2, dx):
    """Closed form of xdot1 - xdot2 for G1 = -G2 = 1 (layers 1, 2), dx = x1 - x2.

    Returns (gap, geometric_part) with geometric_part = 1/(2y1) + 1/(2y2) - 2(y1+y2)/r*^2.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    rs = np.hypot(dx, y1 + y2)
    geo = 0.5 / y1 + 0.5 / y2 - 2.0 * (y1 + y2) / rs**2
    gap = _k1_u(2.0 * y1) + _k1_u(2.0 * y2) + 2.0 * (y1 + y2) * _k1_u(rs) / rs + geo
    return gap, geo


@dataclass(frozen=True)
class OppositeCertificate:
    samples: int
    min_gap: float
    argmin: tuple[float, float, float]
    min_geometric: float
    model_mismatch: float   # max |closed form - model| on a subsample

    @property
    def positive(self) -> bool:
        return self.min_gap > 0

    @property
    def geometric_nonnegative(self) -> bool:
        # the geometric part vanishes exactly at y1 = y2, x1 = x2
        return self.min_geometric >= -1e-14


def verify_no_equilibrium_opposite(y_max: float = 10.0, samples: int = 100_000, seed: int = 0,
                                   grid_n: int = 20, model_checks: int = 2000) -> OppositeCertificate:
    """Sample xdot1 - xdot2 > 0 over (y1, y2, x1 - x2) in (0, y_max]^2 x [0, y_max].

    A positive minimum rules out relative equilibria of the opposite pair.
    """
    if y_max <= 0 or samples < 1:
        raise DomainError("need y_max > 0 and samples >= 1")
    rng = np.random.default_rng(seed)
    lo = 1e-6 * y_max
    g = np.linspace(lo, y_max, grid_n)
    gd = np.linspace(0.0, y_max, grid_n)
    G1, G2, GD = (a.ravel() for a in np.meshgrid(g, g, gd, indexing="ij"))
    y1 = np.concatenate([G1, rng.uniform(lo, y_max, samples)])
    y2 = np.concatenate([G2, rng.uniform(lo, y_max, samples)])
    dx = np.concatenate([GD, rng.uniform(0.0, y_max, samples)])
    gap, geo = opposite_pair_gap(y1, y2, dx)
    k = int(np.argmin(gap))
    sub = rng.choice(y1.size, size=min(model_checks, y1.size), replace=False)
    X = np.stack([dx[sub], np.zeros(sub.size)], axis=1)
    Y = np.stack([y1[sub], y2[sub]], axis=1)
    U, _ = batch_velocities([1.0, -1.0], [1, 2], X, Y)
    mismatch = float(np.max(np.abs((U[:, 0] - U[:, 1]) - gap[sub])))
    return OppositeCertificate(int(y1.size), float(gap[k]), (float(y1[k]), float(y2[k]), float(dx[k])),
                               float(geo.min()), mismatch)


@dataclass(frozen=True)
class StackedReport:
    alpha: float
    xdot: tuple[float, float]
    ydot: tuple[float, float]
    speed: float

    @property
    def is_relative_equilibrium(self) -> bool:
        return max(abs(self.ydot[0]), abs(self.ydot[1]), abs(self.xdot[0] - self.xdot[1])) <= 1e-12


def stacked_equilibrium_check(alpha: float) -> StackedReport:
    """Equal vortices stacked at (0, alpha/2) in layers 1 and 2."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    s = make_state([(1, 1.0, 0.0, alpha / 2), (2, 1.0, 0.0, alpha / 2)])
    u, v = velocities(s)
    return StackedReport(alpha, (float(u[0]), float(u[1])), (float(v[0]), float(v[1])), float(0.5 * (u[0] + u[1])))


def write_solutions_csv(solutions: list[EquilibriumSolution], path) -> None:
    f = lambda v: format(float(v), ".17g")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "alpha", "beta", "c1", "c2", "y3", "residual"])
        for s in solutions:
            fam = s.family
            w.writerow([fam.kind.value, f(fam.alpha), f(fam.beta), f(s.coords[0]), f(s.coords[1]),
                        f(s.derived_y3), f(s.residual_norm)])
