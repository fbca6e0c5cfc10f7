"""Acceptance criteria shared by ``halfplane-vortex selftest`` and the test suite.

Each ``criterion_N`` returns a :class:`CriterionResult`; none of them raise on
failure so the whole suite always reports.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import equilibria as eq
from .integrator import IntegratorConfig, collapse_diagnostic, integrate
from .model import make_state, streamfunction, velocities
from .phase import PhaseCase, extract_level_curves, grid_evaluate, phase_hamiltonian, reconstruct_state
from .special import k0, k1
from .streamlines import StagnationClass, StreamConfig, find_stagnation_points


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(number, name, limit=None):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if limit is not None and dt >= limit:
                ok = False
                detail += f"; runtime {dt:.2f}s exceeds {limit:g}s"
            return CriterionResult(number, name, bool(ok), detail, dt)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def _data_rows(name):
    with resources.files("halfplane_vortex").joinpath("data", name).open() as fh:
        return list(csv.DictReader(fh))


def bessel_reference():
    rows = _data_rows("bessel_reference.csv")
    return (np.array([float(r[c]) for r in rows]) for c in ("x", "k0", "k1"))


def table_rows():
    return _data_rows("equilibrium_tables.csv")


def random_state(rng, n):
    """Random n-vortex state with same-layer pairs at least 0.1 apart."""
    while True:
        entries = [
            (int(rng.integers(1, 3)), float(rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)),
                float(rng.uniform(-3, 3)), float(rng.uniform(0.1, 3.0)))
            for _ in range(n)
        ]
        ok = all(
            a[0] != b[0] or math.hypot(a[2] - b[2], a[3] - b[3]) > 0.1
            for i, a in enumerate(entries) for b in entries[i + 1:]
        )
        if ok:
            return make_state(entries)


@_timed(1, "Bessel accuracy vs reference table", limit=1.0)
def criterion_1():
    x, r0, r1 = bessel_reference()
    e0 = np.max(np.abs(k0(x) / r0 - 1))
    e1 = np.max(np.abs(k1(x) / r1 - 1))
    return max(e0, e1) <= 1e-10 and x.size == 200, f"{x.size} points, max rel err K0 {e0:.2e}, K1 {e1:.2e} (tol 1e-10)"


def velocity_oracle_error(state, h=1e-6):
    """Worst per-component mismatch between velocities and differenced psi.

    Returns (max_abs, max_rel, passed) where a component passes when it is
    within 1e-9 absolute or 1e-6 relative.
    """
    u, v = velocities(state)
    worst_abs = worst_rel = 0.0
    passed = True
    for i, vt in enumerate(state.vortices):
        f = lambda a, b: streamfunction(vt.layer, state, (a, b), exclude=i)
        px = (f(vt.x + h, vt.y) - f(vt.x - h, vt.y)) / (2 * h)
        py = (f(vt.x, vt.y + h) - f(vt.x, vt.y - h)) / (2 * h)
        for got, want in ((u[i], -py), (v[i], px)):
            ea = abs(got - want)
            er = ea / abs(want) if want != 0 else math.inf
            worst_abs = max(worst_abs, ea)
            if ea > 1e-9:
                worst_rel = max(worst_rel, er)
                passed &= er <= 1e-6
    return worst_abs, worst_rel, passed


@_timed(2, "velocity matches differenced streamfunction", limit=5.0)
def criterion_2():
    rng = np.random.default_rng(2024)
    ok = True
    wa = wr = 0.0
    for k in range(100):
        a, r, p = velocity_oracle_error(random_state(rng, 2 + k % 2))
        wa, wr, ok = max(wa, a), max(wr, r), ok and p
    return ok, f"100 states, max abs err {wa:.2e}, max rel err beyond 1e-9 abs {wr:.2e}"


@_timed(3, "RK4 conserves H and momentum near the stacked pair", limit=10.0)
def criterion_3():
    s = make_state([(1, 1.0, 0.02, 0.51), (2, 1.0, 0.0, 0.49)])
    rec = integrate(s, IntegratorConfig.from_horizon(20.0, 1e-3, 10))
    dh, dm = rec.relative_energy_drift(), rec.momentum_drift()
    ok = dh <= 1e-8 and dm <= 1e-12 and not rec.truncated
    return ok, f"|dH|/|H0| = {dh:.2e} (tol 1e-8), |dM| = {dm:.2e} (tol 1e-12)"


@_timed(4, "single vortex translates parallel to the wall")
def criterion_4():
    rec = integrate(make_state([(1, 1.0, 0.0, 1.0)]), IntegratorConfig.from_horizon(10.0, 1e-3))
    drift = float(np.max(np.abs(rec.y[:, 0] - 1.0)))
    return drift <= 1e-14, f"max |y - 1| = {drift:.2e} over T=10 (tol 1e-14)"


def table_check(rows=None):
    """Per tabulated entry: (row, residual_norm, refined solution or None, distance)."""
    out = []
    for r in rows if rows is not None else table_rows():
        fam = eq.EquilibriumFamily(r["family"], float(r["alpha"]), float(r["beta"]))
        c1, c2 = float(r["c1"]), float(r["c2"])
        try:
            res = eq.residual_norm(fam, c1, c2)
        except Exception:
            res = math.nan
        sol = eq.refine(fam, c1, c2) if math.isfinite(res) else None
        dist = math.hypot(sol.coords[0] - c1, sol.coords[1] - c2) if sol else math.inf
        out.append((r, res, sol, dist))
    return out


@_timed(5, "tabulated equilibria reproduce", limit=60.0)
def criterion_5():
    checks = table_check()
    res_ok = sum(1 for _, res, _, _ in checks if res <= 5e-3)
    newton_ok = sum(1 for _, _, sol, d in checks if sol is not None and d <= 5e-3)
    both = sum(1 for _, res, sol, d in checks if res <= 5e-3 and sol is not None and d <= 5e-3)
    n = len(checks)
    med = float(np.nanmedian([res for _, res, _, _ in checks]))
    return both == n, (f"{n} entries: residual<=5e-3 at {res_ok}, Newton within 5e-3 at {newton_ok}, "
                       f"both at {both}; median residual {med:.2e}")


@_timed(6, "bifurcation counts", limit=60.0)
def criterion_6():
    want = {1.888: 1, 1.9: 2, 1.95: 3}
    got = {a: len(eq.solve_family(eq.EquilibriumFamily("horizontal", a, 0.5))) for a in want}
    vert = {b: len(eq.solve_family(eq.EquilibriumFamily("vertical", 0.8, b))) for b in (0.5, 1.0, 2.0)}
    extra = {b: len(eq.solve_family(eq.EquilibriumFamily("vertical", 0.8, b))) for b in (10.0, 15.0)}
    ok = got == want and all(v == 0 for v in vert.values())
    h = ", ".join(f"a={a}: {got[a]} (want {want[a]})" for a in want)
    v = ", ".join(f"b={b}: {n}" for b, n in vert.items())
    x = ", ".join(f"b={b}: {n}" for b, n in extra.items())
    return ok, f"horizontal b=0.5 {h}; vertical a=0.8 {v} (want 0); not asserted {x}"


@_timed(7, "no relative equilibrium for the opposite pair")
def criterion_7():
    c = eq.verify_no_equilibrium_opposite(10.0, 100_000)
    return c.min_gap > 0 and c.samples >= 100_000, (
        f"{c.samples} samples, min xdot1-xdot2 = {c.min_gap:.3e} at {tuple(round(v, 4) for v in c.argmin)}, "
        f"closed form vs model {c.model_mismatch:.1e}")


def _distance_to_polyline(pts, line):
    a = line[:-1]
    b = line[1:]
    ab = b - a
    L2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    d = np.empty(len(pts))
    for k, p in enumerate(pts):
        t = np.clip(np.sum((p - a) * ab, axis=1) / L2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d[k] = np.min(np.hypot(*(p - proj).T))
    return d


def perturbed_orbit_check(alpha, delta=0.01, T=20.0, dt=1e-3, n=101):
    """Integrate the phase point (0, alpha/2 + delta) and compare with its level curve.

    Returns (closed, max_distance, cell).
    """
    case = PhaseCase("two_layer_same", alpha)
    y0 = alpha / 2 + delta
    rec = integrate(reconstruct_state(case, 0.0, y0), IntegratorConfig.from_horizon(T, dt, 10))
    sx = rec.x[:, 1] - rec.x[:, 0]
    sy = rec.y[:, 0]
    wx = 1.5 * np.max(np.abs(sx))
    wy = 1.5 * np.max(np.abs(sy - alpha / 2))
    grid = grid_evaluate(case, (-wx, wx), (alpha / 2 - wy, alpha / 2 + wy), n, n)
    lines = extract_level_curves(grid, [phase_hamiltonian(case, 0.0, y0)])
    closed = [l for l in lines if l.closed]
    if len(closed) != 1:
        return False, math.inf, max(grid.cell)
    d = _distance_to_polyline(np.stack([sx, sy], axis=1), closed[0].points)
    return True, float(d.max()), max(grid.cell)


@_timed(8, "stacked relative equilibrium and nearby closed orbits")
def criterion_8():
    ok = True
    parts = []
    for a in (0.5, 1.0, 2.0, 4.0):
        rep = eq.stacked_equilibrium_check(a)
        closed, dist, cell = perturbed_orbit_check(a)
        good = rep.is_relative_equilibrium and closed and dist <= cell
        ok &= good
        parts.append(f"a={a}: speed {rep.speed:.4f}, orbit {dist:.1e} from level curve (cell {cell:.1e})")
    return ok, "; ".join(parts)


@_timed(9, "streamline stagnation topology", limit=30.0)
def criterion_9():
    def classes(kind, a, b):
        return [p.classification for p in find_stagnation_points(StreamConfig(kind, a, b))]

    checks = {
        "same_sign_horizontal a=5 b=2 has saddle": StagnationClass.SADDLE in classes("same_sign_horizontal", 5, 2),
        "same_sign_horizontal a=0.6 b=2 has none": not [
            c for c in classes("same_sign_horizontal", 0.6, 2) if c is not StagnationClass.BOUNDARY],
        "same_sign_vertical a=0.1 b=2 has saddle": StagnationClass.SADDLE in classes("same_sign_vertical", 0.1, 2),
        "same_sign_vertical a=9 b=10 has none": not [
            c for c in classes("same_sign_vertical", 9, 10) if c is not StagnationClass.BOUNDARY],
        "opposite_horizontal a=0.1 b=2 wall point": StagnationClass.BOUNDARY in classes("opposite_horizontal", 0.1, 2),
        "opposite_horizontal a=10 b=2 wall point": StagnationClass.BOUNDARY in classes("opposite_horizontal", 10, 2),
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, "all 6 topology checks hold" if not bad else "failed: " + "; ".join(bad)


@_timed(10, "opposite pair separation decreases without reaching zero", limit=10.0)
def criterion_10():
    s = make_state([(1, 1.0, 0.5, 1.0), (2, -1.0, -0.5, 1.0)])
    rep = collapse_diagnostic(s, IntegratorConfig.from_horizon(50.0, 1e-3, 10))
    ok = rep.monotone_decreasing and not rep.zero_crossing and rep.r_min > 0
    return ok, (f"r12: {rep.r12[0]:.3f} -> {rep.r12[-1]:.3f}, min {rep.r_min:.3e}, monotone decreasing "
                f"{rep.monotone_decreasing}, zero crossing {rep.zero_crossing}")


@_timed(11, "reduced phase Hamiltonians match the full Hamiltonian")
def criterion_11():
    from .model import hamiltonian

    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(1000):
        if k % 2:
            a = rng.uniform(0.1, 5.0)
            case = PhaseCase("two_layer_same", a)
            y = a * rng.uniform(0.01, 0.99)
        else:
            a = rng.uniform(-3.0, 5.0)
            case = PhaseCase("two_layer_opposite", a)
            y = max(0.0, a) + rng.uniform(0.01, 5.0)
        x = rng.uniform(0.0, 6.0)
        worst = max(worst, abs(phase_hamiltonian(case, x, y) - hamiltonian(reconstruct_state(case, x, y))))
    return worst <= 1e-12, f"1000 states, max |H_phase - H| = {worst:.2e} (tol 1e-12)"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def run_all() -> list[CriterionResult]:
    return [c() for c in CRITERIA]
