import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfplane_vortex import special
from halfplane_vortex.errors import DomainError
from halfplane_vortex.model import hamiltonian, make_state
from halfplane_vortex.phase import (
    PhaseCase,
    extract_level_curves,
    grid_evaluate,
    make_field_grid,
    phase_hamiltonian,
    project_state,
    reconstruct_state,
    write_field_csv,
    write_polylines_csv,
)

SAME1 = PhaseCase("two_layer_same", 1.0)


def test_case_validation():
    with pytest.raises(DomainError):
        PhaseCase("two_layer_same", 0.0)
    with pytest.raises(ValueError):
        PhaseCase("three_layer", 1.0)
    assert PhaseCase("one_layer_case2", 7.0).alpha == 1.0


def test_swap_symmetry():
    rng = np.random.default_rng(0)
    x = rng.uniform(-3, 3, 500)
    y = rng.uniform(0.01, 0.99, 500)
    assert np.max(np.abs(phase_hamiltonian(SAME1, x, y) - phase_hamiltonian(SAME1, x, 1 - y))) <= 1e-13


def test_far_field_limit():
    case = PhaseCase("two_layer_opposite", 0.0)
    for y in (0.3, 1.0, 2.5):
        far = 2 * special.k0(2 * y) - math.log(4 * y * y)
        assert phase_hamiltonian(case, 1e6, y) == pytest.approx(far, abs=1e-10)


def test_reference_point_matches_full_hamiltonian():
    s = make_state([(1, 1, 0, 0.4), (2, 1, 0.3, 0.6)])
    assert phase_hamiltonian(SAME1, 0.3, 0.4) == pytest.approx(hamiltonian(s), abs=1e-12)


@pytest.mark.parametrize("kind,alpha", [("two_layer_same", 0.7), ("two_layer_same", 3.0),
                                        ("two_layer_opposite", 0.0), ("two_layer_opposite", 1.5),
                                        ("two_layer_opposite", -0.8)])
def test_cross_module_consistency(kind, alpha):
    case = PhaseCase(kind, alpha)
    rng = np.random.default_rng(11)
    lo = max(0.0, alpha) if kind == "two_layer_opposite" else 0.0
    hi = lo + 4 if kind == "two_layer_opposite" else alpha
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-4, 4)
        y = rng.uniform(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo))
        s = reconstruct_state(case, x, y, x1=rng.uniform(-5, 5))
        worst = max(worst, abs(phase_hamiltonian(case, x, y) - hamiltonian(s)))
    assert worst <= 1e-12


def test_stacked_state_finite():
    assert math.isfinite(phase_hamiltonian(SAME1, 0.0, 0.5))


def test_domain_errors():
    with pytest.raises(DomainError):
        phase_hamiltonian(SAME1, 0.3, 1.2)
    with pytest.raises(DomainError):
        phase_hamiltonian(PhaseCase("two_layer_opposite", 1.0), 0.3, 0.9)
    with pytest.raises(DomainError):
        phase_hamiltonian(PhaseCase("one_layer_case1"), 0.0, 1.0)
    with pytest.raises(DomainError):
        reconstruct_state(PhaseCase("one_layer_case2"), 0.1, 2.0)


def test_project_round_trip():
    case = PhaseCase("two_layer_opposite", 0.5)
    assert project_state(case, reconstruct_state(case, -0.7, 1.2, x1=3.0)) == pytest.approx((0.7, 1.2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.1, 10))
def test_one_layer_case1_scaling(x, y, lam):
    case = PhaseCase("one_layer_case1")
    h = phase_hamiltonian(case, x, y)
    assert phase_hamiltonian(case, lam * x, lam * y) == pytest.approx(h - 2 * math.log(lam), abs=1e-12)


def test_one_layer_forms():
    assert phase_hamiltonian(PhaseCase("one_layer_case1"), 1.0, 1.0) == pytest.approx(2 * math.log(math.sqrt(5) / 2))
    c3 = PhaseCase("one_layer_case3")
    assert phase_hamiltonian(c3, 0.4, 0.3) == pytest.approx(phase_hamiltonian(c3, 0.4, 0.7), abs=1e-14)
    assert math.isfinite(phase_hamiltonian(PhaseCase("one_layer_case2"), 0.0, 1.5))


def test_stacked_neighbourhood_becomes_elliptical():
    # the level through (0, 1/2 + d) meets y = 1/2 at x = ratio * d; x^2 + (2y - 1)^2 = c^2 means ratio -> 2
    ratios = []
    for d in (1e-2, 1e-4, 1e-6, 1e-8):
        target = phase_hamiltonian(SAME1, 0.0, 0.5 + d)
        lo, hi = 0.0, 10 * d
        for _ in range(200):
            m = 0.5 * (lo + hi)
            if (phase_hamiltonian(SAME1, m, 0.5) > target) == (phase_hamiltonian(SAME1, lo, 0.5) > target):
                lo = m
            else:
                hi = m
        ratios.append(lo / d)
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 2.0) < 0.15


def test_grid_symmetric_rows():
    g = grid_evaluate(SAME1, (0, 3), (0, 1), 100, 100)
    inner = g.in_domain[:, 1:-1]
    assert inner.all() and not g.in_domain[:, 0].any() and not g.in_domain[:, -1].any()
    v = g.values[:, 1:-1]
    assert np.max(np.abs(v - v[:, ::-1])) <= 1e-12
    assert np.all(np.isfinite(g.values))


def test_grid_flags_wall_cells():
    g = grid_evaluate(PhaseCase("two_layer_opposite", 0.0), (0, 2), (0, 2), 20, 20)
    assert not g.in_domain[:, 0].any()
    assert g.in_domain[:, 1:].all()
    assert np.all(g.values[~g.in_domain] == 0.0)


def test_empty_grid():
    with pytest.raises(DomainError):
        grid_evaluate(SAME1, (0, 1), (0, 1), 1, 10)
    with pytest.raises(DomainError):
        grid_evaluate(SAME1, (1, 1), (0, 1), 10, 10)


def test_constant_field_has_no_curves():
    g = make_field_grid(np.linspace(0, 1, 5), np.linspace(0, 1, 5), np.full((5, 5), 2.0))
    assert extract_level_curves(g, [1.0, 2.5]) == []


def test_ramp_gives_straight_line():
    x = np.linspace(0, 1, 21)
    y = np.linspace(0, 2, 11)
    g = make_field_grid(x, y, np.add.outer(x, 0 * y))
    lines = extract_level_curves(g, [0.33])
    assert len(lines) == 1 and not lines[0].closed
    pts = lines[0].points
    assert np.max(np.abs(pts[:, 0] - 0.33)) <= 1e-12
    assert pts[:, 1].min() == 0.0 and pts[:, 1].max() == 2.0


def test_closed_orbit_encircles_stacked_point():
    g = grid_evaluate(SAME1, (-1, 1), (0, 1), 201, 201)
    lines = extract_level_curves(g, [phase_hamiltonian(SAME1, 0.3, 0.4)])
    closed = [l for l in lines if l.closed]
    assert len(closed) == 1
    p = closed[0].points
    # winding number of the polyline around the stacked point
    ang = np.unwrap(np.arctan2(p[:, 1] - 0.5, p[:, 0]))
    assert abs(abs(ang[-1] - ang[0]) - 2 * math.pi) < 1e-9
    assert np.min(np.abs(np.hypot(p[:, 0] - 0.3, p[:, 1] - 0.4))) <= max(g.cell)


def test_level_outside_range_is_empty():
    g = grid_evaluate(SAME1, (-1, 1), (0, 1), 21, 21)
    assert extract_level_curves(g, [1e6]) == []


def test_csv_writers(tmp_path):
    g = grid_evaluate(SAME1, (-1, 1), (0, 1), 11, 11)
    write_field_csv(g, tmp_path / "f.csv")
    rows = list(csv.reader(open(tmp_path / "f.csv")))
    assert rows[0] == ["x", "y", "value", "in_domain"] and len(rows) == 122
    lines = extract_level_curves(g, [phase_hamiltonian(SAME1, 0.3, 0.4)])
    write_polylines_csv(lines, tmp_path / "l.csv")
    rows = list(csv.reader(open(tmp_path / "l.csv")))
    assert rows[0] == ["level", "segment_id", "x", "y"]
    assert len(rows) == 1 + sum(len(l.points) for l in lines)
