import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfplane_vortex import special
from halfplane_vortex.acceptance import random_state, velocity_oracle_error
from halfplane_vortex.errors import DomainError, SingularityError
from halfplane_vortex.model import (
    SystemState,
    Vortex,
    dump_state,
    hamiltonian,
    load_state,
    make_state,
    pair_geometry,
    separation_rate_squared,
    state_from_dict,
    state_to_dict,
    stream_gradient,
    streamfunction,
    velocities,
    velocity,
    y_momentum,
)


def test_vortex_validation():
    with pytest.raises(DomainError):
        Vortex(1, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        Vortex(1, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        Vortex(3, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        Vortex(1, float("inf"), 0.0, 1.0)
    assert Vortex(2, -1.5, 0.0, 1.0).strength == -1.5


def test_state_coincidence_rules():
    with pytest.raises(SingularityError):
        make_state([(1, 1, 0, 1), (1, 2, 0, 1)])
    s = make_state([(1, 1, 0, 1), (2, 1, 0, 1)])
    assert len(s) == 2
    with pytest.raises(DomainError):
        SystemState(())


def test_pair_geometry():
    g = pair_geometry((0, 1), (0, 1))
    assert (g.r_direct, g.r_image) == (0.0, 2.0)
    g = pair_geometry((0, 1), (3, 5))
    assert g.r_direct == 5.0 and g.r_image == pytest.approx(math.sqrt(45))
    assert pair_geometry((3, 5), (0, 1)) == g
    with pytest.raises(DomainError):
        pair_geometry((0, 0), (1, 1))


def test_streamfunction_single_vortex():
    s = make_state([(1, 1, 0, 1)])
    want = 0.0 - math.log(math.sqrt(5)) - special.k0(1.0) + special.k0(math.sqrt(5))
    assert streamfunction(1, s, (1.0, 1.0)) == pytest.approx(want, abs=1e-14)
    # the other layer sees the cross kernel
    want2 = 0.0 - math.log(math.sqrt(5)) + special.k0(1.0) - special.k0(math.sqrt(5))
    assert streamfunction(2, s, (1.0, 1.0)) == pytest.approx(want2, abs=1e-14)


def test_streamfunction_vanishes_on_wall():
    rng = np.random.default_rng(5)
    s = random_state(rng, 3)
    x = rng.uniform(-20, 20, 1000)
    for layer in (1, 2):
        assert np.max(np.abs(streamfunction(layer, s, (x, np.zeros_like(x))))) <= 1e-14


def test_streamfunction_cross_layer_limit():
    s = make_state([(2, 1, 0.0, 1.0)])
    direct = special.LN2_MINUS_GAMMA - special.kernel_cross(2.0)
    assert streamfunction(1, s, (0.0, 1.0)) == pytest.approx(direct, abs=1e-15)
    assert special.LN2_MINUS_GAMMA == pytest.approx(0.11593151565841244, abs=1e-15)


def test_streamfunction_errors():
    s = make_state([(1, 1, 0, 1)])
    with pytest.raises(SingularityError):
        streamfunction(1, s, (0.0, 1.0))
    with pytest.raises(DomainError):
        streamfunction(1, s, (0.0, -1.0))
    with pytest.raises(DomainError):
        streamfunction(1, s, (0.0, 1.0), exclude=3)
    assert math.isfinite(streamfunction(1, s, (0.0, 1.0), exclude=0))


def test_single_vortex_velocity():
    u, v = velocity(make_state([(1, 1, 0, 1)]), 0)
    assert v == 0.0
    assert u == pytest.approx(special.k1(2.0) + 0.5, rel=1e-14)
    # the differenced streamfunction fixes the sign
    a, r, ok = velocity_oracle_error(make_state([(1, 1, 0, 1)]))
    assert ok


def test_stacked_pair():
    u, v = velocities(make_state([(1, 1, 0, 1), (2, 1, 0, 1)]))
    assert v[0] == 0.0 and v[1] == 0.0
    assert abs(u[0] - u[1]) <= 1e-12


@pytest.mark.parametrize("x,y,y3", [(0.7, 1.2, 0.4), (2.0, 0.3, 3.0)])
def test_mirror_symmetric_triple(x, y, y3):
    s = make_state([(1, 1, x, y), (1, 1, -x, y), (2, -1.7, 0, y3)])
    u, v = velocities(s)
    assert abs(u[0] - u[1]) <= 1e-12
    assert abs(v[0] + v[1]) <= 1e-12


def test_velocity_oracle_random_states():
    rng = np.random.default_rng(99)
    for k in range(120):
        assert velocity_oracle_error(random_state(rng, 2 + k % 2))[2]


def test_momentum_identity():
    rng = np.random.default_rng(7)
    for k in range(150):
        s = random_state(rng, 2 + k % 3)
        _, v = velocities(s)
        assert abs(np.dot(s.gammas, v)) <= 1e-12


def test_translation_equivariance():
    rng = np.random.default_rng(3)
    s = random_state(rng, 3)
    u0, v0 = velocities(s)
    u1, v1 = velocities(s.shifted(3.25))
    assert np.allclose(u0, u1, rtol=0, atol=1e-13) and np.allclose(v0, v1, rtol=0, atol=1e-13)
    assert hamiltonian(s.shifted(-7.5)) == pytest.approx(hamiltonian(s), abs=1e-13)


def test_stream_gradient_matches_velocity():
    s = make_state([(1, 1.3, 0.2, 0.8), (2, -0.6, 1.0, 1.5)])
    gx, gy = stream_gradient(1, s, (0.2, 0.8), exclude=0)
    u, v = velocity(s, 0)
    assert u == pytest.approx(-gy, rel=1e-14) and v == pytest.approx(gx, rel=1e-14)


def test_hamiltonian_single_and_pair():
    s = make_state([(1, 1.5, 0.3, 0.7)])
    assert hamiltonian(s) == pytest.approx(1.5**2 * (special.k0(1.4) - math.log(1.4)), rel=1e-14)
    s = make_state([(1, 1, 0, 1), (2, 1, 1, 1)])
    k0 = special.k0
    want = (k0(2) - math.log(2)) * 2 + 2 * (0 - math.log(math.sqrt(5)) + k0(1) - k0(math.sqrt(5)))
    assert hamiltonian(s) == pytest.approx(want, abs=1e-14)


def test_hamiltonian_stacked_and_singular():
    s = make_state([(1, 1, 0, 1), (2, -1, 0, 1)])
    want = 2 * (special.k0(2) - math.log(2)) - 2 * (special.LN2_MINUS_GAMMA - special.kernel_cross(2.0))
    assert hamiltonian(s) == pytest.approx(want, abs=1e-14)


def test_y_momentum():
    assert y_momentum(make_state([(1, 1, 0, 2), (2, -1, 5, 2)])) == 0.0
    assert y_momentum(make_state([(1, 1, 0, 0.3), (2, 1, 5, 0.7)])) == pytest.approx(1.0)


def test_hamiltonian_gradient_structure():
    # G_i xdot_i = -(1/2) dH/dy_i in this normalization
    s = make_state([(1, 1.2, 0.1, 0.9), (2, -0.7, 0.8, 1.4), (1, 0.5, -1.0, 0.6)])
    u, v = velocities(s)
    h = 1e-6
    for i in range(3):
        ys = s.ys.copy()
        ys[i] += h
        hp = hamiltonian(s.with_positions(s.xs, ys))
        ys[i] -= 2 * h
        hm = hamiltonian(s.with_positions(s.xs, ys))
        assert s.gammas[i] * u[i] == pytest.approx(-0.5 * (hp - hm) / (2 * h), rel=1e-6)


def test_separation_rate_squared():
    assert separation_rate_squared(make_state([(1, 1, 0, 1), (2, 1, 0, 1)])) == 0.0
    s = make_state([(1, 1, 0.7, 1.0), (2, -1, 0.0, 1.0)])
    assert separation_rate_squared(s) > 0
    with pytest.raises(DomainError):
        separation_rate_squared(make_state([(1, 1, 0, 1)]))


def test_json_round_trip(tmp_path):
    s = make_state([(1, 1.25, -0.5, 0.75), (2, -2.0, 1e-3, 3.0)], time=1.5)
    assert state_from_dict(json.loads(json.dumps(state_to_dict(s)))) == s
    p = tmp_path / "s.json"
    dump_state(s, p)
    assert load_state(p) == s
    with pytest.raises(DomainError):
        state_from_dict({"vortices": [{"layer": 1}]})


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-3, 3), st.floats(0.05, 3), st.floats(-3, 3), st.floats(0.05, 3),
    st.sampled_from([1, 2]), st.floats(0.2, 2.0), st.sampled_from([-1.0, 1.0]),
)
def test_two_vortex_oracle_property(x1, y1, x2, y2, layer2, g2, sign):
    if layer2 == 1 and math.hypot(x1 - x2, y1 - y2) < 0.05:
        return
    s = make_state([(1, 1.0, x1, y1), (layer2, sign * g2, x2, y2)])
    assert velocity_oracle_error(s)[2]
    _, v = velocities(s)
    assert abs(np.dot(s.gammas, v)) <= 1e-12
