import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import (
    dense_concurrence,
    dense_conditional_entropy,
    dense_entropy,
    grid_discord,
    ptrace_b,
    random_xstate,
)
from collective_discord.exceptions import ValidationError
from collective_discord.xstate import (
    MeasurementAngles,
    XState,
    concurrence_wootters,
    conditional_entropy,
    entropy_joint,
    entropy_subsystem,
    quantum_discord,
)

LN2 = math.log(2)
PRODUCT = XState(1, 0, 0, 0, 0)
BELL = XState(0.5, 0.5, 0, 0, 0.5)
MIXED = XState(0.25, 0.25, 0.25, 0, 0)


def dicke_thermo(b):
    return XState(b * b, (1 - b) ** 2, b * (1 - b), b * (1 - b), b * (1 - b))


@st.composite
def xstates(draw, complex_u=False):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_xstate(np.random.default_rng(seed), complex_u=complex_u)


def test_validation_rejects_bad_states():
    with pytest.raises(ValidationError):
        XState(0.6, 0.6, 0, 0, 0)
    with pytest.raises(ValidationError):
        XState(0.5, 0.3, 0.1, 0.2, 0)  # |y| > w
    with pytest.raises(ValidationError):
        XState(0.5, 0.5, 0, 0, 0.6)  # |u|^2 > v+ v-
    with pytest.raises(ValidationError):
        MeasurementAngles(-0.1, 0.0)
    with pytest.raises(ValidationError):
        MeasurementAngles(0.0, 2.0)


def test_validation_slack_is_configurable():
    XState(0.5 + 5e-13, 0.5, 0, 0, 0)
    with pytest.raises(ValidationError):
        XState(0.5 + 5e-11, 0.5, 0, 0, 0)
    XState(0.5 + 5e-11, 0.5, 0, 0, 0, tol=1e-10)


def test_entropy_subsystem_examples():
    assert entropy_subsystem(PRODUCT) == 0.0
    assert entropy_subsystem(BELL) == pytest.approx(LN2, abs=1e-15)
    assert entropy_subsystem(dicke_thermo(0.5)) == pytest.approx(LN2, abs=1e-15)


def test_entropy_joint_examples():
    assert entropy_joint(MIXED) == pytest.approx(math.log(4), abs=1e-14)
    assert entropy_joint(BELL) == pytest.approx(0.0, abs=1e-15)


def test_entropy_joint_matches_dense_eigensolver():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        rho = random_xstate(rng, complex_u=True)
        assert entropy_joint(rho) == pytest.approx(dense_entropy(rho.matrix()), abs=1e-12)
        assert entropy_subsystem(rho) == pytest.approx(dense_entropy(ptrace_b(rho.matrix())), abs=1e-12)


def test_conditional_entropy_examples():
    for t, p in [(0, 0), (0.3, 1.2), (math.pi / 4, 0.0)]:
        assert conditional_entropy(PRODUCT, MeasurementAngles(t, p)) == 0.0
    assert conditional_entropy(BELL, MeasurementAngles(math.pi / 4, 0)) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("b", [0.05, 0.2, 0.3, 0.45, 0.5])
def test_conditional_entropy_closed_form_at_quarter_pi(b):
    m = math.sqrt((2 * b - 1) ** 2 + 16 * b**2 * (1 - b) ** 2)
    tail = (1 + m) * math.log(1 + m) + ((1 - m) * math.log(1 - m) if m < 1 else 0.0)
    expected = LN2 - 0.5 * tail
    got = conditional_entropy(dicke_thermo(b), MeasurementAngles(math.pi / 4, 0))
    assert got == pytest.approx(expected, abs=1e-13)


def test_conditional_entropy_matches_dense_measurement():
    rng = np.random.default_rng(2)
    for _ in range(200):
        rho = random_xstate(rng, complex_u=True)
        t, p = rng.uniform(0, math.pi / 2, 2)
        expected = dense_conditional_entropy(rho.matrix(), t, p)
        assert conditional_entropy(rho, MeasurementAngles(t, p)) == pytest.approx(expected, abs=1e-11)


@given(xstates(complex_u=True), st.floats(0, math.pi / 2), st.floats(0, math.pi / 2))
@settings(max_examples=200, deadline=None)
def test_conditional_entropy_mirror_symmetry(rho, theta, phi):
    # theta -> pi/2 - theta only relabels the two measurement outcomes
    a = conditional_entropy(rho, MeasurementAngles(theta, phi))
    b = conditional_entropy(rho, MeasurementAngles(math.pi / 2 - theta, phi))
    assert a == pytest.approx(b, abs=1e-12)


def test_quantum_discord_examples():
    r = quantum_discord(PRODUCT)
    assert (r.discord, r.classical, r.mutual_info) == pytest.approx((0, 0, 0), abs=1e-14)
    r = quantum_discord(BELL)
    assert r.discord == pytest.approx(LN2, abs=1e-12)
    assert r.classical == pytest.approx(LN2, abs=1e-12)
    assert r.mutual_info == pytest.approx(2 * LN2, abs=1e-12)
    r = quantum_discord(dicke_thermo(0.5))
    assert r.discord == pytest.approx(0, abs=1e-12)
    assert r.classical == pytest.approx(LN2, abs=1e-12)


def test_quantum_discord_against_exhaustive_grid():
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = random_xstate(rng)
        r = quantum_discord(rho)
        oracle = grid_discord(rho, n=513)
        # the grid can only overestimate the minimum
        assert r.discord <= oracle + 1e-12
        assert r.discord == pytest.approx(oracle, abs=1e-6)


def test_quantum_discord_complex_u_uses_full_phase_range():
    rng = np.random.default_rng(4)
    for _ in range(30):
        rho = random_xstate(rng, complex_u=True)
        oracle = grid_discord(rho, n=1025, phi_max=math.pi)
        got = quantum_discord(rho).discord
        assert got <= oracle + 1e-12
        assert got == pytest.approx(oracle, abs=1e-6)


def test_u_conventions_agree():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = random_xstate(rng, complex_u=True)
        assert quantum_discord(rho).discord == pytest.approx(quantum_discord(rho.conjugated()).discord, abs=1e-10)


def test_discord_measuring_either_qubit_agrees():
    rng = np.random.default_rng(6)
    for _ in range(20):
        rho = random_xstate(rng)
        m = rho.matrix()
        t = np.linspace(0, math.pi / 2, 41)
        cond_a = min(dense_conditional_entropy(m, a, b, measure="A") for a in t for b in (0, math.pi / 2))
        cond_b = min(dense_conditional_entropy(m, a, b, measure="B") for a in t for b in (0, math.pi / 2))
        assert cond_a == pytest.approx(cond_b, abs=1e-12)


@given(xstates())
@settings(max_examples=150, deadline=None)
def test_discord_properties(rho):
    r = quantum_discord(rho)
    assert r.discord >= -1e-10 and r.classical >= -1e-10 and r.mutual_info >= -1e-10
    assert r.discord + r.classical == pytest.approx(r.mutual_info, abs=1e-12)
    assert r.discord <= entropy_subsystem(rho) + 1e-9


@given(xstates())
@settings(max_examples=100, deadline=None)
def test_real_states_minimize_at_phi_edge(rho):
    # with real u and y the phase only enters through cos(2 phi)
    t = np.linspace(0, math.pi / 2, 33)
    p = np.linspace(0, math.pi / 2, 33)
    vals = np.array([[conditional_entropy(rho, MeasurementAngles(a, b)) for b in p] for a in t])
    best_edge = min(vals[:, 0].min(), vals[:, -1].min())
    assert best_edge <= vals.min() + 1e-15
    if rho.y * rho.u.real >= 0:
        assert vals[:, 0].min() <= vals.min() + 1e-15


def test_concurrence_examples():
    assert concurrence_wootters(BELL) == pytest.approx(1.0)
    assert concurrence_wootters(MIXED) == 0.0


def test_concurrence_matches_spin_flip_formula():
    rng = np.random.default_rng(7)
    for _ in range(200):
        rho = random_xstate(rng, complex_u=True)
        assert concurrence_wootters(rho) == pytest.approx(dense_concurrence(rho.matrix()), abs=1e-10)
