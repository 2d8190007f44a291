import math

import numpy as np
import pytest
from scipy.special import eval_genlaguerre

from _oracles import dicke_dense, displacement_dense, spin_ops
from collective_discord.dicke import (
    DickeParams,
    build_hamiltonian,
    displaced_fock_overlap,
    displacement_matrix,
    expectations,
    solve_converged,
    solve_ground_state,
)
from collective_discord.exceptions import ValidationError
from collective_discord.reduction import reduce_pairwise, scaled_concurrence
from collective_discord.thermo import mean_field_dicke, thermo_discord
from collective_discord.xstate import concurrence_wootters

LAMS = (0.1, 0.3, 0.45, 0.6)


def laguerre_overlap(k, kp, beta):
    # <k|D(beta)|k'> for real beta, k >= k'
    lo, hi = min(k, kp), max(k, kp)
    val = math.sqrt(math.factorial(lo) / math.factorial(hi)) * beta ** (hi - lo)
    val *= math.exp(-beta * beta / 2) * eval_genlaguerre(lo, hi - lo, beta * beta)
    return val if k >= kp else val * (-1) ** (hi - lo)


def test_displacement_examples():
    np.testing.assert_array_equal(displacement_matrix(0.0, 6), np.eye(6))
    for b in (0.1, 0.7, 2.0):
        assert displaced_fock_overlap(0, 0, b) == pytest.approx(math.exp(-b * b / 2), rel=1e-15)
    dense = displacement_dense(0.7, levels=80)
    assert displaced_fock_overlap(3, 5, 0.7) == pytest.approx(dense[3, 5], abs=1e-10)
    assert displaced_fock_overlap(3, 5, 0.7) == pytest.approx(laguerre_overlap(3, 5, 0.7), abs=1e-13)


def test_displacement_matrix_against_expm():
    for b in (-0.9, 0.05, 0.4, 1.3):
        m = displacement_matrix(b, 25)
        np.testing.assert_allclose(m, displacement_dense(b, levels=90)[:25, :25], atol=1e-10)
        # inverse displacement is the transpose, and a parity flip of the Fock labels
        k = np.arange(25)
        np.testing.assert_allclose(displacement_matrix(-b, 25), m.T, atol=1e-14)
        np.testing.assert_allclose(displacement_matrix(-b, 25), (-1.0) ** (k[:, None] + k[None, :]) * m, atol=1e-14)


def test_displacement_matrix_rows_stay_normalized():
    # rows of a unitary truncated to low Fock levels lose almost no weight for small shifts
    m = displacement_matrix(0.3, 60)
    np.testing.assert_allclose(np.sum(m[:20] ** 2, axis=1), 1.0, atol=1e-12)


def test_params_validation():
    with pytest.raises(ValidationError):
        DickeParams(0)
    with pytest.raises(ValidationError):
        DickeParams(4, omega=0)
    with pytest.raises(ValidationError):
        DickeParams(4, lam=-0.1)
    with pytest.raises(ValidationError):
        DickeParams(4, n_tr=0)
    assert DickeParams(4, omega=4, delta=1).lambda_c == 1.0


def test_hamiltonian_is_symmetric():
    h = build_hamiltonian(DickeParams(6, 1.0, 1.3, 0.4, n_tr=10))
    assert abs(h - h.T).max() == 0


@pytest.mark.parametrize("n", [2, 5, 10])
def test_zero_coupling_energy(n):
    sol = solve_ground_state(DickeParams(n, 1.0, 1.0, 0.0))
    assert sol.energy == pytest.approx(-n / 2, abs=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_two_atoms_against_dense_fock_oracle(lam):
    e_ref, ref = dicke_dense(2, 1.0, 1.0, lam, cutoff=80)
    res = solve_converged(DickeParams(2, 1.0, 1.0, lam))
    exp = res.expectations
    assert res.solution.energy == pytest.approx(e_ref, abs=1e-8)
    assert exp.jz == pytest.approx(ref["jz"], abs=1e-8)
    assert exp.jz2 == pytest.approx(ref["jz2"], abs=1e-8)
    assert exp.jp2 == pytest.approx(ref["jp2"], abs=1e-8)
    assert exp.jxy2 == pytest.approx(ref["jxy2"], abs=1e-8)
    assert abs(exp.jp - ref["jp"]) < 1e-8 and abs(exp.anticomm - ref["anticomm"]) < 1e-8


@pytest.mark.parametrize("n", [3, 4])
def test_small_systems_against_dense_fock_oracle(n):
    for lam in (0.3, 0.7):
        e_ref, ref = dicke_dense(n, 1.0, 0.8, lam, cutoff=70)
        res = solve_converged(DickeParams(n, 1.0, 0.8, lam))
        assert res.solution.energy == pytest.approx(e_ref, abs=1e-8)
        assert res.expectations.jz2 == pytest.approx(ref["jz2"], abs=1e-8)
        assert res.expectations.jp2 == pytest.approx(ref["jp2"], abs=1e-8)


def test_spin_density_is_a_state():
    p = DickeParams(12, 1.0, 1.0, 0.7, n_tr=20)
    sol = solve_ground_state(p)
    assert np.sum(sol.coefficients**2) == pytest.approx(1.0, abs=1e-12)
    exp = expectations(sol, p)
    assert abs(exp.jp) < 1e-10 and abs(exp.anticomm) < 1e-9
    red = reduce_pairwise(exp)
    assert red.state.w == pytest.approx(red.state.y, abs=1e-10)


def test_parity_sectors_and_ground_state_parity():
    for lam in (0.2, 0.5, 0.9):
        sol = solve_ground_state(DickeParams(8, 1.0, 1.0, lam, n_tr=20))
        c = sol.coefficients
        k = np.arange(c.shape[1])
        # c[n, k] = sigma (-1)^k c[-n, k]
        np.testing.assert_allclose(c, sol.parity * (-1.0) ** k[None, :] * c[::-1], atol=1e-12)


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8])
def test_energy_decreases_with_truncation(lam):
    energies = [solve_ground_state(DickeParams(16, 1.0, 1.0, lam, n_tr=t)).energy for t in (2, 4, 8, 12, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_truncation_convergence_at_moderate_size():
    res = solve_converged(DickeParams(16, 1.0, 1.0, 0.6))
    assert res.converged
    assert res.n_tr <= 40
    ref = solve_ground_state(DickeParams(16, 1.0, 1.0, 0.6, n_tr=40))
    assert res.solution.energy == pytest.approx(ref.energy, abs=1e-8)


def test_energy_per_atom_approaches_mean_field():
    lam = 1.5 * 0.5
    res = solve_ground_state(DickeParams(1024, 1.0, 1.0, lam, n_tr=20))
    assert res.converged
    assert res.energy / 1024 == pytest.approx(mean_field_dicke(1, 1, lam).energy_per_atom, abs=1e-2)


def test_scaled_concurrence_matches_pairwise_concurrence():
    res = solve_converged(DickeParams(32, 1.0, 1.0, 0.5))
    exp = res.expectations
    pair = concurrence_wootters(reduce_pairwise(exp).state)
    assert scaled_concurrence(exp) == pytest.approx((32 - 1) * pair, abs=1e-9)


def test_lowest_energy_matches_dense_spin_boson_at_larger_n():
    # independent check on a size where the Fock oracle is still cheap
    n, lam = 6, 0.55
    e_ref, _ = dicke_dense(n, 1.0, 1.0, lam, cutoff=90)
    assert solve_converged(DickeParams(n, 1.0, 1.0, lam)).solution.energy == pytest.approx(e_ref, abs=1e-8)


def test_spin_ops_oracle_sanity():
    jz, jp, jm = spin_ops(1.5)
    casimir = jz @ jz + 0.5 * (jp @ jm + jm @ jp)
    np.testing.assert_allclose(casimir, 1.5 * 2.5 * np.eye(4), atol=1e-12)


@pytest.mark.parametrize("x", [1.2, 1.6, 2.0])
def test_large_n_discord_follows_mean_field(x):
    lam = 0.5 * x
    res = solve_converged(DickeParams(1024, 1.0, 1.0, lam))
    assert res.discord == pytest.approx(thermo_discord(mean_field_dicke(1, 1, lam)), abs=0.02)
