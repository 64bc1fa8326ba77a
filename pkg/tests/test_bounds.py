from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qclone.bounds import (
    CovariantTwoQubitParams,
    CPMap,
    DecompositionMismatch,
    RemotePrepProblem,
    bound_1toN,
    change_of_variables,
    closed_form_bound,
    collective_spin,
    conditional_states,
    eigenbasis_projectors,
    eigenvalue_formula,
    j_values,
    lp_bound,
    mixture_gap,
    multiplicity,
    n_max,
    nonlinear_witness,
    optimize_1to2,
    output_operator,
    random_decomposition,
    remote_prepare,
    s_max_formula,
    scale_factor_formula,
    trace_identities,
    witness_decompositions,
)
from qclone.cloning_maps import gm_apply, optimal_fidelity
from qclone.qubit_core import PAULI_Z, density, partial_trace, random_density, random_ket


# --- 1 -> 2 ------------------------------------------------------------------


def test_optimal_point_eigenvalues():
    p = CovariantTwoQubitParams(2 / 3, 2 / 3, 1 / 3, 0.0)
    np.testing.assert_allclose(sorted(p.eigenvalue_bounds()), [0, 0, 4 / 3, 8 / 3], atol=1e-15)
    assert p.feasible()
    assert p.fidelity() == pytest.approx(5 / 6)
    assert p.joint_projection() == pytest.approx(2 / 3)


def test_density_matrix_eigenvalues_match_bounds():
    p = CovariantTwoQubitParams(0.3, 0.1, 0.2, 0.15)
    ev = np.linalg.eigvalsh(p.density_matrix(m=(0.0, 0.0, 1.0)))
    np.testing.assert_allclose(sorted(4 * ev), sorted(p.eigenvalue_bounds()), atol=1e-12)


def test_optimal_point_is_the_cloner_output():
    out = gm_apply(np.array([1, 0]), 1, 2).clone_register()
    ref = CovariantTwoQubitParams(2 / 3, 2 / 3, 1 / 3, 0.0).density_matrix()
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_infeasible_point():
    assert not CovariantTwoQubitParams(0.9, 0.9, 0.3, 0.0).feasible()


def test_optimize_1to2():
    r = optimize_1to2()
    assert r.params.t == pytest.approx(1 / 3, abs=1e-6)
    assert r.params.t_xy == pytest.approx(0, abs=1e-6)
    assert r.params.eta1 == pytest.approx(2 / 3, abs=1e-6)
    assert r.F == pytest.approx(5 / 6, abs=1e-6)
    assert r.params.feasible(1e-9)


# --- 1 -> N ------------------------------------------------------------------


def test_j_values_and_multiplicities():
    assert j_values(1) == [Fraction(1, 2)]
    assert j_values(4) == [0, 1, 2]
    assert [multiplicity(4, j) for j in j_values(4)] == [2, 3, 1]
    assert [multiplicity(5, j) for j in j_values(5)] == [5, 4, 1]


@pytest.mark.parametrize("N", range(1, 9))
def test_trace_identities_exact(N):
    dim, j2 = trace_identities(N)
    assert dim == 2**N
    assert j2 == Fraction(3 * N * 2**N, 4)


def test_trace_identity_one_qubit_is_fractional():
    assert trace_identities(1) == (2, Fraction(3, 2))


@pytest.mark.parametrize("N", range(1, 9))
def test_lp_matches_closed_form(N):
    s, prob = bound_1toN(N)
    assert s == pytest.approx(float(s_max_formula(N)), abs=1e-9)
    assert closed_form_bound(N).s == pytest.approx(float(s_max_formula(N)), abs=1e-12)
    # optimal point is positive and normalized
    for i, j in enumerate(prob.j_values):
        m = -j
        while m <= j:
            assert prob.eigenvalue(i, m) >= -1e-9
            m += 1
    assert np.sum(prob.B) == pytest.approx(1)


@pytest.mark.parametrize("N", range(1, 9))
def test_reduced_lp_agrees(N):
    full, _, _ = lp_bound(N)
    red, A, B = lp_bound(N, reduced=True)
    assert red == pytest.approx(full, abs=1e-10)


@pytest.mark.parametrize("N", range(1, 9))
def test_bound_matches_optimal_fidelity_exactly(N):
    assert 2 * optimal_fidelity(1, N, exact=True) - 1 == s_max_formula(N)


def test_s_max_values():
    assert s_max_formula(1) == 1
    assert s_max_formula(2) == Fraction(2, 3)
    assert s_max_formula(4) == Fraction(1, 2)


def test_bound_is_attained_by_the_optimal_cloner():
    for M in (2, 3, 4):
        out = gm_apply(np.array([1, 0]), 1, M)
        bloch_z = np.trace(out.clone_marginal(0) @ PAULI_Z).real
        assert bloch_z == pytest.approx(float(s_max_formula(M)), abs=1e-12)


def test_collective_spin_spectrum():
    jz, j2 = collective_spin(3)
    ev = np.round(np.linalg.eigvalsh(j2), 10)
    assert sorted(set(ev)) == [0.75, 3.75]
    assert np.abs(jz @ j2 - j2 @ jz).max() < 1e-12


def test_n_max():
    assert n_max(4) == (2, 1)
    assert n_max(5) == (2, 2)


@given(st.integers(1, 5), st.data())
@settings(max_examples=25, deadline=None)
def test_eigenvalue_formula_matches_diagonalization(N, data):
    nb, na = n_max(N)
    fl = st.floats(-1, 1)
    alpha = data.draw(st.lists(fl, min_size=na + 1, max_size=na + 1))
    beta = data.draw(st.lists(fl, min_size=nb + 1, max_size=nb + 1))
    op = output_operator(N, alpha, beta)
    numeric = np.sort(np.linalg.eigvalsh(op))
    formula = np.sort(np.concatenate([[v] * d for v, d in eigenvalue_formula(N, alpha, beta)]))
    np.testing.assert_allclose(numeric, formula, atol=1e-10 * max(1, np.abs(numeric).max()))
    # Bloch coefficient of one clone: Tr(op sigma_z on qubit 0)
    z0 = np.kron(PAULI_Z, np.eye(2 ** (N - 1)))
    assert np.trace(op @ z0).real == pytest.approx(scale_factor_formula(N, alpha, beta),
                                                 abs=1e-9 * max(1, np.abs(op).max() * 2**N))


def test_change_of_variables_invertible(rng):
    for N in range(1, 9):
        VA, VB = change_of_variables(N)
        assert VB.shape[0] == VB.shape[1] == len(j_values(N))
        assert VA.shape[0] == VA.shape[1]
        for V in (VA, VB):
            assert np.isfinite(np.linalg.cond(V))
            for _ in range(5):
                x = rng.normal(size=V.shape[1])
                back = np.linalg.solve(V, V @ x)
                assert np.abs(back - x).max() < 1e-8


# --- remote preparation ------------------------------------------------------


def test_remote_prep_simple_example():
    mix = [(0.5, [1, 0]), (0.5, [0, 1])]
    p = RemotePrepProblem.build(mix)
    eff = remote_prepare(p)
    np.testing.assert_allclose(sum(eff), np.eye(2), atol=1e-12)
    got = conditional_states(p, eff)
    np.testing.assert_allclose(got[0], np.diag([0.5, 0]), atol=1e-12)


def test_remote_prep_random_instances(rng):
    for _ in range(30):
        d = int(rng.integers(2, 4))
        rho = random_density(d, rng=rng)
        mix = random_decomposition(rho, int(rng.integers(d, 6)), rng)
        p = RemotePrepProblem.build(mix, rho)
        eff = remote_prepare(p)
        np.testing.assert_allclose(sum(eff), np.eye(p.rank), atol=1e-10)
        for (x, psi), s in zip(p.target_mixture, conditional_states(p, eff)):
            np.testing.assert_allclose(s, x * density(psi), atol=1e-10)


def test_purification_reduces_to_rho(rng):
    rho = random_density(3, rng=rng)
    p = RemotePrepProblem.build(random_decomposition(rho, 4, rng), rho)
    np.testing.assert_allclose(partial_trace(p.purification(), [3, p.rank], [0]), rho, atol=1e-12)


def test_rank_deficient_rho():
    rho = np.diag([0.7, 0.3, 0.0])
    mix = random_decomposition(rho, 3, 5)
    p = RemotePrepProblem.build(mix, rho)
    assert p.rank == 2


def test_mismatched_decomposition_rejected():
    with pytest.raises(DecompositionMismatch):
        RemotePrepProblem.build([(1.0, [1, 0])], np.eye(2) / 2)
    with pytest.raises(ValueError):
        random_decomposition(np.eye(3) / 3, 2)


# --- mixture gap -------------------------------------------------------------


def test_linear_maps_have_no_gap(rng):
    for _ in range(5):
        rho = random_density(2, rng=rng)
        g = CPMap.random(2, rng=rng)
        a, b = random_decomposition(rho, 3, rng), random_decomposition(rho, 4, rng)
        assert mixture_gap(g, a, b) < 1e-10


def test_depolarizing_and_unitary_maps_are_valid():
    d = CPMap.depolarizing(0.3)
    out = d(np.array([1, 0]))
    np.testing.assert_allclose(out, np.diag([0.85, 0.15]))
    with pytest.raises(ValueError):
        CPMap((np.eye(2) * 2,))


def test_nonlinear_witness_gap():
    a, b = witness_decompositions()
    assert mixture_gap(nonlinear_witness, a, b) == pytest.approx(0.1, abs=1e-12)


def test_witness_is_identity_on_pure_states():
    psi = random_ket(2, rng=1)
    np.testing.assert_allclose(nonlinear_witness(psi), density(psi), atol=1e-12)


def test_gap_requires_equal_states():
    with pytest.raises(DecompositionMismatch):
        mixture_gap(nonlinear_witness, [(1.0, [1, 0])], [(1.0, [0, 1])])


def test_qutrit_gap_with_explicit_measurements(rng):
    rho = random_density(3, rng=rng)
    a, b = random_decomposition(rho, 3, rng), random_decomposition(rho, 5, rng)
    g = CPMap.random(3, rng=rng)
    assert mixture_gap(g, a, b, eigenbasis_projectors(3)) < 1e-10
    with pytest.raises(ValueError):
        mixture_gap(g, a, b)
