from math import sqrt

import numpy as np
import pytest
from scipy.linalg import expm

from qclone.fock import (
    BlockPropagator,
    ChargeSpec,
    ChargeViolation,
    ConvergenceError,
    EvolutionParams,
    FockState,
    HamiltonianSpec,
    ResourceError,
    annihilate,
    apply_hamiltonian,
    apply_operator,
    block_decompose,
    build_named_hamiltonian,
    commutator,
    create,
    dense_matrix,
    evolve,
    jaynes_cummings,
    lambda_charges,
    lambda_schwinger,
    mode_pair_rotation,
    pdc_charges,
    pdc_classical_pump,
    reachable_basis,
    rotate_mode_pair,
    vatom,
    vatom_charges,
)


def single_mode(word, hermitize=False):
    return HamiltonianSpec(1, ((1.0, word),), hermitize)


def test_creation_on_vacuum():
    out = apply_hamiltonian(single_mode((create(0),)), FockState.basis((0,)))
    assert out[(1,)] == pytest.approx(1.0)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_creation_sqrt_factor(n):
    out = apply_hamiltonian(single_mode((create(0),)), FockState.basis((n,)))
    assert out[(n + 1,)] == pytest.approx(sqrt(n + 1))
    assert len(out) == 1


def test_annihilating_vacuum_gives_zero():
    out = apply_hamiltonian(single_mode((annihilate(0),)), FockState.basis((0,)))
    assert len(out) == 0
    assert out.norm() == 0


def test_number_operator_word():
    out = apply_hamiltonian(single_mode((create(0), annihilate(0))), FockState.basis((3,)))
    assert out[(3,)] == pytest.approx(3.0)


def test_invalid_mode_reference():
    h = HamiltonianSpec(2, ((1.0, (create(2),)),))
    with pytest.raises(ValueError):
        apply_hamiltonian(h, FockState.basis((0, 0)))


def test_fock_state_validation():
    with pytest.raises(ValueError):
        FockState(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        FockState(1, {(-1,): 1.0})
    with pytest.raises(ValueError):
        FockState(0)


def test_fock_state_arithmetic():
    a = FockState.basis((1, 0))
    b = FockState.basis((0, 1))
    s = (a + b).normalized()
    assert s.norm() == pytest.approx(1)
    assert s.inner(a) == pytest.approx(1 / sqrt(2))
    assert len(a - a) == 0 or (a - a).norm() == 0


def test_lambda_hamiltonian_on_first_ladder_state():
    # H|1,0,0,0,1> = sqrt 2 |2,0,0,1,0> - |1,1,1,0,0> = sqrt 3 |F_1>
    out = apply_hamiltonian(lambda_schwinger(), FockState.basis((1, 0, 0, 0, 1)))
    assert out[(2, 0, 0, 1, 0)] == pytest.approx(sqrt(2))
    assert out[(1, 1, 1, 0, 0)] == pytest.approx(-1.0)
    assert out.norm() == pytest.approx(sqrt(3))


def test_named_hamiltonian_terms():
    lam = build_named_hamiltonian("lambda_schwinger", gamma=2.0)
    assert lam.n_modes == 5
    assert len(lam.terms) == 2 and len(lam.expanded_terms()) == 4
    assert {c for c, _ in lam.terms} == {2.0, -2.0}
    pdc = build_named_hamiltonian("pdc_classical_pump")
    assert pdc.n_modes == 4
    assert all(all(d for _, d in w) for _, w in pdc.terms)
    v = build_named_hamiltonian("vatom", N=1)
    assert v.n_modes == 5
    with pytest.raises(ValueError):
        build_named_hamiltonian("unknown")


def _random_sparse(rng, basis, k=4):
    idx = rng.choice(len(basis), size=min(k, len(basis)), replace=False)
    amps = {basis[i]: complex(rng.normal(), rng.normal()) for i in idx}
    return FockState(len(basis[0]), amps)


@pytest.mark.parametrize("h,start", [
    (lambda_schwinger(), (2, 0, 0, 0, 3)),
    (vatom(2), (1, 0, 0, 1, 0, 0, 0, 1)),
    (pdc_classical_pump(), (1, 0, 0, 0)),
])
def test_hermiticity_on_random_pairs(h, start, rng):
    if h.n_modes == 4:
        basis = [(a + 1, b, b, a) for a in range(4) for b in range(4)]
    else:
        basis = reachable_basis(h, FockState.basis(start))
    for _ in range(50):
        phi, psi = _random_sparse(rng, basis), _random_sparse(rng, basis)
        lhs = phi.inner(apply_hamiltonian(h, psi))
        rhs = np.conj(psi.inner(apply_hamiltonian(h, phi)))
        assert abs(lhs - rhs) < 1e-12


def test_dense_block_is_hermitian():
    h = vatom(2)
    basis = reachable_basis(h, FockState.basis((1, 0, 0, 1, 0, 0, 0, 1)))
    m = dense_matrix(h, basis)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-14)


def test_commutator_identity(rng):
    # [a1 b1 + a2 b2, a1^+ b1^+ + a2^+ b2^+] = N_a + N_b + 2 on modes (a1, a2, b1, b2)
    x = [(1.0, (annihilate(0), annihilate(2))), (1.0, (annihilate(1), annihilate(3)))]
    y = [(1.0, (create(0), create(2))), (1.0, (create(1), create(3)))]
    for _ in range(20):
        occ = tuple(int(n) for n in rng.integers(0, 5, size=4))
        s = FockState.basis(occ)
        lhs = commutator(x, y, s)
        assert lhs[occ] == pytest.approx(sum(occ) + 2, abs=1e-12)
        assert abs(lhs.norm() - (sum(occ) + 2)) < 1e-12


def test_evolve_zero_time_is_identity():
    s = FockState.basis((1, 0, 0, 0, 1))
    assert evolve(lambda_schwinger(), s, EvolutionParams(0.0)) is s


@pytest.mark.parametrize("method", ["taylor", "block_diagonalize"])
def test_one_atom_one_photon(method):
    gt = 0.37
    out = evolve(lambda_schwinger(), FockState.basis((1, 0, 0, 0, 1)), EvolutionParams(gt, method))
    assert out[(1, 0, 0, 0, 1)] == pytest.approx(np.cos(sqrt(3) * gt), abs=1e-11)
    f1 = {(2, 0, 0, 1, 0): sqrt(2 / 3), (1, 1, 1, 0, 0): -sqrt(1 / 3)}
    for occ, a in f1.items():
        assert out[occ] == pytest.approx(-1j * np.sin(sqrt(3) * gt) * a, abs=1e-11)


def test_vatom_matches_dense_exponential():
    h = vatom(1)
    s = FockState.basis((1, 0, 0, 1, 0))
    basis = reachable_basis(h, s)
    assert len(basis) <= 8
    u = expm(-1j * 0.3 * dense_matrix(h, basis))
    expected = u @ s.to_vector(basis)
    for method in ("taylor", "block_diagonalize"):
        out = evolve(h, s, EvolutionParams(0.3, method))
        np.testing.assert_allclose(out.to_vector(basis), expected, atol=1e-12)


@pytest.mark.parametrize("h,start", [
    (lambda_schwinger(), (3, 0, 0, 0, 2)),
    (vatom(2), (1, 0, 0, 0, 1, 0, 1, 0)),
    (jaynes_cummings(), (2, 1, 0)),
])
def test_norm_conservation(h, start):
    s = FockState.basis(start)
    for gt in (0.5, 1.3, 2.0):
        for method in ("taylor", "block_diagonalize"):
            assert abs(evolve(h, s, EvolutionParams(gt, method)).norm() - 1) < 1e-9


def test_pdc_norm_conservation_with_pruning():
    out = evolve(pdc_classical_pump(), FockState.basis((1, 0, 0, 0)), EvolutionParams(0.5, "taylor"))
    assert abs(out.norm() - 1) < 1e-9


def test_taylor_and_block_agree():
    h = lambda_schwinger()
    s = FockState.basis((2, 0, 0, 0, 3))
    a = evolve(h, s, EvolutionParams(1.1, "taylor"))
    b = evolve(h, s, EvolutionParams(1.1, "block_diagonalize"))
    assert (a - b).norm() < 1e-10


def test_taylor_nonconvergence_is_reported():
    from qclone import fock
    h = lambda_schwinger()
    with pytest.raises(ConvergenceError, match="block_diagonalize"):
        fock._taylor_evolve(h, FockState.basis((30, 0, 0, 0, 4)), EvolutionParams(1.0, "taylor"),
                            step=1.0, max_order=3)


def test_unbounded_block_method_hits_resource_guard():
    with pytest.raises(ResourceError):
        evolve(pdc_classical_pump(), FockState.basis((0, 0, 0, 0)),
               EvolutionParams(0.1, "block_diagonalize", max_states=500))


def test_evolution_params_validation():
    with pytest.raises(ValueError):
        EvolutionParams(0.1, taylor_tolerance=0)
    with pytest.raises(ValueError):
        EvolutionParams(0.1, method="krylov")


def test_pdc_charges_constant_on_reachable_set():
    h = pdc_classical_pump()
    s = FockState.basis((2, 0, 0, 0))
    out = evolve(h, s, EvolutionParams(0.3, "taylor"))
    c = pdc_charges()
    assert {c.values(occ) for occ, _ in out} == {(2, 0)}


def test_vatom_two_atom_blocks_match_enumeration():
    h = vatom(2)
    s = FockState.basis((1, 0, 0, 1, 0, 0, 0, 1))
    blocks = block_decompose(h, s, vatom_charges(2))
    # the charges (N1, N2) = (2, 1) are fixed by the start; enumerate all
    # configurations of two 3-level atoms plus photons with those charges
    enumerated = set()
    for l1 in range(3):
        for l2 in range(3):
            e1 = (l1 == 1) + (l2 == 1)
            e2 = (l1 == 2) + (l2 == 2)
            n1, n2 = 2 - e1, 1 - e2
            if n1 >= 0 and n2 >= 0:
                occ = [n1, n2, 0, 0, 0, 0, 0, 0]
                occ[2 + l1] = 1
                occ[5 + l2] = 1
                enumerated.add(tuple(occ))
    assert len(blocks) == 1
    assert set(blocks[0].basis) == enumerated
    np.testing.assert_allclose(blocks[0].matrix, blocks[0].matrix.conj().T)


def test_lambda_one_one_block_is_two_dimensional():
    blocks = block_decompose(lambda_schwinger(), FockState.basis((1, 0, 0, 0, 1)), lambda_charges())
    assert sum(len(b.basis) for b in blocks) == 3
    # |F_1> lives on two configurations; the ladder itself is 2-dimensional
    m = blocks[0].matrix
    assert np.linalg.matrix_rank(m) == 2


def test_charge_violation_names_term():
    h = HamiltonianSpec(2, ((1.0, (create(0),)),), True, ("a", "b"))
    with pytest.raises(ChargeViolation, match="a\\^\\+"):
        block_decompose(h, FockState.basis((0, 0)), ChargeSpec(((1, 1),)))


def test_charge_expectations_constant_along_evolution():
    h = vatom(2)
    s = FockState.basis((1, 0, 0, 0, 1, 0, 1, 0))
    prop = BlockPropagator(h, s)
    c = vatom_charges(2)
    start = [s.expectation_number(w) for w in c.charges]
    for t in np.linspace(0, 2, 9):
        st = prop.state(t)
        assert [st.expectation_number(w) for w in c.charges] == pytest.approx(start, abs=1e-10)


def test_jaynes_cummings_rabi():
    # |e, n> <-> |g, n+1> with coupling sqrt(n+1)
    n, gt = 2, 0.4
    out = evolve(jaynes_cummings(), FockState.basis((n, 1, 0)), EvolutionParams(gt))
    assert abs(out[(n + 1, 0, 1)]) ** 2 == pytest.approx(np.sin(sqrt(n + 1) * gt) ** 2, abs=1e-12)


def test_mode_pair_rotation_is_unitary(rng):
    from qclone.qubit_core import random_unitary
    u = random_unitary(2, rng)
    for n in range(6):
        r = mode_pair_rotation(n, u)
        np.testing.assert_allclose(r.conj().T @ r, np.eye(n + 1), atol=1e-12)


def test_rotate_mode_pair_single_photon():
    # a diagonal photon counted in the diagonal basis is all "right"
    u = np.array([[1, -1], [1, 1]]) / sqrt(2)
    s = FockState(2, {(1, 0): 1 / sqrt(2), (0, 1): 1 / sqrt(2)})
    out = rotate_mode_pair(s, (0, 1), u)
    assert abs(out[(1, 0)]) == pytest.approx(1.0)
    assert abs(out[(0, 1)]) < 1e-15


def test_operator_application_is_linear(rng):
    h = lambda_schwinger()
    a = FockState.basis((1, 0, 0, 0, 2))
    b = FockState.basis((0, 1, 1, 0, 1))
    lhs = apply_operator(h.expanded_terms(), a.scaled(2) + b.scaled(1j))
    rhs = apply_hamiltonian(h, a).scaled(2) + apply_hamiltonian(h, b).scaled(1j)
    assert (lhs - rhs).norm() < 1e-14
