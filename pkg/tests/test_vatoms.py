import numpy as np
import pytest

from qclone.fock import FockState
from qclone.stimulated import StimulatedLadder, evolve_ladder
from qclone.vatoms import (
    EquivalenceViolation,
    MixedEnsembleState,
    charge_trajectories,
    fidelity_curves,
    mixed_initial_state,
    project_pairs_to_lambda,
    simulate_vatoms,
    vpair_singlet_state,
    vpair_to_lambda_map,
)

SHORT = np.linspace(0.005, 0.045, 9)
LONG = np.linspace(0.55, 2.95, 49)


def test_initial_ensemble_has_two_to_the_n_branches():
    ens = mixed_initial_state(3)
    assert len(ens.branches) == 8
    assert all(w == pytest.approx(1 / 8) for w, _ in ens.branches)
    for _, s in ens.branches:
        assert s.norm() == pytest.approx(1)


def test_ensemble_weights_validated():
    with pytest.raises(ValueError):
        MixedEnsembleState(((0.7, FockState(2)), (0.7, FockState(2))))


def test_nothing_emitted_at_time_zero():
    tab = simulate_vatoms(2, [0.0])
    assert tab.get(1, 0)[0] == pytest.approx(1)
    assert tab.total()[0] == pytest.approx(1)
    assert np.isnan(fidelity_curves(tab).f_clones[0])


@pytest.mark.parametrize("N", [1, 2, 3])
def test_probability_conserved(N):
    tab = simulate_vatoms(N, np.linspace(0, 3, 7))
    np.testing.assert_allclose(tab.total(), 1, atol=1e-12)


def test_single_atom_is_exactly_optimal():
    # both branches emit with the same probability, so the two-photon
    # sector is always the 1 -> 2 optimum
    tab = simulate_vatoms(1, np.linspace(0.1, 3, 12))
    c = fidelity_curves(tab)
    np.testing.assert_allclose(c.f_clones, 5 / 6, atol=1e-12)
    np.testing.assert_allclose(c.f_opt, 5 / 6, atol=1e-12)


def test_single_atom_closed_form():
    # e1 branch: two-state block with coupling sqrt 2; e2 branch: three-state
    # chain (a1 e2) - (a1 a2 g) - (a2 e1) with unit couplings
    t = np.linspace(0, 3, 13)
    c, s = np.cos(np.sqrt(2) * t), np.sin(np.sqrt(2) * t)
    tab = simulate_vatoms(1, t)
    np.testing.assert_allclose(tab.get(2, 0), s**2 / 2, atol=1e-12)
    np.testing.assert_allclose(tab.get(1, 1), s**2 / 4, atol=1e-12)
    np.testing.assert_allclose(tab.get(0, 1), (1 - c) ** 2 / 8, atol=1e-12)
    np.testing.assert_allclose(tab.get(1, 0), c**2 / 2 + (1 + c) ** 2 / 8, atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_short_time_limit_is_optimal(N):
    c = fidelity_curves(simulate_vatoms(N, SHORT))
    assert np.nanmax(np.abs(c.f_clones - c.f_opt)) < 1e-3


@pytest.mark.parametrize("N", [2, 3, 4])
def test_clones_fall_below_random_at_later_times(N):
    c = fidelity_curves(simulate_vatoms(N, LONG))
    assert np.nanmin(c.f_clones - c.f_rand) < 0


@pytest.mark.parametrize("pol", [(1, 0), (0, 1), (1, 1), (1, 1j), (0.3, 0.8 - 0.2j)])
def test_universality(pol):
    grid = [0.2, 0.9, 1.7]
    ref = simulate_vatoms(2, grid)
    tab = simulate_vatoms(2, grid, polarization=pol)
    for k in set(ref.p) | set(tab.p):
        np.testing.assert_allclose(ref.get(*k), tab.get(*k), atol=1e-12)


def test_six_atoms_dip_and_short_time():
    grid = np.concatenate([[0.01, 0.04], np.linspace(1.0, 2.0, 6)])
    c = fidelity_curves(simulate_vatoms(6, grid, allow_large=True))
    assert np.abs(c.f_clones[:2] - c.f_opt[:2]).max() < 1e-3
    assert np.nanmin(c.f_clones[2:] - c.f_rand[2:]) < 0


def test_reference_curve_terms():
    # a pure two-photon table gives the n = 2 terms directly
    from qclone.vatoms import PhotonCountTable
    tab = PhotonCountTable(np.array([1.0]), {(2, 0): np.array([0.5]), (1, 1): np.array([0.5])})
    c = fidelity_curves(tab)
    assert c.f_opt[0] == pytest.approx(5 / 6)
    assert c.f_rand[0] == pytest.approx(3 / 4)
    assert c.f_clones[0] == pytest.approx(3 / 4)


def test_thread_count_does_not_change_results():
    grid = np.linspace(0, 2, 5)
    a = simulate_vatoms(3, grid, threads=1)
    b = simulate_vatoms(3, grid, threads=4)
    assert a.p.keys() == b.p.keys()
    for k in a.p:
        assert np.array_equal(a.p[k], b.p[k])


def test_atom_number_guards():
    with pytest.raises(ValueError, match="allow_large"):
        simulate_vatoms(5, [0.1])
    with pytest.raises(ValueError):
        simulate_vatoms(7, [0.1], allow_large=True)
    with pytest.raises(ValueError):
        simulate_vatoms(0, [0.1])


def test_charges_are_conserved():
    traj = charge_trajectories(3, np.linspace(0, 2, 6), branch=5)
    np.testing.assert_allclose(traj, np.broadcast_to(traj[0], traj.shape), atol=1e-12)


def test_mean_photon_number_grows_initially():
    tab = simulate_vatoms(2, [0.0, 0.2])
    m = tab.mean_photons()
    assert m[0] == pytest.approx(1) and m[1] > 1


def test_singlet_pair_state():
    s = vpair_singlet_state(1)
    assert s.norm() == pytest.approx(1)
    lam = project_pairs_to_lambda(s, 1)
    assert dict(lam.amplitudes) == pytest.approx({(1, 0, 1, 0, 0): 1.0})


@pytest.mark.parametrize("n_pairs", [1, 2])
@pytest.mark.parametrize("gt", [0.3, 1.1])
def test_vpairs_behave_as_lambda_atoms(n_pairs, gt):
    rep = vpair_to_lambda_map(n_pairs, gt)
    assert rep.leakage < 1e-12
    assert rep.max_amplitude_error < 1e-12
    lad = evolve_ladder(StimulatedLadder.initial(1, n_pairs), gt)
    np.testing.assert_allclose(rep.photon_distribution, lad.probabilities, atol=1e-12)


def test_pair_map_rejects_broken_manifold():
    bad = FockState(8, {(1, 0, 1, 1, 0, 0, 0, 1): 1.0})
    with pytest.raises(EquivalenceViolation):
        project_pairs_to_lambda(bad, 1)
