import math

import numpy as np
import pytest

from tccbench import (
    AmplitudeVector,
    BasisSplit,
    TccConfig,
    TruncationScheme,
    ci_to_cluster,
    enumerate_truncated_space,
    fci_solve,
    cas_fci_solve,
    solve_tcc,
    split_amplitudes,
    tcc_energy,
    tcc_residual,
)
from tccbench.determinants import (
    SPACE_CAS,
    SPACE_EXT,
    SPACE_FULL,
    classify_excitation,
    enumerate_excitations,
)
from tccbench.errors import GapViolationError, SpaceMismatchError
from tccbench.hamiltonian import FockSpectrum
from tccbench.tcc import MODE_FOI, MODE_FULL, MODE_RANK


def _cas_amplitudes(system):
    _, states = cas_fci_solve(system.ints, system.basis, system.split)
    t = ci_to_cluster(states[0])
    return AmplitudeVector(SPACE_CAS, dict(t.entries))


def _empty_ext(scheme="full"):
    return AmplitudeVector(SPACE_EXT if scheme is None else "truncated", {},
                           scheme=scheme)


# ---------------------------------------------------------------------------
# Truncated index sets
# ---------------------------------------------------------------------------

def test_truncated_space_counts_by_brute_force(pairing4):
    split = pairing4.split
    basis = split.basis
    all_ext = [mu for mu in enumerate_excitations(basis)
               if classify_excitation(mu, split) == "ext"]
    full = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    assert full == sorted(all_ext, key=lambda m: (m.rank, m.holes, m.particles))
    for n in (1, 2, 3):
        rank = enumerate_truncated_space(split, TruncationScheme(MODE_RANK, n))
        assert rank == [mu for mu in full if mu.rank <= n]
        foi = enumerate_truncated_space(split, TruncationScheme(MODE_FOI, n))
        want = [mu for mu in full
                if sum(1 for a in mu.particles if a > split.k) <= n]
        assert foi == want
    # nesting
    r1 = set(enumerate_truncated_space(split, TruncationScheme(MODE_RANK, 1)))
    r2 = set(enumerate_truncated_space(split, TruncationScheme(MODE_RANK, 2)))
    assert r1 <= r2 <= set(full)


def test_truncation_scheme_validation():
    with pytest.raises(ValueError):
        TruncationScheme("rank")
    with pytest.raises(ValueError):
        TruncationScheme("banana", 2)
    assert TruncationScheme(MODE_FULL).describe() == "full"
    assert TruncationScheme(MODE_RANK, 2).describe() == "rank:2"


# ---------------------------------------------------------------------------
# Residual and energy
# ---------------------------------------------------------------------------

def test_fci_split_is_a_residual_root(hubbard2_mo, hubbard3_mo, pairing4):
    """Amplitudes from the FCI ground state zero out the projected equations."""
    for system in (hubbard2_mo, hubbard3_mo, pairing4):
        summary, states = fci_solve(system.ints, system.basis)
        t_full = ci_to_cluster(states[0])
        t_cas, t_ext = split_amplitudes(t_full, system.split)
        r = tcc_residual(t_ext, t_cas, system.ints, system.split,
                         TruncationScheme(MODE_FULL))
        worst = max((abs(v) for v in r.entries.values()), default=0.0)
        assert worst <= 1e-10
        e = tcc_energy(t_ext, t_cas, system.ints, system.split)
        assert abs(e - summary.ground_energy) <= 1e-10


def test_space_tags_are_enforced(pairing4):
    t_cas = _cas_amplitudes(pairing4)
    bad_ext = AmplitudeVector(SPACE_FULL, {})
    with pytest.raises(SpaceMismatchError):
        tcc_energy(bad_ext, t_cas, pairing4.ints, pairing4.split)
    bad_cas = AmplitudeVector(SPACE_EXT, {})
    with pytest.raises(SpaceMismatchError):
        tcc_energy(_empty_ext(), bad_cas, pairing4.ints, pairing4.split)


def test_zero_amplitude_energy_is_reference_expectation(pairing4):
    """With t = t_cas = 0 the energy is <phi0|H|phi0>."""
    from tccbench.hamiltonian import matrix_element

    t_cas = AmplitudeVector(SPACE_CAS, {})
    ref = pairing4.basis.reference
    want = matrix_element(ref, ref, pairing4.ints)
    got = tcc_energy(_empty_ext(), t_cas, pairing4.ints, pairing4.split)
    assert abs(got - want) <= 1e-13


# ---------------------------------------------------------------------------
# Quasi-Newton solve
# ---------------------------------------------------------------------------

def test_solver_reaches_fci_split_root(pairing4):
    t_cas = _cas_amplitudes(pairing4)
    config = TccConfig(max_iterations=300, tolerance=1e-11, diis=8)
    result = solve_tcc(t_cas, pairing4.ints, pairing4.split, pairing4.fock, config)
    assert result.converged and not result.diverged
    r = tcc_residual(result.t, t_cas, pairing4.ints, pairing4.split,
                     TruncationScheme(MODE_FULL))
    assert max((abs(v) for v in r.entries.values()), default=0.0) <= 1e-10
    # history is (iteration, l2, dual-norm, energy) and the final l2 converged
    assert result.history[-1][1] <= 1e-11
    assert result.history[0][0] == 1


def test_collapse_k_equals_n_reproduces_cc_equals_fci(hubbard2_mo, pairing3_2e):
    """2-electron systems: untruncated CC at k = N recovers FCI."""
    for system in (hubbard2_mo, pairing3_2e):
        basis = system.basis
        split = BasisSplit(basis, basis.n_electrons)
        summary, _ = fci_solve(system.ints, basis)
        t_cas = AmplitudeVector(SPACE_CAS, {})
        result = solve_tcc(t_cas, system.ints, split, system.fock,
                           TccConfig(max_iterations=300, tolerance=1e-12, diis=6))
        assert result.converged
        assert abs(result.energy - summary.ground_energy) <= 1e-9


def test_collapse_k_equals_big_k_reproduces_cas_fci(pairing4):
    basis = pairing4.basis
    split = BasisSplit(basis, basis.n_orbitals)
    summary, states = cas_fci_solve(pairing4.ints, basis, split)
    t = ci_to_cluster(states[0])
    t_cas = AmplitudeVector(SPACE_CAS, dict(t.entries))
    result = solve_tcc(t_cas, pairing4.ints, split, pairing4.fock)
    assert result.converged and result.iterations == 0
    assert len(result.t) == 0
    assert abs(result.energy - summary.ground_energy) <= 1e-12


def test_gap_violation_is_raised():
    """A Fock diagonal with a non-positive external difference aborts."""
    import tccbench

    ints = tccbench.pairing_model(3, 0.2, 1.0)
    basis = tccbench.OrbitalBasis(6, 3)
    split = BasisSplit(basis, 3)
    good = tccbench.fock_matrix(ints, basis)
    lam = good.lambdas.copy()
    lam[3] = lam[2] - 1.0  # lambda_4 below lambda_3: eps_{3->4} < 0
    bad = FockSpectrum(lam, good.lambda0, good.off_diag_norm, good.matrix)
    with pytest.raises(GapViolationError):
        solve_tcc(AmplitudeVector(SPACE_CAS, {}), ints, split, bad)


def test_divergence_guard(pairing4):
    """An absurd damping/tolerance combination must flag, not loop."""
    t_cas = _cas_amplitudes(pairing4)
    fock = pairing4.fock
    tiny = FockSpectrum(fock.lambdas * 1e-6, fock.lambda0 * 1e-6,
                        fock.off_diag_norm, fock.matrix * 1e-6)
    result = solve_tcc(t_cas, pairing4.ints, pairing4.split, tiny,
                       TccConfig(max_iterations=50, tolerance=1e-12))
    assert result.diverged and not result.converged


def test_config_validation():
    with pytest.raises(ValueError):
        TccConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        TccConfig(damping=1.5)


def test_galerkin_property_of_truncated_solution(pairing4):
    """The truncated root zeroes exactly the retained components."""
    t_cas = _cas_amplitudes(pairing4)
    scheme = TruncationScheme(MODE_RANK, 2)
    result = solve_tcc(t_cas, pairing4.ints, pairing4.split, pairing4.fock,
                       TccConfig(max_iterations=300, tolerance=1e-11, diis=8,
                                 truncation=scheme))
    assert result.converged
    kept = set(enumerate_truncated_space(pairing4.split, scheme))
    assert set(result.t.entries) <= kept
    r = tcc_residual(result.t, t_cas, pairing4.ints, pairing4.split, scheme)
    assert max((abs(v) for v in r.entries.values()), default=0.0) <= 1e-10
    # the full residual at the truncated root is generally nonzero
    r_full = tcc_residual(result.t, t_cas, pairing4.ints, pairing4.split,
                          TruncationScheme(MODE_FULL))
    dropped = [abs(v) for mu, v in r_full.entries.items() if mu not in kept]
    assert max(dropped) > 1e-8
