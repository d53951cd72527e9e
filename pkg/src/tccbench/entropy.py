"""Orbital entanglement entropies and active-space selection.

One- and two-orbital reduced density matrices are computed from a CI
vector by determinant bookkeeping (no explicit 2^K tensors). For a
fixed particle-number state, particle-number superselection makes the
one-orbital matrix diagonal and the two-orbital matrix block-diagonal
in the local particle number; the only off-diagonal element is the
exchange coherence between the |10> and |01> local configurations.

Entropies use the natural logarithm, so s(i) <= ln 2 and
s(i,j) <= ln 4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .determinants import OrbitalBasis, enumerate_determinants
from .errors import EmptySelectionError, NotNormalizedError, SameOrbitalError
from .exact import CiVector
from .hamiltonian import IntegralSet

NORM_TOL = 1e-10


def _check_normalized(psi: CiVector) -> np.ndarray:
    c = psi.coefficients
    nrm = float(np.linalg.norm(c))
    if abs(nrm - 1.0) > NORM_TOL:
        raise NotNormalizedError(f"CI vector norm is {nrm!r}, expected 1")
    return c


def one_orbital_rdm(psi: CiVector, i: int) -> np.ndarray:
    """2x2 density matrix of orbital i: diag(1 - <n_i>, <n_i>)."""
    c = _check_normalized(psi)
    dets = enumerate_determinants(psi.basis)
    occ_weight = sum(float(x) ** 2 for x, d in zip(c, dets) if i in d)
    return np.diag([1.0 - occ_weight, occ_weight])


def two_orbital_rdm(psi: CiVector, i: int, j: int) -> np.ndarray:
    """4x4 density matrix of orbitals (i, j), local basis |00>,|01>,|10>,|11>.

    |01> means j occupied, |10> means i occupied. The exchange coherence
    <10|rho|01> couples determinant pairs related by swapping the
    occupations of i and j; in the occupation-tensor representation a
    canonically ordered determinant maps to its basis tensor with sign
    +1, so the coherence is the plain product of the paired CI
    coefficients (verified against the dense partial-trace oracle).
    """
    if i == j:
        raise SameOrbitalError(f"two-orbital matrix needs distinct orbitals, got {i}")
    c = _check_normalized(psi)
    dets = enumerate_determinants(psi.basis)
    pos = {d.mask: a for a, d in enumerate(dets)}
    bi, bj = 1 << (i - 1), 1 << (j - 1)

    rho = np.zeros((4, 4))
    for x, d in zip(c, dets):
        m = d.mask
        local = (2 if m & bi else 0) + (1 if m & bj else 0)
        rho[local, local] += float(x) ** 2
        if local == 2:  # i occupied, j empty: pair with the swapped determinant
            partner = pos.get((m & ~bi) | bj)
            if partner is not None:
                rho[2, 1] += float(x) * float(c[partner])
    rho[1, 2] = rho[2, 1]
    return rho


def _von_neumann(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    evals = np.clip(evals, 0.0, 1.0)
    nz = evals[evals > 1e-300]
    return float(-(nz * np.log(nz)).sum())


@dataclass
class OrbitalEntropyProfile:
    """Per-orbital entropies, pair entropies and mutual information."""

    s1: np.ndarray          # (K,)
    s2: np.ndarray          # (K, K), diagonal zero by convention
    mi: np.ndarray          # (K, K), I(i,i) = 0
    source: str = ""

    @property
    def n_orbitals(self) -> int:
        return len(self.s1)


def mutual_information(psi: CiVector, source: str = "") -> OrbitalEntropyProfile:
    """Full entropy profile: s(i), s(i,j), I(i,j) = s(i)+s(j)-s(i,j)."""
    k = psi.basis.n_orbitals
    s1 = np.array([_von_neumann(one_orbital_rdm(psi, i)) for i in range(1, k + 1)])
    s2 = np.zeros((k, k))
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            s2[i - 1, j - 1] = s2[j - 1, i - 1] = _von_neumann(two_orbital_rdm(psi, i, j))
    mi = s1[:, None] + s1[None, :] - s2
    np.fill_diagonal(mi, 0.0)
    return OrbitalEntropyProfile(s1, s2, mi, source)


# ---------------------------------------------------------------------------
# CAS selection
# ---------------------------------------------------------------------------

MODE_THRESHOLD = "THRESHOLD"
MODE_JUMP = "JUMP"


class WeakProfileWarning(UserWarning):
    """No orbital passed the selection thresholds; falling back to k = N."""


@dataclass
class CasSelection:
    """Proposed active space, possibly non-contiguous in the input order."""

    orbitals: tuple[int, ...]          # selected spin-orbitals, sorted
    k: int                             # CAS size after relabeling
    spin_permutation: tuple[int, ...]  # new order of spin-orbitals (1-based)
    spatial_permutation: tuple[int, ...]  # new order of spatial orbitals (1-based)
    jump_ratio: Optional[float] = None
    jump_ties: int = 0


def _spatial(i: int) -> int:
    return (i + 1) // 2


def _spin_pair(spatial: int) -> tuple[int, int]:
    return 2 * spatial - 1, 2 * spatial


def select_cas(profile: OrbitalEntropyProfile, n_electrons: int,
               s_threshold: float = 0.0, mi_threshold: float = 0.0,
               mode: str = MODE_THRESHOLD, include_reference: bool = True
               ) -> CasSelection:
    """Pick active spin-orbitals from an entropy profile.

    THRESHOLD keeps {i : s(i) > s_threshold} plus every orbital with a
    mutual information above mi_threshold; JUMP sorts the I values
    descending, cuts at the largest consecutive ratio gap and keeps the
    orbitals appearing above the cut (the first such gap wins on ties,
    recorded in jump_ties). The reference orbitals 1..N are always
    included unless include_reference is False, and the selection is
    closed under spin partners so the active space maps to whole spatial
    orbitals. The emitted permutations relabel the basis so the CAS
    becomes 1..k.
    """
    if s_threshold < 0 or mi_threshold < 0:
        raise ValueError("thresholds must be nonnegative")
    k_orb = profile.n_orbitals
    selected: set[int] = set()
    jump_ratio = None
    jump_ties = 0

    if mode == MODE_THRESHOLD:
        for i in range(1, k_orb + 1):
            if profile.s1[i - 1] > s_threshold:
                selected.add(i)
        for i in range(1, k_orb + 1):
            for j in range(i + 1, k_orb + 1):
                if profile.mi[i - 1, j - 1] > mi_threshold:
                    selected.update((i, j))
        if not selected:
            if not include_reference:
                raise EmptySelectionError("no orbital passed the thresholds")
            warnings.warn("no orbital passed the thresholds; proposing k = N",
                          WeakProfileWarning, stacklevel=2)
    elif mode == MODE_JUMP:
        pairs = [
            (float(profile.mi[i - 1, j - 1]), i, j)
            for i in range(1, k_orb + 1)
            for j in range(i + 1, k_orb + 1)
        ]
        pairs.sort(key=lambda r: (-r[0], r[1], r[2]))
        values = [r[0] for r in pairs]
        best, cut = 0.0, 0
        for a in range(len(values) - 1):
            hi, lo = values[a], values[a + 1]
            if hi <= 0.0:
                break
            ratio = np.inf if lo <= 0.0 else hi / lo
            if ratio > best:
                best, cut = ratio, a + 1
            elif ratio == best and np.isfinite(ratio):
                jump_ties += 1
        jump_ratio = best if cut else None
        for _, i, j in pairs[:cut]:
            selected.update((i, j))
        if not selected and not include_reference:
            raise EmptySelectionError("mutual information profile is flat")
    else:
        raise ValueError(f"unknown selection mode {mode!r}")

    if include_reference:
        selected.update(range(1, n_electrons + 1))
    # close under spin partners
    spatial_sel = sorted({_spatial(i) for i in selected})
    selected = set()
    for p in spatial_sel:
        selected.update(_spin_pair(p))

    orbitals = tuple(sorted(selected))
    spatial_rest = [p for p in range(1, k_orb // 2 + 1) if p not in spatial_sel]
    spatial_perm = tuple(spatial_sel + spatial_rest)
    spin_perm = tuple(s for p in spatial_perm for s in _spin_pair(p))
    return CasSelection(orbitals, len(orbitals), spin_perm, spatial_perm,
                        jump_ratio, jump_ties)


def permute_spatial_orbitals(ints: IntegralSet, perm: tuple[int, ...]) -> IntegralSet:
    """Relabel spatial orbitals: new orbital a is old orbital perm[a-1].

    Exact (pure index shuffling, no arithmetic).
    """
    idx = np.array(perm) - 1
    if sorted(perm) != list(range(1, ints.n_spatial + 1)):
        raise ValueError(f"not a permutation of 1..{ints.n_spatial}: {perm}")
    return IntegralSet(
        ints.n_spatial,
        ints.h[np.ix_(idx, idx)],
        ints.g[np.ix_(idx, idx, idx, idx)],
        ints.e_core,
        n_electrons=ints.n_electrons,
        source=ints.source,
        symmetry=ints.symmetry,
    )
