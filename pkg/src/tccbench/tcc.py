"""Tailored coupled-cluster equations on a truncated external space.

The CAS amplitudes t^CAS are frozen throughout; the external amplitudes
solve the projected root problem

    0 = f(t; t^CAS)_mu = <X_mu phi_0, e^{-T^CAS} e^{-T} H e^{T} e^{T^CAS} phi_0>

for mu in the chosen truncated index set, by damped quasi-Newton
iteration with the Fock-diagonal Jacobian approximation D = diag(eps_mu)
and optional DIIS acceleration. k = N reproduces single-reference CC,
k = K reproduces CAS-FCI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .determinants import (
    AmplitudeVector,
    BasisSplit,
    OrbitalBasis,
    SPACE_CAS,
    SPACE_EXT,
    SPACE_FULL,
    SPACE_TRUNCATED,
    ExcitationIndex,
    apply_excitation,
    classify_excitation,
    enumerate_determinants,
    enumerate_excitations,
)
from .errors import GapViolationError, SpaceMismatchError
from .exact import _det_table, _reference_position, exp_cluster_apply
from .hamiltonian import FockSpectrum, IntegralSet, build_dense_hamiltonian

MODE_RANK = "rank"
MODE_FOI = "foi"
MODE_FULL = "full"

DIVERGENCE_LIMIT = 1.0e3


@dataclass(frozen=True)
class TruncationScheme:
    """Which external indices are kept.

    'rank' keeps |mu| <= n (reference-rooted excitation rank);
    'foi' keeps indices with at most n external particles, i.e. bounded
    external rank from any CAS determinant (first-order interaction
    style); 'full' keeps all of the external index set.
    """

    mode: str
    n: Optional[int] = None

    def __post_init__(self):
        if self.mode not in (MODE_RANK, MODE_FOI, MODE_FULL):
            raise ValueError(f"unknown truncation mode {self.mode!r}")
        if self.mode != MODE_FULL and (self.n is None or self.n < 1):
            raise ValueError(f"mode {self.mode!r} needs a positive rank cap")

    def describe(self) -> str:
        return self.mode if self.mode == MODE_FULL else f"{self.mode}:{self.n}"


def enumerate_truncated_space(split: BasisSplit, scheme: TruncationScheme
                              ) -> list[ExcitationIndex]:
    """Deterministically ordered external indices kept by the scheme."""
    basis = split.basis
    out = []
    for mu in enumerate_excitations(basis):
        if classify_excitation(mu, split) != "ext":
            continue
        if scheme.mode == MODE_RANK and mu.rank > scheme.n:
            continue
        if scheme.mode == MODE_FOI:
            ext_particles = sum(1 for a in mu.particles if a > split.k)
            if ext_particles > scheme.n:
                continue
        out.append(mu)
    return out


@dataclass
class TccConfig:
    max_iterations: int = 200
    tolerance: float = 1e-10
    damping: float = 1.0
    diis: Optional[int] = None
    truncation: TruncationScheme = field(default_factory=lambda: TruncationScheme(MODE_FULL))

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class TccResult:
    t: AmplitudeVector
    energy: float
    history: list[tuple[int, float, float, float]]  # (iter, l2, v-norm, energy)
    converged: bool
    iterations: int
    diverged: bool = False


# ---------------------------------------------------------------------------
# Residual and energy
# ---------------------------------------------------------------------------

def _check_spaces(t: AmplitudeVector, t_cas: AmplitudeVector, split: BasisSplit) -> None:
    if t.space not in (SPACE_EXT, SPACE_TRUNCATED):
        raise SpaceMismatchError(f"external amplitudes tagged {t.space!r}")
    if t_cas.space != SPACE_CAS:
        raise SpaceMismatchError(f"CAS amplitudes tagged {t_cas.space!r}")
    t.check_space(split)
    t_cas.check_space(split)


def _transformed_reference(t: AmplitudeVector, t_cas: AmplitudeVector,
                           ints: IntegralSet, basis: OrbitalBasis) -> np.ndarray:
    """e^{-T^CAS} e^{-T} H e^{T} e^{T^CAS} phi_0 as a coefficient vector."""
    ham = build_dense_hamiltonian(ints, basis)
    v = np.zeros(ham.shape[0])
    v[_reference_position(basis)] = 1.0
    v = exp_cluster_apply(t_cas, v, basis, sign=+1)
    v = exp_cluster_apply(t, v, basis, sign=+1)
    v = ham @ v
    v = exp_cluster_apply(t, v, basis, sign=-1)
    return exp_cluster_apply(t_cas, v, basis, sign=-1)


def _project(v: np.ndarray, indices: list[ExcitationIndex], basis: OrbitalBasis
             ) -> np.ndarray:
    """Components <X_mu phi_0, v> for each index, in order."""
    _, pos = _det_table(basis.n_orbitals, basis.n_electrons)
    ref = basis.reference
    out = np.empty(len(indices))
    for a, mu in enumerate(indices):
        det, sign = apply_excitation(mu, ref)
        out[a] = sign * v[pos[det.mask]]
    return out


def tcc_residual(t: AmplitudeVector, t_cas: AmplitudeVector, ints: IntegralSet,
                 split: BasisSplit, scheme: TruncationScheme) -> AmplitudeVector:
    """f(t; t^CAS) restricted to the truncated index set."""
    _check_spaces(t, t_cas, split)
    basis = split.basis
    indices = enumerate_truncated_space(split, scheme)
    v = _transformed_reference(t, t_cas, ints, basis)
    comps = _project(v, indices, basis)
    return AmplitudeVector(
        SPACE_TRUNCATED,
        {mu: float(c) for mu, c in zip(indices, comps)},
        scheme=scheme.describe(),
    )


def tcc_energy(t: AmplitudeVector, t_cas: AmplitudeVector, ints: IntegralSet,
               split: BasisSplit) -> float:
    """<phi_0, e^{-T^CAS} e^{-T} H e^{T} e^{T^CAS} phi_0>."""
    _check_spaces(t, t_cas, split)
    basis = split.basis
    v = _transformed_reference(t, t_cas, ints, basis)
    return float(v[_reference_position(basis)])


# ---------------------------------------------------------------------------
# FCI amplitude splitting
# ---------------------------------------------------------------------------

def split_amplitudes(t_full: AmplitudeVector, split: BasisSplit
                     ) -> tuple[AmplitudeVector, AmplitudeVector]:
    """Partition full-space amplitudes into (t^CAS, t^ext) under the split."""
    if t_full.space != SPACE_FULL:
        raise SpaceMismatchError(f"expected a full-space vector, got {t_full.space!r}")
    cas, ext = {}, {}
    for mu, val in t_full.entries.items():
        (cas if classify_excitation(mu, split) == "cas" else ext)[mu] = val
    return AmplitudeVector(SPACE_CAS, cas), AmplitudeVector(SPACE_EXT, ext)


# ---------------------------------------------------------------------------
# Quasi-Newton solve
# ---------------------------------------------------------------------------

def _diis_extrapolate(trials: list[np.ndarray], errors: list[np.ndarray]) -> np.ndarray:
    m = len(trials)
    b = np.empty((m + 1, m + 1))
    b[:m, :m] = np.array([[float(e1 @ e2) for e2 in errors] for e1 in errors])
    b[m, :] = -1.0
    b[:, m] = -1.0
    b[m, m] = 0.0
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    coef, *_ = np.linalg.lstsq(b, rhs, rcond=None)
    return sum(c * t for c, t in zip(coef[:m], trials))


def solve_tcc(t_cas: AmplitudeVector, ints: IntegralSet, split: BasisSplit,
              fock: FockSpectrum, config: Optional[TccConfig] = None) -> TccResult:
    """Damped quasi-Newton iteration t <- t - damping * D^{-1} f(t; t^CAS).

    D = diag(eps_mu) over the truncated index set; requires all eps_mu
    positive. Divergence guard: abort when the weighted amplitude norm
    exceeds 1e3 (the underlying theory is local, runaway iterates are
    reported rather than truncated).
    """
    if config is None:
        config = TccConfig()
    basis = split.basis
    scheme = config.truncation
    indices = enumerate_truncated_space(split, scheme)

    if not indices:
        # k = K (or an empty truncation): nothing to solve
        t = AmplitudeVector(SPACE_TRUNCATED, {}, scheme=scheme.describe())
        energy = tcc_energy(t, t_cas, ints, split)
        return TccResult(t, energy, [(0, 0.0, 0.0, energy)], True, 0)

    eps = np.array([fock.epsilon_of(mu) for mu in indices])
    if eps.min() <= 0.0:
        raise GapViolationError(
            f"min eps_mu = {eps.min():.6e} <= 0 over the truncated index set"
        )

    def to_av(vec: np.ndarray) -> AmplitudeVector:
        return AmplitudeVector(
            SPACE_TRUNCATED,
            {mu: float(x) for mu, x in zip(indices, vec)},
            scheme=scheme.describe(),
        )

    t_vec = np.zeros(len(indices))
    history: list[tuple[int, float, float, float]] = []
    trials: list[np.ndarray] = []
    errs: list[np.ndarray] = []
    converged = False
    diverged = False
    it = 0

    for it in range(1, config.max_iterations + 1):
        t = to_av(t_vec)
        v = _transformed_reference(t, t_cas, ints, basis)
        r_vec = _project(v, indices, basis)
        energy = float(v[_reference_position(basis)])
        l2 = float(np.linalg.norm(r_vec))
        vnorm = float(np.sqrt((eps * t_vec**2).sum()))
        history.append((it, l2, float(np.sqrt((r_vec**2 / eps).sum())), energy))

        if l2 <= config.tolerance:
            converged = True
            break
        if vnorm > DIVERGENCE_LIMIT:
            diverged = True
            break

        step = -config.damping * r_vec / eps
        trial = t_vec + step
        if config.diis:
            trials.append(trial)
            errs.append(step)
            if len(trials) > config.diis:
                trials.pop(0)
                errs.pop(0)
            if len(trials) > 1:
                trial = _diis_extrapolate(trials, errs)
        t_vec = trial

    t = to_av(t_vec)
    energy = tcc_energy(t, t_cas, ints, split)
    return TccResult(t, energy, history, converged, it, diverged)
