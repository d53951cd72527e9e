"""Numerical verification of the workbench's analytical backbone.

Reports and probes covering: spectral gap bookkeeping, the ball-local
smallness condition on the off-CAS fluctuation map, sampled
monotonicity/Lipschitz constants, the Fock-norm identity, the full
energy-error decomposition with adjoint (dual) solves, the second-order
error representation, and quadratic error-scaling studies over nested
truncation families.

All sampling-based quantities are seeded and deterministic; they are
lower/upper *estimates* of constants defined as infima/suprema over
continua and are labelled as such.
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
    SPACE_TRUNCATED,
    ExcitationIndex,
    enumerate_determinants,
    v_ext_norm,
)
from .errors import (
    InsufficientPointsError,
    MissingReferenceError,
    SingularJacobianError,
    SolverFailureError,
)
from .exact import (
    CiVector,
    _det_table,
    _reference_position,
    cas_fci_solve,
    ci_to_cluster,
    exp_cluster_apply,
    fci_solve,
)
from .hamiltonian import (
    FockSpectrum,
    IntegralSet,
    build_dense_hamiltonian,
    fock_diagonal_vector,
)
from .tcc import (
    MODE_FULL,
    TccConfig,
    TruncationScheme,
    _project,
    _transformed_reference,
    enumerate_truncated_space,
    solve_tcc,
    split_amplitudes,
    tcc_energy,
)

REFERENCE_RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# Gap report
# ---------------------------------------------------------------------------

@dataclass
class GapReport:
    eps0: float            # lambda_{k+1} - lambda_k
    eps0_ext: float        # lambda_{k+1} - lambda_N
    homo_lumo: float       # lambda_{N+1} - lambda_N
    min_eps_ext: float     # min eps_mu over the external index set
    all_external_positive: bool


def gap_report(fock: FockSpectrum, split: BasisSplit) -> GapReport:
    """Gap quantities from the Fock diagonal; negative gaps are reported, not raised."""
    lam = fock.lambdas
    basis = split.basis
    n, k, kk = basis.n_electrons, split.k, basis.n_orbitals
    eps0 = float(lam[k] - lam[k - 1]) if k < kk else np.inf
    eps0_ext = float(lam[k] - lam[n - 1]) if k < kk else np.inf
    homo_lumo = float(lam[n] - lam[n - 1])
    ext = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    if ext:
        min_eps = min(fock.epsilon_of(mu) for mu in ext)
    else:
        min_eps = np.inf
    return GapReport(eps0, eps0_ext, homo_lumo, float(min_eps), min_eps > 0.0)


# ---------------------------------------------------------------------------
# Shared dense helpers
# ---------------------------------------------------------------------------

def _reference_vector(basis: OrbitalBasis) -> np.ndarray:
    v = np.zeros(len(enumerate_determinants(basis)))
    v[_reference_position(basis)] = 1.0
    return v


def _cas_projector_diag(basis: OrbitalBasis, split: BasisSplit) -> np.ndarray:
    """0/1 diagonal of the projector onto determinants inside the CAS."""
    return np.array([
        1.0 if (d.occ[-1] if d.occ else 0) <= split.k else 0.0
        for d in enumerate_determinants(basis)
    ])


def _exp_matrix(t: AmplitudeVector, basis: OrbitalBasis, sign: int) -> np.ndarray:
    """Dense matrix of e^{sign*T} (columns by application to unit vectors)."""
    dim = len(enumerate_determinants(basis))
    out = np.empty((dim, dim))
    e = np.zeros(dim)
    for j in range(dim):
        e[:] = 0.0
        e[j] = 1.0
        out[:, j] = exp_cluster_apply(t, e, basis, sign=sign)
    return out


def _embed(t: AmplitudeVector, indices: list[ExcitationIndex]) -> np.ndarray:
    return np.array([t.get(mu) for mu in indices])


def _to_amplitudes(vec: np.ndarray, indices: list[ExcitationIndex],
                   scheme_desc: str = "full") -> AmplitudeVector:
    return AmplitudeVector(
        SPACE_TRUNCATED,
        {mu: float(x) for mu, x in zip(indices, vec)},
        scheme=scheme_desc,
    )


def _residual_vector(t_vec: np.ndarray, indices, t_cas, ints, basis):
    t = _to_amplitudes(t_vec, indices)
    v = _transformed_reference(t, t_cas, ints, basis)
    return _project(v, indices, basis), v


# ---------------------------------------------------------------------------
# Monotonicity / Lipschitz sampling probe
# ---------------------------------------------------------------------------

@dataclass
class MonotonicityProbe:
    gamma_hat: float       # min <df, dt> / ||dt||_V^2 (V-weighted denominator)
    gamma_hat_l2: float    # min <df, dt> / ||dt||_2^2 (plain denominator)
    l_hat: float           # max ||df||_V' / ||dt||_V
    delta: float
    samples: int
    seed: int


def _require_reference(t_star: Optional[AmplitudeVector], t_cas, ints, split,
                       indices) -> np.ndarray:
    if t_star is None:
        raise MissingReferenceError("a converged reference amplitude vector is required")
    t_vec = _embed(t_star, indices)
    r, _ = _residual_vector(t_vec, indices, t_cas, ints, split.basis)
    if float(np.linalg.norm(r)) > REFERENCE_RESIDUAL_TOL:
        raise MissingReferenceError(
            f"reference residual {np.linalg.norm(r):.3e} exceeds {REFERENCE_RESIDUAL_TOL}"
        )
    return t_vec


def monotonicity_probe(t_star: AmplitudeVector, t_cas: AmplitudeVector,
                       ints: IntegralSet, split: BasisSplit, fock: FockSpectrum,
                       delta: float = 0.1, samples: int = 20, seed: int = 0
                       ) -> MonotonicityProbe:
    """Sampled monotonicity and Lipschitz constants of f on B_delta(t_*).

    Random pairs inside the ball are complemented by deterministic
    coordinate-direction probes (t_* + h e_mu vs t_*), so that in the
    linear (W = 0) case the plain-denominator estimate gamma_hat_l2
    attains min eps_mu exactly.
    """
    basis = split.basis
    indices = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    t_vec = _require_reference(t_star, t_cas, ints, split, indices)
    eps = np.array([fock.epsilon_of(mu) for mu in indices])
    rng = np.random.default_rng(seed)

    pairs = []
    for _ in range(samples):
        def point():
            u = rng.standard_normal(len(indices))
            u *= (delta * rng.uniform()) / np.sqrt((eps * u**2).sum())
            return t_vec + u
        pairs.append((point(), point()))
    for a in range(len(indices)):
        step = np.zeros(len(indices))
        step[a] = delta / np.sqrt(eps[a])
        pairs.append((t_vec + step, t_vec))

    def f_of(vec):
        r, _ = _residual_vector(vec, indices, t_cas, ints, basis)
        return r

    g_v = np.inf
    g_l2 = np.inf
    l_hat = 0.0
    for v1, v2 in pairs:
        df = f_of(v1) - f_of(v2)
        dt = v1 - v2
        inner = float(df @ dt)
        vsq = float((eps * dt**2).sum())
        lsq = float((dt**2).sum())
        g_v = min(g_v, inner / vsq)
        g_l2 = min(g_l2, inner / lsq)
        l_hat = max(l_hat, float(np.sqrt((df**2 / eps).sum()) / np.sqrt(vsq)))
    return MonotonicityProbe(float(g_v), float(g_l2), float(l_hat),
                             delta, samples, seed)


# ---------------------------------------------------------------------------
# Assumption-(B)-style smallness report
# ---------------------------------------------------------------------------

@dataclass
class AssumptionReport:
    gap: GapReport
    omega0: float          # <phi0, W_CAS phi0>
    omega_cas: float       # sum |t_sigma^CAS eps_sigma|
    lipschitz_star: float  # sampled Lipschitz estimate of the O-map
    margin: float          # eps0 - omega0 - omega_cas - lipschitz_star
    gamma_hat: float
    gamma_hat_l2: float
    l_hat: float
    delta: float
    samples: int
    seed: int


def assumption_b_report(t_star: AmplitudeVector, t_cas: AmplitudeVector,
                        ints: IntegralSet, split: BasisSplit, fock: FockSpectrum,
                        delta: float = 0.1, samples: int = 20, seed: int = 0
                        ) -> AssumptionReport:
    """Smallness margin eps0 - omega0 - Omega_CAS - L_* with sampled L_*.

    The off-CAS map O(t) = (e^{-T} A e^{T} - A) phi_0 with
    A = W_CAS - P W_CAS P, W_CAS = e^{-T^CAS} W e^{T^CAS}, is sampled on
    pairs in the delta-ball around t_*; L_* is the largest observed
    ratio ||O(t1)-O(t2)||_2 / ||t1-t2||_2. Also embeds the monotonicity
    probe for the same ball and seed.
    """
    basis = split.basis
    indices = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    t_vec = _require_reference(t_star, t_cas, ints, split, indices)
    eps = np.array([fock.epsilon_of(mu) for mu in indices])

    ham = build_dense_hamiltonian(ints, basis)
    w = ham - np.diag(fock_diagonal_vector(fock, basis))
    e_plus = _exp_matrix(t_cas, basis, +1)
    e_minus = _exp_matrix(t_cas, basis, -1)
    w_cas = e_minus @ w @ e_plus
    p = _cas_projector_diag(basis, split)
    a = w_cas - (p[:, None] * w_cas) * p[None, :]

    ref = _reference_vector(basis)
    omega0 = float(ref @ (w_cas @ ref))
    omega_cas = float(sum(abs(val * fock.epsilon_of(s))
                          for s, val in t_cas.sorted_items()))

    a_ref = a @ ref

    def o_map(vec):
        t = _to_amplitudes(vec, indices)
        inner = a @ exp_cluster_apply(t, ref, basis, sign=+1)
        return exp_cluster_apply(t, inner, basis, sign=-1) - a_ref

    rng = np.random.default_rng(seed)
    l_star = 0.0
    for _ in range(samples):
        pts = []
        for _ in range(2):
            u = rng.standard_normal(len(indices))
            u *= (delta * rng.uniform()) / np.sqrt((eps * u**2).sum())
            pts.append(t_vec + u)
        num = float(np.linalg.norm(o_map(pts[0]) - o_map(pts[1])))
        den = float(np.linalg.norm(pts[0] - pts[1]))
        l_star = max(l_star, num / den)

    gaps = gap_report(fock, split)
    probe = monotonicity_probe(t_star, t_cas, ints, split, fock,
                               delta=delta, samples=samples, seed=seed)
    margin = gaps.eps0 - omega0 - omega_cas - l_star
    return AssumptionReport(gaps, omega0, omega_cas, float(l_star), float(margin),
                            probe.gamma_hat, probe.gamma_hat_l2, probe.l_hat,
                            delta, samples, seed)


# ---------------------------------------------------------------------------
# Fock-norm identity
# ---------------------------------------------------------------------------

@dataclass
class FockNormCheck:
    deviation: float       # | ||t||_V - ||T phi0||_F |
    t_vext_norm: float
    t_phi0_fock_norm: float
    operator_norm: float   # Fock-norm-induced norm of T
    rho: float             # operator_norm / ||t||_V


def fock_norm_identity_check(t: AmplitudeVector, fock: FockSpectrum,
                             basis: OrbitalBasis) -> FockNormCheck:
    """Check ||t||_V = sqrt(<T phi0, (F - Lambda0) T phi0>) with explicit F.

    Also reports the operator-norm ratio rho(t) = ||T||_op / ||t||_V.
    The operator norm uses the Fock seminorm sqrt(<w,(F-Lambda0)w>) on
    the excited determinants and unit weight on the reference component
    (the reference has zero Fock seminorm), realized as the spectral
    norm of the weighted matrix D^{1/2} A Dtilde^{-1/2}. A single-entry
    t has rho = 1 when no other determinant couples, and rho >= 1
    always since the reference column alone realizes ||t||_V.
    """
    from .exact import apply_cluster  # local import to avoid cycle noise

    dets = enumerate_determinants(basis)
    refpos = _reference_position(basis)
    diag = np.array([fock.diag_energy(d) for d in dets]) - fock.lambda0

    t_norm = v_ext_norm(t, fock)
    ref = _reference_vector(basis)
    t_phi0 = apply_cluster(t, ref, basis)
    fock_norm = float(np.sqrt(max(0.0, t_phi0 @ (diag * t_phi0))))
    deviation = abs(t_norm - fock_norm)

    # weighted operator matrix: domain = reference (+) excited, codomain = excited
    dim = len(dets)
    exc = [i for i in range(dim) if i != refpos]
    cols = [refpos] + exc
    a = np.zeros((dim, len(cols)))
    e = np.zeros(dim)
    for jcol, j in enumerate(cols):
        e[:] = 0.0
        e[j] = 1.0
        a[:, jcol] = apply_cluster(t, e, basis)
    a = a[exc, :]
    d_out = np.sqrt(np.maximum(diag[exc], 0.0))
    d_in = np.concatenate(([1.0], d_out))
    with np.errstate(divide="ignore", invalid="ignore"):
        m = (d_out[:, None] * a) / d_in[None, :]
    m[~np.isfinite(m)] = 0.0
    op_norm = float(np.linalg.norm(m, 2)) if m.size else 0.0
    rho = op_norm / t_norm if t_norm > 0 else np.inf
    return FockNormCheck(deviation, t_norm, fock_norm, op_norm, float(rho))


# ---------------------------------------------------------------------------
# Jacobian, dual solves
# ---------------------------------------------------------------------------

def tcc_jacobian(t: AmplitudeVector, t_cas: AmplitudeVector, ints: IntegralSet,
                 split: BasisSplit, indices: list[ExcitationIndex]
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact Jacobian J_{mu,nu} = (Df(t) e_nu)_mu, energy gradient, residual.

    Columns are evaluated through the commutator identity
    Df(t) S = <., e^{-T^CAS} [e^{-T} H e^{T}, S] e^{T^CAS} phi_0>
    (S commutes with e^{T^CAS}), which is exact on the finite space --
    no finite differences involved. The reference component of each
    column is the energy gradient E'(t) e_nu.
    """
    basis = split.basis
    ham = build_dense_hamiltonian(ints, basis)
    refpos = _reference_position(basis)

    t_vec = _embed(t, indices)
    v_base = _transformed_reference(_to_amplitudes(t_vec, indices), t_cas, ints, basis)
    r = _project(v_base, indices, basis)

    u0 = exp_cluster_apply(t_cas, _reference_vector(basis), basis, sign=+1)
    tt = _to_amplitudes(t_vec, indices)

    from .exact import apply_cluster

    n = len(indices)
    jac = np.empty((n, n))
    grad = np.empty(n)
    for col, nu in enumerate(indices):
        unit = AmplitudeVector(SPACE_TRUNCATED, {nu: 1.0})
        w = apply_cluster(unit, u0, basis)               # X_nu e^{T^CAS} phi_0
        w = exp_cluster_apply(tt, w, basis, sign=+1)
        w = ham @ w
        w = exp_cluster_apply(tt, w, basis, sign=-1)
        term1 = exp_cluster_apply(t_cas, w, basis, sign=-1)
        term2 = apply_cluster(unit, v_base, basis)       # X_nu (base vector)
        colvec = term1 - term2
        jac[:, col] = _project(colvec, indices, basis)
        grad[col] = colvec[refpos]
    return jac, grad, r


def solve_dual(t_d: AmplitudeVector, t_cas: AmplitudeVector, ints: IntegralSet,
               split: BasisSplit, scheme: TruncationScheme) -> AmplitudeVector:
    """Adjoint solve: z with <f'(t_d) u, z> = E'(t_d)(u) for all u in the space."""
    indices = enumerate_truncated_space(split, scheme)
    if not indices:
        return AmplitudeVector(SPACE_TRUNCATED, {}, scheme=scheme.describe())
    jac, grad, _ = tcc_jacobian(t_d, t_cas, ints, split, indices)
    svals = np.linalg.svd(jac, compute_uv=False)
    if svals[-1] <= 1e-12 * max(1.0, svals[0]):
        raise SingularJacobianError(
            f"adjoint system singular (smallest singular value {svals[-1]:.3e})"
        )
    z = np.linalg.solve(jac.T, grad)
    return _to_amplitudes(z, indices, scheme.describe())


# ---------------------------------------------------------------------------
# Error decomposition
# ---------------------------------------------------------------------------

@dataclass
class ErrorDecomposition:
    dE: float
    d_eps: float
    d_eps_cas: float
    d_eps_cas_star: float
    dE_cas: float
    triangle_slack: float
    e_fci: float
    e_truncated: float


def _solve_or_fail(t_cas, ints, split, fock, scheme, tol=1e-11, max_iterations=500,
                   damping=1.0, diis=8):
    config = TccConfig(max_iterations=max_iterations, tolerance=tol,
                       damping=damping, diis=diis, truncation=scheme)
    result = solve_tcc(t_cas, ints, split, fock, config)
    if not result.converged:
        raise SolverFailureError(
            f"sub-solve on {scheme.describe()} did not converge "
            f"(final residual {result.history[-1][1]:.3e})"
        )
    return result


def _as_cas_vector(t_full: AmplitudeVector) -> AmplitudeVector:
    return AmplitudeVector(SPACE_CAS, dict(t_full.entries))


def error_decomposition(ints: IntegralSet, split: BasisSplit, fock: FockSpectrum,
                        scheme: TruncationScheme, t_cas_source: str = "CAS_FCI",
                        noise: float = 0.0, seed: int = 0) -> ErrorDecomposition:
    """Split |E(t_d; t^CAS) - E_FCI| into truncation and CAS contributions.

    Computes the full-space root t_* of f(.; t^CAS), the root with the
    CAS-exact amplitudes, the truncated root t_d, and the FCI amplitude
    split, then every term of the triangle decomposition plus the
    explicit projected-Hamiltonian CAS error dE_cas.
    """
    basis = split.basis
    summary, states = fci_solve(ints, basis)
    e_fci = summary.ground_energy
    t_full = ci_to_cluster(states[0])
    t_star_cas, t_star_ext = split_amplitudes(t_full, split)

    _, cas_states = cas_fci_solve(ints, basis, split)
    t_fci_cas = _as_cas_vector(ci_to_cluster(cas_states[0]))

    if t_cas_source == "CAS_FCI":
        t_cas = t_fci_cas
    elif t_cas_source == "PERTURBED":
        rng = np.random.default_rng(seed)
        entries = {mu: val + noise * rng.standard_normal()
                   for mu, val in t_fci_cas.sorted_items()}
        t_cas = AmplitudeVector(SPACE_CAS, entries)
    else:
        raise ValueError(f"unknown t_cas_source {t_cas_source!r}")

    full = TruncationScheme(MODE_FULL)
    t_star = _solve_or_fail(t_cas, ints, split, fock, full).t
    t_tilde = _solve_or_fail(t_fci_cas, ints, split, fock, full).t
    t_d = _solve_or_fail(t_cas, ints, split, fock, scheme).t

    e_d = tcc_energy(t_d, t_cas, ints, split)
    e_star = tcc_energy(t_star, t_cas, ints, split)
    e_tilde = tcc_energy(t_tilde, t_fci_cas, ints, split)
    e_exact_pair = tcc_energy(t_star_ext, t_star_cas, ints, split)

    d_eps = abs(e_d - e_star)
    d_eps_cas = abs(e_star - e_tilde)
    d_eps_cas_star = abs(e_tilde - e_exact_pair)
    de = abs(e_d - e_exact_pair)

    # explicit projected-Hamiltonian CAS error
    ham = build_dense_hamiltonian(ints, basis)
    p = _cas_projector_diag(basis, split)
    php = (p[:, None] * ham) * p[None, :]
    ref = _reference_vector(basis)

    def php_energy(tc):
        v = exp_cluster_apply(tc, ref, basis, sign=+1)
        v = php @ v
        v = exp_cluster_apply(tc, v, basis, sign=-1)
        return float(v[_reference_position(basis)])

    de_cas = abs(php_energy(t_cas) - php_energy(t_fci_cas))

    return ErrorDecomposition(
        dE=de, d_eps=d_eps, d_eps_cas=d_eps_cas, d_eps_cas_star=d_eps_cas_star,
        dE_cas=de_cas,
        triangle_slack=d_eps + d_eps_cas + d_eps_cas_star - de,
        e_fci=e_fci, e_truncated=e_d,
    )


# ---------------------------------------------------------------------------
# Second-order error representation
# ---------------------------------------------------------------------------

@dataclass
class RepresentationCheck:
    remainder: float       # R in 2(E(t_*) - E(t_d)) = R + rho(z_*-z_d) + rho*(t_*-t_d)
    distance: float        # ||t_* - t_d||_V
    cubic_ratio: Optional[float]  # |R| / distance^3


def error_representation_check(t_d: AmplitudeVector, z_d: AmplitudeVector,
                               t_star: AmplitudeVector, z_star: AmplitudeVector,
                               t_cas: AmplitudeVector, ints: IntegralSet,
                               split: BasisSplit, fock: FockSpectrum
                               ) -> RepresentationCheck:
    """Residual of the second-order (dual-weighted) error identity.

    With primal residual rho(t_d)(u) = -<f(t_d), u> and dual residual
    rho*(t_d, z_d)(u) = E'(t_d)(u) - <Df(t_d) u, z_d>, the remainder

        R = 2(E(t_*) - E(t_d)) - rho(t_d)(z_*-z_d) - rho*(t_d,z_d)(t_*-t_d)

    is cubic in the primal/dual errors; it vanishes identically for a
    quadratic (linear-residual) problem.
    """
    indices = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    td = _embed(t_d, indices)
    zd = _embed(z_d, indices)
    ts = _embed(t_star, indices)
    zs = _embed(z_star, indices)

    e_star = tcc_energy(t_star, t_cas, ints, split)
    e_d = tcc_energy(_to_amplitudes(td, indices), t_cas, ints, split)

    jac, grad, f_d = tcc_jacobian(_to_amplitudes(td, indices), t_cas, ints,
                                  split, indices)
    rho_primal = float(-(f_d @ (zs - zd)))
    rho_dual = float(grad @ (ts - td) - (jac.T @ zd) @ (ts - td))
    remainder = 2.0 * (e_star - e_d) - rho_primal - rho_dual

    eps = np.array([fock.epsilon_of(mu) for mu in indices])
    dist = float(np.sqrt((eps * (ts - td) ** 2).sum()))
    ratio = abs(remainder) / dist**3 if dist > 1e-13 else None
    return RepresentationCheck(float(remainder), dist, ratio)


# ---------------------------------------------------------------------------
# Scaling studies
# ---------------------------------------------------------------------------

@dataclass
class ScalingRow:
    descriptor: str
    distance: float        # ||t_d - t_*||_V
    energy_error: float    # |E(t_d) - E(t_*)|
    dual_distance: float   # ||z_d - z_*||_V
    used_in_fit: bool = True


@dataclass
class ScalingStudy:
    rows: list[ScalingRow] = field(default_factory=list)
    slope: float = np.nan


def _fit_slope(rows: list[ScalingRow]) -> float:
    usable = [r for r in rows if r.used_in_fit]
    if len(usable) < 3:
        raise InsufficientPointsError(
            f"need at least 3 usable rows for a slope fit, have {len(usable)}"
        )
    x = np.log([r.distance for r in usable])
    y = np.log([r.energy_error for r in usable])
    return float(np.polyfit(x, y, 1)[0])


def quadratic_scaling_study(ints: IntegralSet, split: BasisSplit, fock: FockSpectrum,
                            t_cas: AmplitudeVector,
                            schemes: list[TruncationScheme]) -> ScalingStudy:
    """Energy error vs amplitude distance over a nested truncation family.

    For each truncation the primal and dual problems are solved; the
    fitted log-log slope of |E(t_d) - E(t_*)| against ||t_d - t_*||_V
    should approach 2. Rows at (numerically) zero distance are excluded
    from the fit.
    """
    basis = split.basis
    full = TruncationScheme(MODE_FULL)
    indices = enumerate_truncated_space(split, full)
    eps = np.array([fock.epsilon_of(mu) for mu in indices])

    t_star = _solve_or_fail(t_cas, ints, split, fock, full).t
    z_star = solve_dual(t_star, t_cas, ints, split, full)
    e_star = tcc_energy(t_star, t_cas, ints, split)
    ts = _embed(t_star, indices)
    zs = _embed(z_star, indices)

    study = ScalingStudy()
    for scheme in schemes:
        t_d = _solve_or_fail(t_cas, ints, split, fock, scheme).t
        z_d = solve_dual(t_d, t_cas, ints, split, scheme)
        td = _embed(t_d, indices)
        zd = _embed(z_d, indices)
        dist = float(np.sqrt((eps * (ts - td) ** 2).sum()))
        derr = abs(tcc_energy(t_d, t_cas, ints, split) - e_star)
        ddual = float(np.sqrt((eps * (zs - zd) ** 2).sum()))
        usable = dist > 1e-12 and derr > 0.0
        study.rows.append(ScalingRow(scheme.describe(), dist, derr, ddual, usable))
    study.slope = _fit_slope(study.rows)
    return study


def linear_limit_scaling_study(fock: FockSpectrum, split: BasisSplit,
                               seed: int = 0) -> ScalingStudy:
    """Quadratic-law study for the linear (W = 0) limit.

    With a vanishing fluctuation the true truncation error degenerates
    (t_* = t_d = 0 for every truncation), so the quadratic law is
    exhibited on the canonical quadratic surrogate built from the same
    Fock weights: residual f(t) = D (t - s) with D = diag(eps_mu) and a
    seeded source s, energy E(t) = (t-s)^T D (t-s). Truncated Galerkin
    solutions keep the retained components of s, hence

        |E(t_d) - E(t_*)| = ||t_d - t_*||_V^2

    exactly, and the fitted slope is 2 up to round-off.
    """
    indices = enumerate_truncated_space(split, TruncationScheme(MODE_FULL))
    eps = np.array([fock.epsilon_of(mu) for mu in indices])
    rng = np.random.default_rng(seed)
    source = rng.standard_normal(len(indices))

    ranks = sorted({mu.rank for mu in indices})
    study = ScalingStudy()
    for r in ranks:
        keep = np.array([mu.rank <= r for mu in indices])
        dropped = ~keep
        dist_sq = float((eps[dropped] * source[dropped] ** 2).sum())
        dist = float(np.sqrt(dist_sq))
        usable = dist > 1e-12
        study.rows.append(ScalingRow(f"rank:{r}", dist, dist_sq, 0.0, usable))
    study.slope = _fit_slope(study.rows)
    return study
