"""Second-quantized Hamiltonians on the determinant space.

Covers integral ingestion (FCIDUMP read/write), two built-in model
generators, Slater-Condon matrix elements, the Fock/fluctuation
splitting H = F + W, and dense/matrix-free application.

Spin convention: spatial orbital p in 1..n_spatial expands to
spin-orbitals 2p-1 (up) and 2p (down). Two-electron integrals are kept
in chemists' notation (pq|rs) over spatial orbitals.

The Fock operator used throughout is the *diagonal* of the spin-orbital
Fock matrix built at the reference; all off-diagonal pieces are
absorbed into W so that H = F_diag + W holds exactly and the identity
F phi_mu = (Lambda0 + eps_mu) phi_mu is exact rather than approximate.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .determinants import (
    Determinant,
    ExcitationIndex,
    OrbitalBasis,
    enumerate_determinants,
)
from .errors import (
    DimensionLimitError,
    DimensionMismatchError,
    DuplicateCanonicalEntryError,
    IndexOutOfRangeError,
    MalformedHeaderError,
    SizeLimitError,
)

SYMMETRY_8FOLD = "8-fold"
SYMMETRY_4FOLD = "4-fold"

MAX_DENSE_DIM = 20_000
MAX_MODEL_LEVELS = 10


class NonCanonicalOrbitalsWarning(UserWarning):
    """The reference orbitals do not diagonalize the Fock matrix."""


@dataclass
class IntegralSet:
    """Spatial-orbital integrals h_pq, (pq|rs) and a scalar core energy."""

    n_spatial: int
    h: np.ndarray
    g: np.ndarray
    e_core: float = 0.0
    n_electrons: Optional[int] = None
    source: str = "MODEL"
    symmetry: str = SYMMETRY_8FOLD
    _dense_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_spatial
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.h.shape != (n, n):
            raise DimensionMismatchError(f"h must be {n}x{n}, got {self.h.shape}")
        if self.g.shape != (n, n, n, n):
            raise DimensionMismatchError(f"g must be {(n,) * 4}, got {self.g.shape}")

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial

    def spin_h(self, P: int, Q: int) -> float:
        """One-electron integral between spin-orbitals (1-based)."""
        if (P - Q) & 1:
            return 0.0
        return float(self.h[(P - 1) // 2, (Q - 1) // 2])

    def antisymmetrized(self, P: int, Q: int, R: int, S: int) -> float:
        """<PQ||RS> in physicists' notation over spin-orbitals."""
        return self._phys(P, Q, R, S) - self._phys(P, Q, S, R)

    def _phys(self, P: int, Q: int, R: int, S: int) -> float:
        # <PQ|RS> = (pr|qs) with spin conservation on (P,R) and (Q,S)
        if (P - R) & 1 or (Q - S) & 1:
            return 0.0
        p, q, r, s = (P - 1) // 2, (Q - 1) // 2, (R - 1) // 2, (S - 1) // 2
        return float(self.g[p, r, q, s])


# ---------------------------------------------------------------------------
# FCIDUMP interchange
# ---------------------------------------------------------------------------

_HEADER_KV = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=(?:,?\s*[A-Za-z0-9_]+\s*=)|$)")


def _eightfold_indices(p, q, r, s):
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def parse_fcidump(stream: TextIO | str) -> IntegralSet:
    """Read a Molpro-style FCIDUMP file into an IntegralSet.

    All eight permutational images of each (ij|kl) record are folded in;
    conflicting duplicates beyond 1e-12 are rejected. Fortran D-exponents
    are accepted. ORBSYM/ISYM are validated but not exploited.
    """
    text = stream if isinstance(stream, str) else stream.read()
    m = re.search(r"&(?:FCI|fci)(.*?)(?:&END|/)", text, re.S)
    if m is None:
        raise MalformedHeaderError("no &FCI ... &END/ header found")
    header, body = m.group(1), text[m.end():]

    fields = {}
    for key, val in _HEADER_KV.findall(header.replace("\n", " ")):
        fields[key.upper()] = val.strip().rstrip(",").strip()
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except KeyError as exc:
        raise MalformedHeaderError(f"missing header field {exc}") from exc
    except ValueError as exc:
        raise MalformedHeaderError(f"non-integer header field: {exc}") from exc
    if norb < 1 or nelec < 0:
        raise MalformedHeaderError(f"bad NORB/NELEC: {norb}/{nelec}")
    if "ORBSYM" in fields and fields["ORBSYM"]:
        syms = [s for s in fields["ORBSYM"].replace(",", " ").split() if s]
        if len(syms) not in (0, norb):
            raise MalformedHeaderError(
                f"ORBSYM lists {len(syms)} entries for NORB={norb}"
            )

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    h_seen = np.zeros((norb, norb), dtype=bool)
    g_seen = np.zeros((norb, norb, norb, norb), dtype=bool)
    e_core = 0.0
    core_seen = False

    for lineno, raw in enumerate(body.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise MalformedHeaderError(f"record line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise MalformedHeaderError(f"record line {lineno}: {exc}") from exc
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise IndexOutOfRangeError(f"record line {lineno}: index {idx} > NORB={norb}")
        if i == j == k == l == 0:
            if core_seen and abs(e_core - value) > 1e-12:
                raise DuplicateCanonicalEntryError("conflicting core-energy records")
            e_core, core_seen = value, True
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise IndexOutOfRangeError(
                    f"record line {lineno}: unsupported record shape ({i},{j},{k},{l})"
                )
            a, b = i - 1, j - 1
            if (h_seen[a, b] or h_seen[b, a]) and abs(h[a, b] - value) > 1e-12:
                raise DuplicateCanonicalEntryError(f"conflicting h({i},{j}) records")
            h[a, b] = h[b, a] = value
            h_seen[a, b] = h_seen[b, a] = True
        elif 0 in (i, j, k, l):
            raise IndexOutOfRangeError(
                f"record line {lineno}: unsupported record shape ({i},{j},{k},{l})"
            )
        else:
            for a, b, c, d in _eightfold_indices(i - 1, j - 1, k - 1, l - 1):
                if g_seen[a, b, c, d] and abs(g[a, b, c, d] - value) > 1e-12:
                    raise DuplicateCanonicalEntryError(
                        f"conflicting (ij|kl) records at ({i},{j},{k},{l})"
                    )
                g[a, b, c, d] = value
                g_seen[a, b, c, d] = True

    return IntegralSet(norb, h, g, e_core, n_electrons=nelec, source="FCIDUMP")


def write_fcidump(ints: IntegralSet, stream: TextIO, ms2: int = 0) -> None:
    """Write an IntegralSet in canonical FCIDUMP order.

    Canonical order: two-electron records first with ascending compound
    index over i>=j, k>=l, (ij)>=(kl); then one-electron records with
    i>=j; then the core energy. Requires full 8-fold symmetry.
    """
    if ints.symmetry != SYMMETRY_8FOLD:
        raise DimensionMismatchError(
            "FCIDUMP stores a single value per 8-fold orbit; "
            f"integrals declare {ints.symmetry} symmetry"
        )
    n = ints.n_spatial
    nelec = ints.n_electrons if ints.n_electrons is not None else 0
    orbsym = ",".join(["1"] * n)
    stream.write(f"&FCI NORB={n},NELEC={nelec},MS2={ms2},\n")
    stream.write(f"  ORBSYM={orbsym},\n  ISYM=1,\n&END\n")

    def rec(value, i, j, k, l):
        stream.write(f" {value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}\n")

    for i in range(1, n + 1):
        for j in range(1, i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(1, i + 1):
                for l in range(1, k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = ints.g[i - 1, j - 1, k - 1, l - 1]
                    if v != 0.0:
                        rec(v, i, j, k, l)
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            if ints.h[i - 1, j - 1] != 0.0:
                rec(ints.h[i - 1, j - 1], i, j, 0, 0)
    rec(ints.e_core, 0, 0, 0, 0)


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------

def hubbard_model(n_sites: int, t_hop: float, u: float, n_electrons: Optional[int] = None) -> IntegralSet:
    """Open-boundary 1D Hubbard chain in the site basis.

    h has -t_hop on nearest-neighbour bonds; (pp|pp) = u gives the
    on-site repulsion U n_up n_down per site.
    """
    if n_sites > MAX_MODEL_LEVELS:
        raise SizeLimitError(f"n_sites={n_sites} exceeds {MAX_MODEL_LEVELS}")
    h = np.zeros((n_sites, n_sites))
    for p in range(n_sites - 1):
        h[p, p + 1] = h[p + 1, p] = -t_hop
    g = np.zeros((n_sites,) * 4)
    for p in range(n_sites):
        g[p, p, p, p] = u
    if n_electrons is None:
        n_electrons = n_sites  # half filling
    return IntegralSet(n_sites, h, g, 0.0, n_electrons=n_electrons, source="MODEL")


def pairing_model(n_levels: int, g_pair: float, spacing: float = 1.0,
                  n_electrons: Optional[int] = None) -> IntegralSet:
    """Picket-fence pairing (reduced BCS) model.

    Levels at spacing*(p-1), each doubly degenerate in spin, with the
    pair-hopping interaction -g_pair * sum_{pq} P+_p P_q where
    P+_p = a+_{p,up} a+_{p,down}. In chemists' notation this is
    (pq|rs) = -g_pair * delta_{pr} delta_{qs}, which carries only the
    particle-exchange 4-fold symmetry, not the real-orbital 8-fold one.
    """
    if n_levels > MAX_MODEL_LEVELS:
        raise SizeLimitError(f"n_levels={n_levels} exceeds {MAX_MODEL_LEVELS}")
    h = np.diag([spacing * p for p in range(n_levels)]).astype(float)
    g = np.zeros((n_levels,) * 4)
    for p in range(n_levels):
        for q in range(n_levels):
            g[p, q, p, q] = -g_pair
    if n_electrons is None:
        n_electrons = n_levels  # half filling in spin-orbitals
    sym = SYMMETRY_8FOLD if g_pair == 0.0 else SYMMETRY_4FOLD
    return IntegralSet(n_levels, h, g, 0.0, n_electrons=n_electrons, source="MODEL", symmetry=sym)


def rotate_orbitals(ints: IntegralSet, c: np.ndarray) -> IntegralSet:
    """Transform integrals by an orthogonal spatial-orbital rotation C.

    New orbital q is sum_p C[p, q] * old orbital p.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (ints.n_spatial, ints.n_spatial):
        raise DimensionMismatchError("rotation matrix has wrong shape")
    if not np.allclose(c.T @ c, np.eye(ints.n_spatial), atol=1e-10):
        raise DimensionMismatchError("rotation matrix is not orthogonal")
    h = c.T @ ints.h @ c
    g = np.einsum("pqrs,pa,qb,rc,sd->abcd", ints.g, c, c, c, c, optimize=True)
    return IntegralSet(ints.n_spatial, h, g, ints.e_core,
                       n_electrons=ints.n_electrons, source=ints.source,
                       symmetry=ints.symmetry)


def canonicalize_core(ints: IntegralSet) -> tuple[IntegralSet, np.ndarray]:
    """Rotate to the eigenbasis of the one-electron (core) Hamiltonian.

    A single diagonalization, no self-consistency loop. Returns the
    rotated integrals and the rotation matrix. Useful for site-basis
    models whose bare h is off-diagonal (e.g. Hubbard chains), where the
    reference determinant should occupy the lowest core orbitals.
    """
    _, c = np.linalg.eigh(ints.h)
    # fix signs for determinism: largest-magnitude entry of each column positive
    for j in range(c.shape[1]):
        i = int(np.argmax(np.abs(c[:, j])))
        if c[i, j] < 0:
            c[:, j] = -c[:, j]
    return rotate_orbitals(ints, c), c


# ---------------------------------------------------------------------------
# Slater-Condon matrix elements
# ---------------------------------------------------------------------------

def _align_phase(d1: Determinant, d2: Determinant,
                 removed: list[int], added: list[int]) -> int:
    """Parity of bringing d2 into maximal coincidence with d1.

    Standard position-parity bookkeeping: each (removed, added) pair
    contributes (-1)^(occupied orbitals strictly between them in d2,
    after earlier substitutions).
    """
    mask = d2.mask
    sign = 1
    for r, a in zip(removed, added):
        lo, hi = (r, a) if r < a else (a, r)
        between = (mask >> lo) & ((1 << (hi - lo - 1)) - 1)
        if between.bit_count() & 1:
            sign = -sign
        mask = (mask & ~(1 << (a - 1))) | (1 << (r - 1))
    return sign


def matrix_element(d1: Determinant, d2: Determinant, ints: IntegralSet) -> float:
    """<d1|H|d2> by the Slater-Condon rules, including e_core on the diagonal."""
    occ1, occ2 = set(d1.occ), set(d2.occ)
    if len(occ1) != len(occ2):
        raise DimensionMismatchError("determinants have different particle number")
    diff1 = sorted(occ1 - occ2)
    diff2 = sorted(occ2 - occ1)
    n_diff = len(diff1)
    if n_diff > 2:
        return 0.0

    if n_diff == 0:
        val = ints.e_core
        occ = d1.occ
        for P in occ:
            val += ints.spin_h(P, P)
        for a in range(len(occ)):
            for b in range(a + 1, len(occ)):
                val += ints.antisymmetrized(occ[a], occ[b], occ[a], occ[b])
        return val

    if n_diff == 1:
        (P,), (Q,) = diff1, diff2
        sign = _align_phase(d1, d2, [P], [Q])
        val = ints.spin_h(P, Q)
        for R in sorted(occ1 & occ2):
            val += ints.antisymmetrized(P, R, Q, R)
        return sign * val

    (P, Q), (R, S) = diff1, diff2
    sign = _align_phase(d1, d2, [P, Q], [R, S])
    return sign * ints.antisymmetrized(P, Q, R, S)


# ---------------------------------------------------------------------------
# Fock splitting
# ---------------------------------------------------------------------------

@dataclass
class FockSpectrum:
    """Spin-orbital Fock data at the reference determinant."""

    lambdas: np.ndarray
    lambda0: float
    off_diag_norm: float
    matrix: np.ndarray

    def epsilon_of(self, mu: ExcitationIndex) -> float:
        """eps_mu = sum(lambda_A) - sum(lambda_I)."""
        return float(
            sum(self.lambdas[a - 1] for a in mu.particles)
            - sum(self.lambdas[i - 1] for i in mu.holes)
        )

    def diag_energy(self, det: Determinant) -> float:
        """Diagonal Fock action: sum of lambda over occupied orbitals."""
        return float(sum(self.lambdas[p - 1] for p in det.occ))


def fock_matrix(ints: IntegralSet, basis: OrbitalBasis) -> FockSpectrum:
    """Build the spin-orbital Fock matrix f_PQ = h_PQ + sum_I <PI||QI>.

    I runs over the reference occupation 1..N. lambda_P = f_PP; the
    off-diagonal Frobenius norm is recorded, and a warning is emitted
    when it is non-negligible since the diagonal-action identity then
    only holds for the retained diagonal part.
    """
    K = ints.n_spin_orbitals
    if basis.n_orbitals != K:
        raise DimensionMismatchError(
            f"basis has K={basis.n_orbitals}, integrals give K={K}"
        )
    f = np.zeros((K, K))
    occ = list(basis.occupied)
    for P in range(1, K + 1):
        for Q in range(P, K + 1):
            v = ints.spin_h(P, Q)
            for I in occ:
                v += ints.antisymmetrized(P, I, Q, I)
            f[P - 1, Q - 1] = f[Q - 1, P - 1] = v
    lambdas = np.diag(f).copy()
    off = f - np.diag(lambdas)
    off_norm = float(np.linalg.norm(off))
    if off_norm > 1e-8:
        warnings.warn(
            f"reference orbitals are not canonical (off-diagonal Fock norm {off_norm:.3e}); "
            "the diagonal Fock action is exact only for the retained diagonal",
            NonCanonicalOrbitalsWarning,
            stacklevel=2,
        )
    return FockSpectrum(lambdas, float(lambdas[: basis.n_electrons].sum()), off_norm, f)


# ---------------------------------------------------------------------------
# Dense build and application
# ---------------------------------------------------------------------------

def build_dense_hamiltonian(ints: IntegralSet, basis: OrbitalBasis) -> np.ndarray:
    """Dense symmetric H over enumerate_determinants order (cached)."""
    key = (basis.n_orbitals, basis.n_electrons)
    cached = ints._dense_cache.get(key)
    if cached is not None:
        return cached
    dets = enumerate_determinants(basis)
    dim = len(dets)
    if dim > MAX_DENSE_DIM:
        raise DimensionLimitError(f"determinant space dim {dim} exceeds {MAX_DENSE_DIM}")
    ham = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            v = matrix_element(dets[a], dets[b], ints)
            ham[a, b] = ham[b, a] = v
    ints._dense_cache[key] = ham
    return ham


def apply_hamiltonian(v: np.ndarray, ints: IntegralSet, basis: OrbitalBasis) -> np.ndarray:
    """H @ v with v indexed by enumerate_determinants order."""
    ham = build_dense_hamiltonian(ints, basis)
    v = np.asarray(v, dtype=float)
    if v.shape != (ham.shape[0],):
        raise DimensionMismatchError(
            f"vector length {v.shape} does not match determinant space dim {ham.shape[0]}"
        )
    return ham @ v


def fock_diagonal_vector(fock: FockSpectrum, basis: OrbitalBasis) -> np.ndarray:
    """Diagonal of F in determinant order: Lambda0 + eps_mu per determinant."""
    return np.array([fock.diag_energy(d) for d in enumerate_determinants(basis)])


def fluctuation_apply(v: np.ndarray, ints: IntegralSet, fock: FockSpectrum,
                      basis: OrbitalBasis) -> np.ndarray:
    """W @ v where W = H - F_diag, the exact complement of the diagonal Fock."""
    return apply_hamiltonian(v, ints, basis) - fock_diagonal_vector(fock, basis) * np.asarray(v, dtype=float)
