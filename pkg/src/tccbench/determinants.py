"""Fermionic occupation algebra on a finite spin-orbital basis.

Spin-orbitals are labelled 1..K. The reference determinant occupies
1..N. Determinants are stored as bit masks (bit p-1 <-> orbital p),
which caps K at 64 -- plenty for desk scale and enforced as a hard
limit.

Sign convention: an excitation index mu = (I_1..I_r -> A_1..A_r) is
realized as the ordered operator string

    a+_{A_1} a_{I_1} ... a+_{A_r} a_{I_r}

applied right to left with the standard creation/annihilation phase
(-1)^(number of occupied orbitals below the affected one). The
convention is not trusted by construction; the test suite checks it
against a dense 2^K occupation-tensor oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Optional

from .errors import NonPositiveWeightError, SpaceMismatchError

MAX_SPIN_ORBITALS = 64


@dataclass(frozen=True)
class OrbitalBasis:
    """K spin-orbitals, N electrons; orbitals 1..N define the reference."""

    n_orbitals: int
    n_electrons: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        k, n = self.n_orbitals, self.n_electrons
        if not 0 < n < k:
            raise ValueError(f"need 0 < N < K, got N={n}, K={k}")
        if k > MAX_SPIN_ORBITALS:
            raise ValueError(f"K={k} exceeds the hard limit of {MAX_SPIN_ORBITALS}")
        if self.labels is not None and len(self.labels) != k:
            raise ValueError("labels length must equal K")

    @property
    def reference(self) -> "Determinant":
        return Determinant(tuple(range(1, self.n_electrons + 1)))

    @property
    def occupied(self) -> range:
        return range(1, self.n_electrons + 1)

    @property
    def virtual(self) -> range:
        return range(self.n_electrons + 1, self.n_orbitals + 1)


@dataclass(frozen=True)
class BasisSplit:
    """CAS boundary: orbitals 1..k are CAS, k+1..K are external."""

    basis: OrbitalBasis
    k: int

    def __post_init__(self):
        if not self.basis.n_electrons <= self.k <= self.basis.n_orbitals:
            raise ValueError(
                f"need N <= k <= K, got k={self.k}, N={self.basis.n_electrons}, "
                f"K={self.basis.n_orbitals}"
            )


@dataclass(frozen=True)
class Determinant:
    """Canonically ordered occupied spin-orbital indices."""

    occ: tuple[int, ...]

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.occ, self.occ[1:])):
            raise ValueError(f"occupation not strictly increasing: {self.occ}")
        if self.occ and self.occ[0] < 1:
            raise ValueError("orbital indices are 1-based")

    @property
    def mask(self) -> int:
        m = 0
        for p in self.occ:
            m |= 1 << (p - 1)
        return m

    @classmethod
    def from_mask(cls, mask: int) -> "Determinant":
        occ = []
        p = 1
        while mask:
            if mask & 1:
                occ.append(p)
            mask >>= 1
            p += 1
        return cls(tuple(occ))

    def __contains__(self, orbital: int) -> bool:
        return orbital in self.occ

    def __len__(self) -> int:
        return len(self.occ)


@dataclass(frozen=True, order=True)
class ExcitationIndex:
    """Multi-index mu = (I_1..I_r -> A_1..A_r), canonically ordered."""

    holes: tuple[int, ...]
    particles: tuple[int, ...]

    def __post_init__(self):
        if len(self.holes) != len(self.particles) or not self.holes:
            raise ValueError("holes and particles must be equally long and nonempty")
        for seq in (self.holes, self.particles):
            if any(a >= b for a, b in zip(seq, seq[1:])) or seq[0] < 1:
                raise ValueError(f"indices must be strictly increasing and 1-based: {seq}")
        if set(self.holes) & set(self.particles):
            raise ValueError("holes and particles must be disjoint")

    @property
    def rank(self) -> int:
        return len(self.holes)

    def __str__(self) -> str:
        h = ",".join(map(str, self.holes))
        p = ",".join(map(str, self.particles))
        return f"{h}->{p}"

    @classmethod
    def from_string(cls, text: str) -> "ExcitationIndex":
        h, p = text.split("->")
        return cls(
            tuple(int(x) for x in h.split(",")),
            tuple(int(x) for x in p.split(",")),
        )


def _count_below(mask: int, orbital: int) -> int:
    return (mask & ((1 << (orbital - 1)) - 1)).bit_count()


def _annihilate(mask: int, orbital: int) -> Optional[tuple[int, int]]:
    bit = 1 << (orbital - 1)
    if not mask & bit:
        return None
    sign = -1 if _count_below(mask, orbital) & 1 else 1
    return mask & ~bit, sign


def _create(mask: int, orbital: int) -> Optional[tuple[int, int]]:
    bit = 1 << (orbital - 1)
    if mask & bit:
        return None
    sign = -1 if _count_below(mask, orbital) & 1 else 1
    return mask | bit, sign


def apply_excitation(
    mu: ExcitationIndex, det: Determinant
) -> Optional[tuple[Determinant, int]]:
    """Apply X_mu to a determinant; None when annihilated.

    Returns the canonical resulting determinant and the fermionic phase.
    """
    mask = det.mask
    sign = 1
    # rightmost pair of the operator string acts first
    for hole, particle in reversed(list(zip(mu.holes, mu.particles))):
        step = _annihilate(mask, hole)
        if step is None:
            return None
        mask, s = step
        sign *= s
        step = _create(mask, particle)
        if step is None:
            return None
        mask, s = step
        sign *= s
    return Determinant.from_mask(mask), sign


def excitation_from_reference(
    det: Determinant, basis: OrbitalBasis
) -> Optional[tuple[ExcitationIndex, int]]:
    """Unique mu and sign with X_mu phi_0 = sign * phi_det; None for phi_0."""
    ref = set(basis.occupied)
    occ = set(det.occ)
    holes = tuple(sorted(ref - occ))
    particles = tuple(sorted(occ - ref))
    if not holes:
        return None
    mu = ExcitationIndex(holes, particles)
    applied = apply_excitation(mu, basis.reference)
    assert applied is not None and applied[0] == det
    return mu, applied[1]


def classify_excitation(mu: ExcitationIndex, split: BasisSplit) -> str:
    """'cas' when all particles are <= k, otherwise 'ext' (incl. mixed)."""
    return "cas" if mu.particles[-1] <= split.k else "ext"


def enumerate_determinants(
    basis: OrbitalBasis, split: Optional[BasisSplit] = None
) -> list[Determinant]:
    """All N-electron determinants in lexicographic order.

    With a split, only determinants fully inside the CAS orbitals 1..k.
    """
    top = split.k if split is not None else basis.n_orbitals
    return [
        Determinant(occ)
        for occ in combinations(range(1, top + 1), basis.n_electrons)
    ]


def enumerate_excitations(
    basis: OrbitalBasis, max_rank: Optional[int] = None
) -> list[ExcitationIndex]:
    """All excitation indices up to max_rank, ordered by (rank, holes, particles)."""
    n, k = basis.n_electrons, basis.n_orbitals
    cap = min(n, k - n)
    if max_rank is not None:
        cap = min(cap, max_rank)
    out = []
    for r in range(1, cap + 1):
        for holes in combinations(range(1, n + 1), r):
            for particles in combinations(range(n + 1, k + 1), r):
                out.append(ExcitationIndex(holes, particles))
    out.sort(key=lambda m: (m.rank, m.holes, m.particles))
    return out


SPACE_FULL = "full"
SPACE_CAS = "cas"
SPACE_EXT = "ext"
SPACE_TRUNCATED = "truncated"


@dataclass
class AmplitudeVector:
    """Sparse map from excitation indices to real coefficients.

    `space` tags the index set the vector lives on; `scheme` names the
    truncation when space == 'truncated'. Iteration is sorted by the
    canonical index order so serialized output is reproducible.
    """

    space: str
    entries: dict[ExcitationIndex, float] = field(default_factory=dict)
    scheme: Optional[str] = None

    def __post_init__(self):
        if self.space not in (SPACE_FULL, SPACE_CAS, SPACE_EXT, SPACE_TRUNCATED):
            raise ValueError(f"unknown space tag {self.space!r}")
        self.prune()

    def prune(self, tol: float = 0.0) -> "AmplitudeVector":
        """Drop explicit zeros (or entries with |t| <= tol)."""
        self.entries = {m: v for m, v in self.entries.items() if abs(v) > tol}
        return self

    def sorted_items(self) -> list[tuple[ExcitationIndex, float]]:
        return sorted(self.entries.items(), key=lambda kv: kv[0])

    def get(self, mu: ExcitationIndex) -> float:
        return self.entries.get(mu, 0.0)

    def check_space(self, split: BasisSplit) -> None:
        """Verify every key's CAS/ext classification matches the tag."""
        if self.space == SPACE_FULL:
            return
        want = SPACE_CAS if self.space == SPACE_CAS else SPACE_EXT
        for mu in self.entries:
            if classify_excitation(mu, split) != want:
                raise SpaceMismatchError(
                    f"index {mu} is not {want} under split k={split.k}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ExcitationIndex]:
        return iter(sorted(self.entries))


def amplitudes_from_pairs(
    space: str,
    pairs: Iterable[tuple[ExcitationIndex, float]],
    scheme: Optional[str] = None,
) -> AmplitudeVector:
    return AmplitudeVector(space, dict(pairs), scheme)


def v_ext_norm(t: AmplitudeVector, fock) -> float:
    """Weighted l2 norm sqrt(sum eps_mu t_mu^2).

    Raises NonPositiveWeightError when some eps_mu <= 0, which signals a
    violated CAS-ext gap for the indices carried by t.
    """
    if t.space not in (SPACE_EXT, SPACE_TRUNCATED):
        raise SpaceMismatchError(f"v_ext_norm needs an external vector, got {t.space!r}")
    acc = 0.0
    for mu, val in t.entries.items():
        eps = fock.epsilon_of(mu)
        if eps <= 0.0:
            raise NonPositiveWeightError(f"eps_mu <= 0 for {mu}: {eps}")
        acc += eps * val * val
    return acc ** 0.5
