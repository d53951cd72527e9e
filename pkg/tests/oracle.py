"""Independent dense oracles on the full 2^K occupation-tensor space.

Everything here is built from first principles -- explicit creation/
annihilation matrices with the standard phase string, dense many-body
operators, explicit partial traces -- and deliberately shares no code
with the package beyond the integral containers. Used to pin signs,
matrix elements, reduced density matrices and operator norms.
"""

from __future__ import annotations

import numpy as np


def creation(n_modes: int, p: int) -> np.ndarray:
    """Dense a^+_p on the 2^K Fock space; mode p is bit p-1."""
    dim = 1 << n_modes
    m = np.zeros((dim, dim))
    bit = 1 << (p - 1)
    below = bit - 1
    for s in range(dim):
        if not s & bit:
            phase = -1.0 if bin(s & below).count("1") % 2 else 1.0
            m[s | bit, s] = phase
    return m


def annihilation(n_modes: int, p: int) -> np.ndarray:
    return creation(n_modes, p).T


def determinant_state(occ, n_modes: int) -> np.ndarray:
    """a^+_{p1} ... a^+_{pN} |vac> with p1 < ... < pN (rightmost acts first)."""
    v = np.zeros(1 << n_modes)
    v[0] = 1.0
    for p in reversed(sorted(occ)):
        v = creation(n_modes, p) @ v
    return v


def excitation_operator(holes, particles, n_modes: int) -> np.ndarray:
    """a^+_{A1} a_{I1} ... a^+_{Ar} a_{Ir}, rightmost pair applied first."""
    dim = 1 << n_modes
    m = np.eye(dim)
    for hole, particle in zip(holes, particles):
        m = m @ creation(n_modes, particle) @ annihilation(n_modes, hole)
    return m


def dense_hamiltonian_fock(ints, n_modes: int) -> np.ndarray:
    """Second-quantized H on the full 2^K space (all particle sectors)."""
    dim = 1 << n_modes
    h2 = np.zeros((dim, dim))
    h1 = np.zeros((dim, dim))
    a_dag = [None] + [creation(n_modes, p) for p in range(1, n_modes + 1)]
    a = [None] + [annihilation(n_modes, p) for p in range(1, n_modes + 1)]
    for p in range(1, n_modes + 1):
        for q in range(1, n_modes + 1):
            v = ints.spin_h(p, q)
            if v:
                h1 += v * (a_dag[p] @ a[q])
    for p in range(1, n_modes + 1):
        for q in range(1, n_modes + 1):
            for r in range(1, n_modes + 1):
                for s in range(1, n_modes + 1):
                    v = ints._phys(p, q, r, s)
                    if v:
                        h2 += 0.5 * v * (a_dag[p] @ a_dag[q] @ a[s] @ a[r])
    return h1 + h2 + ints.e_core * np.eye(dim)


def project_sector(n_modes: int, n_particles: int) -> list[int]:
    """Fock-space indices of the fixed particle-number sector, ascending."""
    return [s for s in range(1 << n_modes) if bin(s).count("1") == n_particles]


def state_from_ci(coefficients, determinants, n_modes: int) -> np.ndarray:
    v = np.zeros(1 << n_modes)
    for c, d in zip(coefficients, determinants):
        v += c * determinant_state(d.occ, n_modes)
    return v


def two_mode_rdm(psi_full: np.ndarray, i: int, j: int, n_modes: int) -> np.ndarray:
    """Explicit partial trace onto modes (i, j); local basis |n_i n_j>."""
    t = psi_full.reshape([2] * n_modes)  # axis a holds mode n_modes - a
    t = np.moveaxis(t, [n_modes - i, n_modes - j], [0, 1])
    m = t.reshape(4, -1)
    return m @ m.T


def one_mode_rdm(psi_full: np.ndarray, i: int, n_modes: int) -> np.ndarray:
    t = psi_full.reshape([2] * n_modes)
    t = np.moveaxis(t, n_modes - i, 0)
    m = t.reshape(2, -1)
    return m @ m.T


def power_iteration_norm(m: np.ndarray, iterations: int = 500, seed: int = 7) -> float:
    """Largest singular value via power iteration on m^T m."""
    if m.size == 0:
        return 0.0
    g = m.T @ m
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.shape[0])
    v /= np.linalg.norm(v)
    val = 0.0
    for _ in range(iterations):
        w = g @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        val = nw
    return float(np.sqrt(val))


def finite_difference_jacobian(func, x0: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function."""
    n = len(x0)
    f0 = func(x0)
    jac = np.empty((len(f0), n))
    for col in range(n):
        xp = x0.copy()
        xm = x0.copy()
        xp[col] += h
        xm[col] -= h
        jac[:, col] = (func(xp) - func(xm)) / (2.0 * h)
    return jac
