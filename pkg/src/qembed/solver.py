"""Exact ground states: qubit-Hamiltonian diagonalization and a determinant FCI oracle.

The qubit route restricts the basis to occupation strings with the requested
particle number and S_z before diagonalizing (sparse Lanczos with a seeded
start vector, dense fallback for small blocks). The determinant route builds
the configuration-interaction matrix from Slater-Condon rules over spin
orbitals and never touches the Pauli machinery, so the two paths check each
other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .exceptions import ConvergenceError, InputError
from .integrals import IntegralSet
from .molecule import Molecule, nuclear_repulsion
from .qubits import QubitHamiltonian, word_to_masks
from .scf import SCFResult, run_rhf

MAX_QUBITS = 24
DENSE_CUTOFF = 600
EIG_TOL = 1e-9
LANCZOS_SEED = 0


@dataclass(frozen=True)
class GroundState:
    energy: float
    n_qubits: int
    sector: str


def _sector_basis(n_qubits: int, n_electrons: Optional[int], s_z: Optional[float]):
    """Occupation bitstrings in the requested (N, S_z) sector.

    Spin orbitals are interleaved (even bit = alpha), so S_z of a string is
    half the difference of set even and odd bits.
    """
    states = []
    for b in range(1 << n_qubits):
        n = bin(b).count("1")
        if n_electrons is not None and n != n_electrons:
            continue
        if s_z is not None:
            n_alpha = bin(b & 0x5555555555555555).count("1")
            if (n_alpha - (n - n_alpha)) != round(2 * s_z):
                continue
        states.append(b)
    return states


def _sector_basis_fast(n_qubits: int, n_electrons: int, s_z: float):
    """Enumerate by choosing alpha and beta occupations separately."""
    n_spatial = n_qubits // 2
    twice_sz = round(2 * s_z)
    n_alpha = (n_electrons + twice_sz) // 2
    n_beta = n_electrons - n_alpha
    if n_alpha < 0 or n_beta < 0 or n_alpha > n_spatial or n_beta > n_spatial:
        return []
    if (n_electrons + twice_sz) % 2 != 0:
        return []
    states = []
    for occ_a in combinations(range(n_spatial), n_alpha):
        mask_a = sum(1 << (2 * p) for p in occ_a)
        for occ_b in combinations(range(n_spatial), n_beta):
            states.append(mask_a + sum(1 << (2 * p + 1) for p in occ_b))
    return sorted(states)


def _assemble_sector_matrix(h: QubitHamiltonian, states: list[int]) -> scipy.sparse.csr_matrix:
    """Project the Pauli sum onto the sector basis.

    Each Pauli word carries a phase of exactly +-1 or +-i, so real and
    imaginary contributions accumulate separately; the imaginary part must
    cancel for a Hermitian operator with real coefficients and is checked.
    """
    index = {b: i for i, b in enumerate(states)}
    dim = len(states)
    real_entries: list[tuple[int, int, float]] = []
    imag_entries: list[tuple[int, int, float]] = []
    for word, coeff in h.terms.items():
        x, z, phase = word_to_masks(word)
        bucket = real_entries if phase.imag == 0.0 else imag_entries
        factor = coeff * (phase.real + phase.imag)
        for j, b in enumerate(states):
            i = index.get(b ^ x)
            if i is None:
                continue
            sign = -1.0 if bin(b & z).count("1") % 2 else 1.0
            bucket.append((i, j, factor * sign))

    def to_csr(entries):
        if not entries:
            return scipy.sparse.csr_matrix((dim, dim))
        rows, cols, vals = zip(*entries)
        return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()

    imag = to_csr(imag_entries)
    if imag.nnz and np.abs(imag.data).max() > 1e-10:
        raise InputError("Hamiltonian is not real in the occupation basis")
    return to_csr(real_entries)


def ground_state(
    h: QubitHamiltonian,
    n_electrons: Optional[int] = None,
    s_z: Optional[float] = 0.0,
    method: str = "auto",
) -> GroundState:
    """Lowest eigenvalue of the qubit Hamiltonian in an occupation sector.

    With n_electrons=None the full space is searched (s_z is then ignored).
    method: "auto" picks dense diagonalization for small blocks and Lanczos
    otherwise; "dense"/"sparse" force a route.
    """
    n = h.n_qubits
    if n > MAX_QUBITS:
        raise InputError(f"{n} qubits exceeds the exact-diagonalization limit {MAX_QUBITS}")
    if n_electrons is None:
        if n > 14:
            raise InputError(f"full-space search over {n} qubits is not supported; give a sector")
        states = list(range(1 << n))
        sector = "full space"
    else:
        if n % 2 == 0 and s_z is not None:
            states = _sector_basis_fast(n, n_electrons, s_z)
        else:
            states = _sector_basis(n, n_electrons, s_z)
        sector = f"(n={n_electrons}, s_z={s_z})"
    if not states:
        raise InputError(f"empty sector {sector} for {n} qubits")
    mat = _assemble_sector_matrix(h, states)
    dim = len(states)
    if method == "dense" or (method == "auto" and dim <= DENSE_CUTOFF) or dim < 5:
        energy = float(np.linalg.eigvalsh(mat.toarray())[0])
    else:
        rng = np.random.default_rng(LANCZOS_SEED)
        v0 = rng.standard_normal(dim)
        try:
            vals = scipy.sparse.linalg.eigsh(
                mat, k=1, which="SA", v0=v0, tol=EIG_TOL, maxiter=5000
            )[0]
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge: {exc}") from exc
        energy = float(vals[0])
    return GroundState(energy=energy, n_qubits=n, sector=sector)


# --- determinant-space FCI oracle -----------------------------------------

MAX_FCI_ORBITALS = 8


def _spin_h(h_mo: np.ndarray) -> np.ndarray:
    m = h_mo.shape[0]
    h_so = np.zeros((2 * m, 2 * m))
    h_so[0::2, 0::2] = h_mo
    h_so[1::2, 1::2] = h_mo
    return h_so


def _parity(occupied: tuple[int, ...], removed: list[int], added: list[int]) -> float:
    posr = sum(occupied.index(r) for r in removed)
    final = sorted(set(occupied) - set(removed) | set(added))
    posa = sum(final.index(a) for a in added)
    return -1.0 if (posr + posa) % 2 else 1.0


def fci_oracle(
    mol: Molecule,
    integrals: IntegralSet,
    scf: Optional[SCFResult] = None,
    s_z: float = 0.0,
) -> float:
    """Exact total energy by dense diagonalization in the determinant basis.

    Builds its own MO integrals from the canonical SCF orbitals and applies
    Slater-Condon rules directly; shares nothing with the qubit pipeline.
    """
    if scf is None:
        scf = run_rhf(mol, integrals)
    k = integrals.n_functions
    if k > MAX_FCI_ORBITALS:
        raise InputError(f"{k} orbitals exceeds the FCI oracle limit {MAX_FCI_ORBITALS}")
    c = scf.C
    h_mo = c.T @ integrals.h_core @ c
    g_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", integrals.eri, c, c, c, c, optimize=True)
    h_so = _spin_h(h_mo)

    def g_phys(i: int, j: int, a: int, b: int) -> float:
        # <ij|ab> over spin orbitals; chemists' (i a | j b) with spin deltas
        if (i ^ a) & 1 or (j ^ b) & 1:
            return 0.0
        return g_mo[i >> 1, a >> 1, j >> 1, b >> 1]

    n_e = mol.n_electrons
    twice_sz = round(2 * s_z)
    n_alpha = (n_e + twice_sz) // 2
    n_beta = n_e - n_alpha
    dets = []
    for occ_a in combinations(range(k), n_alpha):
        for occ_b in combinations(range(k), n_beta):
            dets.append(tuple(sorted([2 * p for p in occ_a] + [2 * p + 1 for p in occ_b])))
    dim = len(dets)
    mat = np.zeros((dim, dim))
    occ_sets = [frozenset(d) for d in dets]
    for i_det in range(dim):
        occ_i = dets[i_det]
        # diagonal
        e = sum(h_so[p, p] for p in occ_i)
        e += 0.5 * sum(
            g_phys(p, q, p, q) - g_phys(p, q, q, p) for p in occ_i for q in occ_i
        )
        mat[i_det, i_det] = e
        for j_det in range(i_det + 1, dim):
            diff_i = occ_sets[i_det] - occ_sets[j_det]
            if len(diff_i) > 2:
                continue
            diff_j = occ_sets[j_det] - occ_sets[i_det]
            if len(diff_i) == 1:
                (p,) = diff_i
                (r,) = diff_j
                common = occ_sets[i_det] & occ_sets[j_det]
                val = h_so[p, r] + sum(
                    g_phys(p, q, r, q) - g_phys(p, q, q, r) for q in common
                )
                sign = _parity(occ_i, [p], [r])
            else:
                p, q = sorted(diff_i)
                r, s = sorted(diff_j)
                val = g_phys(p, q, r, s) - g_phys(p, q, s, r)
                sign = _parity(occ_i, [p, q], [r, s])
            mat[i_det, j_det] = mat[j_det, i_det] = sign * val
    return float(np.linalg.eigvalsh(mat)[0]) + nuclear_repulsion(mol)
