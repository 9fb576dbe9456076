"""Subsystem embedding: projectors, embedded SCF, and energy bookkeeping.

The active occupied orbitals are re-solved self-consistently in the
mean field of the frozen environment density. Inter-subsystem orthogonality
is enforced either by a level-shift projector (scaled overlap-projected
environment density, fixed across iterations) or by the Huzinaga operator
(anticommutator of the live Fock matrix with the environment density,
rebuilt every cycle). With both subsystems treated at the restricted
Hartree-Fock level the total embedded energy reproduces the full-system
result, which is the main correctness lever used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ProjectionError
from .integrals import IntegralSet
from .localize import Partition
from .molecule import Molecule, nuclear_repulsion
from .scf import SCFResult, fock_build, run_rhf, two_electron_matrix

ENV_LEAK_WARN = 1e-3
ENV_LEAK_FATAL = 0.1
DEFAULT_MU = 1e6


@dataclass(frozen=True)
class EmbeddedProblem:
    """Embedded one-electron Hamiltonian plus all classical energy pieces."""

    h_emb: np.ndarray          # h_core + v_emb + projector
    projector: np.ndarray      # at convergence, for the Huzinaga route
    v_emb: np.ndarray
    gamma_act: np.ndarray
    gamma_env: np.ndarray
    n_act_electrons: int
    E_env: float               # tr(gamma_env h_core) + g(gamma_env)
    g_cross: float             # nonadditive two-electron energy
    E_correction: float        # tr(gamma_act (v_emb + projector))
    E_nuc: float
    projector_kind: str        # "mu" | "huzinaga"
    mu_value: float

    @property
    def classical_energy(self) -> float:
        return self.E_env + self.g_cross - self.E_correction + self.E_nuc


def embedding_potential(gamma_act: np.ndarray, gamma_env: np.ndarray,
                        eri: np.ndarray) -> np.ndarray:
    """Mean-field potential of the environment felt by the active density.

    Computed as the difference of two-electron builds; by linearity of the
    restricted HF two-electron matrix this equals the build over the
    environment density alone (asserted in tests, not assumed here).
    """
    total = two_electron_matrix(gamma_act + gamma_env, eri)
    return total - two_electron_matrix(gamma_act, eri)


def mu_projector(gamma_env: np.ndarray, s: np.ndarray, mu: float = DEFAULT_MU) -> np.ndarray:
    """Level-shift projector mu * S gamma_env S.

    With the factor-2 closed-shell density convention a pure environment
    orbital is shifted by 2*mu; the large-mu exactness limit is unaffected.
    """
    return mu * (s @ gamma_env @ s)


def huzinaga_projector(fock: np.ndarray, gamma_env: np.ndarray, s: np.ndarray) -> np.ndarray:
    """-1/2 (F gamma_env S + S gamma_env F); flips environment orbital energies."""
    fgs = fock @ gamma_env @ s
    return -0.5 * (fgs + fgs.T)


def _electron_count(gamma: np.ndarray, s: np.ndarray) -> int:
    raw = float(np.einsum("pq,qp->", s, gamma))
    n = int(round(raw))
    if abs(raw - n) > 1e-6:
        raise ProjectionError(f"subsystem density has non-integer electron count {raw}")
    if n % 2 != 0:
        raise ProjectionError(f"subsystem density has odd electron count {n}")
    return n


def environment_populations(c: np.ndarray, gamma_env: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Environment weight of each orbital column; 1 for a pure environment orbital."""
    sgs = s @ gamma_env @ s
    return 0.5 * np.einsum("pi,pq,qi->i", c, sgs, c)


def run_embedded_scf(
    partition: Partition,
    integrals: IntegralSet,
    mol: Molecule,
    projector_kind: str = "huzinaga",
    mu: float = DEFAULT_MU,
    verbose: int = 0,
) -> tuple[EmbeddedProblem, SCFResult]:
    """Solve the projected active subsystem and assemble its energy constants.

    The returned SCFResult holds the embedded orbitals over the full AO
    basis; the EmbeddedProblem freezes the projector at its converged value
    (for the level-shift route it is constant anyway).
    """
    if projector_kind not in ("huzinaga", "mu"):
        raise ValueError(f"unknown projector kind {projector_kind!r}")
    s, eri, h_core = integrals.S, integrals.eri, integrals.h_core
    gamma_act, gamma_env = partition.gamma_act, partition.gamma_env
    n_act = _electron_count(gamma_act, s)
    e_nuc = nuclear_repulsion(mol)
    v_emb = embedding_potential(gamma_act, gamma_env, eri)
    g_env_mat = two_electron_matrix(gamma_env, eri)
    e_env = float(np.einsum("pq,pq->", gamma_env, h_core)
                  + 0.5 * np.einsum("pq,pq->", gamma_env, g_env_mat))
    g_cross = float(np.einsum("pq,pq->", gamma_act, g_env_mat))

    if projector_kind == "mu":
        projector = mu_projector(gamma_env, s, mu)
        scf_emb = run_rhf(
            mol, integrals,
            h_override=h_core + v_emb + projector,
            n_electrons_override=n_act,
            gamma0=gamma_act,
            e_nuc=e_nuc,
            verbose=verbose,
        )
    else:
        scf_emb = run_rhf(
            mol, integrals,
            h_override=h_core + v_emb,
            n_electrons_override=n_act,
            f_extra=lambda gamma, fock: huzinaga_projector(fock, gamma_env, s),
            gamma0=gamma_act,
            e_nuc=e_nuc,
            verbose=verbose,
        )
        fock_bare = fock_build(scf_emb.gamma, h_core + v_emb, eri)
        projector = huzinaga_projector(fock_bare, gamma_env, s)

    leaks = environment_populations(scf_emb.C_occ, gamma_env, s)
    if leaks.size and float(leaks.max()) > ENV_LEAK_FATAL:
        raise ProjectionError(
            f"occupied embedded orbital keeps environment population {leaks.max():.3e}"
        )

    problem = EmbeddedProblem(
        h_emb=h_core + v_emb + projector,
        projector=projector,
        v_emb=v_emb,
        gamma_act=gamma_act,
        gamma_env=gamma_env,
        n_act_electrons=n_act,
        E_env=e_env,
        g_cross=g_cross,
        E_correction=float(np.einsum("pq,pq->", gamma_act, v_emb + projector)),
        E_nuc=e_nuc,
        projector_kind=projector_kind,
        mu_value=mu,
    )
    return problem, scf_emb


def same_level_energy(problem: EmbeddedProblem, gamma_emb_act: np.ndarray,
                      integrals: IntegralSet,
                      first_order_correction: bool = True) -> float:
    """Total energy with both subsystems at the mean-field level.

    The first-order term corrects for the difference between the frozen and
    relaxed active densities; with matching levels of theory this total
    matches the full-system SCF energy. Disabling it is a diagnostic to show
    the size of that density relaxation, never something to do in production.
    """
    h_core, eri = integrals.h_core, integrals.eri
    e_act = float(np.einsum("pq,pq->", gamma_emb_act, h_core)
                  + 0.5 * np.einsum("pq,pq->", gamma_emb_act,
                                    two_electron_matrix(gamma_emb_act, eri)))
    correction = 0.0
    if first_order_correction:
        correction = float(np.einsum(
            "pq,pq->", gamma_emb_act - problem.gamma_act,
            problem.v_emb + problem.projector))
    return e_act + problem.E_env + problem.g_cross + correction + problem.E_nuc


def wf_in_lowlevel_constant(problem: EmbeddedProblem) -> float:
    """Additive constant completing a wave-function active-space energy.

    The correlated solver works with the embedded one-electron Hamiltonian,
    so its expectation value already contains the active-density interaction
    with (v_emb + projector); only the frozen-density counterpart is
    subtracted here.
    """
    return problem.classical_energy


def drop_environment_orbitals(
    scf_emb: SCFResult, gamma_env: np.ndarray, s: np.ndarray
) -> np.ndarray:
    """Delete the environment-derived orbitals from the embedded MO set.

    Exactly as many orbitals are removed as the environment holds, chosen by
    largest environment population; occupied active orbitals and all
    remaining virtuals are kept in energy order. Removal of an orbital whose
    environment weight is below 0.5 signals a projection failure.
    """
    n_env = int(round(0.5 * float(np.einsum("pq,qp->", s, gamma_env))))
    if n_env == 0:
        return scf_emb.C
    pops = environment_populations(scf_emb.C, gamma_env, s)
    order = np.argsort(pops)
    dropped = order[-n_env:]
    if float(pops[dropped].min()) < 0.5:
        raise ProjectionError(
            "ambiguous environment orbital removal: smallest selected population "
            f"is {pops[dropped].min():.3f}"
        )
    keep = sorted(set(range(scf_emb.C.shape[1])) - set(int(i) for i in dropped))
    return scf_emb.C[:, keep]
