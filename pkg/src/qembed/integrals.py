"""AO integrals over contracted Cartesian Gaussians (s and p shells).

Everything is evaluated with the Gaussian product theorem in a Hermite
intermediate basis: expansion coefficients E couple Cartesian powers to
Hermite Gaussians, and the Coulomb-type integrals contract those against
a table of Hermite derivatives R of the Boys function. All recursions are
vectorized over primitive combinations, which keeps the dense rank-4 ERI
build tractable at desk scale (K up to ~30) in pure numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisFunction, BasisSet
from .molecule import Molecule

_BOYS_SWITCH = 35.0
_BOYS_SERIES_TERMS = 130


@dataclass(frozen=True)
class IntegralSet:
    """Overlap, core Hamiltonian and two-electron tensor in the AO basis."""

    S: np.ndarray       # (K, K)
    T: np.ndarray       # (K, K) kinetic
    V: np.ndarray       # (K, K) nuclear attraction
    eri: np.ndarray     # (K, K, K, K), chemists' convention (mu nu | lam sig)

    @property
    def h_core(self) -> np.ndarray:
        return self.T + self.V

    @property
    def n_functions(self) -> int:
        return self.S.shape[0]


def boys(n_max: int, t: np.ndarray) -> np.ndarray:
    """Boys functions F_0..F_n_max, shape (n_max+1,) + t.shape.

    Small arguments use the ascending series with downward recursion from
    F_{n_max}; large arguments (t >= 35) the complete-integral asymptote with
    upward recursion. Absolute accuracy is ~1e-15 over the whole range.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((n_max + 1,) + t.shape)
    small = t < _BOYS_SWITCH
    ts = t[small]
    # series for the top order, then downward: F_{m-1} = (2t F_m + e^-t)/(2m-1)
    term = np.full_like(ts, 1.0 / (2 * n_max + 1))
    acc = term.copy()
    for i in range(1, _BOYS_SERIES_TERMS):
        term = term * 2.0 * ts / (2 * n_max + 2 * i + 1)
        acc += term
    expt_s = np.exp(-ts)
    f = acc * expt_s
    out[n_max][small] = f
    for m in range(n_max, 0, -1):
        f = (2.0 * ts * f + expt_s) / (2 * m - 1)
        out[m - 1][small] = f
    big = ~small
    if np.any(big):
        tb = t[big]
        expt_b = np.exp(-tb)
        f = 0.5 * np.sqrt(np.pi / tb)
        out[0][big] = f
        for m in range(n_max):
            f = ((2 * m + 1) * f - expt_b) / (2.0 * tb)
            out[m + 1][big] = f
    return out


def _hermite_expansion(i_max: int, j_max: int, a, b, ab_dist):
    """Hermite expansion coefficients E[i, j, t] for one Cartesian direction.

    a, b, ab_dist are arrays over primitive pairs; the result has shape
    (i_max+1, j_max+1, i_max+j_max+1) + batch.
    """
    p = a + b
    mu = a * b / p
    xpa = -b * ab_dist / p   # P - A
    xpb = a * ab_dist / p    # P - B
    n_t = i_max + j_max + 1
    E = np.zeros((i_max + 1, j_max + 1, n_t + 1) + np.shape(a))
    E[0, 0, 0] = np.exp(-mu * ab_dist * ab_dist)
    inv2p = 1.0 / (2.0 * p)
    for i in range(i_max + 1):
        for j in range(j_max + 1):
            if i == 0 and j == 0:
                continue
            for t in range(i + j + 1):
                if j == 0:
                    E[i, j, t] = (
                        (inv2p * E[i - 1, j, t - 1] if t > 0 else 0.0)
                        + xpa * E[i - 1, j, t]
                        + (t + 1) * E[i - 1, j, t + 1]
                    )
                else:
                    E[i, j, t] = (
                        (inv2p * E[i, j - 1, t - 1] if t > 0 else 0.0)
                        + xpb * E[i, j - 1, t]
                        + (t + 1) * E[i, j - 1, t + 1]
                    )
    return E[:, :, :n_t]


def _hermite_coulomb(l_max: int, p, pc, t_arg):
    """Hermite Coulomb derivatives R[t, u, v] up to t+u+v <= l_max.

    p is the total exponent array, pc the (batch, 3) distance P-C, t_arg the
    Boys argument p*|PC|^2. Built by the standard downward index recursion on
    an auxiliary order n, vectorized over the batch axis.
    """
    fn = boys(l_max, t_arg)
    minus2p = -2.0 * p
    # rn[n][t,u,v]: auxiliary tables, consumed from highest n downwards
    rn = {n: {(0, 0, 0): (minus2p**n) * fn[n]} for n in range(l_max + 1)}
    for order in range(1, l_max + 1):
        for n in range(l_max - order + 1):
            table = rn[n]
            src = rn[n + 1]
            for t in range(order + 1):
                for u in range(order - t + 1):
                    v = order - t - u
                    if v > 0:
                        val = pc[..., 2] * src[(t, u, v - 1)]
                        if v > 1:
                            val = val + (v - 1) * src[(t, u, v - 2)]
                    elif u > 0:
                        val = pc[..., 1] * src[(t, u - 1, v)]
                        if u > 1:
                            val = val + (u - 1) * src[(t, u - 2, v)]
                    else:
                        val = pc[..., 0] * src[(t - 1, u, v)]
                        if t > 1:
                            val = val + (t - 1) * src[(t - 2, u, v)]
                    table[(t, u, v)] = val
    return rn[0]


def _pair_batch(fa: BasisFunction, fb: BasisFunction):
    """Flattened primitive-pair arrays (a, b, coeff product) for two AOs."""
    a = np.repeat(fa.exponents, len(fb.exponents))
    b = np.tile(fb.exponents, len(fa.exponents))
    cc = np.repeat(fa.coeffs, len(fb.exponents)) * np.tile(fb.coeffs, len(fa.exponents))
    return a, b, cc


def _overlap_1d_tables(fa: BasisFunction, fb: BasisFunction, extra: int = 0):
    """Per-direction E tables, padded so powers up to l+extra are available."""
    a, b, cc = _pair_batch(fa, fb)
    ab = fa.center - fb.center
    tables = [
        _hermite_expansion(fa.powers[d], fb.powers[d] + extra, a, b, ab[d])
        for d in range(3)
    ]
    return a, b, cc, tables


def overlap_matrix(basis: BasisSet) -> np.ndarray:
    """AO overlap via the Gaussian product theorem; exact for s/p Cartesians."""
    k = basis.n_functions
    s = np.zeros((k, k))
    for mu in range(k):
        for nu in range(mu, k):
            fa, fb = basis.functions[mu], basis.functions[nu]
            a, b, cc, tab = _overlap_1d_tables(fa, fb)
            p = a + b
            pref = (np.pi / p) ** 1.5
            val = cc * pref
            for d in range(3):
                val = val * tab[d][fa.powers[d], fb.powers[d], 0]
            s[mu, nu] = s[nu, mu] = val.sum()
    return s


def kinetic_matrix(basis: BasisSet) -> np.ndarray:
    """Kinetic energy matrix from power-shifted overlaps per direction."""
    k = basis.n_functions
    t_mat = np.zeros((k, k))
    for mu in range(k):
        for nu in range(mu, k):
            fa, fb = basis.functions[mu], basis.functions[nu]
            a, b, cc, tab = _overlap_1d_tables(fa, fb, extra=2)
            p = a + b
            pref = (np.pi / p) ** 1.5

            def s1d(d, shift):
                j = fb.powers[d] + shift
                if j < 0:
                    return np.zeros_like(a)
                return tab[d][fa.powers[d], j, 0]

            total = np.zeros_like(a)
            for d in range(3):
                lb = fb.powers[d]
                td = (
                    -2.0 * b * b * s1d(d, 2)
                    + b * (2 * lb + 1) * s1d(d, 0)
                    - 0.5 * lb * (lb - 1) * s1d(d, -2)
                )
                for o in range(3):
                    if o != d:
                        td = td * s1d(o, 0)
                total += td
            t_mat[mu, nu] = t_mat[nu, mu] = (cc * pref * total).sum()
    return t_mat


def _pair_hermite_density(fa: BasisFunction, fb: BasisFunction):
    """Combined E[t,u,v] tensor and Gaussian-product data for one AO pair."""
    a, b, cc, tab = _overlap_1d_tables(fa, fb)
    p = a + b
    centers = (a[:, None] * fa.center + b[:, None] * fb.center) / p[:, None]
    l_tot = sum(fa.powers) + sum(fb.powers)
    nt = [fa.powers[d] + fb.powers[d] + 1 for d in range(3)]
    e_comb = np.zeros((nt[0], nt[1], nt[2], len(a)))
    ex, ey, ez = (tab[d][fa.powers[d], fb.powers[d]] for d in range(3))
    for t in range(nt[0]):
        for u in range(nt[1]):
            for v in range(nt[2]):
                e_comb[t, u, v] = ex[t] * ey[u] * ez[v]
    return p, centers, cc, e_comb, l_tot


def nuclear_attraction_matrix(basis: BasisSet, mol: Molecule) -> np.ndarray:
    """Electron-nucleus attraction matrix (attractive, negative-definite)."""
    k = basis.n_functions
    v = np.zeros((k, k))
    charges = mol.charges()
    coords = mol.positions()
    for mu in range(k):
        for nu in range(mu, k):
            fa, fb = basis.functions[mu], basis.functions[nu]
            p, centers, cc, e_comb, l_tot = _pair_hermite_density(fa, fb)
            acc = 0.0
            for z, rc in zip(charges, coords):
                pc = centers - rc
                r_tab = _hermite_coulomb(l_tot, p, pc, p * np.sum(pc * pc, axis=-1))
                term = np.zeros_like(p)
                for t, u, w in np.ndindex(e_comb.shape[:3]):
                    term += e_comb[t, u, w] * r_tab[(t, u, w)]
                acc -= z * np.sum(cc * (2.0 * np.pi / p) * term)
            v[mu, nu] = v[nu, mu] = acc
    return v


def core_hamiltonian(basis: BasisSet, mol: Molecule) -> np.ndarray:
    return kinetic_matrix(basis) + nuclear_attraction_matrix(basis, mol)


def eri_tensor(basis: BasisSet) -> np.ndarray:
    """Full (mu nu | lam sig) tensor, built over canonical index quadruples.

    Unique quartets are evaluated once and scattered to all eight
    permutation images; cost is dominated by the Hermite contraction over
    primitive quartets, vectorized per shell-pair batch.
    """
    k = basis.n_functions
    pairs = {}
    for mu in range(k):
        for nu in range(mu + 1):
            pairs[(mu, nu)] = _pair_hermite_density(
                basis.functions[mu], basis.functions[nu]
            )
    eri = np.zeros((k, k, k, k))
    pair_keys = list(pairs.keys())
    index_of = {key: i for i, key in enumerate(pair_keys)}
    for (mu, nu) in pair_keys:
        p1, cen1, cc1, e1, l1 = pairs[(mu, nu)]
        n1 = len(p1)
        for (lam, sig) in pair_keys:
            if index_of[(lam, sig)] > index_of[(mu, nu)]:
                continue
            p2, cen2, cc2, e2, l2 = pairs[(lam, sig)]
            n2 = len(p2)
            # batch over all primitive-pair combinations of bra and ket
            pa = np.repeat(p1, n2)
            pb = np.tile(p2, n1)
            alpha = pa * pb / (pa + pb)
            pq = np.repeat(cen1, n2, axis=0) - np.tile(cen2, (n1, 1))
            r_tab = _hermite_coulomb(l1 + l2, alpha, pq, alpha * np.sum(pq * pq, axis=-1))
            coeff = (
                np.repeat(cc1, n2)
                * np.tile(cc2, n1)
                * 2.0
                * np.pi**2.5
                / (pa * pb * np.sqrt(pa + pb))
            )
            val = np.zeros_like(alpha)
            nz1 = np.argwhere(np.any(np.abs(e1) > 0, axis=-1))
            nz2 = np.argwhere(np.any(np.abs(e2) > 0, axis=-1))
            for t, u, w in nz1:
                e1b = np.repeat(e1[t, u, w], n2)
                for tt, uu, ww in nz2:
                    sign = -1.0 if (tt + uu + ww) % 2 else 1.0
                    e2b = np.tile(e2[tt, uu, ww], n1)
                    val += sign * e1b * e2b * r_tab[(t + tt, u + uu, w + ww)]
            value = float(np.sum(coeff * val))
            for (m, n) in ((mu, nu), (nu, mu)):
                for (l, s) in ((lam, sig), (sig, lam)):
                    eri[m, n, l, s] = value
                    eri[l, s, m, n] = value
    return eri


def compute_integrals(basis: BasisSet, mol: Molecule) -> IntegralSet:
    return IntegralSet(
        S=overlap_matrix(basis),
        T=kinetic_matrix(basis),
        V=nuclear_attraction_matrix(basis, mol),
        eri=eri_tensor(basis),
    )


def dump_integrals(integrals: IntegralSet, path) -> None:
    """Write S, h_core and the ERI tensor as index/value text for cross-checks."""
    with open(path, "w") as fh:
        for name, mat in (("S", integrals.S), ("H", integrals.h_core)):
            for (i, j), val in np.ndenumerate(mat):
                if j >= i:
                    fh.write(f"{name} {i} {j} {val:.15e}\n")
        eri = integrals.eri
        k = eri.shape[0]
        for i in range(k):
            for j in range(i + 1):
                for l in range(i + 1):
                    for s in range(l + 1):
                        if l == i and s > j:
                            continue
                        if abs(eri[i, j, l, s]) > 1e-14:
                            fh.write(f"ERI {i} {j} {l} {s} {eri[i, j, l, s]:.15e}\n")
