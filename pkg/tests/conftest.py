"""Shared fixtures: molecules with cached integrals and SCF solutions.

Building the two-electron tensor dominates test runtime, so each named
system is constructed once per session and reused everywhere.
"""

from functools import lru_cache
from types import SimpleNamespace

import numpy as np
import pytest

from qembed.basis import build_basis
from qembed.integrals import compute_integrals
from qembed.molecule import Atom, Molecule, parse_xyz
from qembed.scf import run_rhf

XYZ = {
    "h2": "2\n\nH 0 0 0\nH 0 0 0.7414",
    "he": "1\n\nHe 0 0 0",
    "lih": "2\n\nLi 0 0 0\nH 0 0 1.5949",
    "water": (
        "3\nwater\n"
        "O  0.0000000  0.0000000  0.1173000\n"
        "H  0.0000000  0.7572000 -0.4692000\n"
        "H  0.0000000 -0.7572000 -0.4692000"
    ),
    "ch4": (
        "5\nmethane\n"
        "C 0 0 0\n"
        "H 0.6276 0.6276 0.6276\n"
        "H 0.6276 -0.6276 -0.6276\n"
        "H -0.6276 0.6276 -0.6276\n"
        "H -0.6276 -0.6276 0.6276"
    ),
    "heh+": "2\n\nHe 0 0 0\nH 0 0 0.9295",
}
CHARGES = {"heh+": 1}


@lru_cache(maxsize=None)
def get_system(name: str) -> SimpleNamespace:
    mol = parse_xyz(XYZ[name], charge=CHARGES.get(name, 0))
    return _assemble(mol)


@lru_cache(maxsize=None)
def get_stretched_water(r_angstrom: float) -> SimpleNamespace:
    base = parse_xyz(XYZ["water"])
    r = r_angstrom / 0.52917721092
    atoms = list(base.atoms)
    axis = atoms[2].position - atoms[0].position
    axis = axis / np.linalg.norm(axis)
    atoms[2] = Atom(atoms[2].symbol, atoms[2].z, atoms[0].position + r * axis)
    return _assemble(Molecule(tuple(atoms)))


def _assemble(mol: Molecule) -> SimpleNamespace:
    basis = build_basis(mol)
    ints = compute_integrals(basis, mol)
    scf = run_rhf(mol, ints)
    return SimpleNamespace(mol=mol, basis=basis, ints=ints, scf=scf)


@pytest.fixture(scope="session")
def h2():
    return get_system("h2")


@pytest.fixture(scope="session")
def he():
    return get_system("he")


@pytest.fixture(scope="session")
def lih():
    return get_system("lih")


@pytest.fixture(scope="session")
def water():
    return get_system("water")


@pytest.fixture(scope="session")
def ch4():
    return get_system("ch4")


@pytest.fixture(scope="session")
def heh_plus():
    return get_system("heh+")
