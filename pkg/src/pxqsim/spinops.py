"""Computational-basis state handling and sparse spin-chain operators.

Conventions used throughout the package:

* Sites are 1-indexed, ``i = 1..N``.  A basis state is an integer whose
  bit ``i-1`` holds the occupation ``n_i`` of site ``i`` (``n_i = 1``
  means spin-up ``|1>``).
* Spin-up is the ``+1`` eigenstate of ``sigma^z``, so the up-projector
  is ``Q = (1 + sigma^z)/2`` and the down-projector ``P = 1 - Q``.
* Bitstrings are written with site 1 leftmost, e.g. ``"00010001"`` has
  ``n_4 = n_8 = 1``.
* A two-chain system on N sites per chain is encoded as a 2N-bit
  pattern with chain 1 in the low N bits.
* Open boundary conditions everywhere; lattice spacing and hbar are 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "HamiltonianSpec",
    "state_from_string",
    "state_to_string",
    "bit_value",
    "identity",
    "sigma_x",
    "sigma_z",
    "local_projector",
    "bond_dw_projector",
    "build_hamiltonian",
    "build_jump_set",
    "pxq_hamiltonian",
    "pxp_hamiltonian",
    "pxq_qxp_hamiltonian",
    "assert_hermitian",
]

HERMITICITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Basis states
# ---------------------------------------------------------------------------

def state_from_string(bits: str) -> int:
    """Encode a bitstring (site 1 leftmost) as a basis-state integer."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(bits[::-1], 2)


def state_to_string(state: int, n_sites: int) -> str:
    """Render a basis-state integer as a bitstring with site 1 leftmost."""
    if not 0 <= state < (1 << n_sites):
        raise ValueError(f"state {state} out of range for {n_sites} sites")
    return format(state, f"0{n_sites}b")[::-1]


def bit_value(state: int, site: int) -> int:
    """Occupation n_i of a 1-indexed site."""
    return (state >> (site - 1)) & 1


def _check_site(site: int, n_sites: int) -> None:
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")


# ---------------------------------------------------------------------------
# Elementary operators
# ---------------------------------------------------------------------------

def identity(n_sites: int) -> sparse.csr_matrix:
    return sparse.identity(1 << n_sites, dtype=complex, format="csr")


def sigma_x(site: int, n_sites: int) -> sparse.csr_matrix:
    """Pauli x on one site: flips bit ``site-1``."""
    _check_site(site, n_sites)
    dim = 1 << n_sites
    rows = np.arange(dim) ^ (1 << (site - 1))
    return sparse.csr_matrix(
        (np.ones(dim, dtype=complex), (rows, np.arange(dim))), shape=(dim, dim)
    )


def sigma_z(site: int, n_sites: int) -> sparse.csr_matrix:
    """Pauli z on one site: diagonal +1 on up, -1 on down."""
    _check_site(site, n_sites)
    dim = 1 << n_sites
    diag = np.where((np.arange(dim) >> (site - 1)) & 1, 1.0, -1.0).astype(complex)
    return sparse.diags(diag, format="csr")


def local_projector(kind: str, site: int, n_sites: int) -> sparse.csr_matrix:
    """Single-site projector: ``Q = (1+sigma^z)/2`` (up), ``P = 1-Q`` (down)."""
    _check_site(site, n_sites)
    if kind not in ("Q", "P"):
        raise ValueError(f"projector kind must be 'Q' or 'P', got {kind!r}")
    dim = 1 << n_sites
    up = ((np.arange(dim) >> (site - 1)) & 1).astype(complex)
    diag = up if kind == "Q" else 1.0 - up
    return sparse.diags(diag, format="csr")


def bond_dw_projector(bond: int, n_sites: int) -> sparse.csr_matrix:
    """Projector ``P_i Q_{i+1}`` onto a "01" domain wall at bond ``i``."""
    _check_site(bond, n_sites - 1)
    dim = 1 << n_sites
    s = np.arange(dim)
    diag = (((~s >> (bond - 1)) & 1) * ((s >> bond) & 1)).astype(complex)
    return sparse.diags(diag, format="csr")


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters for the spin-chain Hamiltonian.

    Single chain (``chains=1``)::

        H = sum_i (J sigma^x_i - h/2 sigma^z_i) + V sum_{i=1}^{N-1} sigma^z_i sigma^z_{i+1}

    where the field sum runs over ``i = 2..N-1`` when
    ``boundary_bulk_only`` is set (the default) and over all sites
    otherwise.  With ``chains=2`` each chain carries the form above and
    the rungs are coupled by ``g sum_{i=1}^{N} sigma^z_{i,1} sigma^z_{i,2}``.
    """

    N: int
    J: float = 1.0
    h: float = 0.0
    V: float = 0.0
    g: float = 0.0
    chains: int = 1
    boundary_bulk_only: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need at least 2 sites")
        if self.chains not in (1, 2):
            raise ValueError("chains must be 1 or 2")

    @property
    def total_sites(self) -> int:
        return self.N * self.chains


def _chain_terms(spec: HamiltonianSpec, offset: int, total: int) -> sparse.csr_matrix:
    """Field + intra-chain Ising terms for one chain at a bit offset."""
    dim = 1 << total
    ham = sparse.csr_matrix((dim, dim), dtype=complex)
    lo = 2 if spec.boundary_bulk_only else 1
    hi = spec.N - 1 if spec.boundary_bulk_only else spec.N
    for i in range(lo, hi + 1):
        site = offset + i
        if spec.J != 0.0:
            ham = ham + spec.J * sigma_x(site, total)
        if spec.h != 0.0:
            ham = ham - 0.5 * spec.h * sigma_z(site, total)
    if spec.V != 0.0:
        s = np.arange(dim)
        diag = np.zeros(dim)
        for i in range(1, spec.N):
            zi = 2.0 * ((s >> (offset + i - 1)) & 1) - 1.0
            zj = 2.0 * ((s >> (offset + i)) & 1) - 1.0
            diag += spec.V * zi * zj
        ham = ham + sparse.diags(diag.astype(complex), format="csr")
    return ham


def build_hamiltonian(spec: HamiltonianSpec) -> sparse.csr_matrix:
    """Assemble the sparse Hamiltonian for a :class:`HamiltonianSpec`."""
    total = spec.total_sites
    ham = _chain_terms(spec, 0, total)
    if spec.chains == 2:
        ham = ham + _chain_terms(spec, spec.N, total)
        if spec.g != 0.0:
            dim = 1 << total
            s = np.arange(dim)
            diag = np.zeros(dim)
            for i in range(1, spec.N + 1):
                z1 = 2.0 * ((s >> (i - 1)) & 1) - 1.0
                z2 = 2.0 * ((s >> (spec.N + i - 1)) & 1) - 1.0
                diag += spec.g * z1 * z2
            ham = ham + sparse.diags(diag.astype(complex), format="csr")
    assert_hermitian(ham)
    return ham.tocsr()


def build_jump_set(kind: str, n_sites: int) -> list[sparse.csr_matrix]:
    """Two-site projector jump operators on every bond ``i = 1..N-1``.

    ``kind="QP"`` gives ``L_i = Q_i P_{i+1}`` (detects a "10" pattern),
    ``kind="QQ"`` gives ``L_i = Q_i Q_{i+1}`` (detects "11").  All are
    diagonal, Hermitian, idempotent, and mutually commuting.
    """
    if n_sites < 2:
        raise ValueError("need at least 2 sites")
    if kind not in ("QP", "QQ"):
        raise ValueError(f"jump kind must be 'QP' or 'QQ', got {kind!r}")
    dim = 1 << n_sites
    s = np.arange(dim)
    jumps = []
    for i in range(1, n_sites):
        left = (s >> (i - 1)) & 1
        right = (s >> i) & 1
        diag = left * (1 - right) if kind == "QP" else left * right
        jumps.append(sparse.diags(diag.astype(complex), format="csr"))
    return jumps


# ---------------------------------------------------------------------------
# Constrained local forms
# ---------------------------------------------------------------------------

def _three_site_term(left_kind: str, right_kind: str, i: int, n_sites: int):
    return (
        local_projector(left_kind, i - 1, n_sites)
        @ sigma_x(i, n_sites)
        @ local_projector(right_kind, i + 1, n_sites)
    )


def pxq_hamiltonian(n_sites: int, J: float = 1.0) -> sparse.csr_matrix:
    """``J sum_i P_{i-1} sigma^x_i Q_{i+1}``: a spin flips only next to a
    down neighbor on the left and an up neighbor on the right."""
    dim = 1 << n_sites
    ham = sparse.csr_matrix((dim, dim), dtype=complex)
    for i in range(2, n_sites):
        ham = ham + J * _three_site_term("P", "Q", i, n_sites)
    return ham.tocsr()


def pxp_hamiltonian(n_sites: int, J: float = 1.0) -> sparse.csr_matrix:
    """``J sum_i P_{i-1} sigma^x_i P_{i+1}``: flips between two down spins."""
    dim = 1 << n_sites
    ham = sparse.csr_matrix((dim, dim), dtype=complex)
    for i in range(2, n_sites):
        ham = ham + J * _three_site_term("P", "P", i, n_sites)
    return ham.tocsr()


def pxq_qxp_hamiltonian(n_sites: int, J: float = 1.0) -> sparse.csr_matrix:
    """Sum of the PXQ term and its mirrored QXP counterpart."""
    dim = 1 << n_sites
    ham = sparse.csr_matrix((dim, dim), dtype=complex)
    for i in range(2, n_sites):
        ham = ham + J * (
            _three_site_term("P", "Q", i, n_sites)
            + _three_site_term("Q", "P", i, n_sites)
        )
    return ham.tocsr()


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def assert_hermitian(op: sparse.spmatrix, tol: float = HERMITICITY_TOL) -> None:
    """Raise if ``op`` deviates from Hermiticity by more than ``tol``."""
    delta = op - op.getH()
    dev = np.abs(delta.data).max() if delta.nnz else 0.0
    if dev > tol:
        raise ValueError(f"operator not Hermitian: max |A - A^dag| = {dev:.3e}")
