"""Sector structure induced by commuting diagonal jump operators.

Strong Hermitian dissipation splits the computational basis into
sectors labeled by the joint eigenvalues ``{f_j}`` of all jump
operators; within one sector the long-time dynamics is unitary and
generated by the projected Hamiltonian.  This module enumerates the
sectors, builds the associated projectors, detects frozen bonds
(eigenvalues without local degeneracy, which block transport), walks
the connectivity graphs of projected Hamiltonians, and checks the
constrained local forms (PXQ / PXP / PXQ-QXP) against the projector
construction.

Sector keys are stored sparsely as a frozenset of the 1-based jump
indices with eigenvalue 1 (low-excitation keys are mostly zero).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import spinops

__all__ = [
    "SectorKey",
    "Classification",
    "SectorProjector",
    "SectorOperator",
    "ShellOperator",
    "ConnectivityGraph",
    "LocalFormReport",
    "classify_basis",
    "total_projector",
    "effective_hamiltonian_lind",
    "effective_hamiltonian_ham",
    "frozen_blocks",
    "sector_graph",
    "graph_components",
    "verify_local_form",
]

SectorKey = frozenset  # of 1-based jump indices j with f_j = 1

EDGE_THRESHOLD_REL = 1e-12


def _jump_diagonal(op: sparse.spmatrix, index: int) -> np.ndarray:
    """Extract the 0/1 diagonal of a jump operator, rejecting anything else."""
    coo = op.tocoo()
    off = coo.row != coo.col
    if np.any(off & (np.abs(coo.data) > 1e-12)):
        k = np.argmax(off & (np.abs(coo.data) > 1e-12))
        raise ValueError(
            f"jump {index} is not diagonal in the computational basis: "
            f"entry ({coo.row[k]}, {coo.col[k]}) = {coo.data[k]}"
        )
    diag = np.real(op.diagonal())
    f = np.rint(diag).astype(np.int64)
    if np.abs(diag - f).max() > 1e-12 or not np.all((f == 0) | (f == 1)):
        raise ValueError(f"jump {index} diagonal is not a 0/1 projector")
    return f


@dataclass(frozen=True)
class SectorProjector:
    """One sector: its key, member states, and local degeneracy counts.

    ``local_degeneracy[j-1]`` is the number of configurations of jump
    j's support that share this sector's eigenvalue ``f_j``; a count of
    1 marks a frozen bond.
    """

    key: SectorKey
    members: np.ndarray
    local_degeneracy: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Classification:
    """Full partition of the basis by joint jump eigenvalues."""

    n_sites: int
    n_jumps: int
    f_table: np.ndarray          # (n_jumps, 2**n_sites) 0/1 eigenvalues
    sectors: dict[SectorKey, SectorProjector]
    degeneracy_table: np.ndarray  # (n_jumps, 2): S_{j,f} counts

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def key_of(self, state: int) -> SectorKey:
        return frozenset(
            j + 1 for j in range(self.n_jumps) if self.f_table[j, state]
        )

    def key_as_tuple(self, key: SectorKey) -> tuple[int, ...]:
        return tuple(int(j + 1 in key) for j in range(self.n_jumps))

    def projector_diagonal(self, key: SectorKey) -> np.ndarray:
        diag = np.zeros(self.dim)
        diag[self.sectors[key].members] = 1.0
        return diag

    def projector(self, key: SectorKey) -> sparse.csr_matrix:
        return sparse.diags(self.projector_diagonal(key).astype(complex), format="csr")


def classify_basis(jumps: list[sparse.spmatrix]) -> Classification:
    """Partition the computational basis by joint jump eigenvalues.

    Requires every jump to be a diagonal 0/1 projector.  Local
    degeneracies ``S_{j,f}`` are counted over the configurations of the
    sites the jump actually acts on.
    """
    if not jumps:
        raise ValueError("need at least one jump operator")
    dim = jumps[0].shape[0]
    n_sites = dim.bit_length() - 1
    if (1 << n_sites) != dim:
        raise ValueError("jump dimension is not a power of two")
    f_table = np.vstack([_jump_diagonal(op, j + 1) for j, op in enumerate(jumps)])

    # S_{j,f}: enumerate configurations of each jump's support sites.
    deg = np.zeros((len(jumps), 2), dtype=np.int64)
    for j in range(len(jumps)):
        f = f_table[j]
        support = [
            b for b in range(n_sites)
            if np.any(f != f[np.arange(dim) ^ (1 << b)])
        ]
        local = f[[sum(((c >> k) & 1) << b for k, b in enumerate(support))
                   for c in range(1 << len(support))]]
        deg[j, 0] = np.count_nonzero(local == 0)
        deg[j, 1] = np.count_nonzero(local == 1)

    # Group states by their eigenvalue column, packed into an integer code.
    codes = np.zeros(dim, dtype=np.int64)
    for j in range(len(jumps)):
        codes |= f_table[j].astype(np.int64) << j
    grouped: dict[int, list[int]] = {}
    for s, code in enumerate(codes.tolist()):
        grouped.setdefault(code, []).append(s)
    by_key = {
        frozenset(j + 1 for j in range(len(jumps)) if (code >> j) & 1): members
        for code, members in grouped.items()
    }

    sectors = {
        key: SectorProjector(
            key=key,
            members=np.asarray(members, dtype=np.int64),
            local_degeneracy=tuple(
                int(deg[j, 1 if (j + 1 in key) else 0]) for j in range(len(jumps))
            ),
        )
        for key, members in by_key.items()
    }
    return Classification(
        n_sites=n_sites,
        n_jumps=len(jumps),
        f_table=f_table,
        sectors=sectors,
        degeneracy_table=deg,
    )


def total_projector(classification: Classification) -> sparse.csr_matrix:
    """Projector ``sum_keys p (x) p*`` onto the doubled-space kernel of
    the dissipator: pairs of states sharing one sector key."""
    dim = classification.dim
    codes = np.zeros(dim, dtype=np.int64)
    for j in range(classification.n_jumps):
        codes |= classification.f_table[j].astype(np.int64) << j
    same = (codes[:, None] == codes[None, :]).astype(complex).ravel()
    return sparse.diags(same, format="csr")


def frozen_blocks(classification: Classification, key: SectorKey) -> list[int]:
    """Jump indices whose eigenvalue in this sector has no local
    degeneracy; their bond configuration cannot change."""
    sector = classification.sectors[key]
    return [j + 1 for j, s in enumerate(sector.local_degeneracy) if s == 1]


# ---------------------------------------------------------------------------
# Projected Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorOperator:
    """A Hamiltonian restricted to one sector (dense, members sorted)."""

    key: SectorKey
    members: np.ndarray
    matrix: np.ndarray
    frozen: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.members)

    def index_of(self, state: int) -> int:
        idx = int(np.searchsorted(self.members, state))
        if idx >= len(self.members) or self.members[idx] != state:
            raise ValueError(f"state {state} is not in this sector")
        return idx


@dataclass(frozen=True)
class ShellOperator:
    """A Hamiltonian restricted to one total-excitation shell.

    The shell is the union of all sectors with ``sum_j f_j = total_f``.
    The additive shell energy (interaction strength times ``total_f``)
    is bookkeeping only and is never added to the matrix.
    """

    total_f: int
    members: np.ndarray
    matrix: np.ndarray


def _restrict(ham: sparse.spmatrix, members: np.ndarray) -> np.ndarray:
    sub = ham.tocsr()[members][:, members].toarray()
    return sub


def effective_hamiltonian_lind(
    ham: sparse.spmatrix, classification: Classification, key: SectorKey
) -> SectorOperator:
    """Project the Hamiltonian onto one sector: ``p H p`` as a dense
    matrix over the sector's member states."""
    if key not in classification.sectors:
        raise KeyError(f"unknown sector key {sorted(key)}")
    members = np.sort(classification.sectors[key].members)
    return SectorOperator(
        key=key,
        members=members,
        matrix=_restrict(ham, members),
        frozen=tuple(frozen_blocks(classification, key)),
    )


def effective_hamiltonian_ham(
    ham: sparse.spmatrix, classification: Classification, total_f: int
) -> ShellOperator:
    """Project the Hamiltonian onto the shell with ``sum_j f_j = total_f``.

    This is the strong-interaction counterpart of the sector
    projection: only the total excitation number is conserved, so the
    shell merges every sector with the same ``sum_j f_j`` and allows
    transitions the per-sector dynamics forbids.
    """
    if not 0 <= total_f <= classification.n_jumps:
        raise ValueError(f"total_f must lie in 0..{classification.n_jumps}")
    totals = classification.f_table.sum(axis=0)
    members = np.flatnonzero(totals == total_f)
    return ShellOperator(
        total_f=total_f, members=members, matrix=_restrict(ham, members)
    )


# ---------------------------------------------------------------------------
# Connectivity graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityGraph:
    """Reachable subsector of one sector under a projected Hamiltonian.

    Vertices are basis states in BFS discovery order from the start
    state; edges are index pairs with a nonzero projected matrix
    element.
    """

    key: SectorKey
    vertices: list[int]
    edges: list[tuple[int, int]]
    frozen: tuple[int, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_frozen(self) -> int:
        return len(self.frozen)


def _adjacency(matrix: np.ndarray, threshold: float) -> list[np.ndarray]:
    absm = np.abs(matrix.copy())
    np.fill_diagonal(absm, 0.0)
    return [np.flatnonzero(row > threshold) for row in absm]


def sector_graph(
    sector_op: SectorOperator, start: int, threshold: float | None = None
) -> ConnectivityGraph:
    """Breadth-first closure of the start state under nonzero projected
    matrix elements."""
    start_idx = sector_op.index_of(start)
    if threshold is None:
        scale = np.abs(sector_op.matrix).max()
        threshold = EDGE_THRESHOLD_REL * (scale if scale > 0 else 1.0)
    adj = _adjacency(sector_op.matrix, threshold)

    seen = {start_idx}
    order = [start_idx]
    queue = deque([start_idx])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                order.append(int(w))
                queue.append(int(w))

    local = {v: k for k, v in enumerate(order)}
    edges = sorted(
        (min(local[v], local[int(w)]), max(local[v], local[int(w)]))
        for v in order
        for w in adj[v]
        if int(w) in seen and local[v] < local[int(w)]
    )
    return ConnectivityGraph(
        key=sector_op.key,
        vertices=[int(sector_op.members[v]) for v in order],
        edges=edges,
        frozen=sector_op.frozen,
    )


def graph_components(sector_op: SectorOperator, threshold: float | None = None) -> list[list[int]]:
    """Connected components of a whole sector (lists of basis states)."""
    if threshold is None:
        scale = np.abs(sector_op.matrix).max()
        threshold = EDGE_THRESHOLD_REL * (scale if scale > 0 else 1.0)
    adj = _adjacency(sector_op.matrix, threshold)
    unseen = set(range(sector_op.dim))
    components = []
    while unseen:
        root = min(unseen)
        comp = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                w = int(w)
                if w in unseen and w not in comp:
                    comp.add(w)
                    queue.append(w)
        unseen -= comp
        components.append(sorted(int(sector_op.members[v]) for v in comp))
    return components


# ---------------------------------------------------------------------------
# Local-form verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalFormReport:
    kind: str
    n_sites: int
    ok: bool
    max_deviation: float
    first_violation: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def _projected_difference(
    full: sparse.spmatrix, local: sparse.spmatrix, blocks: list[np.ndarray]
) -> tuple[float, tuple[int, int] | None]:
    delta = (full - local).tocsr()
    worst = 0.0
    where = None
    for members in blocks:
        sub = np.abs(delta[members][:, members].toarray())
        if sub.size and sub.max() > worst:
            worst = float(sub.max())
            r, c = np.unravel_index(np.argmax(sub), sub.shape)
            where = (int(members[r]), int(members[c]))
    return worst, where


def verify_local_form(kind: str, n_sites: int, J: float = 1.0, tol: float = 1e-12) -> LocalFormReport:
    """Check that projecting the bare transverse-field Hamiltonian
    reproduces the constrained local form on every invariant block.

    ``PXQ`` and ``PXP`` are checked sector by sector against the QP and
    QQ jump families; ``PXQ-QXP`` is checked shell by shell (the
    strong-interaction route only resolves the total excitation
    number).
    """
    if n_sites < 3:
        raise ValueError("local forms need at least 3 sites")
    bare = spinops.build_hamiltonian(spinops.HamiltonianSpec(N=n_sites, J=J))
    if kind == "PXQ":
        jumps, local = spinops.build_jump_set("QP", n_sites), spinops.pxq_hamiltonian(n_sites, J)
    elif kind == "PXP":
        jumps, local = spinops.build_jump_set("QQ", n_sites), spinops.pxp_hamiltonian(n_sites, J)
    elif kind == "PXQ-QXP":
        jumps, local = spinops.build_jump_set("QP", n_sites), spinops.pxq_qxp_hamiltonian(n_sites, J)
    else:
        raise ValueError(f"unknown local form {kind!r}")

    classification = classify_basis(jumps)
    if kind == "PXQ-QXP":
        totals = classification.f_table.sum(axis=0)
        blocks = [np.flatnonzero(totals == n) for n in range(classification.n_jumps + 1)]
    else:
        blocks = [np.sort(p.members) for p in classification.sectors.values()]
    worst, where = _projected_difference(bare, local, blocks)
    return LocalFormReport(
        kind=kind,
        n_sites=n_sites,
        ok=worst <= tol,
        max_deviation=worst,
        first_violation=where,
    )
