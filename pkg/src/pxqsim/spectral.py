"""Exact diagonalization and localization diagnostics for the
quasi-particle models: participation ratios, mid-spectrum windows,
overlap spectra, occupation dynamics, and finite-size scaling fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .fermion import FermionModel

__all__ = [
    "EigenDecomposition",
    "IprReport",
    "diagonalize",
    "ipr",
    "ipr_columns",
    "mean_ipr_window",
    "window_indices",
    "overlap_spectrum",
    "evolve_state",
    "scaling_fit",
    "eigenstate_heatmap",
    "support_size",
]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a model, ascending; possibly an index-contiguous
    subset ``[offset, offset + len)`` of the full spectrum."""

    eigenvalues: np.ndarray
    vectors: np.ndarray          # columns
    dim_total: int
    offset: int = 0
    model: FermionModel | None = None

    @property
    def n_computed(self) -> int:
        return len(self.eigenvalues)

    def global_index(self, local: int) -> int:
        return self.offset + local


def window_indices(dim: int, window_size: int) -> tuple[int, int]:
    """Index range of the mid-spectrum window: ``window_size`` states
    centered at index ``dim // 2`` (half-open)."""
    if not 1 <= window_size <= dim:
        raise ValueError(f"window size {window_size} outside 1..{dim}")
    start = dim // 2 - window_size // 2
    start = min(max(start, 0), dim - window_size)
    return start, start + window_size


def diagonalize(
    model: FermionModel, window_size: int | None = None
) -> EigenDecomposition:
    """Dense Hermitian eigendecomposition of a model.

    With ``window_size`` only the mid-spectrum index window is
    computed, which is much cheaper for the large ladder matrices.
    """
    mat = model.matrix
    if window_size is None:
        evals, evecs = eigh(mat)
        offset = 0
    else:
        lo, hi = window_indices(mat.shape[0], window_size)
        evals, evecs = eigh(mat, subset_by_index=(lo, hi - 1))
        offset = lo
    return EigenDecomposition(
        eigenvalues=evals,
        vectors=evecs,
        dim_total=mat.shape[0],
        offset=offset,
        model=model,
    )


# ---------------------------------------------------------------------------
# Participation ratios
# ---------------------------------------------------------------------------

def ipr(state: np.ndarray) -> float:
    """Inverse participation ratio ``sum_F |<F|state>|^4`` in the basis
    the amplitudes are given in; 1 for a basis state, 1/D for uniform
    spreading."""
    state = np.asarray(state)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1):.2e}")
    return float(np.sum(np.abs(state) ** 4))


def ipr_columns(vectors: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(vectors) ** 4, axis=0)


@dataclass(frozen=True)
class IprReport:
    values: np.ndarray
    window: tuple[int, int]
    mean: float


def mean_ipr_window(decomposition: EigenDecomposition, window_size: int) -> IprReport:
    """Mean IPR over the mid-spectrum index window."""
    lo, hi = window_indices(decomposition.dim_total, window_size)
    if lo < decomposition.offset or hi > decomposition.offset + decomposition.n_computed:
        raise ValueError("decomposition does not cover the requested window")
    cols = slice(lo - decomposition.offset, hi - decomposition.offset)
    values = ipr_columns(decomposition.vectors[:, cols])
    return IprReport(values=values, window=(lo, hi), mean=float(values.mean()))


def overlap_spectrum(
    initial_index: int, decomposition: EigenDecomposition
) -> np.ndarray:
    """Rows of ``(E_n, |<F|phi_n>|^2, IPR(n))`` for one initial basis state.

    Requires the full decomposition so the overlaps resolve the
    identity (they must sum to 1).
    """
    if decomposition.n_computed != decomposition.dim_total:
        raise ValueError("overlap spectrum needs the full decomposition")
    amps = decomposition.vectors[initial_index, :]
    return np.column_stack([
        decomposition.eigenvalues,
        np.abs(amps) ** 2,
        ipr_columns(decomposition.vectors),
    ])


# ---------------------------------------------------------------------------
# Dynamics and structure
# ---------------------------------------------------------------------------

def evolve_state(
    decomposition: EigenDecomposition, psi0: np.ndarray, t_grid: np.ndarray
) -> np.ndarray:
    """Mode occupations ``<n_mu(t)>`` by spectral propagation.

    Output shape is ``(T, n_modes)`` for single/pair models and
    ``(T, 2, n_modes)`` for the ladder.
    """
    if decomposition.n_computed != decomposition.dim_total:
        raise ValueError("time evolution needs the full decomposition")
    model = decomposition.model
    if model is None:
        raise ValueError("decomposition carries no model")
    coeff = decomposition.vectors.conj().T @ np.asarray(psi0, dtype=complex)
    out = []
    for t in np.asarray(t_grid, dtype=float):
        psi_t = decomposition.vectors @ (np.exp(-1j * decomposition.eigenvalues * t) * coeff)
        out.append(model.occupations(psi_t))
    return np.stack(out)


def scaling_fit(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit ``log(y) = m log(x) + c``.

    Returns ``(m, c, rms_residual)``; rejects nonpositive inputs.
    """
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("scaling fit needs positive coordinates")
    lx, ly = np.log(x), np.log(y)
    (m, c), res = np.polyfit(lx, ly, 1), None
    fit = m * lx + c
    res = float(np.sqrt(np.mean((ly - fit) ** 2)))
    return float(m), float(c), res


def eigenstate_heatmap(decomposition: EigenDecomposition, n: int) -> np.ndarray:
    """Probability weight of eigenstate ``n`` (global index) on the
    ``(mu_1, mu_2)`` ladder grid; sums to 1."""
    model = decomposition.model
    if model is None or model.mode != "coupled_ladder":
        raise ValueError("heatmaps are defined for the ladder model only")
    local = n - decomposition.offset
    if not 0 <= local < decomposition.n_computed:
        raise ValueError(f"eigenstate {n} not covered by this decomposition")
    vec = decomposition.vectors[:, local]
    return (np.abs(vec) ** 2).reshape(model.n_modes, model.n_modes)


def support_size(state: np.ndarray, weight: float = 0.9) -> int:
    """Smallest number of basis cells holding ``weight`` of the
    probability."""
    prob = np.sort(np.abs(np.asarray(state)) ** 2)[::-1]
    prob = prob / prob.sum()
    # tolerance so exact ties (uniform states) resolve downward
    return int(np.searchsorted(np.cumsum(prob), weight - 1e-12) + 1)
