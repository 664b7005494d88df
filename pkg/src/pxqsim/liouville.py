"""Vectorized density matrices and the Liouvillian superoperator.

A density matrix on a D-dimensional Hilbert space is flattened row-major
into a D^2 vector, ``v[sigma*D + tau] = rho[sigma, tau]``, so that
``kron(A, B) @ v == vec(A @ rho @ B.T)``.  The generator splits into

    unitary part    -i (H (x) I - I (x) H^T)
    dissipative     gamma/2 sum_j (2 L_j (x) L_j* - L_j^dag L_j (x) I
                                   - I (x) L_j^T L_j*)

for Hermitian jump operators with a uniform rate.  The flattening keeps
the raw matrix entries (no Hilbert-Schmidt normalization) because the
flow is linear and the trace must be preserved exactly; the
Hilbert-Schmidt norm is available separately for reporting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eig as dense_eig
from scipy.sparse.linalg import expm_multiply

__all__ = [
    "Liouvillian",
    "LiouvilleSpectrum",
    "EvolutionError",
    "vectorize",
    "devectorize",
    "hs_norm",
    "build_liouvillian",
    "spectrum",
    "stationary_states",
    "evolve",
    "expect_bond_dw",
    "trace_distance",
]

HERMITICITY_TOL = 1e-10


class EvolutionError(RuntimeError):
    """A propagated state violated a physicality tolerance."""


# ---------------------------------------------------------------------------
# Vectorization
# ---------------------------------------------------------------------------

def hs_norm(rho: np.ndarray) -> float:
    """Hilbert-Schmidt norm of a matrix (optional report quantity)."""
    return float(np.linalg.norm(rho))


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Flatten a Hermitian density matrix row-major into the doubled space."""
    rho = np.asarray(rho, dtype=complex)
    asym = np.abs(rho - rho.conj().T).max()
    if asym > HERMITICITY_TOL:
        raise ValueError(f"density matrix not Hermitian: asymmetry {asym:.3e}")
    return rho.reshape(-1).copy()


def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`; exact round trip."""
    vec = np.asarray(vec)
    dim = int(round(np.sqrt(vec.size)))
    if dim * dim != vec.size:
        raise ValueError("vector length is not a perfect square")
    return vec.reshape(dim, dim).copy()


# ---------------------------------------------------------------------------
# Liouvillian assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Liouvillian:
    """Generator of the dissipative flow on the doubled space."""

    unitary: sparse.csr_matrix
    dissipative: sparse.csr_matrix
    matrix: sparse.csr_matrix
    gamma: float
    dim: int  # Hilbert-space dimension D; the matrix is D^2 x D^2


def build_liouvillian(
    ham: sparse.spmatrix, jumps: list[sparse.spmatrix], gamma: float
) -> Liouvillian:
    """Assemble the doubled-space generator for Hermitian jumps."""
    dim = ham.shape[0]
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    eye = sparse.identity(dim, dtype=complex, format="csr")
    ham = ham.tocsr()
    unitary = -1j * (sparse.kron(ham, eye, format="csr")
                     - sparse.kron(eye, ham.T, format="csr"))
    dissipative = sparse.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for j, jump in enumerate(jumps):
        if jump.shape != ham.shape:
            raise ValueError(f"jump {j + 1} dimension mismatch")
        dev = np.abs((jump - jump.getH()).data)
        if dev.size and dev.max() > HERMITICITY_TOL:
            raise ValueError(f"jump {j + 1} is not Hermitian")
        jc = jump.tocsr()
        jsq = (jc.getH() @ jc).tocsr()
        dissipative = dissipative + 0.5 * gamma * (
            2.0 * sparse.kron(jc, jc.conj(), format="csr")
            - sparse.kron(jsq, eye, format="csr")
            - sparse.kron(eye, jsq.T.conj(), format="csr")
        )
    return Liouvillian(
        unitary=unitary.tocsr(),
        dissipative=dissipative.tocsr(),
        matrix=(unitary + dissipative).tocsr(),
        gamma=float(gamma),
        dim=dim,
    )


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiouvilleSpectrum:
    """Eigentriple of the generator, sorted by descending real part.

    Left/right pairs are bi-orthonormalized; within a (numerically)
    degenerate cluster the pairing is enforced blockwise through the
    pseudo-inverse of the overlap Gram matrix.
    """

    eigenvalues: np.ndarray
    right: np.ndarray   # columns
    left: np.ndarray    # columns; left[:, a]^dag right[:, b] = delta_ab
    stationary_dim: int
    zero_tol: float

    def coefficients(self, rho0_vec: np.ndarray) -> np.ndarray:
        """Expansion coefficients of an initial state over the modes."""
        return self.left.conj().T @ rho0_vec


def _cluster_indices(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.lexsort((values.imag, -values.real))
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and abs(values[idx] - values[clusters[-1][-1]]) <= tol:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    return [np.asarray(c) for c in clusters]


def spectrum(liouvillian: Liouvillian, jordan_tol: float = 1e-6) -> LiouvilleSpectrum:
    """Dense bi-orthogonal eigendecomposition of the generator.

    Emits a warning (rather than attempting a Jordan decomposition)
    when blockwise bi-orthogonalization cannot reach ``jordan_tol``,
    which signals a defective generator.
    """
    mat = liouvillian.matrix.toarray()
    values, vl, vr = dense_eig(mat, left=True, right=True)
    order = np.lexsort((values.imag, np.abs(values.imag), -values.real))
    values, vl, vr = values[order], vl[:, order], vr[:, order]

    scale = max(liouvillian.gamma, float(np.abs(values).max()), 1e-300)
    zero_tol = 1e-10 * scale
    cluster_tol = max(zero_tol, 1e-12 * scale)
    # oscillating modes (Re = 0, Im != 0) would otherwise tie with the
    # stationary block on real part; force the true zeros to lead
    zero_mask = np.abs(values) < zero_tol
    order = np.concatenate([np.flatnonzero(zero_mask), np.flatnonzero(~zero_mask)])
    values, vl, vr = values[order], vl[:, order], vr[:, order]
    for cluster in _cluster_indices(values, cluster_tol):
        gram = vl[:, cluster].conj().T @ vr[:, cluster]
        vl[:, cluster] = vl[:, cluster] @ np.linalg.pinv(gram).conj().T
    residual = np.abs(vl.conj().T @ vr - np.eye(len(values))).max()
    if residual > jordan_tol:
        warnings.warn(
            f"bi-orthogonalization residual {residual:.2e}: generator may "
            "have Jordan blocks; mode expansion is unreliable",
            RuntimeWarning,
        )
    return LiouvilleSpectrum(
        eigenvalues=values,
        right=vr,
        left=vl,
        stationary_dim=int(np.count_nonzero(np.abs(values) < zero_tol)),
        zero_tol=zero_tol,
    )


def stationary_states(liouvillian: Liouvillian, rtol: float = 1e-11) -> np.ndarray:
    """Orthonormal kernel basis of the generator (columns).

    Computed from the singular value decomposition; each returned
    vector satisfies ``|L v| <= 1e-8``.
    """
    mat = liouvillian.matrix.toarray()
    _, svals, vh = np.linalg.svd(mat)
    cutoff = rtol * max(float(svals[0]), 1.0)
    kernel = vh[svals <= cutoff].conj().T
    if kernel.size:
        residual = float(np.abs(mat @ kernel).max())
        if residual > 1e-8:
            raise RuntimeError(f"kernel residual {residual:.2e} exceeds 1e-8")
    return kernel


# ---------------------------------------------------------------------------
# Time evolution and observables
# ---------------------------------------------------------------------------

def _validate_snapshot(rho: np.ndarray, t: float) -> None:
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise EvolutionError(f"trace drift {abs(np.trace(rho) - 1):.2e} at t={t}")
    if np.abs(rho - rho.conj().T).max() > 1e-8:
        raise EvolutionError(f"Hermiticity loss at t={t}")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if low < -1e-8:
        raise EvolutionError(f"negative population {low:.2e} at t={t}")


def evolve(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    times: np.ndarray,
    validate: bool = True,
) -> np.ndarray:
    """Propagate a density matrix over an ascending time grid.

    Uses Krylov-based action of the matrix exponential; returns an
    array of shape ``(len(times), D, D)``.  Each snapshot is checked
    for trace, Hermiticity, and positivity within 1e-8 unless
    ``validate`` is disabled.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be an ascending grid starting at t >= 0")
    vec = vectorize(rho0)
    dim = liouvillian.dim

    uniform = times.size > 2 and np.allclose(np.diff(times), times[1] - times[0])
    if uniform:
        segment = expm_multiply(
            liouvillian.matrix, vec,
            start=times[0], stop=times[-1], num=times.size, endpoint=True,
        )
    else:
        segment = np.empty((times.size, dim * dim), dtype=complex)
        current, t_prev = vec, 0.0
        for k, t in enumerate(times):
            if t > t_prev:
                current = expm_multiply(liouvillian.matrix * (t - t_prev), current)
            segment[k] = current
            t_prev = t
        if times[0] == 0.0:
            segment[0] = vec
    out = segment.reshape(times.size, dim, dim)
    if validate:
        for k, t in enumerate(times):
            _validate_snapshot(out[k], float(t))
    return out


def expect_bond_dw(rho: np.ndarray, bond: int) -> float:
    """Expectation of the "01" domain-wall projector ``P_i Q_{i+1}``."""
    dim = rho.shape[0]
    n_sites = dim.bit_length() - 1
    if not 1 <= bond <= n_sites - 1:
        raise ValueError(f"bond {bond} out of range 1..{n_sites - 1}")
    s = np.arange(dim)
    mask = (((~s >> (bond - 1)) & 1) * ((s >> bond) & 1)).astype(bool)
    return float(np.real(np.diag(rho)[mask].sum()))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of the difference."""
    return 0.5 * float(np.linalg.svd(rho - sigma, compute_uv=False).sum())
