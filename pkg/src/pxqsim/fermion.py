"""Domain walls as tight-binding quasi-particles.

In the zero-frozen-bond sector a "01" wall hops freely between bonds,
and a uniform longitudinal field turns into a linear (tilted) potential
for the wall, so the effective models are small tight-binding problems:

* ``single``: one particle on the N-1 bonds with on-site potential
  ``h * mu`` (constant ``-N h / 2`` dropped),
* ``two_particle_kink``: a kink/antikink pair at positions (mu, nu)
  with potential ``-h |mu - nu|`` (constant ``(N-2) h / 2`` dropped),
* ``coupled_ladder``: one wall per chain, tilts plus an inter-chain
  attraction ``-2 g |mu_1 - mu_2|``, optional weak on-site disorder.

Hard-core exclusion applies in the pair model.  The kink ("01") and
antikink ("10") are distinguishable, so ordered pairs with ``mu != nu``
are used; hopping is nearest-neighbor and cannot cross, so the ordered
wedges never mix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.io import mmwrite

from .spinops import bit_value

__all__ = [
    "FermionModel",
    "domain_wall_to_mode",
    "single_particle_stark",
    "two_particle_kink_model",
    "coupled_chain_model",
    "potential_xi",
    "inverse_localization_length",
    "export_model",
]


def potential_xi(mu1: int, mu2: int, h: float, g: float) -> float:
    """Two-wall ladder potential ``mu1 h + mu2 h - 2 g |mu1 - mu2|``.

    On the line ``h = 2g`` this reduces to ``2 h min(mu1, mu2)``: the
    outer particle sees a flat potential, the origin of the partial
    delocalization there.
    """
    if mu1 < 1 or mu2 < 1:
        raise ValueError("mode indices start at 1")
    return mu1 * h + mu2 * h - 2.0 * g * abs(mu1 - mu2)


def inverse_localization_length(h: float, J: float = 1.0) -> float:
    """Inverse decay length ``2 asinh(h / 2J)`` of a tilted-chain eigenstate."""
    return 2.0 * math.asinh(h / (2.0 * J))


@dataclass(frozen=True)
class FermionModel:
    """A quasi-particle tight-binding model with its basis bookkeeping."""

    mode: str                       # "single" | "two_particle_kink" | "coupled_ladder"
    n_spins: int                    # underlying chain length N; modes live on N-1 bonds
    J: float
    h: float
    g: float = 0.0
    matrix: np.ndarray = field(repr=False, default=None)
    basis: tuple = field(repr=False, default=None)   # mode labels per index
    dropped_constant: float = 0.0
    disorder_amplitude: float = 0.0
    disorder_seed: int | None = None
    disorder: np.ndarray | None = field(repr=False, default=None)

    @property
    def n_modes(self) -> int:
        return self.n_spins - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index_of(self, label) -> int:
        try:
            return self._index[label]
        except AttributeError:
            lookup = {lab: k for k, lab in enumerate(self.basis)}
            object.__setattr__(self, "_index", lookup)
            return self._index[label]

    def occupations(self, psi: np.ndarray) -> np.ndarray:
        """Per-mode particle number of a state vector.

        Returns length ``n_modes`` for the single and pair models
        (pair occupations count both walls) and shape ``(2, n_modes)``
        for the ladder.
        """
        prob = np.abs(np.asarray(psi)) ** 2
        if self.mode == "single":
            return prob
        if self.mode == "two_particle_kink":
            occ = np.zeros(self.n_modes)
            for p, (mu, nu) in zip(prob, self.basis):
                occ[mu - 1] += p
                occ[nu - 1] += p
            return occ
        occ = prob.reshape(self.n_modes, self.n_modes)
        return np.stack([occ.sum(axis=1), occ.sum(axis=0)])

    def metadata(self) -> dict:
        return {
            "mode": self.mode,
            "n_spins": self.n_spins,
            "n_modes": self.n_modes,
            "dim": self.dim,
            "J": self.J,
            "h": self.h,
            "g": self.g,
            "dropped_constant": self.dropped_constant,
            "disorder_amplitude": self.disorder_amplitude,
            "disorder_seed": self.disorder_seed,
        }


def domain_wall_to_mode(state: int, n_sites: int):
    """Map a constrained spin configuration to wall coordinates.

    A monotone ``0..01..1`` pattern (boundaries 0, 1) maps to the bond
    index of its "01" wall.  A single up-domain ``0..01..10..0``
    (boundaries 0, 0) maps to the pair ``(mu, nu)`` of its "01" and
    "10" wall bonds.  Anything else is outside the mapped manifold.
    """
    bits = [bit_value(state, i) for i in range(1, n_sites + 1)]
    walls_up = [i for i in range(1, n_sites) if bits[i - 1] == 0 and bits[i] == 1]
    walls_down = [i for i in range(1, n_sites) if bits[i - 1] == 1 and bits[i] == 0]
    if bits[0] == 0 and bits[-1] == 1 and len(walls_up) == 1 and not walls_down:
        return walls_up[0]
    if bits[0] == 0 and bits[-1] == 0 and len(walls_up) == 1 and len(walls_down) == 1:
        return (walls_up[0], walls_down[0])
    raise ValueError(
        f"state {state:#x} is not a single-wall or single-domain configuration"
    )


def single_particle_stark(n_sites: int, J: float, h: float) -> FermionModel:
    """One wall on ``n_sites - 1`` bonds: hopping J, tilt ``h * mu``."""
    if n_sites < 3:
        raise ValueError("need at least 3 sites")
    n = n_sites - 1
    mat = np.zeros((n, n))
    mu = np.arange(1, n + 1, dtype=float)
    mat[np.diag_indices(n)] = h * mu
    idx = np.arange(n - 1)
    mat[idx, idx + 1] = J
    mat[idx + 1, idx] = J
    return FermionModel(
        mode="single",
        n_spins=n_sites,
        J=J,
        h=h,
        matrix=mat,
        basis=tuple(range(1, n + 1)),
        dropped_constant=-0.5 * n_sites * h,
    )


def two_particle_kink_model(n_sites: int, J: float, h: float) -> FermionModel:
    """Kink/antikink pair: hopping J per wall, potential ``-h |mu - nu|``."""
    if n_sites < 4:
        raise ValueError("need at least 4 sites")
    n = n_sites - 1
    pairs = [(mu, nu) for mu in range(1, n + 1) for nu in range(1, n + 1) if mu != nu]
    index = {p: k for k, p in enumerate(pairs)}
    dim = len(pairs)
    mat = np.zeros((dim, dim))
    for k, (mu, nu) in enumerate(pairs):
        mat[k, k] = -h * abs(mu - nu)
        for target in ((mu - 1, nu), (mu + 1, nu), (mu, nu - 1), (mu, nu + 1)):
            j = index.get(target)
            if j is not None:
                mat[k, j] = J
    return FermionModel(
        mode="two_particle_kink",
        n_spins=n_sites,
        J=J,
        h=h,
        matrix=mat,
        basis=tuple(pairs),
        dropped_constant=0.5 * (n_sites - 2) * h,
    )


def coupled_chain_model(
    n_sites: int,
    J: float,
    h: float,
    g: float,
    disorder_amplitude: float = 0.0,
    seed: int | None = None,
) -> FermionModel:
    """One wall per chain of a two-leg ladder.

    Index layout is row-major in ``(mu_1, mu_2)``.  The diagonal is the
    two-wall potential plus, when requested, independent uniform
    on-site offsets in ``[-W, W]`` per (mode, chain), drawn once from
    the recorded seed.
    """
    if n_sites < 3:
        raise ValueError("need at least 3 sites")
    n = n_sites - 1
    chain = sparse.csr_matrix(single_particle_stark(n_sites, J, 0.0).matrix)
    eye = sparse.identity(n, format="csr")
    # Kronecker sum assembled sparse first: the dense ladder matrix is the
    # single big allocation (~(N-1)^4 floats).
    mat = (sparse.kron(chain, eye) + sparse.kron(eye, chain)).toarray()

    mu = np.arange(1, n + 1, dtype=float)
    xi = h * mu[:, None] + h * mu[None, :] - 2.0 * g * np.abs(mu[:, None] - mu[None, :])
    offsets = None
    if disorder_amplitude != 0.0:
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(-disorder_amplitude, disorder_amplitude, size=(2, n))
        xi = xi + offsets[0][:, None] + offsets[1][None, :]
    mat[np.diag_indices(n * n)] += xi.ravel()

    return FermionModel(
        mode="coupled_ladder",
        n_spins=n_sites,
        J=J,
        h=h,
        g=g,
        matrix=mat,
        basis=tuple((m1, m2) for m1 in range(1, n + 1) for m2 in range(1, n + 1)),
        dropped_constant=0.0,
        disorder_amplitude=disorder_amplitude,
        disorder_seed=seed,
        disorder=offsets,
    )


def export_model(model: FermionModel, prefix: str) -> tuple[str, str]:
    """Write the matrix (Matrix Market) and metadata (JSON) to disk."""
    mtx_path = f"{prefix}.mtx"
    meta_path = f"{prefix}.json"
    mmwrite(mtx_path, sparse.coo_matrix(model.matrix))
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(model.metadata(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return mtx_path, meta_path
