"""Dissipation-built kinetically constrained spin chains.

Library layout:

* :mod:`pxqsim.spinops` — basis encoding, sparse spin operators,
  chain Hamiltonians, two-site projector jump families.
* :mod:`pxqsim.liouville` — doubled-space generator, spectrum,
  stationary states, dissipative time evolution.
* :mod:`pxqsim.noise` — classical-noise unitary trajectories whose
  average reproduces the dissipative flow.
* :mod:`pxqsim.dfs` — sector enumeration from commuting diagonal
  jumps, frozen bonds, projected Hamiltonians, connectivity graphs,
  and the PXQ / PXP / PXQ-QXP local-form checks.
* :mod:`pxqsim.fermion` — domain-wall quasi-particle models (tilted
  chain, kink/antikink pair, coupled ladder).
* :mod:`pxqsim.spectral` — diagonalization, participation ratios,
  overlaps, occupation dynamics, scaling fits.
* :mod:`pxqsim.perturb` — second-order corrections and validity
  timescales of the sector-restricted unitary picture.
* :mod:`pxqsim.cli` — experiment runner writing CSV/JSON artifacts.
"""

__version__ = "0.1.0"

from . import dfs, fermion, liouville, noise, perturb, spectral, spinops

__all__ = [
    "__version__",
    "dfs",
    "fermion",
    "liouville",
    "noise",
    "perturb",
    "spectral",
    "spinops",
]
