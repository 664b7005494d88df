"""Second-order corrections to the sector-restricted dynamics.

The strong-dissipation expansion treats the dissipator as the
unperturbed generator and the commutator part as the perturbation.  At
second order the correction is

    - P L1 (1 - P) L0^{-1} (1 - P) L1 P,

with P the projector onto same-key state pairs.  For diagonal projector
jumps L0 is diagonal in the product basis, its entry on a pair (s, t)
being ``-(gamma/2) * (number of jump eigenvalues differing between s
and t)``, so the pseudo-inverse is an elementwise reciprocal and every
intermediate denominator is a small negative multiple of gamma.

Two evaluation routes are provided: a closed-form walk over spin flips
(fast path) and literal matrix algebra on the doubled space (oracle);
they are cross-checked in the tests.  All matrix elements scale as
``J^2 / gamma``, which also yields the validity window of the
first-order unitary description.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from . import liouville, spinops
from .dfs import Classification, SectorKey, classify_basis, effective_hamiltonian_lind

__all__ = [
    "ValidityTimes",
    "lambda_class",
    "second_order_liouvillian",
    "validity_time",
    "effective_unitary_error",
]


def _key_codes(classification: Classification) -> np.ndarray:
    codes = np.zeros(classification.dim, dtype=np.int64)
    for j in range(classification.n_jumps):
        codes |= classification.f_table[j].astype(np.int64) << j
    return codes


def _mismatch(codes: np.ndarray, left: int, right: int) -> int:
    return int(bin(int(codes[left]) ^ int(codes[right])).count("1"))


def lambda_class(
    classification: Classification, left: int, right: int, gamma: float
) -> float:
    """Dissipator eigenvalue of an intermediate (non-stationary) pair.

    For projector jumps the value is ``-(gamma/2)`` times the count of
    jump eigenvalues on which the two states disagree; pairs reached by
    one spin flip from a stationary pair always give ``2 lambda / gamma``
    in ``{-1, -2}``.
    """
    codes = _key_codes(classification)
    mism = _mismatch(codes, left, right)
    if mism == 0:
        raise ValueError("pair is stationary: no dissipative eigenvalue to classify")
    return -0.5 * gamma * mism


def _flip_amplitudes(ham: sparse.spmatrix) -> dict[int, float]:
    """Site -> transverse amplitude map; rejects non-single-flip terms."""
    coo = ham.tocoo()
    amps: dict[int, complex] = {}
    for r, c, v in zip(coo.row, coo.col, coo.data):
        if r == c or abs(v) < 1e-15:
            continue
        delta = int(r) ^ int(c)
        if delta & (delta - 1):
            raise ValueError(
                "closed form needs a pure transverse-field Hamiltonian; "
                f"entry ({r}, {c}) flips more than one spin"
            )
        site = delta.bit_length()
        prev = amps.setdefault(site, v)
        if abs(prev - v) > 1e-12:
            raise ValueError(f"site {site} has non-uniform flip amplitude")
    for site, v in amps.items():
        if abs(v.imag) > 1e-12:
            raise ValueError(f"site {site} flip amplitude is not real")
    return {site: float(v.real) for site, v in amps.items()}


def second_order_liouvillian(
    ham: sparse.spmatrix,
    jumps: list[sparse.spmatrix],
    gamma: float,
    key: SectorKey,
    classification: Classification,
    method: str = "closed",
) -> np.ndarray:
    """Second-order generator on one sector's doubled block.

    Returns a dense ``d^2 x d^2`` matrix over ordered pairs of the
    sector's member states (row-major), keeping only the in-block part;
    pair indices follow ``a * d + b`` with members sorted ascending.
    """
    if key not in classification.sectors:
        raise KeyError(f"unknown sector key {sorted(key)}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    members = np.sort(classification.sectors[key].members)
    if method == "closed":
        return _second_order_closed(ham, gamma, key, classification, members)
    if method == "direct":
        return _second_order_direct(ham, jumps, gamma, classification, members)
    raise ValueError(f"unknown method {method!r}")


def _second_order_closed(ham, gamma, key, classification, members) -> np.ndarray:
    codes = _key_codes(classification)
    key_code = int(codes[members[0]])
    amps = _flip_amplitudes(ham)
    pos = {int(s): i for i, s in enumerate(members)}
    d = len(members)
    out = np.zeros((d * d, d * d), dtype=complex)

    sites = sorted(amps)
    for n in members:
        n = int(n)
        for nprime in members:
            nprime = int(nprime)
            col = pos[n] * d + pos[nprime]
            for j in sites:
                bit_j = 1 << (j - 1)
                # left-side excursion
                m = n ^ bit_j
                if int(codes[m]) != key_code:
                    lam = -0.5 * gamma * _mismatch(codes, m, nprime)
                    for k in sites:
                        final = m ^ (1 << (k - 1))
                        if int(codes[final]) == key_code:
                            row = pos[final] * d + pos[nprime]
                            out[row, col] += amps[j] * amps[k] / lam
                # right-side excursion
                mp = nprime ^ bit_j
                if int(codes[mp]) != key_code:
                    lam = -0.5 * gamma * _mismatch(codes, n, mp)
                    for k in sites:
                        final = mp ^ (1 << (k - 1))
                        if int(codes[final]) == key_code:
                            row = pos[n] * d + pos[final]
                            out[row, col] += amps[j] * amps[k] / lam
    return out


def _second_order_direct(ham, jumps, gamma, classification, members) -> np.ndarray:
    liou = liouville.build_liouvillian(ham, jumps, gamma)
    codes = _key_codes(classification)
    same = (codes[:, None] == codes[None, :]).ravel()
    l1 = liou.unitary.toarray()
    l0_diag = np.real(liou.dissipative.diagonal())
    inv = np.zeros_like(l0_diag)
    nz = np.abs(l0_diag) > 1e-14 * max(gamma, 1.0)
    inv[nz] = 1.0 / l0_diag[nz]

    proj = same.astype(float)
    a = l1 * proj[None, :]          # L1 P
    a = a * (~same)[:, None]        # (1-P) L1 P
    a = inv[:, None] * a            # L0^{-1} (1-P) L1 P
    a = a * (~same)[:, None]
    full = -(proj[:, None] * (l1 @ a))

    block = np.array([s * classification.dim + t for s in members for t in members])
    return full[np.ix_(block, block)]


@dataclass(frozen=True)
class ValidityTimes:
    """Timescales below which the first-order unitary picture holds.

    ``conservative`` is the rigorous bound's scale ``gamma / (J N)^2``
    (meaningful when ``gamma >> J N``); ``conjectured`` is the
    N-independent local-observable estimate ``gamma / J^2``.  Both are
    reported; choosing between them is left to the caller.
    """

    conservative: float
    conjectured: float


def validity_time(J: float, gamma: float, n_sites: int) -> ValidityTimes:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return ValidityTimes(
        conservative=gamma / (J * n_sites) ** 2,
        conjectured=gamma / J**2,
    )


def effective_unitary_error(
    n_sites: int,
    J: float,
    gamma: float,
    t: float,
    initial_state: int,
    kind: str = "QP",
    h: float = 0.0,
) -> float:
    """Trace distance at time t between the full dissipative evolution
    and the first-order sector-restricted unitary evolution, both from
    a pure basis state."""
    ham = spinops.build_hamiltonian(spinops.HamiltonianSpec(N=n_sites, J=J, h=h))
    jumps = spinops.build_jump_set(kind, n_sites)
    classification = classify_basis(jumps)
    key = classification.key_of(initial_state)
    sector = effective_hamiltonian_lind(ham, classification, key)

    dim = 1 << n_sites
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[initial_state, initial_state] = 1.0
    liou = liouville.build_liouvillian(ham, jumps, gamma)
    rho_exact = liouville.evolve(liou, rho0, np.array([0.0, t]))[-1]

    idx = sector.index_of(initial_state)
    u = expm(-1j * sector.matrix * t)
    small = np.outer(u[:, idx], u[:, idx].conj())
    rho_eff = np.zeros_like(rho0)
    rho_eff[np.ix_(sector.members, sector.members)] = small
    return liouville.trace_distance(rho_exact, rho_eff)
