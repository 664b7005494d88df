"""Classical-noise unraveling of the dissipative dynamics.

The Lindblad flow with Hermitian jumps equals the noise average of
unitary trajectories driven by independent white noises coupling to the
jump operators.  One integration step applies the exact unitary

    exp(-i [H dt + sum_j c sqrt(dt) w_j L_j]),   w_j ~ N(0, 1),

so every trajectory stays exactly unitary.  Averaging the Gaussian step
gives the generator ``c^2 (L rho L - {L^2, rho}/2)`` per channel as
dt -> 0, so the coupling ``c = sqrt(gamma)`` reproduces the dissipator
with rate ``gamma`` (checked against the exact solver in the tests; for
a single dephasing channel the discretized average is even exact in dt).

Randomness comes from the counter-based Philox generator seeded through
``numpy.random.SeedSequence``: an ensemble with master seed s gives
trajectory m the child sequence ``SeedSequence(s).spawn(M)[m]``, so
results are reproducible for any execution order or worker count, and a
single trajectory can be regenerated in isolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "NoiseTrajectory",
    "sample_trajectory",
    "average_density",
    "ensemble_density",
    "trajectory_seeds",
]

MAX_STABLE_GAMMA_DT = 0.1


@dataclass(frozen=True)
class NoiseTrajectory:
    """One unitary trajectory on a uniform time grid."""

    seed: object
    dt: float
    steps: int
    path: np.ndarray  # (steps + 1, D) unit-norm pure states

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)


def trajectory_seeds(master_seed: int, n_trajectories: int) -> list[np.random.SeedSequence]:
    """Child seed sequences used for an ensemble with a master seed."""
    return np.random.SeedSequence(master_seed).spawn(n_trajectories)


def _check_step(gamma: float, dt: float, total_time: float) -> None:
    if gamma * dt > MAX_STABLE_GAMMA_DT:
        warnings.warn(
            f"gamma*dt = {gamma * dt:.3g} exceeds {MAX_STABLE_GAMMA_DT}; "
            f"estimated discretization bias ~ {gamma * gamma * dt * total_time:.2g} "
            "in ensemble averages",
            RuntimeWarning,
        )


def _noise_weights(seed, steps: int, n_jumps: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.standard_normal((steps, n_jumps))


def _step_generators(
    ham: np.ndarray, jump_mats: np.ndarray, weights: np.ndarray, gamma: float, dt: float
) -> np.ndarray:
    """Hermitian step generators for a batch of weight rows."""
    amp = np.sqrt(gamma * dt)
    return ham * dt + np.tensordot(weights * amp, jump_mats, axes=(1, 0))


def sample_trajectory(
    ham: sparse.spmatrix,
    jumps: list[sparse.spmatrix],
    gamma: float,
    psi0: np.ndarray,
    dt: float,
    total_time: float,
    seed,
) -> NoiseTrajectory:
    """Generate one noisy unitary trajectory, deterministic in the seed."""
    _check_step(gamma, dt, total_time)
    steps = int(round(total_time / dt))
    hd = ham.toarray()
    jd = np.stack([j.toarray() for j in jumps])
    weights = _noise_weights(seed, steps, len(jumps))

    psi = np.asarray(psi0, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    path = np.empty((steps + 1, psi.size), dtype=complex)
    path[0] = psi
    for k in range(steps):
        gen = _step_generators(hd, jd, weights[k : k + 1], gamma, dt)[0]
        evals, evecs = np.linalg.eigh(gen)
        psi = evecs @ (np.exp(-1j * evals) * (evecs.conj().T @ psi))
        path[k + 1] = psi
    return NoiseTrajectory(seed=seed, dt=dt, steps=steps, path=path)


def average_density(trajectories: list[NoiseTrajectory], t: float) -> np.ndarray:
    """Ensemble-averaged density matrix at one grid time."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    ref = trajectories[0]
    if any(tr.dt != ref.dt or tr.steps != ref.steps for tr in trajectories):
        raise ValueError("trajectories do not share a time grid")
    k = int(round(t / ref.dt))
    if not 0 <= k <= ref.steps or abs(k * ref.dt - t) > 1e-9 * max(t, ref.dt):
        raise ValueError(f"t={t} is not on the common grid")
    states = np.stack([tr.path[k] for tr in trajectories])
    return np.einsum("mi,mj->ij", states, states.conj()) / len(trajectories)


def ensemble_density(
    ham: sparse.spmatrix,
    jumps: list[sparse.spmatrix],
    gamma: float,
    psi0: np.ndarray,
    dt: float,
    total_time: float,
    n_trajectories: int,
    master_seed: int,
    sample_times: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Noise-averaged density matrices on the step grid, batched.

    Equivalent to averaging ``sample_trajectory`` over the child seeds
    of ``master_seed`` (bitwise: the per-trajectory noise streams are
    identical), but exponentiates whole batches of step generators at
    once.  Returns ``(times, rho_bar)`` with ``rho_bar`` of shape
    ``(len(times), D, D)``.
    """
    _check_step(gamma, dt, total_time)
    steps = int(round(total_time / dt))
    hd = ham.toarray()
    jd = np.stack([j.toarray() for j in jumps])
    dim = hd.shape[0]

    seeds = trajectory_seeds(master_seed, n_trajectories)
    weights = np.stack([_noise_weights(s, steps, len(jumps)) for s in seeds])

    if sample_times is None:
        keep = np.arange(steps + 1)
    else:
        keep = np.asarray(
            [int(round(t / dt)) for t in np.asarray(sample_times, dtype=float)]
        )
        if np.any(keep < 0) or np.any(keep > steps):
            raise ValueError("sample times outside the integration window")
    keep_set = set(keep.tolist())

    psi = np.broadcast_to(
        np.asarray(psi0, dtype=complex) / np.linalg.norm(psi0),
        (n_trajectories, dim),
    ).copy()
    rho_bar = np.empty((len(keep), dim, dim), dtype=complex)
    slot = {k: i for i, k in enumerate(keep.tolist())}
    if 0 in keep_set:
        rho_bar[slot[0]] = np.einsum("mi,mj->ij", psi, psi.conj()) / n_trajectories
    for k in range(steps):
        gens = _step_generators(hd, jd, weights[:, k, :], gamma, dt)
        evals, evecs = np.linalg.eigh(gens)
        phases = np.exp(-1j * evals)
        psi = np.einsum(
            "mij,mj->mi", evecs, phases * np.einsum("mji,mj->mi", evecs.conj(), psi)
        )
        if (k + 1) in keep_set:
            rho_bar[slot[k + 1]] = (
                np.einsum("mi,mj->ij", psi, psi.conj()) / n_trajectories
            )
    times = dt * keep.astype(float)
    return times, rho_bar
