import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.io import mmread

from pxqsim import dfs, fermion, spectral, spinops
from pxqsim.spinops import HamiltonianSpec, state_from_string


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------

def test_potential_xi_values():
    assert fermion.potential_xi(5, 3, 3.0, 1.5) == pytest.approx(18.0)  # 15+9-6
    assert fermion.potential_xi(7, 7, 2.0, 0.3) == pytest.approx(28.0)  # 2hk
    assert fermion.potential_xi(2, 7, 1.0, 1.0) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        fermion.potential_xi(0, 3, 1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(
    mu1=st.integers(1, 60),
    mu2=st.integers(1, 60),
    g=st.floats(0.1, 4.0, allow_nan=False),
)
def test_potential_flat_on_matched_line(mu1, mu2, g):
    h = 2.0 * g
    assert fermion.potential_xi(mu1, mu2, h, g) == pytest.approx(2 * h * min(mu1, mu2))


def test_inverse_localization_length_value():
    assert fermion.inverse_localization_length(3.0) == pytest.approx(
        2.0 * math.asinh(1.5)
    )
    assert fermion.inverse_localization_length(3.0) == pytest.approx(2.3895264, abs=1e-6)


# ---------------------------------------------------------------------------
# single wall
# ---------------------------------------------------------------------------

def test_stark_minimal_chain():
    model = fermion.single_particle_stark(3, 1.0, 0.0)
    assert np.allclose(model.matrix, [[0, 1], [1, 0]])
    assert np.allclose(np.linalg.eigvalsh(model.matrix), [-1, 1])


def test_free_chain_band():
    n_sites = 9
    model = fermion.single_particle_stark(n_sites, 1.0, 0.0)
    n = n_sites - 1
    expected = sorted(2.0 * np.cos(np.pi * k / (n + 1)) for k in range(1, n + 1))
    assert np.allclose(np.linalg.eigvalsh(model.matrix), expected)


def test_stark_everything_localized():
    model = fermion.single_particle_stark(40, 1.0, 1.5)
    dec = spectral.diagonalize(model)
    assert spectral.ipr_columns(dec.vectors).min() > 0.29
    deep = spectral.diagonalize(fermion.single_particle_stark(40, 1.0, 3.0))
    assert spectral.ipr(deep.vectors[:, 0]) > 0.5


def test_stark_dropped_constant_recorded():
    model = fermion.single_particle_stark(6, 1.0, 2.0)
    assert model.dropped_constant == pytest.approx(-6.0)


# ---------------------------------------------------------------------------
# wall-position mapping
# ---------------------------------------------------------------------------

def test_domain_wall_to_mode_examples():
    assert fermion.domain_wall_to_mode(state_from_string("00000001"), 8) == 7
    assert fermion.domain_wall_to_mode(state_from_string("01111111"), 8) == 1
    assert fermion.domain_wall_to_mode(state_from_string("00011110"), 8) == (3, 7)
    for bad in ("10000000", "00000000", "01101110"):
        with pytest.raises(ValueError):
            fermion.domain_wall_to_mode(state_from_string(bad), 8)


def test_sector_dynamics_is_tilted_chain():
    # relabeling the no-frozen-bond sector by wall position must turn the
    # projected spin Hamiltonian into the tilted chain, up to a constant
    n, h = 10, 2.7
    ham = spinops.build_hamiltonian(HamiltonianSpec(N=n, J=1.0, h=h))
    cls = dfs.classify_basis(spinops.build_jump_set("QP", n))
    start = state_from_string("0" * (n - 1) + "1")
    sector = dfs.effective_hamiltonian_lind(ham, cls, cls.key_of(start))
    graph = dfs.sector_graph(sector, start)
    order = sorted(graph.vertices, key=lambda s: fermion.domain_wall_to_mode(s, n))
    idx = [sector.index_of(s) for s in order]
    sub = sector.matrix[np.ix_(idx, idx)]
    stark = fermion.single_particle_stark(n, 1.0, h).matrix
    delta = sub - stark
    off = delta - np.diag(np.diag(delta))
    assert np.abs(off).max() < 1e-12
    assert np.ptp(np.real(np.diag(delta))) < 1e-12  # constant shift only
    # the shift is exactly the constant the tilted chain drops
    assert np.real(delta[0, 0]) == pytest.approx(
        fermion.single_particle_stark(n, 1.0, h).dropped_constant
    )


# ---------------------------------------------------------------------------
# kink/antikink pair
# ---------------------------------------------------------------------------

def test_kink_model_dimensions_and_hopping():
    model = fermion.two_particle_kink_model(6, 1.5, 0.7)
    n = 5
    assert model.dim == n * (n - 1)
    i = model.index_of((2, 4))
    j = model.index_of((3, 4))
    assert model.matrix[i, j] == pytest.approx(1.5)
    assert model.matrix[i, i] == pytest.approx(-0.7 * 2)
    assert np.abs(model.matrix - model.matrix.T).max() == 0.0


def test_kink_model_classical_limit_maximizes_separation():
    model = fermion.two_particle_kink_model(8, 0.0, 1.2)
    assert np.abs(model.matrix - np.diag(np.diag(model.matrix))).max() == 0.0
    ground = model.basis[int(np.argmin(np.diag(model.matrix)))]
    assert abs(ground[0] - ground[1]) == model.n_modes - 1


def test_kink_model_exchange_symmetry():
    model = fermion.two_particle_kink_model(7, 1.0, 0.9)
    swap = np.array([model.index_of((nu, mu)) for (mu, nu) in model.basis])
    permuted = model.matrix[np.ix_(swap, swap)]
    assert np.abs(permuted - model.matrix).max() == 0.0


def test_kink_walls_cannot_cross():
    # nearest-neighbor moves with the diagonal excluded keep mu < nu
    model = fermion.two_particle_kink_model(6, 1.0, 0.5)
    for a, (mu1, nu1) in enumerate(model.basis):
        for b, (mu2, nu2) in enumerate(model.basis):
            if model.matrix[a, b] != 0.0 and a != b:
                assert (mu1 < nu1) == (mu2 < nu2)


# ---------------------------------------------------------------------------
# coupled ladder
# ---------------------------------------------------------------------------

def test_ladder_decouples_at_zero_coupling():
    model = fermion.coupled_chain_model(6, 1.0, 0.8, 0.0)
    chain = fermion.single_particle_stark(6, 1.0, 0.8).matrix
    eye = np.eye(5)
    assert np.allclose(model.matrix, np.kron(chain, eye) + np.kron(eye, chain))


def test_ladder_diagonal_is_xi_plus_disorder():
    model = fermion.coupled_chain_model(9, 1.0, 1.7, 0.6, disorder_amplitude=1e-3, seed=5)
    assert model.disorder.shape == (2, 8)
    assert np.abs(model.disorder).max() <= 1e-3
    diag = np.diag(model.matrix)
    for k, (mu1, mu2) in enumerate(model.basis):
        expected = (
            fermion.potential_xi(mu1, mu2, 1.7, 0.6)
            + model.disorder[0, mu1 - 1]
            + model.disorder[1, mu2 - 1]
        )
        assert diag[k] == pytest.approx(expected)


def test_ladder_disorder_reproducible_from_seed():
    a = fermion.coupled_chain_model(7, 1.0, 1.0, 0.5, 1e-4, seed=11)
    b = fermion.coupled_chain_model(7, 1.0, 1.0, 0.5, 1e-4, seed=11)
    assert np.array_equal(a.matrix, b.matrix)
    c = fermion.coupled_chain_model(7, 1.0, 1.0, 0.5, 1e-4, seed=12)
    assert not np.array_equal(a.matrix, c.matrix)
    assert a.disorder_seed == 11


def test_ladder_flat_wedge_on_matched_line():
    g = 1.3
    model = fermion.coupled_chain_model(8, 1.0, 2.0 * g, g)
    n = model.n_modes
    diag = np.real(np.diag(model.matrix)).reshape(n, n)
    for mu2 in range(1, n + 1):
        wedge = [diag[mu1 - 1, mu2 - 1] for mu1 in range(mu2, n + 1)]
        assert np.ptp(wedge) < 1e-12  # constant along mu1 >= mu2


def test_ladder_binds_relative_coordinate_at_zero_tilt():
    # without a tilt the inter-chain term is linear in the wall
    # separation, so eigenstates are bound states of the relative
    # coordinate: sharply peaked at one separation value
    model = fermion.coupled_chain_model(10, 1.0, 0.0, 1.5)
    evals, evecs = np.linalg.eigh(model.matrix)
    n = model.n_modes
    seps = np.array([abs(m1 - m2) for (m1, m2) in model.basis])
    for k in (0, 1, 2):
        prob = np.abs(evecs[:, k]) ** 2
        by_sep = np.bincount(seps, weights=prob, minlength=n)
        assert by_sep.max() > 0.55  # one separation dominates
    # the deepest states sit at maximal separation (potential -2g|r|)
    ground = np.abs(evecs[:, 0]) ** 2
    dominant = int(np.argmax(np.bincount(seps, weights=ground, minlength=n)))
    assert dominant == n - 1


def test_occupations_by_mode():
    single = fermion.single_particle_stark(5, 1.0, 0.0)
    psi = np.zeros(4)
    psi[2] = 1.0
    assert np.allclose(single.occupations(psi), [0, 0, 1, 0])

    pair = fermion.two_particle_kink_model(5, 1.0, 0.0)
    psi = np.zeros(pair.dim)
    psi[pair.index_of((1, 3))] = 1.0
    assert np.allclose(pair.occupations(psi), [1, 0, 1, 0])

    ladder = fermion.coupled_chain_model(5, 1.0, 0.0, 0.0)
    psi = np.zeros(ladder.dim)
    psi[ladder.index_of((2, 4))] = 1.0
    occ = ladder.occupations(psi)
    assert np.allclose(occ[0], [0, 1, 0, 0])
    assert np.allclose(occ[1], [0, 0, 0, 1])


def test_export_round_trip(tmp_path):
    model = fermion.single_particle_stark(5, 1.0, 0.5)
    mtx, meta = fermion.export_model(model, str(tmp_path / "chain"))
    back = mmread(mtx).toarray()
    assert np.allclose(back, model.matrix)
    payload = json.loads((tmp_path / "chain.json").read_text())
    assert payload["mode"] == "single"
    assert payload["n_spins"] == 5
    assert payload["dropped_constant"] == pytest.approx(-1.25)
