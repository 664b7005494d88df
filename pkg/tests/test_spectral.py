import numpy as np
import pytest

from pxqsim import fermion, spectral


def test_ipr_limits():
    assert spectral.ipr(np.array([0, 0, 1.0, 0])) == pytest.approx(1.0)
    d = 16
    assert spectral.ipr(np.full(d, 1 / np.sqrt(d))) == pytest.approx(1 / d)
    with pytest.raises(ValueError, match="normalized"):
        spectral.ipr(np.array([1.0, 1.0]))


def test_window_indices_centering():
    assert spectral.window_indices(10, 1) == (5, 6)
    assert spectral.window_indices(10, 4) == (3, 7)
    assert spectral.window_indices(9, 9) == (0, 9)
    with pytest.raises(ValueError):
        spectral.window_indices(5, 6)


def test_mean_ipr_of_diagonal_model_is_one():
    model = fermion.two_particle_kink_model(6, 0.0, 1.0)
    dec = spectral.diagonalize(model)
    report = spectral.mean_ipr_window(dec, dec.dim_total)
    assert report.mean == pytest.approx(1.0)
    single = spectral.mean_ipr_window(dec, 1)
    assert single.values.shape == (1,)
    assert single.mean == pytest.approx(
        spectral.ipr(dec.vectors[:, dec.dim_total // 2])
    )


def test_window_decomposition_matches_full():
    model = fermion.coupled_chain_model(8, 1.0, 2.6, 1.3, 1e-4, seed=3)
    full = spectral.diagonalize(model)
    part = spectral.diagonalize(model, window_size=10)
    lo, hi = spectral.window_indices(model.dim, 10)
    assert np.allclose(part.eigenvalues, full.eigenvalues[lo:hi], atol=1e-10)
    assert spectral.mean_ipr_window(part, 10).mean == pytest.approx(
        spectral.mean_ipr_window(full, 10).mean, abs=1e-10
    )
    with pytest.raises(ValueError, match="window"):
        spectral.mean_ipr_window(part, 40)


def test_eigendecomposition_residuals():
    model = fermion.coupled_chain_model(7, 1.0, 1.0, 0.5, 1e-4, seed=1)
    dec = spectral.diagonalize(model)
    resid = model.matrix @ dec.vectors - dec.vectors * dec.eigenvalues
    assert np.abs(resid).max() < 1e-8
    gram = dec.vectors.T @ dec.vectors
    assert np.abs(gram - np.eye(model.dim)).max() < 1e-8


def test_overlap_spectrum_trivial_and_parseval():
    model = fermion.two_particle_kink_model(6, 0.0, 1.0)
    dec = spectral.diagonalize(model)
    idx = model.index_of((1, 4))
    rows = spectral.overlap_spectrum(idx, dec)
    assert rows[:, 1].sum() == pytest.approx(1.0)
    assert rows[:, 1].max() == pytest.approx(1.0)  # initial is an eigenstate
    hopping = fermion.two_particle_kink_model(6, 1.0, 1.0)
    dec2 = spectral.diagonalize(hopping)
    rows2 = spectral.overlap_spectrum(idx, dec2)
    assert rows2[:, 1].sum() == pytest.approx(1.0)
    assert np.all(rows2[:, 2] >= 1.0 / hopping.dim)


def test_evolve_state_initial_and_conservation():
    model = fermion.two_particle_kink_model(8, 1.0, 0.7)
    dec = spectral.diagonalize(model)
    psi0 = np.zeros(model.dim, dtype=complex)
    psi0[model.index_of((2, 5))] = 1.0
    occ = spectral.evolve_state(dec, psi0, np.linspace(0.0, 3.0, 7))
    assert np.allclose(occ[0], model.occupations(psi0))
    assert np.allclose(occ.sum(axis=1), 2.0, atol=1e-8)


def test_free_chain_ballistic_spread():
    model = fermion.single_particle_stark(6, 1.0, 0.0)
    dec = spectral.diagonalize(model)
    psi0 = np.zeros(model.dim, dtype=complex)
    psi0[model.index_of(3)] = 1.0
    occ = spectral.evolve_state(dec, psi0, np.array([0.0, 2.0]))
    assert occ[0, 2] == pytest.approx(1.0)
    assert occ[1, 2] < 0.5
    assert occ[1].sum() == pytest.approx(1.0)


def test_scaling_fit_exact_laws():
    points = [(n, 1.0 / n) for n in (10, 20, 40, 80)]
    m, _, resid = spectral.scaling_fit(points)
    assert m == pytest.approx(-1.0)
    assert resid == pytest.approx(0.0, abs=1e-12)
    m2, _, _ = spectral.scaling_fit([(n, 0.37) for n in (10, 20, 40)])
    assert m2 == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        spectral.scaling_fit([(10, 0.1), (20, -0.1), (30, 0.2)])
    with pytest.raises(ValueError):
        spectral.scaling_fit([(10, 0.1), (20, 0.2)])


def test_heatmap_shape_and_localized_case():
    model = fermion.coupled_chain_model(6, 0.0, 1.0, 0.4)
    dec = spectral.diagonalize(model)
    grid = spectral.eigenstate_heatmap(dec, 7)
    assert grid.shape == (5, 5)
    assert grid.sum() == pytest.approx(1.0)
    assert np.count_nonzero(grid > 1e-12) == 1  # diagonal model: single cell
    single = fermion.single_particle_stark(6, 1.0, 0.0)
    with pytest.raises(ValueError, match="ladder"):
        spectral.eigenstate_heatmap(spectral.diagonalize(single), 0)


def test_support_size():
    v = np.zeros(9)
    v[4] = 1.0
    assert spectral.support_size(v) == 1
    assert spectral.support_size(np.full(10, np.sqrt(0.1))) == 9
