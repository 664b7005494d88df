import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from pxqsim import spinops
from pxqsim.spinops import HamiltonianSpec


def test_state_string_round_trip():
    assert spinops.state_from_string("00010001") == 0b10001000
    assert spinops.state_to_string(0b10001000, 8) == "00010001"
    for s in range(16):
        assert spinops.state_from_string(spinops.state_to_string(s, 4)) == s


def test_state_string_rejects_garbage():
    with pytest.raises(ValueError):
        spinops.state_from_string("0a1")
    with pytest.raises(ValueError):
        spinops.state_to_string(16, 4)


def test_local_projector_single_site_action():
    q = spinops.local_projector("Q", 1, 1).toarray()
    p = spinops.local_projector("P", 1, 1).toarray()
    up = np.array([0.0, 1.0])
    assert np.allclose(q @ up, up)          # Q|1> = |1>
    assert np.allclose(p @ up, 0.0)         # P|1> = 0
    assert np.allclose(q @ np.array([1.0, 0.0]), 0.0)


def test_local_projector_idempotent():
    q = spinops.local_projector("Q", 2, 3)
    assert np.allclose((q @ q - q).toarray(), 0.0)
    p = spinops.local_projector("P", 2, 3)
    assert np.allclose((p @ p - p).toarray(), 0.0)
    assert np.allclose((p + q).toarray(), np.eye(8))


def test_local_projector_site_range():
    with pytest.raises(ValueError):
        spinops.local_projector("Q", 4, 3)
    with pytest.raises(ValueError):
        spinops.local_projector("R", 1, 3)


def test_hamiltonian_single_bulk_site():
    ham = spinops.build_hamiltonian(HamiltonianSpec(N=3, J=1.0))
    assert np.allclose(ham.toarray(), spinops.sigma_x(2, 3).toarray())


def test_hamiltonian_commutes_with_boundary_z():
    ham = spinops.build_hamiltonian(HamiltonianSpec(N=4, J=1.0, h=3.0))
    for site in (1, 4):
        z = spinops.sigma_z(site, 4)
        comm = (ham @ z - z @ ham).toarray()
        assert np.abs(comm).max() < 1e-12


def test_ising_diagonal_matches_enumeration():
    ham = spinops.build_hamiltonian(HamiltonianSpec(N=3, J=0.0, V=1.0)).toarray()
    assert np.abs(ham - np.diag(np.diag(ham))).max() == 0.0
    # independent oracle: sum the bond signs over all 8 configurations
    expected = np.empty(8)
    for s in range(8):
        z = [2 * ((s >> k) & 1) - 1 for k in range(3)]
        expected[s] = z[0] * z[1] + z[1] * z[2]
    assert np.allclose(np.real(np.diag(ham)), expected)
    assert np.allclose(expected, [2, 0, -2, 0, 0, -2, 0, 2])


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=5),
    J=st.floats(-3, 3, allow_nan=False),
    h=st.floats(-3, 3, allow_nan=False),
    V=st.floats(-2, 2, allow_nan=False),
    bulk=st.booleans(),
)
def test_hamiltonian_always_hermitian(n, J, h, V, bulk):
    ham = spinops.build_hamiltonian(
        HamiltonianSpec(N=n, J=J, h=h, V=V, boundary_bulk_only=bulk)
    ).toarray()
    assert np.abs(ham - ham.conj().T).max() <= 1e-12


def test_boundary_spins_conserved_under_evolution():
    ham = spinops.build_hamiltonian(HamiltonianSpec(N=5, J=1.0, h=1.3, V=0.4))
    u = expm(-1j * ham.toarray() * 1.7)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    psi /= np.linalg.norm(psi)
    for site in (1, 5):
        z = spinops.sigma_z(site, 5).toarray()
        before = psi.conj() @ z @ psi
        after = (u @ psi).conj() @ z @ (u @ psi)
        assert abs(before - after) < 1e-10


def test_two_chain_hamiltonian():
    spec = HamiltonianSpec(N=2, J=0.0, g=1.5, chains=2)
    ham = spinops.build_hamiltonian(spec).toarray()
    assert ham.shape == (16, 16)
    # oracle: g * sum_i z_{i,1} z_{i,2} over the 2N-bit encoding
    expected = np.empty(16)
    for s in range(16):
        z = [2 * ((s >> k) & 1) - 1 for k in range(4)]
        expected[s] = 1.5 * (z[0] * z[2] + z[1] * z[3])
    assert np.allclose(np.real(np.diag(ham)), expected)
    assert np.abs(ham - np.diag(np.diag(ham))).max() == 0.0


def test_two_chain_fields_on_both_chains():
    spec = HamiltonianSpec(N=3, J=1.0, chains=2)
    ham = spinops.build_hamiltonian(spec)
    expected = spinops.sigma_x(2, 6) + spinops.sigma_x(5, 6)
    assert np.abs((ham - expected).toarray()).max() < 1e-12


def test_jump_set_qp_action():
    (jump,) = spinops.build_jump_set("QP", 2)
    s10 = spinops.state_from_string("10")
    s01 = spinops.state_from_string("01")
    diag = np.real(jump.diagonal())
    assert diag[s10] == 1.0 and diag[s01] == 0.0


def test_jump_set_qq_action():
    (jump,) = spinops.build_jump_set("QQ", 2)
    diag = np.real(jump.diagonal())
    s11 = spinops.state_from_string("11")
    assert diag[s11] == 1.0
    assert diag.sum() == 1.0  # every other basis state annihilated


@pytest.mark.parametrize("kind", ["QP", "QQ"])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_jump_set_contracts(kind, n):
    jumps = spinops.build_jump_set(kind, n)
    assert len(jumps) == n - 1
    for a in jumps:
        dense = a.toarray()
        assert np.abs(dense - np.diag(np.diag(dense))).max() == 0.0
        assert np.abs(dense - dense.conj().T).max() == 0.0
        assert np.abs(dense @ dense - dense).max() == 0.0  # projector
    for a in jumps:
        for b in jumps:
            assert np.abs((a @ b - b @ a).toarray()).max() == 0.0


def test_constrained_forms_basic_action():
    pxq = spinops.pxq_hamiltonian(3, J=2.0)
    s001 = spinops.state_from_string("001")
    s011 = spinops.state_from_string("011")
    assert pxq[s011, s001] == 2.0
    assert pxq[s001, s011] == 2.0
    # flipping next to a down-right neighbor is forbidden
    s100 = spinops.state_from_string("100")
    s110 = spinops.state_from_string("110")
    assert pxq[s110, s100] == 0.0
    pxp = spinops.pxp_hamiltonian(3)
    s000 = spinops.state_from_string("000")
    s010 = spinops.state_from_string("010")
    assert pxp[s010, s000] == 1.0
    qxp_sum = spinops.pxq_qxp_hamiltonian(4)
    spinops.assert_hermitian(qxp_sum)


def test_bond_dw_projector_matches_product():
    direct = spinops.bond_dw_projector(2, 4)
    product = spinops.local_projector("P", 2, 4) @ spinops.local_projector("Q", 3, 4)
    assert np.abs((direct - product).toarray()).max() == 0.0


def test_assert_hermitian_raises():
    bad = spinops.sigma_x(1, 2) * 1j
    with pytest.raises(ValueError):
        spinops.assert_hermitian(bad)
