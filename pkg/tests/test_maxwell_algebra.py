from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mxil import maxwell_algebra as ma

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def _mu(m11, m21, m31, m12, m22, m32):
    return np.array([[m11, m12, 0.0], [m21, m22, 0.0], [m31, m32, 1.0]])


mu_strategy = st.tuples(*[finite] * 6).map(lambda a: _mu(*a))


def _curl_from_gradient(g):
    """curl from a 3x3 gradient ``g[p, k] = d_k v_p``."""
    return np.array([g[2, 1] - g[1, 2], g[0, 2] - g[2, 0], g[1, 0] - g[0, 1]])


# --- curl generators and symbols -------------------------------------------


def test_curl_generator_entries():
    j1, _, j3 = ma.curl_generators()
    assert j1 == ma.ExactMatrix.from_rows([[0, 0, 0], [0, 0, -1], [0, 1, 0]])
    assert j3 == ma.ExactMatrix.from_rows([[0, -1, 0], [1, 0, 0], [0, 0, 0]])


def test_curl_generators_annihilate_gradient_field():
    # v = (x2 x3, x1 x3, x1 x2) is a gradient, so sum_l J_l d_l v = 0 everywhere
    J = [j.to_array() for j in ma.curl_generators()]
    for x1, x2, x3 in np.random.default_rng(0).normal(size=(5, 3)):
        d = [np.array([0, x3, x2]), np.array([x3, 0, x1]), np.array([x2, x1, 0])]
        assert np.allclose(sum(J[l] @ d[l] for l in range(3)), 0.0, atol=0)


def test_constant_symbols_have_unit_entries():
    s = ma.block_symbols()
    for a in ma.symbol_matrices() + ma.curl_generators() + s.as_tuple():
        assert {a[i, j] for i in range(a.shape[0]) for j in range(a.shape[1])} <= {-1, 0, 1}


def test_curl_generators_antisymmetric_and_symbols_symmetric():
    # [[0, -J], [J, 0]] is symmetric precisely because J is antisymmetric
    for j in ma.curl_generators():
        assert j.is_antisymmetric()
    s = ma.block_symbols()
    for a in ma.symbol_matrices() + (s.A1, s.A2, s.A3, s.A3_tilde):
        assert a.T == a


def test_a3co_first_row():
    a3 = ma.symbol_matrices()[2].to_array()
    assert list(a3[0]) == [0, 0, 0, 0, 1, 0]


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=18, max_size=18))
def test_symbols_realise_maxwell_operator(entries):
    # u linear with gradient G (6x3): sum_j A_j d_j u = (-curl H, curl E)
    G = np.array(entries).reshape(6, 3)
    A = [a.to_array() for a in ma.symbol_matrices()]
    lhs = sum(A[j] @ G[:, j] for j in range(3))
    rhs = np.concatenate([-_curl_from_gradient(G[3:]), _curl_from_gradient(G[:3])])
    assert np.allclose(lhs, rhs, atol=1e-13)


# --- boundary matrices ------------------------------------------------------


def test_b_nu_examples():
    b, b_dg, b_sig = ma.boundary_matrices([0, 0, 1])
    assert list(b.to_array() @ np.array([1, 2, 3])) == [2, -1, 0]
    a, bb, c = 1.5, -2.0, 7.0
    u = np.array([a, bb, c, 4, 5, 6])
    assert list(b_dg.to_array() @ u) == [bb, -a, 0]
    up = np.array([1.0, 2, 3, 4, 5, 6])
    assert np.all((b_sig.to_array() @ np.concatenate([up, up]))[:3] == 0)


@settings(max_examples=50, deadline=None)
@given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite).filter(lambda n: np.linalg.norm(n) > 0.1))
def test_b_nu_is_cross_product(v, n):
    nu = np.array(n) / np.linalg.norm(n)
    b, _, _ = ma.boundary_matrices(nu)
    assert np.allclose(b @ np.array(v), np.cross(v, nu), atol=1e-12)


def test_non_unit_normal_rejected():
    with pytest.raises(ma.AlgebraError):
        ma.boundary_matrices([0.0, 0.0, 1.1])


# --- block symbols and exact identities ---------------------------------------


def test_block_symbol_structure():
    s = ma.block_symbols()
    a3 = ma.symbol_matrices()[2]
    lower = ma.ExactMatrix.from_rows([[s.A3_tilde[6 + i, 6 + j] for j in range(6)] for i in range(6)])
    assert lower == -a3
    assert s.B.rank() == 4


def test_b_co_vanishes_on_matching_tangential_components():
    # Q flips the sign of the normal E and H components of the reflected side
    s = ma.block_symbols()
    rng = np.random.default_rng(1)
    up = rng.normal(size=6)
    um = up.copy()
    um[[2, 5]] = rng.normal(size=2)
    q = np.diag([1, 1, -1, 1, 1, -1]).astype(float)
    assert np.allclose(s.B.to_array() @ np.concatenate([up, q @ um]), 0.0, atol=0)


def test_structural_identities_hold_exactly():
    rep = ma.structural_identity_report()
    assert rep.passed
    assert rep.symmetrized_product.residual == Fraction(0)
    assert rep.M_times_A3.residual == 0
    assert rep.CblT_Bbl.residual == 0
    assert "PASS" in rep.table()


# --- tangential coefficients --------------------------------------------------


def test_mu_tilde_identity_case():
    mt = ma.build_mu_tilde(np.eye(3))
    assert np.array_equal(np.diag(mt), [1, 1, 1, 1, 1, 1, 1, 1, -1, 1, 1, -1])


def test_mu_tilde_block_placement():
    mu = np.eye(3)
    mu[0, 1] = 0.3
    mt = ma.build_mu_tilde(mu)
    for off in (0, 3, 6, 9):
        assert mt[off, off + 1] == 0.3


@pytest.mark.parametrize("entry", [(0, 2), (1, 2), (2, 2)])
def test_mu_constraint_violation_rejected(entry):
    mu = np.tile(np.eye(3), (4, 1, 1))
    mu[2][entry] += 0.5
    with pytest.raises(ma.AlgebraError, match=r"sample point \(2,\)"):
        ma.build_mu_tilde(mu)


def test_coefficients_from_mu_examples():
    s = ma.block_symbols()
    a1, a2, a3 = ma.coefficients_from_mu(np.eye(3))
    assert np.array_equal(a1, s.A1.to_array())
    assert np.array_equal(a2, s.A2.to_array())
    assert np.array_equal(a3, s.A3_tilde.to_array())
    mu = np.eye(3)
    mu[1, 0] = 2.0
    a1, _, _ = ma.coefficients_from_mu(mu)
    assert np.array_equal(a1, s.A1.to_array() + 2 * s.A2.to_array())


@settings(max_examples=50, deadline=None)
@given(mu_strategy)
def test_coefficients_are_symmetric(mu):
    for a in ma.coefficients_from_mu(mu):
        assert np.array_equal(a, a.T)


def test_generalized_divergence_examples():
    # h = (x1,0,0, 0,x2,0, 0,0,x3, x1,x2,0)
    g = np.zeros((12, 3))
    g[0, 0] = g[4, 1] = g[8, 2] = g[9, 0] = g[10, 1] = 1.0
    assert list(ma.generalized_divergence(np.eye(3), g)) == [1, 1, -1, 2]
    assert list(ma.generalized_divergence(np.eye(3), np.zeros((12, 3)))) == [0, 0, 0, 0]


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=9, max_size=9))
def test_generalized_divergence_of_curl_is_zero(hess):
    # h_{1:3} = curl of a quadratic potential with symmetric second derivatives
    H = np.array(hess).reshape(3, 3)
    D = np.zeros((3, 3, 3))  # D[p, k, j] = d_k d_j psi_p
    for p in range(3):
        D[p] = H[p][:, None] * H[p][None, :]
    g = np.zeros((12, 3))
    for k in range(3):
        g[:3, k] = _curl_from_gradient(D[:, k, :])
    assert abs(ma.generalized_divergence(np.eye(3), g)[0]) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(mu_strategy, st.lists(finite, min_size=36, max_size=36), st.lists(finite, min_size=36, max_size=36), finite)
def test_generalized_divergence_is_linear(mu, a, b, c):
    ga, gb = np.array(a).reshape(12, 3), np.array(b).reshape(12, 3)
    lhs = ma.generalized_divergence(mu, ga + c * gb)
    rhs = ma.generalized_divergence(mu, ga) + c * ma.generalized_divergence(mu, gb)
    assert np.allclose(lhs, rhs, atol=1e-11)


def test_generalized_divergence_identity_mu_is_signed_divergence():
    g = np.random.default_rng(2).normal(size=(12, 3))
    div = [np.trace(g[3 * l : 3 * l + 3]) for l in range(4)]
    div[2] -= 2 * g[8, 2]
    div[3] -= 2 * g[11, 2]
    assert np.allclose(ma.generalized_divergence(np.eye(3), g), div, atol=1e-14)


# --- cancellation -------------------------------------------------------------


def _sym_hessian(flat):
    h = np.array(flat).reshape(12, 3, 3)
    return 0.5 * (h + np.swapaxes(h, 1, 2))


def test_cancellation_linear_u_is_exactly_zero():
    assert np.array_equal(ma.cancellation_residual(np.eye(3), np.zeros((12, 3, 3))), np.zeros(4))


@settings(max_examples=100, deadline=None)
@given(mu_strategy, st.lists(finite, min_size=108, max_size=108))
def test_cancellation_vanishes_for_admissible_mu(mu, flat):
    assert np.max(np.abs(ma.cancellation_residual(mu, _sym_hessian(flat)))) <= 1e-12


def test_cancellation_rejects_asymmetric_hessian():
    h = np.zeros((12, 3, 3))
    h[0, 0, 1] = 1.0
    with pytest.raises(ma.AlgebraError):
        ma.cancellation_residual(np.eye(3), h)


# --- normal derivative recovery ------------------------------------------------


def test_recovery_identity_a0():
    w = np.arange(1.0, 13.0)
    rs = ma.assemble_recovery(np.eye(12))
    assert np.allclose(ma.normal_derivative_recovery(np.eye(12), rs.mu_breve @ w), w, atol=1e-14)


def test_recovery_beta_for_scaled_a0():
    rs = ma.assemble_recovery(2 * np.eye(12))
    assert np.allclose(rs.G2[12:, 12:], 0.5 * np.eye(4), atol=0)


def test_recovery_gauss_matrices_produce_selector():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    a0 = (q * rng.uniform(0.1, 10, 12)) @ q.T
    mu = _mu(*rng.uniform(-1, 1, 6))
    rs = ma.assemble_recovery(a0, mu)
    assert np.allclose(rs.G2 @ rs.G1 @ rs.mu_breve, rs.M_tilde, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), mu_strategy)
def test_recovery_round_trip(seed, mu):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    a0 = (q * rng.uniform(0.1, 10, 12)) @ q.T
    d = rng.normal(size=12)
    rs = ma.assemble_recovery(a0, mu)
    got = ma.normal_derivative_recovery(a0, rs.mu_breve @ d, mu)
    assert np.linalg.norm(got - d) <= 1e-10 * np.linalg.norm(d) * max(1.0, np.abs(mu).max() ** 2)


def test_recovery_rejects_indefinite_normal_block():
    a0 = np.eye(12)
    a0[2, 2] = -1.0
    with pytest.raises(ma.SingularMaterialError):
        ma.assemble_recovery(a0)
