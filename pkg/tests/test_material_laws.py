import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mxil import material_laws as ml

small = st.floats(-0.5, 0.5, allow_nan=False)
vec3 = st.tuples(small, small, small).map(np.array)


def test_kerr_theta_example():
    law = ml.kerr_law(1.0)
    D, B = ml.evaluate_theta(law, None, [1.0, 0, 0], [0, 0, 5.0])
    assert list(D) == [2, 0, 0]
    assert list(B) == [0, 0, 5]


def test_zero_kerr_is_vacuum_and_linear_scales():
    E = np.array([0.3, -0.2, 0.7])
    assert np.array_equal(ml.evaluate_theta(ml.kerr_law(0.0), None, E, E)[0], E)
    assert np.array_equal(ml.evaluate_theta(ml.linear_isotropic(4.0), None, E, E)[0], 4 * E)


def test_kerr_chi_examples():
    chi = ml.jacobian_chi(ml.kerr_law(1.0), None, [1.0, 0, 0], [0, 0, 0])
    assert np.array_equal(np.diag(chi), [4, 2, 2, 1, 1, 1])
    assert np.array_equal(chi, np.diag(np.diag(chi)))
    assert np.array_equal(ml.jacobian_chi(ml.kerr_law(0.7), None, np.zeros(3), np.zeros(3)), np.eye(6))


def _fd_chi(law, E, H, step=1e-5):
    u = np.concatenate([E, H])
    out = np.zeros((6, 6))
    for k in range(6):
        up, um = u.copy(), u.copy()
        up[k] += step
        um[k] -= step
        fp = np.concatenate(law.theta(None, up[:3], up[3:]))
        fm = np.concatenate(law.theta(None, um[:3], um[3:]))
        out[:, k] = (fp - fm) / (2 * step)
    return out


def test_chi_matches_finite_differences_on_random_states():
    rng = np.random.default_rng(0)
    for law in (ml.kerr_law(0.8), ml.kerr_law(-0.3), ml.linear_isotropic(2.5, mu=1.5)):
        for _ in range(100):
            E, H = rng.uniform(-0.5, 0.5, 3), rng.normal(size=3)
            assert np.max(np.abs(law.chi(None, E, H) - _fd_chi(law, E, H))) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.0, 2.0), vec3)
def test_kerr_spectrum_closed_form(theta, E):
    law = ml.kerr_law(theta)
    if law.radius is not None and np.linalg.norm(E) >= law.radius:
        return
    e2 = float(E @ E)
    lam = np.linalg.eigvalsh(law.chi(None, E, np.zeros(3)))
    want = np.sort([1 + 3 * theta * e2, 1 + theta * e2, 1 + theta * e2, 1, 1, 1])
    assert np.allclose(lam, want, atol=1e-10)


def test_conductivity_examples():
    s = ml.conductivity_matrix(ml.linear_isotropic(sigma0=2.0), None, np.ones(3), np.ones(3))
    assert np.array_equal(s, np.diag([2.0, 2, 2, 0, 0, 0]))
    assert not np.any(ml.conductivity_matrix(ml.kerr_law(0.5), None, np.ones(3), np.ones(3)))
    s = ml.conductivity_matrix(ml.kerr_law(0.0, sigma2=1.0), None, np.array([1.0, 1, 0]), np.zeros(3))
    assert np.array_equal(s[:3, :3], 2 * np.eye(3))


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, st.floats(0, 3), st.floats(0, 3))
def test_conductivity_annihilates_magnetic_part(E, H, s0, s2):
    s = ml.kerr_law(0.3, sigma0=s0, sigma2=s2).sigma(None, E, H)
    assert np.array_equal(s @ np.concatenate([np.zeros(3), H]), np.zeros(6))


def test_validate_law_examples():
    rng = np.random.default_rng(1)
    d = rng.normal(size=(200, 3))
    E = d / np.linalg.norm(d, axis=1, keepdims=True) * rng.uniform(0, 1, (200, 1))
    states = np.hstack([E, rng.normal(size=(200, 3))])
    rep = ml.validate_law(ml.kerr_law(1.0), states)
    assert rep.min_eigenvalue >= 1.0 - 1e-12
    assert rep.symmetry_defect == 0.0 and rep.passed
    rep = ml.validate_law(ml.kerr_law(-0.2), np.array([[1.0, 0, 0, 0, 0, 0]]))
    assert rep.min_eigenvalue == pytest.approx(0.4, abs=1e-12)


def test_negative_kerr_domain_is_shrunk_ball():
    law = ml.kerr_law(-1.0)
    r = 0.99 / np.sqrt(3.0)
    assert law.radius == pytest.approx(r)
    assert ml.validate_law(law, [[0.999 * r, 0, 0, 0, 0, 0]]).min_eigenvalue > 0
    with pytest.raises(ml.DomainViolation) as err:
        ml.evaluate_theta(law, None, [r + 0.01, 0, 0], np.zeros(3))
    assert err.value.distance == pytest.approx(-0.01)


def test_registry():
    assert ml.make_law("kerr", "-", vartheta=0.5).region == "-"
    with pytest.raises(KeyError, match="kerr, linear_isotropic"):
        ml.make_law("drude")
    with pytest.raises(ValueError):
        ml.linear_isotropic(0.0)
    with pytest.raises(ValueError):
        ml.kerr_law(region="x")


def test_position_dependent_parameter():
    law = ml.linear_isotropic(lambda x: 1.0 + x[..., 0])
    x = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    D, _ = law.theta(x, np.ones((2, 3)), np.ones((2, 3)))
    assert np.array_equal(D[:, 0], [1.0, 2.0])
