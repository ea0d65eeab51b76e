import numpy as np
import pytest
import scipy.linalg

from rthsdeg.structure import (
    BuildingModel, ModalDamping, RayleighDamping, assemble_fixed_base, assemble_isolated,
    chain_stiffness, damping_coefficients, fixed_base_frequencies, mechanical_energy,
    rayleigh_coefficients, rayleigh_from_frequencies, rayleigh_ratio,
)


def test_default_fixed_base_frequencies_match_dense_eigensolver(building):
    # independent route: general (non-symmetric) eigenproblem of M^-1 K
    M = np.diag(building.masses[1:])
    ks = building.story_stiffnesses
    K = np.array([
        [ks[0] + ks[1], -ks[1], 0.0],
        [-ks[1], ks[1] + ks[2], -ks[2]],
        [0.0, -ks[2], ks[2]],
    ])
    w2 = np.sort(np.linalg.eigvals(np.linalg.solve(M, K)).real)
    np.testing.assert_allclose(fixed_base_frequencies(building), np.sqrt(w2), rtol=1e-12)
    np.testing.assert_allclose(
        fixed_base_frequencies(building) / (2 * np.pi), [4.5747, 12.8153, 18.5141], atol=1e-3
    )


def test_two_dof_closed_form_frequencies():
    m1, m2, k1, k2 = 600.0, 480.0, 3.0e5, 1.0e6
    model = BuildingModel(masses=(10.0, m1, m2), story_stiffnesses=(k1, k2),
                          damping=ModalDamping((0.02, 0.02), (1, 2)))
    # characteristic polynomial m1 m2 w^4 - (m1 k2 + m2 (k1 + k2)) w^2 + k1 k2 = 0
    a, b, c = m1 * m2, -(m1 * k2 + m2 * (k1 + k2)), k1 * k2
    disc = np.sqrt(b * b - 4 * a * c)
    expected = np.sqrt([(-b - disc) / (2 * a), (-b + disc) / (2 * a)])
    np.testing.assert_allclose(fixed_base_frequencies(model), expected, rtol=1e-12)


def test_rayleigh_anchors_hit_target_ratios(building):
    w = fixed_base_frequencies(building)
    a0, a1 = rayleigh_coefficients(building, (0.02, 0.02), (1, 3))
    np.testing.assert_allclose(rayleigh_ratio(a0, a1, w[[0, 2]]), [0.02, 0.02], rtol=1e-12)
    # frozen from the 2x2 solve above
    assert a0 == pytest.approx(0.92194, rel=1e-4)
    assert a1 == pytest.approx(2.75727e-4, rel=1e-4)
    # the interior mode is under-damped by the Rayleigh curve
    assert rayleigh_ratio(a0, a1, w[1]) == pytest.approx(0.016826, abs=2e-6)


def test_rayleigh_repeated_frequency_is_singular():
    with pytest.raises(np.linalg.LinAlgError):
        rayleigh_from_frequencies([10.0, 10.0], [0.02, 0.02])


def test_single_anchor_kinds(building):
    w1 = fixed_base_frequencies(building)[0]
    a0, a1 = rayleigh_coefficients(building, (0.05,), (1,), kind="mass")
    assert (a0, a1) == (pytest.approx(2 * 0.05 * w1), 0.0)
    a0, a1 = rayleigh_coefficients(building, (0.05,), (1,), kind="stiffness")
    assert a0 == 0.0 and rayleigh_ratio(a0, a1, w1) == pytest.approx(0.05)


def test_invalid_models_rejected():
    with pytest.raises(ValueError, match="positive"):
        BuildingModel(masses=(600.0, -1.0, 480.0, 479.0))
    with pytest.raises(ValueError, match="story"):
        BuildingModel(story_stiffnesses=(2e6, 2e6))
    with pytest.raises(ValueError, match="nonexistent"):
        BuildingModel(damping=ModalDamping((0.02, 0.02), (1, 5)))


def test_rigid_block_model_is_allowed():
    block = BuildingModel(masses=(1000.0,), story_stiffnesses=(), damping=ModalDamping((), ()))
    lam = np.linalg.eigvals(assemble_isolated(block, 1e4).A)
    np.testing.assert_allclose(np.sort(lam.imag), [-np.sqrt(10.0), np.sqrt(10.0)])
    assert damping_coefficients(block) == (0.0, 0.0)


def test_state_space_structure(building):
    ss = assemble_isolated(building)
    n = 4
    Minv = 1.0 / np.asarray(building.masses)
    np.testing.assert_array_equal(ss.B[n:, 0], -np.ones(n))
    np.testing.assert_allclose(ss.B[n:, 1:], np.diag(Minv))
    np.testing.assert_allclose(ss.K, chain_stiffness(building.story_stiffnesses))
    # without an isolator spring the base is free: the rigid-body pair is
    # {0, -a0} because mass-proportional damping acts on relative velocity
    a0, _ = damping_coefficients(building)
    lam = np.linalg.eigvals(ss.A)
    real = np.sort(lam[np.abs(lam.imag) < 1e-9].real)
    np.testing.assert_allclose(real, [-a0, 0.0], atol=1e-9)


def test_isolated_frequency_and_output_equation(building):
    ss = assemble_isolated(building, isolator_stiffness=4.6e4)
    w = np.sqrt(scipy.linalg.eigh(ss.K, np.diag(building.masses), eigvals_only=True))
    assert w[0] / (2 * np.pi) == pytest.approx(0.7492, abs=1e-3)
    rng = np.random.default_rng(0)
    Z, u = rng.standard_normal(8), rng.standard_normal(5)
    y = ss.output(Z, u)
    dZ = ss.A @ Z + ss.B @ u
    np.testing.assert_allclose(y[:4], Z[:4])
    # absolute acceleration = relative acceleration + ground acceleration
    np.testing.assert_allclose(y[4:], dZ[4:] + u[0])


def test_fixed_base_model_grounds_first_story(building):
    ss = assemble_fixed_base(building)
    assert ss.n_dof == 3
    lam = np.linalg.eigvals(ss.A)
    np.testing.assert_allclose(np.sort(np.abs(lam))[::2], fixed_base_frequencies(building), rtol=1e-9)


def test_explicit_rayleigh_pair_passthrough():
    model = BuildingModel(damping=RayleighDamping(0.1, 1e-3))
    assert damping_coefficients(model) == (0.1, 1e-3)


def test_mechanical_energy_of_static_deflection(building):
    ss = assemble_isolated(building, 4.6e4)
    Z = np.zeros(8)
    Z[:4] = 0.01  # rigid translation only strains the isolator
    assert mechanical_energy(ss, Z)[0] == pytest.approx(0.5 * 4.6e4 * 0.01**2)
