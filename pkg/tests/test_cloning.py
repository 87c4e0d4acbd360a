import numpy as np
import pytest
from numpy.testing import assert_allclose

from incompat.cloning import (CloningDevice, clone_state, cloning_channel,
                              cloning_coefficient, cloning_joint_observable,
                              symmetric_projector)
from incompat.constructions import fourier_mub_pair, random_pair
from incompat.povm import (NoisePoint, Povm, uniform_trivial, validate_joint)
from incompat.solver import FeasibilityProblem, certify_witness


def random_density(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


class TestSymmetricProjector:
    def test_qubit_rank_and_trace(self):
        s = symmetric_projector(2)
        assert_allclose(np.trace(s), 3.0)
        assert np.sum(np.linalg.eigvalsh(s) > 0.5) == 3

    def test_fixes_symmetric_and_averages_crossed(self):
        s = symmetric_projector(2)
        e00 = np.array([1, 0, 0, 0], dtype=complex)
        e01 = np.array([0, 1, 0, 0], dtype=complex)
        e10 = np.array([0, 0, 1, 0], dtype=complex)
        assert_allclose(s @ e00, e00)
        assert_allclose(s @ e01, (e01 + e10) / 2)

    def test_idempotent_hermitian_rank(self):
        for d in (2, 3, 4, 5):
            s = symmetric_projector(d)
            assert np.linalg.norm(s @ s - s) <= 1e-10
            assert np.linalg.norm(s - s.conj().T) <= 1e-12
            assert_allclose(np.trace(s).real, d * (d + 1) / 2)

    def test_device_factory(self):
        dev = CloningDevice.for_dimension(3)
        assert dev.dim == 3
        assert_allclose(dev.symmetric_projector, symmetric_projector(3))


class TestCloningCoefficient:
    def test_reference_values(self):
        assert_allclose(cloning_coefficient(2), 2.0 / 3.0)
        assert_allclose(cloning_coefficient(3), 5.0 / 8.0)

    def test_asymptotics(self):
        assert abs(cloning_coefficient(10**6) - 0.5) < 1e-6

    def test_always_above_half(self):
        for d in (2, 3, 10, 100, 10**6):
            assert cloning_coefficient(d) > 0.5


class TestCloneState:
    def test_basis_state_qubit(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert_allclose(clone_state(rho, 2), np.diag([5.0 / 6.0, 1.0 / 6.0]), atol=1e-12)

    def test_maximally_mixed_fixed_point(self):
        for d in (2, 3, 4):
            rho = np.eye(d) / d
            assert_allclose(clone_state(rho, d), rho, atol=1e-12)

    def test_trace_preserving(self):
        rng = np.random.default_rng(10)
        for d in (2, 3):
            rho = random_density(rng, d)
            assert_allclose(np.trace(cloning_channel(rho, d)).real, 1.0, atol=1e-12)
            assert_allclose(np.trace(clone_state(rho, d)).real, 1.0, atol=1e-12)

    def test_closed_form_noisy_state(self):
        rng = np.random.default_rng(11)
        for d in (2, 3, 4, 5):
            c = cloning_coefficient(d)
            for _ in range(50):
                rho = random_density(rng, d)
                expected = c * rho + (1 - c) * np.eye(d) / d
                assert np.linalg.norm(clone_state(rho, d) - expected) <= 1e-10

    def test_rejects_invalid_density(self):
        with pytest.raises(ValueError):
            clone_state(np.diag([2.0, 0.0]).astype(complex), 2)  # trace 2
        with pytest.raises(ValueError):
            clone_state(np.diag([1.5, -0.5]).astype(complex), 2)  # negative


class TestCloningJointObservable:
    def test_margin_identity_random_pairs(self):
        rng = np.random.default_rng(12)
        for d in (2, 3, 4, 5):
            c = cloning_coefficient(d)
            eye = np.eye(d)
            for seed in range(3):
                outcomes = int(rng.integers(2, 6))
                m1, m2 = random_pair(d, outcomes, seed)
                joint = cloning_joint_observable(m1, m2)
                assert validate_joint(joint).ok
                t1 = uniform_trivial(m1).weights
                t2 = uniform_trivial(m2).weights
                row = joint.effects.sum(axis=1)
                col = joint.effects.sum(axis=0)
                exp_row = c * m1.effects + (1 - c) * t1[:, None, None] * eye
                exp_col = c * m2.effects + (1 - c) * t2[:, None, None] * eye
                assert np.abs(row - exp_row).max() <= 1e-10
                assert np.abs(col - exp_col).max() <= 1e-10

    def test_single_outcome_pair(self):
        triv = Povm(dim=3, effects=np.eye(3, dtype=complex)[None, :, :])
        joint = cloning_joint_observable(triv, triv)
        assert joint.effects.shape == (1, 1, 3, 3)
        assert_allclose(joint.effects[0, 0], np.eye(3), atol=1e-12)

    def test_mub_witness_certifies_at_cloning_point(self):
        pair = fourier_mub_pair(2)
        c = cloning_coefficient(2)
        joint = cloning_joint_observable(pair.povm_a, pair.povm_b)
        prob = FeasibilityProblem(pair.povm_a, pair.povm_b, NoisePoint(c, c))
        assert certify_witness(joint, uniform_trivial(pair.povm_a),
                               uniform_trivial(pair.povm_b), prob)

    def test_dimension_mismatch(self):
        m1, _ = random_pair(2, 2, 0)
        _, m2 = random_pair(3, 2, 0)
        with pytest.raises(ValueError):
            cloning_joint_observable(m1, m2)
