import numpy as np
import pytest
from numpy.testing import assert_allclose

from incompat import linalg

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def brute_partial_trace(m, d1, d2, keep):
    """Index-by-index reference implementation."""
    if keep == "first":
        out = np.zeros((d1, d1), dtype=complex)
        for i in range(d1):
            for j in range(d1):
                out[i, j] = sum(m[i * d2 + k, j * d2 + k] for k in range(d2))
    else:
        out = np.zeros((d2, d2), dtype=complex)
        for i in range(d2):
            for j in range(d2):
                out[i, j] = sum(m[k * d2 + i, k * d2 + j] for k in range(d1))
    return out


class TestTensorProduct:
    def test_identity(self):
        assert_allclose(linalg.tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.diag([0.0, 1.0]).astype(complex)
        assert_allclose(linalg.tensor_product(a, b), np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_pauli_x_entry(self):
        # entry ((0,0),(1,1)) is sx[0,1] * sx[0,1] = 1
        t = linalg.tensor_product(SX, SX)
        assert t[0, 3] == 1.0 + 0j

    def test_associative_exactly(self):
        # dyadic entries make every float product exact, so associativity
        # holds with equality, not just within tolerance
        rng = np.random.default_rng(42)
        vals = np.array([0.0, 1.0, -1.0, 0.5, -0.5, 2.0])
        for _ in range(20):
            a, b, c = (
                rng.choice(vals, (2, 2)) + 1j * rng.choice(vals, (2, 2)) for _ in range(3)
            )
            left = linalg.tensor_product(linalg.tensor_product(a, b), c)
            right = linalg.tensor_product(a, linalg.tensor_product(b, c))
            assert np.array_equal(left, right)


class TestPartialTrace:
    def test_product_factorizes(self):
        rng = np.random.default_rng(1)
        for d1, d2 in [(2, 2), (2, 3), (3, 2)]:
            rho = random_hermitian(rng, d1)
            sig = random_hermitian(rng, d2)
            full = linalg.tensor_product(rho, sig)
            assert_allclose(
                linalg.partial_trace(full, (d1, d2), "first"),
                np.trace(sig) * rho, atol=1e-10,
            )
            assert_allclose(
                linalg.partial_trace(full, (d1, d2), "second"),
                np.trace(rho) * sig, atol=1e-10,
            )

    def test_identity(self):
        assert_allclose(linalg.partial_trace(np.eye(4), (2, 2), "first"), 2 * np.eye(2))

    def test_cloned_basis_state(self):
        # (2/3) S (|0><0| x I) S traced over the second factor, S the
        # symmetric projector on two qubits, comes out as diag(5/6, 1/6)
        s = np.array([
            [1, 0, 0, 0],
            [0, 0.5, 0.5, 0],
            [0, 0.5, 0.5, 0],
            [0, 0, 0, 1],
        ], dtype=complex)
        chan = (2.0 / 3.0) * s @ np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex) @ s
        reduced = linalg.partial_trace(chan, (2, 2), "first")
        assert_allclose(reduced, np.diag([5.0 / 6.0, 1.0 / 6.0]), atol=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        for d1, d2 in [(2, 2), (2, 4), (3, 3)]:
            m = random_hermitian(rng, d1 * d2)
            for keep in ("first", "second"):
                assert_allclose(
                    linalg.partial_trace(m, (d1, d2), keep),
                    brute_partial_trace(m, d1, d2, keep), atol=1e-12,
                )

    def test_trace_preserved(self):
        rng = np.random.default_rng(3)
        m = random_hermitian(rng, 6)
        for keep in ("first", "second"):
            assert_allclose(
                np.trace(linalg.partial_trace(m, (2, 3), keep)), np.trace(m), atol=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(5), (2, 2), "first")


class TestEigh:
    def test_pauli_z(self):
        w, _ = linalg.eigh(SZ)
        assert_allclose(w, [1.0, -1.0])

    def test_identity(self):
        for d in (2, 5):
            w, _ = linalg.eigh(np.eye(d))
            assert_allclose(w, np.ones(d))

    def test_phase_half_circle_block(self):
        # [[1/2, -i/pi], [i/pi, 1/2]] has eigenvalues 1/2 +- 1/pi
        block = np.array([[0.5, -1j / np.pi], [1j / np.pi, 0.5]])
        w, _ = linalg.eigh(block)
        assert_allclose(w, [0.5 + 1 / np.pi, 0.5 - 1 / np.pi], atol=1e-14)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            d = int(rng.integers(2, 17))
            h = random_hermitian(rng, d)
            w, v = linalg.eigh(h)
            assert np.all(np.diff(w) <= 1e-12)  # descending
            assert np.linalg.norm(v @ v.conj().T - np.eye(d)) <= 1e-10
            assert np.linalg.norm((v * w) @ v.conj().T - h) <= 1e-9 * d

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            linalg.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestPsdProject:
    def test_clips_negative_branch(self):
        assert_allclose(linalg.psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]),
                        atol=1e-14)

    def test_pauli_x(self):
        assert_allclose(linalg.psd_project(SX), (SX + np.eye(2)) / 2, atol=1e-14)

    def test_fixed_point_on_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = int(rng.integers(2, 9))
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            psd = g @ g.conj().T
            assert np.linalg.norm(linalg.psd_project(psd) - psd) <= 1e-10 * np.linalg.norm(psd)

    def test_output_is_psd(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            d = int(rng.integers(2, 9))
            h = random_hermitian(rng, d)
            out = linalg.psd_project(h)
            assert linalg.min_eigenvalue(out) >= -1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            linalg.psd_project(np.array([[0.0, 2.0], [0.0, 0.0]]))


def test_hermiticity_gate_scales_with_dim():
    h = np.eye(3, dtype=complex)
    h[0, 1] = 1e-10  # defect far above 1e-12 * dim
    with pytest.raises(ValueError):
        linalg.require_hermitian(h)
    h[0, 1] = 1e-15
    linalg.require_hermitian(h)  # within tolerance
