"""Dense complex-matrix primitives: tensor products, partial traces,
Hermitian eigendecomposition and projection onto the PSD cone.

All operators are plain numpy arrays of complex128. Matrices are small
(dimensions up to a few hundred at most), so everything is dense and
comparisons use the Frobenius norm throughout.
"""

from __future__ import annotations

import numpy as np

# Inputs farther from Hermitian than HERMITICITY_TOL * dim are rejected
# rather than silently symmetrized.
HERMITICITY_TOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(a.T)


def frobenius(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def as_operator(a) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a: np.ndarray) -> float:
    """Frobenius distance to the Hermitian part, ||a - a^dag||_F."""
    return frobenius(a - dagger(a))


def require_hermitian(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Return the exactly Hermitian part of a, raising if the defect is large.

    The tolerance scales with dimension: tol defaults to HERMITICITY_TOL * dim.
    """
    m = as_operator(a)
    if tol is None:
        tol = HERMITICITY_TOL * m.shape[0]
    if hermiticity_defect(m) > tol:
        raise ValueError(
            f"matrix is not Hermitian within tolerance {tol:g} "
            f"(defect {hermiticity_defect(m):.3e})"
        )
    return (m + dagger(m)) / 2


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square operators.

    Entry ((i,k),(j,l)) of the result is a[i,j] * b[k,l]; the output
    dimension is dim(a) * dim(b).
    """
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(m: np.ndarray, dims: tuple[int, int], keep: str = "first") -> np.ndarray:
    """Trace out one tensor factor of an operator on a bipartite space.

    Parameters
    ----------
    m : operator on a space of dimension d1 * d2
    dims : (d1, d2) factor dimensions
    keep : "first" or "second", the factor the result acts on

    The full trace is preserved: tr(result) == tr(m).
    """
    m = as_operator(m)
    d1, d2 = dims
    if m.shape[0] != d1 * d2:
        raise ValueError(f"dimension mismatch: operator is {m.shape[0]}, dims give {d1 * d2}")
    t = m.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.trace(t, axis1=1, axis2=3)
    if keep == "second":
        return np.trace(t, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues w real and sorted in descending order
    and eigenvectors as the columns of v, so that m = v @ diag(w) @ v^dag.
    Raises ValueError if the input is not Hermitian within tolerance.
    """
    h = require_hermitian(m)
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_project(m: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm.

    Clips negative eigenvalues of the (Hermitian) input to zero. PSD inputs
    are fixed points up to roundoff.
    """
    w, v = eigh(m)
    return (v * np.maximum(w, 0.0)) @ dagger(v)


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(require_hermitian(m))[0])
