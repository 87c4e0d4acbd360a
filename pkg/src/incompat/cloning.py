"""Symmetric 1-to-2 cloning channel and the joint observable it induces
for an arbitrary pair of measurements.

Measuring each clone separately realizes a joint measurement of noisy
versions of the two observables, with noise weight c(d) = (2+d)/(2(1+d))
on the sharp part and uniform trivial noise on the rest. This gives a
constructive feasibility witness at the symmetric point (c(d), c(d)) for
every pair in dimension d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .povm import JointPovm, Povm

DENSITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CloningDevice:
    """Symmetric-subspace data for the cloner in dimension d."""

    dim: int
    symmetric_projector: np.ndarray  # projector on the d*d-dimensional pair space

    @classmethod
    def for_dimension(cls, d: int) -> "CloningDevice":
        return cls(dim=d, symmetric_projector=symmetric_projector(d))


def symmetric_projector(d: int) -> np.ndarray:
    """Projector onto the symmetric subspace of C^d x C^d, (I + SWAP) / 2.

    Rank d(d+1)/2; fixes symmetric product vectors and averages |ij> with |ji>.
    """
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    return (np.eye(d * d, dtype=complex) + swap) / 2.0


def cloning_coefficient(d: int) -> float:
    """Fidelity weight (2+d)/(2(1+d)) of each clone; always in (1/2, 2/3]."""
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    return (2.0 + d) / (2.0 * (1.0 + d))


def _require_density(rho: np.ndarray, d: int) -> np.ndarray:
    rho = linalg.require_hermitian(rho, tol=DENSITY_TOL)
    if rho.shape[0] != d:
        raise ValueError(f"state has dimension {rho.shape[0]}, expected {d}")
    if abs(np.trace(rho).real - 1.0) > DENSITY_TOL:
        raise ValueError(f"state trace {np.trace(rho).real} is not 1")
    if linalg.min_eigenvalue(rho) < -DENSITY_TOL:
        raise ValueError("state is not positive semidefinite")
    return rho


def cloning_channel(rho: np.ndarray, d: int) -> np.ndarray:
    """Two-clone output state (2/(d+1)) S (rho x I) S on the pair space."""
    rho = _require_density(rho, d)
    s = symmetric_projector(d)
    return (2.0 / (d + 1)) * (s @ linalg.tensor_product(rho, np.eye(d)) @ s)


def clone_state(rho: np.ndarray, d: int) -> np.ndarray:
    """Reduced state of one clone: c(d) rho + (1 - c(d)) I/d."""
    return linalg.partial_trace(cloning_channel(rho, d), (d, d), keep="first")


def cloning_joint_observable(m1: Povm, m2: Povm) -> JointPovm:
    """Joint observable realized by measuring m1 on one clone and m2 on the other.

    Effect (j, k) is the Heisenberg-picture pullback of m1[j] x m2[k] through
    the cloning channel: (2/(d+1)) Tr_2[ S (m1[j] x m2[k]) S ]. Its margins are
    the noisy observables c(d) m_i + (1 - c(d)) tr(m_i(.))/d * I.
    """
    if m1.dim != m2.dim:
        raise ValueError(f"dimension mismatch: {m1.dim} vs {m2.dim}")
    d = m1.dim
    s = symmetric_projector(d)
    scale = 2.0 / (d + 1)
    effects = np.empty((m1.n_outcomes, m2.n_outcomes, d, d), dtype=complex)
    for j in range(m1.n_outcomes):
        for k in range(m2.n_outcomes):
            lifted = s @ linalg.tensor_product(m1.effects[j], m2.effects[k]) @ s
            block = scale * linalg.partial_trace(lifted, (d, d), keep="first")
            effects[j, k] = (block + linalg.dagger(block)) / 2
    return JointPovm(dim=d, effects=effects)
