"""POVM data model: effect collections, joint observables over outcome
pairs, trivial (state-independent) observables and noise mixing.

Validation is diagnostic: constructors only enforce shapes, so invalid
candidates (for instance solver iterates) can be represented and inspected.
`validate` / `validate_joint` are the arbiters of the numerical invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg

# Numerical invariants for a valid POVM.
EFFECT_MIN_EIG_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite-outcome POVM: a stack of effect operators summing to identity."""

    dim: int
    effects: np.ndarray  # (n_outcomes, dim, dim) complex
    labels: tuple = ()

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=complex)
        if eff.ndim != 3 or eff.shape[1:] != (self.dim, self.dim):
            raise ValueError(f"effects must have shape (n, {self.dim}, {self.dim}), got {eff.shape}")
        if eff.shape[0] == 0:
            raise ValueError("a POVM needs at least one effect")
        object.__setattr__(self, "effects", _freeze(eff))
        labels = tuple(self.labels) if self.labels else tuple(range(eff.shape[0]))
        if len(labels) != eff.shape[0]:
            raise ValueError("labels do not match the number of effects")
        object.__setattr__(self, "labels", labels)

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    def __len__(self) -> int:
        return self.n_outcomes

    def __getitem__(self, j: int) -> np.ndarray:
        return self.effects[j]


@dataclass(frozen=True, eq=False)
class JointPovm:
    """Observable on a product outcome space, effects indexed by pairs (j, k)."""

    dim: int
    effects: np.ndarray  # (n1, n2, dim, dim) complex

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=complex)
        if eff.ndim != 4 or eff.shape[2:] != (self.dim, self.dim):
            raise ValueError(
                f"effects must have shape (n1, n2, {self.dim}, {self.dim}), got {eff.shape}"
            )
        if eff.shape[0] == 0 or eff.shape[1] == 0:
            raise ValueError("joint observable needs at least one outcome per margin")
        object.__setattr__(self, "effects", _freeze(eff))

    @property
    def n1(self) -> int:
        return self.effects.shape[0]

    @property
    def n2(self) -> int:
        return self.effects.shape[1]


@dataclass(frozen=True, eq=False)
class TrivialNoise:
    """Probability vector defining a trivial observable with effects w[j] * I."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty vector")
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def n_outcomes(self) -> int:
        return self.weights.shape[0]


def uniform_noise(n: int) -> TrivialNoise:
    """Uniform trivial noise over n outcomes."""
    return TrivialNoise(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class NoisePoint:
    """A point (lambda, mu) in the noise square [0,1] x [0,1]."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0 and 0.0 <= self.mu <= 1.0):
            raise ValueError(f"noise coordinates must lie in [0,1], got ({self.lam}, {self.mu})")


@dataclass(frozen=True)
class ValidationReport:
    min_eig: float
    completeness_residual: float
    ok: bool


def _report_for(effects_flat: np.ndarray, dim: int) -> ValidationReport:
    # Diagnostic, never raises: non-Hermitian effects simply fail the check.
    herm_defect = max(linalg.hermiticity_defect(e) for e in effects_flat)
    herm_parts = (effects_flat + np.conj(np.swapaxes(effects_flat, -1, -2))) / 2
    min_eig = float(np.linalg.eigvalsh(herm_parts)[:, 0].min())
    residual = linalg.frobenius(effects_flat.sum(axis=0) - np.eye(dim))
    ok = (
        min_eig >= -EFFECT_MIN_EIG_TOL
        and residual <= COMPLETENESS_TOL
        and herm_defect <= linalg.HERMITICITY_TOL * dim
    )
    return ValidationReport(min_eig=min_eig, completeness_residual=residual, ok=ok)


def validate(p: Povm) -> ValidationReport:
    """Check positivity and completeness of a POVM; never raises."""
    return _report_for(p.effects, p.dim)


def validate_joint(g: JointPovm) -> ValidationReport:
    """Same invariants for a joint observable, over the whole outcome grid."""
    return _report_for(g.effects.reshape(-1, g.dim, g.dim), g.dim)


def validate_noise(t: TrivialNoise) -> bool:
    w = t.weights
    return bool(w.min() >= 0.0 and abs(w.sum() - 1.0) <= WEIGHT_SUM_TOL)


def margin_first(g: JointPovm) -> Povm:
    """First margin: effect j is the row sum over all second outcomes."""
    return Povm(dim=g.dim, effects=g.effects.sum(axis=1))


def margin_second(g: JointPovm) -> Povm:
    """Second margin: effect k is the column sum over all first outcomes."""
    return Povm(dim=g.dim, effects=g.effects.sum(axis=0))


def mix_with_trivial(m: Povm, weight: float, noise: TrivialNoise) -> Povm:
    """Convex mixture weight * m + (1 - weight) * trivial noise.

    Effect j becomes weight * m[j] + (1 - weight) * noise.weights[j] * I.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0,1], got {weight}")
    if noise.n_outcomes != m.n_outcomes:
        raise ValueError(
            f"outcome-count mismatch: POVM has {m.n_outcomes}, noise has {noise.n_outcomes}"
        )
    eye = np.eye(m.dim, dtype=complex)
    effects = weight * m.effects + (1.0 - weight) * noise.weights[:, None, None] * eye
    return Povm(dim=m.dim, effects=effects, labels=m.labels)


def uniform_trivial(m: Povm) -> TrivialNoise:
    """Trivial noise matching m's outcome statistics on the maximally mixed state."""
    weights = np.trace(m.effects, axis1=1, axis2=2).real / m.dim
    return TrivialNoise(weights)


# --- JSON wire format ------------------------------------------------------
#
# A matrix is a list of rows, each entry a [re, im] pair. A Povm is
# {"dim": d, "effects": [matrix, ...], "labels": [...]}.


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def povm_to_dict(p: Povm) -> dict:
    return {
        "dim": p.dim,
        "effects": [_matrix_to_json(e) for e in p.effects],
        "labels": list(p.labels),
    }


def povm_from_dict(d: dict) -> Povm:
    dim = int(d["dim"])
    effects = np.stack([_matrix_from_json(e) for e in d["effects"]])
    labels = tuple(d.get("labels") or ())
    return Povm(dim=dim, effects=effects, labels=labels)


def joint_to_dict(g: JointPovm) -> dict:
    return {
        "dim": g.dim,
        "n1": g.n1,
        "n2": g.n2,
        "effects": [[_matrix_to_json(g.effects[j, k]) for k in range(g.n2)] for j in range(g.n1)],
    }


def joint_from_dict(d: dict) -> JointPovm:
    dim = int(d["dim"])
    effects = np.stack(
        [np.stack([_matrix_from_json(e) for e in row]) for row in d["effects"]]
    )
    return JointPovm(dim=dim, effects=effects)


def noise_to_dict(t: TrivialNoise) -> dict:
    return {"weights": [float(w) for w in t.weights]}


def noise_from_dict(d: dict) -> TrivialNoise:
    return TrivialNoise(np.asarray(d["weights"], dtype=float))
