"""Named observable families: Fourier-conjugate basis pairs, number and
binned phase observables on truncated spaces, and seeded random POVMs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .povm import Povm


@dataclass(frozen=True, eq=False)
class MubPair:
    """Two rank-one POVMs from mutually unbiased bases: all overlaps are 1/d."""

    dim: int
    povm_a: Povm
    povm_b: Povm


def fourier_mub_pair(d: int) -> MubPair:
    """Projective measurements in the computational basis and its discrete
    Fourier transform.

    The second basis is psi_k = d^{-1/2} sum_j exp(2 pi i j k / d) phi_j,
    which is mutually unbiased with the computational basis for every d.
    For d = 2 this is the familiar Z / X eigenbasis pair.
    """
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    j = np.arange(d)
    basis_a = np.eye(d, dtype=complex)
    basis_b = np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)  # row k is psi_k
    eff_a = np.stack([np.outer(basis_a[k], basis_a[k].conj()) for k in range(d)])
    eff_b = np.stack([np.outer(basis_b[k], basis_b[k].conj()) for k in range(d)])
    return MubPair(dim=d, povm_a=Povm(dim=d, effects=eff_a), povm_b=Povm(dim=d, effects=eff_b))


def mub_jmd_analytic(d: int) -> float:
    """Closed-form joint measurability degree of the Fourier pair in dimension d.

    Strictly decreasing in d and tends to 1/2 from above.
    """
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    r = math.sqrt(d)
    return (2.0 + r) / (2.0 * (1.0 + r))


def number_povm(d: int) -> Povm:
    """Projective measurement onto the first d number states."""
    if d < 1:
        raise ValueError(f"need dimension >= 1, got {d}")
    effects = np.zeros((d, d, d), dtype=complex)
    for n in range(d):
        effects[n, n, n] = 1.0
    return Povm(dim=d, effects=effects)


def phase_povm_binned(d: int, bins: int) -> Povm:
    """Covariant phase observable truncated to d number states, coarse-grained
    over `bins` equal arcs of the circle.

    Effect b has entries (1/2pi) * integral over [2 pi b / bins, 2 pi (b+1) / bins)
    of exp(i (m - n) theta); diagonals are exactly 1/bins and the effects sum
    to the identity because all full-circle off-diagonal integrals vanish.
    This is a truncated model of the phase observable, not the operator on the
    full number space.
    """
    if d < 1:
        raise ValueError(f"need dimension >= 1, got {d}")
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    m, n = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    diff = m - n
    edges = 2.0 * np.pi * np.arange(bins + 1) / bins
    effects = np.empty((bins, d, d), dtype=complex)
    off = diff != 0
    safe = np.where(off, diff, 1)
    for b in range(bins):
        block = np.empty((d, d), dtype=complex)
        block[...] = 1.0 / bins
        integral = (np.exp(1j * safe * edges[b + 1]) - np.exp(1j * safe * edges[b])) / (
            2j * np.pi * safe
        )
        block[off] = integral[off]
        effects[b] = block
    return Povm(dim=d, effects=effects, labels=tuple(range(bins)))


def random_povm(d: int, outcomes: int, seed: int) -> Povm:
    """Random POVM, deterministic in the seed.

    Draws one Wishart-style PSD matrix per outcome (G G^dag with G complex
    Gaussian) and normalizes the family by S^{-1/2} (.) S^{-1/2} with S the
    sum, which is full rank almost surely.
    """
    if outcomes < 1:
        raise ValueError(f"need at least 1 outcome, got {outcomes}")
    rng = np.random.default_rng(seed)
    return _random_povm_from(rng, d, outcomes)


def _random_povm_from(rng: np.random.Generator, d: int, outcomes: int) -> Povm:
    for _ in range(8):
        g = rng.standard_normal((outcomes, d, d)) + 1j * rng.standard_normal((outcomes, d, d))
        raw = g @ np.conj(np.swapaxes(g, -1, -2))
        total = raw.sum(axis=0)
        w, v = linalg.eigh(total)
        if w[-1] <= 1e-12 * w[0]:
            continue  # singular draw, retry
        inv_sqrt = (v / np.sqrt(w)) @ linalg.dagger(v)
        return Povm(dim=d, effects=inv_sqrt @ raw @ inv_sqrt)
    raise RuntimeError("could not draw a full-rank POVM normalizer")


def random_pair(d: int, outcomes: int, seed: int) -> tuple[Povm, Povm]:
    """Two independent random POVMs from one seed (deterministic)."""
    rng = np.random.default_rng(seed)
    m1 = _random_povm_from(rng, d, outcomes)
    m2 = _random_povm_from(rng, d, outcomes)
    return m1, m2
