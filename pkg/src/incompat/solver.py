"""Feasibility engine for joint measurability of noisy observable pairs.

Given a pair (M1, M2) and a noise point (lambda, mu), the solver searches
for a joint observable G on the product outcome space together with trivial
noises p, q such that

    sum_k G[j,k] = lambda M1[j] + (1 - lambda) p_j I
    sum_j G[j,k] = mu     M2[k] + (1 - mu)     q_k I

with all G blocks PSD and p, q probability vectors. The search alternates
projections (Dykstra) between the PSD product cone and the affine margin
set. Verdicts are three-valued and asymmetric by design:

* Feasible is sound: it is only reported when an explicit witness, after
  rounding onto the cone, passes the independent certifier.
* Infeasible is heuristic: a stalled residual bounded away from zero after
  the full iteration budget. No dual certificate is computed.
* Undecided covers everything else.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._kernels import pycore
from .povm import JointPovm, NoisePoint, Povm, TrivialNoise

# Certifier gates: a witness counts only if, after rounding, every block
# clears this eigenvalue floor and every margin equation holds this tightly.
CERT_MIN_EIG = -1e-8
CERT_MARGIN_TOL = 1e-6


class Verdict(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget and decision thresholds for one feasibility run."""

    tol_feasible: float = 1e-7
    tol_infeasible: float = 1e-5
    max_iters: int = 50000
    stall_window: int = 2000
    stall_factor: float = 0.999
    cg_tol: float = 1e-12

    def __post_init__(self):
        if not self.tol_feasible < self.tol_infeasible:
            raise ValueError("tol_feasible must be smaller than tol_infeasible")


@dataclass(frozen=True, eq=False)
class FeasibilityProblem:
    m1: Povm
    m2: Povm
    point: NoisePoint
    optimize_noise: bool = True  # trivial observables free (True) or fixed uniform

    def __post_init__(self):
        if self.m1.dim != self.m2.dim:
            raise ValueError(f"dimension mismatch: {self.m1.dim} vs {self.m2.dim}")


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    status: Verdict
    residual: float
    iterations: int
    witness: tuple[JointPovm, TrivialNoise, TrivialNoise] | None = None

    @property
    def feasible(self) -> bool:
        return self.status is Verdict.FEASIBLE


def mixing_witness(m1: Povm, m2: Povm, lam: float, mu: float):
    """Explicit joint observable for any point with lam + mu <= 1.

    Classical randomization: with weight lam measure m1 and draw the second
    outcome from a fixed distribution, with weight mu the reverse, and with
    the remaining weight draw both outcomes. Margins come out exactly as the
    noisy observables with uniform trivial noise.
    """
    n1, n2, d = m1.n_outcomes, m2.n_outcomes, m1.dim
    p0 = np.full(n1, 1.0 / n1)
    q0 = np.full(n2, 1.0 / n2)
    eye = np.eye(d, dtype=complex)
    rest = 1.0 - lam - mu
    if rest < 0:
        raise ValueError(f"mixing witness needs lam + mu <= 1, got {lam + mu}")
    grid = (
        lam * m1.effects[:, None, :, :] * q0[None, :, None, None]
        + mu * m2.effects[None, :, :, :] * p0[:, None, None, None]
        + rest * (p0[:, None] * q0[None, :])[:, :, None, None] * eye
    )
    return JointPovm(dim=d, effects=grid), TrivialNoise(p0), TrivialNoise(q0)


def remix_witness(witness, problem: FeasibilityProblem, target: NoisePoint):
    """Rescale a witness for problem.point into one for a noisier point.

    Valid whenever target.lam <= point.lam and target.mu <= point.mu (both
    strictly positive): the extra noise is realized by classically forgetting
    the measured outcome with the complementary probability.
    """
    g, p, q = witness
    lam, mu = problem.point.lam, problem.point.mu
    lam2, mu2 = target.lam, target.mu
    if lam2 > lam or mu2 > mu:
        raise ValueError("remix only adds noise: target must be coordinate-wise smaller")
    if lam == 0.0 or mu == 0.0:
        return mixing_witness(problem.m1, problem.m2, 0.0, 0.0)
    a = lam2 / lam
    b = mu2 / mu
    n1, n2, d = g.n1, g.n2, g.dim
    u = np.full(n1, 1.0 / n1)
    v = np.full(n2, 1.0 / n2)
    eye = np.eye(d, dtype=complex)
    row_margin = g.effects.sum(axis=1)  # noisy m1 at lam
    col_margin = g.effects.sum(axis=0)  # noisy m2 at mu
    grid = (
        a * b * g.effects
        + a * (1 - b) * row_margin[:, None, :, :] * v[None, :, None, None]
        + (1 - a) * b * col_margin[None, :, :, :] * u[:, None, None, None]
        + (1 - a) * (1 - b) * (u[:, None] * v[None, :])[:, :, None, None] * eye
    )
    new_p = (a * (1 - lam) * p.weights + (1 - a) * u) / (1 - lam2) if lam2 < 1 else p.weights
    new_q = (b * (1 - mu) * q.weights + (1 - b) * v) / (1 - mu2) if mu2 < 1 else q.weights
    return JointPovm(dim=d, effects=grid), TrivialNoise(new_p), TrivialNoise(new_q)


def round_witness(grid: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Push a near-witness onto the cone: PSD-project every block, clip and
    renormalize the noise vectors.

    Deliberately routed through the numpy (LAPACK) projection so the
    certification path never shares code with the compiled solver loop.
    """
    rounded = pycore.psd_project_stack(np.asarray(grid, dtype=complex))
    pc = np.maximum(np.asarray(p, dtype=float), 0.0)
    qc = np.maximum(np.asarray(q, dtype=float), 0.0)
    pc = pc / pc.sum() if pc.sum() > 0 else np.full(pc.shape, 1.0 / pc.size)
    qc = qc / qc.sum() if qc.sum() > 0 else np.full(qc.shape, 1.0 / qc.size)
    return rounded, pc, qc


def certify_witness(g: JointPovm, p: TrivialNoise, q: TrivialNoise,
                    prob: FeasibilityProblem) -> bool:
    """Independent soundness gate for a claimed witness.

    Rounds the candidate onto the cone, then checks the eigenvalue floor on
    every block and both margin equations in Frobenius norm. Uses only dense
    eigendecompositions, no solver state.
    """
    m1, m2 = prob.m1, prob.m2
    if g.dim != m1.dim or g.n1 != m1.n_outcomes or g.n2 != m2.n_outcomes:
        return False
    if p.n_outcomes != m1.n_outcomes or q.n_outcomes != m2.n_outcomes:
        return False
    lam, mu = prob.point.lam, prob.point.mu
    grid, pw, qw = round_witness(g.effects, p.weights, q.weights)
    eigs = np.linalg.eigvalsh((grid + np.conj(np.swapaxes(grid, -1, -2))) / 2)
    if eigs.min() < CERT_MIN_EIG:
        return False
    eye = np.eye(g.dim, dtype=complex)
    row = grid.sum(axis=1) - lam * m1.effects - (1 - lam) * pw[:, None, None] * eye
    col = grid.sum(axis=0) - mu * m2.effects - (1 - mu) * qw[:, None, None] * eye
    row_err = np.sqrt((np.abs(row) ** 2).sum(axis=(1, 2))).max()
    col_err = np.sqrt((np.abs(col) ** 2).sum(axis=(1, 2))).max()
    return bool(row_err <= CERT_MARGIN_TOL and col_err <= CERT_MARGIN_TOL)


def _certified_result(grid, p, q, prob, residual, iterations) -> FeasibilityResult | None:
    rounded, pw, qw = round_witness(grid, p, q)
    witness = (JointPovm(dim=prob.m1.dim, effects=rounded), TrivialNoise(pw), TrivialNoise(qw))
    if certify_witness(*witness, prob):
        return FeasibilityResult(Verdict.FEASIBLE, residual, iterations, witness)
    return None


def feasibility_test(prob: FeasibilityProblem, cfg: SolverConfig | None = None,
                     backend: str | None = None) -> FeasibilityResult:
    """Decide whether prob.point lies in the joint measurability region.

    Points with lam + mu <= 1 (in particular lam = 0 or mu = 0) are settled
    by the explicit mixing witness without iterating. Everything else runs
    the projection loop; Feasible is returned only with a certified witness.
    """
    cfg = cfg or SolverConfig()
    m1, m2 = prob.m1, prob.m2
    lam, mu = prob.point.lam, prob.point.mu

    if lam == 0.0 or mu == 0.0 or lam + mu <= 1.0:
        witness = mixing_witness(m1, m2, lam, mu)
        result = _certified_result(witness[0].effects, witness[1].weights,
                                   witness[2].weights, prob, 0.0, 0)
        if result is not None:
            return result
        return FeasibilityResult(Verdict.UNDECIDED, math.inf, 0)  # pragma: no cover

    solve = _kernels.get_solver(backend)
    converged, grid, p, q, residual, iterations, stall_ratio = solve(
        m1.effects, m2.effects, lam, mu, prob.optimize_noise,
        cfg.tol_feasible, cfg.max_iters, cfg.stall_window, cfg.stall_factor, cfg.cg_tol,
    )
    if converged:
        result = _certified_result(grid, p, q, prob, residual, iterations)
        if result is not None:
            return result
        return FeasibilityResult(Verdict.UNDECIDED, residual, iterations)
    if residual > cfg.tol_infeasible and stall_ratio > cfg.stall_factor:
        return FeasibilityResult(Verdict.INFEASIBLE, residual, iterations)
    return FeasibilityResult(Verdict.UNDECIDED, residual, iterations)


@dataclass(frozen=True)
class ProbeRecord:
    lam: float
    mu: float
    status: Verdict
    residual: float
    iterations: int


@dataclass(frozen=True)
class JmdBracket:
    """Certified lower / heuristic upper bracket for the symmetric noise degree."""

    certified_lower: float
    heuristic_upper: float
    probes: tuple[ProbeRecord, ...] = ()

    @property
    def width(self) -> float:
        return self.heuristic_upper - self.certified_lower


def _probe_with_retry(m1, m2, lam, mu, cfg, optimize_noise, backend, records):
    """One feasibility probe; Undecided gets a single retry at 4x budget."""
    prob = FeasibilityProblem(m1, m2, NoisePoint(lam, mu), optimize_noise)
    res = feasibility_test(prob, cfg, backend)
    if res.status is Verdict.UNDECIDED:
        res = feasibility_test(prob, replace(cfg, max_iters=4 * cfg.max_iters), backend)
    records.append(ProbeRecord(lam, mu, res.status, res.residual, res.iterations))
    return res


def _bisect_line(m1, m2, point_at, lo, cfg, tol, optimize_noise, backend,
                 undecided_budget) -> tuple[float, float, tuple[ProbeRecord, ...]]:
    """Generic bracket search along a parametrized line x -> (lam, mu).

    lo must be a priori certified (triangle). The lower bound only advances
    across certified witnesses; Infeasible probes pull the heuristic upper
    bound down; an Undecided probe (after its retry) shrinks the step toward
    the certified side and consumes the retry budget.
    """
    records: list[ProbeRecord] = []
    lower, upper = lo, 1.0
    top = _probe_with_retry(m1, m2, *point_at(1.0), cfg, optimize_noise, backend, records)
    if top.feasible:
        return 1.0, 1.0, tuple(records)

    step = (upper - lower) / 2.0
    budget = undecided_budget
    while upper - lower > tol and budget > 0 and step > 1e-12:
        x = lower + step
        res = _probe_with_retry(m1, m2, *point_at(x), cfg, optimize_noise, backend, records)
        if res.feasible:
            lower = x
            step = (upper - lower) / 2.0
        elif res.status is Verdict.INFEASIBLE:
            upper = x
            step = (upper - lower) / 2.0
        else:
            step /= 2.0
            budget -= 1
    return lower, upper, tuple(records)


def bisect_boundary(m1: Povm, m2: Povm, mu: float, cfg: SolverConfig | None = None,
                    tol: float = 5e-3, optimize_noise: bool = True,
                    backend: str | None = None) -> tuple[float, float, tuple[ProbeRecord, ...]]:
    """Bracket the largest feasible lambda at fixed mu.

    Starts from the triangle edge max(0, 1 - mu), which is feasible for any
    pair, so the returned lower bound is always certified.
    """
    cfg = cfg or SolverConfig()
    lo = max(0.0, 1.0 - mu)
    return _bisect_line(m1, m2, lambda x: (x, mu), lo, cfg, tol, optimize_noise, backend, 6)


def jmd_bisection(m1: Povm, m2: Povm, cfg: SolverConfig | None = None,
                  tol: float = 1e-3, optimize_noise: bool = True,
                  backend: str | None = None) -> JmdBracket:
    """Bracket the joint measurability degree: the largest lambda such that
    (lambda, lambda) is feasible.

    Bisection over [1/2, 1] along the symmetry line. The returned lower end
    is certified (witnesses exist for it and everything below); the upper
    end is heuristic since infeasibility carries no certificate.
    """
    cfg = cfg or SolverConfig()
    lower, upper, records = _bisect_line(
        m1, m2, lambda x: (x, x), 0.5, cfg, tol, optimize_noise, backend, 6
    )
    return JmdBracket(lower, upper, records)
