"""Mapping of joint measurability regions and the dimension-dependence
curves, with CSV export for plotting.

The region of a pair is convex and downward closed, so each horizontal
slice at fixed mu is an interval [0, lambda_max(mu)]; region_boundary
brackets lambda_max per slice. Grid scans record raw verdicts for
consistency checks (no Infeasible point may sit coordinate-wise below a
Feasible one).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cloning import cloning_coefficient
from .constructions import mub_jmd_analytic
from .povm import NoisePoint, Povm
from .solver import FeasibilityProblem, SolverConfig, Verdict, bisect_boundary, feasibility_test


@dataclass(frozen=True)
class RegionSample:
    point: NoisePoint
    verdict: Verdict


@dataclass(frozen=True)
class RegionRow:
    mu: float
    lambda_lower: float
    lambda_upper: float


@dataclass(frozen=True)
class CurveRow:
    d: int
    eq2: float        # canonically conjugate pair degree, closed form
    cloning: float    # cloning lower bound


def _boundary_row(args) -> RegionRow:
    m1, m2, mu, cfg, tol, optimize_noise = args
    lower, upper, _ = bisect_boundary(m1, m2, mu, cfg, tol, optimize_noise)
    return RegionRow(mu=mu, lambda_lower=lower, lambda_upper=upper)


def default_jobs() -> int:
    env = os.environ.get("INCOMPAT_JOBS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def region_boundary(m1: Povm, m2: Povm, mu_grid: int = 21,
                    cfg: SolverConfig | None = None, tol: float = 5e-3,
                    optimize_noise: bool = True, jobs: int | None = None) -> list[RegionRow]:
    """Bracket the feasibility boundary lambda_max(mu) on a uniform mu grid.

    Rows are independent work items; with jobs > 1 they are fanned out to a
    process pool and merged back in mu order, so the output is deterministic
    regardless of scheduling.
    """
    if mu_grid < 2:
        raise ValueError(f"need at least 2 grid rows, got {mu_grid}")
    cfg = cfg or SolverConfig()
    jobs = default_jobs() if jobs is None else max(1, jobs)
    mus = np.linspace(0.0, 1.0, mu_grid)
    work = [(m1, m2, float(mu), cfg, tol, optimize_noise) for mu in mus]
    if jobs == 1 or len(work) == 1:
        rows = [_boundary_row(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            rows = list(pool.map(_boundary_row, work))
    return sorted(rows, key=lambda r: r.mu)


def dimension_curves(d_max: int) -> list[CurveRow]:
    """Closed-form degree of the Fourier pair and the cloning bound, d = 2..d_max.

    Column names follow the CSV wire format (header "d,eq2,cloning").
    """
    if d_max < 2:
        raise ValueError(f"need d_max >= 2, got {d_max}")
    return [CurveRow(d=d, eq2=mub_jmd_analytic(d), cloning=cloning_coefficient(d))
            for d in range(2, d_max + 1)]


def grid_scan(m1: Povm, m2: Povm, grid_n: int = 11, cfg: SolverConfig | None = None,
              optimize_noise: bool = True) -> list[RegionSample]:
    """Raw feasibility verdicts on a uniform grid over the noise square."""
    cfg = cfg or SolverConfig()
    coords = np.linspace(0.0, 1.0, grid_n)
    samples = []
    for lam in coords:
        for mu in coords:
            point = NoisePoint(float(lam), float(mu))
            res = feasibility_test(FeasibilityProblem(m1, m2, point, optimize_noise), cfg)
            samples.append(RegionSample(point=point, verdict=res.status))
    return samples


def downward_closure_violations(samples: list[RegionSample]) -> list[tuple[RegionSample, RegionSample]]:
    """Pairs (infeasible, feasible) where the infeasible point is coordinate-wise
    below the feasible one. Adding noise keeps pairs jointly measurable, so any
    such pair is an inconsistency."""
    feasible = [s for s in samples if s.verdict is Verdict.FEASIBLE]
    infeasible = [s for s in samples if s.verdict is Verdict.INFEASIBLE]
    bad = []
    for inf in infeasible:
        for fea in feasible:
            if inf.point.lam <= fea.point.lam and inf.point.mu <= fea.point.mu:
                bad.append((inf, fea))
    return bad


def _fmt(x: float) -> str:
    return format(x, ".9g")


def region_to_csv(rows: list[RegionRow]) -> str:
    lines = ["mu,lambda_lower,lambda_upper"]
    lines += [f"{_fmt(r.mu)},{_fmt(r.lambda_lower)},{_fmt(r.lambda_upper)}" for r in rows]
    return "\n".join(lines) + "\n"


def curves_to_csv(rows: list[CurveRow]) -> str:
    lines = ["d,eq2,cloning"]
    lines += [f"{r.d},{_fmt(r.eq2)},{_fmt(r.cloning)}" for r in rows]
    return "\n".join(lines) + "\n"
