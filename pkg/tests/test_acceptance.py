"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured numbers.

Run with `pytest tests/test_acceptance.py -v -s`. The solver-heavy criteria
take minutes; everything is deterministic (fixed seeds throughout).
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from incompat.cloning import cloning_coefficient
from incompat.constructions import (fourier_mub_pair, mub_jmd_analytic, number_povm,
                                    phase_povm_binned, random_pair)
from incompat.povm import (NoisePoint, joint_from_dict, joint_to_dict, noise_from_dict,
                           noise_to_dict)
from incompat.region import RegionSample, downward_closure_violations, grid_scan
from incompat.solver import (FeasibilityProblem, SolverConfig, Verdict, certify_witness,
                             feasibility_test, jmd_bisection)

# shared between criteria: (3) and (5) feed the closure check in (7)
_GRIDS: dict = {}
_DIAGONALS: dict = {}


def _report(criterion: int, ok: bool, detail: str):
    print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


def run_cli_json(*argv):
    out = subprocess.run([sys.executable, "-m", "incompat.cli", *argv],
                         capture_output=True, text=True)
    assert out.returncode == 0, f"CLI failed: {out.stderr}"
    return json.loads(out.stdout)


def test_criterion_1_closed_form_degree_reproduction():
    """Bisection brackets must contain the closed-form Fourier-pair degree."""
    cases = [
        (2, "2e-3", 60.0),
        (3, "5e-3", 600.0),
        (4, "5e-3", 1800.0),
    ]
    details = []
    ok = True
    for d, tol, limit in cases:
        started = time.monotonic()
        report = run_cli_json("jmd", "--pair", "mub", "--dim", str(d), "--tol", tol)
        elapsed = time.monotonic() - started
        lower = report["result"]["certified_lower"]
        upper = report["result"]["heuristic_upper"]
        target = mub_jmd_analytic(d)
        contained = lower <= target <= upper
        in_time = elapsed < limit
        ok = ok and contained and in_time
        details.append(f"d={d}: [{lower:.6f}, {upper:.6f}] target {target:.7f} "
                       f"contained={contained} {elapsed:.1f}s (< {limit:.0f}s: {in_time})")
    _report(1, ok, "; ".join(details))
    assert ok


def test_criterion_2_cloning_witness_construction():
    """The cloning joint observable must reproduce its margins to 1e-10 and
    the solver must never call the symmetric cloning point infeasible."""
    ok = True
    details = []
    for d in (2, 3, 4, 5):
        report = run_cli_json("cloning-bound", "--dim", str(d), "--verify",
                              "--pairs", "10", "--seed", str(100 * d))
        checks = report["result"]["checks"]
        margin_worst = max(c["margin_deviation"] for c in checks)
        margins_ok = report["result"]["all_margins_ok"] and margin_worst <= 1e-10
        never_infeasible = report["result"]["never_infeasible"]
        all_certified = all(c["witness_certified"] for c in checks)
        ok = ok and margins_ok and never_infeasible and all_certified
        details.append(f"d={d}: worst margin dev {margin_worst:.2e}, "
                       f"never_infeasible={never_infeasible}, certified={all_certified}")
    _report(2, ok, "; ".join(details))
    assert ok


def test_criterion_3_triangle_inclusion():
    """Every grid point with lam + mu <= 1 must be certified feasible, for 20
    random pairs across d = 2 and 3, with zero failures."""
    failures = 0
    total = 0
    for d in (2, 3):
        for seed in range(10):
            m1, m2 = random_pair(d, d, 1000 * d + seed)
            samples = grid_scan(m1, m2, grid_n=11)
            _GRIDS[(d, seed)] = samples
            for s in samples:
                if s.point.lam + s.point.mu <= 1.0 + 1e-12:
                    total += 1
                    if s.verdict is not Verdict.FEASIBLE:
                        failures += 1
    ok = failures == 0
    _report(3, ok, f"{total} triangle points over 20 pairs, {failures} failures")
    assert ok


def test_criterion_4_dimension_curves():
    """Strict ordering of the two curves up to d=100 and both within 5e-3 of
    1/2 at d = 10^4, by closed-form evaluation."""
    started = time.monotonic()
    report = run_cli_json("curves", "--dmax", "100")
    rows = report["result"]["rows"]
    ordering = all(r["eq2"] > r["cloning"] > 0.5 for r in rows)
    decreasing = all(a["eq2"] > b["eq2"] and a["cloning"] > b["cloning"]
                     for a, b in zip(rows, rows[1:]))
    big_d_eq2 = abs(mub_jmd_analytic(10**4) - 0.5)
    big_d_cloning = abs(cloning_coefficient(10**4) - 0.5)
    near_half = big_d_eq2 < 5e-3 and big_d_cloning < 5e-3
    elapsed = time.monotonic() - started
    ok = ordering and decreasing and near_half and elapsed < 1.0 + 5.0  # CLI overhead slack
    _report(4, ok, f"rows={len(rows)} ordering={ordering} decreasing={decreasing} "
                   f"|eq2(1e4)-1/2|={big_d_eq2:.2e} |c(1e4)-1/2|={big_d_cloning:.2e} "
                   f"{elapsed:.2f}s")
    assert ordering and decreasing and near_half


def test_criterion_5_number_phase_trend():
    """Certified degree lower bounds of the truncated number/phase pairs must
    not increase with dimension, stay above the cloning bound, and separate
    d=8 from d=2."""
    cfg = SolverConfig(max_iters=20000)
    brackets = {}
    details = []
    for d in (2, 4, 8):
        bracket = jmd_bisection(number_povm(d), phase_povm_binned(d, 8), cfg, tol=5e-3)
        brackets[d] = bracket
        _DIAGONALS[d] = bracket.probes
        details.append(f"d={d}: [{bracket.certified_lower:.5f}, {bracket.heuristic_upper:.5f}]"
                       f" c(d)={cloning_coefficient(d):.5f}")
    above_bound = all(
        brackets[d].certified_lower >= cloning_coefficient(d) - 5e-3 for d in (2, 4, 8)
    )
    non_increasing = (brackets[2].certified_lower >= brackets[4].certified_lower
                      >= brackets[8].certified_lower)
    separated = brackets[8].heuristic_upper < brackets[2].certified_lower
    ok = above_bound and non_increasing and separated
    _report(5, ok, "; ".join(details) + f"; above_bound={above_bound} "
                   f"non_increasing={non_increasing} separated={separated}")
    assert ok


def test_criterion_6_soundness_fuzz():
    """1000 randomized runs; every feasible verdict's exported witness must
    pass the independent certifier after a JSON round trip."""
    rng = np.random.default_rng(20260810)
    cfg = SolverConfig(max_iters=4000)
    feasible = infeasible = undecided = violations = 0
    for _ in range(1000):
        d = int(rng.integers(2, 4))
        outcomes = int(rng.integers(2, 5))
        m1, m2 = random_pair(d, outcomes, int(rng.integers(0, 10**9)))
        point = NoisePoint(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        prob = FeasibilityProblem(m1, m2, point)
        res = feasibility_test(prob, cfg)
        if res.status is Verdict.FEASIBLE:
            feasible += 1
            g, p, q = res.witness
            # export / reimport simulates a third party re-checking the file
            g2 = joint_from_dict(joint_to_dict(g))
            p2 = noise_from_dict(noise_to_dict(p))
            q2 = noise_from_dict(noise_to_dict(q))
            eigs = np.linalg.eigvalsh(g2.effects.reshape(-1, d, d))
            if eigs.min() < -1e-8 or not certify_witness(g2, p2, q2, prob):
                violations += 1
        elif res.status is Verdict.INFEASIBLE:
            infeasible += 1
        else:
            undecided += 1
    ok = violations == 0 and feasible >= 300
    _report(6, ok, f"runs=1000 feasible={feasible} infeasible={infeasible} "
                   f"undecided={undecided} witness violations={violations}")
    assert ok


def test_criterion_7_downward_closure():
    """No infeasible verdict may sit coordinate-wise below a feasible one,
    on the criterion-3 grids and the criterion-5 diagonals."""
    assert _GRIDS, "criterion 3 must run first in this module"
    assert _DIAGONALS, "criterion 5 must run first in this module"
    grid_violations = sum(len(downward_closure_violations(s)) for s in _GRIDS.values())
    diag_violations = 0
    for probes in _DIAGONALS.values():
        samples = [RegionSample(NoisePoint(p.lam, p.mu), p.status) for p in probes]
        diag_violations += len(downward_closure_violations(samples))
    ok = grid_violations == 0 and diag_violations == 0
    _report(7, ok, f"{len(_GRIDS)} grids and {len(_DIAGONALS)} diagonals checked; "
                   f"violations: grids={grid_violations} diagonals={diag_violations}")
    assert ok
