"""Pure numpy kernel: Dykstra alternating projections between the PSD
product cone and the affine margin set.

Variables are the joint-effect grid (n1, n2, d, d) plus, when the trivial
noises are free, the two noise probability vectors. The affine projection
solves the normal equations of the margin constraints with conjugate
gradients; the constraint operator only couples blocks through row/column
sums and traces, so one application costs O((n1 + n2) d^2).
"""

from __future__ import annotations

import math

import numpy as np

_CG_MAX_ITERS = 400


def psd_project_stack(blocks: np.ndarray) -> np.ndarray:
    """Project a stack (..., d, d) of near-Hermitian blocks onto the PSD cone."""
    herm = (blocks + np.conj(np.swapaxes(blocks, -1, -2))) / 2
    w, v = np.linalg.eigh(herm)
    np.maximum(w, 0.0, out=w)
    return (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _affine_project(grid, p, q, m1, m2, lam, mu, optimize_noise, cg_tol):
    """Least-squares projection onto the margin constraint set.

    Constraints: row sums equal lam*m1[j] + (1-lam) p_j I, column sums equal
    mu*m2[k] + (1-mu) q_k I, and (free-noise mode) sum p = sum q = 1. Solves
    A A^T y = A x0 - b by CG from zero, then x = x0 - A^T y.
    """
    n1, n2, d, _ = grid.shape
    eye = np.eye(d, dtype=complex)
    one_lam = 1.0 - lam
    one_mu = 1.0 - mu

    r_row = grid.sum(axis=1) - one_lam * p[:, None, None] * eye - lam * m1
    r_col = grid.sum(axis=0) - one_mu * q[:, None, None] * eye - mu * m2
    if optimize_noise:
        r_s = p.sum() - 1.0
        r_t = q.sum() - 1.0
    else:
        r_s = r_t = 0.0

    def apply_gram(y_row, y_col, s, t):
        sum_row = y_row.sum(axis=0)
        sum_col = y_col.sum(axis=0)
        out_row = n2 * y_row + sum_col
        out_col = n1 * y_col + sum_row
        if optimize_noise:
            tr_row = np.trace(y_row, axis1=1, axis2=2).real
            tr_col = np.trace(y_col, axis1=1, axis2=2).real
            out_row = out_row + (one_lam * one_lam * tr_row)[:, None, None] * eye
            out_row = out_row - one_lam * s * eye
            out_col = out_col + (one_mu * one_mu * tr_col)[:, None, None] * eye
            out_col = out_col - one_mu * t * eye
            out_s = -one_lam * tr_row.sum() + n1 * s
            out_t = -one_mu * tr_col.sum() + n2 * t
        else:
            out_s = out_t = 0.0
        return out_row, out_col, out_s, out_t

    def inner(a_row, a_col, a_s, a_t, b_row, b_col, b_s, b_t):
        return (
            np.vdot(a_row, b_row).real + np.vdot(a_col, b_col).real + a_s * b_s + a_t * b_t
        )

    y_row = np.zeros_like(r_row)
    y_col = np.zeros_like(r_col)
    y_s = y_t = 0.0
    res_row, res_col, res_s, res_t = r_row.copy(), r_col.copy(), r_s, r_t
    dir_row, dir_col, dir_s, dir_t = res_row.copy(), res_col.copy(), res_s, res_t
    rr = inner(res_row, res_col, res_s, res_t, res_row, res_col, res_s, res_t)
    target = cg_tol * math.sqrt(rr)
    if math.sqrt(rr) > 0.0:
        for _ in range(_CG_MAX_ITERS):
            g_row, g_col, g_s, g_t = apply_gram(dir_row, dir_col, dir_s, dir_t)
            denom = inner(dir_row, dir_col, dir_s, dir_t, g_row, g_col, g_s, g_t)
            if denom <= 0.0:
                break
            alpha = rr / denom
            y_row += alpha * dir_row
            y_col += alpha * dir_col
            y_s += alpha * dir_s
            y_t += alpha * dir_t
            res_row -= alpha * g_row
            res_col -= alpha * g_col
            res_s -= alpha * g_s
            res_t -= alpha * g_t
            rr_next = inner(res_row, res_col, res_s, res_t, res_row, res_col, res_s, res_t)
            if math.sqrt(rr_next) <= target:
                break
            dir_row = res_row + (rr_next / rr) * dir_row
            dir_col = res_col + (rr_next / rr) * dir_col
            dir_s = res_s + (rr_next / rr) * dir_s
            dir_t = res_t + (rr_next / rr) * dir_t
            rr = rr_next

    out_grid = grid - (y_row[:, None, :, :] + y_col[None, :, :, :])
    if optimize_noise:
        out_p = p + one_lam * np.trace(y_row, axis1=1, axis2=2).real - y_s
        out_q = q + one_mu * np.trace(y_col, axis1=1, axis2=2).real - y_t
    else:
        out_p = p.copy()
        out_q = q.copy()
    return out_grid, out_p, out_q


def solve(m1, m2, lam, mu, optimize_noise, tol_feasible, max_iters,
          stall_window, stall_factor, cg_tol):
    """Run the alternating-projection loop.

    Returns (converged, grid, noise_row, noise_col, residual, iterations,
    stall_ratio); grid/noise vectors are the affine-side iterate at exit.
    """
    m1 = np.ascontiguousarray(m1, dtype=complex)
    m2 = np.ascontiguousarray(m2, dtype=complex)
    n1, d = m1.shape[0], m1.shape[1]
    n2 = m2.shape[0]
    eye = np.eye(d, dtype=complex)

    grid = np.broadcast_to(
        ((lam * m1 + (1.0 - lam) / n1 * eye) / n2)[:, None, :, :], (n1, n2, d, d)
    ).copy()
    p = np.full(n1, 1.0 / n1)
    q = np.full(n2, 1.0 / n2)
    corr_grid = np.zeros_like(grid)
    corr_p = np.zeros_like(p)
    corr_q = np.zeros_like(q)

    window = max(int(stall_window), 1)
    ring = np.zeros(window)
    residual = math.inf
    windowed_prev = math.nan  # residual from `window` iterations ago
    aff_grid, aff_p, aff_q = grid, p, q
    iterations = 0
    for it in range(1, max_iters + 1):
        iterations = it
        aff_grid, aff_p, aff_q = _affine_project(
            grid, p, q, m1, m2, lam, mu, optimize_noise, cg_tol
        )
        work_grid = aff_grid + corr_grid
        grid = psd_project_stack(work_grid)
        corr_grid = work_grid - grid
        if optimize_noise:
            work_p = aff_p + corr_p
            work_q = aff_q + corr_q
            p = np.maximum(work_p, 0.0)
            q = np.maximum(work_q, 0.0)
            corr_p = work_p - p
            corr_q = work_q - q
        gap = np.linalg.norm(grid - aff_grid) ** 2
        if optimize_noise:
            gap += np.linalg.norm(p - aff_p) ** 2 + np.linalg.norm(q - aff_q) ** 2
        residual = math.sqrt(gap)
        if residual <= tol_feasible:
            return True, aff_grid, aff_p, aff_q, residual, it, math.nan
        slot = (it - 1) % window
        windowed_prev = ring[slot] if it > window else math.nan
        ring[slot] = residual

    stall_ratio = residual / windowed_prev if windowed_prev > 0 else math.nan
    return False, aff_grid, aff_p, aff_q, residual, iterations, stall_ratio
