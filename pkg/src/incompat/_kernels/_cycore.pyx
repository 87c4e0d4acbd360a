# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel: the same alternating-projection loop as pycore, with a
self-contained cyclic Jacobi eigensolver for the per-block PSD projections
(no LAPACK dependency). Small dense blocks only (d up to ~64).

Two warm starts make the loop cheap: each grid block carries its eigenbasis
from the previous iteration (blocks drift by O(residual), so one sweep
usually finishes), and the conjugate-gradient solve for the affine
projection restarts from the previous multiplier.
"""

import numpy as np

from libc.math cimport sqrt, NAN

ctypedef double complex cplx

cdef int JACOBI_MAX_SWEEPS = 60


cdef double _jacobi_sweeps(cplx[:, ::1] a, cplx[:, ::1] vecs, double[::1] w, int d,
                           double eps2) noexcept:
    """Diagonalize a Hermitian block in place by cyclic Jacobi rotations,
    accumulating rotations into vecs (NOT reset here, so callers may
    warm-start from an approximate eigenbasis).

    On exit w holds the (unsorted) eigenvalues. Returns the final squared
    off-diagonal norm relative to the squared matrix scale.
    """
    cdef int i, j, p, q, sweep
    cdef cplx apq, phase, tmp_p, tmp_q
    cdef double r2, r, tau, t, c, s, app, aqq, off2, scale2

    scale2 = 0.0
    for i in range(d):
        for j in range(d):
            scale2 += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    if scale2 == 0.0:
        for i in range(d):
            w[i] = 0.0
        return 0.0

    off2 = 0.0
    for sweep in range(JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off2 += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if off2 <= eps2 * scale2:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r2 = apq.real * apq.real + apq.imag * apq.imag
                if r2 <= 1e-30 * scale2:
                    continue
                r = sqrt(r2)
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # a <- a U with U = [[c, s*phase], [-s*conj(phase), c]] on (p, q)
                for i in range(d):
                    tmp_p = a[i, p]
                    tmp_q = a[i, q]
                    a[i, p] = c * tmp_p - s * phase.conjugate() * tmp_q
                    a[i, q] = s * phase * tmp_p + c * tmp_q
                # a <- U^dag a
                for j in range(d):
                    tmp_p = a[p, j]
                    tmp_q = a[q, j]
                    a[p, j] = c * tmp_p - s * phase * tmp_q
                    a[q, j] = s * phase.conjugate() * tmp_p + c * tmp_q
                # vecs <- vecs U
                for i in range(d):
                    tmp_p = vecs[i, p]
                    tmp_q = vecs[i, q]
                    vecs[i, p] = c * tmp_p - s * phase.conjugate() * tmp_q
                    vecs[i, q] = s * phase * tmp_p + c * tmp_q

    for i in range(d):
        w[i] = a[i, i].real
    return off2 / scale2


cdef void _jacobi_block(cplx[:, ::1] a, cplx[:, ::1] vecs, double[::1] w, int d) noexcept:
    """Cold-start Jacobi: reset vecs to the identity, then sweep tightly."""
    cdef int i, j
    for i in range(d):
        for j in range(d):
            vecs[i, j] = 0
        vecs[i, i] = 1
    _jacobi_sweeps(a, vecs, w, d, 1e-28)


cdef void _rotate_into_basis(const cplx[:, :, :, ::1] src, int j, int k,
                             const cplx[:, ::1] vecs, cplx[:, ::1] tmp,
                             cplx[:, ::1] out, int d) noexcept:
    """out = vecs^dag * H * vecs with H the Hermitian part of src[j, k].

    With vecs the eigenbasis from the previous outer iteration this is
    nearly diagonal, so the Jacobi pass after it converges in one sweep.
    """
    cdef int i, j2, k2
    cdef cplx acc
    for i in range(d):
        for j2 in range(d):
            acc = 0
            for k2 in range(d):
                acc += 0.5 * (src[j, k, i, k2] + src[j, k, k2, i].conjugate()) * vecs[k2, j2]
            tmp[i, j2] = acc
    for i in range(d):
        for j2 in range(i, d):
            acc = 0
            for k2 in range(d):
                acc += vecs[k2, i].conjugate() * tmp[k2, j2]
            if j2 > i:
                out[i, j2] = acc
                out[j2, i] = acc.conjugate()
            else:
                out[i, i] = acc.real  # diagonal exactly real

cdef void _psd_from_eig(const cplx[:, ::1] vecs, const double[::1] w,
                        cplx[:, ::1] out, int d) noexcept:
    """out = vecs * diag(max(w, 0)) * vecs^dag."""
    cdef int i, j, k
    cdef double wk
    cdef cplx acc
    for i in range(d):
        for j in range(i, d):
            acc = 0
            for k in range(d):
                wk = w[k]
                if wk > 0.0:
                    acc += wk * vecs[i, k] * vecs[j, k].conjugate()
            out[i, j] = acc
            out[j, i] = acc.conjugate()


cdef void _apply_gram(const cplx[:, :, ::1] in_row, const cplx[:, :, ::1] in_col,
                      double in_s, double in_t,
                      cplx[:, :, ::1] out_row, cplx[:, :, ::1] out_col,
                      double* out_s, double* out_t,
                      cplx[:, ::1] sum_row, cplx[:, ::1] sum_col,
                      int n1, int n2, int d, bint optimize_noise,
                      double one_lam, double one_mu) noexcept:
    """Normal-equation operator of the margin constraints.

    Row blocks couple through the column sum and vice versa; in free-noise
    mode the trace components tie the blocks to the two normalization rows.
    """
    cdef int i, j, k, r, c_
    cdef double tr_y, acc_s, acc_t
    cdef cplx acc
    for r in range(d):
        for c_ in range(d):
            acc = 0
            for j in range(n1):
                acc += in_row[j, r, c_]
            sum_row[r, c_] = acc
            acc = 0
            for k in range(n2):
                acc += in_col[k, r, c_]
            sum_col[r, c_] = acc
    acc_s = 0.0
    acc_t = 0.0
    for j in range(n1):
        tr_y = 0.0
        for r in range(d):
            tr_y += in_row[j, r, r].real
        for r in range(d):
            for c_ in range(d):
                acc = n2 * in_row[j, r, c_] + sum_col[r, c_]
                if optimize_noise and r == c_:
                    acc += one_lam * one_lam * tr_y - one_lam * in_s
                out_row[j, r, c_] = acc
        acc_s -= one_lam * tr_y
    for k in range(n2):
        tr_y = 0.0
        for r in range(d):
            tr_y += in_col[k, r, r].real
        for r in range(d):
            for c_ in range(d):
                acc = n1 * in_col[k, r, c_] + sum_row[r, c_]
                if optimize_noise and r == c_:
                    acc += one_mu * one_mu * tr_y - one_mu * in_t
                out_col[k, r, c_] = acc
        acc_t -= one_mu * tr_y
    if optimize_noise:
        out_s[0] = acc_s + n1 * in_s
        out_t[0] = acc_t + n2 * in_t
    else:
        out_s[0] = 0.0
        out_t[0] = 0.0


cdef double _space_dot(const cplx[:, :, ::1] a_row, const cplx[:, :, ::1] a_col,
                       double a_s, double a_t,
                       const cplx[:, :, ::1] b_row, const cplx[:, :, ::1] b_col,
                       double b_s, double b_t, int n1, int n2, int d) noexcept:
    """Real inner product on the constraint space."""
    cdef int j, k, r, c_
    cdef double total = a_s * b_s + a_t * b_t
    for j in range(n1):
        for r in range(d):
            for c_ in range(d):
                total += (a_row[j, r, c_].real * b_row[j, r, c_].real
                          + a_row[j, r, c_].imag * b_row[j, r, c_].imag)
    for k in range(n2):
        for r in range(d):
            for c_ in range(d):
                total += (a_col[k, r, c_].real * b_col[k, r, c_].real
                          + a_col[k, r, c_].imag * b_col[k, r, c_].imag)
    return total


def jacobi_eigh(a):
    """Eigendecomposition of one Hermitian matrix by cyclic Jacobi.

    Returns (w, v) with eigenvalues descending, columns of v the vectors.
    """
    a = np.array(a, dtype=complex, order="C")
    cdef int d = a.shape[0]
    work = np.ascontiguousarray((a + a.conj().T) / 2.0)
    vecs = np.empty((d, d), dtype=complex)
    w = np.empty(d)
    _jacobi_block(work, vecs, w, d)
    order = np.argsort(w)[::-1]
    return w[order], np.ascontiguousarray(vecs[:, order])


def psd_project_stack(blocks):
    """Projection of a stack (..., d, d) onto the PSD cone, by Jacobi."""
    arr = np.array(blocks, dtype=complex, order="C")
    shape = arr.shape
    # positive indices only: this module compiles with wraparound disabled
    flat = arr.reshape(-1, shape[arr.ndim - 2], shape[arr.ndim - 1])
    cdef cplx[:, :, ::1] view = flat
    cdef int n = flat.shape[0]
    cdef int d = flat.shape[1]
    out = np.empty_like(flat)
    cdef cplx[:, :, ::1] out_view = out
    work = np.empty((d, d), dtype=complex)
    vecs = np.empty((d, d), dtype=complex)
    w = np.empty(d)
    cdef cplx[:, ::1] work_v = work
    cdef cplx[:, ::1] vecs_v = vecs
    cdef double[::1] w_v = w
    cdef int b, i, j
    for b in range(n):
        for i in range(d):
            for j in range(d):
                work_v[i, j] = 0.5 * (view[b, i, j] + view[b, j, i].conjugate())
        _jacobi_block(work_v, vecs_v, w_v, d)
        _psd_from_eig(vecs_v, w_v, out_view[b], d)
    return out.reshape(shape)


def solve(m1, m2, double lam, double mu, bint optimize_noise, double tol_feasible,
          int max_iters, int stall_window, double stall_factor, double cg_tol):
    """Alternating projections between the PSD product cone and the affine
    margin set; same contract as pycore.solve."""
    m1 = np.ascontiguousarray(m1, dtype=complex)
    m2 = np.ascontiguousarray(m2, dtype=complex)
    cdef int n1 = m1.shape[0]
    cdef int n2 = m2.shape[0]
    cdef int d = m1.shape[1]
    cdef double one_lam = 1.0 - lam
    cdef double one_mu = 1.0 - mu

    grid_np = np.empty((n1, n2, d, d), dtype=complex)
    init = (lam * m1 + (one_lam / n1) * np.eye(d)) / n2
    grid_np[:] = init[:, None, :, :]
    aff_np = np.zeros_like(grid_np)
    corr_np = np.zeros_like(grid_np)
    p_np = np.full(n1, 1.0 / n1)
    q_np = np.full(n2, 1.0 / n2)
    aff_p_np = p_np.copy()
    aff_q_np = q_np.copy()

    cdef const cplx[:, :, ::1] meas_row = m1
    cdef const cplx[:, :, ::1] meas_col = m2
    cdef cplx[:, :, :, ::1] grid = grid_np
    cdef cplx[:, :, :, ::1] aff = aff_np
    cdef cplx[:, :, :, ::1] corr = corr_np
    cdef double[::1] p = p_np
    cdef double[::1] q = q_np
    cdef double[::1] aff_p = aff_p_np
    cdef double[::1] aff_q = aff_q_np
    cdef double[::1] corr_p = np.zeros(n1)
    cdef double[::1] corr_q = np.zeros(n2)

    # CG state in constraint space: one block per row / column constraint.
    # The multiplier y persists across outer iterations as a warm start; any
    # null-space drift it accumulates does not affect the projected iterate.
    cdef cplx[:, :, ::1] y_row = np.zeros((n1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] y_col = np.zeros((n2, d, d), dtype=complex)
    cdef cplx[:, :, ::1] res_row = np.zeros((n1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] res_col = np.zeros((n2, d, d), dtype=complex)
    cdef cplx[:, :, ::1] dir_row = np.zeros((n1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] dir_col = np.zeros((n2, d, d), dtype=complex)
    cdef cplx[:, :, ::1] gram_row = np.zeros((n1, d, d), dtype=complex)
    cdef cplx[:, :, ::1] gram_col = np.zeros((n2, d, d), dtype=complex)
    cdef cplx[:, ::1] sum_row = np.zeros((d, d), dtype=complex)
    cdef cplx[:, ::1] sum_col = np.zeros((d, d), dtype=complex)
    cdef double y_s = 0.0, y_t = 0.0, res_s, res_t, dir_s, dir_t
    cdef double gram_s = 0.0, gram_t = 0.0

    cdef cplx[:, ::1] jac_work = np.empty((d, d), dtype=complex)
    cdef cplx[:, ::1] jac_tmp = np.empty((d, d), dtype=complex)
    cdef double[::1] jac_w = np.empty(d)
    # per-block eigenbases carried across iterations
    eigvecs_np = np.zeros((n1, n2, d, d), dtype=complex)
    eigvecs_np[:, :] = np.eye(d)
    cdef cplx[:, :, :, ::1] eigvecs = eigvecs_np

    cdef int window = stall_window if stall_window > 1 else 1
    cdef double[::1] ring = np.zeros(window)
    cdef double windowed_prev = NAN
    cdef double residual = 0.0
    cdef double tr_y, rr, rr_next, denom, alpha, beta, gap, diff_r, diff_i
    cdef double b_norm2, cg_target, work_scalar, min_w
    cdef cplx acc
    cdef int it, iterations = 0, slot, cg_it, i, j, k, r, c_
    cdef bint converged = False

    for it in range(1, max_iters + 1):
        iterations = it

        # --- rhs of the normal equations: A x - b, stored in res_* ---------
        for j in range(n1):
            for r in range(d):
                for c_ in range(d):
                    acc = 0
                    for k in range(n2):
                        acc += grid[j, k, r, c_]
                    acc -= lam * meas_row[j, r, c_]
                    if r == c_:
                        acc -= one_lam * p[j]
                    res_row[j, r, c_] = acc
        for k in range(n2):
            for r in range(d):
                for c_ in range(d):
                    acc = 0
                    for j in range(n1):
                        acc += grid[j, k, r, c_]
                    acc -= mu * meas_col[k, r, c_]
                    if r == c_:
                        acc -= one_mu * q[k]
                    res_col[k, r, c_] = acc
        if optimize_noise:
            res_s = -1.0
            for j in range(n1):
                res_s += p[j]
            res_t = -1.0
            for k in range(n2):
                res_t += q[k]
        else:
            res_s = 0.0
            res_t = 0.0

        b_norm2 = _space_dot(res_row, res_col, res_s, res_t,
                             res_row, res_col, res_s, res_t, n1, n2, d)
        cg_target = cg_tol * sqrt(b_norm2)

        # subtract AA^T y_prev: warm start
        _apply_gram(y_row, y_col, y_s, y_t, gram_row, gram_col, &gram_s, &gram_t,
                    sum_row, sum_col, n1, n2, d, optimize_noise, one_lam, one_mu)
        for j in range(n1):
            for r in range(d):
                for c_ in range(d):
                    res_row[j, r, c_] -= gram_row[j, r, c_]
                    dir_row[j, r, c_] = res_row[j, r, c_]
        for k in range(n2):
            for r in range(d):
                for c_ in range(d):
                    res_col[k, r, c_] -= gram_col[k, r, c_]
                    dir_col[k, r, c_] = res_col[k, r, c_]
        res_s -= gram_s
        res_t -= gram_t
        dir_s = res_s
        dir_t = res_t
        rr = _space_dot(res_row, res_col, res_s, res_t,
                        res_row, res_col, res_s, res_t, n1, n2, d)

        if sqrt(rr) > cg_target:
            for cg_it in range(400):
                _apply_gram(dir_row, dir_col, dir_s, dir_t,
                            gram_row, gram_col, &gram_s, &gram_t,
                            sum_row, sum_col, n1, n2, d, optimize_noise, one_lam, one_mu)
                denom = _space_dot(dir_row, dir_col, dir_s, dir_t,
                                   gram_row, gram_col, gram_s, gram_t, n1, n2, d)
                if denom <= 0.0:
                    break
                alpha = rr / denom
                for j in range(n1):
                    for r in range(d):
                        for c_ in range(d):
                            y_row[j, r, c_] += alpha * dir_row[j, r, c_]
                            res_row[j, r, c_] -= alpha * gram_row[j, r, c_]
                for k in range(n2):
                    for r in range(d):
                        for c_ in range(d):
                            y_col[k, r, c_] += alpha * dir_col[k, r, c_]
                            res_col[k, r, c_] -= alpha * gram_col[k, r, c_]
                y_s += alpha * dir_s
                y_t += alpha * dir_t
                res_s -= alpha * gram_s
                res_t -= alpha * gram_t

                rr_next = _space_dot(res_row, res_col, res_s, res_t,
                                     res_row, res_col, res_s, res_t, n1, n2, d)
                if sqrt(rr_next) <= cg_target:
                    break
                beta = rr_next / rr
                rr = rr_next
                for j in range(n1):
                    for r in range(d):
                        for c_ in range(d):
                            dir_row[j, r, c_] = res_row[j, r, c_] + beta * dir_row[j, r, c_]
                for k in range(n2):
                    for r in range(d):
                        for c_ in range(d):
                            dir_col[k, r, c_] = res_col[k, r, c_] + beta * dir_col[k, r, c_]
                dir_s = res_s + beta * dir_s
                dir_t = res_t + beta * dir_t

        # --- affine iterate: x - A^T y --------------------------------------
        for j in range(n1):
            for k in range(n2):
                for r in range(d):
                    for c_ in range(d):
                        aff[j, k, r, c_] = grid[j, k, r, c_] - y_row[j, r, c_] - y_col[k, r, c_]
        if optimize_noise:
            for j in range(n1):
                tr_y = 0.0
                for r in range(d):
                    tr_y += y_row[j, r, r].real
                aff_p[j] = p[j] + one_lam * tr_y - y_s
            for k in range(n2):
                tr_y = 0.0
                for r in range(d):
                    tr_y += y_col[k, r, r].real
                aff_q[k] = q[k] + one_mu * tr_y - y_t

        # --- cone projection with Dykstra correction ------------------------
        gap = 0.0
        for j in range(n1):
            for k in range(n2):
                for r in range(d):
                    for c_ in range(d):
                        # work iterate parked in corr until the block is projected
                        corr[j, k, r, c_] = aff[j, k, r, c_] + corr[j, k, r, c_]
                _rotate_into_basis(corr, j, k, eigvecs[j, k], jac_tmp, jac_work, d)
                _jacobi_sweeps(jac_work, eigvecs[j, k], jac_w, d, 1e-24)
                min_w = jac_w[0]
                for r in range(1, d):
                    if jac_w[r] < min_w:
                        min_w = jac_w[r]
                if min_w >= 0.0:
                    # block already PSD: its projection is the Hermitian part
                    for r in range(d):
                        for c_ in range(r, d):
                            acc = 0.5 * (corr[j, k, r, c_] + corr[j, k, c_, r].conjugate())
                            grid[j, k, r, c_] = acc
                            if c_ > r:
                                grid[j, k, c_, r] = acc.conjugate()
                else:
                    _psd_from_eig(eigvecs[j, k], jac_w, grid[j, k], d)
                for r in range(d):
                    for c_ in range(d):
                        corr[j, k, r, c_] = corr[j, k, r, c_] - grid[j, k, r, c_]
                        diff_r = grid[j, k, r, c_].real - aff[j, k, r, c_].real
                        diff_i = grid[j, k, r, c_].imag - aff[j, k, r, c_].imag
                        gap += diff_r * diff_r + diff_i * diff_i
        if optimize_noise:
            for j in range(n1):
                work_scalar = aff_p[j] + corr_p[j]
                p[j] = work_scalar if work_scalar > 0.0 else 0.0
                corr_p[j] = work_scalar - p[j]
                diff_r = p[j] - aff_p[j]
                gap += diff_r * diff_r
            for k in range(n2):
                work_scalar = aff_q[k] + corr_q[k]
                q[k] = work_scalar if work_scalar > 0.0 else 0.0
                corr_q[k] = work_scalar - q[k]
                diff_r = q[k] - aff_q[k]
                gap += diff_r * diff_r

        residual = sqrt(gap)
        if residual <= tol_feasible:
            converged = True
            break
        slot = (it - 1) % window
        windowed_prev = ring[slot] if it > window else NAN
        ring[slot] = residual

    cdef double stall_ratio
    if converged:
        stall_ratio = NAN
    elif windowed_prev > 0.0:
        stall_ratio = residual / windowed_prev
    else:
        stall_ratio = NAN
    return converged, aff_np, aff_p_np, aff_q_np, residual, iterations, stall_ratio
