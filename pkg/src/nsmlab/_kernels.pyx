# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loop for the built-in problems (quartic toy, least squares,
softmax classification).

Mirrors the pure-Python loop in ``optimizers._run_python`` step for step; the
two agree up to floating-point rounding (summation order differs).  Integer
codes for problems, sets, methods, and adversaries live in ``_backend``.
"""

from libc.math cimport exp, isfinite, log, pow, sqrt

import numpy as np


cdef inline bint _all_finite(double[::1] v, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        if not isfinite(v[i]):
            return False
    return True


cdef inline void _project(int set_kind, double[::1] center, double radius,
                          double bound, double[::1] x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double nrm = 0.0, scale, m, dxi
    if set_kind == 0:  # ball
        for i in range(n):
            dxi = x[i] - center[i]
            nrm += dxi * dxi
        nrm = sqrt(nrm)
        if nrm > radius:
            scale = radius / nrm
            for i in range(n):
                x[i] = center[i] + (x[i] - center[i]) * scale
    elif set_kind == 1:  # diagonal box
        m = 0.0
        for i in range(n):
            m += x[i]
        m /= n
        if m > bound:
            m = bound
        elif m < -bound:
            m = -bound
        for i in range(n):
            x[i] = m
    # set_kind == 2: unconstrained, nothing to do


cdef inline void _toy_grad(double[::1] x, double[::1] g, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double c = x[n - 1]
    for i in range(n):
        g[i] = 0.0
    g[n - 1] = 4.0 * (c * c * c)


cdef inline double _toy_value(double[::1] x, Py_ssize_t n) noexcept nogil:
    cdef double q = x[n - 1] * x[n - 1]
    return q * q


cdef inline void _lsq_grad(double[:, ::1] gmat, double[::1] cvec,
                           double[::1] x, double[::1] g, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += gmat[i, j] * x[j]
        g[i] = acc - cvec[i]


cdef inline double _lsq_value(double[:, ::1] gmat, double[::1] cvec, double yy,
                              double[::1] x, Py_ssize_t n) noexcept nogil:
    # ||y - A x||^2 == 0.5 x'Gx - c'x + y'y with G = 2A'A, c = 2A'y.
    cdef Py_ssize_t i, j
    cdef double quad = 0.0, lin = 0.0, acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += gmat[i, j] * x[j]
        quad += x[i] * acc
        lin += cvec[i] * x[i]
    return 0.5 * quad - lin + yy


cdef void _logistic_grad(double[:, ::1] feat, long[::1] labels, int m, double lam,
                         double[::1] x, double[::1] g, double[::1] logits,
                         Py_ssize_t nx) noexcept nogil:
    cdef Py_ssize_t n_rows = feat.shape[0]
    cdef Py_ssize_t d = feat.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double zmax, sumexp, coef
    for i in range(nx):
        g[i] = 0.0
    for i in range(n_rows):
        for j in range(m):
            sumexp = 0.0
            for k in range(d):
                sumexp += x[j * d + k] * feat[i, k]
            logits[j] = sumexp
        zmax = logits[0]
        for j in range(1, m):
            if logits[j] > zmax:
                zmax = logits[j]
        sumexp = 0.0
        for j in range(m):
            logits[j] = exp(logits[j] - zmax)
            sumexp += logits[j]
        for j in range(m):
            coef = logits[j] / sumexp
            if j == labels[i]:
                coef -= 1.0
            coef /= n_rows
            for k in range(d):
                g[j * d + k] += coef * feat[i, k]
    for i in range(nx):
        g[i] += 2.0 * lam * x[i]


cdef double _logistic_value(double[:, ::1] feat, long[::1] labels, int m, double lam,
                            double[::1] x, double[::1] logits, Py_ssize_t nx) noexcept nogil:
    cdef Py_ssize_t n_rows = feat.shape[0]
    cdef Py_ssize_t d = feat.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double zmax, sumexp, loss = 0.0, acc, reg = 0.0
    for i in range(n_rows):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                acc += x[j * d + k] * feat[i, k]
            logits[j] = acc
        zmax = logits[0]
        for j in range(1, m):
            if logits[j] > zmax:
                zmax = logits[j]
        sumexp = 0.0
        for j in range(m):
            sumexp += exp(logits[j] - zmax)
        loss += (zmax + log(sumexp)) - logits[labels[i]]
    for i in range(nx):
        reg += x[i] * x[i]
    return loss / n_rows + lam * reg


def run_loop(plan):
    """Execute the full iteration loop described by ``plan``.

    Returns ``(n_recorded, diverged_at, n_draws_used)`` where ``diverged_at``
    is 0 for a clean run.  Output arrays in the plan are filled in place.
    """
    cdef int problem_kind = plan["problem_kind"]
    cdef int method = plan["method"]
    cdef int set_kind = plan["set_kind"]
    cdef int adversary = plan["adversary"]
    cdef long n_steps = plan["n_steps"]
    cdef double zero_tol = plan["zero_tol"]
    cdef bint project_baselines = plan["project_baselines"]
    cdef double gamma0 = plan["gamma0"]
    cdef bint constant_step = plan["constant_step"]
    cdef double p = plan["p"]
    cdef double momentum = plan["momentum"]
    cdef double beta1 = plan["beta1"]
    cdef double beta2 = plan["beta2"]
    cdef double eps = plan["eps"]
    cdef double rho = plan["rho"]
    cdef bint track_dist = plan["track_dist"]
    cdef double adv_factor = plan["adv_factor"]
    cdef double adv_r = plan["adv_r"]
    cdef double lam = plan["lam"]
    cdef int n_classes = plan["n_classes"]

    cdef double[:, ::1] mat_a = plan["mat_a"]
    cdef double[::1] vec_b = plan["vec_b"]
    cdef double scalar_c = plan["scalar_c"]
    cdef long[::1] labels = plan["labels"]
    cdef double[::1] set_center = plan["set_center"]
    cdef double set_radius = plan["set_radius"]
    cdef double set_bound = plan["set_bound"]
    cdef double[::1] adv_vec = plan["adv_vec"]
    cdef double[::1] adv_x_star = plan["adv_x_star"]
    cdef double[::1] uniforms = plan["uniforms"]
    cdef double[::1] optimum = plan["optimum"]
    cdef long[::1] rec_idx = plan["rec_idx"]
    cdef double[::1] out_obj = plan["out_obj"]
    cdef double[::1] out_dist = plan["out_dist"]
    cdef unsigned char[::1] out_flag = plan["out_flag"]
    cdef double[::1] out_gamma = plan["out_gamma"]
    cdef double[::1] out_x_final = plan["out_x_final"]

    x1_arr = np.array(plan["x1"], dtype=np.float64)
    cdef Py_ssize_t d = x1_arr.shape[0]
    cdef double[::1] x = x1_arr
    cdef double[::1] xn = np.zeros(d)
    cdef double[::1] g = np.zeros(d)
    cdef double[::1] h = np.zeros(d)
    cdef double[::1] m_acc = np.zeros(d)
    cdef double[::1] v_acc = np.zeros(d)
    cdef double[::1] vmax_acc = np.zeros(d)
    cdef double[::1] vel = np.zeros(d)
    cdef double[::1] logits = np.zeros(n_classes if n_classes > 0 else 1)

    cdef Py_ssize_t n_rec = rec_idx.shape[0]
    cdef Py_ssize_t rec_ptr = 0
    cdef long diverged_at = 0
    cdef long draws_used = 0
    cdef long t
    cdef Py_ssize_t i
    cdef bint corrupt
    cdef double gamma, hn, dist, scale, mhat, vhat, bc1, bc2, val

    # Record the initial iterate.
    if rec_ptr < n_rec and rec_idx[rec_ptr] == 1:
        if problem_kind == 0:
            val = _toy_value(x, d)
        elif problem_kind == 1:
            val = _lsq_value(mat_a, vec_b, scalar_c, x, d)
        else:
            val = _logistic_value(mat_a, labels, n_classes, lam, x, logits, d)
        out_obj[rec_ptr] = val
        if track_dist:
            dist = 0.0
            for i in range(d):
                dist += (x[i] - optimum[i]) * (x[i] - optimum[i])
            out_dist[rec_ptr] = dist
        out_flag[rec_ptr] = 0
        out_gamma[rec_ptr] = 0.0
        rec_ptr += 1

    for t in range(1, n_steps + 1):
        gamma = gamma0 if constant_step else gamma0 / t

        if problem_kind == 0:
            _toy_grad(x, g, d)
        elif problem_kind == 1:
            _lsq_grad(mat_a, vec_b, x, g, d)
        else:
            _logistic_grad(mat_a, labels, n_classes, lam, x, g, logits, d)
        if not _all_finite(g, d):
            diverged_at = t
            break

        draws_used = t
        corrupt = uniforms[t - 1] < p
        if corrupt:
            if adversary == 0:  # worst-case directional
                hn = 0.0
                for i in range(d):
                    hn += (adv_x_star[i] - x[i]) * (adv_x_star[i] - x[i])
                hn = sqrt(hn)
                scale = adv_r / gamma
                if hn <= 1e-12:
                    for i in range(d):
                        h[i] = 0.0
                    h[0] = scale
                else:
                    for i in range(d):
                        h[i] = scale * ((adv_x_star[i] - x[i]) / hn)
            elif adversary == 1:  # scaled opposite
                for i in range(d):
                    h[i] = adv_factor * (-g[i])
            elif adversary == 2:  # negate iterate
                if x[0] != 0.0:
                    for i in range(d):
                        h[i] = -x[i]
                else:
                    for i in range(d):
                        h[i] = adv_vec[i]
            else:  # fixed vector
                for i in range(d):
                    h[i] = adv_vec[i]
        else:
            for i in range(d):
                h[i] = g[i]
        if not _all_finite(h, d):
            diverged_at = t
            break

        if method == 0:  # normalized subgradient step
            hn = 0.0
            for i in range(d):
                hn += h[i] * h[i]
            hn = sqrt(hn)
            if hn <= zero_tol:
                for i in range(d):
                    xn[i] = x[i]
            else:
                for i in range(d):
                    xn[i] = x[i] - gamma * (h[i] / hn)
                _project(set_kind, set_center, set_radius, set_bound, xn, d)
        else:
            if method == 1:  # gd
                for i in range(d):
                    xn[i] = x[i] - gamma * h[i]
            elif method == 2:  # nag
                for i in range(d):
                    vel[i] = momentum * vel[i] + h[i]
                    xn[i] = x[i] - gamma * (h[i] + momentum * vel[i])
            elif method == 3:  # adam
                bc1 = 1.0 - pow(beta1, t)
                bc2 = 1.0 - pow(beta2, t)
                for i in range(d):
                    m_acc[i] = beta1 * m_acc[i] + (1.0 - beta1) * h[i]
                    v_acc[i] = beta2 * v_acc[i] + (1.0 - beta2) * (h[i] * h[i])
                    mhat = m_acc[i] / bc1
                    vhat = v_acc[i] / bc2
                    xn[i] = x[i] - gamma * (mhat / (sqrt(vhat) + eps))
            elif method == 5:  # amsgrad
                bc1 = 1.0 - pow(beta1, t)
                bc2 = 1.0 - pow(beta2, t)
                for i in range(d):
                    m_acc[i] = beta1 * m_acc[i] + (1.0 - beta1) * h[i]
                    v_acc[i] = beta2 * v_acc[i] + (1.0 - beta2) * (h[i] * h[i])
                    if v_acc[i] > vmax_acc[i]:
                        vmax_acc[i] = v_acc[i]
                    mhat = m_acc[i] / bc1
                    vhat = vmax_acc[i] / bc2
                    xn[i] = x[i] - gamma * (mhat / (sqrt(vhat) + eps))
            else:  # rmsprop
                for i in range(d):
                    v_acc[i] = rho * v_acc[i] + (1.0 - rho) * (h[i] * h[i])
                    xn[i] = x[i] - gamma * (h[i] / (sqrt(v_acc[i]) + eps))
            if project_baselines:
                _project(set_kind, set_center, set_radius, set_bound, xn, d)
        if not _all_finite(xn, d):
            diverged_at = t
            break
        for i in range(d):
            x[i] = xn[i]

        if rec_ptr < n_rec and rec_idx[rec_ptr] == t + 1:
            if problem_kind == 0:
                val = _toy_value(x, d)
            elif problem_kind == 1:
                val = _lsq_value(mat_a, vec_b, scalar_c, x, d)
            else:
                val = _logistic_value(mat_a, labels, n_classes, lam, x, logits, d)
            out_obj[rec_ptr] = val
            if track_dist:
                dist = 0.0
                for i in range(d):
                    dist += (x[i] - optimum[i]) * (x[i] - optimum[i])
                out_dist[rec_ptr] = dist
            out_flag[rec_ptr] = 1 if corrupt else 0
            out_gamma[rec_ptr] = gamma
            rec_ptr += 1

    for i in range(d):
        out_x_final[i] = x[i]
    return int(rec_ptr), int(diverged_at), int(draws_used)
