# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: stable-increment transform and the per-step implicit
integration loop for the builtin model catalog.

Mirrors the pure Python implementations in ``_kernels_py`` and
``theta._integrate_python``; both sides keep the same branch structure so
results agree to rounding.
"""

from libc.math cimport fabs, isfinite, pow, sin, sqrt


# Model kinds, kept in sync with models.py
# 0 linear:            F = p0 x,              G = p1 x
# 1 bounded:           F = -x - x^3/(1+x^2),  G = x / sqrt(1+x^2)
# 2 mean reverting:    F = p0 (p1 + p2 sin(p3 t) - x), G = p4 (1 + p5 t) x^3
# 3 cubic drift:       F = -p0 x - p1 x^3,    G = p2 x
# 4 cubic + sq noise:  F = -p0 x - p1 x^3,    G = p2 x^2
# 5 time-linear cubic: F = (p0 + p1 t) x - p2 x^3, G = p3 x


cdef inline double _drift(int kind, const double* p, double t, double x) noexcept nogil:
    if kind == 0:
        return p[0] * x
    elif kind == 1:
        return -x - x * x * x / (1.0 + x * x)
    elif kind == 2:
        return p[0] * (p[1] + p[2] * sin(p[3] * t) - x)
    elif kind == 3:
        return -p[0] * x - p[1] * x * x * x
    elif kind == 4:
        return -p[0] * x - p[1] * x * x * x
    else:
        return (p[0] + p[1] * t) * x - p[2] * x * x * x


cdef inline double _diffusion(int kind, const double* p, double t, double x) noexcept nogil:
    if kind == 0:
        return p[1] * x
    elif kind == 1:
        return x / sqrt(1.0 + x * x)
    elif kind == 2:
        return p[4] * (1.0 + p[5] * t) * x * x * x
    elif kind == 3:
        return p[2] * x
    elif kind == 4:
        return p[2] * x * x
    else:
        return p[3] * x


cdef inline double _drift_dx(int kind, const double* p, double t, double x) noexcept nogil:
    cdef double q
    if kind == 0:
        return p[0]
    elif kind == 1:
        q = 1.0 + x * x
        return -1.0 - (3.0 * x * x + x * x * x * x) / (q * q)
    elif kind == 2:
        return -p[0]
    elif kind == 3:
        return -p[0] - 3.0 * p[1] * x * x
    elif kind == 4:
        return -p[0] - 3.0 * p[1] * x * x
    else:
        return (p[0] + p[1] * t) - 3.0 * p[2] * x * x


def stable_transform(double alpha, double scale, double[::1] u, double[::1] w,
                     double[::1] out):
    """In-place positive-stable transform of uniform/exponential draws."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double ia = 1.0 / alpha
    cdef double ra = (1.0 - alpha) / alpha
    with nogil:
        for i in range(n):
            out[i] = scale * sin(alpha * u[i]) / pow(sin(u[i]), ia) \
                * pow(sin((1.0 - alpha) * u[i]) / w[i], ra)


cdef int _solve_step(int kind, const double* p, double t, double q, double b,
                     double tol, int max_iter, int bracket_cap,
                     double* out_x, double* out_res, int* out_iters) noexcept nogil:
    """Solve x - q F(t, x) = b.  Returns 0 on success, 1 on failure."""
    cdef double scale, x, r, d, step, xn, rn, lo, hi, glo, ghi, width, mid, gm
    cdef int it, h, j
    if q == 0.0:
        out_x[0] = b
        out_res[0] = 0.0
        out_iters[0] = 0
        return 0
    scale = fabs(b)
    if scale < 1.0:
        scale = 1.0
    x = b
    for it in range(max_iter):
        r = x - q * _drift(kind, p, t, x) - b
        if fabs(r) <= tol * scale:
            out_x[0] = x
            out_res[0] = r
            out_iters[0] = it
            return 0
        d = 1.0 - q * _drift_dx(kind, p, t, x)
        if not isfinite(d) or fabs(d) < 1e-13:
            break
        step = r / d
        xn = x - step
        rn = xn - q * _drift(kind, p, t, xn) - b
        h = 0
        while (not isfinite(rn) or fabs(rn) > fabs(r)) and h < 50:
            step *= 0.5
            xn = x - step
            rn = xn - q * _drift(kind, p, t, xn) - b
            h += 1
        if h == 50 and (not isfinite(rn) or fabs(rn) > fabs(r)):
            break
        x = xn
    # bisection fallback; x - q F is increasing in x for admissible steps
    lo = b
    hi = b
    glo = lo - q * _drift(kind, p, t, lo) - b
    ghi = glo
    width = scale
    for j in range(bracket_cap):
        if glo > 0.0:
            lo = b - width
            glo = lo - q * _drift(kind, p, t, lo) - b
        if ghi < 0.0:
            hi = b + width
            ghi = hi - q * _drift(kind, p, t, hi) - b
        if glo <= 0.0 and ghi >= 0.0:
            break
        width *= 2.0
    else:
        out_x[0] = x
        out_res[0] = glo if fabs(glo) < fabs(ghi) else ghi
        out_iters[0] = max_iter
        return 1
    gm = glo
    mid = lo
    for j in range(300):
        mid = 0.5 * (lo + hi)
        gm = mid - q * _drift(kind, p, t, mid) - b
        if fabs(gm) <= tol * scale:
            out_x[0] = mid
            out_res[0] = gm
            out_iters[0] = max_iter + j + 1
            return 0
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * (fabs(mid) if fabs(mid) > 1.0 else 1.0):
            break
    out_x[0] = mid
    out_res[0] = gm
    out_iters[0] = max_iter
    return 1


def integrate_theta(int kind, double[::1] params, double x0, double theta,
                    double delta, double[::1] tau, double[::1] db,
                    double tol, int max_iter, int bracket_cap,
                    bint with_companion, double[::1] x_out,
                    double[::1] companion_out, int[::1] iters_out,
                    double[::1] diag):
    """Whole-path stochastic-theta loop over a builtin model.

    tau has n+1 grid times, db has n Brownian increments; x_out (and
    companion_out when requested) receive n+1 values, iters_out the solver
    iteration count per step.  Returns 0 on success or the 1-based index of
    the step whose implicit solve failed; diag[0] then holds the residual.
    """
    cdef Py_ssize_t n = db.shape[0]
    cdef Py_ssize_t i
    cdef const double* p = &params[0] if params.shape[0] > 0 else NULL
    cdef double x = x0, xc = x0
    cdef double fn, gn, b, q = theta * delta
    cdef double sol = 0.0, res = 0.0
    cdef int iters = 0
    cdef int status = 0
    cdef Py_ssize_t fail_at = 0
    x_out[0] = x0
    if with_companion:
        companion_out[0] = x0
    with nogil:
        for i in range(n):
            fn = _drift(kind, p, tau[i], x)
            gn = _diffusion(kind, p, tau[i], x)
            b = x + (1.0 - theta) * delta * fn + gn * db[i]
            status = _solve_step(kind, p, tau[i + 1], q, b, tol, max_iter,
                                 bracket_cap, &sol, &res, &iters)
            if status != 0:
                fail_at = i + 1
                break
            if with_companion:
                xc = xc + fn * delta + gn * db[i]
                companion_out[i + 1] = xc
            x = sol
            x_out[i + 1] = x
            iters_out[i] = iters
    diag[0] = res
    return fail_at
