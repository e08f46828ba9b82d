# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: C inner loops behind the same interface as
``_pyloops``.  See that module for the shared conventions."""

from libc.math cimport exp, fabs, sqrt
from libc.stdint cimport int64_t

NAME = "cython"


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        e = exp(-z)
        return 1.0 / (1.0 + e)
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef double _obj_w(const double complex[:, ::1] h, const double complex[::1] w,
                   double gamma, double sigma2, double scale) noexcept nogil:
    cdef Py_ssize_t t, j, nt = h.shape[0], m = h.shape[1]
    cdef double complex u
    cdef double acc = 0.0
    for t in range(nt):
        u = 0
        for j in range(m):
            u = u + h[t, j].conjugate() * w[j]
        acc += _sigmoid(scale * (sigma2 - _abs2(u) / gamma))
    return acc / nt


cdef double _obj_v(const double complex[:, ::1] a, const double complex[::1] b,
                   const double complex[::1] v,
                   double gamma, double sigma2, double scale) noexcept nogil:
    cdef Py_ssize_t t, j, nt = a.shape[0], n = a.shape[1]
    cdef double complex c
    cdef double acc = 0.0
    for t in range(nt):
        c = b[t]
        for j in range(n):
            c = c + a[t, j].conjugate() * v[j]
        acc += _sigmoid(scale * (sigma2 - _abs2(c) / gamma))
    return acc / nt


def objective_w(const double complex[:, ::1] h, const double complex[::1] w,
                double gamma, double sigma2, double scale):
    cdef double out
    with nogil:
        out = _obj_w(h, w, gamma, sigma2, scale)
    return out


def objective_v(const double complex[:, ::1] a, const double complex[::1] b,
                const double complex[::1] v,
                double gamma, double sigma2, double scale):
    cdef double out
    with nogil:
        out = _obj_v(a, b, v, gamma, sigma2, scale)
    return out


def inner_loop_w(const double complex[:, ::1] h, double complex[::1] w, double p_max,
                 double gamma, double sigma2, double scale, double step, double decay,
                 double eps, const int64_t[::1] idx, double[::1] trace):
    cdef Py_ssize_t k, j, m = h.shape[1], kmax = idx.shape[0], ran = 0
    cdef int64_t i
    cdef double complex u
    cdef double d, s, coef, nrm2, r, o, prev
    with nogil:
        trace[0] = _obj_w(h, w, gamma, sigma2, scale)
        for k in range(1, kmax + 1):
            i = idx[k - 1]
            u = 0
            for j in range(m):
                u = u + h[i, j].conjugate() * w[j]
            d = sigma2 - _abs2(u) / gamma
            s = _sigmoid(scale * d)
            coef = step * s * (1.0 - s) * scale * 2.0 / gamma
            for j in range(m):
                w[j] = w[j] + coef * u * h[i, j]
            nrm2 = 0.0
            for j in range(m):
                nrm2 += _abs2(w[j])
            if nrm2 >= p_max:
                r = sqrt(p_max / nrm2)
                for j in range(m):
                    w[j] = w[j] * r
            o = _obj_w(h, w, gamma, sigma2, scale)
            trace[k] = o
            ran = k
            if k >= 2:
                prev = trace[k - 1]
                if prev == 0.0 or fabs(prev - o) / prev <= eps:
                    break
            step = step * decay
    return ran


def inner_loop_v(const double complex[:, ::1] a, const double complex[::1] b,
                 double complex[::1] v,
                 double gamma, double sigma2, double scale, double step, double decay,
                 double eps, const int64_t[::1] idx, double[::1] trace):
    cdef Py_ssize_t k, j, n = a.shape[1], kmax = idx.shape[0], ran = 0
    cdef int64_t i
    cdef double complex c, y
    cdef double d, s, coef, mod, o, prev
    with nogil:
        trace[0] = _obj_v(a, b, v, gamma, sigma2, scale)
        for k in range(1, kmax + 1):
            i = idx[k - 1]
            c = b[i]
            for j in range(n):
                c = c + a[i, j].conjugate() * v[j]
            d = sigma2 - _abs2(c) / gamma
            s = _sigmoid(scale * d)
            coef = step * s * (1.0 - s) * scale * 2.0 / gamma
            for j in range(n):
                y = v[j] + coef * c * a[i, j]
                mod = sqrt(_abs2(y))
                if mod > 0.0:
                    v[j] = y / mod
            o = _obj_v(a, b, v, gamma, sigma2, scale)
            trace[k] = o
            ran = k
            if k >= 2:
                prev = trace[k - 1]
                if prev == 0.0 or fabs(prev - o) / prev <= eps:
                    break
            step = step * decay
    return ran
