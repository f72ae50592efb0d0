# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event loop for hard disks in an axis-aligned box.

Mirrors ``_pykernels`` operation for operation; keep the two in step.
"""
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np

cdef double CONTACT_TOL = 1e-9


cdef inline double pair_dt(double xi, double yi, double vxi, double vyi,
                           double xj, double yj, double vxj, double vyj,
                           double sig) noexcept nogil:
    cdef double dx = xi - xj
    cdef double dy = yi - yj
    cdef double dvx = vxi - vxj
    cdef double dvy = vyi - vyj
    cdef double b = dx * dvx + dy * dvy
    cdef double dv2, c, disc, dt
    if b >= 0.0:
        return INFINITY
    dv2 = dvx * dvx + dvy * dvy
    c = dx * dx + dy * dy - sig * sig
    disc = b * b - dv2 * c
    if disc < 0.0:
        return INFINITY
    dt = c / (-b + sqrt(disc))
    if dt < 0.0:
        dt = 0.0
    return dt


cdef inline double wall_dt(double x, double y, double vx, double vy, double r,
                           double* bounds, int wall) noexcept nogil:
    cdef double dt
    if wall == 0:
        if vx < 0.0:
            dt = (bounds[0] + r - x) / vx
        else:
            return INFINITY
    elif wall == 1:
        if vx > 0.0:
            dt = (bounds[1] - r - x) / vx
        else:
            return INFINITY
    elif wall == 2:
        if vy < 0.0:
            dt = (bounds[2] + r - y) / vy
        else:
            return INFINITY
    else:
        if vy > 0.0:
            dt = (bounds[3] - r - y) / vy
        else:
            return INFINITY
    if dt < 0.0:
        dt = 0.0
    return dt


def next_event(const double[:, ::1] pos, const double[:, ::1] vel, const double[::1] radius,
               const double[::1] bounds_in):
    """Earliest event as ``(dt, kind, i, j)``; ``dt`` is inf when none exists."""
    cdef Py_ssize_t n = radius.shape[0]
    cdef Py_ssize_t i, j
    cdef int w
    cdef double bounds[4]
    cdef double dt, best = INFINITY
    cdef int kind = 2, bi = -1, bj = -1
    for w in range(4):
        bounds[w] = bounds_in[w]
    for i in range(n):
        for j in range(i + 1, n):
            dt = pair_dt(pos[i, 0], pos[i, 1], vel[i, 0], vel[i, 1],
                         pos[j, 0], pos[j, 1], vel[j, 0], vel[j, 1], radius[i] + radius[j])
            if dt < best:
                best = dt; kind = 0; bi = i; bj = j
    for i in range(n):
        for w in range(4):
            dt = wall_dt(pos[i, 0], pos[i, 1], vel[i, 0], vel[i, 1], radius[i], bounds, w)
            if dt < best:
                best = dt; kind = 1; bi = i; bj = w
    return best, kind, bi, bj


cdef void refresh_ball(Py_ssize_t i, Py_ssize_t skip, Py_ssize_t n, double t,
                       double* P, double* V, const double* radius, double* bounds,
                       double* pair_t, double* wall_t) noexcept nogil:
    cdef Py_ssize_t k
    cdef int w
    for k in range(n):
        if k == i or k == skip:
            continue
        if i < k:
            pair_t[i * n + k] = t + pair_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                                            P[2 * k], P[2 * k + 1], V[2 * k], V[2 * k + 1],
                                            radius[i] + radius[k])
        else:
            pair_t[k * n + i] = t + pair_dt(P[2 * k], P[2 * k + 1], V[2 * k], V[2 * k + 1],
                                            P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                                            radius[k] + radius[i])
    for w in range(4):
        wall_t[i * 4 + w] = t + wall_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                                        radius[i], bounds, w)


def advance(double[:, ::1] pos, double[:, ::1] vel, const double[::1] radius, const double[::1] mass,
            const double[::1] bounds_in, double t0, long max_events, double t_stop,
            const double[::1] sample_times, double[:, :, ::1] out_pos, double[:, :, ::1] out_vel):
    """Run the event loop in place; returns ``(t, n_events, n_samples)``."""
    cdef Py_ssize_t n = radius.shape[0]
    cdef Py_ssize_t n_s = sample_times.shape[0]
    cdef Py_ssize_t i, j, k, b, a, c, s_idx = 0
    cdef int w, kind
    cdef long n_events = 0
    cdef double t = t0, te, dt, dts, d, dx, dy, nx, ny, dvn, msum, fi, fj, sig, gap, r
    cdef double bounds[4]
    cdef double* P = &pos[0, 0]
    cdef double* V = &vel[0, 0]
    cdef const double* R = &radius[0]
    cdef const double* M = &mass[0]
    cdef double* pair_t = <double*> malloc(n * n * sizeof(double))
    cdef double* wall_t = <double*> malloc(n * 4 * sizeof(double))
    cdef bint limited = max_events >= 0
    if pair_t == NULL or wall_t == NULL:
        free(pair_t); free(wall_t)
        raise MemoryError()
    for w in range(4):
        bounds[w] = bounds_in[w]
    try:
        for i in range(n * n):
            pair_t[i] = INFINITY
        for i in range(n):
            for j in range(i + 1, n):
                pair_t[i * n + j] = t + pair_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                                                P[2 * j], P[2 * j + 1], V[2 * j], V[2 * j + 1],
                                                R[i] + R[j])
        for i in range(n):
            for w in range(4):
                wall_t[i * 4 + w] = t + wall_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                                                R[i], bounds, w)
        while True:
            if limited and n_events >= max_events:
                break
            te = INFINITY; kind = 2; i = -1; j = -1
            for a in range(n):
                for c in range(a + 1, n):
                    if pair_t[a * n + c] < te:
                        te = pair_t[a * n + c]; kind = 0; i = a; j = c
            for a in range(n):
                for w in range(4):
                    if wall_t[a * 4 + w] < te:
                        te = wall_t[a * 4 + w]; kind = 1; i = a; j = w
            if kind == 2:
                if t_stop == INFINITY:
                    raise RuntimeError("no future events: every ball is at rest")
                break
            if te > t_stop:
                break
            while s_idx < n_s and sample_times[s_idx] < te and sample_times[s_idx] <= t_stop:
                dts = sample_times[s_idx] - t
                for b in range(n):
                    out_pos[s_idx, b, 0] = P[2 * b] + V[2 * b] * dts
                    out_pos[s_idx, b, 1] = P[2 * b + 1] + V[2 * b + 1] * dts
                    out_vel[s_idx, b, 0] = V[2 * b]
                    out_vel[s_idx, b, 1] = V[2 * b + 1]
                s_idx += 1
            dt = te - t
            for k in range(2 * n):
                P[k] = P[k] + V[k] * dt
            t = te
            if kind == 0:
                dx = P[2 * i] - P[2 * j]
                dy = P[2 * i + 1] - P[2 * j + 1]
                d = sqrt(dx * dx + dy * dy)
                sig = R[i] + R[j]
                if fabs(d - sig) > CONTACT_TOL * sig:
                    raise ValueError(f"balls {i} and {j} are not in contact (distance {d!r}, expected {sig!r})")
                nx = dx / d
                ny = dy / d
                dvn = (V[2 * i] - V[2 * j]) * nx + (V[2 * i + 1] - V[2 * j + 1]) * ny
                msum = M[i] + M[j]
                fi = 2.0 * M[j] / msum * dvn
                fj = 2.0 * M[i] / msum * dvn
                V[2 * i] = V[2 * i] - fi * nx
                V[2 * i + 1] = V[2 * i + 1] - fi * ny
                V[2 * j] = V[2 * j] + fj * nx
                V[2 * j + 1] = V[2 * j + 1] + fj * ny
                refresh_ball(i, -1, n, t, P, V, R, bounds, pair_t, wall_t)
                refresh_ball(j, i, n, t, P, V, R, bounds, pair_t, wall_t)
            else:
                r = R[i]
                if j == 0:
                    gap = P[2 * i] - (bounds[0] + r)
                elif j == 1:
                    gap = P[2 * i] - (bounds[1] - r)
                elif j == 2:
                    gap = P[2 * i + 1] - (bounds[2] + r)
                else:
                    gap = P[2 * i + 1] - (bounds[3] - r)
                if fabs(gap) > CONTACT_TOL * r:
                    raise ValueError(f"ball {i} is not in contact with wall {j} (gap {gap!r})")
                k = 2 * i + (0 if j < 2 else 1)
                V[k] = -V[k]
                refresh_ball(i, -1, n, t, P, V, R, bounds, pair_t, wall_t)
            n_events += 1

        if t_stop != INFINITY and not (limited and n_events >= max_events):
            while s_idx < n_s and sample_times[s_idx] <= t_stop:
                dts = sample_times[s_idx] - t
                for b in range(n):
                    out_pos[s_idx, b, 0] = P[2 * b] + V[2 * b] * dts
                    out_pos[s_idx, b, 1] = P[2 * b + 1] + V[2 * b + 1] * dts
                    out_vel[s_idx, b, 0] = V[2 * b]
                    out_vel[s_idx, b, 1] = V[2 * b + 1]
                s_idx += 1
            dt = t_stop - t
            for k in range(2 * n):
                P[k] = P[k] + V[k] * dt
            t = t_stop
    finally:
        free(pair_t)
        free(wall_t)
    return t, n_events, s_idx
