"""Pure-Python event loop for hard disks in an axis-aligned box.

Arithmetic is written in the same order as ``_ckernels.pyx`` so that both
backends produce bit-identical trajectories.  Event ordering key is
``(time, kind, i, j)`` with kind 0 for ball-ball and 1 for ball-wall; wall
ids are 0 left, 1 right, 2 bottom, 3 top.
"""
import heapq
import math

INF = math.inf
CONTACT_TOL = 1e-9


def pair_dt(xi, yi, vxi, vyi, xj, yj, vxj, vyj, sig):
    dx = xi - xj
    dy = yi - yj
    dvx = vxi - vxj
    dvy = vyi - vyj
    b = dx * dvx + dy * dvy
    if b >= 0.0:
        return INF
    dv2 = dvx * dvx + dvy * dvy
    c = dx * dx + dy * dy - sig * sig
    disc = b * b - dv2 * c
    if disc < 0.0:
        return INF
    dt = c / (-b + math.sqrt(disc))
    if dt < 0.0:
        dt = 0.0
    return dt


def wall_dt(x, y, vx, vy, r, bounds, wall):
    if wall == 0:
        if vx < 0.0:
            dt = (bounds[0] + r - x) / vx
        else:
            return INF
    elif wall == 1:
        if vx > 0.0:
            dt = (bounds[1] - r - x) / vx
        else:
            return INF
    elif wall == 2:
        if vy < 0.0:
            dt = (bounds[2] + r - y) / vy
        else:
            return INF
    else:
        if vy > 0.0:
            dt = (bounds[3] - r - y) / vy
        else:
            return INF
    if dt < 0.0:
        dt = 0.0
    return dt


def next_event(pos, vel, radius, bounds):
    """Earliest event as ``(dt, kind, i, j)``; ``dt`` is inf when none exists."""
    n = len(radius)
    best = (INF, 2, -1, -1)
    for i in range(n):
        xi, yi = pos[i][0], pos[i][1]
        vxi, vyi = vel[i][0], vel[i][1]
        for j in range(i + 1, n):
            dt = pair_dt(xi, yi, vxi, vyi, pos[j][0], pos[j][1], vel[j][0], vel[j][1], radius[i] + radius[j])
            if dt < best[0]:
                best = (dt, 0, i, j)
    for i in range(n):
        for w in range(4):
            dt = wall_dt(pos[i][0], pos[i][1], vel[i][0], vel[i][1], radius[i], bounds, w)
            if dt < best[0]:
                best = (dt, 1, i, w)
    return best


def _collide_pair(P, V, radius, mass, i, j):
    dx = P[2 * i] - P[2 * j]
    dy = P[2 * i + 1] - P[2 * j + 1]
    d = math.sqrt(dx * dx + dy * dy)
    sig = radius[i] + radius[j]
    if abs(d - sig) > CONTACT_TOL * sig:
        raise ValueError(f"balls {i} and {j} are not in contact (distance {d!r}, expected {sig!r})")
    nx = dx / d
    ny = dy / d
    dvn = (V[2 * i] - V[2 * j]) * nx + (V[2 * i + 1] - V[2 * j + 1]) * ny
    msum = mass[i] + mass[j]
    fi = 2.0 * mass[j] / msum * dvn
    fj = 2.0 * mass[i] / msum * dvn
    V[2 * i] = V[2 * i] - fi * nx
    V[2 * i + 1] = V[2 * i + 1] - fi * ny
    V[2 * j] = V[2 * j] + fj * nx
    V[2 * j + 1] = V[2 * j + 1] + fj * ny


def _collide_wall(P, V, radius, bounds, i, w):
    r = radius[i]
    if w == 0:
        gap = P[2 * i] - (bounds[0] + r)
    elif w == 1:
        gap = P[2 * i] - (bounds[1] - r)
    elif w == 2:
        gap = P[2 * i + 1] - (bounds[2] + r)
    else:
        gap = P[2 * i + 1] - (bounds[3] - r)
    if abs(gap) > CONTACT_TOL * r:
        raise ValueError(f"ball {i} is not in contact with wall {w} (gap {gap!r})")
    k = 2 * i + (0 if w < 2 else 1)
    V[k] = -V[k]


def advance(pos, vel, radius, mass, bounds, t0, max_events, t_stop, sample_times, out_pos, out_vel):
    """Run the event loop in place; returns ``(t, n_events, n_samples)``.

    Stops after ``max_events`` events (negative for no limit) or at
    ``t_stop``, whichever comes first.  Snapshots at ``sample_times`` are
    written into ``out_pos``/``out_vel`` without touching the trajectory.
    """
    n = len(radius)
    radius = [float(r) for r in radius]
    mass = [float(m) for m in mass]
    bounds = [float(b) for b in bounds]
    P = [float(c) for c in pos.reshape(-1)]
    V = [float(c) for c in vel.reshape(-1)]
    samples = [float(s) for s in sample_times]
    n_s = len(samples)
    t = float(t0)
    t_stop = float(t_stop)
    cnt = [0] * n
    heap = []

    def push_ball(i, skip=-1):
        xi, yi, vxi, vyi = P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1]
        for k in range(n):
            if k == i or k == skip:
                continue
            # lower index always goes first so both backends round identically
            if i < k:
                dt = pair_dt(xi, yi, vxi, vyi, P[2 * k], P[2 * k + 1], V[2 * k], V[2 * k + 1],
                             radius[i] + radius[k])
                key = (i, k)
            else:
                dt = pair_dt(P[2 * k], P[2 * k + 1], V[2 * k], V[2 * k + 1], xi, yi, vxi, vyi,
                             radius[k] + radius[i])
                key = (k, i)
            if dt != INF:
                heapq.heappush(heap, (t + dt, 0, key[0], key[1], cnt[key[0]], cnt[key[1]]))
        for w in range(4):
            dt = wall_dt(xi, yi, vxi, vyi, radius[i], bounds, w)
            if dt != INF:
                heapq.heappush(heap, (t + dt, 1, i, w, cnt[i], -1))

    # initial table: every pair i<j, then walls
    for i in range(n):
        for j in range(i + 1, n):
            dt = pair_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1],
                         P[2 * j], P[2 * j + 1], V[2 * j], V[2 * j + 1], radius[i] + radius[j])
            if dt != INF:
                heapq.heappush(heap, (t + dt, 0, i, j, 0, 0))
    for i in range(n):
        for w in range(4):
            dt = wall_dt(P[2 * i], P[2 * i + 1], V[2 * i], V[2 * i + 1], radius[i], bounds, w)
            if dt != INF:
                heapq.heappush(heap, (t + dt, 1, i, w, 0, -1))

    n_events = 0
    s_idx = 0

    def snapshot(until):
        nonlocal s_idx
        while s_idx < n_s and samples[s_idx] < until and samples[s_idx] <= t_stop:
            dts = samples[s_idx] - t
            for b in range(n):
                out_pos[s_idx, b, 0] = P[2 * b] + V[2 * b] * dts
                out_pos[s_idx, b, 1] = P[2 * b + 1] + V[2 * b + 1] * dts
                out_vel[s_idx, b, 0] = V[2 * b]
                out_vel[s_idx, b, 1] = V[2 * b + 1]
            s_idx += 1

    while True:
        if max_events >= 0 and n_events >= max_events:
            break
        while heap:
            te, kind, i, j, ci, cj = heap[0]
            if ci == cnt[i] and (kind == 1 or cj == cnt[j]):
                break
            heapq.heappop(heap)
        if not heap:
            if t_stop == INF:
                raise RuntimeError("no future events: every ball is at rest")
            break
        te, kind, i, j, _, _ = heap[0]
        if te > t_stop:
            break
        heapq.heappop(heap)
        snapshot(te)
        dt = te - t
        for k in range(2 * n):
            P[k] = P[k] + V[k] * dt
        t = te
        if kind == 0:
            _collide_pair(P, V, radius, mass, i, j)
            cnt[i] += 1
            cnt[j] += 1
            push_ball(i)
            push_ball(j, skip=i)
        else:
            _collide_wall(P, V, radius, bounds, i, j)
            cnt[i] += 1
            push_ball(i)
        n_events += 1

    if t_stop != INF and not (max_events >= 0 and n_events >= max_events):
        snapshot(INF)
        dt = t_stop - t
        for k in range(2 * n):
            P[k] = P[k] + V[k] * dt
        t = t_stop

    flat_p = pos.reshape(-1)
    flat_v = vel.reshape(-1)
    for k in range(2 * n):
        flat_p[k] = P[k]
        flat_v[k] = V[k]
    return t, n_events, s_idx
