"""Hard-disk billiard table: state, event stepping, reversal and diagnostics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _pykernels, backend

WALLS = ("left", "right", "bottom", "top")
OVERLAP_TOL = 1e-9


class BilliardError(ValueError):
    pass


class LatticeFitError(BilliardError):
    pass


class NoEventError(BilliardError):
    pass


class NonContactError(BilliardError):
    pass


@dataclass(frozen=True)
class Table:
    xmin: float = 0.0
    xmax: float = 100.0
    ymin: float = 0.0
    ymax: float = 50.0

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def as_array(self) -> np.ndarray:
        return np.array([self.xmin, self.xmax, self.ymin, self.ymax], dtype=float)


@dataclass(eq=False)
class BilliardWorld:
    """N disks on an axis-aligned rectangular table.

    Operations never mutate a world in place; each returns a new one.
    ``collision_count`` counts every resolved event, wall bounces included.
    """

    positions: np.ndarray
    velocities: np.ndarray
    radii: np.ndarray
    masses: np.ndarray
    table: Table = field(default_factory=Table)
    elapsed_time: float = 0.0
    collision_count: int = 0

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=float).reshape(-1, 2)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=float).reshape(-1, 2)
        n = len(self.positions)
        self.radii = np.array(np.broadcast_to(self.radii, (n,)), dtype=float)
        self.masses = np.array(np.broadcast_to(self.masses, (n,)), dtype=float)
        self.validate()

    @property
    def n_balls(self) -> int:
        return len(self.positions)

    def validate(self):
        n = self.n_balls
        if self.velocities.shape != (n, 2):
            raise BilliardError("positions and velocities must both have shape (N, 2)")
        if np.any(self.radii <= 0) or np.any(self.masses <= 0):
            raise BilliardError("radii and masses must be positive")
        t, r = self.table, self.radii
        x, y = self.positions[:, 0], self.positions[:, 1]
        slack = OVERLAP_TOL * r
        if (
            np.any(x - r < t.xmin - slack)
            or np.any(x + r > t.xmax + slack)
            or np.any(y - r < t.ymin - slack)
            or np.any(y + r > t.ymax + slack)
        ):
            raise BilliardError("a ball lies outside the table")
        if n > 1:
            d = np.linalg.norm(self.positions[:, None, :] - self.positions[None, :, :], axis=-1)
            sig = r[:, None] + r[None, :]
            iu = np.triu_indices(n, 1)
            if np.any(d[iu] < sig[iu] * (1 - OVERLAP_TOL)):
                raise BilliardError("two balls overlap")

    def copy(self, **changes) -> "BilliardWorld":
        fields = dict(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            radii=self.radii.copy(),
            masses=self.masses.copy(),
            table=self.table,
            elapsed_time=self.elapsed_time,
            collision_count=self.collision_count,
        )
        fields.update(changes)
        return BilliardWorld(**fields)

    def kinetic_energies(self) -> np.ndarray:
        return 0.5 * self.masses * np.sum(self.velocities**2, axis=1)

    def kinetic_energy(self) -> float:
        return float(np.sum(self.kinetic_energies()))

    def momentum(self) -> np.ndarray:
        return np.sum(self.masses[:, None] * self.velocities, axis=0)

    def same_state(self, other: "BilliardWorld") -> bool:
        """Bit-exact equality of positions, velocities, time and counter."""
        return (
            np.array_equal(self.positions, other.positions)
            and np.array_equal(self.velocities, other.velocities)
            and self.elapsed_time == other.elapsed_time
            and self.collision_count == other.collision_count
        )


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    kind: str  # "ball_ball" or "ball_wall"
    i: int
    j: int  # partner ball, or wall id (0 left, 1 right, 2 bottom, 3 top)

    @property
    def wall(self) -> str | None:
        return WALLS[self.j] if self.kind == "ball_wall" else None


@dataclass(frozen=True)
class EntropySample:
    time: float
    coarse_entropy: float
    energy_share_spread: float


# ------------------------------------------------------------------ setup


def init_break(
    n_target_balls: int = 15,
    speed: float = 1.0,
    *,
    radius: float = 1.0,
    mass: float = 1.0,
    table: Table | None = None,
    gap: float = 0.1,
    cue_offset: float = 0.05,
    cue_x: float | None = None,
    apex_x: float | None = None,
) -> BilliardWorld:
    """Targets at rest in a triangular rack, cue ball driven at the apex.

    ``gap`` is the clearance between neighbouring rack balls and
    ``cue_offset`` the cue's lateral offset from the rack axis, both in
    length units; a small offset avoids perfectly symmetric collisions.
    Ball 0 is the cue.
    """
    if n_target_balls < 3:
        raise ValueError("n_target_balls must be at least 3")
    if not speed > 0:
        raise ValueError("speed must be positive")
    table = table or Table()
    yc = 0.5 * (table.ymin + table.ymax)
    cue_x = table.xmin + 0.25 * table.width if cue_x is None else cue_x
    apex_x = table.xmin + 0.6 * table.width if apex_x is None else apex_x
    d = 2 * radius + gap
    row_dx = d * math.sqrt(3) / 2
    targets = []
    row = 0
    while len(targets) < n_target_balls:
        for k in range(row + 1):
            if len(targets) == n_target_balls:
                break
            targets.append((apex_x + row * row_dx, yc + (k - row / 2) * d))
        row += 1
    pts = np.array([(cue_x, yc + cue_offset)] + targets)
    lo = pts - radius
    hi = pts + radius
    if (
        lo[:, 0].min() < table.xmin
        or hi[:, 0].max() > table.xmax
        or lo[:, 1].min() < table.ymin
        or hi[:, 1].max() > table.ymax
        or cue_x + radius >= apex_x - radius
    ):
        raise LatticeFitError(f"a rack of {n_target_balls} balls does not fit the table")
    vel = np.zeros_like(pts)
    vel[0] = (speed, 0.0)
    return BilliardWorld(pts, vel, radius, mass, table)


# ------------------------------------------------------------- stepping


def next_event(world: BilliardWorld) -> CollisionEvent:
    dt, kind, i, j = backend.kernels.next_event(
        world.positions, world.velocities, world.radii, world.table.as_array()
    )
    if not math.isfinite(dt):
        raise NoEventError("no future event: every ball is at rest")
    return CollisionEvent(world.elapsed_time + dt, "ball_ball" if kind == 0 else "ball_wall", int(i), int(j))


def resolve_collision(world: BilliardWorld, event: CollisionEvent) -> BilliardWorld:
    """Drift every ball to ``event.time`` and apply the elastic impulse."""
    if event.time < world.elapsed_time:
        raise BilliardError("event lies in the past of this world")
    dt = event.time - world.elapsed_time
    P = [float(c) for c in world.positions.reshape(-1)]
    V = [float(c) for c in world.velocities.reshape(-1)]
    for k in range(len(P)):
        P[k] = P[k] + V[k] * dt
    radius = [float(r) for r in world.radii]
    try:
        if event.kind == "ball_ball":
            _pykernels._collide_pair(P, V, radius, [float(m) for m in world.masses], event.i, event.j)
        else:
            _pykernels._collide_wall(P, V, radius, [float(b) for b in world.table.as_array()], event.i, event.j)
    except ValueError as exc:
        raise NonContactError(str(exc)) from None
    return world.copy(
        positions=np.array(P).reshape(-1, 2),
        velocities=np.array(V).reshape(-1, 2),
        elapsed_time=event.time,
        collision_count=world.collision_count + 1,
    )


class Recorder:
    """Samples diagnostics every ``interval`` time units, starting at the run's start time.

    Snapshots are taken without interrupting the event loop, so recording
    does not change the trajectory.  At most ``max_samples`` are kept.
    """

    def __init__(self, interval: float, grid: int = 8, max_samples: int = 100_000):
        if not interval > 0:
            raise ValueError("interval must be positive")
        self.interval = float(interval)
        self.grid = grid
        self.max_samples = max_samples
        self.times = np.empty(0)
        self.positions = np.empty((0, 0, 2))
        self.velocities = np.empty((0, 0, 2))
        self.samples: list[EntropySample] = []

    def _sample_times(self, t0: float, t_end: float) -> np.ndarray:
        if math.isfinite(t_end):
            count = min(int(math.floor((t_end - t0) / self.interval)) + 1, self.max_samples)
        else:
            count = self.max_samples
        return t0 + self.interval * np.arange(count, dtype=float)

    def _store(self, world: BilliardWorld, times, pos, vel):
        self.times = np.concatenate([self.times, times])
        self.positions = pos if not len(self.positions) else np.concatenate([self.positions, pos])
        self.velocities = vel if not len(self.velocities) else np.concatenate([self.velocities, vel])
        for t, p, v in zip(times, pos, vel):
            snap = world.copy(positions=p, velocities=v, elapsed_time=float(t))
            self.samples.append(EntropySample(float(t), coarse_entropy(snap, self.grid), energy_share_stats(snap)))


def simulate(
    world: BilliardWorld,
    *,
    collisions: int | None = None,
    until: float | None = None,
    recorder: Recorder | None = None,
    kernel=None,
) -> tuple[BilliardWorld, list[EntropySample]]:
    """Advance event by event until ``collisions`` more events or time ``until``.

    With both limits set, whichever is reached first stops the run.  A
    time-limited run ends with a free drift to exactly ``until``.
    """
    if collisions is None and until is None:
        raise ValueError("give a collision count, an end time, or both")
    if collisions is not None and collisions < 0:
        raise ValueError("collisions must be non-negative")
    if until is not None and until < world.elapsed_time:
        raise ValueError("end time lies before the world's current time")
    k = kernel or backend.kernels
    out = world.copy()
    t_stop = math.inf if until is None else float(until)
    times = recorder._sample_times(world.elapsed_time, t_stop) if recorder else np.empty(0)
    s_pos = np.zeros((len(times), world.n_balls, 2))
    s_vel = np.zeros((len(times), world.n_balls, 2))
    try:
        t, n_events, n_samples = k.advance(
            out.positions, out.velocities, out.radii, out.masses, out.table.as_array(),
            float(world.elapsed_time), -1 if collisions is None else int(collisions), t_stop,
            times, s_pos, s_vel,
        )
    except RuntimeError as exc:
        raise NoEventError(str(exc)) from None
    except ValueError as exc:
        raise NonContactError(str(exc)) from None
    out.elapsed_time = float(t)
    out.collision_count = world.collision_count + int(n_events)
    if recorder is not None:
        recorder._store(out, times[:n_samples], s_pos[:n_samples], s_vel[:n_samples])
        return out, recorder.samples
    return out, []


def reverse(world: BilliardWorld) -> BilliardWorld:
    return world.copy(velocities=-world.velocities)


def perturb(world: BilliardWorld, ball: int, angle: float) -> BilliardWorld:
    """Rotate one ball's velocity by ``angle`` radians; speed is unchanged."""
    if not 0 <= ball < world.n_balls:
        raise IndexError(f"ball index {ball} out of range for {world.n_balls} balls")
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    if angle == 0:
        return world.copy()
    vel = world.velocities.copy()
    c, s = math.cos(angle), math.sin(angle)
    vx, vy = vel[ball]
    vel[ball] = (c * vx - s * vy, s * vx + c * vy)
    return world.copy(velocities=vel)


# ----------------------------------------------------------- diagnostics


def _cells(positions: np.ndarray, table: Table, grid: int) -> np.ndarray:
    t = table
    ix = np.clip(((positions[:, 0] - t.xmin) / t.width * grid).astype(int), 0, grid - 1)
    iy = np.clip(((positions[:, 1] - t.ymin) / t.height * grid).astype(int), 0, grid - 1)
    return np.bincount(ix * grid + iy, minlength=grid * grid)


def cell_counts(world: BilliardWorld, grid: int = 8) -> np.ndarray:
    return _cells(world.positions, world.table, grid)


def occupancy_entropy(positions, table: Table, grid: int = 8) -> float:
    """``-sum p ln p`` of ball-centre occupancy over a ``grid`` x ``grid`` partition."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    counts = _cells(positions, table, grid)
    p = counts[counts > 0] / len(positions)
    return float(max(0.0, -np.sum(p * np.log(p))))


def coarse_entropy(world: BilliardWorld, grid: int = 8) -> float:
    """Occupancy entropy ``-sum p ln p`` over a ``grid`` x ``grid`` partition, in nats."""
    return occupancy_entropy(world.positions, world.table, grid)


def energy_share_stats(world: BilliardWorld) -> float:
    """Coefficient of variation of per-ball kinetic energy (0 at equipartition)."""
    if world.n_balls < 2:
        raise ValueError("need at least two balls")
    e = world.kinetic_energies()
    mean = e.mean()
    if mean == 0:
        return 0.0
    return float(e.std() / mean)


def distance(a: BilliardWorld, b: BilliardWorld) -> float:
    """Largest ball displacement between two worlds, in table widths."""
    return float(np.max(np.linalg.norm(a.positions - b.positions, axis=1)) / a.table.width)


@dataclass(frozen=True)
class EchoResult:
    collisions: int
    duration: float
    echo_error: float
    returned: BilliardWorld
    reversed_collisions: int


def loschmidt_echo(
    world: BilliardWorld,
    collisions: int,
    *,
    angle: float = 0.0,
    ball: int = 0,
    kernel=None,
) -> EchoResult:
    """Run ``collisions`` events forward, reverse, run back for the same time, reverse again.

    A nonzero ``angle`` rotates ``ball``'s velocity halfway through the
    backward leg.  ``echo_error`` is :func:`distance` from the start.
    """
    fwd, _ = simulate(world, collisions=collisions, kernel=kernel)
    duration = fwd.elapsed_time - world.elapsed_time
    back = reverse(fwd)
    t_end = back.elapsed_time + duration
    if angle:
        mid, _ = simulate(back, until=back.elapsed_time + 0.5 * duration, kernel=kernel)
        back, _ = simulate(perturb(mid, ball, angle), until=t_end, kernel=kernel)
    else:
        back, _ = simulate(back, until=t_end, kernel=kernel)
    home = reverse(back)
    return EchoResult(
        collisions, duration, distance(home, world), home, back.collision_count - fwd.collision_count
    )


# ----------------------------------------------------------------- export

TRAJECTORY_COLUMNS = ("time", "ball", "x", "y", "vx", "vy")
DIAGNOSTIC_COLUMNS = ("time", "entropy", "energy_share_spread")


def write_trajectory_csv(path, recorder: Recorder):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for t, pos, vel in zip(recorder.times, recorder.positions, recorder.velocities):
            for b in range(len(pos)):
                w.writerow([f"{v:.12g}" for v in (t,)] + [b] + [f"{v:.12g}" for v in (*pos[b], *vel[b])])


def write_diagnostics_csv(path, samples):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAGNOSTIC_COLUMNS)
        for s in samples:
            w.writerow([f"{s.time:.12g}", f"{s.coarse_entropy:.12g}", f"{s.energy_share_spread:.12g}"])
