"""Multi-leg protocols built on :func:`simulate`: seeded breaks, the
forward/reverse entropy comparison and an equilibrium entropy reference."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import make_rng
from .world import (
    BilliardWorld,
    Table,
    coarse_entropy,
    distance,
    init_break,
    occupancy_entropy,
    perturb,
    reverse,
    simulate,
)


def seeded_break(
    seed: int,
    *,
    table: Table | None = None,
    cue_offset: float = 0.0,
    offset_jitter: float = 0.5,
    **kwargs,
) -> BilliardWorld:
    """:func:`init_break` with the cue offset jittered by ``U(-j, j)`` drawn from ``seed``."""
    rng = make_rng(seed)
    offset = cue_offset + float(rng.uniform(-offset_jitter, offset_jitter))
    return init_break(table=table, cue_offset=offset, **kwargs)


@dataclass(frozen=True)
class ArrowRun:
    initial_entropy: float
    forward_entropy: float
    perturbed_forward_entropy: float
    reversed_entropy: float
    perturbed_reversed_entropy: float
    reversed_distance: float
    perturbed_reversed_distance: float
    forward_collisions: int
    curve_times: tuple = ()
    curve_entropy: tuple = ()
    curve_spread: tuple = ()


def _leg(world, duration, angle, ball, fraction, kernel):
    t_end = world.elapsed_time + duration
    if not angle:
        return simulate(world, until=t_end, kernel=kernel)[0]
    mid, _ = simulate(world, until=world.elapsed_time + fraction * duration, kernel=kernel)
    return simulate(perturb(mid, ball, angle), until=t_end, kernel=kernel)[0]


def arrow_run(
    world: BilliardWorld,
    duration: float,
    *,
    angle: float = 1e-3,
    ball: int = 0,
    fraction: float = 0.05,
    grid: int = 8,
    recorder=None,
    kernel=None,
) -> ArrowRun:
    """Forward and reversed legs of length ``duration``, with and without a kick.

    The kick rotates ``ball``'s velocity by ``angle`` a ``fraction`` of the
    way into the leg: into the forward leg for the perturbed forward run,
    into the backward leg for the perturbed reversal.  Entropies are taken
    at the end of each leg; reversal distances compare the returned state
    with ``world``.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    fwd, samples = (
        simulate(world, until=world.elapsed_time + duration, recorder=recorder, kernel=kernel)
    )
    fwd_p = _leg(world, duration, angle, ball, fraction, kernel)
    back = reverse(fwd)
    home = reverse(_leg(back, duration, 0.0, ball, fraction, kernel))
    home_p = reverse(_leg(back, duration, angle, ball, fraction, kernel))
    return ArrowRun(
        initial_entropy=coarse_entropy(world, grid),
        forward_entropy=coarse_entropy(fwd, grid),
        perturbed_forward_entropy=coarse_entropy(fwd_p, grid),
        reversed_entropy=coarse_entropy(home, grid),
        perturbed_reversed_entropy=coarse_entropy(home_p, grid),
        reversed_distance=distance(home, world),
        perturbed_reversed_distance=distance(home_p, world),
        forward_collisions=fwd.collision_count - world.collision_count,
        curve_times=tuple(s.time for s in samples),
        curve_entropy=tuple(s.coarse_entropy for s in samples),
        curve_spread=tuple(s.energy_share_spread for s in samples),
    )


def equilibrium_entropy(world: BilliardWorld, grid: int = 8, samples: int = 20_000, seed: int = 0):
    """Mean and spread of coarse entropy for ball centres placed uniformly.

    Centres are drawn independently over the region each ball's centre can
    reach; exclusion between balls is ignored, which is a small correction
    at low packing fractions.
    """
    rng = make_rng(seed)
    t = world.table
    lo = np.column_stack([t.xmin + world.radii, t.ymin + world.radii])
    hi = np.column_stack([t.xmax - world.radii, t.ymax - world.radii])
    vals = np.empty(samples)
    for k in range(samples):
        pts = lo + (hi - lo) * rng.random(lo.shape)
        vals[k] = occupancy_entropy(pts, t, grid)
    return float(vals.mean()), float(vals.std())
