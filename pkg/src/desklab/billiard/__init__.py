"""Event-driven hard-disk billiards with reversal and perturbation."""
from .backend import NAME as KERNEL_BACKEND
from .world import (
    BilliardError,
    BilliardWorld,
    CollisionEvent,
    EchoResult,
    EntropySample,
    LatticeFitError,
    NoEventError,
    NonContactError,
    Recorder,
    Table,
    cell_counts,
    coarse_entropy,
    distance,
    energy_share_stats,
    init_break,
    loschmidt_echo,
    next_event,
    occupancy_entropy,
    perturb,
    resolve_collision,
    reverse,
    simulate,
    write_diagnostics_csv,
    write_trajectory_csv,
)
from .protocols import ArrowRun, arrow_run, equilibrium_entropy, seeded_break
