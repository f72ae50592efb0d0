"""Trial builders and runners for the interferometric atom experiments.

Conventions shared by every experiment here:

* photon path qubit: ``|0>`` is path 1 (the free arm in the Hardy chain),
  ``|1>`` is path 2 (the arm carrying the atoms' boxes in the Hardy chain);
* atom position qubit: ``|0>`` (``|Z+>``) is the box intersecting the
  photon's path, ``|1>`` (``|Z->``) the box that does not;
* the second beam splitter is a measurement of the photon along x:
  ``x+`` is the bright port (all amplitude with no obstruction), ``x-``
  the dark port.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import quantum as q
from .quantum import MeasAxis, StateVector
from .seeding import make_rng

PHOTON = "photon"
ATOM1 = "atom1"
ATOM2 = "atom2"
SCATTER = "scatter"

MAX_HARDY_ATOMS = 12

_BRIGHT = np.array([q.SQRT1_2, q.SQRT1_2], dtype=complex)
_DARK = np.array([q.SQRT1_2, -q.SQRT1_2], dtype=complex)
_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)


class Classification(str, enum.Enum):
    SCATTERED = "scattered"
    DISRUPTED_ENTANGLED = "disrupted_entangled"
    INTERFERENCE_INTACT = "interference_intact"


class Port(str, enum.Enum):
    BRIGHT = "bright"
    DARK = "dark"
    NONE = "none"


class AtomResult(str, enum.Enum):
    INTERSECTING = "intersecting"
    NON_INTERSECTING = "non_intersecting"
    UNMEASURED = "unmeasured"


@dataclass(frozen=True)
class InverseEprOutcome:
    """One inverse-EPR trial.

    ``path_blocked`` is the which-path record: whether one atom sat in the
    box crossing the path the photon did not take.  It is drawn from the
    atoms' obstruction probability given the port and does not disturb
    ``atom_state``.  ``None`` for scattered trials.
    """

    classification: Classification
    atom_state: StateVector | None
    photon_port: Port
    path_blocked: bool | None = None

    def __post_init__(self):
        if (self.atom_state is None) != (self.classification is Classification.SCATTERED):
            raise ValueError("atom_state must be present exactly when the photon was not scattered")
        if self.classification is Classification.DISRUPTED_ENTANGLED and self.photon_port is not Port.DARK:
            raise ValueError("disrupted_entangled trials are heralded by the dark port")


@dataclass(frozen=True)
class HardyChainOutcome:
    n_atoms: int
    dark_detected: bool
    atom_results: tuple[AtomResult, ...]
    residual_state: StateVector | None
    scattered: bool = False

    @property
    def found_index(self) -> int | None:
        for i, r in enumerate(self.atom_results):
            if r is AtomResult.INTERSECTING:
                return i
        return None


@dataclass(frozen=True)
class MixedMeasurementOutcome:
    epr: InverseEprOutcome
    axes: tuple[MeasAxis, MeasAxis] | None = None
    outcomes: tuple[int, int] | None = None
    # per atom: True/False when z-measured (intersecting or not), None otherwise
    z_intersecting: tuple[bool | None, bool | None] | None = None

    @property
    def mixed(self) -> bool:
        """One atom measured along z, the other along x or y."""
        if self.axes is None:
            return False
        return (self.axes[0] is MeasAxis.Z) != (self.axes[1] is MeasAxis.Z)


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    seed: int
    payload: object
    axes: tuple | None = field(default=None)


# ---------------------------------------------------------------- inverse EPR

_EPR_LABELS = (PHOTON, ATOM1, ATOM2)


def build_inverse_epr() -> StateVector:
    """Photon path, atom 1 and atom 2 each in an equal superposition."""
    return q.product(q.plus_state(lab) for lab in _EPR_LABELS)


# photon on path i meets atom i's intersecting box
_EPR_SCATTER_MASK = q.basis_mask(
    _EPR_LABELS,
    lambda b: (b[PHOTON] == 0 and b[ATOM1] == 0) or (b[PHOTON] == 1 and b[ATOM2] == 0),
)
_EPR_INITIAL = build_inverse_epr()


@lru_cache(maxsize=None)
def _epr_branches():
    """Branch structure of the fixed initial state, computed once.

    Returns ``(p_scatter, p_bright, {port: (atoms, p_clear)})``; every trial
    then only draws against these probabilities, in the same order as a
    step-by-step measurement would.
    """
    hit = q.project_onto(_EPR_INITIAL, _EPR_SCATTER_MASK)
    free = q.project_onto(_EPR_INITIAL, ~_EPR_SCATTER_MASK).collapsed
    plus, minus = q.axis_projectors(MeasAxis.X)
    bright = q.project(free, PHOTON, plus)
    dark = q.project(free, PHOTON, minus)
    tails = {}
    for port, res, bra in ((Port.BRIGHT, bright, _BRIGHT), (Port.DARK, dark, _DARK)):
        atoms = q.contract(res.collapsed, PHOTON, bra)
        # both atoms in their non-intersecting boxes leaves both paths clear
        tails[port] = (atoms, abs(atoms.amplitudes[3]) ** 2)
    return hit.probability, bright.probability, tails


def sample_inverse_epr(rng) -> InverseEprOutcome:
    p_scatter, p_bright, tails = _epr_branches()
    if rng.random() < p_scatter:
        return InverseEprOutcome(Classification.SCATTERED, None, Port.NONE)
    if rng.random() < p_bright:
        port, cls = Port.BRIGHT, Classification.INTERFERENCE_INTACT
    else:
        port, cls = Port.DARK, Classification.DISRUPTED_ENTANGLED
    atoms, p_clear = tails[port]
    blocked = bool(rng.random() >= p_clear)
    return InverseEprOutcome(cls, atoms, port, blocked)


def run_inverse_epr(seed: int) -> TrialRecord:
    return TrialRecord("inverse_epr", seed, sample_inverse_epr(make_rng(seed)))


def inverse_epr_heralded_state() -> StateVector:
    """Exact two-atom state conditioned on no scattering and a dark click."""
    free = q.project_onto(_EPR_INITIAL, ~_EPR_SCATTER_MASK).collapsed
    dark = q.project(free, PHOTON, q.axis_projectors(MeasAxis.X)[1]).collapsed
    return q.contract(dark, PHOTON, _DARK)


# -------------------------------------------------------------- mixed measure


def sample_mixed_measurement(rng) -> MixedMeasurementOutcome:
    epr = sample_inverse_epr(rng)
    if epr.classification is not Classification.DISRUPTED_ENTANGLED:
        return MixedMeasurementOutcome(epr)
    axes = (q.AXES[int(rng.integers(3))], q.AXES[int(rng.integers(3))])
    s1, st = q.measure(epr.atom_state, ATOM1, axes[0], rng)
    s2, _ = q.measure(st, ATOM2, axes[1], rng)
    z_hits = tuple((sign > 0) if ax is MeasAxis.Z else None for ax, sign in zip(axes, (s1, s2)))
    return MixedMeasurementOutcome(epr, axes, (s1, s2), z_hits)


def run_mixed_measurement(seed: int) -> TrialRecord:
    out = sample_mixed_measurement(make_rng(seed))
    return TrialRecord("mixed_measurement", seed, out, out.axes)


# -------------------------------------------------------------- Hardy chain


def _atom_labels(n: int) -> tuple[str, ...]:
    return tuple(f"atom{i + 1}" for i in range(n))


def _check_n(n: int):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or not 1 <= n <= MAX_HARDY_ATOMS:
        raise ValueError(f"n_atoms must be an integer in [1, {MAX_HARDY_ATOMS}], got {n!r}")


@lru_cache(maxsize=None)
def build_hardy_chain(n: int) -> StateVector:
    """State just before the second beam splitter.

    Labels are ``photon, atom1..atomN, scatter``.  Every atom's intersecting
    box lies on path 2; branches where the photon took path 2 and met an
    atom are moved into the ``scatter = |1>`` sector.
    """
    _check_n(n)
    n_cfg = 2**n
    amp = 2.0 ** (-(n + 1) / 2)
    amps = np.zeros(2 * n_cfg * 2, dtype=complex)
    cfg = np.arange(n_cfg)
    blocked = cfg != n_cfg - 1  # any atom bit equal to 0
    amps[(0 * n_cfg + cfg) * 2] = amp
    amps[(1 * n_cfg + cfg) * 2 + blocked.astype(int)] = amp
    return StateVector((PHOTON,) + _atom_labels(n) + (SCATTER,), amps)


def hardy_dark_probability(n: int) -> float:
    state = build_hardy_chain(n)
    free = q.project(state, SCATTER, q.axis_projectors(MeasAxis.Z)[0])
    dark = q.project(free.collapsed, PHOTON, q.axis_projectors(MeasAxis.X)[1])
    return free.probability * dark.probability


@lru_cache(maxsize=None)
def hardy_postselected_atoms(n: int) -> StateVector:
    """Exact atom state conditioned on no scattering and a dark click."""
    state = build_hardy_chain(n)
    free = q.project(state, SCATTER, q.axis_projectors(MeasAxis.Z)[0]).collapsed
    dark = q.project(free, PHOTON, q.axis_projectors(MeasAxis.X)[1]).collapsed
    return q.contract(q.contract(dark, PHOTON, _DARK), SCATTER, _KET0)


@lru_cache(maxsize=None)
def _hardy_branches(n: int):
    """``(p_unscattered, p_bright | unscattered)`` for the fixed chain state."""
    state = build_hardy_chain(n)
    free = q.project(state, SCATTER, q.axis_projectors(MeasAxis.Z)[0])
    bright = q.project(free.collapsed, PHOTON, q.axis_projectors(MeasAxis.X)[0])
    return free.probability, bright.probability


def sample_hardy_chain(n: int, rng, measure_until_found: bool = True) -> HardyChainOutcome:
    """Scatter flag, then photon port, then atoms in order along z.

    The first two measurements act on the same fixed state every trial, so
    their probabilities are taken from a cache; one draw is used per
    measurement either way.
    """
    _check_n(n)
    p_free, p_bright = _hardy_branches(n)
    unmeasured = (AtomResult.UNMEASURED,) * n
    if not rng.random() < p_free:
        return HardyChainOutcome(n, False, unmeasured, None, scattered=True)
    if rng.random() < p_bright:
        return HardyChainOutcome(n, False, unmeasured, None)
    atoms = hardy_postselected_atoms(n)
    results = list(unmeasured)
    for i, label in enumerate(_atom_labels(n)):
        sign, atoms = q.measure(atoms, label, MeasAxis.Z, rng)
        results[i] = AtomResult.INTERSECTING if sign > 0 else AtomResult.NON_INTERSECTING
        atoms = q.contract(atoms, label, _KET0 if sign > 0 else _KET1)
        if sign > 0 and measure_until_found:
            break
    return HardyChainOutcome(n, True, tuple(results), atoms)


def run_hardy_chain(n: int, seed: int, measure_until_found: bool = True) -> TrialRecord:
    _check_n(n)
    return TrialRecord("hardy_chain", seed, sample_hardy_chain(n, make_rng(seed), measure_until_found))


def residual_visibility(residual_state: StateVector) -> dict[str, float]:
    """Fringe visibility ``2|rho_01|`` of each subsystem's reduced state.

    1 for an equal superposition of the two boxes, 0 for a box eigenstate.
    """
    return {
        lab: float(min(1.0, 2.0 * abs(q.reduced_density(residual_state, lab)[0, 1])))
        for lab in residual_state.labels
    }


def uniform_superposition(labels) -> StateVector:
    labels = tuple(labels)
    if not labels:
        return StateVector((), [1.0])
    return q.product(q.plus_state(lab) for lab in labels)
