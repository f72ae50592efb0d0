"""Dense state-vector algebra over labeled two-level subsystems.

Basis convention: index 0 of every subsystem is ``|Z+>`` and index 1 is
``|Z->``.  The first label is the most significant tensor factor, so
amplitudes follow ``numpy.kron`` ordering.  Global phase is never
canonicalized; compare states with :func:`fidelity` or ``abs(overlap)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PROB_FLOOR = 1e-15
NORM_TOL = 1e-10
IDEMPOTENT_TOL = 1e-10

SQRT1_2 = 1.0 / np.sqrt(2.0)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


class QuantumError(ValueError):
    """Base class for state-algebra errors."""


class DuplicateLabelError(QuantumError):
    pass


class UnknownLabelError(QuantumError):
    pass


class LabelMismatchError(QuantumError):
    pass


class ProjectorError(QuantumError):
    pass


class NormalizationError(QuantumError):
    pass


class MeasAxis(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def vector(self) -> np.ndarray:
        return _AXIS_VECTORS[self].copy()


_AXIS_VECTORS = {
    MeasAxis.X: np.array([1.0, 0.0, 0.0]),
    MeasAxis.Y: np.array([0.0, 1.0, 0.0]),
    MeasAxis.Z: np.array([0.0, 0.0, 1.0]),
}

AXES = (MeasAxis.X, MeasAxis.Y, MeasAxis.Z)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``len(labels)`` qubits; immutable after construction."""

    labels: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise DuplicateLabelError(f"duplicate subsystem labels in {labels}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(labels):
            raise QuantumError(
                f"{amps.size} amplitudes for {len(labels)} subsystems; "
                f"expected {2 ** len(labels)}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_subsystems(self) -> int:
        return len(self.labels)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def normalized(self) -> bool:
        return abs(self.norm_squared() - 1.0) <= 1e-12

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelError(f"no subsystem {label!r} in {self.labels}") from None

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def renormalized(self) -> "StateVector":
        return StateVector(self.labels, self.amplitudes / np.sqrt(self.norm_squared()))

    def __repr__(self):
        return f"StateVector(labels={self.labels!r}, amplitudes={np.round(self.amplitudes, 6)!r})"


def _trusted(labels: tuple, amps: np.ndarray) -> StateVector:
    # internal results already have the right shape and own their buffer
    amps.setflags(write=False)
    out = object.__new__(StateVector)
    object.__setattr__(out, "labels", labels)
    object.__setattr__(out, "amplitudes", amps)
    return out


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    probability: float
    collapsed: StateVector | None


def basis_state(label: str, bit: int) -> StateVector:
    amps = np.zeros(2, dtype=complex)
    amps[bit] = 1.0
    return StateVector((label,), amps)


def qubit(label: str, amplitudes: Sequence[complex]) -> StateVector:
    return StateVector((label,), amplitudes).renormalized()


def plus_state(label: str) -> StateVector:
    """Equal superposition ``(|0> + |1>)/sqrt(2)``."""
    return StateVector((label,), [SQRT1_2, SQRT1_2])


def product(states: Iterable[StateVector]) -> StateVector:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def singlet(label1: str = "atom1", label2: str = "atom2") -> StateVector:
    """``(|Z-,Z+> - |Z+,Z->)/sqrt(2)``, written with the first atom's minus state first."""
    return StateVector((label1, label2), [0.0, -SQRT1_2, SQRT1_2, 0.0])


def tensor(a: StateVector, b: StateVector) -> StateVector:
    clash = set(a.labels) & set(b.labels)
    if clash:
        raise DuplicateLabelError(f"labels {sorted(clash)} appear in both factors")
    return StateVector(a.labels + b.labels, np.kron(a.amplitudes, b.amplitudes))


def spin_projectors(direction) -> tuple[np.ndarray, np.ndarray]:
    """``(I + n.sigma)/2`` and ``(I - n.sigma)/2`` for a unit 3-vector ``n``."""
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {n.shape}")
    length = np.linalg.norm(n)
    if abs(length - 1.0) > 1e-9:
        raise ValueError(f"axis vector {n} is not unit length (|n| = {length!r})")
    ns = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return (IDENTITY + ns) / 2, (IDENTITY - ns) / 2


_PROJECTOR_CACHE: dict[MeasAxis, tuple[np.ndarray, np.ndarray]] = {}
_CHECKED: set[int] = set()  # ids of cached, read-only projectors known to be valid


def axis_projectors(axis: MeasAxis | str) -> tuple[np.ndarray, np.ndarray]:
    axis = MeasAxis(axis)
    if axis not in _PROJECTOR_CACHE:
        pair = spin_projectors(_AXIS_VECTORS[axis])
        for p in pair:
            p.setflags(write=False)
            _CHECKED.add(id(p))
        _PROJECTOR_CACHE[axis] = pair
    return _PROJECTOR_CACHE[axis]


def apply_local(s: StateVector, target: str, op: np.ndarray) -> StateVector:
    """Apply a 2x2 operator to one subsystem (no renormalization)."""
    k = s.index(target)
    n = s.n_subsystems
    t = s.amplitudes.reshape(2**k, 2, 2 ** (n - k - 1))
    return StateVector(s.labels, np.matmul(op, t))


def _require_normalized(s: StateVector):
    if abs(s.norm_squared() - 1.0) > NORM_TOL:
        raise NormalizationError(f"state is not normalized (norm^2 = {s.norm_squared()!r})")


def project(s: StateVector, target: str, projector: np.ndarray) -> ProjectionResult:
    k = s.index(target)
    if id(projector) in _CHECKED:
        p = projector
    else:
        p = np.asarray(projector, dtype=complex)
        if p.shape != (2, 2) or np.max(np.abs(p @ p - p)) > IDEMPOTENT_TOL:
            raise ProjectorError("projector must be a 2x2 idempotent matrix")
    _require_normalized(s)
    n = s.n_subsystems
    t = s.amplitudes.reshape(2**k, 2, 2 ** (n - k - 1))
    pt = np.matmul(p, t)
    prob = float(np.vdot(t, pt).real)
    prob = min(max(prob, 0.0), 1.0)
    if prob <= PROB_FLOOR:
        return ProjectionResult(prob, None)
    return ProjectionResult(prob, _trusted(s.labels, pt.reshape(-1) / np.sqrt(prob)))


def project_onto(s: StateVector, mask: np.ndarray) -> ProjectionResult:
    """Project onto the span of the computational basis states selected by ``mask``."""
    _require_normalized(s)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != s.amplitudes.shape:
        raise QuantumError(f"mask has shape {mask.shape}, state has {s.amplitudes.shape}")
    kept = s.amplitudes * mask
    prob = min(float(np.vdot(kept, kept).real), 1.0)
    if prob <= PROB_FLOOR:
        return ProjectionResult(prob, None)
    return ProjectionResult(prob, _trusted(s.labels, kept / np.sqrt(prob)))


def measure(s: StateVector, target: str, axis: MeasAxis | str, rng) -> tuple[int, StateVector]:
    """Projective spin measurement; returns ``(+1 | -1, collapsed state)``.

    Exactly one uniform draw is taken from ``rng`` per call.
    """
    p_plus, p_minus = axis_projectors(axis)
    up = project(s, target, p_plus)
    u = rng.random()
    if u < up.probability:
        return 1, up.collapsed
    down = project(s, target, p_minus)
    return -1, down.collapsed


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.labels != b.labels:
        raise LabelMismatchError(f"label lists differ: {a.labels} vs {b.labels}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(overlap(a, b)) ** 2


def contract(s: StateVector, target: str, bra: Sequence[complex]) -> StateVector:
    """Partial inner product ``<bra|_target |s>``, renormalized.

    Only meaningful when ``s`` is a product across ``target``; callers use it
    to drop a subsystem that has just been projected onto ``bra``.
    """
    k = s.index(target)
    n = s.n_subsystems
    t = s.amplitudes.reshape(2**k, 2, 2 ** (n - k - 1))
    bra = np.asarray(bra, dtype=complex)
    if bra.shape != (2,):
        raise QuantumError("bra must have two components")
    rest = np.matmul(bra.conj(), t).reshape(-1)
    nsq = float(np.vdot(rest, rest).real)
    if nsq <= PROB_FLOOR:
        raise QuantumError(f"subsystem {target!r} has no support on the given bra")
    return _trusted(s.labels[:k] + s.labels[k + 1 :], rest / np.sqrt(nsq))


def reduced_density(s: StateVector, target: str) -> np.ndarray:
    """2x2 reduced density matrix of one subsystem."""
    k = s.index(target)
    n = s.n_subsystems
    t = np.moveaxis(s.amplitudes.reshape((2,) * n), k, 0).reshape(2, -1)
    return t @ t.conj().T


def basis_mask(labels: Sequence[str], predicate) -> np.ndarray:
    """Boolean mask over basis indices; ``predicate`` receives a dict label -> bit."""
    n = len(labels)
    mask = np.zeros(2**n, dtype=bool)
    for idx in range(2**n):
        bits = {lab: (idx >> (n - 1 - pos)) & 1 for pos, lab in enumerate(labels)}
        mask[idx] = bool(predicate(bits))
    return mask
