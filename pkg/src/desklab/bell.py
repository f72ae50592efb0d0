"""Two-qubit correlation statistics: exact correlators, sampled tables, CHSH."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import quantum as q
from .quantum import AXES, MeasAxis, StateVector

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent_with_local_model"
    VIOLATES = "violates_local_model"
    INCONCLUSIVE = "inconclusive"


def _direction(axis) -> np.ndarray:
    if isinstance(axis, (MeasAxis, str)):
        return MeasAxis(axis).vector
    return np.asarray(axis, dtype=float)


def _check_two_qubit(state: StateVector):
    if state.n_subsystems != 2:
        raise q.QuantumError(f"expected a two-qubit state, got {state.n_subsystems} subsystems")


def correlation_exact(state: StateVector, a, b) -> float:
    """``E(a, b) = P(same) - P(opposite)`` from the four joint projectors.

    ``a`` and ``b`` may be :class:`MeasAxis` values or unit 3-vectors.
    """
    _check_two_qubit(state)
    if abs(state.norm_squared() - 1.0) > q.NORM_TOL:
        raise q.NormalizationError("state is not normalized")
    pa = q.spin_projectors(_direction(a))
    pb = q.spin_projectors(_direction(b))
    m = state.amplitudes.reshape(2, 2)
    e = 0.0
    for (sa, p), (sb, r) in itertools.product(zip((1, -1), pa), zip((1, -1), pb)):
        # <psi| P (x) R |psi> with psi as a 2x2 coefficient matrix
        e += sa * sb * float(np.vdot(m, p @ m @ r.T).real)
    return e


@dataclass
class CorrelationTable:
    """Counts of same/opposite outcomes per (axis of qubit 1, axis of qubit 2)."""

    axes1: tuple = AXES
    axes2: tuple = AXES
    trials: np.ndarray = None
    same: np.ndarray = None

    def __post_init__(self):
        shape = (len(self.axes1), len(self.axes2))
        if self.trials is None:
            self.trials = np.zeros(shape, dtype=np.int64)
        if self.same is None:
            self.same = np.zeros(shape, dtype=np.int64)

    def record(self, i: int, j: int, product: int):
        self.trials[i, j] += 1
        if product > 0:
            self.same[i, j] += 1

    def merge(self, other: "CorrelationTable") -> "CorrelationTable":
        return CorrelationTable(self.axes1, self.axes2, self.trials + other.trials, self.same + other.same)

    @property
    def total(self) -> int:
        return int(self.trials.sum())

    def estimate(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            e = (2 * self.same - self.trials) / self.trials
        return np.where(self.trials > 0, e, np.nan)

    def stderr(self) -> np.ndarray:
        e = self.estimate()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.sqrt(np.clip(1 - e**2, 0, None) / self.trials)

    def cells(self):
        """Yield ``(axis1, axis2, trials, E, stderr)`` in row-major order."""
        e, se = self.estimate(), self.stderr()
        for i, a in enumerate(self.axes1):
            for j, b in enumerate(self.axes2):
                yield _axis_name(a), _axis_name(b), int(self.trials[i, j]), float(e[i, j]), float(se[i, j])


def _axis_name(a) -> str:
    if isinstance(a, (MeasAxis, str)):
        return MeasAxis(a).value
    return "(" + ",".join(f"{c:.6g}" for c in np.asarray(a, dtype=float)) + ")"


def sample_table(state: StateVector, trials: int, rng, axes1=AXES, axes2=AXES) -> CorrelationTable:
    """Measure ``trials`` fresh copies of ``state`` along uniformly drawn axis pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_two_qubit(state)
    table = CorrelationTable(tuple(axes1), tuple(axes2))
    l1, l2 = state.labels
    proj1 = [q.spin_projectors(_direction(a)) for a in axes1]
    proj2 = [q.spin_projectors(_direction(b)) for b in axes2]
    for _ in range(trials):
        i = int(rng.integers(len(axes1)))
        j = int(rng.integers(len(axes2)))
        table.record(i, j, _measure_pair(state, l1, l2, proj1[i], proj2[j], rng))
    return table


def _measure_pair(state, l1, l2, p1, p2, rng) -> int:
    up = q.project(state, l1, p1[0])
    if rng.random() < up.probability:
        s1, st = 1, up.collapsed
    else:
        s1, st = -1, q.project(state, l1, p1[1]).collapsed
    up2 = q.project(st, l2, p2[0])
    s2 = 1 if rng.random() < up2.probability else -1
    return s1 * s2


@dataclass(frozen=True)
class ChshResult:
    settings: tuple
    value: float
    classical_bound: float = CLASSICAL_BOUND
    quantum_bound: float = TSIRELSON_BOUND

    @property
    def violates_classical(self) -> bool:
        return abs(self.value) > self.classical_bound + 1e-9


def chsh(state: StateVector, a, a_prime, b, b_prime) -> ChshResult:
    """``S = E(a,b) - E(a,b') + E(a',b) + E(a',b')``."""
    dirs = [_direction(v) for v in (a, a_prime, b, b_prime)]
    for d in dirs:
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError(f"axis {d} is not a unit 3-vector")
    a, a_prime, b, b_prime = dirs
    s = (
        correlation_exact(state, a, b)
        - correlation_exact(state, a, b_prime)
        + correlation_exact(state, a_prime, b)
        + correlation_exact(state, a_prime, b_prime)
    )
    return ChshResult(tuple(tuple(d) for d in dirs), s)


OPTIMAL_SINGLET_SETTINGS = (
    np.array([0.0, 0.0, 1.0]),
    np.array([1.0, 0.0, 0.0]),
    -np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0),
    np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0),
)


def table_chsh(table: CorrelationTable):
    """Largest CHSH combination over 2x2 sub-blocks of the table.

    Returns ``(|S|, stderr, rows, cols)`` where the sign pattern places the
    minus on each of the four cells in turn and the overall sign is free.
    """
    e, se = table.estimate(), table.stderr()
    best = (0.0, 0.0, None, None)
    n1, n2 = e.shape
    for i, ip in itertools.permutations(range(n1), 2):
        for j, jp in itertools.permutations(range(n2), 2):
            cells = [(i, j), (i, jp), (ip, j), (ip, jp)]
            if any(table.trials[c] == 0 for c in cells):
                continue
            for minus in range(4):
                signs = [1, 1, 1, 1]
                signs[minus] = -1
                s = sum(sg * e[c] for sg, c in zip(signs, cells))
                var = sum(se[c] ** 2 for c in cells)
                if abs(s) > best[0]:
                    best = (abs(s), float(np.sqrt(var)), (i, ip), (j, jp))
    return best


_MIN_CELL_TRIALS = 100


def nonlocality_verdict(table: CorrelationTable, n_sigma: float = 3.0) -> Verdict:
    """Compare the table's best CHSH combination with the local bound 2.

    Violation requires ``|S| - 2`` to exceed ``n_sigma`` standard errors;
    tables with any cell below a minimum trial count are inconclusive.
    """
    if table.trials.min() < _MIN_CELL_TRIALS:
        return Verdict.INCONCLUSIVE
    s, err, _, _ = table_chsh(table)
    if s - CLASSICAL_BOUND > n_sigma * max(err, 1e-12):
        return Verdict.VIOLATES
    return Verdict.CONSISTENT
