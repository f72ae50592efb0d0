"""Run N seeded trials of a configured experiment and summarize them.

Trial ``i`` uses the seed ``trial_seed(master_seed, i)`` and nothing else,
so a trial can be replayed on its own (:func:`replay`) and results do not
depend on how trials are spread over worker processes.  Workers return
per-trial results for contiguous index ranges; the summary is a fold over
those results in ascending index order.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bell
from . import experiments as ex
from . import quantum as q
from .billiard import Recorder, Table, arrow_run, equilibrium_entropy, loschmidt_echo, seeded_break
from .config import ExperimentConfig, from_mapping
from .seeding import make_rng, reseed, trial_seed

ECHO_SEPARATION = 10.0  # perturbed echo must exceed this multiple of the unperturbed one
RECOVERY_FRACTION = 0.8  # reversed entropy above this share of equilibrium counts as not recovered


@dataclass
class RunSummary:
    config: dict
    counts: dict
    frequencies: dict
    stderr: dict
    derived: dict = field(default_factory=dict)
    headline: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    row_columns: tuple = ()
    duration_s: float = 0.0

    @property
    def experiment(self) -> str:
        return self.config["experiment"]

    @property
    def trials(self) -> int:
        return self.config["trials"]


def proportion(k: int, n: int) -> tuple[float, float]:
    """Frequency and binomial standard error ``sqrt(p(1-p)/n)``."""
    if n == 0:
        return math.nan, math.nan
    p = k / n
    return p, math.sqrt(p * (1 - p) / n)


def _tally(names, codes) -> tuple[dict, dict, dict]:
    n = len(codes)
    counts = {name: 0 for name in names}
    for c in codes:
        counts[names[c]] += 1
    freq, se = {}, {}
    for name, k in counts.items():
        freq[name], se[name] = proportion(k, n)
    return counts, freq, se


# ------------------------------------------------------------------ trials
# Each trial function takes (params, seed, rng) with rng already reseeded to
# seed, and returns a small picklable tuple.

_EPR_CLASSES = tuple(c.value for c in ex.Classification)
_EPR_CODE = {c: i for i, c in enumerate(ex.Classification)}
_SINGLET = q.singlet(ex.ATOM1, ex.ATOM2)


def _trial_inverse_epr(params, seed, rng):
    o = ex.sample_inverse_epr(rng)
    fid = q.fidelity(o.atom_state, _SINGLET) if o.classification is ex.Classification.DISRUPTED_ENTANGLED else None
    return _EPR_CODE[o.classification], fid, o.path_blocked


def _trial_mixed(params, seed, rng):
    o = ex.sample_mixed_measurement(rng)
    if o.axes is None:
        return _EPR_CODE[o.epr.classification], None, None, None
    axes = tuple(q.AXES.index(a) for a in o.axes)
    return _EPR_CODE[o.epr.classification], axes, o.outcomes, o.z_intersecting


_HARDY_CLASSES = ("scattered", "bright", "dark")


def _trial_hardy(params, seed, rng):
    n = params["n_atoms"]
    o = ex.sample_hardy_chain(n, rng, params["measure_until_found"])
    code = 0 if o.scattered else (2 if o.dark_detected else 1)
    if code != 2:
        return code, None, 0, None
    found = o.found_index
    measured = sum(r is not ex.AtomResult.UNMEASURED for r in o.atom_results)
    vis = None
    if o.residual_state is not None and o.residual_state.n_subsystems:
        vis = min(ex.residual_visibility(o.residual_state).values())
    return code, found, measured, vis


def _bell_setup(params):
    axes1 = [bell._direction(a) for a in params["axes1"]]
    axes2 = [bell._direction(b) for b in params["axes2"]]
    return [q.spin_projectors(a) for a in axes1], [q.spin_projectors(b) for b in axes2]


_BELL_CACHE: dict = {}


def _trial_bell(params, seed, rng):
    key = repr((params["axes1"], params["axes2"]))
    if key not in _BELL_CACHE:
        _BELL_CACHE[key] = _bell_setup(params)
    proj1, proj2 = _BELL_CACHE[key]
    attempts = 0
    while True:
        attempts += 1
        o = ex.sample_inverse_epr(rng)
        if o.classification is ex.Classification.DISRUPTED_ENTANGLED:
            break
    i = int(rng.integers(len(proj1)))
    j = int(rng.integers(len(proj2)))
    prod = bell._measure_pair(o.atom_state, ex.ATOM1, ex.ATOM2, proj1[i], proj2[j], rng)
    return i, j, prod, attempts


def _table(params):
    w, h = params["table"]
    return Table(0.0, w, 0.0, h)


def _world(params, seed):
    table = _table(params)
    kw = {}
    if params["cue_x"] is not None:
        kw["cue_x"] = params["cue_x"]
    if params["apex_x"] is not None:
        kw["apex_x"] = params["apex_x"]
    return seeded_break(
        seed,
        table=table,
        cue_offset=params["cue_offset"],
        offset_jitter=params["offset_jitter"],
        n_target_balls=params["n_target_balls"],
        speed=params["speed"],
        radius=params["radius"],
        gap=params["gap"],
        **kw,
    )


def _trial_break(params, seed, rng):
    world = _world(params, seed)
    _check_ball(params, world)
    rec = Recorder(params["sample_interval"], params["grid"])
    return arrow_run(
        world,
        params["duration"],
        angle=params["perturbation_angle"],
        ball=params["perturbed_ball"],
        fraction=params["perturb_fraction"],
        grid=params["grid"],
        recorder=rec,
    )


def _trial_echo(params, seed, rng):
    world = _world(params, seed)
    _check_ball(params, world)
    k = params["collisions"]
    plain = loschmidt_echo(world, k)
    kicked = loschmidt_echo(world, k, angle=params["perturbation_angle"], ball=params["perturbed_ball"])
    return plain.echo_error, kicked.echo_error, plain.duration


def _check_ball(params, world):
    if params["perturbed_ball"] >= world.n_balls:
        raise ValueError(f"perturbed_ball {params['perturbed_ball']} out of range for {world.n_balls} balls")


_TRIALS = {
    "inverse_epr": _trial_inverse_epr,
    "mixed_measurement": _trial_mixed,
    "hardy_chain": _trial_hardy,
    "bell_table": _trial_bell,
    "billiard_break": _trial_break,
    "billiard_echo": _trial_echo,
}

_RNG = None


def _trial(config: ExperimentConfig, index: int):
    global _RNG
    if _RNG is None:
        _RNG = make_rng(0)
    seed = trial_seed(config.master_seed, index)
    return _TRIALS[config.experiment](config.params, seed, reseed(_RNG, seed))


def _run_chunk(doc: dict, start: int, stop: int) -> list:
    config = from_mapping(doc)
    return [_trial(config, i) for i in range(start, stop)]


def replay(config: ExperimentConfig, index: int) -> ex.TrialRecord:
    """Re-run one trial from its derived seed; payload equals the runner's result."""
    if not 0 <= index < config.trials:
        raise IndexError(f"trial index {index} out of range for {config.trials} trials")
    seed = trial_seed(config.master_seed, index)
    payload = _TRIALS[config.experiment](config.params, seed, make_rng(seed))
    return ex.TrialRecord(config.experiment, seed, payload)


# -------------------------------------------------------------- summaries


def _stats(values) -> dict:
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if not len(v):
        return {"n": 0, "mean": math.nan, "stderr": math.nan, "min": math.nan, "max": math.nan}
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return {"n": int(len(v)), "mean": float(v.mean()), "stderr": se, "min": float(v.min()), "max": float(v.max())}


def _sum_inverse_epr(config, results):
    counts, freq, se = _tally(_EPR_CLASSES, [r[0] for r in results])
    fids = [r[1] for r in results if r[1] is not None]
    unscattered = [r[2] for r in results if r[2] is not None]
    n = len(results)
    blocked = sum(1 for b in unscattered if b)
    branch = {
        "scattered": n - len(unscattered),
        "unscattered_path_blocked": blocked,
        "unscattered_path_clear": len(unscattered) - blocked,
    }
    derived = {
        "singlet_fidelity_disrupted": _stats(fids),
        "max_singlet_fidelity_defect": max((abs(1 - f) for f in fids), default=math.nan),
        "branch_counts": branch,
        "branch_frequencies": {k: proportion(v, n)[0] for k, v in branch.items()},
        "branch_stderr": {k: proportion(v, n)[1] for k, v in branch.items()},
    }
    rows = [(name, counts[name], freq[name], se[name]) for name in _EPR_CLASSES]
    return RunSummary(config.to_dict(), counts, freq, se, derived, {}, rows, ("classification", "count", "frequency", "stderr"))


def _sum_mixed(config, results):
    counts, freq, se = _tally(_EPR_CLASSES, [r[0] for r in results])
    measured = [r for r in results if r[1] is not None]
    z = q.AXES.index(q.MeasAxis.Z)
    mixed = [r for r in measured if (r[1][0] == z) != (r[1][1] == z)]
    same_axis = [r for r in measured if r[1][0] == r[1][1]]
    anti = sum(1 for r in same_axis if r[2][0] * r[2][1] < 0)
    z_hits = [zi for r in mixed for zi in r[3] if zi is not None]
    names = [a.value for a in q.AXES]
    pair_counts = {f"{names[a]}{names[b]}": 0 for a in range(3) for b in range(3)}
    for r in measured:
        pair_counts[f"{names[r[1][0]]}{names[r[1][1]]}"] += 1
    f_mixed, se_mixed = proportion(len(mixed), len(measured))
    f_anti, se_anti = proportion(anti, len(same_axis))
    f_hit, se_hit = proportion(sum(z_hits), len(z_hits))
    derived = {
        "disrupted_trials": len(measured),
        "mixed_pairs": len(mixed),
        "mixed_fraction": f_mixed,
        "mixed_fraction_stderr": se_mixed,
        "same_axis_anticorrelated_fraction": f_anti,
        "same_axis_anticorrelated_stderr": se_anti,
        "mixed_z_atom_intersecting_fraction": f_hit,
        "mixed_z_atom_intersecting_stderr": se_hit,
        "axis_pair_counts": pair_counts,
    }
    rows = [(name, counts[name], freq[name], se[name]) for name in _EPR_CLASSES]
    return RunSummary(config.to_dict(), counts, freq, se, derived, {}, rows, ("classification", "count", "frequency", "stderr"))


def _sum_hardy(config, results):
    n = config.params["n_atoms"]
    counts, freq, se = _tally(_HARDY_CLASSES, [r[0] for r in results])
    dark = [r for r in results if r[0] == 2]
    first = {str(i): 0 for i in range(n)}
    first["none"] = 0
    for r in dark:
        first["none" if r[1] is None else str(r[1])] += 1
    found = len(dark) - first["none"]
    f_first, se_first = proportion(first["0"], len(dark))
    f_found, se_found = proportion(found, len(dark))
    vis = [r[3] for r in dark if r[3] is not None]
    derived = {
        "exact_dark_probability": ex.hardy_dark_probability(n),
        "dark_trials": len(dark),
        "first_intersecting_index_counts": first,
        "first_atom_intersecting_given_dark": f_first,
        "first_atom_intersecting_given_dark_stderr": se_first,
        "dark_with_intersecting_fraction": f_found,
        "dark_with_intersecting_stderr": se_found,
        "residual_visibility_min": min(vis, default=math.nan),
        "residual_visibility_checked": len(vis),
    }
    rows = [(name, counts[name], freq[name], se[name]) for name in _HARDY_CLASSES]
    return RunSummary(config.to_dict(), counts, freq, se, derived, {}, rows, ("classification", "count", "frequency", "stderr"))


def _axis_label(a):
    return bell._axis_name(a if isinstance(a, str) else np.asarray(a, dtype=float))


def _sum_bell(config, results):
    p = config.params
    a1 = tuple(a if isinstance(a, str) else tuple(a) for a in p["axes1"])
    a2 = tuple(b if isinstance(b, str) else tuple(b) for b in p["axes2"])
    table = bell.CorrelationTable(a1, a2)
    attempts = 0
    for i, j, prod, att in results:
        table.record(i, j, prod)
        attempts += att
    names = [f"{_axis_label(x)},{_axis_label(y)}" for x in a1 for y in a2]
    codes = [i * len(a2) + j for i, j, _, _ in results]
    counts, freq, se = _tally(names, codes)
    s, s_err, _, _ = bell.table_chsh(table)
    opt = bell.chsh(q.singlet(ex.ATOM1, ex.ATOM2), *bell.OPTIMAL_SINGLET_SETTINGS)
    rows = [(c[0], c[1], c[2], c[3], c[4]) for c in table.cells()]
    derived = {
        "correlation_table": [dict(zip(("axis1", "axis2", "trials", "E", "stderr"), r)) for r in rows],
        "table_chsh": float(s),
        "table_chsh_stderr": float(s_err),
        "verdict": bell.nonlocality_verdict(table).value,
        "analytic_chsh_optimal": opt.value,
        "herald_attempts": attempts,
        "herald_efficiency": len(results) / attempts,
    }
    return RunSummary(config.to_dict(), counts, freq, se, derived, {}, rows, ("axis1", "axis2", "trials", "E", "stderr"))


def _sum_break(config, results):
    p = config.params
    world = _world(p, trial_seed(config.master_seed, 0))
    s_eq, s_eq_sd = equilibrium_entropy(world, p["grid"])
    threshold = RECOVERY_FRACTION * s_eq
    failed = [1 if r.perturbed_reversed_entropy > threshold else 0 for r in results]
    names = ("perturbed_reversal_recovered", "perturbed_reversal_unrecovered")
    counts, freq, se = _tally(names, failed)
    derived = {"equilibrium_entropy": s_eq, "equilibrium_entropy_sd": s_eq_sd, "recovery_threshold": threshold}
    for name in (
        "initial_entropy",
        "forward_entropy",
        "perturbed_forward_entropy",
        "reversed_entropy",
        "perturbed_reversed_entropy",
        "reversed_distance",
        "perturbed_reversed_distance",
        "forward_collisions",
    ):
        derived[name] = _stats([getattr(r, name) for r in results])
    times = results[0].curve_times
    ent = np.mean([r.curve_entropy for r in results], axis=0) if times else []
    spread = np.mean([r.curve_spread for r in results], axis=0) if times else []
    rows = [(t, float(e), float(s)) for t, e, s in zip(times, ent, spread)]
    derived["entropy_curve"] = [dict(zip(("time", "entropy", "energy_share_spread"), r)) for r in rows]
    return RunSummary(config.to_dict(), counts, freq, se, derived, {}, rows, ("time", "entropy", "energy_share_spread"))


def _sum_echo(config, results):
    k = config.params["collisions"]
    sep = [0 if kicked > ECHO_SEPARATION * plain else 1 for plain, kicked, _ in results]
    counts, freq, se = _tally(("separated", "not_separated"), sep)
    rows = [
        (i, trial_seed(config.master_seed, i), k, plain, kicked)
        for i, (plain, kicked, _) in enumerate(results)
    ]
    headline = {
        "K": k,
        "echo_error": max(r[0] for r in results),
        "perturbed_echo_error": min(r[1] for r in results),
    }
    derived = {
        "echo_error": _stats([r[0] for r in results]),
        "perturbed_echo_error": _stats([r[1] for r in results]),
        "forward_duration": _stats([r[2] for r in results]),
    }
    return RunSummary(
        config.to_dict(), counts, freq, se, derived, headline, rows,
        ("trial", "seed", "K", "echo_error", "perturbed_echo_error"),
    )


_SUMMARIES = {
    "inverse_epr": _sum_inverse_epr,
    "mixed_measurement": _sum_mixed,
    "hardy_chain": _sum_hardy,
    "bell_table": _sum_bell,
    "billiard_break": _sum_break,
    "billiard_echo": _sum_echo,
}


def _chunks(trials: int, workers: int):
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def collect(config: ExperimentConfig, workers: int = 1) -> list:
    """Per-trial results in index order."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or config.trials == 1:
        return [_trial(config, i) for i in range(config.trials)]
    doc = config.to_dict()
    chunks = _chunks(config.trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [doc] * len(chunks), *zip(*chunks))
        return [r for part in parts for r in part]


def summarize(config: ExperimentConfig, results: list) -> RunSummary:
    return _SUMMARIES[config.experiment](config, results)


def run(config: ExperimentConfig, workers: int = 1) -> RunSummary:
    start = time.perf_counter()
    summary = summarize(config, collect(config, workers))
    summary.duration_s = time.perf_counter() - start
    return summary


def summary_dict(summary: RunSummary) -> dict:
    return {
        "experiment": summary.experiment,
        "config": summary.config,
        **summary.headline,
        "counts": summary.counts,
        "frequencies": summary.frequencies,
        "stderr": summary.stderr,
        "derived": summary.derived,
    }
