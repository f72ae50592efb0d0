"""Independent reference computations used by several test files.

Nothing here imports desklab.quantum; amplitudes are summed by walking
the photon's paths and every atom-box configuration by hand.
"""
import itertools

import numpy as np

R2 = 1 / np.sqrt(2)


def hardy_dark_amplitudes(n):
    """Unnormalized dark-port amplitude for each configuration of n atoms.

    Box 0 is intersecting.  Path 1 passes every atom's intersecting box, so
    it is blocked when any atom sits in box 0; the dark port weights path p
    by (+1, -1)[p] / sqrt2.
    """
    amp = {}
    for cfg in itertools.product((0, 1), repeat=n):
        a = 0.0
        for p in (0, 1):
            if p == 1 and 0 in cfg:
                continue
            a += R2 * 2 ** (-n / 2) * (1, -1)[p] * R2
        amp[cfg] = a
    return amp


def hardy_postselected_vector(n):
    amp = hardy_dark_amplitudes(n)
    v = np.array([amp[c] for c in itertools.product((0, 1), repeat=n)])
    return v / np.linalg.norm(v)


def epr_port_amplitudes():
    """(dark, bright) amplitudes per (box1, box2); atom i sits on path i."""
    dark, bright = {}, {}
    for b1, b2 in itertools.product((0, 1), repeat=2):
        d = br = 0.0
        for p in (0, 1):
            if (p == 0 and b1 == 0) or (p == 1 and b2 == 0):
                continue
            a = R2**3
            d += a * (1, -1)[p] * R2
            br += a * R2
        dark[(b1, b2)], bright[(b1, b2)] = d, br
    return dark, bright


def exponential_cv(n_balls, samples=200_000, seed=0):
    """Mean coefficient of variation of n iid exponential energies.

    In two dimensions equilibrium per-ball kinetic energies are uniform on
    the energy simplex, which gives the same coefficient of variation as
    iid exponentials.
    """
    rng = np.random.default_rng(seed)
    e = rng.exponential(size=(samples, n_balls))
    return float((e.std(axis=1) / e.mean(axis=1)).mean())
