"""Per-trial seed derivation.

Trial seeds are a pure function of ``(master_seed, trial_index)`` so that
results do not depend on trial order or on how trials are split across
workers.  A seed maps to a PCG64 stream by writing a splitmix64 expansion
of the seed straight into the generator state; this is much cheaper than
going through ``SeedSequence`` and lets hot loops reuse one generator.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, index: int) -> int:
    return splitmix64(splitmix64(master_seed & _MASK64) ^ (index & _MASK64))


def pcg_state(seed: int) -> dict:
    a = splitmix64(seed & _MASK64)
    b = splitmix64(a)
    c = splitmix64(b)
    d = splitmix64(c)
    return {
        "bit_generator": "PCG64",
        "state": {"state": (a << 64) | b, "inc": ((c << 64) | d) | 1},
        "has_uint32": 0,
        "uinteger": 0,
    }


def reseed(rng: np.random.Generator, seed: int) -> np.random.Generator:
    """Reset a PCG64-backed generator in place to the stream of ``seed``."""
    rng.bit_generator.state = pcg_state(seed)
    return rng


def make_rng(seed: int) -> np.random.Generator:
    return reseed(np.random.Generator(np.random.PCG64(0)), seed)
