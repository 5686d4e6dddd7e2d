"""Seeded generator fixtures shared by the acceptance and property tests."""

import numpy as np

from skewflow.corpus import GeneratorSpec, random_block_cocycle

CONJUGATIONS = ("none", "similarity", "orthogonal")


def _rng(tag, seed):
    return np.random.default_rng([tag, seed])


def stable_spec(seed, dim=None, conjugation=None):
    """All blocks stable; returns (spec, delta, lo_min) with rates in [lo, -delta]."""
    rng = _rng(1, seed)
    dim = dim or int(rng.integers(1, 4))
    blocks = []
    for _ in range(dim):
        hi = -rng.uniform(0.3, 1.5)
        lo = hi - rng.uniform(0.2, 1.5)
        blocks.append((1, (lo, hi), "stable"))
    conj = conjugation or CONJUGATIONS[seed % 3]
    spec = GeneratorSpec(tuple(blocks), seed=seed, conjugation=conj, length=64)
    delta = min(-b[1][1] for b in blocks)
    lo_min = min(b[1][0] for b in blocks)
    return spec, delta, lo_min


def unstable_spec(seed, dim=None, conjugation=None):
    """All blocks unstable; returns (spec, delta, hi_max) with rates in [delta, hi]."""
    rng = _rng(2, seed)
    dim = dim or int(rng.integers(1, 4))
    blocks = []
    for _ in range(dim):
        lo = rng.uniform(0.3, 1.5)
        hi = lo + rng.uniform(0.2, 1.5)
        blocks.append((1, (lo, hi), "unstable"))
    conj = conjugation or CONJUGATIONS[seed % 3]
    spec = GeneratorSpec(tuple(blocks), seed=seed, conjugation=conj, length=64)
    delta = min(b[1][0] for b in blocks)
    hi_max = max(b[1][1] for b in blocks)
    return spec, delta, hi_max


def trichotomic_spec(seed, conjugation="orthogonal"):
    """Stable, unstable and central blocks with well separated rates."""
    rng = _rng(3, seed)
    s_hi = -rng.uniform(1.0, 1.3)
    u_lo = rng.uniform(1.0, 1.3)
    c = rng.uniform(0.0, 0.15)
    blocks = ((1, (s_hi - rng.uniform(0.2, 0.7), s_hi), "stable"),
              (1, (u_lo, u_lo + rng.uniform(0.2, 0.7)), "unstable"),
              (1, (-c, c), "central"))
    return GeneratorSpec(blocks, seed=seed, conjugation=conjugation, length=64)


def build(spec):
    return random_block_cocycle(spec)
