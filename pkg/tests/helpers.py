from __future__ import annotations

import random
from fractions import Fraction

from nashtree.gametree import PayoffVector
from nashtree.ups import FLAG_KINDS, PayoffGrid, _flag_dims, saturate, ups_from_flags


def pv(a, b) -> PayoffVector:
    return PayoffVector(Fraction(a), Fraction(b))


def random_grid(rng: random.Random, max_side: int = 6, value_range: int = 12) -> PayoffGrid:
    n1 = rng.randint(1, max_side)
    n2 = rng.randint(1, max_side)
    u1 = tuple(Fraction(v) for v in sorted(rng.sample(range(value_range), n1)))
    u2 = tuple(Fraction(v) for v in sorted(rng.sample(range(value_range), n2)))
    return PayoffGrid(u1, u2)


def random_flags(rng: random.Random, grid: PayoffGrid, density: float = 0.18):
    flags = []
    for kind in FLAG_KINDS:
        rows, cols = _flag_dims(grid, kind)
        for i in range(rows):
            for j in range(cols):
                if rng.random() < density:
                    flags.append((kind, i, j))
    return flags


def random_saturated_ups(rng: random.Random, grid: PayoffGrid, density: float = 0.18):
    return saturate(ups_from_flags(grid, random_flags(rng, grid, density)))
