import math
import random

import numpy as np
import pytest

from galois_solve import FunctionOnSpace, build_moreau, build_table
from galois_solve.scalar import Affine, SignedPower

SQRT6 = math.sqrt(6.0)
SQRT3 = math.sqrt(3.0)


@pytest.fixture
def demo_kernel():
    """The 2x3 kernel with one signed-square column used throughout:
    rows x1, x2; slices (-l, 4-3l, 2-l) and (-sgn(l)l^2, 3-l, -l)."""
    return build_table([
        [Affine(0, 1), Affine(4, 3), Affine(2, 1)],
        [SignedPower(0, 2), Affine(3, 1), Affine(0, 1)],
    ])


@pytest.fixture
def demo_g(demo_kernel):
    return FunctionOnSpace.from_mapping(demo_kernel.x_labels, {"x1": 8, "x2": 6})


@pytest.fixture
def demo_g_bad(demo_kernel):
    return FunctionOnSpace.from_mapping(demo_kernel.x_labels, {"x1": 3, "x2": -3})


def random_moreau_kernel(rng: random.Random, max_side: int = 6):
    """Random integer coupling table in {-3..3, -inf} with every row and
    column repaired to keep a finite entry."""
    nx = rng.randint(1, max_side)
    ny = rng.randint(1, max_side)
    vals = [-math.inf] + list(range(-3, 4))
    bbar = [[rng.choice(vals) for _ in range(ny)] for _ in range(nx)]
    for i in range(nx):
        if all(v == -math.inf for v in bbar[i]):
            bbar[i][rng.randrange(ny)] = rng.randint(-3, 3)
    for j in range(ny):
        if all(bbar[i][j] == -math.inf for i in range(nx)):
            bbar[rng.randrange(nx)][j] = rng.randint(-3, 3)
    return build_moreau(bbar)


def random_function(rng: random.Random, labels, allow_inf=True):
    choices = list(range(-3, 4))
    if allow_inf:
        choices += [math.inf, -math.inf]
    return FunctionOnSpace(labels, np.array([
        float(rng.choice(choices)) for _ in labels
    ]))
