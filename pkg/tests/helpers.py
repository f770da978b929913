"""Shared scenario generators for the test suite."""
from __future__ import annotations

import numpy as np

from liyau import GaussianComponent, InitialData


def random_scenario(rng: np.random.Generator, n: int | None = None):
    """Gaussian mixture with optional offset, plus an evaluation point and time.

    Ranges: sigma in [0.2, 2], t in [0.1, 2], |x_i| <= 3, centers within 1.5.
    """
    n = int(rng.integers(1, 4)) if n is None else n
    comps = tuple(
        GaussianComponent(
            float(rng.uniform(0.2, 2.0)),
            tuple(float(v) for v in rng.uniform(-1.5, 1.5, size=n)),
            float(rng.uniform(0.2, 2.0)),
        )
        for _ in range(int(rng.integers(1, 4)))
    )
    offset = float(rng.uniform(0.0, 0.5)) if rng.random() < 0.4 else 0.0
    data = InitialData(n, offset, comps)
    x = tuple(float(v) for v in rng.uniform(-3.0, 3.0, size=n))
    t = float(rng.uniform(0.1, 2.0))
    return data, x, t


def scenario_set(count: int = 50, seed: int = 20240601):
    rng = np.random.default_rng(seed)
    # cycle dimensions so every n in {1, 2, 3} is covered evenly
    return [random_scenario(rng, n=1 + i % 3) for i in range(count)]


def point_mass(n: int, center=None, weight: float = 1.0) -> InitialData:
    center = (0.0,) * n if center is None else tuple(center)
    return InitialData(n, 0.0, (GaussianComponent(weight, center, 0.0),))


def gaussian(n: int, sigma: float = 1.0, center=None, weight: float = 1.0) -> InitialData:
    center = (0.0,) * n if center is None else tuple(center)
    return InitialData(n, 0.0, (GaussianComponent(weight, center, sigma),))


def constant(n: int, value: float = 1.0) -> InitialData:
    return InitialData(n, value)
