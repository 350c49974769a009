"""Deterministic pseudorandom source families for verification suites.

All randomness in the package flows through ``Lcg64``, a 64-bit linear
congruential generator with Knuth's MMIX constants, so any implementation
can reproduce the seeded suites bit for bit:

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64

Uniform doubles take the top 53 bits of the state.
"""

from __future__ import annotations

import numpy as np

from .grid import GridDomain, ScalarField

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = (int(seed) ^ 0x9E3779B97F4A7C15) & _MASK
        self._next()  # decorrelate small seeds

    def _next(self) -> int:
        self.state = (_MULT * self.state + _INC) & _MASK
        return self.state

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self._next() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.uniform() * n)

    def uniform_vector(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def spawn(self) -> "Lcg64":
        """Independent child stream (deterministic)."""
        return Lcg64(self._next())


def indicator_blob(domain: GridDomain, rng: Lcg64, mass_fraction=None) -> ScalarField:
    """0/1 indicator of the ``count`` cells nearest a random center cell.

    mass_fraction in (0, 1] fixes count = round(fraction * n_cells); when
    omitted it is drawn from [0.05, 0.95).
    """
    n = domain.n_cells
    center = rng.below(n)
    if mass_fraction is None:
        mass_fraction = 0.05 + 0.9 * rng.uniform()
    count = max(1, min(n, int(round(mass_fraction * n))))
    centers = domain.cell_centers()
    d2 = ((centers - centers[center]) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(n), d2))
    values = np.zeros(n)
    values[order[:count]] = 1.0
    return ScalarField(domain, values)


def clipped_bump(domain: GridDomain, rng: Lcg64) -> ScalarField:
    """Gaussian bump at a random cell, clipped into [0, 1]."""
    centers = domain.cell_centers()
    span = centers.max(axis=0) - centers.min(axis=0)
    c = centers[rng.below(domain.n_cells)]
    width = (0.08 + 0.35 * rng.uniform()) * float(span.max())
    amp = 0.6 + 1.2 * rng.uniform()
    d2 = ((centers - c) ** 2).sum(axis=1)
    values = np.clip(amp * np.exp(-d2 / (2.0 * width ** 2)), 0.0, 1.0)
    return ScalarField(domain, values)


def nonnegative_field(domain: GridDomain, rng: Lcg64) -> ScalarField:
    """Sum of a few clipped bumps: generic nonnegative source in [0, 1]."""
    values = np.zeros(domain.n_cells)
    for _ in range(1 + rng.below(3)):
        values += clipped_bump(domain, rng).values
    return ScalarField(domain, np.clip(values, 0.0, 1.0))


def sign_changing_field(domain: GridDomain, rng: Lcg64) -> ScalarField:
    """Difference of two bumps, clipped into [-1, 1], with both signs present."""
    for _ in range(64):
        plus = clipped_bump(domain, rng).values
        minus = clipped_bump(domain, rng).values
        values = np.clip(plus - minus, -1.0, 1.0)
        if values.max() > 1e-6 and values.min() < -1e-6:
            return ScalarField(domain, values)
    raise RuntimeError("could not draw a sign-changing field")  # pragma: no cover
