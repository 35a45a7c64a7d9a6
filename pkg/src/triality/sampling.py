"""Seeded random states for property checks."""

from __future__ import annotations

import numpy as np

from .core import PureState


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure_state(rng: np.random.Generator, n: int) -> PureState:
    return PureState.normalized(_complex_normal(rng, n))


def random_detectors(rng: np.random.Generator, n: int, m: int) -> list[PureState]:
    """``n`` independent unit detector vectors of dimension ``m``."""
    return [random_pure_state(rng, m) for _ in range(n)]


def random_density_batch(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """``count`` density matrices of size ``n``, shape ``(count, n, n)``.

    Ranks cycle through ``1..n`` so pure and rank-deficient states are always
    represented alongside full-rank ones.
    """
    out = np.empty((count, n, n), dtype=np.complex128)
    ranks = 1 + np.arange(count) % n
    for rank in range(1, n + 1):
        idx = np.flatnonzero(ranks == rank)
        g = _complex_normal(rng, (idx.size, n, rank))
        rho = g @ np.conj(np.swapaxes(g, -1, -2))
        rho /= np.einsum("kii->k", rho).real[:, None, None]
        out[idx] = rho
    # exact Hermitian symmetry; the product above is Hermitian only to round-off
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
