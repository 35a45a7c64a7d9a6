"""Visibility, predictability and entanglement of an n-path quanton.

The measure functions accept a :class:`~triality.core.DensityMatrix` or any
array of shape ``(..., n, n)``; stacked input returns an array of values, one
per matrix.  The general n-path sums are the single code path; the familiar
qubit and qutrit closed forms only appear in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DetectorGram, DimensionError, PureState, STATE_TOL, reduced_density


def _stack(rho) -> np.ndarray:
    m = np.asarray(getattr(rho, "matrix", rho))
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {m.shape}")
    if m.shape[-1] < 2:
        raise DimensionError("measures need at least two paths")
    return m


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def visibility2(rho):
    """Squared visibility ``n/(n-1) * sum_{i != j} |rho_ij|^2``."""
    m = _stack(rho)
    n = m.shape[-1]
    off = np.abs(m) ** 2
    coh = off.sum(axis=(-2, -1)) - np.einsum("...ii->...", off)
    return _out(n / (n - 1) * coh)


def predictability2(rho):
    """Squared predictability ``sum rho_ii^2 - 1/(n-1) sum_{i != j} rho_ii rho_jj``."""
    m = _stack(rho)
    n = m.shape[-1]
    d = np.einsum("...ii->...i", m).real
    same = np.sum(d**2, axis=-1)
    cross = np.einsum("...i,...j->...", d, d) - same
    return _out(same - cross / (n - 1))


def entanglement2_residual(rho):
    """``1 - V^2 - P^2``, the entanglement left over by the path measures.

    Valid for any state, mixed or pure.  Algebraically it equals
    ``n/(n-1) * (1 - Tr rho^2)``.  For a reduced state built from a pure
    path-detector composite it coincides with :func:`entanglement2_pairwise`.
    """
    return _out(1.0 - np.asarray(visibility2(rho)) - np.asarray(predictability2(rho)))


def entanglement2_pairwise(psi: PureState, gram: DetectorGram) -> float:
    """Normalized sum of squared pairwise path-detector concurrences.

    ``n/(2(n-1)) * sum_{i<j} E_ij^2`` with
    ``E_ij^2 = 4 |c_i|^2 |c_j|^2 (1 - |<d_i|d_j>|^2)``.  Only defined for the
    pure composite construction; use :func:`entanglement2_residual` for
    arbitrary states.
    """
    if psi.dim != gram.dim:
        raise DimensionError(f"state has dim {psi.dim} but Gram matrix has dim {gram.dim}")
    n = psi.dim
    if n < 2:
        raise DimensionError("measures need at least two paths")
    p = np.abs(psi.amplitudes) ** 2
    loss = 1.0 - np.abs(gram.overlaps) ** 2
    iu = np.triu_indices(n, 1)
    e_pairs = 4.0 * np.outer(p, p)[iu] * loss[iu]
    return float(n / (2 * (n - 1)) * e_pairs.sum())


@dataclass(frozen=True)
class ComplementarityTriple:
    v2: float
    p2: float
    e2: float

    def __post_init__(self):
        for name in ("v2", "p2", "e2"):
            x = getattr(self, name)
            if not (-STATE_TOL <= x <= 1.0 + STATE_TOL):
                raise ValueError(f"{name} = {x!r} outside [0, 1]")

    @property
    def total(self) -> float:
        return self.v2 + self.p2 + self.e2

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v2, self.p2, self.e2)


def residual_triple(rho) -> ComplementarityTriple:
    """Triple of a general state, with entanglement taken as the residual."""
    v2 = visibility2(rho)
    p2 = predictability2(rho)
    return ComplementarityTriple(v2, p2, 1.0 - v2 - p2)


def triality_triple(psi: PureState, gram: DetectorGram) -> ComplementarityTriple:
    rho = reduced_density(psi, gram)
    return ComplementarityTriple(
        visibility2(rho), predictability2(rho), entanglement2_pairwise(psi, gram)
    )
