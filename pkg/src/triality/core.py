"""Dense-matrix kernel, state types and the Pauli / Gell-Mann coordinates.

Everything here works on small complex ``numpy`` arrays (at most 9x9 for the
composite path-detector states).  State types are frozen dataclasses holding
read-only arrays, so they can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

STATE_TOL = 1e-10
EXACT_TOL = 1e-12

_JACOBI_MAX_SWEEPS = 50


class DimensionError(ValueError):
    """Raised when array shapes do not fit together."""


class InvalidStateError(ValueError):
    """Raised when a matrix or vector violates a state invariant."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


def _as_matrix(a) -> np.ndarray:
    m = getattr(a, "matrix", a)
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


# ---------------------------------------------------------------------------
# matrix kernel
# ---------------------------------------------------------------------------


def mat_mul(a, b) -> np.ndarray:
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("matrix entries must be finite")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return _as_matrix(a).conj().T


def is_hermitian(a, tol: float = STATE_TOL) -> bool:
    a = _as_matrix(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def _jacobi_eigenvalues(a: np.ndarray) -> list[float]:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation removes the phase of the pivot ``a[p][q]`` and applies a real
    Givens rotation, so the iterate stays Hermitian.  Absolute accuracy is a
    few ulps of the matrix norm regardless of eigenvalue degeneracy, which the
    trigonometric cubic formula cannot guarantee.
    """
    n = a.shape[0]
    h = [[complex(0.5 * (a[i, j] + a[j, i].conjugate())) for j in range(n)] for i in range(n)]
    scale = max(max(abs(z) for z in row) for row in h) or 1.0
    eps2 = (1e-17 * scale) ** 2
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = sum(abs(h[p][q]) ** 2 for p in range(n - 1) for q in range(p + 1, n))
        if off <= eps2:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = h[p][q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                ph = apq / mag
                theta = 0.5 * math.atan2(2.0 * mag, h[q][q].real - h[p][p].real)
                c = math.cos(theta)
                s = math.sin(theta)
                sp = s * ph
                sph = s * ph.conjugate()
                # h <- J^H h J with J = [[c, s*ph], [-s*conj(ph), c]] on (p, q)
                for k in range(n):
                    hkp = h[k][p]
                    hkq = h[k][q]
                    h[k][p] = c * hkp - sph * hkq
                    h[k][q] = sp * hkp + c * hkq
                for k in range(n):
                    hpk = h[p][k]
                    hqk = h[q][k]
                    h[p][k] = c * hpk - sp * hqk
                    h[q][k] = sph * hpk + c * hqk
                h[p][q] = 0j
                h[q][p] = 0j
    return sorted(h[i][i].real for i in range(n))


def psd_min_eigenvalue(a, tol: float = STATE_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    2x2 uses the closed-form quadratic root; larger matrices use Jacobi
    iteration.

    Raises
    ------
    InvalidStateError
        If ``a`` is not Hermitian within ``tol``.
    """
    a = _as_matrix(a)
    if not is_hermitian(a, tol):
        raise InvalidStateError("psd_min_eigenvalue requires a Hermitian matrix")
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0].real)
    if n == 2:
        mean = 0.5 * (a[0, 0].real + a[1, 1].real)
        half_gap = 0.5 * (a[0, 0].real - a[1, 1].real)
        return float(mean - np.hypot(half_gap, abs(a[0, 1])))
    return float(_jacobi_eigenvalues(a)[0])


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector ``(c_1, ..., c_n)``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"amplitudes must be a non-empty vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > STATE_TOL:
            raise InvalidStateError(f"state is not normalized: sum |c_i|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=np.complex128)
        return cls(v / np.linalg.norm(v))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    Construction validates all three properties at ``STATE_TOL`` and never
    repairs the input.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("density matrix entries must be finite")
        if not is_hermitian(m, STATE_TOL):
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
        lo = psd_min_eigenvalue(m)
        if lo < -STATE_TOL:
            raise InvalidStateError(f"density matrix is not PSD: min eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, idx):
        return self.matrix[idx]


@dataclass(frozen=True)
class DetectorGram:
    """Gram matrix ``G_ij = <d_i|d_j>`` of the path-detector states."""

    overlaps: np.ndarray

    def __post_init__(self):
        g = _frozen(self.overlaps)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise DimensionError(f"Gram matrix must be square, got shape {g.shape}")
        if not is_hermitian(g, STATE_TOL):
            raise InvalidStateError("Gram matrix is not Hermitian")
        if np.max(np.abs(np.diag(g) - 1.0)) > STATE_TOL:
            raise InvalidStateError("Gram matrix must have unit diagonal")
        if np.max(np.abs(g)) > 1.0 + STATE_TOL:
            raise InvalidStateError("Gram matrix overlaps exceed 1 in modulus")
        if psd_min_eigenvalue(g) < -STATE_TOL:
            raise InvalidStateError("Gram matrix is not PSD")
        object.__setattr__(self, "overlaps", g)

    @property
    def dim(self) -> int:
        return self.overlaps.shape[0]


def purity(rho) -> float:
    """``Tr(rho^2)``."""
    m = _as_matrix(rho)
    # Tr(rho rho) for Hermitian rho is the squared Frobenius norm
    return float(np.sum(np.abs(m) ** 2))


def density_from_pure(psi: PureState) -> DensityMatrix:
    c = psi.amplitudes
    return DensityMatrix(np.outer(c, c.conj()))


def gram_from_detector_states(vectors: Sequence[PureState]) -> DetectorGram:
    if len(vectors) == 0:
        raise DimensionError("need at least one detector state")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"detector states have mixed dimensions {sorted(dims)}")
    d = np.stack([v.amplitudes for v in vectors])
    # G_ij = <d_i|d_j>
    g = d.conj() @ d.T
    np.fill_diagonal(g, 1.0)
    return DetectorGram(g)


def reduced_density(psi: PureState, gram: DetectorGram) -> DensityMatrix:
    """Path state after tracing out detectors: ``rho_ij * <d_i|d_j>``."""
    if psi.dim != gram.dim:
        raise DimensionError(f"state has dim {psi.dim} but Gram matrix has dim {gram.dim}")
    c = psi.amplitudes
    return DensityMatrix(np.outer(c, c.conj()) * gram.overlaps.T)


def composite_state(psi: PureState, detectors: Sequence[PureState]) -> PureState:
    """Joint vector ``sum_i c_i |i> (x) |d_i>``, path index major."""
    if len(detectors) != psi.dim:
        raise DimensionError(f"need {psi.dim} detector states, got {len(detectors)}")
    dims = {d.dim for d in detectors}
    if len(dims) != 1:
        raise DimensionError(f"detector states have mixed dimensions {sorted(dims)}")
    blocks = [c * d.amplitudes for c, d in zip(psi.amplitudes, detectors)]
    return PureState(np.concatenate(blocks))


def partial_trace_detector(composite: PureState, n: int, m: int) -> DensityMatrix:
    if n < 1 or m < 1 or composite.dim != n * m:
        raise DimensionError(f"composite dim {composite.dim} does not factor as {n} x {m}")
    psi = composite.amplitudes.reshape(n, m)
    return DensityMatrix(psi @ psi.conj().T)


# ---------------------------------------------------------------------------
# Pauli coordinates (qubit)
# ---------------------------------------------------------------------------

SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])


@dataclass(frozen=True)
class BlochVector:
    """Coefficients of ``rho = rho0 I + rho1 sx + rho2 sy + rho3 sz`` with rho0 = 1/2."""

    rho1: float
    rho2: float
    rho3: float

    @property
    def rho0(self) -> float:
        return 0.5

    def as_array(self) -> np.ndarray:
        return np.array([self.rho0, self.rho1, self.rho2, self.rho3])


def pauli_decompose(rho) -> BlochVector:
    m = _as_matrix(rho)
    if m.shape != (2, 2):
        raise DimensionError(f"Pauli decomposition needs a 2x2 matrix, got {m.shape}")
    return BlochVector(
        rho1=float(m[1, 0].real),
        rho2=float(m[1, 0].imag),
        rho3=float(0.5 * (m[0, 0].real - m[1, 1].real)),
    )


def pauli_reconstruct(b: BlochVector) -> DensityMatrix:
    r2 = b.rho1**2 + b.rho2**2 + b.rho3**2
    if r2 > 0.25 + STATE_TOL:
        raise InvalidStateError(f"Bloch vector outside the ball: |r|^2 = {r2!r} > 1/4")
    return DensityMatrix(
        b.rho0 * np.eye(2) + b.rho1 * SIGMA_X + b.rho2 * SIGMA_Y + b.rho3 * SIGMA_Z
    )


# ---------------------------------------------------------------------------
# Gell-Mann coordinates (qutrit)
# ---------------------------------------------------------------------------


def _gellmann_matrices() -> np.ndarray:
    lam = np.zeros((8, 3, 3), dtype=np.complex128)
    # symmetric / antisymmetric pairs on (0,1), (0,2), (1,2)
    for k, (i, j) in zip((0, 3, 5), ((0, 1), (0, 2), (1, 2))):
        lam[k, i, j] = lam[k, j, i] = 1.0
        lam[k + 1, i, j] = -1j
        lam[k + 1, j, i] = 1j
    lam[2] = np.diag([1.0, -1.0, 0.0])
    lam[7] = np.diag([1.0, 1.0, -2.0]) / np.sqrt(3.0)
    lam.flags.writeable = False
    return lam


GELL_MANN = _gellmann_matrices()

COHERENCE_INDICES = (0, 1, 3, 4, 5, 6)
POPULATION_INDICES = (2, 7)


@dataclass(frozen=True)
class GellMannVector:
    """Coefficients ``S_1..S_8`` of ``rho = I/3 + (1/sqrt 3) sum_i S_i lambda_i``.

    ``s[0]`` holds ``S_1``.
    """

    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        if s.shape != (8,):
            raise DimensionError(f"Gell-Mann vector needs 8 coefficients, got shape {s.shape}")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    def __getitem__(self, i):
        return self.s[i]

    def norm2(self) -> float:
        return float(np.sum(self.s**2))


def gellmann_decompose(rho) -> GellMannVector:
    m = _as_matrix(rho)
    if m.shape != (3, 3):
        raise DimensionError(f"Gell-Mann decomposition needs a 3x3 matrix, got {m.shape}")
    # Tr(rho lambda_i) = sum_ab rho_ab lambda_i,ba
    traces = np.einsum("ab,kba->k", m, GELL_MANN).real
    return GellMannVector(0.5 * np.sqrt(3.0) * traces)


def gellmann_reconstruct(v: GellMannVector) -> DensityMatrix:
    m = np.eye(3, dtype=np.complex128) / 3.0 + np.einsum("k,kab->ab", v.s, GELL_MANN) / np.sqrt(3.0)
    lo = psd_min_eigenvalue(m)
    if lo < -STATE_TOL:
        raise InvalidStateError(
            f"Gell-Mann vector does not describe a state: min eigenvalue {lo:.6e}"
        )
    return DensityMatrix(m)


# ---------------------------------------------------------------------------
# JSON wire format: complex numbers as [re, im] pairs
# ---------------------------------------------------------------------------


def _complex_to_pair(z) -> list:
    return [float(z.real), float(z.imag)]


def _pair_to_complex(p, where: str) -> complex:
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        return complex(p)
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise ValueError(f"{where}: expected [re, im], got {p!r}")
    re, im = p
    for x in (re, im):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ValueError(f"{where}: expected numbers, got {p!r}")
    return complex(re, im)


def density_to_json(rho: DensityMatrix) -> list:
    return [[_complex_to_pair(z) for z in row] for row in rho.matrix]


def density_from_json(data, where: str = "density") -> DensityMatrix:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise ValueError(f"{where}: expected a nested list of [re, im] pairs")
    m = [[_pair_to_complex(p, f"{where}[{i}][{j}]") for j, p in enumerate(row)]
         for i, row in enumerate(data)]
    return DensityMatrix(np.array(m, dtype=np.complex128))


def pure_to_json(psi: PureState) -> list:
    return [_complex_to_pair(z) for z in psi.amplitudes]


def pure_from_json(data, where: str = "pure") -> PureState:
    if not isinstance(data, list):
        raise ValueError(f"{where}: expected a list of [re, im] pairs")
    return PureState(np.array([_pair_to_complex(p, f"{where}[{i}]") for i, p in enumerate(data)]))
