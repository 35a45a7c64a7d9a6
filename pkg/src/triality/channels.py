"""Kraus channels for amplitude and phase damping on qubits and qutrits.

Basis index 0 is the lowest level (the first path).  Amplitude damping moves
population towards index 0.

Two qutrit amplitude-damping channels are provided.  The cascade
``cascade_ad_qutrit`` (2->1 decay followed by 1->0 decay) is the reference
channel: its populations and coherences follow the usual cascade update
rules.  ``paper_kraus_ad_qutrit`` is the three-operator set
``{E0, sqrt(g1)|0><1|, sqrt(g2)|1><2|}``, which is trace preserving but moves
``g2 * rho_22`` into level 1 without the ``(1 - g1)`` factor.  It is kept for
:func:`compare_paper_vs_oracle`, which tabulates where the two disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .core import (
    DensityMatrix,
    DimensionError,
    GellMannVector,
    COHERENCE_INDICES,
    POPULATION_INDICES,
    density_to_json,
    gellmann_decompose,
)
from .measures import (
    ComplementarityTriple,
    entanglement2_residual,
    predictability2,
    visibility2,
)

CPTP_TOL = 1e-12
AGREE_TOL = 1e-10

OMEGA = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))


class NotCPTPError(ValueError):
    """Raised when a Kraus set fails the completeness relation."""


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple
    label: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        ops = []
        for e in self.operators:
            e = np.array(e, dtype=np.complex128)
            e.flags.writeable = False
            ops.append(e)
        if not ops:
            raise DimensionError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise DimensionError(f"Kraus operators must be square, got {shape}")
        if any(e.shape != shape for e in ops):
            raise DimensionError("Kraus operators have mixed shapes")
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def stacked(self) -> np.ndarray:
        return np.stack(self.operators)


def _check_gamma(name: str, gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {gamma!r}")
    return gamma


def validate_cptp(channel: KrausChannel) -> float:
    """Max-norm defect ``max |sum_k E_k^dag E_k - I|``."""
    e = channel.stacked()
    total = np.einsum("kji,kjl->il", e.conj(), e)
    return float(np.max(np.abs(total - np.eye(channel.dim))))


def _require_cptp(channel: KrausChannel) -> None:
    defect = validate_cptp(channel)
    if defect > CPTP_TOL:
        raise NotCPTPError(f"channel {channel.label!r} is not trace preserving (defect {defect:.3e})")


def apply_array(channel: KrausChannel, rho) -> np.ndarray:
    """``sum_k E_k rho E_k^dag`` on an array of shape ``(..., d, d)``.

    Checks completeness once, but does not validate the individual states;
    this is the bulk path used for sweeps and property checks.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape[-2:] != (channel.dim, channel.dim):
        raise DimensionError(f"channel acts on dim {channel.dim}, state shape is {rho.shape}")
    _require_cptp(channel)
    out = np.zeros(np.broadcast_shapes(rho.shape, (channel.dim, channel.dim)), dtype=np.complex128)
    for e in channel.operators:
        out += e @ rho @ e.conj().T
    return out


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != channel.dim:
        raise DimensionError(f"channel acts on dim {channel.dim}, state has dim {rho.dim}")
    return DensityMatrix(apply_array(channel, rho.matrix))


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Channel that applies ``first`` and then ``second``.

    Kraus operators are all products ``F_j E_k`` with ``E`` from ``first``.
    """
    if first.dim != second.dim:
        raise DimensionError(f"cannot compose dim {first.dim} with dim {second.dim}")
    ops = [f @ e for f in second.operators for e in first.operators]
    params = {**first.params, **second.params}
    return KrausChannel(tuple(ops), f"{second.label} . {first.label}", params)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),), "identity")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def amplitude_damping_qubit(gamma_a: float) -> KrausChannel:
    g = _check_gamma("gamma_a", gamma_a)
    e0 = np.diag([1.0, math.sqrt(1.0 - g)])
    e1 = np.array([[0.0, math.sqrt(g)], [0.0, 0.0]])
    return KrausChannel((e0, e1), "ad_qubit", {"gamma_a": g})


def qutrit_decay_step(which: str, gamma: float) -> KrausChannel:
    """Single qutrit decay: ``"upper"`` is 2 -> 1, ``"lower"`` is 1 -> 0."""
    g = _check_gamma("gamma", gamma)
    if which == "upper":
        src, dst = 2, 1
    elif which == "lower":
        src, dst = 1, 0
    else:
        raise ValueError(f"which must be 'upper' or 'lower', got {which!r}")
    keep = np.ones(3)
    keep[src] = math.sqrt(1.0 - g)
    jump = np.zeros((3, 3))
    jump[dst, src] = math.sqrt(g)
    return KrausChannel((np.diag(keep), jump), f"decay_{which}", {f"gamma_{which}": g})


def cascade_ad_qutrit(gamma1: float, gamma2: float) -> KrausChannel:
    g1 = _check_gamma("gamma1", gamma1)
    g2 = _check_gamma("gamma2", gamma2)
    chain = compose(qutrit_decay_step("upper", g2), qutrit_decay_step("lower", g1))
    return KrausChannel(chain.operators, "ad_qutrit_cascade", {"gamma1": g1, "gamma2": g2})


def paper_kraus_ad_qutrit(gamma1: float, gamma2: float) -> KrausChannel:
    g1 = _check_gamma("gamma1", gamma1)
    g2 = _check_gamma("gamma2", gamma2)
    e0 = np.diag([1.0, math.sqrt(1.0 - g1), math.sqrt(1.0 - g2)])
    e1 = np.zeros((3, 3))
    e1[0, 1] = math.sqrt(g1)
    e2 = np.zeros((3, 3))
    e2[1, 2] = math.sqrt(g2)
    return KrausChannel((e0, e1, e2), "ad_qutrit_paper", {"gamma1": g1, "gamma2": g2})


def phase_damping_qubit(gamma_p: float) -> KrausChannel:
    g = _check_gamma("gamma_p", gamma_p)
    e0 = np.diag([1.0, math.sqrt(1.0 - g)])
    e1 = np.diag([0.0, math.sqrt(g)])
    return KrausChannel((e0, e1), "pd_qubit", {"gamma_p": g})


def phase_damping_qutrit(gamma_p: float) -> KrausChannel:
    """Qutrit dephasing from three diagonal operators with phases 1, w, w^2."""
    g = _check_gamma("gamma_p", gamma_p)
    r = math.sqrt(1.0 - g)
    a0 = math.sqrt((1.0 + 2.0 * r) / 3.0)
    # 1 - r >= 0 always; max() guards the g = 0 round-off
    a1 = math.sqrt(max(1.0 - r, 0.0) / 3.0)
    e0 = a0 * np.eye(3)
    e1 = a1 * np.diag([1.0, OMEGA, OMEGA**2])
    e2 = a1 * np.diag([1.0, OMEGA**2, OMEGA])
    return KrausChannel((e0, e1, e2), "pd_qutrit", {"gamma_p": g})


# ---------------------------------------------------------------------------
# closed-form predictions
# ---------------------------------------------------------------------------


def _qubit_parts(rho):
    m = np.asarray(getattr(rho, "matrix", rho))
    if m.shape[-2:] != (2, 2):
        raise DimensionError(f"expected qubit states, got shape {m.shape}")
    return m[..., 0, 0].real, m[..., 1, 1].real, np.abs(m[..., 0, 1]) ** 2


def ad_qubit_closed_form(rho, gamma_a: float):
    """``(V'^2, P'^2, e'^2)`` after qubit amplitude damping, as arrays."""
    g = gamma_a
    r11, r22, c2 = _qubit_parts(rho)
    p2 = (r11 - r22 + 2.0 * g * r22) ** 2
    v2 = (1.0 - g) * 4.0 * c2
    conc2 = 4.0 * (r11 * r22 - c2)
    e2 = (1.0 - g) * conc2 + 4.0 * g * (1.0 - g) * r22**2
    return v2, p2, e2


def pd_qubit_closed_form(rho, gamma_p: float):
    g = gamma_p
    r11, r22, c2 = _qubit_parts(rho)
    p2 = (r11 - r22) ** 2
    v2 = (1.0 - g) * 4.0 * c2
    e2 = 4.0 * (r11 * r22 - c2) + 4.0 * g * c2
    return v2, p2, e2


def pd_qutrit_closed_form(rho, gamma_p: float):
    m = np.asarray(getattr(rho, "matrix", rho))
    if m.shape[-2:] != (3, 3):
        raise DimensionError(f"expected qutrit states, got shape {m.shape}")
    v2 = (1.0 - gamma_p) * np.asarray(visibility2(m))
    p2 = np.asarray(predictability2(m))
    return v2, p2, 1.0 - p2 - v2


def _triple(parts) -> ComplementarityTriple:
    return ComplementarityTriple(*(float(x) for x in parts))


def predict_ad_qubit(rho: DensityMatrix, gamma_a: float) -> ComplementarityTriple:
    return _triple(ad_qubit_closed_form(rho, _check_gamma("gamma_a", gamma_a)))


def predict_pd_qubit(rho: DensityMatrix, gamma_p: float) -> ComplementarityTriple:
    return _triple(pd_qubit_closed_form(rho, _check_gamma("gamma_p", gamma_p)))


def predict_pd_qutrit(rho: DensityMatrix, gamma_p: float) -> ComplementarityTriple:
    return _triple(pd_qutrit_closed_form(rho, _check_gamma("gamma_p", gamma_p)))


def gellmann_transform_ad(s: GellMannVector, gamma1: float, gamma2: float) -> GellMannVector:
    """Coefficient update rule printed for the cascade channel, applied as is.

    Coherence pairs scale by ``sqrt(1-g1)``, ``sqrt(1-g2)`` and
    ``sqrt((1-g1)(1-g2))``; ``s8' = (1-g2) s8 + g2/2`` and
    ``s3' = (1-g1) s3 + (sqrt(3)/3) g1 (1-g2) s8``.  The ``s3'`` rule drops
    state-independent terms, so this does not track the actual channel output
    in general.
    """
    g1 = _check_gamma("gamma1", gamma1)
    g2 = _check_gamma("gamma2", gamma2)
    v = np.array(s.s, dtype=float)
    out = v.copy()
    out[[0, 1]] = math.sqrt(1.0 - g1) * v[[0, 1]]
    out[[3, 4]] = math.sqrt(1.0 - g2) * v[[3, 4]]
    out[[5, 6]] = math.sqrt((1.0 - g1) * (1.0 - g2)) * v[[5, 6]]
    out[7] = (1.0 - g2) * v[7] + g2 / 2.0
    out[2] = (1.0 - g1) * v[2] + math.sqrt(3.0) / 3.0 * g1 * (1.0 - g2) * v[7]
    return GellMannVector(out)


# ---------------------------------------------------------------------------
# printed rules vs matrix-level ground truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    quantity: str
    paper_value: float
    oracle_value: float

    @property
    def deviation(self) -> float:
        return abs(self.paper_value - self.oracle_value)

    @property
    def verdict(self) -> str:
        return "agree" if self.deviation <= AGREE_TOL else "disagree"

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "paper_value": self.paper_value,
            "oracle_value": self.oracle_value,
            "deviation": self.deviation,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class DiscrepancyReport:
    channel_label: str
    test_state: DensityMatrix
    gamma1: float
    gamma2: float
    comparisons: tuple

    @property
    def max_abs_deviation(self) -> float:
        return max((c.deviation for c in self.comparisons), default=0.0)

    def get(self, quantity: str) -> Comparison:
        for c in self.comparisons:
            if c.quantity == quantity:
                return c
        raise KeyError(quantity)

    def disagreements(self) -> list:
        return [c for c in self.comparisons if c.verdict == "disagree"]

    def to_dict(self) -> dict:
        return {
            "channel_label": self.channel_label,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "test_state": density_to_json(self.test_state),
            "max_abs_deviation": self.max_abs_deviation,
            "comparisons": [c.to_dict() for c in self.comparisons],
        }


def printed_update(rho: DensityMatrix, gamma1: float, gamma2: float) -> np.ndarray:
    """Cascade update written entry by entry from the printed population and
    coherence rules (level 0 has no decay rate)."""
    m = rho.matrix
    g = (0.0, gamma1, gamma2)
    out = np.empty((3, 3), dtype=np.complex128)
    out[0, 0] = m[0, 0] + gamma1 * m[1, 1] + gamma1 * gamma2 * m[2, 2]
    out[1, 1] = (1.0 - gamma1) * m[1, 1] + gamma2 * (1.0 - gamma1) * m[2, 2]
    out[2, 2] = (1.0 - gamma2) * m[2, 2]
    for i in range(3):
        for j in range(3):
            if i != j:
                out[i, j] = math.sqrt((1.0 - g[i]) * (1.0 - g[j])) * m[i, j]
    return out


def compare_paper_vs_oracle(rho: DensityMatrix, gamma1: float, gamma2: float) -> DiscrepancyReport:
    """Tabulate each printed qutrit amplitude-damping rule against the cascade.

    The oracle is always the cascade channel applied at matrix level.  Rows:

    * ``rho'_ii [literal-kraus]`` populations of the three-operator set;
    * ``rho'_ij [printed-update]`` the printed population and coherence rules;
    * ``s'_k [transform]`` the printed Gell-Mann coefficient update;
    * ``V'^2``, ``P'^2``, ``e'^2`` from the transformed coefficients and from
      the three-operator set;
    * ``V'^2 [appendix (1-g)^2]`` for equal rates, the claim that every
      coherence is multiplied by ``(1 - g)``.
    """
    if rho.dim != 3:
        raise DimensionError(f"expected a qutrit state, got dim {rho.dim}")
    g1 = _check_gamma("gamma1", gamma1)
    g2 = _check_gamma("gamma2", gamma2)
    cascade = cascade_ad_qutrit(g1, g2)
    oracle = apply(cascade, rho).matrix
    literal = apply(paper_kraus_ad_qutrit(g1, g2), rho).matrix
    printed = printed_update(rho, g1, g2)

    rows = []
    for i in range(3):
        rows.append(Comparison(f"rho'_{i}{i} [literal-kraus]", float(literal[i, i].real), float(oracle[i, i].real)))
    for i in range(3):
        rows.append(Comparison(f"rho'_{i}{i} [printed-update]", float(printed[i, i].real), float(oracle[i, i].real)))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        rows.append(Comparison(f"|rho'_{i}{j}| [printed-update]", float(abs(printed[i, j])), float(abs(oracle[i, j]))))

    s_printed = gellmann_transform_ad(gellmann_decompose(rho), g1, g2).s
    s_oracle = gellmann_decompose(oracle).s
    for k in range(8):
        rows.append(Comparison(f"s'_{k + 1} [transform]", float(s_printed[k]), float(s_oracle[k])))

    v2_printed = float(np.sum(s_printed[list(COHERENCE_INDICES)] ** 2))
    p2_printed = float(np.sum(s_printed[list(POPULATION_INDICES)] ** 2))
    e2_printed = 1.0 - float(np.sum(s_printed**2))
    rows.append(Comparison("V'^2 [transform]", v2_printed, visibility2(oracle)))
    rows.append(Comparison("P'^2 [transform]", p2_printed, predictability2(oracle)))
    rows.append(Comparison("e'^2 [transform]", e2_printed, entanglement2_residual(oracle)))
    rows.append(Comparison("V'^2 [literal-kraus]", visibility2(literal), visibility2(oracle)))
    rows.append(Comparison("P'^2 [literal-kraus]", predictability2(literal), predictability2(oracle)))
    rows.append(Comparison("e'^2 [literal-kraus]", entanglement2_residual(literal), entanglement2_residual(oracle)))
    if g1 == g2:
        claim = (1.0 - g1) ** 2 * visibility2(rho)
        rows.append(Comparison("V'^2 [appendix (1-g)^2]", claim, visibility2(oracle)))

    return DiscrepancyReport(cascade.label, rho, g1, g2, tuple(rows))
