"""Randomized property suite behind ``triality verify``.

Each check draws from its own child of ``SeedSequence(seed)`` so results do
not depend on check order.  Checks return the worst deviation seen and are
compared against a fixed tolerance; an exception inside a check counts as a
failure rather than aborting the run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from .core import gellmann_decompose, pauli_decompose, purity
from .measures import entanglement2_residual, predictability2, visibility2
from .sampling import random_density_batch

GRID = np.linspace(0.0, 1.0, 101)
CF_GRID = np.linspace(0.0, 1.0, 11)


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float
    count: int
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and self.worst <= self.tol


@dataclass
class VerifyReport:
    seed: int
    cases: int
    results: list
    seconds: float

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def text(self) -> str:
        lines = [f"triality verify  seed={self.seed}  cases={self.cases}"]
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            detail = r.error or f"worst={r.worst:.3e} tol={r.tol:.0e} n={r.count}"
            lines.append(f"  {status}  {r.name:<38} {detail}")
        passed = sum(r.passed for r in self.results)
        lines.append(f"{passed}/{len(self.results)} checks passed in {self.seconds:.2f}s")
        return "\n".join(lines)


def _builders(inject_fault: bool) -> dict[str, Callable[[float], ch.KrausChannel]]:
    builders = {
        "ad_qubit": ch.amplitude_damping_qubit,
        "pd_qubit": ch.phase_damping_qubit,
        "ad_qutrit_cascade": lambda g: ch.cascade_ad_qutrit(g, g),
        "ad_qutrit_paper": lambda g: ch.paper_kraus_ad_qutrit(g, g),
        "pd_qutrit": ch.phase_damping_qutrit,
    }
    if inject_fault:
        # drops the jump operator, so population leaks out of the state
        def broken(g):
            good = ch.amplitude_damping_qubit(g)
            return ch.KrausChannel(good.operators[:1], "ad_qubit_broken", good.params)

        builders["ad_qubit"] = broken
    return builders


def _triality_worst(rho) -> float:
    total = np.asarray(visibility2(rho)) + np.asarray(predictability2(rho)) + np.asarray(entanglement2_residual(rho))
    return float(np.max(np.abs(total - 1.0)))


def _residual_identity_worst(rho) -> float:
    n = rho.shape[-1]
    tr2 = np.sum(np.abs(rho) ** 2, axis=(-2, -1))
    return float(np.max(np.abs(np.asarray(entanglement2_residual(rho)) - n / (n - 1) * (1.0 - tr2))))


def _check_boundary(rng, cases, builders):
    worst = 0.0
    for name, build in builders.items():
        dim = 2 if name.endswith("qubit") else 3
        rho = random_density_batch(rng, dim, max(cases, dim))
        out0 = ch.apply_array(build(0.0), rho)
        worst = max(worst, float(np.max(np.abs(out0 - rho))))
        out1 = ch.apply_array(build(1.0), rho)
        worst = max(worst, _triality_worst(out1), ch.validate_cptp(build(1.0)))
    return worst, 1e-12, 2 * len(builders)


def _check_cptp(rng, cases, builders):
    worst = 0.0
    for build in builders.values():
        for g in GRID:
            worst = max(worst, ch.validate_cptp(build(g)))
    for which in ("upper", "lower"):
        for g in GRID:
            worst = max(worst, ch.validate_cptp(ch.qutrit_decay_step(which, g)))
    return worst, 1e-12, (len(builders) + 2) * GRID.size


def _check_channel_triality(rng, cases, builders):
    worst = 0.0
    states = {d: random_density_batch(rng, d, cases) for d in (2, 3)}
    for name, build in builders.items():
        rho = states[2 if name.endswith("qubit") else 3]
        for g in GRID:
            worst = max(worst, _triality_worst(ch.apply_array(build(g), rho)))
    return worst, 1e-10, len(builders) * GRID.size * cases


def _check_residual_identity(rng, cases, builders):
    worst = 0.0
    for d in (2, 3):
        rho = random_density_batch(rng, d, cases)
        worst = max(worst, _residual_identity_worst(rho))
    for name, build in builders.items():
        d = 2 if name.endswith("qubit") else 3
        rho = random_density_batch(rng, d, cases)
        worst = max(worst, _residual_identity_worst(ch.apply_array(build(0.37), rho)))
    return worst, 1e-12, (2 + len(builders)) * cases


def _check_closed_forms(rng, cases, builders):
    pairs = [
        ("ad_qubit", 2, ch.ad_qubit_closed_form),
        ("pd_qubit", 2, ch.pd_qubit_closed_form),
        ("pd_qutrit", 3, ch.pd_qutrit_closed_form),
    ]
    worst = 0.0
    for name, d, closed in pairs:
        rho = random_density_batch(rng, d, cases)
        for g in CF_GRID:
            out = ch.apply_array(builders[name](g), rho)
            numeric = (visibility2(out), predictability2(out), entanglement2_residual(out))
            for a, b in zip(numeric, closed(rho, g)):
                worst = max(worst, float(np.max(np.abs(np.asarray(a) - b))))
    return worst, 1e-12, len(pairs) * CF_GRID.size * cases


def _pure_composites(rng, n, cases):
    c = rng.standard_normal((cases, n)) + 1j * rng.standard_normal((cases, n))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    m = rng.integers(1, 5, size=cases)
    out = []
    for mm in range(1, 5):
        idx = np.flatnonzero(m == mm)
        if idx.size == 0:
            continue
        d = rng.standard_normal((idx.size, n, mm)) + 1j * rng.standard_normal((idx.size, n, mm))
        d /= np.linalg.norm(d, axis=2, keepdims=True)
        out.append((c[idx], d))
    return out


def _check_pure_triality(rng, cases, builders):
    worst = 0.0
    for n in (2, 3):
        for c, d in _pure_composites(rng, n, cases):
            gram = np.einsum("kia,kja->kij", d.conj(), d)
            rho = np.einsum("ki,kj->kij", c, c.conj()) * np.swapaxes(gram, 1, 2)
            p = np.abs(c) ** 2
            iu = np.triu_indices(n, 1)
            pairs = (4.0 * np.einsum("ki,kj->kij", p, p) * (1.0 - np.abs(gram) ** 2))[:, iu[0], iu[1]]
            e2 = n / (2 * (n - 1)) * pairs.sum(axis=1)
            v2 = np.asarray(visibility2(rho))
            p2 = np.asarray(predictability2(rho))
            worst = max(worst, float(np.max(np.abs(v2 + p2 + e2 - 1.0), initial=0.0)))
            resid = np.asarray(entanglement2_residual(rho))
            worst = max(worst, float(np.max(np.abs(resid - e2), initial=0.0)))
    return worst, 1e-10, 2 * cases


def _check_partial_trace(rng, cases, builders):
    worst = 0.0
    for n in (2, 3):
        for c, d in _pure_composites(rng, n, cases):
            k, _, m = d.shape
            composite = (c[:, :, None] * d).reshape(k, n * m)
            psi = composite.reshape(k, n, m)
            traced = psi @ np.conj(np.swapaxes(psi, 1, 2))
            gram = np.einsum("kia,kja->kij", d.conj(), d)
            hadamard = np.einsum("ki,kj->kij", c, c.conj()) * np.swapaxes(gram, 1, 2)
            worst = max(worst, float(np.max(np.abs(traced - hadamard), initial=0.0)))
    return worst, 1e-12, 2 * cases


def _check_representations(rng, cases, builders):
    worst = 0.0
    for rho in random_density_batch(rng, 2, cases):
        b = pauli_decompose(rho)
        worst = max(
            worst,
            abs(visibility2(rho) - 4 * (b.rho1**2 + b.rho2**2)),
            abs(predictability2(rho) - 4 * b.rho3**2),
            abs(purity(rho) - (0.5 + 2 * (b.rho1**2 + b.rho2**2 + b.rho3**2))),
        )
    for rho in random_density_batch(rng, 3, cases):
        s = gellmann_decompose(rho).s
        worst = max(
            worst,
            abs(visibility2(rho) - float(np.sum(s[[0, 1, 3, 4, 5, 6]] ** 2))),
            abs(predictability2(rho) - float(np.sum(s[[2, 7]] ** 2))),
            abs(purity(rho) - (1 / 3 + 2 / 3 * float(np.sum(s**2)))),
        )
    return worst, 1e-12, 2 * cases


def _check_dephasing_diagonal(rng, cases, builders):
    worst = 0.0
    for name, d in (("pd_qubit", 2), ("pd_qutrit", 3)):
        rho = random_density_batch(rng, d, cases)
        for g in CF_GRID:
            out = ch.apply_array(builders[name](g), rho)
            dev = np.abs(np.einsum("kii->ki", out) - np.einsum("kii->ki", rho))
            worst = max(worst, float(np.max(dev)))
    return worst, 1e-14, 2 * cases * CF_GRID.size


def _check_coherence_scaling(rng, cases, builders):
    worst = 0.0
    q2 = random_density_batch(rng, 2, cases)
    q3 = random_density_batch(rng, 3, cases)
    for g in CF_GRID:
        out = ch.apply_array(builders["ad_qubit"](g), q2)
        worst = max(worst, float(np.max(np.abs(np.abs(out[:, 0, 1]) - np.sqrt(1 - g) * np.abs(q2[:, 0, 1])))))
        g1, g2 = g, 1.0 - 0.5 * g
        out = ch.apply_array(ch.cascade_ad_qutrit(g1, g2), q3)
        factors = {(0, 1): np.sqrt(1 - g1), (0, 2): np.sqrt(1 - g2), (1, 2): np.sqrt((1 - g1) * (1 - g2))}
        for (i, j), f in factors.items():
            worst = max(worst, float(np.max(np.abs(np.abs(out[:, i, j]) - f * np.abs(q3[:, i, j])))))
    return worst, 1e-13, 2 * cases * CF_GRID.size


def _check_cascade_composition(rng, cases, builders):
    worst = 0.0
    q3 = random_density_batch(rng, 3, cases)
    for g in CF_GRID:
        g1, g2 = g, 1.0 - 0.5 * g
        cascade = ch.apply_array(ch.cascade_ad_qutrit(g1, g2), q3)
        composed = ch.apply_array(
            ch.compose(ch.qutrit_decay_step("upper", g2), ch.qutrit_decay_step("lower", g1)), q3
        )
        worst = max(worst, float(np.max(np.abs(cascade - composed))))
    return worst, 1e-13, cases * CF_GRID.size


def _check_monotonic(rng, cases, builders):
    """Largest step of V'^2 on the maximally coherent qubit; must be negative."""
    rho = np.full((2, 2), 0.5, dtype=np.complex128)
    inner = GRID[1:-1]
    worst = -np.inf
    for name in ("ad_qubit", "pd_qubit"):
        v = np.array([visibility2(ch.apply_array(builders[name](g), rho)) for g in inner])
        worst = max(worst, float(np.max(np.diff(v))))
    # grid steps change V'^2 by ~1e-2; -1e-9 demands a strict decrease
    return worst, -1e-9, 2 * inner.size


CHECKS = [
    ("boundary gamma in {0, 1}", _check_boundary),
    ("CPTP completeness (101-point grid)", _check_cptp),
    ("channel triality persistence", _check_channel_triality),
    ("residual identity", _check_residual_identity),
    ("closed form vs Kraus numeric", _check_closed_forms),
    ("pure composite triality", _check_pure_triality),
    ("partial trace vs Hadamard product", _check_partial_trace),
    ("Pauli / Gell-Mann representations", _check_representations),
    ("dephasing keeps populations", _check_dephasing_diagonal),
    ("damping coherence factors", _check_coherence_scaling),
    ("cascade equals composed steps", _check_cascade_composition),
    ("visibility monotone in gamma", _check_monotonic),
]


def run_verify(seed: int = 42, cases: int = 1000, inject_fault: bool = False) -> VerifyReport:
    if cases < 1:
        raise ValueError("cases must be at least 1")
    builders = _builders(inject_fault)
    children = np.random.SeedSequence(seed).spawn(len(CHECKS))
    results = []
    t0 = time.perf_counter()
    for (name, check), child in zip(CHECKS, children):
        rng = np.random.default_rng(child)
        try:
            worst, tol, count = check(rng, cases, builders)
            results.append(CheckResult(name, worst, tol, count))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(name, float("inf"), 0.0, 0, f"{type(exc).__name__}: {exc}"))
    return VerifyReport(seed, cases, results, time.perf_counter() - t0)
