"""Damping-parameter sweeps: JSON config in, CSV / JSON / SVG curves out.

A config is one JSON document::

    {
      "name": "ad_qubit",                       # optional, output file stem
      "channel": {"kind": "ad_qubit", "params": {}},
      "initial_state": "max_coherent_qubit",
      "gamma_grid": {"start": 0.0, "stop": 1.0, "steps": 101},
      "outputs": ["csv", "json", "svg"],
      "compare_closed_form": true
    }

``initial_state`` is a preset name (``max_coherent_qubit``,
``max_coherent_qutrit``, ``basis_<k>``) or an object holding either
``{"density": [[[re, im], ...], ...]}`` or ``{"pure": [[re, im], ...]}``.

Single-parameter channels sweep their only parameter, so ``params`` must be
empty.  The qutrit amplitude-damping kinds sweep ``gamma1 = gamma2 = gamma``
by default; fixing one of them in ``params`` sweeps the other.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import channels as ch
from .core import DensityMatrix, density_from_json, density_from_pure, pure_from_json
from .measures import entanglement2_residual, predictability2, visibility2

CHANNEL_KINDS = {
    "ad_qubit": 2,
    "ad_qutrit_cascade": 3,
    "ad_qutrit_paper": 3,
    "pd_qubit": 2,
    "pd_qutrit": 3,
}
OUTPUT_KINDS = ("csv", "json", "svg")
CSV_HEADER = ["gamma", "gamma1", "gamma2", "v2", "p2", "e2", "sum", "v2_cf", "p2_cf", "e2_cf"]
SUM_TOL = 1e-10
CLAMP_TOL = 1e-12

_TOP_KEYS = {"name", "channel", "initial_state", "gamma_grid", "outputs", "compare_closed_form"}
_REQUIRED = ("channel", "initial_state", "gamma_grid")


class ConfigError(ValueError):
    """Invalid sweep configuration; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class OutputError(OSError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = path


@dataclass(frozen=True)
class SweepConfig:
    kind: str
    fixed: dict
    initial_state: DensityMatrix
    start: float
    stop: float
    steps: int
    outputs: tuple = ("csv",)
    compare_closed_form: bool = False
    name: str = "sweep"

    @property
    def dim(self) -> int:
        return CHANNEL_KINDS[self.kind]

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRecord:
    gamma: Optional[float]
    gamma1: Optional[float]
    gamma2: Optional[float]
    v2: float
    p2: float
    e2: float
    v2_cf: Optional[float] = None
    p2_cf: Optional[float] = None
    e2_cf: Optional[float] = None
    v2_paper_claim: Optional[float] = None

    @property
    def sum(self) -> float:
        return self.v2 + self.p2 + self.e2

    def row(self) -> dict:
        return {
            "gamma": self.gamma,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "v2": self.v2,
            "p2": self.p2,
            "e2": self.e2,
            "sum": self.sum,
            "v2_cf": self.v2_cf,
            "p2_cf": self.p2_cf,
            "e2_cf": self.e2_cf,
        }


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _unit_interval(value, path: str) -> float:
    x = _number(value, path)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(path, f"must lie in [0, 1], got {x!r}")
    return x


def _strict_keys(obj, allowed, path: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown field")


def preset_state(name: str, dim: int) -> DensityMatrix:
    if name == "max_coherent_qubit":
        return DensityMatrix(np.full((2, 2), 0.5))
    if name == "max_coherent_qutrit":
        return DensityMatrix(np.full((3, 3), 1.0 / 3.0))
    if name.startswith("basis_") and name[6:].isdigit():
        k = int(name[6:])
        if k >= dim:
            raise ValueError(f"basis index {k} out of range for dim {dim}")
        m = np.zeros((dim, dim))
        m[k, k] = 1.0
        return DensityMatrix(m)
    raise ValueError(f"unknown preset {name!r}")


def _parse_state(raw, dim: int) -> DensityMatrix:
    path = "initial_state"
    if isinstance(raw, str):
        try:
            rho = preset_state(raw, dim)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    else:
        _strict_keys(raw, {"density", "pure"}, path)
        if len(raw) != 1:
            raise ConfigError(path, "give exactly one of 'density' or 'pure'")
        key, data = next(iter(raw.items()))
        try:
            if key == "density":
                rho = density_from_json(data, f"{path}.density")
            else:
                rho = density_from_pure(pure_from_json(data, f"{path}.pure"))
        except ValueError as exc:
            raise ConfigError(f"{path}.{key}", str(exc)) from None
    if rho.dim != dim:
        raise ConfigError(path, f"state has dim {rho.dim} but the channel acts on dim {dim}")
    return rho


def parse_config(raw) -> SweepConfig:
    """Validate a decoded JSON config.  Unknown fields are rejected."""
    _strict_keys(raw, _TOP_KEYS, "config")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"config.{key}", "missing required field")

    chan = raw["channel"]
    _strict_keys(chan, {"kind", "params"}, "channel")
    kind = chan.get("kind")
    if kind not in CHANNEL_KINDS:
        raise ConfigError("channel.kind", f"expected one of {sorted(CHANNEL_KINDS)}, got {kind!r}")
    params = chan.get("params", {})
    allowed = {"gamma1", "gamma2"} if kind.startswith("ad_qutrit") else set()
    _strict_keys(params, allowed, "channel.params")
    fixed = {k: _unit_interval(v, f"channel.params.{k}") for k, v in params.items()}
    if len(fixed) == 2:
        raise ConfigError("channel.params", "fixing both gamma1 and gamma2 leaves nothing to sweep")

    dim = CHANNEL_KINDS[kind]
    state = _parse_state(raw["initial_state"], dim)

    grid = raw["gamma_grid"]
    _strict_keys(grid, {"start", "stop", "steps"}, "gamma_grid")
    for key in ("start", "stop", "steps"):
        if key not in grid:
            raise ConfigError(f"gamma_grid.{key}", "missing required field")
    start = _unit_interval(grid["start"], "gamma_grid.start")
    stop = _unit_interval(grid["stop"], "gamma_grid.stop")
    if start > stop:
        raise ConfigError("gamma_grid", f"start {start} exceeds stop {stop}")
    steps = grid["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise ConfigError("gamma_grid.steps", f"expected an integer >= 2, got {steps!r}")

    outputs = raw.get("outputs", ["csv"])
    if not isinstance(outputs, list):
        raise ConfigError("outputs", "expected a list")
    for i, out in enumerate(outputs):
        if out not in OUTPUT_KINDS:
            raise ConfigError(f"outputs[{i}]", f"expected one of {list(OUTPUT_KINDS)}, got {out!r}")

    compare = raw.get("compare_closed_form", False)
    if not isinstance(compare, bool):
        raise ConfigError("compare_closed_form", "expected true or false")
    name = raw.get("name", "sweep")
    if not isinstance(name, str) or not name or os.sep in name:
        raise ConfigError("name", "expected a plain file stem")

    return SweepConfig(kind, fixed, state, start, stop, steps, tuple(outputs), compare, name)


def load_config(path: str) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(raw)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_CLOSED_FORMS = {
    "ad_qubit": ch.ad_qubit_closed_form,
    "pd_qubit": ch.pd_qubit_closed_form,
    "pd_qutrit": ch.pd_qutrit_closed_form,
}


def _channel_at(cfg: SweepConfig, gamma: float):
    """Build the channel for one grid point; returns (channel, gamma, gamma1, gamma2)."""
    if cfg.kind == "ad_qubit":
        return ch.amplitude_damping_qubit(gamma), gamma, None, None
    if cfg.kind == "pd_qubit":
        return ch.phase_damping_qubit(gamma), gamma, None, None
    if cfg.kind == "pd_qutrit":
        return ch.phase_damping_qutrit(gamma), gamma, None, None
    build = ch.cascade_ad_qutrit if cfg.kind == "ad_qutrit_cascade" else ch.paper_kraus_ad_qutrit
    if "gamma1" in cfg.fixed:
        g1, g2, label = cfg.fixed["gamma1"], gamma, None
    elif "gamma2" in cfg.fixed:
        g1, g2, label = gamma, cfg.fixed["gamma2"], None
    else:
        g1 = g2 = label = gamma
    return build(g1, g2), label, g1, g2


def _sweep_point(cfg: SweepConfig, gamma: float) -> SweepRecord:
    channel, g, g1, g2 = _channel_at(cfg, float(gamma))
    out = ch.apply(channel, cfg.initial_state)
    v2 = visibility2(out)
    p2 = predictability2(out)
    e2 = entanglement2_residual(out)
    cf = (None, None, None)
    if cfg.compare_closed_form and cfg.kind in _CLOSED_FORMS:
        cf = tuple(float(x) for x in _CLOSED_FORMS[cfg.kind](cfg.initial_state, float(gamma)))
    claim = None
    if cfg.kind.startswith("ad_qutrit") and not cfg.fixed:
        claim = (1.0 - gamma) ** 2 * visibility2(cfg.initial_state)
    rec = SweepRecord(g, g1, g2, v2, p2, e2, *cf, v2_paper_claim=claim)
    if abs(rec.sum - 1.0) > SUM_TOL:
        raise RuntimeError(f"triality sum {rec.sum!r} at gamma={gamma!r} violates the sum rule")
    return rec


def run_sweep(cfg: SweepConfig, out_dir: Optional[str] = None) -> list[SweepRecord]:
    """One record per grid point, in grid order.

    Output files named ``<name>.<ext>`` are written to ``out_dir`` when given.
    """
    records = [_sweep_point(cfg, g) for g in cfg.grid()]
    if out_dir is not None:
        emit_outputs(records, cfg.outputs, out_dir, cfg.name)
    return records


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clamp(x: Optional[float]) -> Optional[float]:
    if x is not None and -CLAMP_TOL <= x < 0.0:
        return 0.0
    return x


def format_number(x: Optional[float]) -> str:
    if x is None:
        return ""
    return format(_clamp(x) + 0.0, ".15g")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        row = rec.row()
        writer.writerow([format_number(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = []
    for rec in records:
        row = {k: _clamp(v) for k, v in rec.row().items()}
        if rec.v2_paper_claim is not None:
            row["v2_paper_claim_unverified"] = rec.v2_paper_claim
        rows.append(row)
    return json.dumps(rows, indent=2) + "\n"


def _x_values(records) -> tuple[list[float], str]:
    if all(r.gamma is not None for r in records):
        return [r.gamma for r in records], "γ"
    g1 = [r.gamma1 for r in records]
    if len(set(g1)) > 1:
        return g1, "γ₁"
    return [r.gamma2 for r in records], "γ₂"


def records_to_svg(records) -> str:
    """Three measure curves plus the sum line, on a fixed 640x400 canvas."""
    width, height = 640, 400
    left, right, top, bottom = 70, 150, 30, 60
    pw, ph = width - left - right, height - top - bottom
    xs, xlabel = _x_values(records)
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1.0

    def px(x):
        return left + (x - x0) / span * pw

    def py(y):
        return top + (1.0 - y) * ph

    def polyline(ys, colour, dash=""):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<polyline fill="none" stroke="{colour}" stroke-width="2"{extra} points="{pts}"/>'

    series = [
        ("V′²", [r.v2 for r in records], "#1f77b4", ""),
        ("P′²", [r.p2 for r in records], "#d62728", ""),
        ("ε′²", [r.e2 for r in records], "#2ca02c", ""),
        ("sum", [r.sum for r in records], "#555555", "6,4"),
    ]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        t = i / 5
        xv = x0 + t * span
        parts.append(f'<text x="{px(xv):.2f}" y="{top + ph + 18}" text-anchor="middle">{xv:.2f}</text>')
        parts.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.1f}</text>')
    parts.append(f'<text x="{left + pw / 2:.2f}" y="{height - 15}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.2f})">squared measure</text>'
    )
    for k, (label, ys, colour, dash) in enumerate(series):
        parts.append(polyline(ys, colour, dash))
        ly = top + 10 + 20 * k
        parts.append(
            f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 40}" y2="{ly}" '
            f'stroke="{colour}" stroke-width="2"' + (f' stroke-dasharray="{dash}"' if dash else "") + "/>"
        )
        parts.append(f'<text x="{left + pw + 46}" y="{ly + 4}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


_WRITERS = {"csv": records_to_csv, "json": records_to_json, "svg": records_to_svg}


def emit_outputs(records, outputs, out_dir: str, stem: str = "sweep") -> list[str]:
    """Write each requested format to ``out_dir/<stem>.<ext>``; returns the paths."""
    if not records:
        raise ValueError("no records to write")
    written = []
    for kind in outputs:
        path = os.path.join(out_dir, f"{stem}.{kind}")
        text = _WRITERS[kind](records)
        try:
            os.makedirs(out_dir, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OutputError(path, exc.strerror or str(exc)) from exc
        written.append(path)
    return written
