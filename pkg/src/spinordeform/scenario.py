"""JSON scenario documents: parsing, validation and the builtin scenarios.

A scenario is parsed completely (every expression compiled, every point
drawn, ``h`` checked for symmetry at every point) before any check runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .connection import Geometry
from .deformation import DEFAULT_EPS_LADDER
from .dirac_matter import PhysicalConstants, plane_wave
from .expr import ExpressionError, parse, parse_matrix
from .frame_geometry import Field, FrameField, coordinate_frame
from .rng import SplitMix64
from .samplers import random_points, random_spinor_field, random_symmetric_field

__all__ = [
    "BUILTIN_SCENARIOS",
    "DEFAULT_TOLERANCES",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
]

BUILTIN_SCENARIOS = ("flat-holonomic", "exp-scale-frame", "conformal-coordinate")

DEFAULT_TOLERANCES = {
    "frame": 1e-12,
    "fd_agreement": 1e-6,
    "torsion": 1e-12,
    "reduction": 1e-8,
    "cancellation": 1e-12,
    "flat": 1e-12,
    "concordance": 1e-8,
    "min_order": 1.8,
    "linearity": 1e-12,
    "lagrangian_imag": 1e-12,
    "stress_imag": 1e-12,
    "stress_symmetry": 1e-14,
    "variational": 1e-10,
    "dirac": 1e-8,
    "onshell_lagrangian": 1e-8,
    "trace": 1e-8,
}

_TOP_KEYS = {"name", "domain", "frame", "metric", "perturbation", "psi", "constants", "points", "tolerances", "seed"}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    geometry: Geometry
    points: np.ndarray
    constants: PhysicalConstants
    h: Field | None
    eps_ladder: tuple
    psi: Field | None
    psi_kind: str
    tolerances: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def flat(self) -> bool:
        return self.geometry.frame.holonomic and self.geometry.orthonormal

    @property
    def on_shell(self) -> bool:
        # plane waves solve the Dirac equation only in flat space
        return self.flat and self.psi_kind in ("plane_wave", "zero")

    def tolerance(self, key: str, scale: float = 1.0) -> float:
        value = self.tolerances[key]
        return value if key == "min_order" else value * scale


def _require(cond, message):
    if not cond:
        raise ScenarioError(message)


def _float_list(value, n, what):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: expected {n} numbers") from exc
    _require(arr.shape == (n,), f"{what}: expected {n} numbers")
    _require(bool(np.all(np.isfinite(arr))), f"{what}: numbers must be finite")
    return arr


def _matrix_field(rows, label, what) -> Field:
    try:
        return Field.from_expressions(parse_matrix(rows), label=label)
    except ExpressionError as exc:
        raise ScenarioError(f"{what}: {exc}") from exc


def _frame(block) -> FrameField:
    if block in (None, "coordinate"):
        return coordinate_frame()
    _require(isinstance(block, dict) and "coeffs" in block, "frame: expected \"coordinate\" or {\"coeffs\": 4x4 expressions}")
    coeffs = _matrix_field(block["coeffs"], block.get("label", "frame"), "frame")
    return FrameField(coeffs, block.get("label", "frame"), holonomic=False)


def _geometry(frame: FrameField, block, name) -> Geometry:
    block = block or {"kind": "orthonormal"}
    _require(isinstance(block, dict), "metric: expected an object")
    kind = block.get("kind", "orthonormal")
    if kind == "orthonormal":
        return Geometry.orthonormal_frame(frame, name)
    if kind == "tetrad":
        _require("V" in block, "metric: tetrad needs \"V\"")
        return Geometry.from_tetrad(frame, _matrix_field(block["V"], "tetrad", "metric.V"), name)
    if kind == "components":
        _require("g" in block, "metric: components need \"g\"")
        return Geometry.from_metric(frame, _matrix_field(block["g"], "g", "metric.g"), name)
    raise ScenarioError(f"metric: unknown kind {kind!r}")


def _constants(block, natural_units: bool) -> PhysicalConstants:
    block = dict(block or {})
    units = block.pop("units", "cgs")
    _require(units in ("cgs", "natural"), f"constants: unknown units {units!r}")
    unknown = set(block) - {"hbar", "c", "G_newton", "mass"}
    _require(not unknown, f"constants: unknown keys {sorted(unknown)}")
    try:
        if natural_units or units == "natural":
            return PhysicalConstants.natural(float(block.get("mass", 1.0)) if units == "natural" else 1.0)
        return PhysicalConstants(**{k: float(v) for k, v in block.items()})
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"constants: {exc}") from exc


def _points(block, domain, rng) -> np.ndarray:
    lo, hi = domain
    if isinstance(block, dict):
        n = block.get("random")
        _require(isinstance(n, int) and n > 0, "points: \"random\" must be a positive integer")
        return random_points(rng, lo, hi, n)
    _require(isinstance(block, list) and block, "points: expected a list of points or {\"random\": n}")
    pts = np.array([_float_list(p, 4, "points") for p in block])
    _require(bool(np.all((pts >= lo) & (pts <= hi))), "points: sample point outside the chart domain")
    return pts


def _perturbation(block, rng):
    if block is None:
        return None, DEFAULT_EPS_LADDER
    _require(isinstance(block, dict), "perturbation: expected an object")
    eps = tuple(float(e) for e in block.get("eps", DEFAULT_EPS_LADDER))
    _require(len(eps) >= 2 and all(e > 0 for e in eps), "perturbation: eps ladder needs at least two positive values")
    if block.get("random"):
        return random_symmetric_field(rng, float(block.get("amplitude", 0.3))), eps
    _require("h" in block, "perturbation: needs \"h\" expressions or \"random\": true")
    return _matrix_field(block["h"], "h", "perturbation.h"), eps


def _psi(block, k: PhysicalConstants, rng):
    if block is None:
        return None, "none"
    _require(isinstance(block, dict), "psi: expected an object")
    kind = block.get("kind")
    if kind == "zero":
        return Field.constant(np.zeros(4, dtype=complex), "psi0"), "zero"
    if kind == "plane_wave":
        branch = block.get("branch", 0)
        _require(branch in (0, 1), "psi: branch must be 0 or 1")
        if "momentum_over_mc" in block:
            p3 = k.mass * k.c * _float_list(block["momentum_over_mc"], 3, "psi.momentum_over_mc")
        else:
            _require("momentum" in block, "psi: plane wave needs \"momentum\" or \"momentum_over_mc\"")
            p3 = _float_list(block["momentum"], 3, "psi.momentum")
        return plane_wave(p3, k, branch), "plane_wave"
    if kind == "expressions":
        comps = block.get("components")
        _require(isinstance(comps, list) and len(comps) == 4, "psi: expected 4 [re, im] expression pairs")
        try:
            pairs = [(parse(c[0]), parse(c[1])) for c in comps]
        except (ExpressionError, TypeError, IndexError) as exc:
            raise ScenarioError(f"psi: {exc}") from exc
        re_nodes = np.array([p[0] for p in pairs], dtype=object)
        im_nodes = np.array([p[1] for p in pairs], dtype=object)
        return Field.from_complex_expressions(re_nodes, im_nodes, "psi"), "expressions"
    if kind == "random":
        return random_spinor_field(rng, float(block.get("amplitude", 1.0))), "random"
    raise ScenarioError(f"psi: unknown kind {kind!r}")


def parse_scenario(doc: dict, *, seed: int | None = None, natural_units: bool = False, eps=None) -> Scenario:
    """Validate ``doc`` and build every field it describes.

    ``seed``, ``natural_units`` and ``eps`` override the document.  Random
    draws come from one SplitMix64 stream in the order points, ``h``, ``psi``.
    """
    _require(isinstance(doc, dict), "scenario: expected a JSON object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"scenario: unknown keys {sorted(unknown)}")
    name = str(doc.get("name", "scenario"))
    seed = int(doc.get("seed", 0)) if seed is None else int(seed)
    _require(seed >= 0, "seed must be non-negative")
    rng = SplitMix64(seed)

    domain = doc.get("domain", {"lo": [-1.0] * 4, "hi": [1.0] * 4})
    _require(isinstance(domain, dict), "domain: expected {\"lo\": [...], \"hi\": [...]}")
    lo = _float_list(domain.get("lo"), 4, "domain.lo")
    hi = _float_list(domain.get("hi"), 4, "domain.hi")
    _require(bool(np.all(lo < hi)), "domain: lo must be below hi")

    frame = _frame(doc.get("frame"))
    geometry = _geometry(frame, doc.get("metric"), name)
    k = _constants(doc.get("constants"), natural_units)
    points = _points(doc.get("points", {"random": 4}), (lo, hi), rng)
    h, ladder = _perturbation(doc.get("perturbation"), rng)
    if eps is not None:
        ladder = tuple(float(e) for e in eps)
        _require(len(ladder) >= 2 and all(e > 0 for e in ladder), "--eps needs at least two positive values")
    psi, psi_kind = _psi(doc.get("psi"), k, rng)

    tolerances = dict(DEFAULT_TOLERANCES)
    overrides = doc.get("tolerances", {})
    _require(isinstance(overrides, dict), "tolerances: expected an object")
    bad = set(overrides) - set(DEFAULT_TOLERANCES)
    _require(not bad, f"tolerances: unknown keys {sorted(bad)}")
    tolerances.update({key: float(v) for key, v in overrides.items()})

    if h is not None:
        for x in points:
            hv = h(x)
            _require(bool(np.all(np.isfinite(hv))), f"perturbation: h not finite at {x.tolist()}")
            _require(np.max(np.abs(hv - hv.T)) <= 1e-12 * max(1.0, np.max(np.abs(hv))), "perturbation: h is not symmetric")
    for x in points:
        try:
            values = [frame.coeffs(x), geometry.g(x)] + ([] if psi is None else [psi(x)])
        except (ArithmeticError, ValueError) as exc:
            raise ScenarioError(f"cannot evaluate scenario fields at {x.tolist()}: {exc}") from exc
        _require(all(np.all(np.isfinite(v)) for v in values), f"scenario fields not finite at {x.tolist()}")

    return Scenario(name, geometry, points, k, h, ladder, psi, psi_kind, tolerances, seed)


def _builtin_text(name: str) -> str:
    return resources.files("spinordeform.builtin").joinpath(f"{name}.json").read_text()


def load_scenario(source: str, **overrides) -> Scenario:
    """Load a builtin scenario by name or a scenario file by path."""
    if source in BUILTIN_SCENARIOS:
        text = _builtin_text(source)
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {source!r}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return parse_scenario(doc, **overrides)
