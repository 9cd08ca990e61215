"""Per-point check suites behind the CLI subcommands.

Each suite returns a list of ``Record``.  A record passes when its residual
is at most the tolerance (``bound="max"``) or at least it (``bound="min"``,
used for convergence orders and non-degeneracy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import (
    concordance_residuals,
    cancellation_residuals,
    gamma_orthonormal,
    spin_connection_orthonormal,
    torsion_residual,
)
from .deformation import (
    Perturbation,
    build_tables,
    deformed_frame,
    delta_connection,
    delta_gamma,
    delta_infeld,
    delta_spin_connection,
    first_order_suite,
)
from .dirac_matter import dirac_residual, lagrangian_density, stress_tensor, trace_identity, variational_identity
from .frame_geometry import DEGENERACY_TOL, FrameField, GeometryError, commutation_coefficients
from .scenario import Scenario

__all__ = ["Record", "SUITES", "run_suite"]


@dataclass(frozen=True)
class Record:
    name: str
    point_index: int
    point: tuple
    value: object
    residual: float | None
    tolerance: float
    bound: str = "max"
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.error is not None or self.residual is None:
            return self.error is None and self.bound == "min"
        if not np.isfinite(self.residual):
            return False
        return self.residual <= self.tolerance if self.bound == "max" else self.residual >= self.tolerance


class _Ctx:
    """Shared per-point quantities, computed lazily once."""

    def __init__(self, sc: Scenario, index: int, x: np.ndarray, tol_scale: float):
        self.sc = sc
        self.index = index
        self.x = x
        self.tol_scale = tol_scale
        self._cache = {}

    def tol(self, key):
        return self.sc.tolerance(key, self.tol_scale)

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def Gamma(self):
        return self.get("Gamma", lambda: self.sc.geometry.gamma_coeffs(self.x))

    @property
    def conn(self):
        return self.get("conn", lambda: self.sc.geometry.spin_connection(self.x, self.Gamma))

    @property
    def c(self):
        return self.get("c", lambda: commutation_coefficients(self.sc.geometry.frame, self.x).c)

    def record(self, name, value, residual, tol_key, bound="max", tolerance=None):
        tol = self.tol(tol_key) if tolerance is None else tolerance
        res = None if residual is None else float(residual)
        return Record(name, self.index, tuple(self.x.tolist()), value, res, tol, bound)

    def failure(self, name, tol_key, exc):
        return Record(name, self.index, tuple(self.x.tolist()), None, None, self.tol(tol_key), "max", str(exc))


def _rel(diff, ref) -> float:
    return float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(ref))))


def frame_suite(ctx: _Ctx) -> list:
    geom = ctx.sc.geometry
    E = geom.frame.coeffs(ctx.x)
    scale = float(np.prod(np.linalg.norm(E, axis=1)))
    normalized_det = abs(float(np.linalg.det(E))) / scale if scale > 0 else 0.0
    out = [ctx.record("frame.nondegenerate", float(np.linalg.det(E)), normalized_det, "frame", "min", DEGENERACY_TOL)]
    if geom.frame.coeffs.analytic:
        fd_frame = FrameField(geom.frame.coeffs.without_grad(), geom.frame.label)
        c_fd = commutation_coefficients(fd_frame, ctx.x).c
        out.append(ctx.record("frame.commutators_fd", float(np.max(np.abs(ctx.c))), _rel(ctx.c - c_fd, ctx.c), "fd_agreement"))
    flags = geom.tetrad_flags(ctx.x)
    value = {"det_positive": flags.det_positive, "time_component_positive": flags.time_component_positive}
    out.append(ctx.record("frame.tetrad_admissible", value, 0.0 if flags.admissible else 1.0, "frame", tolerance=0.0))
    return out


def connection_suite(ctx: _Ctx) -> list:
    geom = ctx.sc.geometry
    Gamma, c = ctx.Gamma, ctx.c
    out = [ctx.record("connection.torsion", float(np.max(np.abs(Gamma))), torsion_residual(Gamma, c) / max(1.0, np.max(np.abs(c))), "torsion")]
    A = ctx.conn.A
    if ctx.sc.flat:
        out.append(ctx.record("connection.flat", None, max(np.max(np.abs(Gamma)), np.max(np.abs(A))), "flat"))
    if geom.orthonormal:
        Gamma_o = gamma_orthonormal(c)
        A_o = spin_connection_orthonormal(Gamma_o).A
        out.append(ctx.record("connection.reduction_Gamma", None, _rel(Gamma - Gamma_o, Gamma_o), "reduction"))
        out.append(ctx.record("connection.reduction_A", None, _rel(A - A_o, A_o), "reduction"))
        r1, r2 = cancellation_residuals(Gamma_o)
        out.append(ctx.record("connection.cancellation_gamma", None, r1 / max(1.0, np.max(np.abs(Gamma_o))), "cancellation"))
        out.append(ctx.record("connection.cancellation_metric", None, r2 / max(1.0, np.max(np.abs(Gamma_o))), "cancellation"))
    return out


def concordance_suite(ctx: _Ctx) -> list:
    res = concordance_residuals(ctx.sc.geometry, ctx.x, ctx.Gamma, ctx.conn)
    return [ctx.record(f"concordance.{name}", None, float(np.max(np.abs(r))), "concordance") for name, r in res.items()]


def _delta_tables(geom, pert, Gamma, x):
    t = build_tables(geom, pert, x)
    return {
        "delta_g_inv": t.delta_g_up,
        "delta_G": delta_infeld(geom, pert, x),
        "delta_gamma": delta_gamma(geom, pert, x),
        "delta_Gamma": delta_connection(geom, pert, Gamma, x),
        "delta_A": delta_spin_connection(geom, pert, Gamma, x).A,
    }


def deform_suite(ctx: _Ctx) -> list:
    sc = ctx.sc
    if sc.h is None:
        return []
    geom, x = sc.geometry, ctx.x
    out = []
    pert = Perturbation(sc.h, max(sc.eps_ladder))
    _, flags = deformed_frame(geom, pert, x, check=False)
    value = {"det_positive": flags.det_positive, "time_component_positive": flags.time_component_positive}
    out.append(ctx.record("deform.frame_admissible", value, 0.0 if flags.admissible else 1.0, "frame", tolerance=0.0))
    if not flags.admissible:
        return out

    base = _delta_tables(geom, pert, ctx.Gamma, x)
    doubled = _delta_tables(geom, pert.scaled(2.0), ctx.Gamma, x)
    lin = max(_rel(doubled[n] - 2.0 * base[n], base[n]) for n in base)
    out.append(ctx.record("deform.linearity", None, lin, "linearity"))

    k = sc.constants if sc.psi is not None else None
    checks = first_order_suite(geom, sc.h, x, sc.psi, sc.eps_ladder, k)
    min_order = ctx.tol("min_order")
    for name, chk in checks.items():
        value = {"eps": list(chk.eps), "errors": list(chk.errors), "exact": chk.exact}
        out.append(ctx.record(f"deform.{name}", value, chk.order, "min_order", "min", min_order))
    return out


def stress_suite(ctx: _Ctx) -> list:
    sc = ctx.sc
    if sc.psi is None:
        return []
    geom, x, k = sc.geometry, ctx.x, sc.constants
    L = lagrangian_density(sc.psi, geom, k, x, ctx.conn, tol=np.inf)
    out = [ctx.record("lagrangian.imag", L.value, abs(L.imag) / max(L.scale, np.finfo(float).tiny), "lagrangian_imag")]
    st = stress_tensor(sc.psi, geom, k, x, ctx.conn)
    out.append(ctx.record("stress.imag", st.T.tolist(), st.imag_residue, "stress_imag"))
    out.append(ctx.record("stress.symmetry", None, st.asymmetry / max(1.0, float(np.max(np.abs(st.T)))), "stress_symmetry"))
    if sc.h is not None:
        vi = variational_identity(sc.psi, geom, Perturbation(sc.h, min(sc.eps_ladder)), k, x)
        out.append(ctx.record("stress.variational", {"lhs": vi["lhs"], "rhs": vi["rhs"]}, vi["residual"], "variational"))
        out.append(ctx.record("lagrangian.delta_routes", None, vi["symmetrized_vs_unsymmetrized"], "variational"))
    if sc.on_shell:
        tr = trace_identity(sc.psi, geom, k, x)
        out.append(ctx.record("stress.trace", {"trace": tr["trace"], "expected": tr["expected"]}, tr["residual"], "trace"))
    return out


def dirac_suite(ctx: _Ctx) -> list:
    sc = ctx.sc
    if sc.psi is None:
        return []
    geom, x, k = sc.geometry, ctx.x, sc.constants
    r = dirac_residual(sc.psi, geom, k, x, ctx.conn)
    amp = float(np.max(np.abs(sc.psi(x))))
    rel = float(np.max(np.abs(r))) / (k.mass * k.c * amp) if amp > 0 else float(np.max(np.abs(r)))
    out = [ctx.record("dirac.residual", [complex(v) for v in r], rel, "dirac")]
    L = lagrangian_density(sc.psi, geom, k, x, ctx.conn, tol=np.inf)
    out.append(ctx.record("dirac.onshell_lagrangian", L.value, abs(L.value) / max(L.scale, np.finfo(float).tiny), "onshell_lagrangian"))
    return out


def _full(ctx: _Ctx) -> list:
    out = frame_suite(ctx) + connection_suite(ctx) + concordance_suite(ctx) + deform_suite(ctx) + stress_suite(ctx)
    if ctx.sc.on_shell:
        out += dirac_suite(ctx)
    return out


SUITES = {
    "frame-check": frame_suite,
    "connection": connection_suite,
    "concordance": concordance_suite,
    "deform": deform_suite,
    "stress-tensor": stress_suite,
    "dirac-residual": dirac_suite,
    "full-suite": _full,
}


def run_suite(name: str, sc: Scenario, tol_scale: float = 1.0) -> list:
    """Records for every sample point, ordered by point index then name."""
    suite = SUITES[name]
    records = []
    for i, x in enumerate(sc.points):
        ctx = _Ctx(sc, i, np.asarray(x, dtype=float), tol_scale)
        try:
            records.extend(suite(ctx))
        except GeometryError as exc:
            records.append(ctx.failure(f"{name}.error", "frame", exc))
    return sorted(records, key=lambda r: (r.point_index, r.name))
