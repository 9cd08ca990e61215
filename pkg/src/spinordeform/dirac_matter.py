"""Massive spin-1/2 matter: Dirac residual, Lagrangian density, its
variation and the energy-momentum tensor.

Units are CGS by default (``x0 = c t`` in cm).  ``PhysicalConstants.natural``
sets ``hbar = c = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import Geometry, SpinConnection, all_spinor_derivatives, inverse_metric
from .deformation import Perturbation, build_tables, delta_gamma, delta_spin_connection
from .frame_geometry import Field, GeometryError
from .spin_algebra import GAMMA

__all__ = [
    "LagrangianValue",
    "DeltaLagrangian",
    "PhysicalConstants",
    "RealityViolation",
    "StressTensor",
    "delta_lagrangian",
    "dirac_residual",
    "lagrangian_density",
    "plane_wave",
    "plane_wave_spinor",
    "stress_tensor",
    "trace_identity",
    "variational_identity",
]

# CGS values: hbar and the electron mass are CODATA 2018, G is CODATA 2006
HBAR_CGS = 1.054571817e-27  # erg s
C_CGS = 2.99792458e10  # cm / s
G_CGS = 6.67428e-8  # cm^3 g^-1 s^-2
ELECTRON_MASS_CGS = 9.1093837015e-28  # g

REALITY_TOL = 1e-12


class RealityViolation(GeometryError):
    pass


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR_CGS
    c: float = C_CGS
    G_newton: float = G_CGS
    mass: float = ELECTRON_MASS_CGS

    def __post_init__(self):
        for name in ("hbar", "c", "G_newton", "mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def natural(cls, mass: float = 1.0) -> "PhysicalConstants":
        return cls(hbar=1.0, c=1.0, G_newton=G_CGS, mass=mass)


@dataclass(frozen=True)
class _SpinorData:
    psi: np.ndarray
    nabla_psi: np.ndarray  # [q, b]
    cpsi: np.ndarray
    nabla_cpsi: np.ndarray  # [q, abar]
    gamma: np.ndarray  # [p, a, b]
    g: np.ndarray
    g_inv: np.ndarray
    D: np.ndarray


def _spinor_data(psi: Field, geom: Geometry, p, conn: SpinConnection | None = None) -> _SpinorData:
    if conn is None:
        conn = geom.spin_connection(p)
    value, nabla, cvalue, cnabla = all_spinor_derivatives(psi, conn, geom.frame, p)
    g = geom.g(p)
    return _SpinorData(value, nabla, cvalue, cnabla, geom.gamma(p), g, inverse_metric(g), geom.D(p))


def _contractions(s: _SpinorData):
    """``X[p, q] = D gamma_p conj(psi) nabla_q psi`` and ``Y[p, q] = D gamma_p psi nabla_q conj(psi)``."""
    X = np.einsum("ax,pab,x,qb->pq", s.D, s.gamma, s.cpsi, s.nabla_psi)
    Y = np.einsum("ax,pab,b,qx->pq", s.D, s.gamma, s.psi, s.nabla_cpsi)
    return X, Y


def _mass_form(s: _SpinorData) -> complex:
    return complex(np.einsum("ax,x,a->", s.D, s.cpsi, s.psi))


def _scale(s: _SpinorData, k: PhysicalConstants) -> float:
    amp = float(np.max(np.abs(s.psi)))
    grad = float(np.max(np.abs(s.nabla_psi)))
    return k.hbar * amp * grad + k.mass * k.c * amp * amp


def dirac_residual(psi: Field, geom: Geometry, k: PhysicalConstants, p, conn: SpinConnection | None = None) -> np.ndarray:
    """``i hbar gamma^a_{bp} g^{pq} nabla_q psi^b - m c psi^a``."""
    s = _spinor_data(psi, geom, p, conn)
    gamma_up = np.einsum("pab,pq->qab", s.gamma, s.g_inv)
    return 1j * k.hbar * np.einsum("qab,qb->a", gamma_up, s.nabla_psi) - k.mass * k.c * s.psi


@dataclass(frozen=True)
class LagrangianValue:
    value: float
    imag: float
    kinetic: complex
    massive: complex
    scale: float


def lagrangian_density(
    psi: Field, geom: Geometry, k: PhysicalConstants, p, conn: SpinConnection | None = None, tol: float = REALITY_TOL
) -> LagrangianValue:
    s = _spinor_data(psi, geom, p, conn)
    X, Y = _contractions(s)
    kinetic = 0.5j * k.hbar * np.sum(s.g_inv * (X - Y))
    massive = -k.mass * k.c * _mass_form(s)
    total = kinetic + massive
    scale = _scale(s, k)
    if abs(total.imag) > tol * max(scale, np.finfo(float).tiny):
        raise RealityViolation(f"reality identity violated: Im L = {total.imag:.3e} (scale {scale:.3e})")
    return LagrangianValue(float(total.real), float(total.imag), complex(kinetic), complex(massive), scale)


@dataclass(frozen=True)
class DeltaLagrangian:
    value: float
    imag: float
    with_connection_term: complex
    connection_term: complex
    scale: float  # sum of magnitudes of every contribution to the unsymmetrized route


def delta_lagrangian(
    psi: Field, geom: Geometry, pert: Perturbation, k: PhysicalConstants, p, Gamma=None, conn: SpinConnection | None = None
) -> DeltaLagrangian:
    """Symmetrized variation of the Lagrangian density.

    Also evaluates the unsymmetrized route through ``delta gamma``,
    ``delta g^-1`` and ``delta A``; ``connection_term`` is the part carried
    by ``delta A`` alone, which vanishes identically.
    """
    if Gamma is None:
        Gamma = geom.gamma_coeffs(p)
    if conn is None:
        conn = geom.spin_connection(p, Gamma)
    s = _spinor_data(psi, geom, p, conn)
    t = build_tables(geom, pert, p)
    eps_h_up = pert.eps * t.h_up
    X, Y = _contractions(s)
    symmetrized = 1j * k.hbar / 8.0 * np.sum((X + X.T - Y - Y.T) * eps_h_up)

    dgam = delta_gamma(geom, pert, p)
    dX = np.einsum("ax,pab,x,qb->pq", s.D, dgam, s.cpsi, s.nabla_psi)
    dY = np.einsum("ax,pab,b,qx->pq", s.D, dgam, s.psi, s.nabla_cpsi)
    metric_part = 0.5j * k.hbar * (np.sum(s.g_inv * (dX - dY)) + np.sum(t.delta_g_up * (X - Y)))
    dA = delta_spin_connection(geom, pert, Gamma, p)
    dnabla = np.einsum("qbt,t->qb", dA.A, s.psi)
    dnabla_c = np.einsum("qbt,t->qb", dA.Abar, s.cpsi)
    Xa = np.einsum("ax,pab,x,qb->pq", s.D, s.gamma, s.cpsi, dnabla)
    Ya = np.einsum("ax,pab,b,qx->pq", s.D, s.gamma, s.psi, dnabla_c)
    connection_term = 0.5j * k.hbar * np.sum(s.g_inv * (Xa - Ya))
    parts = (s.g_inv * dX, s.g_inv * dY, t.delta_g_up * X, t.delta_g_up * Y, s.g_inv * Xa, s.g_inv * Ya)
    scale = 0.5 * k.hbar * sum(float(np.sum(np.abs(q))) for q in parts)
    return DeltaLagrangian(
        float(symmetrized.real),
        float(symmetrized.imag),
        complex(metric_part + connection_term),
        complex(connection_term),
        scale,
    )


@dataclass(frozen=True)
class StressTensor:
    T: np.ndarray
    imag_residue: float
    asymmetry: float
    scale: float


def stress_tensor(psi: Field, geom: Geometry, k: PhysicalConstants, p, conn: SpinConnection | None = None) -> StressTensor:
    """Energy-momentum tensor ``T_ij`` at ``p``.

    ``imag_residue`` is ``max |Im T_ij|`` relative to the natural scale
    ``c (hbar |psi| |nabla psi| + m c |psi|^2)``.
    """
    s = _spinor_data(psi, geom, p, conn)
    X, Y = _contractions(s)
    ihc = 1j * k.hbar * k.c
    T = ihc * (X + X.T) / 4.0 - ihc * (Y + Y.T) / 4.0
    T = T + (ihc / 2.0 * np.sum(s.g_inv * Y)) * s.g
    T = T - (ihc / 2.0 * np.sum(s.g_inv * X)) * s.g
    T = T + (k.mass * k.c**2 * _mass_form(s)) * s.g
    scale = k.c * _scale(s, k)
    return StressTensor(
        T.real.copy(),
        float(np.max(np.abs(T.imag))) / max(scale, np.finfo(float).tiny),
        float(np.max(np.abs(T.real - T.real.T))),
        scale,
    )


def variational_identity(psi: Field, geom: Geometry, pert: Perturbation, k: PhysicalConstants, p) -> dict:
    """Both sides of ``T_ij eps h^ij = 2c (delta L - L g_ij eps h^ij / 2)``.

    ``delta L`` comes from the unsymmetrized route (with the ``delta A``
    term), so the two sides are computed along different paths.  Residuals
    are relative to the summed magnitudes of all contributions, since the
    ``delta A`` pieces cancel and can dwarf the result when ``h`` varies
    much faster than ``psi``.
    """
    Gamma = geom.gamma_coeffs(p)
    conn = geom.spin_connection(p, Gamma)
    T = stress_tensor(psi, geom, k, p, conn).T
    L = lagrangian_density(psi, geom, k, p, conn).value
    dL = delta_lagrangian(psi, geom, pert, k, p, Gamma, conn)
    t = build_tables(geom, pert, p)
    eps_h_up = pert.eps * t.h_up
    g = geom.g(p)
    lhs = float(np.sum(T * eps_h_up))
    volume = float(np.sum(g * eps_h_up))
    rhs = 2.0 * k.c * (dL.with_connection_term.real - 0.5 * L * volume)
    scale = float(np.sum(np.abs(T * eps_h_up))) + 2.0 * k.c * (dL.scale + 0.5 * abs(L * volume))
    tiny = np.finfo(float).tiny
    return {
        "lhs": lhs,
        "rhs": rhs,
        "residual": abs(lhs - rhs) / max(scale, tiny),
        "symmetrized_vs_unsymmetrized": abs(dL.value - dL.with_connection_term.real) / max(dL.scale, tiny),
    }


def trace_identity(psi: Field, geom: Geometry, k: PhysicalConstants, p) -> dict:
    """``g^ij T_ij`` against ``m c^2 D psibar psi`` (equal on shell)."""
    conn = geom.spin_connection(p)
    s = _spinor_data(psi, geom, p, conn)
    T = stress_tensor(psi, geom, k, p, conn).T
    trace = float(np.sum(s.g_inv * T))
    expected = float((k.mass * k.c**2 * _mass_form(s)).real)
    return {"trace": trace, "expected": expected, "residual": abs(trace - expected) / max(abs(expected), np.finfo(float).tiny)}


def plane_wave_spinor(p3, k: PhysicalConstants, branch: int = 0):
    """Positive-energy amplitude ``u`` and ``p0 = E / c`` for 3-momentum ``p3``.

    ``u`` spans the range of ``p0 gamma_0 + p.gamma + m c``, which is the
    kernel of the Dirac symbol; ``branch`` 0/1 selects the spin state.
    """
    if branch not in (0, 1):
        raise ValueError("branch must be 0 or 1")
    p3 = np.asarray(p3, dtype=float)
    mc = k.mass * k.c
    p0 = float(np.sqrt(mc * mc + p3 @ p3))
    symbol = p0 * GAMMA[0] + np.einsum("j,jab->ab", p3, GAMMA[1:])
    u = (symbol + mc * np.eye(4))[:, branch]
    return u / np.linalg.norm(u), p0


def plane_wave(p3, k: PhysicalConstants, branch: int = 0, amplitude: complex = 1.0) -> Field:
    """Flat-space solution ``u exp(-i (p0 x0 - p.x) / hbar)`` with ``x0 = c t``."""
    u, p0 = plane_wave_spinor(p3, k, branch)
    u = amplitude * u
    wave = np.concatenate([[-p0], np.asarray(p3, dtype=float)]) / k.hbar

    def fn(x):
        return u * np.exp(1j * (wave @ x))

    def grad(x):
        return 1j * wave[:, None] * fn(x)[None, :]

    return Field(fn, (4,), grad, label="plane_wave")

