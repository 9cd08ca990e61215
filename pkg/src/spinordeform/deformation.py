"""First-order deformation ``g -> g - eps h`` of the metric and its spin-tensorial attributes.

The frame pair is held fixed while component functions change.  Every
``delta_*`` function is linear in ``eps * h``.  ``deformed_geometry`` builds the
finite-``eps`` counterpart used by the oracles, and ``first_order_check``
measures ``|X(eps) - X - delta X(eps)|`` along an ``eps`` ladder.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .connection import (
    Geometry,
    SpinConnection,
    all_spinor_derivatives,
    covariant_derivative,
    gamma_general,
    inverse_metric,
)
from .frame_geometry import Field, GeometryError, commutation_coefficients, frame_admissibility, frame_derivatives

__all__ = [
    "DEFAULT_EPS_LADDER",
    "DeformationTables",
    "DeformationTooLarge",
    "FirstOrderCheck",
    "LagrangianChain",
    "Perturbation",
    "PerturbationNotSymmetric",
    "build_tables",
    "convergence_order",
    "deformed_frame",
    "deformed_geometry",
    "delta_connection",
    "delta_connection_raw",
    "delta_gamma",
    "delta_infeld",
    "delta_lagrangian_chain",
    "delta_spin_connection",
    "first_order_check",
    "first_order_suite",
    "nabla_h",
    "preserved_deltas",
]

DEFAULT_EPS_LADDER = (1e-2, 5e-3, 2.5e-3)
SYMMETRY_TOL = 1e-12


class PerturbationNotSymmetric(GeometryError):
    pass


class DeformationTooLarge(GeometryError):
    pass


@dataclass(frozen=True)
class Perturbation:
    """Symmetric field ``h_ij`` and the deformation parameter ``eps``."""

    h: Field
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if tuple(self.h.shape) != (4, 4):
            raise ValueError("h must be a 4x4 field")

    def at(self, p, tol: float = SYMMETRY_TOL) -> np.ndarray:
        h = self.h(p)
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h - h.T)) > tol * scale:
            raise PerturbationNotSymmetric(f"perturbation not symmetric at {np.asarray(p)}")
        return h

    def with_eps(self, eps: float) -> "Perturbation":
        return replace(self, eps=eps)

    def scaled(self, alpha: float) -> "Perturbation":
        h = self.h
        grad = None if h.grad is None else (lambda x: alpha * h.grad(x))
        return Perturbation(Field(lambda x: alpha * h.fn(x), h.shape, grad, h.fd_step, h.label), self.eps)


@dataclass(frozen=True)
class DeformationTables:
    h_low: np.ndarray
    h_up: np.ndarray
    f_mixed: np.ndarray  # f[i, j] = f^i_j
    F: np.ndarray  # F[p, i] = F^p_i
    delta_g_low: np.ndarray
    delta_g_up: np.ndarray


def build_tables(geom: Geometry, pert: Perturbation, p) -> DeformationTables:
    g = geom.g(p)
    g_inv = inverse_metric(g)
    h = pert.at(p)
    f = 0.5 * g_inv @ h
    h_up = g_inv @ h @ g_inv
    h_up = 0.5 * (h_up + h_up.T)
    eps = pert.eps
    return DeformationTables(h, h_up, f, np.eye(4) + eps * f, -eps * h, eps * h_up)


def deformed_frame(geom: Geometry, pert: Perturbation, p, check: bool = True):
    """Coefficients ``C[i, j] = F^j_i`` of the deformed frame in the original
    frame, and the orientation/polarization flags of ``F``."""
    F = build_tables(geom, pert, p).F
    flags = frame_admissibility(F)
    if check and not flags.admissible:
        raise DeformationTooLarge("deformation too large: frame loses polarization/orientation")
    return F.T.copy(), flags


def delta_infeld(geom: Geometry, pert: Perturbation, p, form: str = "upper") -> np.ndarray:
    """``delta G_k``; ``form`` picks the lowered-``h`` or raised-``h`` expression."""
    t = build_tables(geom, pert, p)
    G = geom.G(p)
    g = geom.g(p)
    eps = pert.eps
    if form == "lower":
        return -0.5 * eps * np.einsum("pq,qab,pk->kab", inverse_metric(g), G, t.h_low)
    return -0.5 * eps * np.einsum("pk,qab,pq->kab", g, G, t.h_up)


def delta_gamma(geom: Geometry, pert: Perturbation, p, form: str = "upper") -> np.ndarray:
    """``delta gamma^a_{bk}`` as an array ``[k, a, b]``."""
    t = build_tables(geom, pert, p)
    gam = geom.gamma(p)
    g = geom.g(p)
    eps = pert.eps
    if form == "lower":
        return -0.5 * eps * np.einsum("pq,qab,pk->kab", inverse_metric(g), gam, t.h_low)
    return -0.5 * eps * np.einsum("pk,qab,pq->kab", g, gam, t.h_up)


def preserved_deltas() -> dict:
    """Variations of ``d``, ``H`` and ``D``: structural zeros."""
    return {"d": np.zeros((4, 4)), "H": np.zeros((4, 4)), "D": np.zeros((4, 4))}


def nabla_h(geom: Geometry, pert: Perturbation, Gamma, p) -> np.ndarray:
    """``nabla_r h_ij`` as an array ``[r, i, j]``."""
    h = pert.at(p)
    Lh = frame_derivatives(pert.h, geom.frame, p)
    return covariant_derivative(h, Lh, ("t-", "t-"), Gamma)


def delta_connection(geom: Geometry, pert: Perturbation, Gamma, p) -> np.ndarray:
    """``delta Gamma^k_ij = -eps g^kr (nabla_i h_rj + nabla_j h_ir - nabla_r h_ij) / 2``."""
    g_inv = inverse_metric(geom.g(p))
    nh = nabla_h(geom, pert, Gamma, p)  # nh[r, i, j]
    bracket = nh.transpose(1, 0, 2) + nh.transpose(2, 1, 0) - nh  # [r, i, j]
    return -0.5 * pert.eps * np.einsum("kr,rij->kij", g_inv, bracket)


def delta_connection_raw(geom: Geometry, pert: Perturbation, p) -> np.ndarray:
    """Intermediate form with plain frame derivatives of ``h`` and
    commutator terms.  Valid only when ``g`` is constant in the frame."""
    if not geom.orthonormal:
        raise ValueError("the raw variation formula assumes constant metric components")
    t = build_tables(geom, pert, p)
    g = geom.g(p)
    g_inv = inverse_metric(g)
    eps = pert.eps
    Lh = frame_derivatives(pert.h, geom.frame, p)
    bracket = Lh.transpose(1, 0, 2) + Lh.transpose(2, 1, 0) - Lh
    c = commutation_coefficients(geom.frame, p).c
    out = -0.5 * eps * np.einsum("kr,rij->kij", g_inv, bracket)
    out -= 0.5 * eps * np.einsum("sir,kr,sj->kij", c, t.h_up, g)
    out -= 0.5 * eps * np.einsum("sjr,kr,si->kij", c, t.h_up, g)
    out += 0.5 * eps * np.einsum("sir,kr,sj->kij", c, g_inv, t.h_low)
    out += 0.5 * eps * np.einsum("sjr,kr,si->kij", c, g_inv, t.h_low)
    return out


def delta_spin_connection(geom: Geometry, pert: Perturbation, Gamma, p) -> SpinConnection:
    """``delta A^a_{ib}`` from covariant derivatives of ``h``; ``delta Abar = conj``."""
    g = geom.g(p)
    g_inv = inverse_metric(g)
    gam = geom.gamma(p)
    nh_low = nabla_h(geom, pert, Gamma, p)
    # raising commutes with nabla because nabla g = 0
    nh_up = np.einsum("mp,rpq,nq->rmn", g_inv, nh_low, g_inv)
    # W[i, m, s] = sum_{r, n} g_in g^rs nabla_r h^mn
    W = pert.eps * np.einsum("in,rs,rmn->ims", g, g_inv, nh_up)
    # gamma^x_{bm} gamma^a_{xs} = (gamma_s gamma_m)[a, b]
    t1 = np.einsum("ims,mxb,sax->iab", W, gam, gam)
    t2 = np.einsum("ims,sxb,max->iab", W, gam, gam)
    return SpinConnection.from_A((t1 - t2) / 8.0)


@dataclass(frozen=True)
class LagrangianChain:
    subexpression: np.ndarray  # [n, a, b]: sum_m (dgamma_m g^mn + gamma_m dg^mn)
    subexpression_closed: np.ndarray  # [n, a, b]: eps/2 sum_m gamma_m h^mn
    delta_nabla_psi: np.ndarray  # [q, b]
    delta_nabla_conj_psi: np.ndarray  # [q, abar]


def delta_lagrangian_chain(geom: Geometry, pert: Perturbation, psi: Field, p, Gamma=None) -> LagrangianChain:
    if Gamma is None:
        Gamma = geom.gamma_coeffs(p)
    t = build_tables(geom, pert, p)
    gam = geom.gamma(p)
    g_inv = inverse_metric(geom.g(p))
    dgam = delta_gamma(geom, pert, p)
    termwise = np.einsum("mab,mn->nab", dgam, g_inv) + np.einsum("mab,mn->nab", gam, t.delta_g_up)
    closed = 0.5 * pert.eps * np.einsum("mab,mn->nab", gam, t.h_up)
    dA = delta_spin_connection(geom, pert, Gamma, p)
    value = psi(p)
    return LagrangianChain(
        termwise,
        closed,
        np.einsum("qbt,t->qb", dA.A, value),
        np.einsum("qbt,t->qb", dA.Abar, np.conj(value)),
    )


def _deformation_operator(geom: Geometry, h: Field, eps: float):
    """Closures for ``F`` and its coordinate partials."""

    def F_fn(x):
        return np.eye(4) + 0.5 * eps * np.linalg.inv(geom.g.fn(x)) @ h.fn(x)

    def F_grad(x):
        g_inv = np.linalg.inv(geom.g.fn(x))
        dg = geom.g.partials(x)
        dh = h.partials(x)
        dg_inv = -np.einsum("ab,mbc,cd->mad", g_inv, dg, g_inv)
        return 0.5 * eps * (np.einsum("mab,bc->mac", dg_inv, h.fn(x)) + np.einsum("ab,mbc->mac", g_inv, dh))

    return F_fn, F_grad


def deformed_geometry(geom: Geometry, pert: Perturbation, mode: str = "exact") -> Geometry:
    """The deformed geometry on the same frame pair.

    ``exact`` transforms the tetrad by ``F^{-1}`` so that the deformed metric,
    gamma field and Infeld-van der Waerden field are mutually consistent.
    ``linear`` uses ``g - eps h`` and ``gamma_k - eps f^q_k gamma_q``, which
    agree with ``exact`` to first order.
    """
    eps = pert.eps
    h = pert.h
    F_fn, F_grad = _deformation_operator(geom, h, eps)
    analytic = geom.tetrad.analytic and geom.g.analytic and h.analytic

    if mode == "exact":

        def tetrad_fn(x):
            return np.linalg.inv(F_fn(x)).T @ geom.tetrad.fn(x)

        def tetrad_grad(x):
            Finv = np.linalg.inv(F_fn(x))
            dFinv = -np.einsum("ab,mbc,cd->mad", Finv, F_grad(x), Finv)
            return np.einsum("mqk,qr->mkr", dFinv, geom.tetrad.fn(x)) + np.einsum(
                "qk,mqr->mkr", Finv, geom.tetrad.partials(x)
            )

        tetrad = Field(tetrad_fn, (4, 4), tetrad_grad if analytic else None, geom.tetrad.fd_step, "tetrad_hat")
        out = Geometry.from_tetrad(geom.frame, tetrad, geom.label + "+deformed")
        return out

    if mode != "linear":
        raise ValueError(f"unknown deformation mode {mode!r}")

    def g_fn(x):
        return geom.g.fn(x) - eps * h.fn(x)

    def g_grad(x):
        return geom.g.partials(x) - eps * h.partials(x)

    def _spin_table(base: Field):
        def fn(x):
            f = F_fn(x) - np.eye(4)
            return base.fn(x) - np.einsum("qk,qab->kab", f, base.fn(x))

        def grad(x):
            f = F_fn(x) - np.eye(4)
            df = F_grad(x)
            b = base.fn(x)
            db = base.partials(x)
            return db - np.einsum("mqk,qab->mkab", df, b) - np.einsum("qk,mqab->mkab", f, db)

        return Field(fn, base.shape, grad if analytic else None, base.fd_step, base.label + "_hat")

    return replace(
        geom,
        g=Field(g_fn, (4, 4), g_grad if analytic else None, geom.g.fd_step, "g_hat"),
        gamma=_spin_table(geom.gamma),
        G=_spin_table(geom.G),
        orthonormal=False,
        label=geom.label + "+linear",
    )


def convergence_order(eps_values, errors) -> float | None:
    """Least-squares slope of ``log error`` against ``log eps``."""
    eps_values = np.asarray(eps_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0.0):
        return None
    slope, _ = np.polyfit(np.log(eps_values), np.log(errors), 1)
    return float(slope)


@dataclass(frozen=True)
class FirstOrderCheck:
    name: str
    eps: tuple
    errors: tuple
    delta_norms: tuple
    order: float | None
    exact: bool

    def passed(self, min_order: float = 1.8) -> bool:
        return self.exact or (self.order is not None and self.order >= min_order)


def first_order_check(
    name: str,
    base: Callable[[], np.ndarray],
    deformed: Callable[[float], np.ndarray],
    delta: Callable[[float], np.ndarray],
    eps_ladder=DEFAULT_EPS_LADDER,
    floor: float = 1e-13,
) -> FirstOrderCheck:
    """Errors ``|X(eps) - X - delta X(eps)|`` along the ladder with a fitted order.

    When every error sits below ``floor`` times the size of the variation the
    first-order formula is exact for this input and no order is fitted.
    """
    x0 = np.asarray(base())
    errs, norms = [], []
    for eps in eps_ladder:
        d = np.asarray(delta(eps))
        errs.append(float(np.max(np.abs(np.asarray(deformed(eps)) - x0 - d))))
        norms.append(float(np.max(np.abs(d))))
    scale = max(float(np.max(np.abs(x0))), max(norms), np.finfo(float).tiny)
    exact = all(e <= floor * scale for e in errs)
    order = None if exact else convergence_order(eps_ladder, errs)
    return FirstOrderCheck(name, tuple(eps_ladder), tuple(errs), tuple(norms), order, exact)


def first_order_suite(geom: Geometry, h: Field, p, psi: Field | None = None, eps_ladder=DEFAULT_EPS_LADDER, constants=None) -> dict:
    """Run every first-order oracle at one point.  Returns name -> FirstOrderCheck."""
    Gamma = geom.gamma_coeffs(p)
    conn = geom.spin_connection(p, Gamma)
    pert = lambda eps: Perturbation(h, eps)  # noqa: E731

    checks = {}
    checks["delta_g_inv"] = first_order_check(
        "delta_g_inv",
        lambda: inverse_metric(geom.g(p)),
        lambda eps: inverse_metric(deformed_geometry(geom, pert(eps), "linear").g(p)),
        lambda eps: build_tables(geom, pert(eps), p).delta_g_up,
        eps_ladder,
    )
    checks["delta_G"] = first_order_check(
        "delta_G",
        lambda: geom.G(p),
        lambda eps: deformed_geometry(geom, pert(eps)).G(p),
        lambda eps: delta_infeld(geom, pert(eps), p),
        eps_ladder,
    )
    checks["delta_gamma"] = first_order_check(
        "delta_gamma",
        lambda: geom.gamma(p),
        lambda eps: deformed_geometry(geom, pert(eps)).gamma(p),
        lambda eps: delta_gamma(geom, pert(eps), p),
        eps_ladder,
    )
    checks["delta_Gamma"] = first_order_check(
        "delta_Gamma",
        lambda: Gamma,
        lambda eps: gamma_general(deformed_geometry(geom, pert(eps), "linear").g, geom.frame, p),
        lambda eps: delta_connection(geom, pert(eps), Gamma, p),
        eps_ladder,
    )
    checks["delta_A"] = first_order_check(
        "delta_A",
        lambda: conn.A,
        lambda eps: deformed_geometry(geom, pert(eps)).spin_connection(p).A,
        lambda eps: delta_spin_connection(geom, pert(eps), Gamma, p).A,
        eps_ladder,
    )
    if psi is not None:

        def nabla_psi(g_: Geometry):
            return all_spinor_derivatives(psi, g_.spin_connection(p), g_.frame, p)[1]

        checks["delta_nabla_psi"] = first_order_check(
            "delta_nabla_psi",
            lambda: nabla_psi(geom),
            lambda eps: nabla_psi(deformed_geometry(geom, pert(eps))),
            lambda eps: delta_lagrangian_chain(geom, pert(eps), psi, p, Gamma).delta_nabla_psi,
            eps_ladder,
        )
        if constants is not None:
            from .dirac_matter import delta_lagrangian, lagrangian_density

            checks["delta_L"] = first_order_check(
                "delta_L",
                lambda: lagrangian_density(psi, geom, constants, p).value,
                lambda eps: lagrangian_density(psi, deformed_geometry(geom, pert(eps)), constants, p).value,
                lambda eps: delta_lagrangian(psi, geom, pert(eps), constants, p).value,
                eps_ladder,
            )
    return checks

