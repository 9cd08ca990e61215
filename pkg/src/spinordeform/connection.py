"""Metric connection ``(Gamma, A, Abar)`` on the Dirac bundle.

Array layouts:

* ``Gamma[k, i, j] = Gamma^k_{ij}``, so ``nabla_{Upsilon_i} Upsilon_j = Gamma^k_{ij} Upsilon_k``
* ``A[i, a, b] = A^a_{ib}`` (spinor indices 0-based)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame_geometry import (
    CommutationCoeffs,
    Field,
    FrameField,
    GeometryError,
    as_array,
    commutation_coefficients,
    frame_admissibility,
    frame_derivatives,
)
from .spin_algebra import D4, DIRAC_FORM, ETA, GAMMA, H, SIGMA

__all__ = [
    "Geometry",
    "MetricNotInvertible",
    "SpinConnection",
    "SpinorMetricDegenerate",
    "cancellation_residuals",
    "concordance_residuals",
    "covariant_derivative",
    "covariant_derivative_spinor",
    "covariant_derivative_tensor2",
    "gamma_general",
    "gamma_orthonormal",
    "inverse_metric",
    "spin_connection_general",
    "spin_connection_orthonormal",
    "torsion_residual",
]

INVERTIBILITY_TOL = 1e-12


class MetricNotInvertible(GeometryError):
    pass


class SpinorMetricDegenerate(GeometryError):
    pass


def _checked_inverse(M, tol, exc, what):
    M = np.asarray(M)
    scale = float(np.prod(np.linalg.norm(M, axis=1)))
    det = np.linalg.det(M)
    if scale == 0.0 or not abs(det) >= tol * scale:
        raise exc(f"{what} not invertible (det={det:.3e})")
    return np.linalg.inv(M)


def inverse_metric(g) -> np.ndarray:
    return _checked_inverse(g, INVERTIBILITY_TOL, MetricNotInvertible, "metric")


@dataclass(frozen=True)
class SpinConnection:
    A: np.ndarray
    Abar: np.ndarray

    @classmethod
    def from_A(cls, A) -> "SpinConnection":
        A = np.asarray(A, dtype=complex)
        return cls(A, np.conj(A))

    def __add__(self, other: "SpinConnection") -> "SpinConnection":
        return SpinConnection(self.A + other.A, self.Abar + other.Abar)

    def __sub__(self, other: "SpinConnection") -> "SpinConnection":
        return SpinConnection(self.A - other.A, self.Abar - other.Abar)


def gamma_from_commutators(c: np.ndarray, g: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Commutation-coefficient part of the connection components."""
    return (
        0.5 * c
        - 0.5 * np.einsum("sir,kr,sj->kij", c, g_inv, g)
        - 0.5 * np.einsum("sjr,kr,si->kij", c, g_inv, g)
    )


def gamma_general(g_field: Field, frame: FrameField, p) -> np.ndarray:
    """Connection components in an arbitrary frame for an arbitrary metric."""
    g = g_field(p)
    g_inv = inverse_metric(g)
    Lg = frame_derivatives(g_field, frame, p)  # Lg[i, r, j] = L_i(g_rj)
    # bracket[r, i, j] = L_i(g_rj) + L_j(g_ir) - L_r(g_ij)
    bracket = Lg.transpose(1, 0, 2) + Lg.transpose(2, 1, 0) - Lg
    christoffel = 0.5 * np.einsum("kr,rij->kij", g_inv, bracket)
    c = commutation_coefficients(frame, p).c
    return christoffel + gamma_from_commutators(c, g, g_inv)


def gamma_orthonormal(c, g=ETA) -> np.ndarray:
    """Connection components of an orthonormal frame from its commutators."""
    if isinstance(c, CommutationCoeffs):
        c = c.c
    g = np.asarray(g, dtype=float)
    return gamma_from_commutators(np.asarray(c, dtype=float), g, np.linalg.inv(g))


def torsion_residual(Gamma: np.ndarray, c) -> float:
    """Max ``|Gamma^k_ij - Gamma^k_ji - c^k_ij|``; zero for the metric connection."""
    if isinstance(c, CommutationCoeffs):
        c = c.c
    return float(np.max(np.abs(Gamma - Gamma.transpose(0, 2, 1) - c)))


def spin_connection_general(d: Field, H_: Field, gamma: Field, g: Field, Gamma, frame: FrameField, p) -> SpinConnection:
    """Dirac-bundle connection components from all five terms.

    Fields give ``d_ab``, ``H^a_b``, ``gamma[m, a, b]`` and ``g_ij``; the
    frame derivatives of each enter the first four terms.
    """
    d_p = d(p)
    d_dual = _checked_inverse(d_p, INVERTIBILITY_TOL, SpinorMetricDegenerate, "spinor metric")
    H_p = H_(p)
    gam = gamma(p)
    g_p = g(p)
    g_inv = inverse_metric(g_p)

    Ld = frame_derivatives(d, frame, p)
    LH = frame_derivatives(H_, frame, p)
    Lgam = frame_derivatives(gamma, frame, p)
    Lg = frame_derivatives(g, frame, p)
    Lg_inv = -np.einsum("ab,ibc,cd->iad", g_inv, Lg, g_inv)

    eye = np.eye(4)
    t1 = np.einsum("ixy,yx->i", Ld, d_dual)[:, None, None] * eye / 8.0
    t2 = -np.einsum("ixy,yd,xd->i", Ld, d_dual, H_p)[:, None, None] * H_p / 8.0
    t3 = -np.einsum("bc,icd,dr,ra->iab", d_p, LH, H_p, d_dual) / 4.0
    # L_i(gamma^alpha_{bm} g^{mn}) by the product rule
    Lprod = np.einsum("imxb,mn->inxb", Lgam, g_inv) + np.einsum("mxb,imn->inxb", gam, Lg_inv)
    t4 = np.einsum("inxb,nax->iab", Lprod, gam) / 4.0
    t5 = np.einsum("mxb,nis,ms,nax->iab", gam, Gamma, g_inv, gam) / 4.0
    return SpinConnection.from_A(t1 + t2 + t3 + t4 + t5)


def spin_connection_orthonormal(Gamma, gamma=GAMMA, g=ETA) -> SpinConnection:
    """``A^a_{ib} = sum gamma^alpha_{bm} Gamma^n_{is} g^{ms} gamma^a_{alpha n} / 4``."""
    g_inv = np.linalg.inv(np.asarray(g, dtype=float))
    A = np.einsum("mxb,nis,ms,nax->iab", gamma, Gamma, g_inv, gamma) / 4.0
    return SpinConnection.from_A(A)


def _axis_operator(kind: str, Gamma, conn: SpinConnection) -> np.ndarray:
    """Correction matrix ``M[i, new, old]`` for one index of a spin-tensor."""
    if kind == "s+":
        return conn.A
    if kind == "s-":
        return -conn.A.transpose(0, 2, 1)
    if kind == "c+":
        return conn.Abar
    if kind == "c-":
        return -conn.Abar.transpose(0, 2, 1)
    if kind == "t+":
        return Gamma.transpose(1, 0, 2)
    if kind == "t-":
        return -Gamma.transpose(1, 2, 0)
    raise ValueError(f"unknown index kind {kind!r}")


def covariant_derivative(value, derivs, layout, Gamma, conn: SpinConnection | None = None) -> np.ndarray:
    """Covariant derivatives ``nabla_i X`` for all ``i`` of a spin-tensor.

    ``derivs[i]`` is ``L_{Upsilon_i} X``.  ``layout`` names each axis of
    ``value``: ``s+``/``s-`` upper/lower spinor, ``c+``/``c-`` upper/lower
    conjugate spinor, ``t+``/``t-`` upper/lower spacial.  Each index picks
    up one connection term.
    """
    value = np.asarray(value)
    if len(layout) != value.ndim:
        raise ValueError(f"layout {layout} does not match value of rank {value.ndim}")
    out = np.array(derivs, dtype=np.result_type(derivs, value, complex if conn is not None else float))
    for axis, kind in enumerate(layout):
        if kind[0] in "sc" and conn is None:
            raise ValueError("spinor indices need a spin connection")
        M = _axis_operator(kind, Gamma, conn)
        term = np.tensordot(M, value, axes=([2], [axis]))  # (i, new, remaining...)
        out = out + np.moveaxis(term, 1, axis + 1)
    return out


def covariant_derivative_tensor2(h_field: Field, Gamma, frame: FrameField, i: int, p) -> np.ndarray:
    """``nabla_i h_jk = L_i(h_jk) - Gamma^s_ij h_sk - Gamma^s_ik h_js``."""
    h = h_field(p)
    Lh = frame_derivatives(h_field, frame, p)
    return covariant_derivative(h, Lh, ("t-", "t-"), Gamma)[i]


def covariant_derivative_spinor(psi: Field, conn: SpinConnection, frame: FrameField, q: int, p, conjugate: bool = False):
    """``nabla_q psi^b = L_q(psi^b) + A^b_{q theta} psi^theta``.

    With ``conjugate=True`` the conjugate components are differentiated
    with ``Abar`` instead.
    """
    value = psi(p)
    L = frame_derivatives(psi, frame, p)
    if conjugate:
        value, L = np.conj(value), np.conj(L)
        return L[q] + conn.Abar[q] @ value
    return L[q] + conn.A[q] @ value


def all_spinor_derivatives(psi: Field, conn: SpinConnection, frame: FrameField, p):
    """``(psi, nabla psi, conj psi, nabla conj psi)`` with derivative index first."""
    value = psi(p)
    L = frame_derivatives(psi, frame, p)
    nabla = L + np.einsum("qbt,t->qb", conn.A, value)
    cvalue = np.conj(value)
    cnabla = np.conj(L) + np.einsum("qbt,t->qb", conn.Abar, cvalue)
    return value, nabla, cvalue, cnabla


LAYOUTS = {
    "d": ("s-", "s-"),
    "H": ("s+", "s-"),
    "D": ("s-", "c-"),
    "gamma": ("t-", "s+", "s-"),
    "g": ("t-", "t-"),
}


@dataclass(frozen=True)
class Geometry:
    """A frame plus all spin-tensorial tables expressed in it.

    ``tetrad[k, q]`` expresses frame vector ``k`` in a positively polarized
    right orthonormal frame; ``g = tetrad eta tetrad^T`` and
    ``gamma_k = sum_q tetrad[k, q] m_q``.
    """

    frame: FrameField
    g: Field
    gamma: Field
    G: Field
    d: Field
    H: Field
    D: Field
    tetrad: Field
    orthonormal: bool = False
    label: str = ""

    @classmethod
    def orthonormal_frame(cls, frame: FrameField, label: str = "") -> "Geometry":
        return cls(
            frame,
            Field.constant(ETA, "g"),
            Field.constant(GAMMA, "gamma"),
            Field.constant(SIGMA, "G"),
            Field.constant(D4, "d"),
            Field.constant(H, "H"),
            Field.constant(DIRAC_FORM, "D"),
            Field.constant(np.eye(4), "tetrad"),
            True,
            label,
        )

    @classmethod
    def from_tetrad(cls, frame: FrameField, tetrad: Field, label: str = "") -> "Geometry":
        def g_fn(x):
            V = tetrad.fn(x)
            g = V @ ETA @ V.T
            return 0.5 * (g + g.T)

        def gamma_fn(x):
            return np.einsum("kq,qab->kab", tetrad.fn(x), GAMMA)

        def G_fn(x):
            return np.einsum("kq,qab->kab", tetrad.fn(x), SIGMA)

        g_grad = gamma_grad = G_grad = None
        if tetrad.analytic:

            def g_grad(x):
                V = tetrad.fn(x)
                dV = tetrad.grad(x)
                t = np.einsum("mkp,pq,lq->mkl", dV, ETA, V)
                return t + t.transpose(0, 2, 1)

            def gamma_grad(x):
                return np.einsum("mkq,qab->mkab", tetrad.grad(x), GAMMA)

            def G_grad(x):
                return np.einsum("mkq,qab->mkab", tetrad.grad(x), SIGMA)

        return cls(
            frame,
            Field(g_fn, (4, 4), g_grad, tetrad.fd_step, "g"),
            Field(gamma_fn, (4, 4, 4), gamma_grad, tetrad.fd_step, "gamma"),
            Field(G_fn, (4, 2, 2), G_grad, tetrad.fd_step, "G"),
            Field.constant(D4, "d"),
            Field.constant(H, "H"),
            Field.constant(DIRAC_FORM, "D"),
            tetrad,
            False,
            label,
        )

    @classmethod
    def from_metric(cls, frame: FrameField, g: Field, label: str = "") -> "Geometry":
        """Tables for a metric given in the frame; the tetrad comes from a
        Lorentzian Gram-Schmidt pass over the frame vectors in order."""

        def tetrad_fn(x):
            return lorentz_gram_schmidt(g.fn(x))

        return cls.from_tetrad(frame, Field(tetrad_fn, (4, 4), None, g.fd_step, "tetrad"), label)

    def tetrad_flags(self, p):
        # rows of the tetrad are frame vectors in the orthonormal basis
        return frame_admissibility(np.asarray(self.tetrad(p)).T)

    def gamma_coeffs(self, p) -> np.ndarray:
        return gamma_general(self.g, self.frame, p)

    def spin_connection(self, p, Gamma=None) -> SpinConnection:
        if Gamma is None:
            Gamma = self.gamma_coeffs(p)
        return spin_connection_general(self.d, self.H, self.gamma, self.g, Gamma, self.frame, p)


def lorentz_gram_schmidt(g) -> np.ndarray:
    """Tetrad ``V`` with ``V eta V^T = g`` from an ordered pass over the frame."""
    g = np.asarray(g, dtype=float)
    L = np.zeros((4, 4))  # orthonormal vector q = sum_k L[q, k] Upsilon_k
    for q in range(4):
        w = np.zeros(4)
        w[q] = 1.0
        for r in range(q):
            w = w - ETA[r, r] * (L[r] @ g @ w) * L[r]
        norm2 = w @ g @ w
        if q == 0 and not norm2 > 0:
            raise MetricNotInvertible("first frame vector is not time-like")
        if q > 0 and not norm2 < 0:
            raise MetricNotInvertible(f"frame vector {q} is not space-like after projection")
        L[q] = w / np.sqrt(abs(norm2))
    return np.linalg.inv(L)


def concordance_residuals(geom: Geometry, p, Gamma=None, conn: SpinConnection | None = None) -> dict:
    """Max-abs norms of ``nabla d, nabla H, nabla D, nabla gamma, nabla g``."""
    if Gamma is None:
        Gamma = geom.gamma_coeffs(p)
    if conn is None:
        conn = geom.spin_connection(p, Gamma)
    out = {}
    for name in ("d", "H", "D", "gamma", "g"):
        f = getattr(geom, name)
        nabla = covariant_derivative(f(p), frame_derivatives(f, geom.frame, p), LAYOUTS[name], Gamma, conn)
        out[name] = float(np.max(np.abs(nabla)))
    return out


def cancellation_residuals(Gamma, conn: SpinConnection | None = None, gamma=GAMMA, g=ETA) -> tuple:
    """Residuals of the two identities that let the first and last terms
    of the expanded spin-connection variation cancel, for constant tables.

    Returns ``(gamma_identity, metric_identity)``.
    """
    if conn is None:
        conn = spin_connection_orthonormal(Gamma, gamma, g)
    A = conn.A
    g_inv = np.linalg.inv(np.asarray(g, dtype=float))
    # sum_t A^t_{ib} gamma^x_{tm} - sum_t A^x_{it} gamma^t_{bm} + sum_s Gamma^s_{im} gamma^x_{bs}
    lhs = np.einsum("itb,mxt->imxb", A, gamma) - np.einsum("ixt,mtb->imxb", A, gamma)
    rhs = -np.einsum("sim,sxb->imxb", Gamma, gamma)
    r1 = float(np.max(np.abs(lhs - rhs)))
    # sum_s Gamma^q_{is} g^{ps} + sum_s Gamma^p_{is} g^{sq}
    t = np.einsum("qis,ps->iqp", Gamma, g_inv) + np.einsum("pis,sq->iqp", Gamma, g_inv)
    r2 = float(np.max(np.abs(t)))
    return r1, r2
