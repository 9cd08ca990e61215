"""Constant matrix tables of the canonical frame pair and their identities.

Tables are stored exactly as pairs of integer arrays (real part, imaginary
part) and converted to floating point on request.  Spinor indices run 1..4
in the usual notation; here they are 0-based (``a - 1``).  Spacial indices
run 0..3 in both.  Index layout of the stored arrays:

* ``g[i, j]``           metric ``g_ij`` (and ``g^ij``)
* ``d2[i, j]``          Weyl spinor metric ``d_ij``
* ``G[k, i, ibar]``     Infeld-van der Waerden components ``G^{i ibar}_k``
* ``d4[a, b]``          Dirac-bundle skew metric ``d_ab``
* ``H[a, b]``           chirality operator ``H^a_b``
* ``D[a, abar]``        Dirac form ``D_{a abar}``
* ``gamma[k, a, b]``    Dirac gamma field ``gamma^a_{bk}``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiracConstants",
    "InfeldVanDerWaerden",
    "MinkowskiMetric",
    "SPIN_TENSOR_TYPES",
    "SpinTensorType",
    "WeylMetric2",
    "check_chirality",
    "check_clifford",
    "check_reality_identity",
    "constants",
    "exact_tables",
    "gaussian_matmul",
]


def _gauss(re, im=None):
    re = np.array(re, dtype=np.int64)
    im = np.zeros_like(re) if im is None else np.array(im, dtype=np.int64)
    re.setflags(write=False)
    im.setflags(write=False)
    return re, im


_ETA = _gauss(np.diag([1, -1, -1, -1]))
_D2 = _gauss([[0, 1], [-1, 0]])
_D2_DUAL = _gauss([[0, -1], [1, 0]])
_SIGMA = _gauss(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, 0], [0, 0]],
        [[1, 0], [0, -1]],
    ],
    [
        [[0, 0], [0, 0]],
        [[0, 0], [0, 0]],
        [[0, -1], [1, 0]],
        [[0, 0], [0, 0]],
    ],
)
_D4 = _gauss([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
_D4_DUAL = _gauss([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
_H = _gauss(np.diag([1, 1, -1, -1]))
_DIRAC_FORM = _gauss([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
_GAMMA = _gauss(
    [
        [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
        [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]],
        [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]],
    ],
    [
        [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
        [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    ],
)


def exact_tables() -> dict:
    """All constant tables as ``name -> (re, im)`` integer array pairs."""
    return {
        "g": _ETA,
        "g_dual": _ETA,
        "d2": _D2,
        "d2_dual": _D2_DUAL,
        "G": _SIGMA,
        "d4": _D4,
        "d4_dual": _D4_DUAL,
        "H": _H,
        "D": _DIRAC_FORM,
        "gamma": _GAMMA,
    }


def _to_float(pair, complex_=False):
    re, im = pair
    if complex_:
        out = re.astype(float) + 1j * im.astype(float)
    else:
        out = re.astype(float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MinkowskiMetric:
    g: np.ndarray
    g_dual: np.ndarray


@dataclass(frozen=True)
class WeylMetric2:
    d2: np.ndarray
    d2_dual: np.ndarray


@dataclass(frozen=True)
class InfeldVanDerWaerden:
    G: np.ndarray


@dataclass(frozen=True)
class DiracConstants:
    d4: np.ndarray
    d4_dual: np.ndarray
    H: np.ndarray
    D: np.ndarray
    gamma: np.ndarray


def constants():
    """Floating-point copies of all tables (read-only arrays)."""
    return (
        MinkowskiMetric(_to_float(_ETA), _to_float(_ETA)),
        WeylMetric2(_to_float(_D2), _to_float(_D2_DUAL)),
        InfeldVanDerWaerden(_to_float(_SIGMA, complex_=True)),
        DiracConstants(
            _to_float(_D4),
            _to_float(_D4_DUAL),
            _to_float(_H),
            _to_float(_DIRAC_FORM),
            _to_float(_GAMMA, complex_=True),
        ),
    )


ETA = _to_float(_ETA)
D4 = _to_float(_D4)
D4_DUAL = _to_float(_D4_DUAL)
H = _to_float(_H)
DIRAC_FORM = _to_float(_DIRAC_FORM)
GAMMA = _to_float(_GAMMA, complex_=True)
SIGMA = _to_float(_SIGMA, complex_=True)


@dataclass(frozen=True)
class SpinTensorType:
    """Index counts ``(r, s | p, q | m, n)``: upper/lower spinor,
    upper/lower conjugate spinor, upper/lower spacial."""

    r: int
    s: int
    p: int
    q: int
    m: int
    n: int

    def __str__(self):
        return f"({self.r},{self.s}|{self.p},{self.q}|{self.m},{self.n})"


SPIN_TENSOR_TYPES = {
    "d": SpinTensorType(0, 2, 0, 0, 0, 0),
    "G": SpinTensorType(1, 0, 1, 0, 0, 1),
    "H": SpinTensorType(1, 1, 0, 0, 0, 0),
    "D": SpinTensorType(0, 1, 0, 1, 0, 0),
    "gamma": SpinTensorType(1, 1, 0, 0, 0, 1),
}


def gaussian_matmul(a, b):
    """Exact product of Gaussian-integer matrices given as (re, im) pairs."""
    ar, ai = a
    br, bi = b
    return ar @ br - ai @ bi, ar @ bi + ai @ br


def _gconj(a):
    return a[0], -a[1]


def _gsub(a, b):
    return a[0] - b[0], a[1] - b[1]


def _gabs_max(a) -> float:
    # only ever applied to exact zero or small integer residuals
    return float(np.max(np.hypot(a[0], a[1]))) if a[0].size else 0.0


def check_reality_identity(D=None, gamma=None, exact: bool | None = None) -> float:
    """Max residual of ``sum_a conj(D_{a abar}) conj(gamma^a_{bp}) =
    sum_a D_{ab} gamma^a_{abar p}`` over all ``abar, b, p``.

    With no overrides the check is done in exact Gaussian-integer
    arithmetic; passing float tables switches to floating point.
    """
    if exact is None:
        exact = D is None and gamma is None
    if exact:
        Dg = _DIRAC_FORM
        res = 0.0
        for p in range(4):
            gp = (_GAMMA[0][p], _GAMMA[1][p])
            lhs = gaussian_matmul((Dg[0].T, -Dg[1].T), _gconj(gp))
            rhs = gaussian_matmul((gp[0].T, gp[1].T), Dg)
            res = max(res, _gabs_max(_gsub(lhs, rhs)))
        return res
    D = DIRAC_FORM if D is None else np.asarray(D)
    gamma = GAMMA if gamma is None else np.asarray(gamma)
    lhs = np.einsum("ax,pab->pxb", np.conj(D), np.conj(gamma))
    rhs = np.einsum("ab,pax->pxb", D, gamma)
    return float(np.max(np.abs(lhs - rhs)))


def check_clifford(gamma=None, g=None) -> float:
    """Max ``|gamma_p gamma_q + gamma_q gamma_p - 2 g_pq Id|`` over ``p, q``."""
    if gamma is None and g is None:
        res = 0.0
        for p in range(4):
            for q in range(4):
                gp = (_GAMMA[0][p], _GAMMA[1][p])
                gq = (_GAMMA[0][q], _GAMMA[1][q])
                pq = gaussian_matmul(gp, gq)
                qp = gaussian_matmul(gq, gp)
                acomm = (pq[0] + qp[0] - 2 * _ETA[0][p, q] * np.eye(4, dtype=np.int64), pq[1] + qp[1])
                res = max(res, _gabs_max(acomm))
        return res
    gamma = GAMMA if gamma is None else np.asarray(gamma)
    g = ETA if g is None else np.asarray(g)
    acomm = np.einsum("pab,qbc->pqac", gamma, gamma)
    acomm = acomm + acomm.transpose(1, 0, 2, 3) - 2 * g[:, :, None, None] * np.eye(4)
    return float(np.max(np.abs(acomm)))


def check_chirality(H_=None, gamma=None) -> float:
    """Max ``|H gamma_p + gamma_p H|``; exact for the stored tables."""
    if H_ is None and gamma is None:
        res = 0.0
        for p in range(4):
            gp = (_GAMMA[0][p], _GAMMA[1][p])
            s = gaussian_matmul(_H, gp)
            t = gaussian_matmul(gp, _H)
            res = max(res, _gabs_max((s[0] + t[0], s[1] + t[1])))
        return res
    H_ = H if H_ is None else np.asarray(H_)
    gamma = GAMMA if gamma is None else np.asarray(gamma)
    return float(np.max(np.abs(np.einsum("ab,pbc->pac", H_, gamma) + np.einsum("pab,bc->pac", gamma, H_))))


def check_weyl_inverse() -> float:
    """Max ``|d2_dual d2 - Id|`` in exact arithmetic."""
    prod = _D2_DUAL[0] @ _D2[0]
    return float(np.max(np.abs(prod - np.eye(2, dtype=np.int64))))


def constants_json() -> dict:
    """Row-major JSON-ready tables; complex entries as ``[re, im]``."""
    out = {}
    complex_tables = {"G", "gamma"}
    for name, (re, im) in exact_tables().items():
        if name in complex_tables:
            out[name] = np.stack([re, im], axis=-1).tolist()
        else:
            out[name] = re.tolist()
    return out
