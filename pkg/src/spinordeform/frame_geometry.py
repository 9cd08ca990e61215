"""Chart points, evaluable fields, frames and their commutation coefficients.

Fields are closures over chart points.  Partial derivatives come from an
analytic closure when one is supplied and from central differences
otherwise.  Frames store ``E[i, mu] = e_i^mu`` so that
``Upsilon_i = sum_mu E[i, mu] d/dx^mu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import Node

__all__ = [
    "ChartPoint",
    "CommutationCoeffs",
    "DegenerateFrame",
    "Field",
    "FieldNotDifferentiable",
    "FrameField",
    "FrameFlags",
    "GeometryError",
    "commutation_coefficients",
    "coordinate_frame",
    "directional_derivative",
    "frame_admissibility",
    "frame_derivatives",
]

DEFAULT_FD_STEP = 1e-5
DEGENERACY_TOL = 1e-10
ADMISSIBILITY_TOL = 1e-12


class GeometryError(ValueError):
    """Base class for numerical-geometry failures."""


class FieldNotDifferentiable(GeometryError):
    pass


class DegenerateFrame(GeometryError):
    pass


@dataclass(frozen=True)
class ChartPoint:
    x: tuple

    def __init__(self, x):
        arr = np.asarray(x, dtype=float).reshape(-1)
        if arr.shape != (4,):
            raise ValueError(f"chart point needs 4 coordinates, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("chart point coordinates must be finite")
        object.__setattr__(self, "x", tuple(float(v) for v in arr))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.x)

    def __iter__(self):
        return iter(self.x)


def as_array(p) -> np.ndarray:
    if isinstance(p, ChartPoint):
        return p.array
    return ChartPoint(p).array


@dataclass(frozen=True)
class Field:
    """A tensor-valued field ``p -> array`` of fixed shape.

    ``grad`` returns the coordinate partials stacked on a leading axis of
    length 4.  Without it, partials are central differences with step
    ``fd_step * max(1, |x^mu|)``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    shape: tuple = ()
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float = DEFAULT_FD_STEP
    label: str = ""

    def __post_init__(self):
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.fn(as_array(p))).reshape(self.shape)

    def partials(self, p) -> np.ndarray:
        x = as_array(p)
        if self.grad is not None:
            out = np.asarray(self.grad(x)).reshape((4,) + tuple(self.shape))
        else:
            out = central_partials(self.fn, x, self.fd_step, self.shape)
        if not np.all(np.isfinite(out)):
            raise FieldNotDifferentiable(f"field {self.label or '<anon>'} not differentiable here: {x}")
        return out

    @property
    def analytic(self) -> bool:
        return self.grad is not None

    def without_grad(self) -> "Field":
        return Field(self.fn, self.shape, None, self.fd_step, self.label)

    @classmethod
    def constant(cls, value, label="") -> "Field":
        value = np.array(value)
        value.setflags(write=False)
        zeros = np.zeros((4,) + value.shape, dtype=value.dtype)
        zeros.setflags(write=False)
        return cls(lambda x: value, value.shape, lambda x: zeros, label=label)

    @classmethod
    def from_expressions(cls, nodes, label="", fd_step=DEFAULT_FD_STEP) -> "Field":
        """Build a real field from an object array of expression nodes."""
        nodes = np.asarray(nodes, dtype=object)
        shape = nodes.shape
        flat = list(nodes.reshape(-1))
        derivs = [[n.diff(mu) for n in flat] for mu in range(4)]

        def fn(x):
            return np.array([n.eval(x) for n in flat], dtype=float).reshape(shape)

        def grad(x):
            return np.array([[d.eval(x) for d in row] for row in derivs], dtype=float).reshape((4,) + shape)

        return cls(fn, shape, grad, fd_step, label)

    @classmethod
    def from_complex_expressions(cls, re_nodes, im_nodes, label="") -> "Field":
        re_f = cls.from_expressions(re_nodes)
        im_f = cls.from_expressions(im_nodes)
        return cls(
            lambda x: re_f.fn(x) + 1j * im_f.fn(x),
            re_f.shape,
            lambda x: re_f.grad(x) + 1j * im_f.grad(x),
            label=label,
        )

    @classmethod
    def scalar(cls, node: Node, label="") -> "Field":
        return cls.from_expressions(np.array(node, dtype=object), label)


def central_partials(fn, x: np.ndarray, fd_step: float, shape=()) -> np.ndarray:
    """Second-order central differences of ``fn`` along each coordinate."""
    out = []
    for mu in range(4):
        h = fd_step * max(1.0, abs(x[mu]))
        xp = x.copy()
        xm = x.copy()
        xp[mu] += h
        xm[mu] -= h
        fp = np.asarray(fn(xp))
        fm = np.asarray(fn(xm))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise FieldNotDifferentiable(f"field not differentiable here: {x}")
        out.append((fp - fm) / (2.0 * h))
    return np.array(out).reshape((4,) + tuple(shape))


@dataclass(frozen=True)
class FrameFlags:
    det_positive: bool
    time_component_positive: bool

    @property
    def admissible(self) -> bool:
        return self.det_positive and self.time_component_positive


def frame_admissibility(F, tol: float = ADMISSIBILITY_TOL) -> FrameFlags:
    """Orientation and polarization flags of a transition matrix.

    ``F[p, i] = F^p_i``; the flags test ``det F > tol`` and ``F^0_0 > tol``.
    """
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("transition matrix must be finite")
    return FrameFlags(bool(np.linalg.det(F) > tol), bool(F[0, 0] > tol))


@dataclass(frozen=True)
class FrameField:
    coeffs: Field
    label: str = ""
    holonomic: bool = field(default=False, compare=False)

    def matrix(self, p, tol: float = DEGENERACY_TOL) -> np.ndarray:
        E = self.coeffs(p)
        scale = float(np.prod(np.linalg.norm(E, axis=1)))
        if not abs(np.linalg.det(E)) >= tol * scale or scale == 0.0:
            raise DegenerateFrame(f"degenerate frame {self.label!r} at {as_array(p)}")
        return E

    def apply(self, partials: np.ndarray, p) -> np.ndarray:
        """Turn coordinate partials ``(4, ...)`` into frame derivatives ``(4, ...)``."""
        E = self.matrix(p)
        return np.tensordot(E, partials, axes=(1, 0))

    @classmethod
    def from_expressions(cls, rows, label="", fd_step=DEFAULT_FD_STEP) -> "FrameField":
        from .expr import parse_matrix

        nodes = parse_matrix(rows)
        return cls(Field.from_expressions(nodes, label=label, fd_step=fd_step), label)


def coordinate_frame() -> FrameField:
    return FrameField(Field.constant(np.eye(4), "coordinate"), "coordinate", holonomic=True)


def frame_derivatives(f: Field, frame: FrameField, p) -> np.ndarray:
    """All four derivatives ``L_{Upsilon_i} f`` stacked on a leading axis."""
    return frame.apply(f.partials(p), p)


def directional_derivative(f: Field, frame: FrameField, i: int, p):
    """``L_{Upsilon_i}(f)(p) = sum_mu e_i^mu(p) df/dx^mu(p)``."""
    E = frame.matrix(p)
    return np.tensordot(E[i], f.partials(p), axes=(0, 0))


@dataclass(frozen=True)
class CommutationCoeffs:
    """``c[k, i, j] = c^k_{ij}`` with ``[Upsilon_i, Upsilon_j] = c^k_{ij} Upsilon_k``."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        c = 0.5 * (c - c.transpose(0, 2, 1))
        c.setflags(write=False)
        object.__setattr__(self, "c", c)


def commutation_coefficients(frame: FrameField, p) -> CommutationCoeffs:
    E = frame.matrix(p)
    P = frame.coeffs.partials(p)  # P[nu, j, mu] = d e_j^mu / dx^nu
    lie = np.einsum("in,njm->ijm", E, P)  # lie[i, j, mu] = L_i(e_j^mu)
    w = lie - lie.transpose(1, 0, 2)
    c = np.einsum("ijm,mk->kij", w, np.linalg.inv(E))
    return CommutationCoeffs(c)
