"""Random smooth test fields with analytic derivatives.

``rng`` is anything with a numpy-style ``uniform(low, high, size)``: a
``numpy.random.Generator`` or ``SplitMix64``.
"""

from __future__ import annotations

import numpy as np

from .connection import gamma_orthonormal
from .frame_geometry import Field

__all__ = ["random_commutators", "random_metric_gamma", "random_points", "random_spinor_field", "random_symmetric_field"]


def random_points(rng, lo, hi, n: int) -> np.ndarray:
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (4,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (4,))
    return np.array([lo + (hi - lo) * rng.uniform(0.0, 1.0, 4) for _ in range(n)])


def random_symmetric_field(rng, amplitude: float = 0.3, wavenumber: float = 1.0) -> Field:
    """``h_ij = a_ij + b_ij sin(w_ij . x + phi_ij)`` with ``h_ij = h_ji``.

    Entries stay within ``2 * amplitude`` in magnitude.
    """
    a = rng.uniform(-amplitude, amplitude, (4, 4))
    b = rng.uniform(-amplitude, amplitude, (4, 4))
    w = rng.uniform(-wavenumber, wavenumber, (4, 4, 4))
    phi = rng.uniform(0.0, 2 * np.pi, (4, 4))
    upper = np.triu_indices(4)
    for arr in (a, b, phi):
        arr[upper[1], upper[0]] = arr[upper]
    w[upper[1], upper[0]] = w[upper]

    def fn(x):
        return a + b * np.sin(np.einsum("ijm,m->ij", w, x) + phi)

    def grad(x):
        return np.einsum("ij,ijm->mij", b * np.cos(np.einsum("ijm,m->ij", w, x) + phi), w)

    return Field(fn, (4, 4), grad, label="random_h")


def random_spinor_field(rng, amplitude: float = 1.0, wavenumber: float = 1.0) -> Field:
    """``psi^a = (alpha_a + beta_a . x) exp(i (kappa_a . x + phi_a))``."""
    alpha = rng.uniform(-amplitude, amplitude, 4) + 1j * rng.uniform(-amplitude, amplitude, 4)
    beta = rng.uniform(-amplitude, amplitude, (4, 4))
    kappa = rng.uniform(-wavenumber, wavenumber, (4, 4))
    phi = rng.uniform(0.0, 2 * np.pi, 4)

    def fn(x):
        return (alpha + beta @ x) * np.exp(1j * (kappa @ x + phi))

    def grad(x):
        phase = np.exp(1j * (kappa @ x + phi))
        return ((beta + 1j * (alpha + beta @ x)[:, None] * kappa) * phase[:, None]).T

    return Field(fn, (4,), grad, label="random_psi")


def random_commutators(rng, scale: float = 1.0) -> np.ndarray:
    c = rng.uniform(-scale, scale, (4, 4, 4))
    return c - c.transpose(0, 2, 1)


def random_metric_gamma(rng, scale: float = 1.0) -> np.ndarray:
    """Metric connection components of an orthonormal frame with random commutators."""
    return gamma_orthonormal(random_commutators(rng, scale))
