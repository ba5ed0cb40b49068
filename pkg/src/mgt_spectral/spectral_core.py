"""Diagonal realization of a positive self-adjoint operator A.

A is represented by its ascending eigenvalue sequence ``mu_1 < mu_2 < ...``.
Fractional powers act as diagonal multipliers ``mu_n**alpha`` on
eigen-coefficients, and the fractional scale norms are weighted l2 norms.
For the 1-D Dirichlet Laplacian on (0, L) a discrete sine transform pair
moves between coefficients and samples on the interior uniform grid, which
is what the nonlinearity needs for pointwise evaluation.
"""

import enum
import json
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import ShapeError, UnsupportedBasisError


class Basis(enum.Enum):
    DIRICHLET_1D = "dirichlet-laplacian-1d"
    USER = "user-supplied"


class Coords(enum.Enum):
    """Meaning of the (v, w) slots of a state.

    NATURAL: v = u_t, w = u_tt.
    REDUCED: v = u_t + A^{1/3} u, w = v_t.
    """

    NATURAL = "natural"
    REDUCED = "reduced"


@dataclass(frozen=True, eq=False)
class EigenSequence:
    """Strictly increasing positive eigenvalues of A.

    ``length`` is only set for the Dirichlet Laplacian, where it fixes the
    sine basis ``sqrt(2/L) sin(n pi x / L)``.
    """

    values: np.ndarray
    source: Basis = Basis.USER
    length: float = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise ValueError("eigenvalue sequence is empty")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("eigenvalues must be finite and > 0")
        if values.size > 1 and np.any(np.diff(values) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")
        if self.source is Basis.DIRICHLET_1D and not (self.length and self.length > 0):
            raise ValueError("Dirichlet basis needs a positive length")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def cube_roots(self):
        """Eigenvalues of A^{1/3}, i.e. ``a_n = mu_n**(1/3)``."""
        return np.cbrt(self.values)

    @classmethod
    def user(cls, values):
        return cls(np.asarray(values, dtype=float), Basis.USER)

    def to_json(self):
        return json.dumps([float(x) for x in self.values])

    @classmethod
    def from_json(cls, text):
        return cls.user(json.loads(text))


def dirichlet_eigs(n_modes, length=np.pi):
    """Eigenvalues ``(n pi / length)**2``, n = 1..n_modes, of -d^2/dx^2 on (0, length)."""
    if isinstance(n_modes, bool) or int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    if not length > 0 or not np.isfinite(length):
        raise ValueError(f"length must be positive, got {length!r}")
    n = np.arange(1, int(n_modes) + 1, dtype=float)
    return EigenSequence((n * np.pi / length) ** 2, Basis.DIRICHLET_1D, float(length))


def _check_len(vec, eigs):
    vec = np.asarray(vec)
    if vec.shape != (len(eigs),):
        raise ShapeError(f"vector of shape {vec.shape} does not match {len(eigs)} modes")
    return vec


def frac_apply(alpha, vec, eigs):
    """Apply A**alpha: multiply coefficient n by mu_n**alpha."""
    vec = _check_len(vec, eigs)
    return np.asarray(eigs.values ** float(alpha) * vec, dtype=complex)


def _ordered_sqrt_sum(terms):
    # sequential ascending-mode accumulation keeps results bit-stable
    return float(np.sqrt(np.cumsum(terms)[-1])) if terms.size else 0.0


def scale_norm(alpha, vec, eigs):
    """Norm in X^alpha: ``(sum_n mu_n**(2 alpha) |c_n|**2)**(1/2)``."""
    weighted = frac_apply(alpha, vec, eigs)
    return _ordered_sqrt_sum(np.abs(weighted) ** 2)


def product_norm(vectors, alphas, eigs):
    """Hilbert norm on a product of scale spaces X^{alpha_1} x X^{alpha_2} x ..."""
    squares = [scale_norm(al, v, eigs) ** 2 for v, al in zip(vectors, alphas)]
    return float(np.sqrt(sum(squares)))


@dataclass(eq=False)
class SpectralState:
    """Eigen-coefficients of a state [u, v, w]."""

    u_hat: np.ndarray
    v_hat: np.ndarray
    w_hat: np.ndarray
    coords: Coords = Coords.REDUCED

    def __post_init__(self):
        self.u_hat = np.asarray(self.u_hat, dtype=complex).reshape(-1)
        self.v_hat = np.asarray(self.v_hat, dtype=complex).reshape(-1)
        self.w_hat = np.asarray(self.w_hat, dtype=complex).reshape(-1)
        n = self.u_hat.size
        if self.v_hat.size != n or self.w_hat.size != n:
            raise ShapeError("u_hat, v_hat, w_hat must have equal length")

    def __len__(self):
        return self.u_hat.size

    def stacked(self):
        """Array of shape (N, 3): one [u, v, w] triple per mode."""
        return np.stack([self.u_hat, self.v_hat, self.w_hat], axis=1)

    @classmethod
    def from_stacked(cls, arr, coords=Coords.REDUCED):
        arr = np.asarray(arr)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], coords)

    @classmethod
    def zeros(cls, n, coords=Coords.REDUCED):
        z = np.zeros(n, dtype=complex)
        return cls(z, z.copy(), z.copy(), coords)

    def copy(self):
        return SpectralState(self.u_hat.copy(), self.v_hat.copy(), self.w_hat.copy(), self.coords)


def check_state(state, eigs):
    if len(state) != len(eigs):
        raise ShapeError(f"state has {len(state)} modes, eigenvalue sequence has {len(eigs)}")


def z_norm(state, eigs):
    """Phase-space norm on X^{2/3} x X^{1/3} x X."""
    check_state(state, eigs)
    return product_norm((state.u_hat, state.v_hat, state.w_hat), (2 / 3, 1 / 3, 0), eigs)


def natural_to_reduced(state, eigs):
    """[u, u_t, u_tt] -> [u, u_t + A^{1/3}u, u_tt + A^{1/3}u_t]."""
    check_state(state, eigs)
    if state.coords is not Coords.NATURAL:
        raise ValueError("state is not in natural coordinates")
    a = eigs.cube_roots
    return SpectralState(state.u_hat, state.v_hat + a * state.u_hat,
                         state.w_hat + a * state.v_hat, Coords.REDUCED)


def reduced_to_natural(state, eigs):
    check_state(state, eigs)
    if state.coords is not Coords.REDUCED:
        raise ValueError("state is not in reduced coordinates")
    a = eigs.cube_roots
    ut = state.v_hat - a * state.u_hat
    return SpectralState(state.u_hat, ut, state.w_hat - a * ut, Coords.NATURAL)


# --- sine grid transform -------------------------------------------------


def _require_dirichlet(eigs):
    if eigs.source is not Basis.DIRICHLET_1D:
        raise UnsupportedBasisError("grid transform needs the Dirichlet sine basis")


def grid_points(eigs):
    """Interior nodes ``x_j = j L / (N + 1)``, j = 1..N."""
    _require_dirichlet(eigs)
    n = len(eigs)
    return np.arange(1, n + 1) * eigs.length / (n + 1)


def synthesize(coeffs, eigs):
    """Evaluate ``sum_n c_n phi_n(x_j)`` on the interior grid."""
    _require_dirichlet(eigs)
    coeffs = _check_len(coeffs, eigs)
    # scipy's DST-I carries a factor 2
    return np.sqrt(2.0 / eigs.length) * scipy.fft.dst(coeffs, type=1) / 2.0


def analyze(samples, eigs):
    """Inverse of :func:`synthesize` (trapezoid quadrature against phi_n)."""
    _require_dirichlet(eigs)
    samples = _check_len(samples, eigs)
    n = len(eigs)
    h = eigs.length / (n + 1)
    return h * np.sqrt(2.0 / eigs.length) * scipy.fft.dst(samples, type=1) / 2.0


def grid_l2_norm(samples, eigs):
    """Quadrature L2 norm of a grid field (zero boundary values)."""
    samples = _check_len(samples, eigs)
    h = eigs.length / (len(eigs) + 1)
    return float(np.sqrt(h * np.cumsum(np.abs(samples) ** 2)[-1]))
