"""Per-mode matrices of the first-order systems and their closed forms.

On the eigenvector of A with eigenvalue mu, with a = mu**(1/3), the three
generators reduce to small dense blocks:

* natural system  [u, u_t, u_tt]:       [[0, -1, 0], [0, 0, -1], [a^3, eta a^2, eta a]]
* reduced system  [u, v, v_t], v = u_t + a u:
                                        [[a, -1, 0], [0, 0, -1], [0, a^2, (eta-1) a]]
* second-order part acting on [v, v_t]: [[0, -1], [a^2, (eta-1) a]]

Both 3x3 blocks have characteristic polynomial
``(s + a)(s^2 + (eta-1) a s + a^2)`` for the negated block, so their spectra
coincide: ``{-a, -m1 a, -m2 a}`` with m1, m2 the roots of
``r^2 - (eta-1) r + 1``.

All norms of states use the phase-space weighting diag(a^2, a, 1), i.e.
X^{2/3} x X^{1/3} x X.
"""

import cmath
import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingularError, RegimeError
from .spectral_core import dirichlet_eigs


class BlockKind(enum.Enum):
    NATURAL_A = "natural"
    REDUCED_B = "reduced"
    LAMBDA = "lambda"


class Regime(enum.Enum):
    ILL_POSED = "IllPosed"
    BOUNDARY = "Boundary"
    PARABOLIC = "Parabolic"


def _check_eta(eta):
    eta = float(eta)
    if not eta >= 0 or not np.isfinite(eta):
        raise ValueError(f"eta must be a finite nonnegative number, got {eta!r}")
    return eta


def _check_mu(mu):
    mu = float(mu)
    if not mu > 0 or not np.isfinite(mu):
        raise ValueError(f"eigenvalue must be positive, got {mu!r}")
    return mu


@dataclass(frozen=True)
class SpectralMultipliers:
    """Spectral multipliers for a given eta.

    ``z`` uses the complex branch ``((eta-1) - i sqrt(3 + 2 eta - eta^2)) / 2``;
    ``c, d`` are ``((eta-1) +- sqrt(eta^2 - 2 eta - 3)) / 2`` with the
    principal complex square root. All four are roots of r^2 - (eta-1) r + 1.
    """

    eta: float
    z: complex
    c: complex
    d: complex

    @property
    def z_partner(self):
        """The other root paired with ``z``.

        Equals ``conj(z)`` for eta <= 3. Past eta = 3 both roots are real and
        ``conj(z) == z``, so the partner has to come from Vieta instead.
        """
        return (self.eta - 1.0) - self.z

    @property
    def double_root(self):
        return abs(self.c - self.d) < 1e-8 * abs(self.c)


def multipliers(eta):
    eta = _check_eta(eta)
    root_z = cmath.sqrt(3 + 2 * eta - eta * eta)
    root_cd = cmath.sqrt(eta * eta - 2 * eta - 3)
    z = 0.5 * ((eta - 1) - 1j * root_z)
    c = 0.5 * ((eta - 1) + root_cd)
    d = 0.5 * ((eta - 1) - root_cd)
    return SpectralMultipliers(eta, complex(z), complex(c), complex(d))


@dataclass(frozen=True, eq=False)
class ModeBlock:
    matrix: np.ndarray
    mu: float
    eta: float
    kind: BlockKind

    @property
    def a(self):
        return float(np.cbrt(self.mu))


def _block_matrix(kind, eta, a):
    if kind is BlockKind.NATURAL_A:
        return np.array([[0, -1, 0], [0, 0, -1], [a**3, eta * a**2, eta * a]], dtype=complex)
    if kind is BlockKind.REDUCED_B:
        return np.array([[a, -1, 0], [0, 0, -1], [0, a**2, (eta - 1) * a]], dtype=complex)
    if kind is BlockKind.LAMBDA:
        return np.array([[0, -1], [a**2, (eta - 1) * a]], dtype=complex)
    raise ValueError(f"unknown block kind {kind!r}")


def mode_block(kind, eta, mu):
    eta, mu = _check_eta(eta), _check_mu(mu)
    return ModeBlock(_block_matrix(BlockKind(kind), eta, np.cbrt(mu)), mu, eta, BlockKind(kind))


def z_weight(mu, kind=BlockKind.REDUCED_B):
    """Diagonal weight turning the phase-space norm into a Euclidean norm.

    diag(a^2, a, 1) for the 3x3 systems and diag(a, 1) on X^{1/3} x X for
    the 2x2 block.
    """
    a = np.cbrt(_check_mu(mu))
    if BlockKind(kind) is BlockKind.LAMBDA:
        return np.array([a, 1.0])
    return np.array([a * a, a, 1.0])


def scaled_block(kind, eta):
    """Block in weighted coordinates divided by a; depends on eta only.

    ``W M W^{-1} = a * scaled_block(kind, eta)`` for W = diag(z_weight(mu)).
    """
    eta = _check_eta(eta)
    kind = BlockKind(kind)
    if kind is BlockKind.NATURAL_A:
        return np.array([[0, -1, 0], [0, 0, -1], [1, eta, eta]], dtype=complex)
    if kind is BlockKind.REDUCED_B:
        return np.array([[1, -1, 0], [0, 0, -1], [0, 1, eta - 1]], dtype=complex)
    return np.array([[0, -1], [1, eta - 1]], dtype=complex)


# --- spectra ---------------------------------------------------------------

BRANCHES = {
    BlockKind.NATURAL_A: ("base", "z", "zbar"),
    BlockKind.REDUCED_B: ("base", "c", "d"),
}


def branch_multipliers(kind, eta):
    """Multipliers (1, m1, m2) applied to ``-a`` for each spectral branch."""
    m = multipliers(eta)
    kind = BlockKind(kind)
    if kind is BlockKind.NATURAL_A:
        return (1.0 + 0j, m.z, m.z_partner)
    if kind is BlockKind.REDUCED_B:
        return (1.0 + 0j, m.c, m.d)
    raise ValueError("closed-form spectrum is defined for the 3x3 blocks only")


def closed_form_spectrum(kind, eta, eigs):
    """Spectrum of the negated block, 3 values per mode, mode-major order.

    For each mode: ``[-a, -m1 a, -m2 a]``.
    """
    mults = np.array(branch_multipliers(kind, eta))
    lam = -eigs.cube_roots
    return (lam[:, None] * mults[None, :]).reshape(-1)


def lambda_spectrum(eta, mu):
    """Eigenvalues ``(c a, d a)`` of the 2x2 block (characteristic-polynomial roots)."""
    m = multipliers(eta)
    a = np.cbrt(_check_mu(mu))
    return np.array([m.c * a, m.d * a])


def lambda_spectrum_stated(eta, mu):
    """The alternative prediction ``(eta +- sqrt(eta^2 - 1)) a``.

    Kept for comparison only: it does not match the 2x2 block, whose
    eigenvalues sum to (eta - 1) a rather than 2 eta a.
    """
    a = np.cbrt(_check_mu(mu))
    r = cmath.sqrt(_check_eta(eta) ** 2 - 1)
    return np.array([(eta + r) * a, (eta - r) * a])


# --- inverses and resolvents -------------------------------------------------


def closed_form_inverse(kind, eta, mu, version="statement"):
    """Closed-form inverse of the per-mode block.

    ``version="proof"`` gives the alternative reduced-block inverse with
    ``eta a^{-1}`` and ``(1-eta)`` entries; it is only a true inverse at
    eta = 1 and exists so the discrepancy can be checked.
    """
    eta, mu = _check_eta(eta), _check_mu(mu)
    kind = BlockKind(kind)
    a = np.cbrt(mu)
    if kind is BlockKind.NATURAL_A:
        m = [[eta / a, eta / a**2, 1 / a**3], [-1, 0, 0], [0, -1, 0]]
    elif kind is BlockKind.REDUCED_B:
        if version == "statement":
            m = [[1 / a, (eta - 1) / a**2, 1 / a**3], [0, (eta - 1) / a, 1 / a**2], [0, -1, 0]]
        elif version == "proof":
            m = [[eta / a, (1 - eta) / a**2, 1 / a**3], [0, (1 - eta) / a, 1 / a**2], [0, -1, 0]]
        else:
            raise ValueError(f"unknown version {version!r}")
    else:
        m = [[(eta - 1) / a, 1 / a**2], [-1, 0]]
    return ModeBlock(np.array(m, dtype=complex), mu, eta, kind)


def _resolvent_scaled(lam, eta, a, m=None):
    """(lam I - B)^{-1} for the reduced block, assembled from the adjugate."""
    m = m or multipliers(eta)
    poles = (a, m.c * a, m.d * a)
    tol = 1e-12 * a
    for p in poles:
        if abs(lam - p) <= tol:
            raise NearSingularError(f"lambda={lam} is within {tol:.3g} of spectral value {p}", p)
    inv_d = 1.0 / ((lam - poles[0]) * (lam - poles[1]) * (lam - poles[2]))
    p = lam - (eta - 1) * a
    la = lam - a
    adj = np.array([
        [(lam - poles[1]) * (lam - poles[2]), -p, 1.0],
        [0.0, la * p, -la],
        [0.0, la * a * a, lam * la],
    ], dtype=complex)
    return inv_d * adj


def resolvent_reduced(lam, eta, mu):
    """(lam I - B)^{-1} on one mode, B the reduced 3x3 block.

    Raises NearSingularError within ``1e-12 * a`` of a pole.
    """
    eta, mu = _check_eta(eta), _check_mu(mu)
    return _resolvent_scaled(complex(lam), eta, float(np.cbrt(mu)))


def opnorm(matrix):
    """Largest singular value."""
    return float(np.linalg.svd(matrix, compute_uv=False)[0])


@dataclass
class SectorScan:
    eta: float
    angles: np.ndarray
    radii: np.ndarray
    m_local: np.ndarray  # shape (len(angles), len(radii)): sup over modes
    max_residual: float

    @property
    def m_estimate(self):
        return float(np.max(self.m_local))


def scan_resolvent(eta, eigs, angles, radii, require_parabolic=True):
    """Sample ``|lam| * ||W (lam I - B)^{-1} W^{-1}||`` along rays.

    W is the phase-space weight. Each entry of ``m_local`` is the sup over
    modes for one (angle, radius); ``max_residual`` is the largest entry of
    ``(lam I - B) R - I`` seen during the scan.
    """
    eta = _check_eta(eta)
    if require_parabolic and not eta > 1:
        raise RegimeError("sectorial resolvent bound needs eta > 1")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    m = multipliers(eta)
    m_local = np.zeros((angles.size, radii.size))
    worst = 0.0
    for i, th in enumerate(angles):
        for j, r in enumerate(radii):
            lam = r * cmath.exp(1j * th)
            best = 0.0
            for mu, a in zip(eigs.values, eigs.cube_roots):
                res = _resolvent_scaled(lam, eta, a, m)
                blk = lam * np.eye(3) - _block_matrix(BlockKind.REDUCED_B, eta, a)
                worst = max(worst, float(np.max(np.abs(blk @ res - np.eye(3)))))
                w = z_weight(mu)
                best = max(best, r * opnorm(w[:, None] * res / w[None, :]))
            m_local[i, j] = best
    return SectorScan(eta, angles, radii, m_local, worst)


def sector_scan(eta, eigs, angles, radii):
    """Empirical sectorial constant M: sup of ``|lam| ||R(lam)||_Z`` over the samples."""
    return scan_resolvent(eta, eigs, angles, radii).m_estimate


# --- regime evidence ----------------------------------------------------------


def growth_abscissa(eta, eigs):
    """Largest real part of the truncated spectrum of the negated natural block.

    Returns ``(sup_re, unbounded_flag)``. The flag is finite-truncation
    evidence only: it is set when the per-mode maximal real part strictly
    increases over the last quarter of the modes (at least two modes).
    """
    spec = closed_form_spectrum(BlockKind.NATURAL_A, eta, eigs).reshape(-1, 3)
    per_mode = spec.real.max(axis=1)
    sup_re = float(per_mode.max())
    k = max(2, -(-len(eigs) // 4))
    tail = per_mode[-k:]
    if tail.size < 2:
        return sup_re, False
    tol = 1e-12 * max(1.0, float(np.max(np.abs(tail))))
    return sup_re, bool(np.all(np.diff(tail) > tol))


def dissipativity_witness(mu, u_coeff):
    """``Re <-B z, z>_Z`` at eta = 1 for the witness ``z = (u, 2 a u, 0)``.

    Positive for any u != 0, so the negated operator is not dissipative.
    """
    mu = _check_mu(mu)
    a = np.cbrt(mu)
    u = complex(u_coeff)
    zvec = np.array([u, 2 * a * u, 0.0])
    bz = _block_matrix(BlockKind.REDUCED_B, 1.0, a) @ zvec
    w2 = z_weight(mu) ** 2
    return float(np.real(np.sum(w2 * (-bz) * np.conj(zvec))))


def extrapolation_constants(eta):
    """(C1, C2) = (max(2, eta), 2 + eta - 2/eta)."""
    eta = _check_eta(eta)
    if eta == 0:
        raise ValueError("C2 is undefined at eta = 0")
    return max(2.0, eta), 2.0 + eta - 2.0 / eta


def apply_blocks(matrices, stacked):
    """Apply per-mode matrices (N, k, k) to per-mode vectors (N, k)."""
    return np.einsum("nij,nj->ni", matrices, stacked)


def block_stack(kind, eta, eigs, inverse=False):
    """Per-mode matrices for every eigenvalue, shape (N, k, k)."""
    if inverse:
        return np.stack([closed_form_inverse(kind, eta, mu).matrix for mu in eigs.values])
    return np.stack([mode_block(kind, eta, mu).matrix for mu in eigs.values])


@dataclass
class RegimeReport:
    eta: float
    regime: Regime
    multipliers: SpectralMultipliers
    growth_abscissa: float
    unbounded_flag: bool
    n_modes: int = 64
    lambda_predictions: dict = field(default_factory=dict)

    def to_dict(self):
        m = self.multipliers
        pair = lambda x: [float(x.real), float(x.imag)]  # noqa: E731
        return {
            "eta": self.eta,
            "regime": self.regime.value,
            "z": pair(m.z),
            "c": pair(m.c),
            "d": pair(m.d),
            "growth_abscissa": self.growth_abscissa,
            "unbounded_flag": self.unbounded_flag,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def classify(eta, eigs=None):
    """Regime of eta: ill-posed below 1, boundary at exactly 1, parabolic above.

    Supporting evidence is computed on ``eigs`` (default: 64 Dirichlet modes
    on (0, pi)).
    """
    eta = _check_eta(eta)
    if eigs is None:
        eigs = dirichlet_eigs(64, np.pi)
    if eta < 1:
        regime = Regime.ILL_POSED
    elif eta == 1:
        regime = Regime.BOUNDARY
    else:
        regime = Regime.PARABOLIC
    sup_re, flag = growth_abscissa(eta, eigs)
    mu1 = float(eigs.values[0])
    preds = {"characteristic": lambda_spectrum(eta, mu1).tolist(),
             "stated": lambda_spectrum_stated(eta, mu1).tolist()}
    return RegimeReport(eta, regime, multipliers(eta), sup_re, flag, len(eigs), preds)
