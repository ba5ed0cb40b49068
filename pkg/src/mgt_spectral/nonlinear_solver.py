"""Semilinear time stepping with exponential integrators.

The state y = [u, v, w] (per mode) obeys ``y' + M y = F(y)`` with the
forcing ``F(y) = [0, 0, f(u)]`` in both coordinate systems. Every step uses
the exact per-mode propagator ``exp(-h M)`` and the phi-function weights

    phi_1(X) = X^{-1} (e^X - I),   phi_2(X) = X^{-2} (e^X - I - X)

so the stiff linear part never limits the step size.
"""

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .block_operators import BlockKind, scaled_block, z_weight
from .errors import NonRealFieldError, NumericalFailure
from .semigroup import expm_taylor
from .spectral_core import (Coords, SpectralState, analyze, check_state, natural_to_reduced,
                            scale_norm, synthesize)

SERIES_SWITCH = 0.1


class NonlinearityForm(enum.Enum):
    POWER_SIGN = "powersign"
    CUBIC = "cubic"
    ZERO = "zero"


@dataclass(frozen=True)
class NonlinearitySpec:
    """Pointwise nonlinearity.

    POWER_SIGN: ``kappa * s * |s|**(rho - 1)``; CUBIC: ``kappa * s**3``
    (rho is forced to 3); ZERO: 0.
    """

    form: NonlinearityForm = NonlinearityForm.ZERO
    kappa: float = 1.0
    rho: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "form", NonlinearityForm(self.form))
        if self.form is NonlinearityForm.CUBIC:
            object.__setattr__(self, "rho", 3.0)
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho!r}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.form is NonlinearityForm.ZERO:
            return np.zeros_like(s)
        if self.form is NonlinearityForm.CUBIC:
            return self.kappa * s**3
        return self.kappa * s * np.abs(s) ** (self.rho - 1)

    @property
    def growth_constant(self):
        """C in |f'(s)| <= C (1 + |s|^{rho-1})."""
        if self.form is NonlinearityForm.ZERO:
            return 0.0
        return abs(self.kappa) * self.rho


def nemytskii(f, u_hat, eigs, imag_tol=1e-10):
    """Coefficients of f(u) where u is the field with coefficients ``u_hat``."""
    u_hat = np.asarray(u_hat, dtype=complex)
    if f.form is NonlinearityForm.ZERO:
        if u_hat.shape != (len(eigs),):
            check_state(SpectralState(u_hat, u_hat, u_hat), eigs)
        return np.zeros(len(eigs), dtype=complex)
    field_ = synthesize(u_hat, eigs)
    scale = max(1.0, float(np.max(np.abs(field_))))
    if np.max(np.abs(field_.imag)) > imag_tol * scale:
        raise NonRealFieldError("synthesized field is not real")
    return analyze(f(field_.real), eigs).astype(complex)


def rho_admissible(space_dim, rho):
    """Whether ``1 < rho < (3N + 4) / (3N - 8)`` for spatial dimension N >= 3."""
    if int(space_dim) != space_dim or space_dim < 3:
        raise ValueError(f"exponent bound needs space dimension >= 3, got {space_dim!r}")
    n = int(space_dim)
    return bool(1 < rho < (3 * n + 4) / (3 * n - 8))


def rho_bound(space_dim):
    rho_admissible(space_dim, 2.0)
    return (3 * space_dim + 4) / (3 * space_dim - 8)


# --- phi functions ------------------------------------------------------------


def phi_matrices(x):
    """(e^X, phi_1(X), phi_2(X)) for a square matrix X.

    Power series below ``||X|| = 0.1``, otherwise the exponential of the
    augmented matrix [[X, I, 0], [0, 0, I], [0, 0, 0]].
    """
    x = np.asarray(x, dtype=complex)
    k = x.shape[0]
    eye = np.eye(k, dtype=complex)
    if np.linalg.norm(x, 1) <= SERIES_SWITCH:
        # 0.1^16 / 16! is far below round-off
        p = [np.zeros_like(x) for _ in range(3)]
        power = eye.copy()
        for j in range(16):
            for order in range(3):
                p[order] = p[order] + power / math.factorial(j + order)
            power = power @ x
        return p[0], p[1], p[2]
    big = np.zeros((3 * k, 3 * k), dtype=complex)
    big[:k, :k] = x
    big[:k, k:2 * k] = eye
    big[k:2 * k, 2 * k:] = eye
    e = expm_taylor(big)
    return e[:k, :k], e[:k, k:2 * k], e[:k, 2 * k:]


def phi_scalar(z, kmax=4):
    """[phi_0(z), ..., phi_kmax(z)] elementwise for an array z."""
    z = np.asarray(z, dtype=complex)
    out = [np.exp(z)]
    small = np.abs(z) < 1.0
    zs = np.where(small, 1.0, z)
    for k in range(1, kmax + 1):
        rec = (out[-1] - 1.0 / math.factorial(k - 1)) / zs
        ser = sum(z**j / math.factorial(j + k) for j in range(30))
        out.append(np.where(small, ser, rec))
    return out


def _weighted_phis(kind, eta, eigs, h):
    """Per-mode (E, Phi1, Phi2) for exp(-h M) in plain coordinates."""
    k = scaled_block(kind, eta)
    es, p1s, p2s = [], [], []
    for mu, a in zip(eigs.values, eigs.cube_roots):
        e, p1, p2 = phi_matrices(-h * a * k)
        w = z_weight(mu, kind)
        back = w[None, :] / w[:, None]
        es.append(e * back)
        p1s.append(p1 * back)
        p2s.append(p2 * back)
    return np.stack(es), np.stack(p1s), np.stack(p2s)


# --- configuration and results -------------------------------------------------


class Scheme(enum.Enum):
    ETD1 = "ETD1"
    ETD2 = "ETD2"


class Status(enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUp"
    NEAR_SINGULAR = "NearSingular"


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_final: float
    scheme: Scheme = Scheme.ETD2
    blowup_threshold: float = 1e8
    record_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final * (1 + 1e-12):
            raise ValueError("dt must not exceed t_final")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    @property
    def n_steps(self):
        # uniform steps no longer than dt that land exactly on t_final
        return max(1, math.ceil(self.t_final / self.dt - 1e-9))

    @property
    def step(self):
        return self.t_final / self.n_steps


NORM_COLUMNS = ("z_norm", "x23_norm_u", "x13_norm_v", "x0_norm_w")


@dataclass
class Trajectory:
    """Recorded states of a run.

    ``u``, ``v``, ``w`` have shape (n_records, N). ``status`` is final;
    ``t_star`` is the blow-up time when status is BLOWUP.
    """

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    coords: Coords
    norms: dict
    status: Status = Status.COMPLETED
    t_star: float = None
    meta: dict = field(default_factory=dict)

    def state(self, i):
        return SpectralState(self.u[i], self.v[i], self.w[i], self.coords)

    def __len__(self):
        return len(self.times)

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", *NORM_COLUMNS, "status"])
        last = len(self.times) - 1
        for i, t in enumerate(self.times):
            st = self.status.value if i == last else "Running"
            wr.writerow([f"{t:.17g}", *(f"{self.norms[c][i]:.17g}" for c in NORM_COLUMNS), st])
        return buf.getvalue()

    def to_json(self, include_states=True):
        pairs = lambda arr: [[[float(z.real), float(z.imag)] for z in row] for row in arr]  # noqa: E731
        doc = {"coords": self.coords.value, "status": self.status.value,
               "t_star": self.t_star, "times": [float(t) for t in self.times]}
        if include_states:
            doc.update(u=pairs(self.u), v=pairs(self.v), w=pairs(self.w))
        return json.dumps(doc)


class _Recorder:
    def __init__(self, eigs, coords):
        self.eigs, self.coords = eigs, coords
        self.times, self.rows = [], []

    def add(self, t, y):
        self.times.append(float(t))
        self.rows.append(np.array(y, copy=True))

    def build(self, status, t_star=None, meta=None):
        ys = np.array(self.rows)
        norms = {c: [] for c in NORM_COLUMNS}
        for y in ys:
            nu = scale_norm(2 / 3, y[:, 0], self.eigs)
            nv = scale_norm(1 / 3, y[:, 1], self.eigs)
            nw = scale_norm(0, y[:, 2], self.eigs)
            norms["z_norm"].append(math.sqrt(nu * nu + nv * nv + nw * nw))
            norms["x23_norm_u"].append(nu)
            norms["x13_norm_v"].append(nv)
            norms["x0_norm_w"].append(nw)
        norms = {c: np.array(v) for c, v in norms.items()}
        return Trajectory(np.array(self.times), ys[:, :, 0], ys[:, :, 1], ys[:, :, 2],
                          self.coords, norms, status, t_star, meta or {})


def _z_norm_rows(y, eigs):
    wts = np.stack([eigs.values ** (2 / 3), eigs.values ** (1 / 3), np.ones(len(eigs))], axis=1)
    return float(np.sqrt(np.cumsum(np.abs(wts * y).ravel() ** 2)[-1]))


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise NumericalFailure(f"non-finite state at t={t:.6g}")


def _regime_meta(eta):
    return {"eta": float(eta), "ill_posed_regime": bool(eta < 1)}


def etd_solve(initial, eta, f, cfg, eigs, source=None):
    """Integrate the mild-solution formula with ETD1 or ETD2 (Cox-Matthews ETD2RK).

    ``source(t)``, if given, returns extra coefficients added to the
    w-equation (used for manufactured solutions). The run stops with
    status BLOWUP as soon as the Z norm exceeds ``cfg.blowup_threshold``.
    """
    check_state(initial, eigs)
    kind = BlockKind.NATURAL_A if initial.coords is Coords.NATURAL else BlockKind.REDUCED_B
    h, n = cfg.step, cfg.n_steps
    e, p1, p2 = _weighted_phis(kind, eta, eigs, h)

    def forcing(t, y):
        g = nemytskii(f, y[:, 0], eigs)
        if source is not None:
            g = g + np.asarray(source(t), dtype=complex)
        out = np.zeros_like(y)
        out[:, 2] = g
        return out

    def mv(mats, y):
        return np.einsum("nij,nj->ni", mats, y)

    y = initial.stacked().astype(complex)
    rec = _Recorder(eigs, initial.coords)
    rec.add(0.0, y)
    meta = _regime_meta(eta)
    for k in range(n):
        t = k * h
        fk = forcing(t, y)
        ynew = mv(e, y) + h * mv(p1, fk)
        if cfg.scheme is Scheme.ETD2:
            _check_finite(ynew, t + h)
            ynew = ynew + h * mv(p2, forcing(t + h, ynew) - fk)
        y = ynew
        _check_finite(y, t + h)
        if _z_norm_rows(y, eigs) > cfg.blowup_threshold:
            rec.add(t + h, y)
            return rec.build(Status.BLOWUP, t + h, meta)
        if (k + 1) % cfg.record_every == 0 or k + 1 == n:
            rec.add((k + 1) * h if k + 1 < n else cfg.t_final, y)
    return rec.build(Status.COMPLETED, None, meta)


def _hermite_recovery(u, v0, w0, v1, w1, a, h, phis):
    """Exact integration of u' + a u = p(s) over one step.

    p is the cubic Hermite interpolant of v with slopes w (v' = w holds
    for the second-order subsystem).
    """
    e, f1, f2, f3, f4 = phis
    dv = (v1 - v0) / h
    c2 = (3 * dv - 2 * w0 - w1) / h
    c3 = (w0 + w1 - 2 * dv) / (h * h)
    return (e * u + h * f1 * v0 + h**2 * f2 * w0
            + 2 * h**3 * f3 * c2 + 6 * h**4 * f4 * c3)


def reduction_solve(u0_hat, v0_hat, w0_hat, eta, f, cfg, eigs, source=None):
    """Two-stage solve through ``v = u_t + A^{1/3} u``.

    Inputs are natural-coordinate data (u, u_t, u_tt). The pair (v, v_t)
    is advanced with the 2x2 second-order block and forcing g = f(u); u is
    then recovered each step from ``u' + A^{1/3} u = v`` with an exact
    exponential integrator. The returned trajectory is in reduced
    coordinates.
    """
    nat = SpectralState(u0_hat, v0_hat, w0_hat, Coords.NATURAL)
    red = natural_to_reduced(nat, eigs)
    h, n = cfg.step, cfg.n_steps
    e, p1, p2 = _weighted_phis(BlockKind.LAMBDA, eta, eigs, h)
    a = eigs.cube_roots
    phis = phi_scalar(-a * h, 4)

    def gforce(t, u):
        g = nemytskii(f, u, eigs)
        if source is not None:
            g = g + np.asarray(source(t), dtype=complex)
        out = np.zeros((len(eigs), 2), dtype=complex)
        out[:, 1] = g
        return out

    def mv(mats, y):
        return np.einsum("nij,nj->ni", mats, y)

    u = red.u_hat.copy()
    vw = np.stack([red.v_hat, red.w_hat], axis=1)
    rec = _Recorder(eigs, Coords.REDUCED)
    rec.add(0.0, np.column_stack([u, vw]))
    meta = _regime_meta(eta)
    for k in range(n):
        t = k * h
        gk = gforce(t, u)
        vw_new = mv(e, vw) + h * mv(p1, gk)
        if cfg.scheme is Scheme.ETD2:
            u_pred = _hermite_recovery(u, vw[:, 0], vw[:, 1], vw_new[:, 0], vw_new[:, 1], a, h, phis)
            _check_finite(u_pred, t + h)
            vw_new = vw_new + h * mv(p2, gforce(t + h, u_pred) - gk)
        u = _hermite_recovery(u, vw[:, 0], vw[:, 1], vw_new[:, 0], vw_new[:, 1], a, h, phis)
        vw = vw_new
        y = np.column_stack([u, vw])
        _check_finite(y, t + h)
        if _z_norm_rows(y, eigs) > cfg.blowup_threshold:
            rec.add(t + h, y)
            return rec.build(Status.BLOWUP, t + h, meta)
        if (k + 1) % cfg.record_every == 0 or k + 1 == n:
            rec.add((k + 1) * h if k + 1 < n else cfg.t_final, y)
    return rec.build(Status.COMPLETED, None, meta)


def _random_field_coeffs(rng, eigs, radius):
    """Real coefficients with ``||phi||_{X^{1/3}} = radius * U(0, 1)``."""
    c = rng.standard_normal(len(eigs)) * eigs.values ** (-1 / 3)
    c = c / scale_norm(1 / 3, c, eigs)
    return c * radius * rng.uniform(0.0, 1.0)


def lipschitz_probe(f, radius, samples, eigs, seed=0):
    """Monte-Carlo estimate of the constant c in

        ||f(p1) - f(p2)||_X <= c ||p1 - p2||_{X^{1/3}} (1 + ||p1||^{rho-1} + ||p2||^{rho-1})

    over random pairs in the X^{1/3} ball of the given radius. Pairs closer
    than 1e-14 are skipped.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if int(samples) != samples or samples < 2:
        raise ValueError("samples must be an integer >= 2")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(int(samples)):
        p1 = _random_field_coeffs(rng, eigs, radius)
        p2 = _random_field_coeffs(rng, eigs, radius)
        dist = scale_norm(1 / 3, p1 - p2, eigs)
        n1, n2 = scale_norm(1 / 3, p1, eigs), scale_norm(1 / 3, p2, eigs)
        denom = dist * (1 + n1 ** (f.rho - 1) + n2 ** (f.rho - 1))
        if denom < 1e-14:
            continue
        num = scale_norm(0, nemytskii(f, p1, eigs) - nemytskii(f, p2, eigs), eigs)
        best = max(best, num / denom)
    return best
