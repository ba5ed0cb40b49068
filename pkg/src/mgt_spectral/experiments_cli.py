"""Command-line front end for the spectral experiments.

Every subcommand writes one artifact (CSV or JSON) to ``--output`` or
stdout. Options can also come from a UTF-8 ``key=value`` file passed with
``--config``; command-line flags win on conflict.

Exit codes: 0 on success (a detected blow-up counts as success), 1 on a
configuration error, 2 on a numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np
from scipy.optimize import linear_sum_assignment

from .block_operators import (BRANCHES, BlockKind, classify, closed_form_spectrum,
                              dissipativity_witness, mode_block, scan_resolvent)
from .errors import NearSingularError, NumericalFailure, RegimeError
from .nonlinear_solver import (NonlinearityForm, NonlinearitySpec, Scheme, SolverConfig,
                               etd_solve, reduction_solve)
from .semigroup import decay_rate, predicted_rate, smoothing_constant
from .spectral_core import (Coords, SpectralState, dirichlet_eigs, reduced_to_natural,
                            z_norm)

EXPERIMENTS = ("spectrum", "regime", "resolvent-scan", "illposed-demo", "smoothing",
               "evolve", "dissipativity")


class ConfigError(Exception):
    pass


def fmt(x):
    return f"{float(x) + 0.0:.17g}"


def _floats(text):
    try:
        return [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


# (flag, type, default, required, help); defaults are applied after the config file merge
COMMON = [
    ("eta", float, None, True, "damping parameter eta >= 0"),
    ("n-modes", _positive_int, 64, False, "number of Dirichlet modes"),
    ("length", _positive_float, math.pi, False, "interval length L of (0, L)"),
    ("output", str, None, False, "output file (default: stdout)"),
    ("seed", _seed, 0, False, "seed for randomized inputs"),
]

SPECIFIC = {
    "spectrum": [("block", str, "natural", False, "natural or reduced")],
    "regime": [],
    "resolvent-scan": [
        ("angles", _floats, [3 * math.pi / 4, -3 * math.pi / 4], False, "ray angles (radians)"),
        ("radii", _floats, list(np.logspace(0, 4, 9)), False, "radii along each ray"),
    ],
    "illposed-demo": [],
    "smoothing": [
        ("alpha", _floats, [0.5], False, "smoothing exponents in (0, 1]"),
        ("times", _floats, [1e-3, 1e-2, 1e-1, 1.0], False, "sample times"),
    ],
    "evolve": [
        ("dt", _positive_float, None, True, "time step"),
        ("t-final", _positive_float, None, True, "final time"),
        ("scheme", str, "ETD2", False, "ETD1 or ETD2"),
        ("solver", str, "etd", False, "etd (3x3 system) or reduction (v = u_t + A^{1/3}u)"),
        ("nonlinearity", str, "cubic", False, "zero, cubic or powersign"),
        ("kappa", float, -1.0, False, "nonlinearity coefficient"),
        ("rho", float, 3.0, False, "power for powersign"),
        ("amplitude", _positive_float, 0.1, False, "Z-norm of the random initial state"),
        ("blowup-threshold", _positive_float, 1e8, False, "Z-norm that ends a run as blow-up"),
        ("record-every", _positive_int, 1, False, "record every k-th step"),
    ],
    "dissipativity": [
        ("mu", _positive_float, 1.0, False, "eigenvalue of A"),
        ("u", float, 1.0, False, "witness amplitude"),
    ],
}


def _options(experiment):
    opts = list(SPECIFIC[experiment])
    common = COMMON if experiment != "dissipativity" else [o for o in COMMON if o[0] != "eta"]
    return common + opts


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="mgt-experiments", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT", parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        for flag, typ, _default, _req, help_ in _options(name):
            p.add_argument(f"--{flag}", type=typ, default=None, help=help_)
    return parser


def read_config_file(path):
    """Parse ``key=value`` lines; '#' starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    out = {}
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("_", "-")] = (value, i)
    return out


def resolve_config(args):
    """Merge command-line flags, config-file values and defaults into a dict."""
    file_values = read_config_file(args.config) if args.config else {}
    options = _options(args.experiment)
    known = {o[0] for o in options}
    for key, (_, line) in file_values.items():
        if key not in known:
            raise ConfigError(f"{args.config}:{line}: unknown key {key!r} for {args.experiment}")
    cfg = {"experiment": args.experiment}
    for flag, typ, default, required, _ in options:
        attr = flag.replace("-", "_")
        value = getattr(args, attr)
        if value is None and flag in file_values:
            text, line = file_values[flag]
            try:
                value = typ(text)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise ConfigError(f"{args.config}:{line}: bad value for {flag}: {exc}")
        if value is None:
            if required:
                raise ConfigError(f"missing required flag --{flag}")
            value = default
        cfg[attr] = value
    if "eta" in cfg and not (cfg["eta"] >= 0 and math.isfinite(cfg["eta"])):
        raise ConfigError(f"--eta must be finite and >= 0, got {cfg['eta']!r}")
    return cfg


def check_threads_env():
    raw = os.environ.get("MGT_THREADS", "").strip()
    if not raw:
        return 0
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"MGT_THREADS must be a nonnegative integer, got {raw!r}")
    if n < 0:
        raise ConfigError(f"MGT_THREADS must be a nonnegative integer, got {raw!r}")
    return n


def _csv(header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


# --- experiments -----------------------------------------------------------------


def run_spectrum(cfg, eigs):
    try:
        kind = BlockKind(cfg["block"])
    except ValueError:
        raise ConfigError(f"--block must be natural or reduced, got {cfg['block']!r}")
    if kind is BlockKind.LAMBDA:
        raise ConfigError("--block must be natural or reduced")
    closed = closed_form_spectrum(kind, cfg["eta"], eigs).reshape(-1, 3)
    rows = []
    for n, (mu, vals) in enumerate(zip(eigs.values, closed), 1):
        oracle = np.linalg.eigvals(-mode_block(kind, cfg["eta"], mu).matrix)
        cost = np.abs(vals[:, None] - oracle[None, :])
        _, perm = linear_sum_assignment(cost)
        for branch, val, orc in zip(BRANCHES[kind], vals, oracle[perm]):
            rows.append([n, fmt(mu), branch, fmt(val.real), fmt(val.imag),
                         fmt(orc.real), fmt(orc.imag)])
    return _csv(["mode", "mu", "branch", "re", "im", "oracle_re", "oracle_im"], rows)


def run_regime(cfg, eigs):
    return classify(cfg["eta"], eigs).to_json(sort_keys=True) + "\n"


def run_resolvent_scan(cfg, eigs):
    scan = scan_resolvent(cfg["eta"], eigs, cfg["angles"], cfg["radii"])
    rows = [[fmt(th), fmt(r), fmt(scan.m_local[i, j])]
            for i, th in enumerate(scan.angles) for j, r in enumerate(scan.radii)]
    return _csv(["arg", "r", "M_local"], rows)


def run_illposed(cfg, eigs):
    rows = []
    for n, mu in enumerate(eigs.values, 1):
        rows.append([n, fmt(predicted_rate(cfg["eta"], mu)), fmt(-decay_rate(cfg["eta"], mu))])
    return _csv(["mode", "predicted_rate", "measured_rate"], rows)


def run_smoothing(cfg, eigs):
    rows = []
    for alpha in cfg["alpha"]:
        if not 0 < alpha <= 1:
            raise ConfigError(f"--alpha values must lie in (0, 1], got {alpha}")
        for t in cfg["times"]:
            if not t > 0:
                raise ConfigError(f"--times values must be positive, got {t}")
            rows.append([fmt(t), fmt(alpha), fmt(smoothing_constant(cfg["eta"], alpha, t, eigs))])
    return _csv(["t", "alpha", "weighted_sup"], rows)


def random_initial_state(eigs, amplitude, seed):
    """Real coefficients with decaying spectrum, scaled to the requested Z norm."""
    rng = np.random.default_rng(seed)
    n = len(eigs)
    decay = eigs.values ** (-2 / 3)
    st = SpectralState(rng.standard_normal(n) * decay, rng.standard_normal(n) * decay,
                       rng.standard_normal(n) * decay, Coords.REDUCED)
    scale = amplitude / z_norm(st, eigs)
    return SpectralState(st.u_hat * scale, st.v_hat * scale, st.w_hat * scale, Coords.REDUCED)


def run_evolve(cfg, eigs):
    try:
        form = NonlinearityForm(cfg["nonlinearity"].lower())
        scheme = Scheme(cfg["scheme"].upper())
    except ValueError as exc:
        raise ConfigError(str(exc))
    if cfg["solver"] not in ("etd", "reduction"):
        raise ConfigError(f"--solver must be etd or reduction, got {cfg['solver']!r}")
    try:
        f = NonlinearitySpec(form, cfg["kappa"], cfg["rho"])
        solver_cfg = SolverConfig(cfg["dt"], cfg["t_final"], scheme, cfg["blowup_threshold"],
                                  cfg["record_every"])
    except ValueError as exc:
        raise ConfigError(str(exc))
    init = random_initial_state(eigs, cfg["amplitude"], cfg["seed"])
    if cfg["solver"] == "etd":
        traj = etd_solve(init, cfg["eta"], f, solver_cfg, eigs)
    else:
        nat = reduced_to_natural(init, eigs)
        traj = reduction_solve(nat.u_hat, nat.v_hat, nat.w_hat, cfg["eta"], f, solver_cfg, eigs)
    return traj.to_csv()


def run_dissipativity(cfg, eigs=None):
    return json.dumps(dissipativity_witness(cfg["mu"], cfg["u"])) + "\n"


RUNNERS = {
    "spectrum": run_spectrum,
    "regime": run_regime,
    "resolvent-scan": run_resolvent_scan,
    "illposed-demo": run_illposed,
    "smoothing": run_smoothing,
    "evolve": run_evolve,
    "dissipativity": run_dissipativity,
}


def run(cfg):
    """Run one experiment from a resolved config dict and return its text output."""
    eigs = None
    if cfg["experiment"] != "dissipativity":
        eigs = dirichlet_eigs(cfg["n_modes"], cfg["length"])
    return RUNNERS[cfg["experiment"]](cfg, eigs)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.experiment is None:
            raise ConfigError("missing experiment name (one of " + ", ".join(EXPERIMENTS) + ")")
        check_threads_env()
        cfg = resolve_config(args)
        text = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, NearSingularError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    if cfg["output"]:
        try:
            with open(cfg["output"], "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg['output']}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0
