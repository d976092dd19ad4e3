"""Experiment execution, parameter sweeps and deterministic file output."""

import hashlib
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import ANALYTIC_KINDS, ConfigError, build_config
from .fock import condensate_state, number_state, two_mode_hamiltonian
from .lindblad import (
    decay_constant_meanfield_analytic,
    decay_constant_numeric,
    decay_constant_qubit_analytic,
    evolve_master,
    pure_density,
    random_density,
)
from .meanfield import (
    OrderParameter,
    PhaseNumberState,
    compare_gp_to_exact,
    integrate_phase_number,
    small_oscillation_frequency,
)
from .unitary import extract_frequency, qubit_probability

ANALYTIC_POINT_CAP = 10**6
EVOLUTION_POINT_CAP = 10**3


class Result:
    """Outcome of one experiment: an optional table and scalar results."""

    def __init__(self, columns=None, rows=None, summary=None, table_name=None):
        self.columns = columns or []
        self.rows = rows or []
        self.summary = summary or {}
        self.table_name = table_name


def format_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".16e")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _frequency_or_nan(times, signal):
    try:
        return extract_frequency(times, signal)
    except ValueError:
        return float("nan")


def _run_qubit(cfg):
    v = cfg.values
    c = cfg.charge
    t = cfg.grid.times
    p = qubit_probability(c, np.array(v["initial.phi0"]), t)
    detuning = 4.0 * c.E_C * (1.0 - 2.0 * c.n_g)
    predicted = math.hypot(detuning, c.E_J)
    measured = _frequency_or_nan(t, p)
    summary = {
        "measured_frequency": measured,
        "predicted_frequency": predicted,
        "E_J": c.E_J,
        "relative_error": abs(measured - predicted) / predicted if predicted else float("nan"),
        "p_min": float(p.min()),
        "p_max": float(p.max()),
    }
    rows = list(zip(t, p))
    return Result(["t", "p"], rows, summary, "series.csv")


def _run_gp_oscillation(cfg):
    v = cfg.values
    E, E_J = v["phase.E"], v["phase.E_J"]
    s0 = PhaseNumberState(v["phase.n0"], v["phase.theta0"])
    traj = integrate_phase_number(E, E_J, s0, cfg.grid, cfg.tol)
    measured = _frequency_or_nan(traj.times, traj.n)
    predicted = small_oscillation_frequency(E, E_J)
    energy = traj.first_integral(E, E_J)
    summary = {
        "measured_frequency": measured,
        "predicted_frequency": predicted,
        "relative_error": abs(measured - predicted) / predicted if predicted else float("nan"),
        "first_integral_drift": float(np.max(np.abs(energy - energy[0]))),
    }
    rows = list(zip(traj.times, traj.n, traj.theta))
    return Result(["t", "n", "theta"], rows, summary, "series.csv")


def _run_gp_vs_exact(cfg):
    v = cfg.values
    psi0 = OrderParameter(v["initial.psi1"], v["initial.psi2"])
    rep = compare_gp_to_exact(cfg.two_mode, psi0, cfg.grid, cfg.tol, v["exact.method"])
    summary = {"max_deviation": rep.max_deviation, "rms_deviation": rep.rms_deviation}
    rows = list(zip(rep.times, rep.exact_fraction, rep.gp_fraction, rep.deviation))
    return Result(["t", "exact_fraction", "gp_fraction", "deviation"], rows, summary, "series.csv")


def _initial_master_state(cfg):
    v = cfg.values
    N = cfg.two_mode.N
    state = v["initial.state"]
    if state == "fock":
        return number_state(v["initial.n1"], N)
    if state == "condensate":
        return condensate_state(v["initial.psi1"], v["initial.psi2"], N)
    return None


def _run_master(cfg):
    v = cfg.values
    H = two_mode_hamiltonian(cfg.two_mode)
    phi = _initial_master_state(cfg)
    if phi is None:
        rho0 = random_density(cfg.two_mode.N, np.random.default_rng(cfg.seed))
    else:
        rho0 = pure_density(phi)
    traj = evolve_master(H, cfg.noise, rho0, cfg.grid, cfg.tol, store_states=False)
    summary = {
        "max_trace_error": float(np.max(np.abs(traj.trace - 1))),
        "min_eigenvalue": float(traj.min_eigenvalue.min()),
        "final_fidelity": float(traj.fidelity[-1]),
        "final_occupation": float(traj.occupation[-1]),
    }
    if phi is not None:
        summary["initial_decay_constant"] = decay_constant_numeric(phi, cfg.noise)
    rows = list(zip(traj.times, traj.trace, traj.occupation, traj.fidelity, traj.min_eigenvalue))
    return Result(["t", "trace", "occupation", "fidelity", "min_eigenvalue"], rows, summary, "series.csv")


DECAY_COLUMNS = [
    "n_bar1", "N", "gamma", "delta", "beta_re", "beta_im", "theta",
    "gamma_qubit", "gamma_meanfield", "gamma_qubit_numeric", "gamma_meanfield_numeric",
    "ratio", "agreement",
]


def decay_row(cfg):
    v = cfg.values
    n = cfg.noise
    n1, N, theta = v["decay.n_bar1"], v["model.N"], v["decay.theta"]
    gq = decay_constant_qubit_analytic(n1, N, n)
    gm = decay_constant_meanfield_analytic(n1, N, theta, n)
    gq_num = gm_num = float("nan")
    if N <= v["decay.numeric_max_N"]:
        gq_num = decay_constant_numeric(number_state(n1, N), n)
        f = n1 / N
        phi = condensate_state(np.sqrt(f), np.sqrt(1 - f) * np.exp(-1j * theta), N)
        gm_num = decay_constant_numeric(phi, n)
    ratio = gq / gm if gm > 0 else float("nan")
    return dict(zip(DECAY_COLUMNS, [
        n1, N, n.gamma, n.delta, n.beta.real, n.beta.imag, theta,
        gq, gm, gq_num, gm_num, ratio, ratio / n1,
    ]))


def _run_decay(cfg):
    row = decay_row(cfg)
    if not row["gamma_meanfield"] > 0:
        raise ZeroDivisionError(f"mean-field decay constant is {row['gamma_meanfield']!r}; ratio undefined")
    return Result(DECAY_COLUMNS, [tuple(row[c] for c in DECAY_COLUMNS)], row, "decay.csv")


RUNNERS = {
    "qubit-oscillation": _run_qubit,
    "gp-oscillation": _run_gp_oscillation,
    "gp-vs-exact": _run_gp_vs_exact,
    "master-evolution": _run_master,
    "decay-compare": _run_decay,
}


def run_experiment(cfg):
    """Run a single (non-sweep) experiment and return its :class:`Result`."""
    if cfg.kind == "decay-sweep":
        return sweep(cfg)
    if cfg.axes:
        raise ConfigError("sweep axes present; use 'scb-dyn sweep'", key=f"sweep.{cfg.axes[0].key}")
    return RUNNERS[cfg.kind](cfg)


def _point_summary(args):
    cfg, overrides = args
    point = cfg.with_overrides(overrides)
    if point.kind in ANALYTIC_KINDS:
        # a vanishing mean-field rate shows up as a NaN ratio in its row
        return decay_row(point)
    return RUNNERS[point.kind](point).summary


def sweep(cfg, axes=(), jobs=1, max_points=None):
    """Evaluate the experiment on the Cartesian grid of config and extra axes.

    Rows come out in ``itertools.product`` order of the axes (first axis
    slowest) regardless of ``jobs``.
    """
    axes = list(cfg.axes) + list(axes)
    keys = [a.key for a in axes]
    if len(set(keys)) != len(keys):
        raise ConfigError("axis given twice", key=next(k for k in keys if keys.count(k) > 1))
    n_points = math.prod(len(a) for a in axes)
    cap = max_points
    if cap is None:
        cap = ANALYTIC_POINT_CAP if cfg.kind in ANALYTIC_KINDS else EVOLUTION_POINT_CAP
    if n_points > cap:
        raise ConfigError(f"sweep has {n_points} points, cap is {cap}", key=keys[0] if keys else None)

    base = {k: v for k, v in cfg.raw.items() if not k.startswith("sweep.")}
    base_cfg = build_config(base, cfg.lines, with_axes=False)
    points = []
    for combo in itertools.product(*(a.values for a in axes)):
        overrides = {k: repr(val) for k, val in zip(keys, combo)}
        # validate every point up front so config errors surface before work starts
        base_cfg.with_overrides(overrides)
        points.append((combo, overrides))

    tasks = [(base_cfg, ov) for _, ov in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_point_summary, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        summaries = [_point_summary(t) for t in tasks]

    result_cols = []
    for s in summaries:
        for k in s:
            if k not in result_cols and k not in keys:
                result_cols.append(k)
    columns = keys + result_cols
    rows = []
    for (combo, _), s in zip(points, summaries):
        rows.append(tuple(combo) + tuple(s.get(c, float("nan")) for c in result_cols))
    summary = {"n_points": len(rows), "axes": ",".join(keys)}
    if "agreement" in result_cols and rows:
        col = columns.index("agreement")
        agreements = [r[col] for r in rows]
        summary["agreement_min"] = float(np.nanmin(agreements))
        summary["agreement_max"] = float(np.nanmax(agreements))
    return Result(columns, rows, summary, "sweep.csv")


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(x) for x in row) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_outputs(cfg, result, out_dir):
    """Write the table and ``summary.json``; return ``{filename: sha256}``."""
    os.makedirs(out_dir, exist_ok=True)
    files = []
    if result.table_name:
        write_csv(os.path.join(out_dir, result.table_name), result.columns, result.rows)
        files.append(result.table_name)
    summary = {
        "kind": cfg.kind,
        "version": __version__,
        "config": cfg.echo(),
        "results": {k: _json_value(v) for k, v in result.summary.items()},
    }
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append("summary.json")
    return {name: _sha256(os.path.join(out_dir, name)) for name in files}


def write_manifest(out_dir, cfg_echo, duration, files, status="ok", error=None, exit_code=0):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "config": cfg_echo,
        "version": __version__,
        "wall_clock_seconds": duration,
        "files": files,
        "status": status,
        "exit_code": exit_code,
    }
    if error is not None:
        manifest["error"] = error
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start
