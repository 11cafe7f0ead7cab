"""Configuration-driven experiment runner.

Every simulation and calculator in the package is exposed as a subcommand
producing deterministic CSV/JSON artifacts:

    coupled-dyson <subcommand> [--config FILE] [--seed U64] [--out DIR]
                  [--threads INT] [--check]

CSV artifacts open with a comment line carrying the resolved-config hash,
the master seed, and the schema version; artifact bytes are a pure function
of (config, seed). Exit codes: 0 success, 2 config error, 3 numerical
failure, 4 acceptance-check failure in --check mode.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import burgers, eigen_sde, ldp, matrix_sde, spectral, trace_flow
from .core_noise import CouplingModel, NoiseCorrelationError, SeededRng, UnstableModelError, validate_model

SCHEMA_VERSION = "1.0.0"


class ConfigError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "traces": {
        "master_seed": 2024,
        "model": {"k": 2, "N": 1, "beta": 1.0, "gamma": 0.25, "rho": 0.3},
        "sampler": "exact",            # "exact" (stationary) or "euler"
        "n_samples": 100000,
        "spacing": 2.0,
        "n_chains": 100,
        "burn_in": 30,
        "T": 50.0,                     # euler sampler only
        "dt": 1e-3,
        "replicas": 4,
        "tolerance": 0.05,
    },
    "matrix": {
        "master_seed": 2024,
        "model": {"k": 2, "N": 30, "beta": 1.0, "gamma": 0.2, "rho": 0.0},
        "T": 5.0,
        "dt": 1e-3,
        "replicas": 4,
        "record_every": 100,
        "exact": False,
        "spectra": True,
    },
    "eigen": {
        "master_seed": 2024,
        "model": {"k": 2, "N": 50, "beta": 1.0, "gamma": 0.2, "rho": 0.0},
        "T": 2.0,
        "dt": 1e-3,
        "replicas": 4,
        "record_every": 100,
        "initial": "perturbed_zero",   # or "semicircle"
        "lyapunov": True,
    },
    "semicircle-check": {
        "master_seed": 2024,
        "model": {"k": 1, "N": 200, "beta": 1.0, "gamma": 0.5, "rho": None},
        "T": 10.0,
        "dt": 1e-3,
        "replicas": 20,
        "threshold": 0.05,
    },
    "burgers": {
        "master_seed": 2024,
        "model": {"k": 1, "N": 1, "beta": 1.0, "gamma": 0.0, "rho": None},
        "contour": {"L": 8.0, "h": 0.01, "y0": 0.5},
        "initial": "point_mass",       # "point_mass" | "semicircle"
        "T": 1.0,
        "dt": None,
        "oracle_tolerance": 1e-3,
    },
    "instanton": {
        "master_seed": 2024,
        "gamma": 0.2,
        "rho": 0.1,
        "target": [1.0, 0.5],
        "T": 20.0,
        "steps": 2000,
    },
    "rate-sweep": {
        "master_seed": 2024,
        "gamma": 0.2,
        "rho": 0.0,
        "grid": {"lo": -2.0, "hi": 2.0, "n": 41},
        "gamma_sweep": {"lo": -0.49, "hi": 0.49, "n": 99},
    },
    "volume": {
        "master_seed": 2024,
        "model": {"k": 1, "N": 50, "beta": 1.0, "gamma": 0.5, "rho": None},
        "T": 2.0,
        "dt": 1e-3,
        "replicas": 20,
        "record_every": 20,
        "initial": "semicircle",
        "J0": 1.0,
    },
    "sff": {
        "master_seed": 2024,
        "model": {"k": 1, "N": 200, "beta": 1.0, "gamma": 0.5, "rho": None},
        "T": 20.0,
        "dt": 0.5,
        "t_min": 0.1,
        "t_max": 100.0,
        "n_times": 200,
        "late_window": [40.0, 60.0],
    },
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in out:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(val, dict) and isinstance(out[key], dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(scenario, path=None, seed=None):
    if scenario not in DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    cfg = copy.deepcopy(DEFAULTS[scenario])
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = _merge(cfg, user)
    if seed is not None:
        cfg["master_seed"] = int(seed)
    cfg["scenario"] = scenario
    return cfg


def config_hash(cfg):
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def build_model(spec):
    """CouplingModel from the config "model" block.

    Scalar gamma/rho are expanded: k = 1 uses gamma as the damping; k = 2
    uses the symmetric pair (damping 1/2, coupling gamma); explicit matrices
    are passed through.
    """
    k = int(spec.get("k", 1))
    n = int(spec.get("N", 1))
    beta = float(spec.get("beta", 1.0))
    gamma = spec.get("gamma", 0.5)
    rho = spec.get("rho", None)
    if np.isscalar(gamma) or gamma is None:
        if k == 1:
            gamma_m = np.array([[float(gamma)]])
        elif k == 2:
            g = float(gamma)
            gamma_m = np.array([[0.5, g], [g, 0.5]])
        else:
            raise ConfigError("scalar gamma only supported for k <= 2")
    else:
        gamma_m = np.asarray(gamma, dtype=float)
    if rho is None:
        rho_m = np.eye(k)
    elif np.isscalar(rho):
        if k != 2:
            raise ConfigError("scalar rho only supported for k = 2")
        r = float(rho)
        rho_m = np.array([[1.0, r], [r, 1.0]])
    else:
        rho_m = np.asarray(rho, dtype=float)
    try:
        return CouplingModel(k=k, N=n, gamma=gamma_m, rho=rho_m, beta=beta)
    except (ValueError, NoiseCorrelationError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# artifact writers

def _format(v):
    return f"{v:.17g}"


def write_csv(path, columns, rows, meta):
    lines = [f"# config_hash={meta['config_hash']} seed={meta['seed']} version={SCHEMA_VERSION}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
    return str(path)


def write_json(path, payload, meta):
    doc = {"config_hash": meta["config_hash"], "seed": meta["seed"],
           "version": SCHEMA_VERSION}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return str(path)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# replica parallelism (deterministic: one noise stream per replica)

_WORKER = None


def _init_worker(fn, args):
    global _WORKER
    _WORKER = (fn, args)


def _run_worker(replica):
    fn, args = _WORKER
    return fn(replica, *args)


def map_replicas(fn, n_replicas, threads, args=()):
    """Ordered [fn(i, *args) for i in range(n_replicas)], optionally parallel.

    Results are identical for any thread count because each replica draws
    from its own (master_seed, replica) stream.
    """
    if threads <= 1 or n_replicas <= 1:
        return [fn(i, *args) for i in range(n_replicas)]
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                             initargs=(fn, args)) as pool:
        return list(pool.map(_run_worker, range(n_replicas)))


# ---------------------------------------------------------------------------
# subcommands

def _trace_euler_replica(replica, cfg):
    model = build_model(cfg["model"])
    rng = SeededRng(cfg["master_seed"], replica)
    path = trace_flow.simulate_coupled_traces(model, cfg["T"], cfg["dt"], rng)
    return path.times, path.values[0]


def run_traces(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    closed = trace_flow.stationary_covariance(model)
    rows = []
    if cfg["sampler"] == "exact":
        per_chain = -(-int(cfg["n_samples"]) // int(cfg["n_chains"]))
        samples = trace_flow.sample_stationary_traces(
            model, cfg["n_samples"], SeededRng(cfg["master_seed"], 0),
            spacing=cfg["spacing"], n_chains=cfg["n_chains"], burn_in=cfg["burn_in"])
        flat = samples
        table = samples.reshape(per_chain, cfg["n_chains"], model.k)
        for m in range(table.shape[0]):
            t = (m + 1) * cfg["spacing"]
            for c in range(table.shape[1]):
                rows.append([t] + [float(v) for v in table[m, c]] + [c])
    elif cfg["sampler"] == "euler":
        results = map_replicas(_trace_euler_replica, int(cfg["replicas"]), threads, (cfg,))
        keep = []
        for replica, (times, values) in enumerate(results):
            for i in range(len(times)):
                rows.append([float(times[i])] + [float(v) for v in values[i]] + [replica])
            keep.append(values[len(times) // 2:])
        flat = np.concatenate(keep).reshape(-1, model.k)
    else:
        raise ConfigError(f"unknown sampler {cfg['sampler']!r}")
    emp = flat.T @ flat / len(flat)
    rel = float(np.abs(emp - closed.sigma).max() / np.abs(closed.sigma).max())
    entry_ok = bool(np.all(np.abs(emp - closed.sigma) <= cfg["tolerance"] * np.abs(closed.sigma)))
    columns = ["t"] + [f"tau_{p + 1}" for p in range(model.k)] + ["replica"]
    csv_path = write_csv(Path(out_dir) / "traces.csv", columns, rows, meta)
    report = {
        "empirical_covariance": _jsonable(emp),
        "closed_form_covariance": _jsonable(closed.sigma),
        "closed_form_determinant": closed.det,
        "max_rel_error": rel,
        "tolerance": cfg["tolerance"],
        "n_samples": int(len(flat)),
        "pass": entry_ok,
    }
    json_path = write_json(Path(out_dir) / "stationary_covariance.json", report, meta)
    if check and not entry_ok:
        raise CheckFailure(f"stationary covariance off by {rel:.3%}")
    return [csv_path, json_path]


def _matrix_replica(replica, cfg):
    model = build_model(cfg["model"])
    rng = SeededRng(cfg["master_seed"], replica)
    res = matrix_sde.run_matrix_path(
        model, cfg["T"], cfg["dt"], rng, record_every=int(cfg["record_every"]),
        record_eigenvalues=bool(cfg["spectra"]), exact=bool(cfg["exact"]))
    return res.times, res.traces, res.eigenvalues


def run_matrix(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    results = map_replicas(_matrix_replica, int(cfg["replicas"]), threads, (cfg,))
    trace_rows = []
    eig_rows = []
    for replica, (times, traces, eigs) in enumerate(results):
        for i in range(len(times)):
            trace_rows.append([float(times[i])] + [float(v) for v in traces[i]] + [replica])
        if eigs is not None:
            # spectrum snapshots at every recorded time
            for i in range(len(times)):
                for p in range(model.k):
                    for idx in range(model.N):
                        eig_rows.append([float(times[i]), replica, p + 1, idx + 1,
                                         float(eigs[i, p, idx])])
    columns = ["t"] + [f"tau_{p + 1}" for p in range(model.k)] + ["replica"]
    paths = [write_csv(Path(out_dir) / "matrix_traces.csv", columns, trace_rows, meta)]
    if cfg["spectra"]:
        paths.append(write_csv(Path(out_dir) / "matrix_spectra.csv",
                               ["t", "replica", "process", "index", "lambda"],
                               eig_rows, meta))
    return paths


def _eigen_replica(replica, cfg):
    model = build_model(cfg["model"])
    rng = SeededRng(cfg["master_seed"], replica)
    lam0 = None
    if cfg["initial"] == "semicircle":
        q = semicircle_quantiles(model.N)
        lam0 = np.tile(q, (model.k, 1))
    elif cfg["initial"] != "perturbed_zero":
        raise ConfigError(f"unknown initial condition {cfg['initial']!r}")
    res = eigen_sde.run_eigen_path(
        model, cfg["T"], cfg["dt"], rng, lam0=lam0,
        record_every=int(cfg["record_every"]), record_lyapunov=bool(cfg["lyapunov"]))
    st = res.final_state
    return res.times, res.lyapunov, st.lam, st.rejections, st.resorts


def semicircle_quantiles(n):
    """Deterministic semicircle start: lambda_i = F^{-1}((i - 1/2) / n)."""
    from scipy.optimize import brentq
    qs = (np.arange(1, n + 1) - 0.5) / n
    return np.array([brentq(lambda x, q=q: spectral.semicircle_cdf(x) - q, -2.0, 2.0)
                     for q in qs])


def run_eigen(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    results = map_replicas(_eigen_replica, int(cfg["replicas"]), threads, (cfg,))
    spec_rows = []
    lyap_rows = []
    diag = []
    for replica, (times, lyap, lam, rejections, resorts) in enumerate(results):
        for p in range(model.k):
            for idx in range(model.N):
                spec_rows.append([replica, p + 1, idx + 1, float(lam[p, idx])])
        if lyap is not None:
            for i in range(len(times)):
                lyap_rows.append([float(times[i]), float(lyap[i]), replica])
        diag.append({"replica": replica, "rejections": int(rejections),
                     "resorts": int(resorts)})
    paths = [write_csv(Path(out_dir) / "eigen_spectra.csv",
                       ["replica", "process", "index", "lambda"], spec_rows, meta)]
    if lyap_rows:
        paths.append(write_csv(Path(out_dir) / "eigen_lyapunov.csv",
                               ["t", "f", "replica"], lyap_rows, meta))
    paths.append(write_json(Path(out_dir) / "eigen_diagnostics.json",
                            {"replicas": diag}, meta))
    return paths


def _semicircle_replica(replica, cfg):
    model = build_model(cfg["model"])
    rng = SeededRng(cfg["master_seed"], replica)
    res = eigen_sde.run_eigen_path(model, cfg["T"], cfg["dt"], rng)
    lam = res.final_state.lam[0]
    return lam, spectral.ks_distance(lam, spectral.semicircle_cdf), \
        spectral.wasserstein1(lam, spectral.semicircle_cdf)


def run_semicircle_check(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    if model.k != 1:
        raise ConfigError("semicircle-check requires k = 1")
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    results = map_replicas(_semicircle_replica, int(cfg["replicas"]), threads, (cfg,))
    rows = []
    ks_vals = []
    w1_vals = []
    for replica, (lam, ks, w1) in enumerate(results):
        ks_vals.append(ks)
        w1_vals.append(w1)
        for idx, v in enumerate(lam):
            rows.append([replica, 1, idx + 1, float(v)])
    mean_ks = float(np.mean(ks_vals))
    ok = mean_ks < cfg["threshold"]
    paths = [write_csv(Path(out_dir) / "semicircle_spectra.csv",
                       ["replica", "process", "index", "lambda"], rows, meta)]
    report = {
        "ks_per_replica": [float(v) for v in ks_vals],
        "w1_per_replica": [float(v) for v in w1_vals],
        "mean_ks": mean_ks,
        "mean_w1": float(np.mean(w1_vals)),
        "threshold": cfg["threshold"],
        "pass": bool(ok),
    }
    paths.append(write_json(Path(out_dir) / "semicircle_report.json", report, meta))
    if check and not ok:
        raise CheckFailure(f"mean KS {mean_ks:.4f} >= {cfg['threshold']}")
    return paths


def run_burgers(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    cspec = cfg["contour"]
    x = burgers.make_contour(L=cspec["L"], h=cspec["h"], y0=cspec["y0"])
    if cfg["initial"] == "point_mass":
        measures = [("point_mass", 0.0)] * model.k
    elif cfg["initial"] == "semicircle":
        measures = [("semicircle",)] * model.k
    else:
        raise ConfigError(f"unknown initial condition {cfg['initial']!r}")
    field0 = burgers.init_field_from_measure(measures, x, y0=cspec["y0"])
    field = burgers.evolve_field(field0, model, cfg["T"], dt=cfg["dt"])
    rows = []
    for i in range(field.x.size):
        row = [field.t, float(field.x[i]), field.y0]
        for p in range(model.k):
            row.extend([float(field.G[p, i].real), float(field.G[p, i].imag)])
        rows.append(row)
    columns = ["t", "re_z", "im_z"]
    for p in range(model.k):
        columns.extend([f"re_G_{p + 1}", f"im_G_{p + 1}"])
    paths = [write_csv(Path(out_dir) / "burgers_field.csv", columns, rows, meta)]

    report = {"oracle": None}
    offdiag = model.gamma - np.diag(np.diag(model.gamma))
    if cfg["initial"] == "point_mass" and not np.any(offdiag):
        mask = np.abs(field.x) <= 4.0
        sup = 0.0
        for p in range(model.k):
            s_eff = burgers.damped_free_time(model.gamma[p, p], cfg["T"])
            oracle = burgers.decoupled_fixed_point(field.z[mask], s_eff)
            sup = max(sup, float(np.abs(field.G[p, mask] - oracle).max()))
        ok = sup < cfg["oracle_tolerance"]
        report = {"oracle": "decoupled_fixed_point", "sup_error": sup,
                  "tolerance": cfg["oracle_tolerance"], "region": "abs(Re z) <= 4",
                  "pass": bool(ok)}
        if check and not ok:
            raise CheckFailure(f"burgers oracle error {sup:.2e} >= {cfg['oracle_tolerance']}")
    paths.append(write_json(Path(out_dir) / "burgers_report.json", report, meta))
    return paths


def run_instanton(cfg, out_dir, threads=1, check=False):
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    model = ldp.LdpModel(gamma=float(cfg["gamma"]), rho=float(cfg["rho"]))
    target = [float(v) for v in cfg["target"]]
    sol = ldp.solve_instanton(target, float(cfg["T"]), model, steps=int(cfg["steps"]))
    est = ldp.evaluate_action(sol, model)
    rate = ldp.rate_function(target[0], target[1], model)
    rows = [[float(sol.times[i]), float(sol.x_path[i, 0]), float(sol.x_path[i, 1]),
             float(sol.p_path[i, 0]), float(sol.p_path[i, 1])]
            for i in range(sol.times.size)]
    paths = [write_csv(Path(out_dir) / "instanton_path.csv",
                       ["t", "x", "y", "p_x", "p_y"], rows, meta)]
    report = {
        "target": target,
        "action_endpoint": est.endpoint,
        "action_quadrature": est.quadrature,
        "estimates_consistent": est.consistent,
        "rate_function": rate,
        "action_minus_rate": est.endpoint - rate,
        "terminal_error": sol.terminal_error,
        "hamiltonian_drift": sol.hamiltonian_drift,
    }
    paths.append(write_json(Path(out_dir) / "instanton_action.json", report, meta))
    return paths


def run_rate_sweep(cfg, out_dir, threads=1, check=False):
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    model = ldp.LdpModel(gamma=float(cfg["gamma"]), rho=float(cfg["rho"]))
    grid = cfg["grid"]
    xs = np.linspace(grid["lo"], grid["hi"], int(grid["n"]))
    rows = []
    for xv in xs:
        for yv in xs:
            rows.append([float(xv), float(yv), ldp.rate_function(xv, yv, model)])
    paths = [write_csv(Path(out_dir) / "rate_grid.csv", ["x", "y", "I"], rows, meta)]
    sweep = cfg["gamma_sweep"]
    gammas = np.linspace(sweep["lo"], sweep["hi"], int(sweep["n"]))
    diag = ldp.phase_diagnostics(gammas, float(cfg["rho"]))
    report = {
        "rho": cfg["rho"],
        "gammas": _jsonable(diag.gammas),
        "det_sigma_inv": _jsonable(diag.det_sigma_inv),
        "null_directions": _jsonable(diag.null_directions),
        "null_eigenvalues": _jsonable(diag.null_eigenvalues),
    }
    paths.append(write_json(Path(out_dir) / "phase_diagnostics.json", report, meta))
    return paths


def _volume_replica(replica, cfg):
    model = build_model(cfg["model"])
    rng = SeededRng(cfg["master_seed"], replica)
    lam0 = None
    if cfg.get("initial") == "semicircle" and model.N > 1:
        lam0 = np.tile(semicircle_quantiles(model.N), (model.k, 1))
    res = eigen_sde.run_eigen_path(model, cfg["T"], cfg["dt"], rng, lam0=lam0,
                                   record_every=int(cfg["record_every"]),
                                   record_paths=True)
    ledger = trace_flow.integrate_volume(res.times, res.paths[:, 0, :], J0=cfg["J0"])
    return ledger


def run_volume(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    if model.k != 1:
        raise ConfigError("volume ledger requires k = 1")
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    ledgers = map_replicas(_volume_replica, int(cfg["replicas"]), threads, (cfg,))
    rows = []
    max_violation = -np.inf
    for replica, led in enumerate(ledgers):
        for i in range(led.times.size):
            rows.append([float(led.times[i]), float(led.log_jacobian[i]),
                         float(led.base_rate_term[i]), float(led.repulsion_term[i]),
                         replica])
        # pathwise inequality: log J_t <= log J0 - N t / 2, violation = lhs - rhs
        violation = float((led.log_jacobian - (led.log_j0 + led.base_rate_term)).max())
        max_violation = max(max_violation, violation)
    holds = max_violation <= 0.0
    paths = [write_csv(Path(out_dir) / "volume_ledger.csv",
                       ["t", "log_jacobian", "base_rate_term", "repulsion_term", "replica"],
                       rows, meta)]
    report = {"max_violation": max_violation, "inequality_holds": bool(holds),
              "replicas": len(ledgers)}
    paths.append(write_json(Path(out_dir) / "volume_verdict.json", report, meta))
    if check and not holds:
        raise CheckFailure(f"Liouville inequality violated by {max_violation:.3e}")
    return paths


def run_sff(cfg, out_dir, threads=1, check=False):
    model = build_model(cfg["model"])
    if model.k != 1:
        raise ConfigError("sff requires k = 1")
    meta = {"config_hash": config_hash(cfg), "seed": cfg["master_seed"]}
    res = matrix_sde.run_matrix_path(model, cfg["T"], cfg["dt"],
                                     SeededRng(cfg["master_seed"], 0), exact=True)
    lam = matrix_sde.eigenvalues_of(res.final_state)[0]
    ts = np.geomspace(cfg["t_min"], cfg["t_max"], int(cfg["n_times"]))
    sff = spectral.spectral_form_factor(lam, ts)
    rows = [[float(t), float(v)] for t, v in zip(ts, sff)]
    paths = [write_csv(Path(out_dir) / "sff.csv", ["t", "sff"], rows, meta)]
    lo, hi = cfg["late_window"]
    window_ts = np.linspace(lo, hi, 201)
    late = float(spectral.spectral_form_factor(lam, window_ts).mean())
    plateau = 1.0 / model.N
    ratio = late / plateau
    ok = 0.5 <= ratio <= 2.0
    report = {
        "sff_at_zero": float(spectral.spectral_form_factor(lam, 0.0)),
        "late_window": [lo, hi],
        "late_window_mean": late,
        "plateau_reference": plateau,
        "ratio_to_plateau": ratio,
        "pass": bool(ok),
    }
    paths.append(write_json(Path(out_dir) / "sff_report.json", report, meta))
    if check and not ok:
        raise CheckFailure(f"late-window SFF ratio {ratio:.3f} outside [0.5, 2]")
    return paths


COMMANDS = {
    "traces": run_traces,
    "matrix": run_matrix,
    "eigen": run_eigen,
    "semicircle-check": run_semicircle_check,
    "burgers": run_burgers,
    "instanton": run_instanton,
    "rate-sweep": run_rate_sweep,
    "volume": run_volume,
    "sff": run_sff,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="coupled-dyson",
        description="Experiment runner for coupled matrix OU processes")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override master seed")
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="replica worker pool size")
    parser.add_argument("--check", action="store_true",
                        help="exit 4 when the scenario's acceptance check fails")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.subcommand, args.config, args.seed)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if "model" in cfg:
            validate_model(build_model(cfg["model"]))
        artifacts = COMMANDS[args.subcommand](cfg, out_dir, threads=args.threads,
                                              check=args.check)
    except (ConfigError, NoiseCorrelationError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(json.dumps({"error": "check", "message": str(exc)}), file=sys.stderr)
        return 4
    except (burgers.BlowUpError, burgers.ConvergenceError, eigen_sde.StepCollapseError,
            UnstableModelError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return 3
    for path in artifacts:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
