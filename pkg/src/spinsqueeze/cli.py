"""Scenario runner: TOML config in, CSV/JSON data out.

Every subcommand reads one table from the config file (table name =
subcommand with '-' replaced by '_'), runs a deterministic computation,
and writes results plus a manifest recording the config hash.  Rates are
dimensionless (units of gamma) unless stated in the column header.

Exit codes: 0 success, 1 config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import (
    CavityParams,
    OperatingPoint,
    derive_rates,
    drift_diffusion,
    evolve_covariance,
    optimal_operating_point,
    quadrature_stats,
    regime_classifier,
    replace_delta,
)
from .closure import ClosureConfig, find_min_dxx, integrate_closure
from .dicke import bloch_ground_state, psi_a_state
from .errors import IntegrationError, NoInteriorMinimumError
from .ramsey import ramsey_sweep
from .twist import TwistParams, evolve_master, evolve_unitary, find_min_variance
from .wigner import multipole_coeffs, quadrature_grid, sphere_integral, wigner_map


class ConfigError(Exception):
    pass


FMT = "%.17g"


def _fmt(x) -> str:
    return FMT % float(x)


def _write_csv(path: Path, subcommand: str, config_hash: str,
               columns: list[str], rows) -> None:
    lines = [
        f"# subcommand: {subcommand}",
        f"# config-sha256: {config_hash}",
        f"# columns: {', '.join(columns)}",
    ]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    newline="\n")


def _section(config: dict, name: str) -> dict:
    key = name.replace("-", "_")
    if key not in config:
        raise ConfigError(f"config missing table [{key}]")
    sec = config[key]
    if not isinstance(sec, dict):
        raise ConfigError(f"config entry {key} must be a table")
    return sec


def _get(sec: dict, key: str, typ, default=None, table: str = ""):
    if key not in sec:
        if default is not None:
            return default
        raise ConfigError(f"missing key '{key}' in table [{table}]")
    val = sec[key]
    try:
        return typ(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key '{key}' in [{table}]: {exc}") from exc


def _state_from(sec: dict, table: str):
    kind = _get(sec, "state", str, "psi_a", table)
    n = _get(sec, "n_atoms", int, table=table)
    if kind == "bloch":
        return bloch_ground_state(n)
    if kind == "psi_a":
        return psi_a_state(n, _get(sec, "a", float, table=table))
    raise ConfigError(f"key 'state' in [{table}] must be 'bloch' or 'psi_a'")


def _grid(sec: dict, table: str, prefix: str, default_n: int = 201) -> np.ndarray:
    lo = _get(sec, f"{prefix}_min", float, 0.0, table)
    hi = _get(sec, f"{prefix}_max", float, table=table)
    n = _get(sec, "n_points", int, default_n, table)
    if n < 2:
        raise ConfigError(f"n_points in [{table}] must be >= 2")
    return np.linspace(lo, hi, n)


def _cavity_params(sec: dict, table: str) -> CavityParams:
    return CavityParams(
        g1=_get(sec, "g1", float, table=table),
        g2=_get(sec, "g2", float, table=table),
        Omega1=_get(sec, "Omega1", float, table=table),
        Omega2=_get(sec, "Omega2", float, table=table),
        Delta=_get(sec, "Delta", float, table=table),
        gamma=_get(sec, "gamma", float, 1.0, table),
        kappa_cav=_get(sec, "kappa", float, table=table),
        N=_get(sec, "n_atoms", int, table=table),
        delta1=_get(sec, "delta1", float, 0.0, table),
        delta2=_get(sec, "delta2", float, 0.0, table),
        gamma0=_get(sec, "gamma0", float, 0.0, table),
    )


def run_ramsey_sweep(sec, out: Path, chash: str) -> dict:
    state = _state_from(sec, "ramsey_sweep")
    grid = _grid(sec, "ramsey_sweep", "phi", 401)
    sweep = ramsey_sweep(state, grid)
    rows = zip(sweep.phi, sweep.excited_fraction, sweep.signal, sweep.noise,
               np.where(sweep.sensitivity_zero, np.nan, sweep.delta_phi),
               sweep.sensitivity_zero.astype(float))
    _write_csv(out / "ramsey_sweep.csv", "ramsey-sweep", chash,
               ["phi_rad", "excited_fraction", "signal", "noise_std",
                "delta_phi", "sensitivity_zero"], rows)
    return {"rows": int(grid.size)}


def run_twist_evolve(sec, out: Path, chash: str) -> dict:
    n = _get(sec, "n_atoms", int, table="twist_evolve")
    chi = _get(sec, "chi", float, 1.0, "twist_evolve")
    tau_max = _get(sec, "tau_max", float, 3.0, "twist_evolve")
    n_points = _get(sec, "n_points", int, 301, "twist_evolve")
    t = np.linspace(0.0, tau_max / (n * chi), n_points)
    traj = evolve_unitary(n, chi, t)
    _write_csv(out / "twist_unitary.csv", "twist-evolve", chash,
               ["t", "l0", "lz", "Dxx", "Dyy"],
               zip(traj.times, traj.l0, traj.lz, traj.dxx, traj.dyy))
    try:
        t_star, dxx_min = find_min_variance(traj)
        extra = {"t_star": t_star, "delta_xx_min": dxx_min}
    except NoInteriorMinimumError:
        extra = {"t_star": None, "delta_xx_min": None}
    return {"rows": n_points, **extra}


def run_master_evolve(sec, out: Path, chash: str) -> dict:
    n = _get(sec, "n_atoms", int, table="master_evolve")
    chi = _get(sec, "chi", float, 1.0, "master_evolve")
    kappa = _get(sec, "kappa", float, 0.0, "master_evolve")
    tau_max = _get(sec, "tau_max", float, 3.0, "master_evolve")
    n_points = _get(sec, "n_points", int, 151, "master_evolve")
    gamma = kappa * n * chi
    params = TwistParams(N=n, chi=chi, gamma1=gamma, gamma2=gamma)
    t = np.linspace(0.0, tau_max / (n * chi), n_points)
    traj = evolve_master(params, t)
    _write_csv(out / "twist_master.csv", "master-evolve", chash,
               ["t", "l0", "lz", "Dxx", "Dyy"],
               zip(traj.times, traj.l0, traj.lz, traj.dxx, traj.dyy))
    t_star, dxx_min = find_min_variance(traj)
    return {"rows": n_points, "t_star": t_star, "delta_xx_min": dxx_min}


def run_moment_evolve(sec, out: Path, chash: str) -> dict:
    eps = _get(sec, "epsilon", float, table="moment_evolve")
    kappa = _get(sec, "kappa", float, 0.0, "moment_evolve")
    tau_max = _get(sec, "tau_max", float, 3.0, "moment_evolve")
    n_points = _get(sec, "n_points", int, 301, "moment_evolve")
    cfg = ClosureConfig(epsilon=eps, kappa=kappa)
    traj = integrate_closure(cfg, np.linspace(0.0, tau_max, n_points))
    _write_csv(out / "moment_closure.csv", "moment-evolve", chash,
               ["tau", "h0", "hz", "dxx", "dyy"],
               zip(traj.taus, traj.h0, traj.hz, traj.dxx, traj.dyy))
    try:
        tau_star, dxx_min = find_min_dxx(traj)
        extra = {"tau_star": tau_star, "delta_xx_min": dxx_min}
    except NoInteriorMinimumError:
        extra = {"tau_star": None, "delta_xx_min": None}
    return {"rows": n_points, **extra}


def run_compare_oracle(sec, out: Path, chash: str) -> dict:
    n = _get(sec, "n_atoms", int, table="compare_oracle")
    kappa = _get(sec, "kappa", float, 0.0, "compare_oracle")
    chi = _get(sec, "chi", float, 1.0, "compare_oracle")
    tau_max = _get(sec, "tau_max", float, 3.0, "compare_oracle")
    n_points = _get(sec, "n_points", int, 121, "compare_oracle")
    tau = np.linspace(0.0, tau_max, n_points)
    gamma = kappa * n * chi
    exact = evolve_master(TwistParams(N=n, chi=chi, gamma1=gamma, gamma2=gamma),
                          tau / (n * chi))
    closed = integrate_closure(ClosureConfig(epsilon=1.0 / n, kappa=kappa), tau)
    tau_star, dxx_min = find_min_dxx(closed)
    mask = tau <= tau_star
    exact_dxx = exact.dxx / n
    rel = np.abs(closed.dxx[mask] - exact_dxx[mask]) / np.maximum(exact_dxx[mask], 1e-30)
    payload = {
        "n_atoms": n,
        "kappa": kappa,
        "tau_star_closure": tau_star,
        "delta_xx_min_closure": dxx_min,
        "delta_xx_min_oracle": float(np.min(exact_dxx)),
        "max_rel_dxx_error_to_tau_star": float(np.max(rel)),
    }
    _write_json(out / "compare_oracle.json", payload)
    _write_csv(out / "compare_oracle.csv", "compare-oracle", chash,
               ["tau", "dxx_closure", "dxx_oracle"],
               zip(tau, closed.dxx, exact_dxx))
    return payload


def run_cavity_squeeze(sec, out: Path, chash: str) -> dict:
    params = _cavity_params(sec, "cavity_squeeze")
    use_opt = _get(sec, "use_optimal_detuning", bool, False, "cavity_squeeze")
    if use_opt:
        op: OperatingPoint = optimal_operating_point(params)
        payload = {
            "delta_opt": op.delta_opt,
            "varYplus_min": op.var_yplus_numeric,
            "varYplus_closed_form": op.var_yplus_closed_form,
            "t_star_numeric": op.t_star_numeric,
            "t_star_closed_form": op.t_star_closed_form,
        }
        _write_json(out / "cavity_squeeze.json", payload)
        return payload
    rates = derive_rates(params)
    t_max = _get(sec, "t_max", float, table="cavity_squeeze")
    n_points = _get(sec, "n_points", int, 1000, "cavity_squeeze")
    a, d = drift_diffusion(params, rates)
    t = np.linspace(0.0, t_max, n_points)
    cs = evolve_covariance(a, d, 0.5 * np.eye(4), t)
    stats = np.array([quadrature_stats(c) for c in cs])
    _write_csv(out / "cavity_squeeze.csv", "cavity-squeeze", chash,
               ["t", "varYplus", "varXminus", "varYminus", "varXplus",
                "total_excitations"],
               np.column_stack([t, stats]))
    payload = {"varYplus_min": float(stats[:, 0].min()),
               "t_min": float(t[int(np.argmin(stats[:, 0]))])}
    _write_json(out / "cavity_squeeze.json", payload)
    return payload


def run_cavity_scan(sec, out: Path, chash: str, jobs: int) -> dict:
    params = _cavity_params(sec, "cavity_scan")
    scan_key = _get(sec, "scan", str, "Delta", "cavity_scan")
    lo = _get(sec, "scan_min", float, table="cavity_scan")
    hi = _get(sec, "scan_max", float, table="cavity_scan")
    n_scan = _get(sec, "scan_points", int, 25, "cavity_scan")
    t_max = _get(sec, "t_max", float, table="cavity_scan")
    n_points = _get(sec, "n_points", int, 600, "cavity_scan")
    values = np.linspace(lo, hi, n_scan)
    t = np.linspace(0.0, t_max, n_points)

    def one(v: float) -> float:
        if scan_key == "Delta":
            p = replace_delta(params, v)
        elif scan_key == "detuning_mean":
            import dataclasses
            p = dataclasses.replace(params, delta1=v, delta2=v)
        else:
            raise ConfigError("scan must be 'Delta' or 'detuning_mean'")
        a, d = drift_diffusion(p)
        cs = evolve_covariance(a, d, 0.5 * np.eye(4), t)
        return float(min(quadrature_stats(c)[0] for c in cs))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            mins = list(ex.map(one, values))
    else:
        mins = [one(v) for v in values]
    _write_csv(out / "cavity_scan.csv", "cavity-scan", chash,
               [scan_key, "varYplus_min"], zip(values, mins))
    i = int(np.argmin(mins))
    return {"best_" + scan_key: float(values[i]), "varYplus_min": float(mins[i])}


def run_wigner_map(sec, out: Path, chash: str) -> dict:
    state = _state_from(sec, "wigner_map")
    n_theta = _get(sec, "n_theta", int, 64, "wigner_map")
    n_phi = _get(sec, "n_phi", int, 128, "wigner_map")
    decomp = multipole_coeffs(state)
    thetas, _, phis, _ = quadrature_grid(n_theta, n_phi)
    grid = wigner_map(decomp, thetas, phis)
    rows = [(th, ph, grid.values[i, j])
            for i, th in enumerate(thetas) for j, ph in enumerate(phis)]
    _write_csv(out / "wigner_map.csv", "wigner-map", chash,
               ["theta_rad", "phi_rad", "W"], rows)
    return {"rows": len(rows),
            "sphere_integral": sphere_integral(decomp, n_theta, n_phi)}


def run_regime_report(sec, out: Path, chash: str) -> dict:
    params = _cavity_params(sec, "regime_report")
    rates = derive_rates(params)
    payload = regime_classifier(params)
    payload.update({"xi": rates.xi, "eta": rates.eta, "gamma_L": rates.gamma_L,
                    "delta_L": rates.delta_L})
    _write_json(out / "regime_report.json", payload)
    return payload


SUBCOMMANDS = {
    "ramsey-sweep": run_ramsey_sweep,
    "twist-evolve": run_twist_evolve,
    "master-evolve": run_master_evolve,
    "moment-evolve": run_moment_evolve,
    "compare-oracle": run_compare_oracle,
    "cavity-squeeze": run_cavity_squeeze,
    "cavity-scan": run_cavity_scan,
    "wigner-map": run_wigner_map,
    "regime-report": run_regime_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinsqueeze",
        description="spin-squeezing numerical laboratory: deterministic "
                    "scenario runner emitting CSV/JSON data",
    )
    parser.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="preferred tabular format (JSON summaries are "
                             "always written where defined)")
    args = parser.parse_args(argv)

    try:
        raw = args.config.read_bytes()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    chash = hashlib.sha256(raw).hexdigest()
    try:
        config = tomllib.loads(raw.decode())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    try:
        sec = _section(config, args.subcommand)
        fn = SUBCOMMANDS[args.subcommand]
        if args.subcommand == "cavity-scan":
            summary = fn(sec, args.out, chash, max(args.jobs, 1))
        else:
            summary = fn(sec, args.out, chash)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    manifest = {
        "subcommand": args.subcommand,
        "config_sha256": chash,
        "package_version": __version__,
        "wall_clock_s": time.monotonic() - t0,
        "summary": summary,
    }
    _write_json(args.out / "manifest.json", manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
