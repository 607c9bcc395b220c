"""Command-line front end producing plot-ready CSV/JSON tables.

Every run writes a table (``--out``, default ``<command>.<format>`` in
``$OMLATTICE_OUTPUT_DIR`` or the working directory) and a JSON summary next
to it (``<stem>.summary.json``). Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, RunConfig
from .dynamics import ConvergenceError, compare_effective, propagate_full, quantum_walk, walk_suppression_metric
from .model import (
    CouplingProfile,
    LatticeSpec,
    ModulationParams,
    build_fermionic_kitaev_reference,
    build_regime_a,
    build_regime_b,
    build_regime_c_kitaev,
    build_regime_d_nnn,
    time_generator,
)
from .special import BracketError, bessel_zero
from .spectral import (
    GapClosingError,
    bosonic_dynamical_spectrum,
    bulk_gap,
    central_spacing_ratio,
    count_zero_modes,
    default_gap_window,
    detect_edge_states,
    eig_hermitian,
    quasiparticle_gap,
    winding_number,
)

OUTPUT_DIR_ENV = "OMLATTICE_OUTPUT_DIR"
COMMANDS = ("spectrum", "edge-states", "walk", "kitaev", "validate", "sweep")

def _scalar_or_array(arr: np.ndarray):
    return float(arr[0]) if arr.size == 1 else arr


def _couplings(cfg: RunConfig) -> CouplingProfile:
    return CouplingProfile(_scalar_or_array(cfg["g_left"]), _scalar_or_array(cfg["g_right"]))


def _kappa_column(cfg: RunConfig, key: str, n: int, default: float | None = None) -> np.ndarray:
    val = cfg.values.get(key)
    if val is None:
        val = np.array([default])
    if val.size == 1:
        return np.full(n, val[0])
    if val.size == n:
        return val
    if val.size == n - 1:  # right-bond argument on an equal-count chain
        return np.append(val, np.nan)
    raise ConfigError(f"{key} must have 1 or {n} entries")


def build_model(cfg: RunConfig):
    """Quadratic Hamiltonian (regimes A-D) or BdG matrix (kitaev-fermion) for a config."""
    spec = LatticeSpec.from_sites(cfg["sites"])
    regime = cfg.regime
    nr = spec.num_resonators
    try:
        if regime == "A":
            if "lambda" in cfg.raw:
                kappas = ModulationParams.uniform(spec, cfg["lambda"], cfg["gamma"], 1.0)
            else:
                j2 = bessel_zero(2, 1)
                kappas = np.column_stack(
                    [
                        _kappa_column(cfg, "kappa1", nr),
                        _kappa_column(cfg, "kappa2", nr, j2),
                        _kappa_column(cfg, "kappa3", nr),
                        _kappa_column(cfg, "kappa4", nr, j2),
                    ]
                )
            return build_regime_a(spec, _couplings(cfg), kappas, cfg["residual_stokes"])
        if regime == "B":
            kappas = None
            if cfg["residual_stokes"]:
                if "lambda" in cfg.raw:
                    lam = cfg["lambda"]
                    kappas = ModulationParams.uniform(spec, lam, lam[:nr] if lam.size > 1 else lam, 1.0)
                else:
                    j2 = bessel_zero(2, 1)
                    kappas = np.column_stack(
                        [_kappa_column(cfg, "kappa1", nr, j2), _kappa_column(cfg, "kappa2", nr, j2)]
                    )
            return build_regime_b(spec, _couplings(cfg), kappas, cfg["residual_stokes"])
        if regime == "C":
            return build_regime_c_kitaev(
                spec, cfg["g_c"], _scalar_or_array(cfg["pairing_left"]), _scalar_or_array(cfg["pairing_right"])
            )
        if regime == "D":
            return build_regime_d_nnn(spec, _couplings(cfg), _scalar_or_array(cfg["t_eff"]))
        if regime == "kitaev-fermion":
            return build_fermionic_kitaev_reference(cfg["sites"], cfg["t_hop"], cfg["delta"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"regime {regime} does not define a static model")


def _gap_window(cfg: RunConfig, h: np.ndarray) -> float:
    if cfg["gap_window"] is not None:
        return cfg["gap_window"]
    v = abs(h[0, 1]) if h.shape[0] > 1 else 0.0
    w = abs(h[1, 2]) if h.shape[0] > 2 else 0.0
    return default_gap_window(v, w)


def _edge_report(cfg: RunConfig, spectrum, h):
    return detect_edge_states(
        spectrum, _gap_window(cfg, h), cfg["ipr_threshold"], cfg["edge_fraction"]
    )


def _winding(h: np.ndarray):
    if h.shape[0] < 3:
        return None
    try:
        return winding_number(abs(h[0, 1]), abs(h[1, 2]))
    except GapClosingError:
        return None


def run_spectrum(cfg: RunConfig):
    model = build_model(cfg)
    columns = ["index", "energy_re", "energy_im", "ipr", "side"]
    if isinstance(model, np.ndarray):
        sp = eig_hermitian(model)
        rows = [(i, float(e), 0.0, float(p), "") for i, (e, p) in enumerate(zip(sp.eigenvalues, sp.ipr))]
        summary = {
            "states": sp.size,
            "zero_modes": count_zero_modes(sp.eigenvalues),
            "quasiparticle_gap": quasiparticle_gap(sp.eigenvalues),
        }
        return columns, rows, summary
    if model.has_pairing:
        sp = bosonic_dynamical_spectrum(model)
        rows = [
            (i, float(e.real), float(e.imag), float(p), "") for i, (e, p) in enumerate(zip(sp.eigenvalues, sp.ipr))
        ]
        summary = {
            "states": sp.size,
            "max_imag": float(np.abs(sp.eigenvalues.imag).max()),
            "zero_modes": count_zero_modes(sp.eigenvalues),
        }
        return columns, rows, summary
    h = model.hopping.real
    sp = eig_hermitian(h)
    report = _edge_report(cfg, sp, h)
    labels = dict(zip(report.indices, report.sides))
    rows = [(i, float(e), 0.0, float(p), labels.get(i, "")) for i, (e, p) in enumerate(zip(sp.eigenvalues, sp.ipr))]
    summary = {
        "states": sp.size,
        "in_gap": len(report),
        "sides": list(report.sides),
        "zero_modes": count_zero_modes(sp.eigenvalues),
        "bulk_gap": bulk_gap(sp, report.indices),
        "winding_number": _winding(h),
    }
    return columns, rows, summary


def run_edge_states(cfg: RunConfig):
    model = build_model(cfg)
    if isinstance(model, np.ndarray) or model.has_pairing:
        raise ConfigError("edge-state detection needs a pairing-free regime (A, B or D)")
    h = model.hopping.real
    sp = eig_hermitian(h)
    report = _edge_report(cfg, sp, h)
    columns = ["index", "energy", "side", "ipr", "localization_length", "weight_site1", "weight_site2"]
    rows = []
    for k in range(len(report)):
        w = np.abs(report.vectors[:, k]) ** 2
        w = w / w.sum()
        rows.append(
            (
                report.indices[k],
                float(report.energies[k]),
                report.sides[k],
                float(report.ipr[k]),
                float(report.localization_lengths[k]),
                float(w[0]),
                float(w[1]) if w.size > 1 else 0.0,
            )
        )
    summary = {
        "in_gap": len(report),
        "sides": list(report.sides),
        "bulk_gap": bulk_gap(sp, report.indices),
        "winding_number": _winding(h),
    }
    return columns, rows, summary


def run_walk(cfg: RunConfig):
    model = build_model(cfg)
    if isinstance(model, np.ndarray) or model.has_pairing:
        raise ConfigError("walks need a pairing-free regime (A, B or D)")
    times = np.linspace(0.0, cfg["t_max"], cfg["t_points"])
    start = cfg["initial_site"] - 1
    rec = quantum_walk(model.hopping, start, times)
    window = tuple(cfg["window"]) if cfg.values.get("window") is not None else (0.0, cfg["t_max"])
    metric = walk_suppression_metric(rec, window)
    columns = ["t", "site", "probability"]
    m = rec.probabilities.shape[1]
    rows = [
        (float(t), s + 1, float(rec.probabilities[i, s])) for i, t in enumerate(rec.times) for s in range(m)
    ]
    summary = {
        "suppression_metric": metric,
        "window": [float(window[0]), float(window[1])],
        "initial_site": start + 1,
        "max_row_sum_error": float(np.abs(rec.probabilities.sum(axis=1) - 1).max()),
    }
    return columns, rows, summary


def run_kitaev(cfg: RunConfig):
    if cfg.regime != "C":
        raise ConfigError("the kitaev command uses regime C parameters (g_c, pairing_left, pairing_right)")
    n = cfg["sites"]
    pl, pr = cfg["pairing_left"], cfg["pairing_right"]
    if pl.size != 1 or pr.size != 1 or pl[0] != pr[0]:
        raise ConfigError("the fermionic reference needs one uniform pairing amplitude")
    ferm = np.linalg.eigvalsh(build_fermionic_kitaev_reference(n, cfg["g_c"], float(pl[0])))
    bos = bosonic_dynamical_spectrum(build_model(cfg)).eigenvalues
    window = float(pl[0])
    columns = ["model", "index", "energy_re", "energy_im"]
    rows = [("fermion", i, float(e), 0.0) for i, e in enumerate(ferm)]
    rows += [("boson", i, float(e.real), float(e.imag)) for i, e in enumerate(bos)]
    summary = {
        "fermion_zero_modes": count_zero_modes(ferm),
        "fermion_quasiparticle_gap": quasiparticle_gap(ferm),
        "fermion_spacing_ratio": central_spacing_ratio(ferm, window),
        "boson_spacing_ratio": central_spacing_ratio(bos.real, window),
        "boson_max_imag": float(np.abs(bos.imag).max()),
        "spacing_window": window,
    }
    return columns, rows, summary


def _validate_one(cfg: RunConfig, nu: float):
    spec = LatticeSpec.from_sites(cfg["sites"])
    couplings = _couplings(cfg)
    ks, ka = cfg["kappa_stokes"], cfg["kappa_anti"]
    try:
        if cfg["validate_scheme"] == "A":
            params = ModulationParams.uniform(spec, 0.5 * (ks + ka), 0.5 * (ks - ka), nu)
            h_eff = build_regime_a(spec, couplings, (ka, ks, ka, ks)).hopping
        else:
            params = ModulationParams.uniform(spec, 0.5 * ks, 0.5 * ks, nu)
            h_eff = build_regime_b(spec, couplings).hopping
        gen = time_generator(params, couplings, spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    samples = np.linspace(0.0, cfg["t_end"], cfg["t_points"])
    rec = propagate_full(gen, cfg["t_end"], tol=cfg["tol"], samples=samples)
    return rec, compare_effective(rec, h_eff)


def run_validate(cfg: RunConfig, jobs: int = 1):
    if cfg.regime != "validate":
        raise ConfigError("the validate command needs regime = validate")
    nus = [float(x) for x in cfg["nu_list"]]
    if min(nus) <= 0:
        raise ConfigError("nu_list entries must be positive")
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(pool.map(lambda nu: _validate_one(cfg, nu), nus))
    columns = ["nu", "t", "eps"]
    rows = [(nu, float(t), float(e)) for nu, (rec, eps) in zip(nus, results) for t, e in zip(rec.times, eps)]
    eps_end = [float(eps[-1]) for _, eps in results]
    exponent = None
    if len(nus) >= 2 and min(eps_end) > 0:
        exponent = float(-np.polyfit(np.log(nus), np.log(eps_end), 1)[0])
    summary = {
        "nu": nus,
        "eps_end": eps_end,
        "decay_exponent": exponent,
        "steps_per_period": [rec.steps_per_period for rec, _ in results],
        "symplectic_defect": [rec.symplectic_defect for rec, _ in results],
    }
    return columns, rows, summary


_RUNNERS = {
    "spectrum": run_spectrum,
    "edge-states": run_edge_states,
    "walk": run_walk,
    "kitaev": run_kitaev,
}


def execute(command: str, cfg: RunConfig, jobs: int = 1):
    """Run a command, expanding the sweep axis if present; returns (columns, rows, summary)."""
    if command == "sweep":
        if cfg.sweep is None:
            raise ConfigError("the sweep command needs sweep_param and sweep values")
        command = cfg.get_raw("task") or "spectrum"
        if command not in COMMANDS or command == "sweep":
            raise ConfigError(f"invalid sweep task {command!r}")

    def single(c: RunConfig):
        if command == "validate":
            return run_validate(c, jobs if cfg.sweep is None else 1)
        return _RUNNERS[command](c)

    if cfg.sweep is None:
        columns, rows, summary = single(cfg)
        return columns, rows, {"command": command, "results": summary}
    param, values = cfg.sweep
    points = [cfg.with_value(param, v) for v in values]
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        outputs = list(pool.map(single, points))
    columns = [param] + outputs[0][0]
    rows = [(v,) + tuple(r) for v, (_, rs, _) in zip(values, outputs) for r in rs]
    summary = {
        "command": command,
        "sweep_param": param,
        "points": [{"value": v, **s} for v, (_, _, s) in zip(values, outputs)],
    }
    return columns, rows, summary


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_table(path: Path, columns, rows, fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        lines = [",".join(columns)] + [",".join(_fmt(x) for x in r) for r in rows]
        path.write_text("\n".join(lines) + "\n")
    else:
        doc = {"columns": list(columns), "rows": [[_json_value(x) for x in r] for r in rows]}
        path.write_text(json.dumps(doc, sort_keys=True) + "\n")


def _json_value(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_json_value(v) for v in x]
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary.json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omlattice", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key = value file or a JSON run summary")
    p.add_argument("--out", help="table path (summary goes to <stem>.summary.json)")
    p.add_argument("--format", choices=("csv", "json"), help="overrides the config's format key")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep points / nu values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mapping = cfgmod.load(args.config)
        cfg = RunConfig.from_mapping(mapping)
        fmt = args.format or cfg["format"]
        if args.out:
            out = Path(args.out)
        else:
            out = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{args.command}.{fmt}"
        columns, rows, summary = execute(args.command, cfg, args.jobs)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, BracketError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    summary["config"] = cfg.normalized()
    write_table(out, columns, rows, fmt)
    summary_path(out).write_text(json.dumps(_json_value(summary), sort_keys=True, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
