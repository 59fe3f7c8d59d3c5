"""Batch CLI: config-driven experiments with CSV/JSON persistence.

Experiments map to the study's figure-style data sets:

  rabi-map           momentum-resolved Rabi oscillations of a strong pulse
  fringe             full vs cropped fringe scan, uncertainties, exit densities
  sensitivity-sweep  N*dphi^2 vs coupling strength (perturbative + numeric)
  validate-pert      pulse-level and uncertainty-level residuals vs the
                     multi-class integrator
  pulse-shape        box vs Blackman pulse uncertainty curves
  optimize           inclination- and twisting-optimized uncertainties

Config files are INI key/value files with [physics], [numerics] and [output]
sections; every key has a default, unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    BraggSenseError,
    ConfigurationError,
    DomainError,
    NumericError,
)
from .mzi_core import SequenceParams, position_distribution, script_quantities, signal_cropped, signal_full
from .optimizer import optimize_inclination, optimize_twisting
from .pulse_analytic import PulseParams, pert_transfer
from .pulse_numeric import EnvelopeSpec, evolve_pulse, main_block
from .sensitivity import uncertainty_oat, uncertainty_vs_only
from .spin_states import OatParams, initial_inclination, optimal_twisting
from .units_grid import make_gaussian_mode

EXPERIMENTS = ("rabi-map", "fringe", "sensitivity-sweep", "validate-pert",
               "pulse-shape", "optimize")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_ALLOWED_KEYS = {
    "physics": {
        "epsilon", "epsilon_grid", "sigma_q", "atoms", "twisting", "rotation",
        "interrogation", "pulse_shape", "backend", "class_min", "class_max",
        "q", "tau_max", "tau_points", "q_points", "phi_points",
        "include_position",
    },
    "numerics": {"nodes", "rtol", "atol", "fd_step"},
    "output": {"precision", "format"},
}

_DEFAULTS = {
    "physics": {
        "epsilon": "0.1",
        "epsilon_grid": "",
        "sigma_q": "0.05",
        "atoms": "20000",
        "twisting": "auto",
        "rotation": "equator",
        "interrogation": "auto",
        "pulse_shape": "box",
        "backend": "perturbative",
        "class_min": "-2",
        "class_max": "3",
        "q": "0.02",
        "tau_max": "6.283185307179586",
        "tau_points": "81",
        "q_points": "61",
        "phi_points": "121",
        "include_position": "true",
    },
    "numerics": {
        "nodes": "200",
        "rtol": "1e-10",
        "atol": "1e-12",
        "fd_step": "1e-5",
    },
    "output": {
        "precision": "12",
        "format": "csv",
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved experiment configuration (all values concrete)."""

    experiment: str
    physics: dict
    numerics: dict
    output: dict

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "physics": dict(sorted(self.physics.items())),
            "numerics": dict(sorted(self.numerics.items())),
            "output": dict(sorted(self.output.items())),
        }


@dataclass
class ResultRecord:
    """Run result: config echo, named tables, provenance and runtime."""

    config: dict
    tables: dict           # name -> {"columns": [...], "rows": [[...], ...]}
    provenance: dict
    runtime_s: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {"config": self.config, "tables": self.tables,
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        return cls(config=d["config"], tables=d["tables"],
                   provenance=d["provenance"])


def _parse_floats(text: str):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_grid(text: str, default):
    """Grid syntax: 'a:b:n' (linear), 'a:b:n:log', comma/space list, or ''."""
    text = text.strip()
    if not text:
        return np.asarray(default, dtype=float)
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ConfigurationError(f"bad grid spec {text!r}; want start:stop:count[:log]")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) == 4:
            if parts[3] != "log":
                raise ConfigurationError(f"bad grid modifier {parts[3]!r}")
            return np.geomspace(a, b, n)
        return np.linspace(a, b, n)
    return np.asarray(_parse_floats(text), dtype=float)


def load_config(experiment: str, path: str | None) -> RunConfig:
    """Parse and validate an INI config file against the documented schema."""
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )
    raw = {sec: dict(vals) for sec, vals in _DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigurationError(f"config file {path!r} not found or unreadable")
        for sec in parser.sections():
            if sec not in _ALLOWED_KEYS:
                raise ConfigurationError(f"unknown config section [{sec}]")
            for key, val in parser[sec].items():
                if key not in _ALLOWED_KEYS[sec]:
                    raise ConfigurationError(f"unknown config key '{key}' in [{sec}]")
                raw[sec][key] = val

    phys, num, out = raw["physics"], raw["numerics"], raw["output"]
    try:
        physics = {
            "epsilon": float(phys["epsilon"]),
            "epsilon_grid": phys["epsilon_grid"],
            "sigma_q": float(phys["sigma_q"]),
            "atoms": int(phys["atoms"]),
            "twisting": phys["twisting"],
            "rotation": phys["rotation"],
            "interrogation": phys["interrogation"],
            "pulse_shape": phys["pulse_shape"],
            "backend": phys["backend"],
            "class_min": int(phys["class_min"]),
            "class_max": int(phys["class_max"]),
            "q": float(phys["q"]),
            "tau_max": float(phys["tau_max"]),
            "tau_points": int(phys["tau_points"]),
            "q_points": int(phys["q_points"]),
            "phi_points": int(phys["phi_points"]),
            "include_position": phys["include_position"].strip().lower() in ("1", "true", "yes"),
        }
        numerics = {
            "nodes": int(num["nodes"]),
            "rtol": float(num["rtol"]),
            "atol": float(num["atol"]),
            "fd_step": float(num["fd_step"]),
        }
        output = {
            "precision": int(out["precision"]),
            "format": out["format"].strip().lower(),
        }
    except ValueError as exc:
        raise ConfigurationError(f"bad config value: {exc}") from exc
    if output["format"] not in ("csv", "json"):
        raise ConfigurationError(f"format must be csv or json, got {output['format']!r}")
    if physics["twisting"] != "auto":
        float(physics["twisting"])  # raises ValueError -> ConfigurationError below
    if physics["rotation"] != "equator":
        float(physics["rotation"])
    if physics["backend"] not in ("analytic_vs_only", "perturbative", "numeric"):
        raise ConfigurationError(f"unknown backend {physics['backend']!r}")
    if physics["pulse_shape"] not in ("box", "blackman"):
        raise ConfigurationError(f"unknown pulse_shape {physics['pulse_shape']!r}")
    return RunConfig(experiment=experiment, physics=physics, numerics=numerics,
                     output=output)


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------

def _sequence(cfg: RunConfig, eps: float, backend: str, shape: str = "box") -> SequenceParams:
    phys, num = cfg.physics, cfg.numerics
    lam_T = None if phys["interrogation"] == "auto" else float(phys["interrogation"])
    return SequenceParams(
        eps=eps, lam_T=lam_T, backend=backend, shape=shape,
        classes=(phys["class_min"], phys["class_max"]),
        rtol=num["rtol"], atol=num["atol"],
    )


def _state_params(cfg: RunConfig):
    """(N, chi, alpha) with 'auto'/'equator' resolved."""
    N = cfg.physics["atoms"]
    chi = optimal_twisting(N) if cfg.physics["twisting"] == "auto" \
        else float(cfg.physics["twisting"])
    alpha = -initial_inclination(chi, N) if cfg.physics["rotation"] == "equator" \
        else float(cfg.physics["rotation"])
    return N, chi, alpha


def _n_dphi2_point(args):
    """Sweep worker: N * dphi^2 of the OAT state at one coupling strength."""
    cfg, eps, backend, shape = args
    dist = make_gaussian_mode(cfg.physics["sigma_q"], cfg.numerics["nodes"])
    seq = _sequence(cfg, eps, backend, shape)
    scripts = script_quantities(dist, seq, fd_step=cfg.numerics["fd_step"])
    N, chi, alpha = _state_params(cfg)
    return uncertainty_oat(scripts, OatParams(chi, alpha), N).n_dphi2


def _sweep_map(fn, work, threads: int):
    if threads > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, work))
    return [fn(w) for w in work]


def _run_rabi_map(cfg: RunConfig, threads: int) -> dict:
    phys = cfg.physics
    eps = phys["epsilon"] if phys["epsilon"] != 0.1 else 1.5  # figure default
    sigma = phys["sigma_q"]
    taus = np.linspace(0.0, phys["tau_max"], phys["tau_points"])
    half = min(0.5, 3.5 * sigma)
    qs = np.linspace(-half, half, phys["q_points"])
    env = EnvelopeSpec(phys["pulse_shape"], eps, phys["tau_max"])
    lam_grid = taus / eps if phys["pulse_shape"] == "box" else taus / (0.42 * eps)
    classes = (phys["class_min"], phys["class_max"])
    ns = np.arange(classes[0], classes[1] + 1)
    rows = []
    for q in qs:
        Us = evolve_pulse(q, env, 0.0, classes, cfg.numerics["rtol"],
                          cfg.numerics["atol"], lam_grid=lam_grid)
        i0 = int(np.searchsorted(ns, 0))
        dens = float(np.exp(-q ** 2 / (2.0 * sigma ** 2)))
        for tau, U in zip(taus, Us):
            pops = np.abs(U[:, i0]) ** 2
            rows.append([float(tau), float(q), dens] + [float(p) for p in pops])
    cols = ["tau", "q", "density"] + [f"pop_{n}" for n in ns]
    return {"map": {"columns": cols, "rows": rows}}


def _run_fringe(cfg: RunConfig, threads: int) -> dict:
    phys = cfg.physics
    eps = phys["epsilon"]
    dist = make_gaussian_mode(phys["sigma_q"], cfg.numerics["nodes"])
    seq = _sequence(cfg, eps, phys["backend"] if phys["backend"] != "numeric" else "analytic_vs_only")
    N = phys["atoms"]
    phis = np.linspace(0.0, 2.0 * np.pi, phys["phi_points"])
    rows = []
    for phi in phis:
        sf, off_h, amp = signal_full(dist, seq, phi)
        sc, off_s, _, eta = signal_cropped(dist, seq, phi)
        if abs(np.sin(phi)) > 1e-6:
            nd_f = uncertainty_vs_only(dist, seq, "full", N, phi).n_dphi2
            nd_c = uncertainty_vs_only(dist, seq, "cropped", N, phi).n_dphi2
        else:
            nd_f = nd_c = float("nan")
        rows.append([float(phi), float(sf), float(sc), nd_f, nd_c,
                     float(off_h), float(off_s), float(amp), float(eta)])
    tables = {"fringe": {
        "columns": ["phi", "j3_full_per_atom", "j3_cropped_per_atom",
                    "n_dphi2_full", "n_dphi2_cropped",
                    "offset_full", "offset_cropped", "amplitude", "eta_cropped"],
        "rows": rows,
    }}
    if phys["include_position"]:
        lam_T = seq.interrogation_time
        sigma_z = 1.0 / (4.0 * lam_T * dist.sigma_q)
        z = np.arange(-0.5, 2.5, sigma_z / 4.0)
        prow = []
        dens = {}
        for phi_tag, phi in (("phi0", 0.0), ("phi90", np.pi / 2.0)):
            for exit_class in (0, 1):
                dens[(phi_tag, exit_class)] = position_distribution(
                    dist, seq, phi, exit_class, z)
        for i, zi in enumerate(z):
            prow.append([float(zi)] + [float(dens[k][i]) for k in
                                       (("phi0", 0), ("phi0", 1), ("phi90", 0), ("phi90", 1))])
        tables["position"] = {
            "columns": ["z", "exit0_phi0", "exit1_phi0", "exit0_phi90", "exit1_phi90"],
            "rows": prow,
        }
    return tables


def _run_sensitivity_sweep(cfg: RunConfig, threads: int) -> dict:
    eps_grid = _parse_grid(cfg.physics["epsilon_grid"], np.geomspace(0.02, 1.0, 25))
    vals_p = _sweep_map(_n_dphi2_point, [(cfg, e, "perturbative", "box") for e in eps_grid], threads)
    vals_n = _sweep_map(_n_dphi2_point, [(cfg, e, "numeric", cfg.physics["pulse_shape"])
                                         for e in eps_grid], threads)
    rows = []
    for e, vp, vn in zip(eps_grid, vals_p, vals_n):
        flag = "ok" if e <= 0.5 else "extrapolated"
        rows.append([float(e), float(vp), float(vn), flag])
    return {"sweep": {
        "columns": ["epsilon", "n_dphi2_pert", "n_dphi2_num", "regime_flag"],
        "rows": rows,
    }}


def _run_validate_pert(cfg: RunConfig, threads: int) -> dict:
    phys = cfg.physics
    q, eps = phys["q"], phys["epsilon"] if phys["epsilon"] != 0.1 else 0.2
    taus = np.linspace(0.0, phys["tau_max"], phys["tau_points"])[1:]
    classes = (phys["class_min"], phys["class_max"])
    ns = np.arange(classes[0], classes[1] + 1)
    i0 = int(np.searchsorted(ns, 0))
    env = EnvelopeSpec("box", eps, float(taus[-1]))
    Us = evolve_pulse(q, env, 0.0, classes, cfg.numerics["rtol"],
                      cfg.numerics["atol"], lam_grid=taus / eps)
    rows = []
    for tau, U in zip(taus, Us):
        tr = pert_transfer(q, PulseParams(eps, float(tau)))
        lam = tau / eps
        D = np.diag([np.exp(1j * lam / 2.0), np.exp(-1j * lam / 2.0)])
        Gn = np.exp(-1j * eps ** 2 * lam / 8.0) * (D @ U[i0:i0 + 2, i0:i0 + 2])
        gp = {0: complex(tr.T), 1: complex(tr.Rt),
              -1: complex(tr.gm10), 2: complex(tr.g20)}
        gn = {0: Gn[0, 0], 1: Gn[1, 0],
              -1: U[i0 - 1, i0], 2: U[i0 + 2, i0]}
        for n in (-1, 0, 1, 2):
            mod_p, mod_n = abs(gp[n]), abs(gn[n])
            if n in (0, 1):
                d = np.angle(gp[n]) - np.angle(gn[n])
                arg_res = float(abs((d + np.pi) % (2.0 * np.pi) - np.pi))
            else:
                arg_res = float("nan")  # adjacent-class phases not described
            rows.append([float(tau), int(n), mod_p, mod_n,
                         float(abs(mod_p - mod_n)), arg_res])
    tables = {"pulse_residuals": {
        "columns": ["tau", "class", "mod_pert", "mod_num", "mod_residual", "arg_residual"],
        "rows": rows,
    }}

    eps_grid = _parse_grid(phys["epsilon_grid"], np.geomspace(0.05, 0.3, 13))
    vals_p = _sweep_map(_n_dphi2_point, [(cfg, e, "perturbative", "box") for e in eps_grid], threads)
    vals_n = _sweep_map(_n_dphi2_point, [(cfg, e, "numeric", "box") for e in eps_grid], threads)
    srows = [[float(e), float(vp), float(vn), float(abs(vp - vn))]
             for e, vp, vn in zip(eps_grid, vals_p, vals_n)]
    tables["uncertainty_residuals"] = {
        "columns": ["epsilon", "n_dphi2_pert", "n_dphi2_num", "residual"],
        "rows": srows,
    }
    return tables


def _run_pulse_shape(cfg: RunConfig, threads: int) -> dict:
    eps_grid = _parse_grid(cfg.physics["epsilon_grid"], np.geomspace(0.1, 1.0, 19))
    vals_box = _sweep_map(_n_dphi2_point, [(cfg, e, "perturbative", "box") for e in eps_grid], threads)
    vals_bm = _sweep_map(_n_dphi2_point, [(cfg, e, "numeric", "blackman") for e in eps_grid], threads)
    rows = [[float(e), float(vb), float(vm)] for e, vb, vm in zip(eps_grid, vals_box, vals_bm)]
    return {"pulse_shape": {
        "columns": ["epsilon", "n_dphi2_box", "n_dphi2_blackman"],
        "rows": rows,
    }}


def _optimize_point(args):
    cfg, eps = args
    dist = make_gaussian_mode(cfg.physics["sigma_q"], cfg.numerics["nodes"])
    seq = _sequence(cfg, eps, "perturbative")
    scripts = script_quantities(dist, seq, fd_step=cfg.numerics["fd_step"])
    N, chi, alpha = _state_params(cfg)
    base = uncertainty_oat(scripts, OatParams(chi, alpha), N).n_dphi2
    inc = optimize_inclination(scripts, N, chi=chi)
    twi = optimize_twisting(scripts, N, chi0=chi)
    return [float(eps), float(base), float(inc.parameter), float(inc.n_dphi2),
            float(twi.parameter), float(twi.n_dphi2)]


def _run_optimize(cfg: RunConfig, threads: int) -> dict:
    eps_grid = _parse_grid(cfg.physics["epsilon_grid"], np.geomspace(0.1, 1.0, 10))
    rows = _sweep_map(_optimize_point, [(cfg, e) for e in eps_grid], threads)
    return {"optimize": {
        "columns": ["epsilon", "n_dphi2_equator", "inclination_opt",
                    "n_dphi2_inclination", "twisting_opt", "n_dphi2_twisting"],
        "rows": rows,
    }}


_RUNNERS = {
    "rabi-map": _run_rabi_map,
    "fringe": _run_fringe,
    "sensitivity-sweep": _run_sensitivity_sweep,
    "validate-pert": _run_validate_pert,
    "pulse-shape": _run_pulse_shape,
    "optimize": _run_optimize,
}


def run(cfg: RunConfig, threads: int = 1) -> ResultRecord:
    """Execute the configured experiment and return its record."""
    t0 = time.perf_counter()
    tables = _RUNNERS[cfg.experiment](cfg, threads)
    runtime = time.perf_counter() - t0
    backend = cfg.physics["backend"]
    return ResultRecord(
        config=cfg.echo(),
        tables=tables,
        provenance={"artifact": "bragg-sense", "version": __version__,
                    "backend": backend},
        runtime_s=runtime,
    )


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(value, precision: int):
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    if isinstance(value, complex):
        return f"{value.real:.{precision}g}{value.imag:+.{precision}g}j"
    return str(value)


def emit(record: ResultRecord, out_dir: str, fmt: str, precision: int) -> list:
    """Write the record deterministically; returns the file paths written.

    Timestamps and runtimes are deliberately excluded so that identical
    configs produce byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    tag = record.config["experiment"]
    written = []
    if fmt == "csv":
        for name, table in record.tables.items():
            path = os.path.join(out_dir, f"{tag}_{name}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
                writer.writerow(table["columns"])
                for row in table["rows"]:
                    writer.writerow([_fmt(v, precision) for v in row])
            written.append(path)
        meta = os.path.join(out_dir, f"{tag}_config.json")
        with open(meta, "w") as fh:
            json.dump({"config": record.config, "provenance": record.provenance},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(meta)
    else:
        path = os.path.join(out_dir, f"{tag}.json")
        doc = record.to_dict()
        rounded = {
            name: {"columns": t["columns"],
                   "rows": [[_round_json(v, precision) for v in row] for row in t["rows"]]}
            for name, t in doc["tables"].items()
        }
        doc = {"config": doc["config"], "tables": rounded,
               "provenance": doc["provenance"]}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
        written.append(path)
    return written


def _round_json(value, precision: int):
    if isinstance(value, float):
        return float(f"{value:.{precision}g}")
    if isinstance(value, complex):
        return [float(f"{value.real:.{precision}g}"), float(f"{value.imag:.{precision}g}")]
    return value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bragg-sense",
        description="Bragg Mach-Zehnder interferometer sensitivity toolkit",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", default=None, choices=("csv", "json"))
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes for sweeps (env BRAGG_SENSE_THREADS)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.experiment, args.config)
        fmt = args.format or cfg.output["format"]
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("BRAGG_SENSE_THREADS", "1"))
        if threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {threads}")
        record = run(cfg, threads)
        written = emit(record, args.out, fmt, cfg.output["precision"])
    except (ConfigurationError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, OSError) as exc:
        print(f"numeric/io error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BraggSenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(written)} file(s) in {record.runtime_s:.1f} s:", file=sys.stderr)
    for path in written:
        print(f"  {path}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
