"""Command-line front end: scenario configs, scans, CSV/JSON output.

Config files are flat ``key = value`` text (``#`` comments). Frequencies
may be absolute rad/s or symbolic multiples of the material scales
(``omega_r``, the transverse resonance, and ``omega_p``, the surface-mode
frequency), e.g. ``omega_31 = 0.5*omega_r``. Grids are a single number,
a comma list, or ``log:lo:hi:n`` / ``lin:lo:hi:n``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_T_SEARCH,
    environment_scan,
    scan,
)
from .atom import AtomModel, Populations, evolve_populations, steady_state, transition_rates
from .optics import DielectricModel, load_material, surface_mode_frequency
from .quadrature import QuadratureSpec
from .response import GeometryPoint, alpha_pair, crossover_distance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONFIG_KEYS = (
    "material", "omega", "omega_31", "omega_32", "T_W", "T_M", "z", "delta",
    "weights", "weights_31", "weights_32", "rel_tol", "abs_tol",
    "max_subdivisions", "thermal_search", "t", "initial", "bracket",
)

_DEFAULTS = {
    "material": "sic",
    "delta": "1e-2",
    "weights": "isotropic",
    "weights_31": "isotropic",
    "weights_32": "isotropic",
    "rel_tol": "1e-9",
    "abs_tol": "1e-14",
    "max_subdivisions": "2000",
    "thermal_search": "1,5000",
    "initial": "1,0,0",
}

_REQUIRED = {
    "rates": ("omega", "T_W", "T_M", "z"),
    "teff-map": ("omega", "T_W", "T_M", "z", "delta"),
    "steady": ("omega_31", "omega_32", "T_W", "T_M", "z"),
    "thermal-track": ("omega_31", "omega_32", "T_W", "T_M", "z"),
    "evolve": ("omega_31", "omega_32", "T_W", "T_M", "z", "t"),
    "crossover": ("omega", "bracket"),
}

_COLUMNS = {
    "rates": ("delta", "z", "alpha_W", "alpha_M", "n_eff", "T_eff",
              "gamma_down_over_gamma0", "gamma_up_over_gamma0", "error"),
    "teff-map": ("delta", "z", "alpha_W", "alpha_M", "n_eff", "T_eff", "error"),
    "steady": ("delta", "z", "p1", "p2", "p3", "inverted", "error"),
    "thermal-track": ("delta", "z", "p1", "p2", "p3", "T_eff_31", "T_eff_32",
                      "closest_T", "distance", "is_thermal", "at_boundary", "error"),
    "evolve": ("t", "p1", "p2", "p3"),
    "crossover": ("omega", "delta", "z_star", "alpha_W", "alpha_M"),
}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    material_name: str
    model: DielectricModel
    spec: QuadratureSpec
    omega: float | None = None
    omega_31: float | None = None
    omega_32: float | None = None
    T_W: float | None = None
    T_M: float | None = None
    z_values: np.ndarray | None = None
    delta_values: np.ndarray | None = None
    weights: tuple = (1 / 3, 1 / 3, 1 / 3)
    weights_31: tuple = (1 / 3, 1 / 3, 1 / 3)
    weights_32: tuple = (1 / 3, 1 / 3, 1 / 3)
    thermal_search: tuple = DEFAULT_T_SEARCH
    t_values: np.ndarray | None = None
    initial: tuple = (1.0, 0.0, 0.0)
    bracket: tuple | None = None
    resolved: dict = field(default_factory=dict)

    def atom(self) -> AtomModel:
        try:
            return AtomModel(omega_31=self.omega_31, omega_32=self.omega_32,
                             weights_31=self.weights_31, weights_32=self.weights_32)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"omega_31/omega_32: {exc}") from exc


def _parse_kv(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key: {key!r}")
        if key in values:
            raise ConfigError(f"duplicate key: {key!r}")
        values[key] = val.strip()
    return values


def _parse_frequency(expr: str, key: str, omega_r: float, omega_p: float) -> float:
    m = re.fullmatch(r"(?:([0-9.eE+-]+)\s*\*\s*)?omega_([rp])", expr)
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        base = omega_r if m.group(2) == "r" else omega_p
        value = factor * base
    else:
        try:
            value = float(expr)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse frequency {expr!r}") from None
    if not value > 0.0:
        raise ConfigError(f"{key}: frequency must be > 0")
    return value


def _parse_grid(expr: str, key: str, positive: bool = True) -> np.ndarray:
    m = re.fullmatch(r"(log|lin):([^:]+):([^:]+):(\d+)", expr)
    if m:
        lo, hi, n = float(m.group(2)), float(m.group(3)), int(m.group(4))
        if n < 1 or hi < lo:
            raise ConfigError(f"{key}: malformed grid {expr!r}")
        if m.group(1) == "log":
            if lo <= 0:
                raise ConfigError(f"{key}: log grid needs lo > 0")
            values = np.geomspace(lo, hi, n)
        else:
            values = np.linspace(lo, hi, n)
    else:
        try:
            values = np.array([float(x) for x in expr.split(",")])
        except ValueError:
            raise ConfigError(f"{key}: cannot parse grid {expr!r}") from None
    if positive and np.any(values <= 0.0):
        raise ConfigError(f"{key}: values must be > 0")
    if values.size > 1 and np.any(np.diff(values) <= 0.0):
        raise ConfigError(f"{key}: grid must be strictly increasing")
    return values


def _parse_triple(expr: str, key: str) -> tuple:
    if expr == "isotropic":
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    parts = expr.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected three comma-separated values")
    try:
        return tuple(float(x) for x in parts)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {expr!r}") from None


def _parse_pair(expr: str, key: str) -> tuple:
    parts = expr.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected two comma-separated values")
    try:
        lo, hi = (float(x) for x in parts)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {expr!r}") from None
    if not 0.0 < lo < hi:
        raise ConfigError(f"{key}: need 0 < lo < hi")
    return lo, hi


def load_config(path: str | Path, overrides: dict | None = None) -> ScenarioConfig:
    """Parse and validate a scenario config file, filling defaults.

    ``overrides`` maps config keys to replacement raw strings (used for
    the tolerance environment variables and command-line flags). Every
    resolved value, defaults included, lands in ``config.resolved``.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    raw = _parse_kv(text)
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = str(val)
    merged = dict(_DEFAULTS)
    merged.update(raw)

    material = merged["material"]
    try:
        model = load_material(material)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"material: {exc}") from exc
    omega_r = model.omega_T
    try:
        omega_p = surface_mode_frequency(model)
    except ValueError:
        omega_p = None

    def freq(key):
        if key not in merged:
            return None
        expr = merged[key]
        if "omega_p" in expr and omega_p is None:
            raise ConfigError(f"{key}: material has no surface mode, omega_p undefined")
        return _parse_frequency(expr, key, omega_r, omega_p or 0.0)

    def temp(key):
        if key not in merged:
            return None
        try:
            value = float(merged[key])
        except ValueError:
            raise ConfigError(f"{key}: cannot parse temperature") from None
        if not value > 0.0:
            raise ConfigError(f"{key}: temperature must be > 0")
        return value

    try:
        spec = QuadratureSpec(rel_tol=float(merged["rel_tol"]),
                              abs_tol=float(merged["abs_tol"]),
                              max_subdivisions=int(merged["max_subdivisions"]))
    except ValueError as exc:
        raise ConfigError(f"quadrature spec: {exc}") from exc

    cfg = ScenarioConfig(
        material_name=material,
        model=model,
        spec=spec,
        omega=freq("omega"),
        omega_31=freq("omega_31"),
        omega_32=freq("omega_32"),
        T_W=temp("T_W"),
        T_M=temp("T_M"),
        z_values=_parse_grid(merged["z"], "z") if "z" in merged else None,
        delta_values=_parse_grid(merged["delta"], "delta", positive=False),
        weights=_parse_triple(merged["weights"], "weights"),
        weights_31=_parse_triple(merged["weights_31"], "weights_31"),
        weights_32=_parse_triple(merged["weights_32"], "weights_32"),
        thermal_search=_parse_pair(merged["thermal_search"], "thermal_search"),
        t_values=_parse_grid(merged["t"], "t", positive=False) if "t" in merged else None,
        initial=_parse_triple(merged["initial"], "initial"),
        bracket=_parse_pair(merged["bracket"], "bracket") if "bracket" in merged else None,
    )
    if cfg.omega_31 is not None and cfg.omega_32 is not None \
            and cfg.omega_31 == cfg.omega_32:
        raise ConfigError("omega_31 must differ from omega_32")
    if np.any(cfg.delta_values < 0.0):
        raise ConfigError("delta: values must be >= 0")

    cfg.resolved = {
        "material": material,
        "eps_inf": repr(model.eps_inf),
        "omega_L": repr(model.omega_L),
        "omega_T": repr(model.omega_T),
        "gamma_damp": repr(model.gamma_damp),
    }
    if omega_p is not None:
        cfg.resolved["omega_p_resolved"] = repr(omega_p)
    for key in ("omega", "omega_31", "omega_32"):
        value = getattr(cfg, key)
        if value is not None:
            cfg.resolved[key] = repr(value)
    for key in ("T_W", "T_M"):
        value = getattr(cfg, key)
        if value is not None:
            cfg.resolved[key] = repr(value)
    if cfg.z_values is not None:
        cfg.resolved["z"] = merged["z"]
    cfg.resolved["delta"] = merged["delta"]
    for key in ("weights", "weights_31", "weights_32", "initial"):
        cfg.resolved[key] = ",".join(repr(x) for x in getattr(cfg, key))
    cfg.resolved["thermal_search"] = ",".join(repr(x) for x in cfg.thermal_search)
    if cfg.t_values is not None:
        cfg.resolved["t"] = merged["t"]
    if cfg.bracket is not None:
        cfg.resolved["bracket"] = ",".join(repr(x) for x in cfg.bracket)
    cfg.resolved["rel_tol"] = repr(spec.rel_tol)
    cfg.resolved["abs_tol"] = repr(spec.abs_tol)
    cfg.resolved["max_subdivisions"] = repr(spec.max_subdivisions)
    return cfg


def _require(cfg: ScenarioConfig, command: str):
    missing = []
    attr = {"omega": "omega", "omega_31": "omega_31", "omega_32": "omega_32",
            "T_W": "T_W", "T_M": "T_M", "z": "z_values", "t": "t_values",
            "delta": "delta_values", "bracket": "bracket"}
    for key in _REQUIRED[command]:
        if getattr(cfg, attr[key]) is None:
            missing.append(key)
    if missing:
        raise ConfigError(f"{command}: missing required key(s): {', '.join(missing)}")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _write(out_path, fmt, command, cfg, columns, rows):
    meta = {"command": command, "version": __version__, **cfg.resolved}
    if fmt == "csv":
        lines = [f"# {k} = {v}" for k, v in meta.items()]
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        payload = "\n".join(lines) + "\n"
    else:
        def norm(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (float, np.floating)):
                return None if not np.isfinite(v) else float(v)
            return v
        payload = json.dumps({
            "schema": "neqatom.v1",
            "metadata": meta,
            "columns": list(columns),
            "rows": [[norm(v) for v in row] for row in rows],
        }, indent=1) + "\n"
    if out_path == "-":
        sys.stdout.write(payload)
    else:
        Path(out_path).write_text(payload)


def _run_rates(cfg, threads, with_rates=True):
    records = environment_scan(cfg.omega, cfg.weights, cfg.model, cfg.z_values,
                               cfg.delta_values, cfg.T_W, cfg.T_M, cfg.spec, threads)
    rows, failures = [], []
    for z, d, env, err in records:
        if env is None:
            base = [d, z] + [float("nan")] * (4 if not with_rates else 6)
            rows.append(base + [err])
            failures.append((z, d, err))
        else:
            row = [d, z, env.alpha_W, env.alpha_M, env.n_eff, env.T_eff]
            if with_rates:
                row += [env.gamma_down / env.gamma0, env.gamma_up / env.gamma0]
            rows.append(row + [None])
    return rows, failures


def _run_steady(cfg, threads, command):
    result = scan(cfg.atom(), cfg.model, cfg.z_values, cfg.delta_values,
                  cfg.T_W, cfg.T_M, cfg.spec, cfg.thermal_search,
                  with_thermal=(command == "thermal-track"), threads=threads)
    rows, failures = [], []
    for pt in result.points:
        if pt.error is not None:
            width = 4 if command == "steady" else 9
            rows.append([pt.delta, pt.z] + [float("nan")] * width + [pt.error])
            failures.append((pt.z, pt.delta, pt.error))
            continue
        p = pt.populations
        if command == "steady":
            rows.append([pt.delta, pt.z, p.p1, p.p2, p.p3, p.p2 > p.p1, None])
        else:
            tc = pt.thermal
            rows.append([pt.delta, pt.z, p.p1, p.p2, p.p3,
                         pt.env31.T_eff, pt.env32.T_eff,
                         tc.closest_T, tc.distance, tc.is_thermal, tc.at_boundary, None])
    return rows, failures


def _run_evolve(cfg):
    if cfg.z_values.size != 1 or cfg.delta_values.size != 1:
        raise ConfigError("evolve: z and delta must be single values")
    atom = cfg.atom()
    geom = GeometryPoint(z=float(cfg.z_values[0]), delta=float(cfg.delta_values[0]))
    a31 = alpha_pair(atom.omega_31, geom, cfg.model, atom.weights_31, cfg.spec)
    a32 = alpha_pair(atom.omega_32, geom, cfg.model, atom.weights_32, cfg.spec)
    env31 = transition_rates(atom, "31", a31, cfg.T_W, cfg.T_M)
    env32 = transition_rates(atom, "32", a32, cfg.T_W, cfg.T_M)
    try:
        initial = Populations(*cfg.initial)
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from exc
    rows = []
    for t in cfg.t_values:
        if t < 0:
            raise ConfigError("t: times must be >= 0")
        p = evolve_populations(initial, env31, env32, float(t))
        rows.append([float(t), p.p1, p.p2, p.p3])
    return rows, []


def _run_crossover(cfg):
    if cfg.delta_values.size != 1:
        raise ConfigError("crossover: delta must be a single value")
    delta = float(cfg.delta_values[0])
    z_star = crossover_distance(cfg.omega, delta, cfg.model, cfg.bracket,
                                cfg.weights, None)
    pair = alpha_pair(cfg.omega, GeometryPoint(z=z_star, delta=delta),
                      cfg.model, cfg.weights, cfg.spec)
    return [[cfg.omega, delta, z_star, pair.alpha_W, pair.alpha_M]], []


def _build_parser() -> argparse.ArgumentParser:
    epilog = (
        "config keys: " + ", ".join(_CONFIG_KEYS) + "\n"
        "frequencies: rad/s or multiples of omega_r / omega_p, e.g. 0.5*omega_r\n"
        "grids: single value, comma list, log:lo:hi:n or lin:lo:hi:n\n"
        "env overrides: NEQATOM_REL_TOL, NEQATOM_ABS_TOL, NEQATOM_MAX_SUBDIVISIONS\n"
        "output columns (fixed order):\n"
        + "\n".join(f"  {cmd}: {','.join(cols)}" for cmd, cols in _COLUMNS.items())
        + "\nexit codes: 0 success, 2 config error, 3 numerical failure"
    )
    parser = argparse.ArgumentParser(
        prog="neqatom",
        description="Radiative environment and steady states of a three-level "
                    "atom near a slab held out of thermal equilibrium.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(_REQUIRED),
                        help="computation to run")
    parser.add_argument("--config", required=True, help="path to config file")
    parser.add_argument("--out", default="-", help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--rel-tol", type=float, default=None,
                        help="override quadrature relative tolerance")
    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = {
        "rel_tol": os.environ.get("NEQATOM_REL_TOL"),
        "abs_tol": os.environ.get("NEQATOM_ABS_TOL"),
        "max_subdivisions": os.environ.get("NEQATOM_MAX_SUBDIVISIONS"),
    }
    if args.rel_tol is not None:
        overrides["rel_tol"] = repr(args.rel_tol)
    try:
        cfg = load_config(args.config, overrides)
        _require(cfg, args.command)
        if args.command in ("rates", "teff-map"):
            rows, failures = _run_rates(cfg, args.threads,
                                        with_rates=args.command == "rates")
        elif args.command in ("steady", "thermal-track"):
            rows, failures = _run_steady(cfg, args.threads, args.command)
        elif args.command == "evolve":
            rows, failures = _run_evolve(cfg)
        else:
            rows, failures = _run_crossover(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    _write(args.out, args.format, args.command, cfg, _COLUMNS[args.command], rows)
    if failures:
        z, d, err = failures[0]
        print(f"numerical failure at z={z!r}, delta={d!r}: {err}"
              f" ({len(failures)} of {len(rows)} points failed)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
