"""Batch front-end: JSON job configs in, CSV tables and JSON summaries out.

Exit codes: 0 all built-in checks pass, 2 config validation error,
3 numerical inconsistency beyond tolerance (outputs still written),
4 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import schrodinger as sch
from .errors import RouteMismatchError, SemisepError
from .families import kernel_family, potential_family
from .quadrature import build_grid
from .reduction import (
    ROUTE_H1,
    ROUTE_H2,
    ROUTE_NYSTROM,
    ROUTE_PROP_A,
    ROUTE_PROP_B,
    det1_semiseparable,
    det2_nystrom,
    det2_semiseparable,
)

COMMANDS = ("det2", "det1", "jost_pais", "system_det2", "bound_states",
            "bargmann", "converge")

ENV_PREFIX = "SEMISEP_TOL_"

DEFAULT_TOLERANCES = {
    "consistency": 1e-6,   # cross-route spread of the reduction routes
    "identity": 1e-6,      # determinant-identity checks between pipelines
    "trace": 1e-7,         # trace agreement between the two branches
    "truncation": 1e-8,    # tail mass for infinite intervals
}


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _parse_values(spec) -> list:
    """Expand a parameter list: numbers, [re, im] pairs, lin/log descriptors."""
    if spec is None:
        raise ConfigError("missing parameter list")
    if isinstance(spec, dict):
        if "linspace" in spec:
            lo, hi, n = spec["linspace"]
            return [complex(v) for v in np.linspace(lo, hi, int(n))]
        if "logspace" in spec:
            lo, hi, n = spec["logspace"]
            return [complex(v) for v in np.logspace(lo, hi, int(n))]
        raise ConfigError(f"unknown parameter descriptor {sorted(spec)}")
    out = []
    for item in spec:
        if isinstance(item, (int, float)):
            out.append(complex(item))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            out.append(complex(item[0], item[1]))
        else:
            raise ConfigError(f"cannot parse parameter entry {item!r}")
    return out


@dataclass
class JobConfig:
    """Validated batch-job description."""

    command: str
    kernel: dict | None = None
    potential: dict | None = None
    alpha: list = field(default_factory=list)
    z: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    domain: str = sch.FULL_LINE
    method: str = "all"
    levels: int = 4
    direct_count: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "JobConfig":
        command = raw.get("command")
        if command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
        kernel = raw.get("kernel")
        potential = raw.get("potential")
        if (kernel is None) == (potential is None):
            raise ConfigError("exactly one of 'kernel' or 'potential' must be present")
        needs_kernel = command in ("det2", "det1")
        needs_potential = command in ("jost_pais", "system_det2", "bound_states", "bargmann")
        if needs_kernel and kernel is None:
            raise ConfigError(f"command {command!r} requires a kernel spec")
        if needs_potential and potential is None:
            raise ConfigError(f"command {command!r} requires a potential spec")

        tol = dict(DEFAULT_TOLERANCES)
        tol.update(raw.get("tolerances", {}))
        for key, value in os.environ.items():
            if key.startswith(ENV_PREFIX):
                tol[key[len(ENV_PREFIX):].lower()] = float(value)

        cfg = cls(
            command=command,
            kernel=kernel,
            potential=potential,
            alpha=_parse_values(raw["alpha"]) if "alpha" in raw else [],
            z=_parse_values(raw["z"]) if "z" in raw else [],
            grid=raw.get("grid", {}),
            tolerances=tol,
            domain=raw.get("domain", sch.FULL_LINE),
            method=raw.get("method", "all"),
            levels=int(raw.get("levels", 4)),
            direct_count=bool(raw.get("direct_count", False)),
        )
        cfg._validate_parameters()
        return cfg

    def _validate_parameters(self):
        if self.command in ("det2", "det1") and not self.alpha:
            raise ConfigError(f"command {self.command!r} requires an alpha list")
        if self.command in ("jost_pais", "system_det2") and not self.z:
            raise ConfigError(f"command {self.command!r} requires a z list")
        for z in self.z:
            if abs(z) < sch.Z_MIN:
                raise ConfigError(f"|z| = {abs(z):.2e} violates the z_min guard")
            if z.imag == 0 and z.real >= 0:
                raise ConfigError(f"z = {z} lies on the essential-spectrum cut")
        if self.command == "converge":
            if self.kernel is not None and len(self.alpha) != 1:
                raise ConfigError("converge on a kernel needs exactly one alpha")
            if self.potential is not None and len(self.z) != 1:
                raise ConfigError("converge on a potential needs exactly one z")
        if self.domain not in (sch.FULL_LINE, sch.HALF_LINE):
            raise ConfigError(f"unknown domain {self.domain!r}")

    def build_kernel(self):
        spec = dict(self.kernel)
        return kernel_family(spec.pop("family"), **spec)

    def build_potential(self):
        spec = dict(self.potential)
        return potential_family(spec.pop("family"), **spec)

    def kernel_grid(self, kernel, factor: int = 1):
        panels = int(self.grid.get("panels", 8)) * factor
        n = int(self.grid.get("n_per_panel", 16))
        return build_grid(kernel.interval, n, panels)

    def potential_quadrature(self, pot, factor: int = 1):
        return sch.potential_grid(
            pot,
            tol=float(self.grid.get("truncation_tol",
                                    self.tolerances["truncation"])),
            n_per_panel=int(self.grid.get("n_per_panel", 16)),
            panels_per_unit=float(self.grid.get("panels_per_unit", 2.0)) * factor,
        )


# ----------------------------------------------------------------------
# per-command row workers; each returns (sort_key, csv_row, check dicts)

_DET_ROUTES = (ROUTE_H1, ROUTE_PROP_A, ROUTE_H2, ROUTE_PROP_B, ROUTE_NYSTROM)


def _det_header():
    cols = ["param_re", "param_im"]
    for r in _DET_ROUTES:
        cols += [f"{r}_re", f"{r}_im"]
    cols += ["cross_route_spread", "grid_nodes", "wall_time_ms"]
    return cols


def _det_row(cfg, kernel, grid, alpha, kind):
    t0 = time.perf_counter()
    fn = det2_semiseparable if kind == "det2" else det1_semiseparable
    res = fn(kernel, alpha, grid, consistency_tol=cfg.tolerances["consistency"])
    try:
        ny = det2_nystrom(kernel, alpha, grid).value
    except SemisepError:
        ny = complex("nan")
    if kind == "det1":
        ny = ny * np.exp(-alpha * res.trace_f1g1)
    ms = (time.perf_counter() - t0) * 1e3
    row = [_fmt(alpha.real), _fmt(alpha.imag)]
    for r in _DET_ROUTES[:4]:
        v = res.route_values[r]
        row += [_fmt(v.real), _fmt(v.imag)]
    row += [_fmt(ny.real), _fmt(ny.imag)]
    row += [_fmt(res.cross_route_spread), str(res.grid_nodes), _fmt(ms)]
    checks = [{
        "name": f"{kind} route consistency at alpha={alpha}",
        "passed": res.cross_route_spread <= cfg.tolerances["consistency"],
        "value": res.cross_route_spread,
    }]
    if kind == "det1":
        trace_ok = abs(res.trace_f1g1 - res.trace_f2g2) <= \
            cfg.tolerances["trace"] * (1 + abs(res.trace_f1g1))
        checks.append({
            "name": f"trace consistency at alpha={alpha}",
            "passed": bool(trace_ok),
            "value": abs(res.trace_f1g1 - res.trace_f2g2),
        })
    return (alpha.real, alpha.imag), row, checks


def _jost_pais_row(cfg, pot, grid, z):
    t0 = time.perf_counter()
    lhs, rhs = sch.jost_pais_check(pot, z, grid)
    diff = abs(lhs - rhs) / max(1.0, abs(rhs))
    ms = (time.perf_counter() - t0) * 1e3
    row = [_fmt(z.real), _fmt(z.imag), _fmt(lhs.real), _fmt(lhs.imag),
           _fmt(rhs.real), _fmt(rhs.imag), _fmt(diff), str(grid.size), _fmt(ms)]
    checks = [{
        "name": f"fredholm-vs-jost identity at z={z}",
        "passed": diff <= cfg.tolerances["identity"],
        "value": diff,
    }]
    return (z.real, z.imag), row, checks


def _system_det2_row(cfg, pot, grid, z):
    t0 = time.perf_counter()
    d2_sys, d2_k, jost_side = sch.system_det2_check(pot, z, grid)
    vals = (d2_sys, d2_k, jost_side)
    scale = max(max(abs(v) for v in vals), 1.0)
    worst = max(abs(u - v) for u in vals for v in vals) / scale
    ms = (time.perf_counter() - t0) * 1e3
    row = [_fmt(z.real), _fmt(z.imag)]
    for v in vals:
        row += [_fmt(v.real), _fmt(v.imag)]
    row += [_fmt(worst), str(grid.size), _fmt(ms)]
    checks = [{
        "name": f"system det2 agreement at z={z}",
        "passed": worst <= cfg.tolerances["identity"],
        "value": worst,
    }]
    return (z.real, z.imag), row, checks


# ----------------------------------------------------------------------
# command drivers

def _run_det(cfg, kind, workers):
    kernel = cfg.build_kernel()
    grid = cfg.kernel_grid(kernel)
    header = _det_header()
    rows = _parallel(workers,
                     [(cfg, kernel, grid, a, kind) for a in cfg.alpha],
                     _det_row)
    return header, rows


def _run_jost_pais(cfg, workers):
    pot = cfg.build_potential()
    grid = cfg.potential_quadrature(pot)
    header = ["param_re", "param_im", "det_reduced_re", "det_reduced_im",
              "det_jost_re", "det_jost_im", "rel_diff", "grid_nodes", "wall_time_ms"]
    rows = _parallel(workers, [(cfg, pot, grid, z) for z in cfg.z], _jost_pais_row)
    return header, rows


def _run_system_det2(cfg, workers):
    pot = cfg.build_potential()
    grid = cfg.potential_quadrature(pot)
    header = ["param_re", "param_im", "det2_system_re", "det2_system_im",
              "det2_kernel_re", "det2_kernel_im", "jost_side_re", "jost_side_im",
              "max_pairwise_rel", "grid_nodes", "wall_time_ms"]
    rows = _parallel(workers, [(cfg, pot, grid, z) for z in cfg.z], _system_det2_row)
    return header, rows


def _run_bound_states(cfg):
    pot = cfg.build_potential()
    grid = cfg.potential_quadrature(pot)
    header = ["method", "count", "grid_nodes", "wall_time_ms"]
    methods = ([sch.METHOD_JOST, sch.METHOD_BS, sch.METHOD_DIRECT]
               if cfg.method == "all" else [cfg.method])
    rows, checks, counts = [], [], {}
    for m in methods:
        t0 = time.perf_counter()
        counts[m] = sch.count_bound_states(pot, cfg.domain, method=m, grid=grid)
        ms = (time.perf_counter() - t0) * 1e3
        rows.append([m, str(counts[m]), str(grid.size), _fmt(ms)])
    if cfg.method == "all":
        checks.append({
            "name": "bound-state method agreement",
            "passed": len(set(counts.values())) == 1,
            "value": counts,
        })
    return header, rows, checks


def _run_bargmann(cfg):
    pot = cfg.build_potential()
    t0 = time.perf_counter()
    bound = sch.bargmann_bound(pot)
    ms = (time.perf_counter() - t0) * 1e3
    header = ["bound", "direct_count", "wall_time_ms"]
    checks = []
    count_str = ""
    if cfg.direct_count:
        count = sch.count_bound_states(pot, sch.HALF_LINE, method=sch.METHOD_DIRECT)
        count_str = str(count)
        checks.append({
            "name": "count below weighted-trace bound",
            "passed": count <= bound + 1e-12,
            "value": {"count": count, "bound": bound},
        })
    rows = [[_fmt(bound), count_str, _fmt(ms)]]
    return header, rows, checks


def _run_converge(cfg):
    header = ["level", "grid_nodes", "value_re", "value_im", "oracle_re",
              "oracle_im", "abs_diff", "wall_time_ms"]
    rows, diffs = [], []
    for level in range(cfg.levels):
        t0 = time.perf_counter()
        if cfg.kernel is not None:
            kernel = cfg.build_kernel()
            grid = cfg.kernel_grid(kernel, factor=2 ** level)
            alpha = cfg.alpha[0]
            value = det2_semiseparable(kernel, alpha, grid).value
            oracle = det2_nystrom(kernel, alpha, grid).value
        else:
            pot = cfg.build_potential()
            grid = cfg.potential_quadrature(pot, factor=2 ** level)
            z = cfg.z[0]
            value, oracle = sch.jost_pais_check(pot, z, grid)
        diff = abs(value - oracle)
        diffs.append(diff)
        ms = (time.perf_counter() - t0) * 1e3
        rows.append([str(level), str(grid.size), _fmt(value.real), _fmt(value.imag),
                     _fmt(oracle.real), _fmt(oracle.imag), _fmt(diff), _fmt(ms)])
    floor = 100 * np.finfo(float).eps
    monotone = all(
        diffs[i + 1] <= diffs[i] or diffs[i + 1] <= floor
        for i in range(1, len(diffs) - 1)
    )
    checks = [{
        "name": "oracle gap shrinks monotonically after the first refinement",
        "passed": bool(monotone),
        "value": diffs,
    }]
    return header, rows, checks


def _parallel(workers, arglists, fn):
    if workers <= 1:
        keyed = [fn(*args) for args in arglists]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            keyed = list(pool.map(lambda args: fn(*args), arglists))
    keyed.sort(key=lambda item: item[0])
    return keyed


def run_job(cfg: JobConfig, out_dir: str, workers: int = 1) -> int:
    """Execute a validated job; write CSV and summary JSON; return exit code."""
    checks = []
    try:
        if cfg.command in ("det2", "det1"):
            header, keyed = _run_det(cfg, cfg.command, workers)
            rows = [r for _, r, _ in keyed]
            for _, _, cs in keyed:
                checks.extend(cs)
        elif cfg.command == "jost_pais":
            header, keyed = _run_jost_pais(cfg, workers)
            rows = [r for _, r, _ in keyed]
            for _, _, cs in keyed:
                checks.extend(cs)
        elif cfg.command == "system_det2":
            header, keyed = _run_system_det2(cfg, workers)
            rows = [r for _, r, _ in keyed]
            for _, _, cs in keyed:
                checks.extend(cs)
        elif cfg.command == "bound_states":
            header, rows, checks = _run_bound_states(cfg)
        elif cfg.command == "bargmann":
            header, rows, checks = _run_bargmann(cfg)
        else:
            header, rows, checks = _run_converge(cfg)
    except RouteMismatchError as exc:
        checks = [{"name": "route agreement", "passed": False, "value": str(exc)}]
        header, rows = ["error"], [[str(exc)]]

    all_passed = all(c["passed"] for c in checks)
    summary = {
        "command": cfg.command,
        "rows": len(rows),
        "checks": _jsonable(checks),
        "passed": bool(all_passed),
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{cfg.command}_results.csv")
        with open(csv_path, "w") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(row) + "\n")
        with open(os.path.join(out_dir, f"{cfg.command}_summary.json"), "w") as f:
            json.dump(summary, f, indent=2)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    print(f"{cfg.command}: {len(rows)} rows, "
          f"{sum(c['passed'] for c in checks)}/{len(checks)} checks passed -> {csv_path}")
    return 0 if all_passed else 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="semisep",
        description="Determinants of semi-separable integral operators and "
                    "Schrodinger scattering checks.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON job config")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel workers over the parameter list")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, json.JSONDecodeError) else 4

    raw.setdefault("command", args.command)
    if raw["command"] != args.command:
        print(f"config command {raw['command']!r} does not match CLI "
              f"command {args.command!r}", file=sys.stderr)
        return 2
    try:
        cfg = JobConfig.from_dict(raw)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2

    try:
        return run_job(cfg, args.out, workers=max(1, args.threads))
    except SemisepError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
