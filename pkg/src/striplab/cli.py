"""Config-driven command line front end.

Four commands, each reading one JSON config file (schema below) and writing
artifacts into an output directory:

    striplab solve   --config c.json --out dir    perturbed spectrum
    striplab limits  --config c.json --out dir    homogenized limit spectrum
    striplab bracket --config c.json --out dir    nested-pattern bracket check
    striplab sweep   --config c.json --out dir    regime sweep + rate fits

Exit codes: 0 success, 2 invalid config, 3 solver failure, 4 assertion
failure (bracket or exact-side inequality violated beyond budget).

Every run writes `resolved_config.json` (defaults expanded) next to its
outputs; timestamps are confined to `metadata.json` so all other artifacts
are byte-identical across reruns with equal config, seed, and threads.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fem
from .eigen import smallest_eigenpairs
from .errors import ConfigError, EigensolverError, StripLabError
from .experiments import (DiscretizationPolicy, SweepConfig, fit_rate,
                          report_to_dict, run_sweep, verify_bracketing,
                          write_report_csv, write_report_json)
from .geometry import (Constant, CylinderGeometry, Modulated, Oscillatory,
                       RandomBounded, WidthLaw, build_pattern, classify_regime,
                       cross_section_from_config, profile_from_config)
from .limits import LimitSpectrumRequest, closed_form_limit_spectrum, fem_limit_spectrum
from .mesh import Grading, build_extruded_mesh
from .modes import merge_mode_spectra
from .rng import derive_seed
from .svgplot import plot_report

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ASSERTION = 4


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def _require_keys(d: dict, allowed: set, required: set, path: str):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}", path)


def _positive(value, path):
    if not isinstance(value, (int, float)) or value <= 0:
        raise ConfigError(f"expected a positive number, got {value!r}", path)
    return float(value)


DEFAULTS = {
    "solve": {
        "k": 5, "tol": 1e-9, "base_h": 0.05, "coarse_h": 0.07,
        "grading": {"levels": 4, "ratio": 0.5},
        "h_cross": 0.3, "layers_per_half_period": 4,
        "floor_coef": 0.004, "floor_pow": 0.0,
    },
    "output": {"formats": ["csv", "json", "svg"]},
}


def load_config(path, seed_override=None) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")

    _require_keys(cfg, {"schema_version", "geometry", "pattern", "regime", "solve",
                        "sweep", "limits", "output", "seed"},
                  {"schema_version", "geometry"}, "config")
    if cfg["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}", "schema_version")

    geo = cfg["geometry"]
    _require_keys(geo, {"cross_section", "height"}, {"cross_section", "height"}, "geometry")
    cs = geo["cross_section"]
    if not isinstance(cs, dict) or cs.get("kind") not in ("disk", "polygon"):
        raise ConfigError("cross_section.kind must be 'disk' or 'polygon'",
                          "geometry.cross_section")
    if cs["kind"] == "disk":
        _require_keys(cs, {"kind", "radius"}, {"kind", "radius"}, "geometry.cross_section")
        _positive(cs["radius"], "geometry.cross_section.radius")
    else:
        _require_keys(cs, {"kind", "vertices"}, {"kind", "vertices"}, "geometry.cross_section")
    _positive(geo["height"], "geometry.height")

    solve = dict(DEFAULTS["solve"])
    solve_grading = dict(DEFAULTS["solve"]["grading"])
    user_solve = cfg.get("solve", {})
    _require_keys(user_solve, set(DEFAULTS["solve"]), set(), "solve")
    if "grading" in user_solve:
        _require_keys(user_solve["grading"], {"levels", "ratio"}, set(), "solve.grading")
        solve_grading.update(user_solve["grading"])
    solve.update({k: v for k, v in user_solve.items() if k != "grading"})
    solve["grading"] = solve_grading
    if not isinstance(solve["k"], int) or solve["k"] < 1:
        raise ConfigError("k must be a positive integer", "solve.k")
    cfg["solve"] = solve

    if "pattern" in cfg:
        pat = cfg["pattern"]
        _require_keys(pat, {"N", "profiles"}, {"N", "profiles"}, "pattern")
        if not isinstance(pat["N"], int) or pat["N"] < 1:
            raise ConfigError("N must be a positive integer", "pattern.N")
        prof = pat["profiles"]
        fam = prof.get("family")
        if fam == "constant":
            _require_keys(prof, {"family", "value"}, {"family", "value"}, "pattern.profiles")
            v = _positive(prof["value"], "pattern.profiles.value")
            if v >= math.pi / 2:
                raise ConfigError(
                    f"width {v} violates the constraint 0 < width < pi/2",
                    "pattern.profiles.value")
        elif fam == "random":
            _require_keys(prof, {"family", "lower", "upper", "seed", "samples"},
                          {"family", "lower", "upper"}, "pattern.profiles")
            lo = _positive(prof["lower"], "pattern.profiles.lower")
            hi = _positive(prof["upper"], "pattern.profiles.upper")
            if not (lo <= hi < math.pi / 2):
                raise ConfigError(
                    f"bounds [{lo}, {hi}] violate the constraint 0 < width < pi/2",
                    "pattern.profiles")
        elif fam == "explicit":
            _require_keys(prof, {"family", "lower_profiles", "upper_profiles"},
                          {"family", "lower_profiles", "upper_profiles"}, "pattern.profiles")
        else:
            raise ConfigError("profiles.family must be one of constant/random/explicit",
                              "pattern.profiles.family")

    if "regime" in cfg:
        reg = cfg["regime"]
        _require_keys(reg, {"width_law", "inner_law", "robin_hint", "family"},
                      {"width_law"}, "regime")
        if reg.get("family", "constant") not in ("constant", "sandwich", "sub"):
            raise ConfigError("family must be constant/sandwich/sub", "regime.family")

    if "sweep" in cfg:
        sw = cfg["sweep"]
        _require_keys(sw, {"N_list", "fit_predictor", "fit_min_points"},
                      {"N_list"}, "sweep")
        if (not isinstance(sw["N_list"], list) or not sw["N_list"]
                or any(not isinstance(n, int) or n < 1 for n in sw["N_list"])):
            raise ConfigError("N_list must be a nonempty list of positive integers",
                              "sweep.N_list")
        if "fit_predictor" in sw and len(sw["N_list"]) < 3:
            raise ConfigError("rate fits need at least 3 sweep points "
                              "(4 for the two-parameter predictor)", "sweep.N_list")

    if "limits" in cfg:
        lim = cfg["limits"]
        _require_keys(lim, {"condition", "method", "k", "fem_h"}, {"condition"}, "limits")
        cond = lim["condition"]
        ok = cond in ("dirichlet", "neumann") or (
            isinstance(cond, dict) and set(cond) == {"robin"} and cond["robin"] >= 0)
        if not ok:
            raise ConfigError("condition must be 'dirichlet', 'neumann', or {'robin': A>=0}",
                              "limits.condition")

    out = dict(DEFAULTS["output"])
    _require_keys(cfg.get("output", {}), {"formats"}, set(), "output")
    out.update(cfg.get("output", {}))
    bad = set(out["formats"]) - {"csv", "json", "svg"}
    if bad:
        raise ConfigError(f"unknown formats {sorted(bad)}", "output.formats")
    cfg["output"] = out

    if seed_override is not None:
        cfg["seed"] = int(seed_override)
    cfg.setdefault("seed", 0)
    return cfg


def _geometry(cfg) -> CylinderGeometry:
    geo = cfg["geometry"]
    return CylinderGeometry(cross_section_from_config(geo["cross_section"]),
                            float(geo["height"]))


def _policy(cfg) -> DiscretizationPolicy:
    s = cfg["solve"]
    return DiscretizationPolicy(
        base_h=float(s["base_h"]), coarse_h=float(s["coarse_h"]),
        grading=Grading(int(s["grading"]["levels"]), float(s["grading"]["ratio"])),
        floor_coef=float(s["floor_coef"]), floor_pow=float(s["floor_pow"]),
        h_cross=float(s["h_cross"]),
        layers_per_half_period=int(s["layers_per_half_period"]),
        tol=float(s["tol"]),
    )


def _pattern(cfg):
    if "pattern" not in cfg:
        raise ConfigError("this command needs a pattern block", "pattern")
    geometry = _geometry(cfg)
    pat = cfg["pattern"]
    N = int(pat["N"])
    prof = pat["profiles"]
    fam = prof["family"]
    if fam == "constant":
        lower = [Constant(float(prof["value"]))] * N
        upper = list(lower)
    elif fam == "random":
        seed = int(prof.get("seed", cfg["seed"]))
        samples = int(prof.get("samples", 256))
        lower = [RandomBounded(float(prof["lower"]), float(prof["upper"]),
                               derive_seed(seed, N, j, 0), samples) for j in range(N)]
        upper = [RandomBounded(float(prof["lower"]), float(prof["upper"]),
                               derive_seed(seed, N, j, 1), samples) for j in range(N)]
    else:
        lower = [profile_from_config(p) for p in prof["lower_profiles"]]
        upper = [profile_from_config(p) for p in prof["upper_profiles"]]
    return build_pattern(geometry, N, lower, upper)


def _write_resolved(cfg, out_dir):
    with open(out_dir / "resolved_config.json", "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_metadata(out_dir, command):
    meta = {
        "command": command,
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out_dir / "metadata.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def _dump_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(cfg, out_dir, threads):
    pattern = _pattern(cfg)
    policy = _policy(cfg)
    k = int(cfg["solve"]["k"])
    tol = float(cfg["solve"]["tol"])

    if pattern.is_s_independent() and cfg["geometry"]["cross_section"]["kind"] == "disk":
        min_width = min(
            pattern.eps * (pattern.lower_profiles[j].value + pattern.upper_profiles[j].value)
            for j in range(pattern.count))
        h = min(policy.base_h, 0.5 * min_width)

        def solve_mode(n):
            from .mesh import build_meridian_mesh
            mesh = build_meridian_mesh(pattern, n, h, policy.grading, policy.coarse_h)
            pair = fem.assemble(mesh)
            return smallest_eigenpairs(pair, min(k, pair.n_free), tol=tol)

        merged = merge_mode_spectra(solve_mode, k)
        eigenvalues = merged.eigenvalues
        labels = merged.mode_labels
        converged = merged.converged
        stats = {"path": "meridian", "n_max": merged.n_max}
    else:
        mesh = build_extruded_mesh(pattern, policy.h_cross, policy.layers_per_half_period)
        pair = fem.assemble(mesh)
        spec = smallest_eigenpairs(pair, min(k, pair.n_free), tol=tol)
        eigenvalues = spec.eigenvalues
        labels = [-1] * len(eigenvalues)
        converged = spec.converged
        stats = {"path": "extruded", "n_nodes": mesh.n_nodes,
                 "n_free": pair.n_free, **{k2: v for k2, v in spec.solver_stats.items()
                                           if k2 in ("iterations", "restarts", "certified")}}

    result = {
        "eigenvalues": [float(v) for v in eigenvalues],
        "mode_labels": [int(x) for x in labels],
        "converged": bool(converged),
        "stats": stats,
    }
    if "json" in cfg["output"]["formats"]:
        _dump_json(result, out_dir / "spectrum.json")
    if "csv" in cfg["output"]["formats"]:
        with open(out_dir / "spectrum.csv", "w") as f:
            f.write("rank,lambda,mode\n")
            for i, v in enumerate(result["eigenvalues"]):
                f.write(f"{i+1},{v!r},{result['mode_labels'][i]}\n")
    return EXIT_OK if converged else EXIT_SOLVER


def cmd_limits(cfg, out_dir, threads):
    if "limits" not in cfg:
        raise ConfigError("this command needs a limits block", "limits")
    lim = cfg["limits"]
    cond = lim["condition"]
    if cond == "dirichlet":
        A = None
    elif cond == "neumann":
        A = 0.0
    else:
        A = float(cond["robin"])
    k = int(lim.get("k", cfg["solve"]["k"]))
    method = lim.get("method", "closed_form")
    req = LimitSpectrumRequest(_geometry(cfg), k=k, robin_coefficient=A,
                               method=method, fem_size=float(lim.get("fem_h", 0.05)))
    spec = closed_form_limit_spectrum(req) if method == "closed_form" else fem_limit_spectrum(req)
    rows = []
    for i, lam in enumerate(spec.eigenvalues):
        n, m, l = spec.labels[i]
        rows.append({"rank": i + 1, "lambda": float(lam), "n": int(n), "m": int(m),
                     "l": int(l), "multiplicity": int(spec.multiplicities[i]),
                     "method": spec.method})
    if "json" in cfg["output"]["formats"]:
        _dump_json({"limit_spectrum": rows}, out_dir / "limits.json")
    if "csv" in cfg["output"]["formats"]:
        with open(out_dir / "limits.csv", "w") as f:
            f.write("rank,lambda,n,m,l,multiplicity,method\n")
            for r in rows:
                f.write(f"{r['rank']},{r['lambda']!r},{r['n']},{r['m']},{r['l']},"
                        f"{r['multiplicity']},{r['method']}\n")
    return EXIT_OK


def cmd_bracket(cfg, out_dir, threads):
    pattern = _pattern(cfg)
    verdict = verify_bracketing(pattern, int(cfg["solve"]["k"]), _policy(cfg))
    payload = {
        "degenerate": verdict.degenerate,
        "bracket_ok": verdict.bracket_ok,
        "extreme_ok": verdict.extreme_ok,
        "converged": verdict.converged,
        "inner": verdict.inner_eigenvalues,
        "pattern": verdict.pattern_eigenvalues,
        "outer": verdict.outer_eigenvalues,
        "neumann": verdict.neumann_eigenvalues,
        "dirichlet": verdict.dirichlet_eigenvalues,
        "slack": verdict.slack,
    }
    if "json" in cfg["output"]["formats"]:
        _dump_json(payload, out_dir / "bracket.json")
    if "csv" in cfg["output"]["formats"]:
        with open(out_dir / "bracket.csv", "w") as f:
            f.write("rank,inner,pattern,outer,neumann,dirichlet\n")
            for i in range(len(verdict.pattern_eigenvalues)):
                f.write(f"{i+1},{verdict.inner_eigenvalues[i]!r},"
                        f"{verdict.pattern_eigenvalues[i]!r},"
                        f"{verdict.outer_eigenvalues[i]!r},"
                        f"{verdict.neumann_eigenvalues[i]!r},"
                        f"{verdict.dirichlet_eigenvalues[i]!r}\n")
    if not verdict.converged:
        return EXIT_SOLVER
    return EXIT_OK if verdict.passed() else EXIT_ASSERTION


def cmd_sweep(cfg, out_dir, threads):
    if "regime" not in cfg or "sweep" not in cfg:
        raise ConfigError("this command needs regime and sweep blocks", "regime")
    reg = cfg["regime"]
    width_law = WidthLaw.from_config(reg["width_law"])
    inner_law = WidthLaw.from_config(reg["inner_law"]) if reg.get("inner_law") else None
    regime = classify_regime(width_law, inner_law, reg.get("robin_hint"))
    config = SweepConfig(
        regime=regime,
        geometry=_geometry(cfg),
        family=reg.get("family", "constant"),
        N_list=tuple(cfg["sweep"]["N_list"]),
        k=int(cfg["solve"]["k"]),
        policy=_policy(cfg),
        seed=int(cfg["seed"]),
        threads=threads,
    )
    report = run_sweep(config)
    fits = {}
    predictor = cfg["sweep"].get("fit_predictor")
    if predictor:
        try:
            for kk in range(1, report.k + 1):
                fit = fit_rate(report, kk, predictor)
                fits[str(kk)] = {
                    "coefficients": fit.coefficients,
                    "half_widths": fit.half_widths,
                    "residual_norm": fit.residual_norm,
                    "loglog_slope": fit.loglog_slope,
                    "points": fit.points,
                }
        except StripLabError as exc:
            fits["error"] = str(exc)
    if "json" in cfg["output"]["formats"]:
        write_report_json(report, out_dir / "report.json")
        if fits:
            _dump_json({"predictor": predictor, "fits": fits}, out_dir / "fits.json")
    if "csv" in cfg["output"]["formats"]:
        write_report_csv(report, out_dir / "report.csv")
    if "svg" in cfg["output"]["formats"]:
        plot_report(report, out_dir)
    if not report.all_converged:
        return EXIT_SOLVER
    return EXIT_OK if report.sign_verdict else EXIT_ASSERTION


COMMANDS = {
    "solve": cmd_solve,
    "limits": cmd_limits,
    "bracket": cmd_bracket,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="striplab",
        description="Laplace eigenvalues on cylinders with striped lateral boundaries",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, seed_override=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        _write_resolved(cfg, out_dir)
        code = COMMANDS[args.command](cfg, out_dir, max(1, args.threads))
        _write_metadata(out_dir, args.command)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EigensolverError, StripLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
