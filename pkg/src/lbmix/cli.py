"""Command-line front end: ``lbmix {solve,analyze,classify,verify} --config FILE``.

Config files are JSON::

    {
      "coefficients": ["1", "2"],
      "boundary": {"phi": [{"type": "sine", "terms": [[1, 1.0]]}, null],
                   "psi": [{"type": "polynomial", "order": 4, "amplitude": 1000.0}, null]},
      "grid": {"nx": 21, "ny": 41},
      "tolerances": {"quadrature_tol": 1e-12, "degeneracy_tol": 1e-8, "series_tol": 1e-8},
      "k_cap": 256,
      "seed": 0,
      "suites": ["oracle_n1", "manufactured", "fd", "estimate"]
    }

Missing boundary entries are zero. Every report embeds the resolved config and
the package version. Exit codes: 0 success, 1 a verification suite failed,
2 no classical solution (data not orthogonal to a degenerate mode), 3 config
error, 4 convergence or quadrature failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, builtins, kernels
from .determinants import determinant_scan, estimate_gamma, rational_min_delta2
from .errors import (
    AllZero,
    CapExceeded,
    CoefficientError,
    DegenerateUnsolvable,
    NumericalBreakdown,
    QuadratureError,
)
from .model import BoundaryData, ProblemSpec, Regime, Tolerances, make_coefficients, validate_problem
from .series import evaluate_grid, solve_dirichlet
from .spectral import SpectralBoundary

log = logging.getLogger("lbmix")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_DEGENERATE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3, 4
COMMANDS = ("solve", "analyze", "classify", "verify")
SUITES = ("oracle_n1", "manufactured", "fd", "estimate")
DEFAULTS = {
    "grid": {"nx": 21, "ny": 41},
    "tolerances": {"quadrature_tol": 1e-12, "degeneracy_tol": 1e-8, "series_tol": 1e-8},
    "k_cap": 256,
    "kmax": 100,
    "seed": 0,
}


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- formatting
def fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Regime):
        return obj.value
    return obj


def write_report(path: Path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


# -------------------------------------------------------------------- config
def resolve_config(raw: dict, command: str, kmax=None, seed=None) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = json.loads(json.dumps(raw))  # deep copy
    cfg["command"] = command
    if "coefficients" not in cfg:
        raise ConfigError("config needs 'coefficients'")
    if not isinstance(cfg["coefficients"], list) or not all(isinstance(c, str) for c in cfg["coefficients"]):
        raise ConfigError("coefficients must be a list of strings such as \"2\" or \"3/4\"")
    cfg["grid"] = {**DEFAULTS["grid"], **cfg.get("grid", {})}
    cfg["tolerances"] = {**DEFAULTS["tolerances"], **cfg.get("tolerances", {})}
    for key in ("k_cap", "kmax", "seed"):
        cfg.setdefault(key, DEFAULTS[key])
    if kmax is not None:
        cfg["k_cap"] = cfg["kmax"] = int(kmax)
    if seed is not None:
        cfg["seed"] = int(seed)
    cfg.setdefault("suites", list(SUITES))
    n = len(cfg["coefficients"])
    bnd = cfg.get("boundary", {}) or {}
    cfg["boundary"] = {
        which: (list(bnd.get(which, [])) + [None] * n)[:n] for which in ("phi", "psi")
    }
    g = cfg["grid"]
    if int(g["nx"]) < 2 or int(g["ny"]) < 2:
        raise ConfigError("grid needs nx, ny >= 2")
    if int(cfg["k_cap"]) < 1 or int(cfg["kmax"]) < 1:
        raise ConfigError("k_cap and kmax must be >= 1")
    unknown = set(cfg["suites"]) - set(SUITES)
    if unknown:
        raise ConfigError(f"unknown verification suites {sorted(unknown)}")
    return cfg


def build_problem(cfg: dict):
    """ProblemSpec from a validated config (builtins carry exact coefficients where known)."""
    try:
        coeffs = make_coefficients(cfg["coefficients"])
        funcs = {w: [builtins.build(e) for e in cfg["boundary"][w]] for w in ("phi", "psi")}
        tols = Tolerances(**{k: float(v) for k, v in cfg["tolerances"].items()})
    except (CoefficientError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    spec = ProblemSpec(
        coefficients=coeffs,
        boundary=BoundaryData(phi=tuple(funcs["phi"]), psi=tuple(funcs["psi"])),
        tolerances=tols,
        k_cap=int(cfg["k_cap"]),
    )
    problems = validate_problem(spec)
    if problems:
        raise ConfigError("; ".join(problems))
    return spec


# ------------------------------------------------------------------ commands
def _estimate_dict(est):
    return {
        "M_fit": est.M_fit,
        "gamma_fit": est.gamma_fit,
        "k_scanned": est.k_scanned,
        "violations": est.violations,
        "zero_ks": list(est.zero_ks),
    }


def _regime_dict(coeffs):
    out = {"regime": coeffs.regime.value, "coefficients": coeffs.render()}
    if coeffs.exact is not None:
        ra = rational_min_delta2(coeffs)
        out.update(
            lcm_M=ra.lcm_M,
            period=ra.period,
            min_abs_delta2=ra.min_abs_delta2,
            zero_residues=list(ra.zero_residues),
            min_nonzero_abs_delta2=ra.min_nonzero_abs_delta2,
        )
    return out


def cmd_solve(cfg, out: Path) -> dict:
    spec = build_problem(cfg)
    coeffs = spec.coefficients
    sol = solve_dirichlet(spec)
    xs = np.linspace(0.0, 1.0, int(cfg["grid"]["nx"]))
    ys = np.linspace(-1.0, 1.0, int(cfg["grid"]["ny"]))
    field = evaluate_grid(sol, coeffs, xs, ys)
    lines = ["x,y,u"]
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            lines.append(f"{fmt(x)},{fmt(y)},{fmt(field.values[j, i])}")
    (out / "field.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {
        "K": sol.K,
        "tail_bound": sol.tail_bound,
        "modes_solved": len(sol.modes),
        "max_abs_u": float(np.max(np.abs(field.values))),
        "degenerate_modes": [
            {"k": r.k, "data_orthogonal": r.data_orthogonal, "homogeneous_dim": r.homogeneous_dim}
            for r in sol.degenerate_modes
        ],
        "unique": not sol.degenerate_modes,
        "small_denominator_ks": sol.small_denominator_ks,
        "estimate": _estimate_dict(sol.estimate),
        "regime": _regime_dict(coeffs),
    }


def cmd_analyze(cfg, out: Path) -> dict:
    coeffs = _coefficients(cfg)
    K = int(cfg["kmax"])
    rows = determinant_scan(coeffs, K, float(cfg["tolerances"]["degeneracy_tol"]))
    lines = ["k,log_delta1,delta_ratio,delta2_closed,degenerate"]
    for r in rows:
        lines.append(
            f"{r.k},{fmt(r.log_delta1)},{fmt(r.delta_ratio)},{fmt(r.delta2_closed)},{fmt(r.degenerate)}"
        )
    (out / "determinants.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    try:
        est = _estimate_dict(estimate_gamma(coeffs, max(100, K)))
    except AllZero:
        est = None
    return {
        "regime": _regime_dict(coeffs),
        "estimate": est,
        "degenerate_ks": [r.k for r in rows if r.degenerate],
    }


def cmd_classify(cfg, out: Path) -> dict:
    return {"regime": _regime_dict(_coefficients(cfg))}


def _coefficients(cfg):
    try:
        return make_coefficients(cfg["coefficients"])
    except (CoefficientError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_verify(cfg, out: Path) -> dict:
    from . import verify

    coeffs = _coefficients(cfg)
    seed = int(cfg["seed"])
    n = coeffs.n
    results = {}
    for name in cfg["suites"]:
        if name == "oracle_n1":
            if n != 1:
                results[name] = {"skipped": "needs n = 1"}
                continue
            dev = verify.oracle_compare_n1(coeffs, range(1, 51), 10, seed)
            results[name] = {"max_relative_deviation": dev, "passed": dev <= 1e-8}
        elif name == "manufactured":
            worst = 0.0
            bad = _degenerate_upto(coeffs, 20)
            for k in (k for k in (1, 5, 20) if k not in bad):
                mc = verify.manufactured_case(k, coeffs, seed)
                sol = solve_dirichlet(mc.problem(), spectrum=mc.spectrum(mc.problem().k_cap))
                m = sol.mode(k)
                ref = mc.exact_mode.vector
                if m is None:
                    worst = math.inf
                    continue
                worst = max(worst, float(np.max(np.abs(m.vector - ref)) / max(1e-300, np.max(np.abs(ref)))))
            results[name] = {"max_relative_error": worst, "passed": worst <= 1e-8}
        elif name == "fd":
            bad = _degenerate_upto(coeffs, 8)
            k = next(k for k in range(2, 9) if k not in bad)
            mc = verify.manufactured_case(k, coeffs, seed)
            sol = solve_dirichlet(mc.problem(), spectrum=mc.spectrum(mc.problem().k_cap))
            rep = verify.fd_residual(sol, coeffs, 1.0 / 32)
            results[name] = {
                "h": rep.h,
                "residual_elliptic": rep.interior_max_residual_elliptic,
                "residual_hyperbolic": rep.interior_max_residual_hyperbolic,
                "order_elliptic": rep.order_elliptic,
                "order_hyperbolic": rep.order_hyperbolic,
                # a hyperbolic residual at roundoff level has no meaningful order
                "passed": abs(rep.order_elliptic - 2.0) <= 0.3
                and (abs(rep.order_hyperbolic - 2.0) <= 0.3
                     or rep.interior_max_residual_hyperbolic <= 1e-6 * rep.interior_max_residual_elliptic),
            }
        elif name == "estimate":
            K = 200
            ks = np.arange(1, K + 1, dtype=float)
            mags = np.where(ks % 2 == 1, ks ** -4.0, 0.0)  # synthetic smooth spectrum
            spec_b = SpectralBoundary(np.tile(mags, (n, 1)), np.tile(mags, (n, 1)))
            half = verify.theorem2_check(coeffs, spec_b, range(1, K // 2 + 1))
            full = verify.theorem2_check(coeffs, spec_b, range(1, K + 1))
            change = abs(full.M - half.M) / half.M if half.M > 0 else 0.0
            results[name] = {
                "M_half": half.M,
                "M_full": full.M,
                "witness": list(full.witness) if full.witness else None,
                "relative_change": change,
                "passed": math.isfinite(full.M) and change < 0.1,
            }
    return {"suites": results, "passed": all(r.get("passed", True) for r in results.values())}


def _degenerate_upto(coeffs, K):
    from .determinants import find_degenerate_modes

    return {r.k for r in find_degenerate_modes(coeffs, K)}


HANDLERS = {"solve": cmd_solve, "analyze": cmd_analyze, "classify": cmd_classify, "verify": cmd_verify}


# ---------------------------------------------------------------------- main
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lbmix", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--kmax", type=int, default=None, help="mode cap for solve, scan length for analyze")
    p.add_argument("--seed", type=int, default=None, help="seed for verification draws")
    p.add_argument("--quiet", action="store_true", help="no summary on stdout")
    p.add_argument("--version", action="version", version=f"lbmix {__version__}")
    return p


def run(command: str, raw_config: dict, out: Path, kmax=None, seed=None) -> tuple[int, dict]:
    """Run one command; returns (exit code, report dict). Writes report.json into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    report = {"version": __version__, "backend": kernels.BACKEND, "command": command}
    try:
        cfg = resolve_config(raw_config, command, kmax, seed)
        report["config"] = cfg
        report["result"] = HANDLERS[command](cfg, out)
        code = EXIT_OK
        if command == "verify" and not report["result"]["passed"]:
            code = EXIT_CHECK_FAILED
    except ConfigError as exc:
        report["error"] = {"kind": "config", "message": str(exc)}
        code = EXIT_CONFIG
    except DegenerateUnsolvable as exc:
        report["error"] = {"kind": "degenerate", "message": str(exc), "ks": list(exc.ks)}
        code = EXIT_DEGENERATE
    except (QuadratureError, CapExceeded, NumericalBreakdown, AllZero) as exc:
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        code = EXIT_CONVERGENCE
    report["exit_code"] = code
    write_report(out / "report.json", report)
    return code, report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, report = run(args.command, raw, Path(args.out), args.kmax, args.seed)
    if "error" in report:
        print(f"{report['error']['kind']}: {report['error']['message']}", file=sys.stderr)
    elif not args.quiet:
        print(json.dumps(_jsonable(report["result"]), sort_keys=True))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
