"""Command-line entry point: ``mtensor {solve,lstsq,verify,bench,deblur}``.

Every command parses and validates all of its inputs before computing
anything or touching the output directory.

Exit codes: 0 success; 1 input error or failed verification; for
``solve`` also 2 when the spectral-radius precheck fails and 3 when
``max_iter`` is reached without meeting the tolerance.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import bench as bench_mod
from . import io
from .core import Tensor3, TensorError, Transform, _hat, frobenius_norm, inverse, m_chain
from .deblur import (
    BlurModel,
    MODES,
    build_blur_pair,
    clamp,
    image_to_tensor,
    psnr,
    reconstruct,
    relative_error,
    synthesize_observation,
    tensor_to_image,
    tune_regularization,
)
from .fixtures import (
    EXAMPLE_INV_A_HAT,
    EXAMPLE_INV_B_HAT,
    EXAMPLE_INV_BP_HAT,
    EXAMPLE_INV_PA_HAT,
    EXAMPLE_RADII,
    example_system,
)
from .lstsq import RegularizationParams, min_norm_lstsq, tikhonov_solve
from .solver import (
    PRESETS,
    STOP_RULES,
    SolverConfig,
    aor_tspi_solve,
    preset_parameters,
    ptspi_solve,
    two_step_solve,
)
from .splitting import SplittingClass, convergence_radius, jacobi_splitting

EXIT_OK, EXIT_INPUT, EXIT_PRECHECK, EXIT_MAX_ITER = 0, 1, 2, 3

RADIUS_TOL = 5e-4
INVERSE_TOL = 1e-12
METHODS = ("tspi", "aor", "ptspi")


class InputError(Exception):
    """Invalid command input; the message names the offending field."""


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with other input errors; 2 means a failed precheck
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def data_path(*parts):
    """Path of a bundled data file."""
    return str(resources.files("mtensor").joinpath("data", *parts))


FIXTURE_FILES = {"a": "A.mt3d", "b": "B.mt3d", "c": "C.mt3d", "m": "M.mmat", "p1": "P.mt3d", "p2": "P.mt3d"}


# --------------------------------------------------------------------------
# manifest helpers


def _load_json(path, name="--config"):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{name}: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}: invalid JSON in {path}: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{name}: expected a JSON object")
    return doc


def _load(reader, path, name):
    if path is None:
        raise InputError(f"{name}: missing required path")
    try:
        return reader(path)
    except (io.FormatError, TensorError) as exc:
        raise InputError(f"{name}: {exc}") from None


def _operand_paths(args, keys):
    paths = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None and getattr(args, "fixture", None):
            value = data_path("sample", FIXTURE_FILES[key])
        paths[key] = value
    return paths


def _load_operands(args, keys):
    paths = _operand_paths(args, keys)
    out = {}
    for key in keys:
        reader = io.read_transform if key == "m" else io.read_tensor
        out[key] = _load(reader, paths[key], f"--{key}")
    return out


def _number(cfg, key, default, positive=False, integer=False):
    value = cfg.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"config.{key}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise InputError(f"config.{key}: expected an integer, got {value!r}")
    if positive and not value > 0:
        raise InputError(f"config.{key}: must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _check_keys(cfg, allowed):
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise InputError(f"config.{unknown[0]}: unknown field")


def _prepare_out(path):
    if path is None:
        raise InputError("--out: missing output directory")
    if os.path.exists(path) and not os.path.isdir(path):
        raise InputError(f"--out: {path} exists and is not a directory")
    return path


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _finite(x):
    return x if math.isfinite(x) else str(x)


# --------------------------------------------------------------------------
# solve


SOLVE_KEYS = ("alpha", "beta", "omega1", "omega2", "kappa1", "kappa2", "tol", "max_iter",
              "stop_rule", "precheck", "method", "preset", "check_every")


@dataclass
class SolvePlan:
    method: str
    cfg: SolverConfig
    params: dict = field(default_factory=dict)


def parse_solve_config(cfg):
    _check_keys(cfg, SOLVE_KEYS)
    method = cfg.get("method", "tspi")
    if method not in METHODS:
        raise InputError(f"config.method: expected one of {METHODS}, got {method!r}")
    stop_rule = cfg.get("stop_rule", "relative_residual")
    if stop_rule not in STOP_RULES:
        raise InputError(f"config.stop_rule: expected one of {STOP_RULES}, got {stop_rule!r}")
    precheck = cfg.get("precheck", False)
    if not isinstance(precheck, bool):
        raise InputError("config.precheck: expected true or false")
    alpha = _number(cfg, "alpha", 1.0, positive=True)
    beta = _number(cfg, "beta", 1.0, positive=True)
    params = {
        "omega1": _number(cfg, "omega1", 1.0),
        "omega2": _number(cfg, "omega2", 1.0),
        "kappa1": _number(cfg, "kappa1", 0.0),
        "kappa2": _number(cfg, "kappa2", 0.0),
    }
    for key in ("omega1", "omega2"):
        if not 0 < params[key] <= 2:
            raise InputError(f"config.{key}: must lie in (0, 2], got {params[key]}")
    for key in ("kappa1", "kappa2"):
        if params[key] < 0:
            raise InputError(f"config.{key}: must be nonnegative, got {params[key]}")
    preset = cfg.get("preset")
    if preset is not None:
        if method != "aor":
            raise InputError("config.preset: presets require method \"aor\"")
        if str(preset).lower() not in PRESETS:
            raise InputError(f"config.preset: unknown preset {preset!r}")
        resolved = preset_parameters(preset, alpha, beta, params["omega1"], params["omega2"])
        alpha, beta = resolved.pop("alpha"), resolved.pop("beta")
        params = resolved
        params["preset"] = str(preset).lower()
    tol = _number(cfg, "tol", 1e-10, positive=True)
    max_iter = _number(cfg, "max_iter", 10000, positive=True, integer=True)
    check_every = _number(cfg, "check_every", 1, positive=True, integer=True)
    solver_cfg = SolverConfig(alpha=alpha, beta=beta, tol=tol, max_iter=max_iter,
                              stop_rule=stop_rule, precheck=precheck, check_every=check_every)
    return SolvePlan(method, solver_cfg, params)


def _check_solve_shapes(ops):
    A, B, C, T = ops["a"], ops["b"], ops["c"], ops["m"]
    if A.m != A.n:
        raise InputError(f"--a: slices must be square, got {A.shape}")
    if B.m != B.n:
        raise InputError(f"--b: slices must be square, got {B.shape}")
    if C.shape != (A.m, B.m, A.p):
        raise InputError(f"--c: expected shape {(A.m, B.m, A.p)}, got {C.shape}")
    if not (A.p == B.p == T.p):
        raise InputError(f"--m: transform order {T.p} does not match tube length {A.p}")
    for key, ref in (("p1", A.m), ("p2", B.m)):
        if key in ops and ops[key].shape != (ref, ref, A.p):
            raise InputError(f"--{key}: expected shape {(ref, ref, A.p)}, got {ops[key].shape}")


def cmd_solve(args):
    plan = parse_solve_config(_load_json(args.config))
    keys = ["a", "b", "c", "m"] + (["p1", "p2"] if plan.method == "ptspi" else [])
    ops = _load_operands(args, keys)
    _check_solve_shapes(ops)
    out = _prepare_out(args.out)

    A, B, C, T = ops["a"], ops["b"], ops["c"], ops["m"]
    try:
        if plan.method == "ptspi":
            rep = ptspi_solve(A, B, C, ops["p1"], ops["p2"], T, cfg=plan.cfg)
        elif plan.method == "tspi":
            s1, s2 = jacobi_splitting(A, T), jacobi_splitting(B, T)
            rep = two_step_solve(A, B, C, s1, s2, T, plan.cfg)
        else:
            p = plan.params
            rep = aor_tspi_solve(A, B, C, T, plan.cfg, omega1=p["omega1"], omega2=p["omega2"],
                                 kappa1=p["kappa1"], kappa2=p["kappa2"])
    except TensorError as exc:
        raise InputError(f"operands: {exc}") from None

    os.makedirs(out, exist_ok=True)
    io.write_tensor(os.path.join(out, "X.mt3d"), rep.X)
    params = {"alpha": plan.cfg.alpha, "beta": plan.cfg.beta, "tol": plan.cfg.tol,
              "max_iter": plan.cfg.max_iter, "stop_rule": plan.cfg.stop_rule,
              "precheck": plan.cfg.precheck}
    if plan.method == "aor":
        params.update(plan.params)
    report = {
        "method": plan.method,
        "params": params,
        "iterations": rep.iterations,
        "residuals": rep.residual_history,
        "final_residual": _finite(rep.residual),
        "converged": rep.converged,
        "stop_reason": rep.stop_reason,
        "radii": list(rep.radii) if rep.radii else None,
    }
    _write_json(os.path.join(out, "report.json"), report)
    if args.json:
        print(json.dumps({k: v for k, v in report.items() if k != "residuals"}, sort_keys=True))
    else:
        print(f"{plan.method}: {rep.stop_reason} after {rep.iterations} iterations, "
              f"residual {rep.residual:.3e}")
    if rep.converged:
        return EXIT_OK
    return EXIT_PRECHECK if rep.stop_reason == "precheck_failed" else EXIT_MAX_ITER


# --------------------------------------------------------------------------
# lstsq


def cmd_lstsq(args):
    cfg = _load_json(args.config)
    _check_keys(cfg, ("lambda", "mu"))
    reg = None
    if cfg:
        if set(cfg) != {"lambda", "mu"}:
            raise InputError("config: give both lambda and mu, or neither")
        reg = RegularizationParams(_number(cfg, "lambda", 0, positive=True), _number(cfg, "mu", 0, positive=True))
    ops = _load_operands(args, ["a", "b", "c", "m"])
    A, B, C, T = ops["a"], ops["b"], ops["c"], ops["m"]
    if A.m != C.m or B.n != C.n or not (A.p == B.p == C.p == T.p):
        raise InputError(f"operands: incompatible shapes A{A.shape} B{B.shape} C{C.shape}, p(M)={T.p}")
    out = _prepare_out(args.out)
    X = min_norm_lstsq(A, B, C, T) if reg is None else tikhonov_solve(A, B, C, reg, T)
    r = frobenius_norm(C - m_chain(T, A, X, B))
    os.makedirs(out, exist_ok=True)
    io.write_tensor(os.path.join(out, "X.mt3d"), X)
    report = {"method": "min_norm" if reg is None else "tikhonov",
              "params": {} if reg is None else {"lambda": reg.lam, "mu": reg.mu},
              "residual": r}
    _write_json(os.path.join(out, "report.json"), report)
    print(json.dumps(report, sort_keys=True) if args.json else f"{report['method']}: residual {r:.3e}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def _hat_close(X, expected, T):
    ref = np.array([[[float(v) for v in row] for row in S] for S in expected])
    return float(np.max(np.abs(_hat(X, T) - ref)))


def verification_checks(perturb=0.0):
    """Recompute the bundled example's radii, inverses and splitting classes.

    ``perturb`` is added to every entry of ``A`` before anything is computed.
    Returns a list of ``{name, value, expected, tol, passed}`` dicts.
    """
    ex = example_system()
    T, A, B, P = ex.T, ex.A, ex.B, ex.P
    if perturb:
        A = Tensor3(A.data + perturb)
    splits = {
        "F1G1": jacobi_splitting(A, T),
        "Fp1Gp1": jacobi_splitting(m_chain(T, P, A), T),
        "F2G2": jacobi_splitting(B, T),
        "Fp2Gp2": jacobi_splitting(m_chain(T, B, P), T),
    }
    checks = []
    for key, split in splits.items():
        rho = convergence_radius(split, T)
        expected = EXAMPLE_RADII[key]
        checks.append({"name": f"radius {key}", "value": rho, "expected": expected,
                       "tol": RADIUS_TOL, "passed": abs(rho - expected) <= RADIUS_TOL})
    inverses = {
        "inverse A": (A, EXAMPLE_INV_A_HAT),
        "inverse B": (B, EXAMPLE_INV_B_HAT),
        "inverse PA": (m_chain(T, P, A), EXAMPLE_INV_PA_HAT),
        "inverse BP": (m_chain(T, B, P), EXAMPLE_INV_BP_HAT),
    }
    for name, (X, expected) in inverses.items():
        err = _hat_close(inverse(X, T), expected, T)
        checks.append({"name": name, "value": err, "expected": 0.0, "tol": INVERSE_TOL,
                       "passed": err <= INVERSE_TOL})
    for key, split in splits.items():
        kind = split.kind
        checks.append({"name": f"weak regular {key}", "value": _flag_names(kind), "expected": "weak_regular",
                       "tol": None, "passed": SplittingClass.WEAK_REGULAR in kind})
    return checks


def _flag_names(kind):
    names = [f.name.lower() for f in SplittingClass if f.value and f in kind]
    return "+".join(reversed(names)) or "unclassified"


def cmd_verify(args):
    checks = verification_checks(args.perturb)
    ok = all(c["passed"] for c in checks)
    if args.json:
        print(json.dumps({"passed": ok, "checks": checks}, sort_keys=True))
    else:
        width = max(len(c["name"]) for c in checks)
        for c in checks:
            value = c["value"] if isinstance(c["value"], str) else f"{c['value']:.6g}"
            expected = c["expected"] if isinstance(c["expected"], str) else f"{c['expected']:.6g}"
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status}  {c['name']:<{width}}  got {value}  expected {expected}")
        print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_INPUT


# --------------------------------------------------------------------------
# bench


def cmd_bench(args):
    doc = _load_json(args.config)
    if args.seed is not None and "seeds" in doc:
        doc = dict(doc, seeds=[int(s) + args.seed for s in doc["seeds"]])
    try:
        spec = bench_mod.SweepSpec.from_dict(doc)
    except (bench_mod.SweepError, TypeError, ValueError) as exc:
        raise InputError(f"config: {exc}") from None
    out = _prepare_out(args.out)
    rows = bench_mod.run_sweep(spec)
    os.makedirs(out, exist_ok=True)
    bench_mod.write_csv(os.path.join(out, "bench.csv"), rows)
    _write_json(os.path.join(out, "bench.json"), {"rows": rows})
    if args.json:
        print(json.dumps(rows, sort_keys=True))
    else:
        print(",".join(bench_mod.CSV_COLUMNS))
        for r in rows:
            print(f"{r['size']},{r['preset']},{r['alpha']:g},{r['beta']:g},"
                  f"{r['mean_iter']:.2f},{r['mean_residual']:.3e},{r['mean_ms']:.2f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# deblur


DEFAULT_BANDWIDTH = 30
DEBLUR_KEYS = ("sigma", "bandwidth", "deltas", "noise_var", "lambda", "mu", "mode", "grid")


@dataclass
class DeblurPlan:
    sigma: float = 4.0
    bandwidth: int = None
    deltas: tuple = (0.75, 0.25, 0.25)
    noise_var: float = 1e-3
    reg: RegularizationParams = None
    mode: str = "one_sided"
    grid: tuple = (1e-4, 1e-3, 1e-2)


def parse_deblur_config(cfg):
    _check_keys(cfg, DEBLUR_KEYS)
    plan = DeblurPlan()
    plan.sigma = _number(cfg, "sigma", plan.sigma, positive=True)
    if "bandwidth" in cfg:
        plan.bandwidth = _number(cfg, "bandwidth", 0, integer=True)
        if plan.bandwidth < 0:
            raise InputError("config.bandwidth: must be nonnegative")
    deltas = cfg.get("deltas", plan.deltas)
    if not isinstance(deltas, (list, tuple)) or len(deltas) != 3 or not all(
            isinstance(d, (int, float)) and not isinstance(d, bool) for d in deltas):
        raise InputError("config.deltas: expected three numbers")
    plan.deltas = tuple(float(d) for d in deltas)
    plan.noise_var = _number(cfg, "noise_var", plan.noise_var)
    if plan.noise_var < 0:
        raise InputError("config.noise_var: must be nonnegative")
    if ("lambda" in cfg) != ("mu" in cfg):
        raise InputError("config.lambda: give both lambda and mu, or neither")
    if "lambda" in cfg:
        plan.reg = RegularizationParams(_number(cfg, "lambda", 0, positive=True),
                                        _number(cfg, "mu", 0, positive=True))
    plan.mode = cfg.get("mode", plan.mode)
    if plan.mode not in MODES:
        raise InputError(f"config.mode: expected one of {MODES}, got {plan.mode!r}")
    grid = cfg.get("grid", plan.grid)
    if not isinstance(grid, (list, tuple)) or not grid or not all(
            isinstance(g, (int, float)) and g > 0 for g in grid):
        raise InputError("config.grid: expected a non-empty list of positive numbers")
    plan.grid = tuple(float(g) for g in grid)
    return plan


def cmd_deblur(args):
    plan = parse_deblur_config(_load_json(args.config))
    path = args.image or data_path("test64.ppm")
    img = _load(lambda p: io.read_pnm(p, expect="P6"), path, "--image")
    X_true = image_to_tensor(img)
    T = _load(io.read_transform, args.m, "--m") if args.m else Transform.identity(3)
    if T.p != 3:
        raise InputError(f"--m: deblurring needs a 3x3 transform, got order {T.p}")
    bandwidth = min(DEFAULT_BANDWIDTH, X_true.m - 1) if plan.bandwidth is None else plan.bandwidth
    if bandwidth >= X_true.m:
        raise InputError(f"config.bandwidth: must be below the image height {X_true.m}")
    seed = 0 if args.seed is None else args.seed
    out = _prepare_out(args.out)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = BlurModel(X_true.m, plan.sigma, bandwidth, plan.deltas)
    A, B = build_blur_pair(model, X_true.n)
    B_used = B if plan.mode == "two_sided" else None
    C_obs = synthesize_observation(X_true, A, B_used, T, plan.noise_var, seed)
    if plan.reg is None:
        reg, rec, _ = tune_regularization(C_obs, A, B_used, T, X_true, plan.grid)
    else:
        reg = plan.reg
        rec = reconstruct(C_obs, A, B_used, T, reg)
    observed = clamp(C_obs)
    metrics = {
        "mode": plan.mode,
        "sigma": plan.sigma,
        "bandwidth": bandwidth,
        "deltas": list(plan.deltas),
        "lambda": reg.lam,
        "mu": reg.mu,
        "noise_var": plan.noise_var,
        "seed": seed,
        "psnr_blurred": _finite(psnr(observed, X_true)),
        "psnr_reconstructed": _finite(psnr(rec.X, X_true)),
        "relative_error_blurred": relative_error(observed, X_true),
        "relative_error_reconstructed": relative_error(rec.X, X_true),
        "imag_residue": rec.imag_residue,
        "warnings": [str(w.message) for w in caught],
    }
    os.makedirs(out, exist_ok=True)
    io.write_pnm(os.path.join(out, "blurred.ppm"), tensor_to_image(observed))
    io.write_pnm(os.path.join(out, "reconstructed.ppm"), tensor_to_image(rec.X))
    _write_json(os.path.join(out, "metrics.json"), metrics)
    if args.json:
        print(json.dumps(metrics, sort_keys=True))
    else:
        print(f"PSNR blurred {metrics['psnr_blurred']:.2f} dB, reconstructed "
              f"{metrics['psnr_reconstructed']:.2f} dB (lambda = mu = {reg.lam:g})")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="mtensor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, operands=True):
        if operands:
            p.add_argument("--a", help="left operand A (MT3D)")
            p.add_argument("--b", help="right operand B (MT3D)")
            p.add_argument("--c", help="right-hand side C (MT3D)")
            p.add_argument("--m", help="transform M (MMAT1)")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="random seed (u64)")
        p.add_argument("--json", action="store_true", help="machine-readable stdout")

    p = sub.add_parser("solve", help="two-step iterative solve of A X B = C")
    common(p)
    p.add_argument("--p1", help="left preconditioner (MT3D), method ptspi")
    p.add_argument("--p2", help="right preconditioner (MT3D), method ptspi")
    p.add_argument("--fixture", choices=["sample"], help="use bundled operands for missing paths")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lstsq", help="minimum-norm or Tikhonov least squares")
    common(p)
    p.add_argument("--fixture", choices=["sample"], help="use bundled operands for missing paths")
    p.set_defaults(func=cmd_lstsq)

    p = sub.add_parser("verify", help="check the bundled 3x3x2 example")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="random-system parameter sweep")
    common(p, operands=False)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("deblur", help="blur, add noise and reconstruct an image")
    common(p, operands=False)
    p.add_argument("--image", help="input PPM (P6); defaults to the bundled 64x64 image")
    p.add_argument("--m", help="transform M (MMAT1); identity by default")
    p.set_defaults(func=cmd_deblur)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed: must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
