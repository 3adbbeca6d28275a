"""Parameter sweeps of the AOR two-step methods on random dominant systems."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .fixtures import random_dominant_system
from .solver import PRESETS, SolverConfig, preset_solve

CSV_COLUMNS = ("size", "preset", "alpha", "beta", "mean_iter", "mean_residual", "mean_ms")


class SweepError(ValueError):
    pass


@dataclass
class SweepSpec:
    """Grid of bench cells; every cell is averaged over ``seeds``.

    Each seed draws one system per size, shared by all presets and
    parameters, so cells are compared on identical inputs.
    """

    sizes: list
    alphas: list
    betas: list
    presets: list
    seeds: list
    p: int = 3
    tol: float = 1e-10
    max_iter: int = 10000
    margin: float = 0.5
    omega1: float = 1.0
    omega2: float = 1.0
    pair_params: bool = True

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise SweepError("sweep config must be a JSON object")
        required = ("sizes", "alphas", "presets", "seeds")
        for key in required:
            if key not in d:
                raise SweepError(f"sweep config is missing {key!r}")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise SweepError(f"unknown sweep field(s): {', '.join(sorted(unknown))}")
        d = dict(d)
        d.setdefault("betas", d["alphas"])
        spec = cls(**d)
        spec.validate()
        return spec

    def validate(self):
        for name in ("sizes", "alphas", "betas", "presets", "seeds"):
            value = getattr(self, name)
            if not isinstance(value, (list, tuple)) or not value:
                raise SweepError(f"{name} must be a non-empty list")
        for preset in self.presets:
            if str(preset).lower() not in PRESETS:
                raise SweepError(f"unknown preset {preset!r} in presets")
        if any(int(s) < 1 for s in self.sizes) or self.p < 1:
            raise SweepError("sizes and p must be positive")
        if any(not a > 0 for a in list(self.alphas) + list(self.betas)):
            raise SweepError("alphas and betas must be positive")
        if self.pair_params and len(self.alphas) != len(self.betas):
            raise SweepError("alphas and betas must have equal length when paired")
        if any(int(s) < 0 for s in self.seeds):
            raise SweepError("seeds must be nonnegative integers")

    def parameter_pairs(self):
        if self.pair_params:
            return list(zip(self.alphas, self.betas))
        return [(a, b) for a in self.alphas for b in self.betas]


def system_rng(seed, size, p):
    """Independent stream per (seed, size, p) cell."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(size), int(p)]))


def run_sweep(spec):
    """Run every (size, preset, alpha, beta) cell; returns a list of row dicts.

    Rows carry the CSV columns plus ``iterations``, the per-seed counts, and
    ``converged``, the number of seeds that met the tolerance.
    """
    if isinstance(spec, dict):
        spec = SweepSpec.from_dict(spec)
    rows = []
    for size in spec.sizes:
        systems = [random_dominant_system(system_rng(s, size, spec.p), size, size, spec.p, margin=spec.margin)
                   for s in spec.seeds]
        for preset in spec.presets:
            for alpha, beta in spec.parameter_pairs():
                cfg = SolverConfig(alpha=alpha, beta=beta, tol=spec.tol, max_iter=spec.max_iter)
                iters, resids, times, ok = [], [], [], 0
                for A, B, C, T in systems:
                    t0 = time.perf_counter()
                    rep = preset_solve(preset, A, B, C, T, cfg, omega1=spec.omega1, omega2=spec.omega2)
                    times.append(1e3 * (time.perf_counter() - t0))
                    iters.append(rep.iterations)
                    resids.append(rep.residual)
                    ok += rep.converged
                rows.append({
                    "size": int(size),
                    "preset": str(preset).lower(),
                    "alpha": float(alpha),
                    "beta": float(beta),
                    "mean_iter": float(np.mean(iters)),
                    "mean_residual": float(np.mean(resids)),
                    "mean_ms": float(np.mean(times)),
                    "iterations": iters,
                    "converged": ok,
                })
    return rows


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
