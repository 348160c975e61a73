"""High-level operations shared by the HTTP service and the CLI.

Alpha kernels are resolved from an inline artifact, a file path, or a
fresh extraction; extractions are memoized per geometry hash, on disk when
XHAMMER_CACHE_DIR is set. Sweeps fan out over a process pool and are
reported in input order regardless of completion order.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .calibrate import CalibrationResult, ReferencePoint, calibrate_kinetics
from .circuit import CrossbarInstance
from .config import ExperimentConfig, parse_experiment
from .engine import AttackResult, run_attack, run_pulse_train
from .thermal.extract import AlphaKernel, extract_kernel

CACHE_ENV = "XHAMMER_CACHE_DIR"

_memo: dict[str, AlphaKernel] = {}


def geometry_hash(config: ExperimentConfig) -> str:
    """Hash of everything an extraction depends on."""
    geom = config.geometry.to_core()
    payload = {
        "geometry": geom.to_dict(),
        "ambient_K": config.ambient_K,
        "voxel_size": config.solver.voxel_size,
        "tol": config.solver.tol,
        "powers_W": list(config.solver.powers_W),
    }
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


def compute_kernel(config: ExperimentConfig) -> AlphaKernel:
    """Extract (or recall) the coupling kernel for the config's geometry."""
    key = geometry_hash(config)
    if key in _memo:
        return _memo[key]
    cache_dir = os.environ.get(CACHE_ENV)
    cache_path = None
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        cache_path = os.path.join(cache_dir, f"kernel-{key}.json")
        if os.path.exists(cache_path):
            kernel = AlphaKernel.load(cache_path)
            _memo[key] = kernel
            return kernel
    kernel = extract_kernel(
        config.geometry.to_core(),
        voxel_size=config.solver.voxel_size,
        ambient=config.ambient_K,
        powers=config.solver.powers_W,
        tol=config.solver.tol,
    )
    if cache_path:
        kernel.save(cache_path)
    _memo[key] = kernel
    return kernel


def resolve_kernel(
    config: ExperimentConfig, inline: dict | None = None
) -> AlphaKernel:
    if inline is not None:
        return AlphaKernel.from_artifact_dict(inline).with_ambient(config.ambient_K)
    if config.alpha_source == "compute":
        return compute_kernel(config)
    return AlphaKernel.load(config.alpha_source).with_ambient(config.ambient_K)


def build_crossbar(config: ExperimentConfig, kernel: AlphaKernel) -> CrossbarInstance:
    geom = config.geometry.to_core()
    params = config.device.to_core()
    return CrossbarInstance(
        rows=geom.rows,
        cols=geom.cols,
        params=params,
        alpha_kernel=kernel.with_ambient(config.ambient_K),
        ambient=config.ambient_K,
        wire_resistance_per_segment=config.wire_resistance,
        x=config.initial_x(params),
    )


def simulate(
    config: ExperimentConfig, kernel: AlphaKernel | None = None, trace: bool = False
) -> AttackResult:
    if kernel is None:
        kernel = resolve_kernel(config)
    xbar = build_crossbar(config, kernel)
    program = config.program.to_core()
    if trace:
        return run_pulse_train(xbar, program, record_trace=True)
    return run_attack(xbar, program)


@dataclass
class SweepRow:
    value: float
    pulses_to_flip: int | None
    flipped: bool


def _sweep_point_config(config: ExperimentConfig, value: float) -> ExperimentConfig:
    """Config for one sweep point; all other parameters held."""
    data = config.to_json_dict()
    data.pop("sweep")
    variable = config.sweep.variable
    if variable == "pulse_length":
        data["program"]["pulse_length_ns"] = value
    elif variable == "ambient":
        data["ambient_K"] = value
    elif variable == "spacing":
        data["geometry"]["electrode_spacing"] = value
    return parse_experiment(data)


def _run_sweep_point(payload: tuple[str, float, dict | None]) -> tuple[float, int | None, bool]:
    config_json, value, inline_kernel = payload
    config = parse_experiment(json.loads(config_json))
    point = _sweep_point_config(config, value)
    # spacing changes the geometry: the kernel must be re-extracted per value
    if config.sweep.variable == "spacing":
        kernel = compute_kernel(point)
    else:
        kernel = resolve_kernel(point, inline=inline_kernel)
    res = simulate(point, kernel=kernel)
    return value, res.pulses_to_flip, res.flipped


def run_sweep(
    config: ExperimentConfig,
    workers: int | None = None,
    inline_kernel: dict | None = None,
) -> list[SweepRow]:
    if config.sweep is None:
        raise ValueError("config has no sweep block")
    values = list(config.sweep.values)
    if config.sweep.variable != "spacing" and inline_kernel is None:
        # share one kernel across all points instead of re-resolving per worker
        inline_kernel = resolve_kernel(config).to_artifact_dict()
    config_json = json.dumps(config.to_json_dict())
    payloads = [(config_json, v, inline_kernel) for v in values]

    if workers is None:
        workers = min(len(values), os.cpu_count() or 1)
    workers = max(1, min(workers, len(values)))
    if workers == 1:
        results = [_run_sweep_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sweep_point, payloads))
    return [SweepRow(v, n, f) for v, n, f in results]


def calibrate(
    config: ExperimentConfig,
    reference: list[ReferencePoint],
    free: tuple[str, ...],
    kernel: AlphaKernel | None = None,
) -> CalibrationResult:
    if kernel is None:
        kernel = resolve_kernel(config)
    return calibrate_kinetics(config, kernel, reference, free)
