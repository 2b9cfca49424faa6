"""Command-line front end for the randomness-expansion toolkit.

Commands
--------
``witness``
    Evaluate a preset or device file: behaviour table, witness value,
    guessing probability, certified min-entropy of the table itself.
``curve``
    Generate the certification curve over a witness grid.
``simulate``
    Run protocol rounds and estimate the witness with confidence bounds.
``expand``
    Full pipeline: rounds, estimation, certification against a curve
    file, extraction, packed output bytes plus a JSON report.
``oracle``
    Exhaustive-grid reference maximum at one witness value.

Every command that writes an output file also writes a JSON manifest
(``<out>.manifest.json`` unless ``--manifest`` overrides) recording the
resolved parameters, seeds, tool version, file paths and duration.

Exit codes: 0 success; 2 usage or parse errors; 3 infeasible targets,
failed estimation, or no certified randomness; 4 I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from ._kernels import available_backends
from .optimize import (
    CurvePoint,
    InfeasibleError,
    OptimizationSettings,
    grid_oracle_search,
    maximize_guessing_at_t,
    monotonize_curve,
    read_curve,
    write_curve,
)
from .protocol import (
    INPUT_BITS_PER_ROUND,
    IID_ASSUMPTION,
    CertificationError,
    EstimationError,
    ExtractionParams,
    NoiseModel,
    RoundLog,
    extract_bits,
    extraction_output_length,
    estimate_witness,
    pack_bits_msb_first,
    qrac_preset,
    bb84_preset,
    run_rounds,
    toeplitz_seed_bits,
    with_certification,
)
from .qubit import BinaryMeasurement, Device, PureQubit, behavior_table
from .witness import (
    PREPARATION_LABELS,
    CertificationResult,
    min_entropy,
    quantum_bound,
)

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_NO_VIOLATION",
    "EXIT_IO",
    "CliError",
    "RunManifest",
    "device_to_jsonable",
    "device_from_jsonable",
    "load_device",
    "save_device",
    "build_parser",
    "main",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_VIOLATION = 3
EXIT_IO = 4

_PRESETS: dict[str, Callable[[], Device]] = {"qrac": qrac_preset, "bb84": bb84_preset}

#: Default integer seed for protocol commands when ``--seed`` is absent.
_DEFAULT_PROTOCOL_SEED = 0


class CliError(Exception):
    """Error carrying the process exit code it should map to."""

    def __init__(self, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.exit_code = exit_code


@dataclass
class RunManifest:
    """Reproducibility record emitted alongside every output file."""

    command: str
    parameters: dict[str, Any]
    rng_seeds: dict[str, int]
    tool_version: str
    input_paths: list[str]
    output_paths: list[str]
    duration_seconds: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "rng_seeds": self.rng_seeds,
            "tool_version": self.tool_version,
            "input_paths": self.input_paths,
            "output_paths": self.output_paths,
            "duration_seconds": self.duration_seconds,
        }


# ---------------------------------------------------------------------------
# device files


def device_to_jsonable(device: Device) -> dict[str, Any]:
    """JSON-ready view of a device; angles stay in radians."""
    return {
        "preparations": [
            {"theta": p.theta, "eta": p.eta} for p in device.preparations
        ],
        "measurements": [
            {
                "theta": m.theta,
                "eta": m.eta,
                "fixed_computational": m.fixed_computational,
            }
            for m in device.measurements
        ],
    }


def _angle(record: Any, key: str, where: str) -> float:
    if not isinstance(record, dict):
        raise ValueError(f"{where} must be an object with theta/eta fields")
    if key not in record:
        raise ValueError(f"{where} is missing field {key!r}")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where}.{key} must be a number in radians, got {value!r}")
    return float(value)


def device_from_jsonable(data: Any) -> Device:
    """Parse the device grammar, naming the offending field on error."""
    if not isinstance(data, dict):
        raise ValueError("device document must be a JSON object")
    for key in ("preparations", "measurements"):
        if key not in data:
            raise ValueError(f"device document is missing field {key!r}")
    preps_raw = data["preparations"]
    meas_raw = data["measurements"]
    if not isinstance(preps_raw, list) or len(preps_raw) != 4:
        raise ValueError("field 'preparations' must be a list of 4 records")
    if not isinstance(meas_raw, list) or len(meas_raw) != 2:
        raise ValueError("field 'measurements' must be a list of 2 records")
    preparations = []
    for i, rec in enumerate(preps_raw):
        where = f"preparations[{i}]"
        theta = _angle(rec, "theta", where)
        eta = _angle(rec, "eta", where)
        try:
            preparations.append(PureQubit(theta, eta))
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
    measurements = []
    for i, rec in enumerate(meas_raw):
        where = f"measurements[{i}]"
        theta = _angle(rec, "theta", where)
        eta = _angle(rec, "eta", where)
        fixed = rec.get("fixed_computational", False)
        if not isinstance(fixed, bool):
            raise ValueError(f"{where}.fixed_computational must be a boolean")
        try:
            measurements.append(BinaryMeasurement(theta, eta, fixed))
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
    return Device(tuple(preparations), tuple(measurements))


def load_device(path: str) -> Device:
    """Read a device JSON file, mapping failures onto exit codes."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read device file {path}: {exc}", EXIT_IO) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"device file {path} line {exc.lineno} column {exc.colno}: {exc.msg}",
            EXIT_USAGE,
        ) from None
    try:
        return device_from_jsonable(data)
    except ValueError as exc:
        raise CliError(f"device file {path}: {exc}", EXIT_USAGE) from None


def save_device(device: Device, path: str) -> None:
    _write_text(path, json.dumps(device_to_jsonable(device), indent=2) + "\n")


# ---------------------------------------------------------------------------
# I/O helpers


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _write_bytes(path: str, payload: bytes) -> None:
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _write_json(path: str, obj: Any) -> None:
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _emit_manifest(args: argparse.Namespace, anchor: str, manifest: RunManifest) -> str:
    path = args.manifest or f"{anchor}.manifest.json"
    manifest.output_paths = list(manifest.output_paths)
    _write_json(path, manifest.to_dict())
    return path


# ---------------------------------------------------------------------------
# shared argument plumbing


def _uint64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("value must be at least 1")
    return value


def _resolve_backend(args: argparse.Namespace) -> str | None:
    return None if args.backend == "auto" else args.backend


def _resolve_device(args: argparse.Namespace) -> tuple[Device, str, list[str]]:
    if args.preset is not None:
        return _PRESETS[args.preset](), f"preset:{args.preset}", []
    device = load_device(args.device)
    return device, args.device, [args.device]


def _noise_from_args(args: argparse.Namespace) -> NoiseModel:
    try:
        return NoiseModel(args.depolarizing_q, args.flip_p)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def _add_device_args(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--preset", choices=sorted(_PRESETS), help="built-in device to evaluate"
    )
    group.add_argument("--device", help="path to a device JSON file (angles in radians)")


def _add_noise_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--depolarizing-q",
        type=float,
        default=0.0,
        help="probability of replacing the prepared state by the maximally mixed one",
    )
    sub.add_argument(
        "--flip-p", type=float, default=0.0, help="probability of flipping the outcome bit"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdirand",
        description="Dimension-witness randomness expansion: simulate, certify, extract.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=_uint64,
        default=None,
        help="64-bit integer seed (default: 0 for protocol commands, the "
        "optimizer default for curve)",
    )
    common.add_argument(
        "--threads",
        type=_positive_int,
        default=1,
        help="worker budget recorded in the manifest; evaluation is vectorized in-process",
    )
    common.add_argument("--out", default=None, help="primary output path")
    common.add_argument(
        "--manifest", default=None, help="manifest path (default: <out>.manifest.json)"
    )
    common.add_argument(
        "--backend",
        choices=("auto",) + tuple(available_backends()),
        default="auto",
        help="numeric kernel lane (default: compiled when available)",
    )

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_witness = sub.add_parser(
        "witness",
        parents=[common],
        help="evaluate the witness of a preset or device file",
    )
    _add_device_args(p_witness)
    p_witness.add_argument(
        "--emit-device", default=None, help="also write the resolved device JSON here"
    )

    p_curve = sub.add_parser(
        "curve", parents=[common], help="generate the certification curve"
    )
    p_curve.add_argument("--t-min", type=float, default=2.0)
    p_curve.add_argument("--t-max", type=float, default=quantum_bound())
    p_curve.add_argument("--step", type=float, default=0.02)
    p_curve.add_argument(
        "--starts", type=_positive_int, default=None, help="random starts per point"
    )

    p_sim = sub.add_parser(
        "simulate", parents=[common], help="run rounds and estimate the witness"
    )
    _add_device_args(p_sim)
    _add_noise_args(p_sim)
    p_sim.add_argument("--n", type=_positive_int, required=True, help="number of rounds")
    p_sim.add_argument("--confidence", type=float, default=0.99)
    p_sim.add_argument(
        "--round-log", default=None, help="also write the per-round log (large!)"
    )

    p_expand = sub.add_parser(
        "expand", parents=[common], help="simulate, certify and extract output bits"
    )
    _add_device_args(p_expand)
    _add_noise_args(p_expand)
    p_expand.add_argument("--n", type=_positive_int, required=True)
    p_expand.add_argument("--confidence", type=float, default=0.99)
    p_expand.add_argument(
        "--epsilon", type=float, default=2.0**-32, help="extractor security parameter"
    )
    p_expand.add_argument(
        "--curve",
        required=True,
        help="curve file for certification, or 'auto' to generate the default grid first",
    )

    p_oracle = sub.add_parser(
        "oracle", parents=[common], help="exhaustive-grid maximum at one witness value"
    )
    p_oracle.add_argument("--t", type=float, required=True, help="witness target")
    p_oracle.add_argument("--resolution", type=_positive_int, default=9)
    p_oracle.add_argument("--band", type=float, default=0.05)

    return parser


# ---------------------------------------------------------------------------
# commands


def _cmd_witness(args: argparse.Namespace) -> int:
    start = time.monotonic()
    device, source, inputs = _resolve_device(args)
    table = behavior_table(device)
    result = CertificationResult.from_table(table)
    print(f"device: {source}")
    for a, label in enumerate(PREPARATION_LABELS):
        print(
            f"  E[a={label}, y=0] = {table.cell(a, 0):.6f}   "
            f"E[a={label}, y=1] = {table.cell(a, 1):.6f}"
        )
    print(f"T = {result.t_value:.6f}")
    print(f"p_guess = {result.p_guess:.6f}")
    print(f"H_min certified = {result.h_min:.6f}")

    outputs: list[str] = []
    if args.emit_device:
        save_device(device, args.emit_device)
        outputs.append(args.emit_device)
    if args.out:
        _write_json(
            args.out,
            {
                "device": source,
                "table": [[table.cell(a, 0), table.cell(a, 1)] for a in range(4)],
                "t_value": result.t_value,
                "p_guess": result.p_guess,
                "h_min": result.h_min,
            },
        )
        outputs.append(args.out)
    if outputs or args.manifest:
        manifest = RunManifest(
            command="witness",
            parameters={
                "preset": args.preset,
                "device_file": args.device,
                "threads": args.threads,
            },
            rng_seeds={},
            tool_version=__version__,
            input_paths=inputs,
            output_paths=outputs,
            duration_seconds=time.monotonic() - start,
        )
        anchor = args.out or args.emit_device or "witness"
        _emit_manifest(args, anchor, manifest)
    return EXIT_OK


def _curve_grid(t_min: float, t_max: float, step: float) -> list[float]:
    qb = quantum_bound()
    if not 2.0 - 1e-9 <= t_min <= t_max <= qb + 1e-9:
        raise CliError(
            f"need 2 <= t-min <= t-max <= {qb:.6f}, got [{t_min}, {t_max}]", EXIT_USAGE
        )
    if not step > 0:
        raise CliError(f"--step must be positive, got {step}", EXIT_USAGE)
    grid: list[float] = []
    k = 0
    while True:
        t = t_min + k * step
        if t > t_max + 1e-12:
            break
        grid.append(t)
        k += 1
    if not grid or grid[-1] < t_max - 1e-12:
        grid.append(t_max)
    return grid


def _cmd_curve(args: argparse.Namespace) -> int:
    start = time.monotonic()
    grid = _curve_grid(args.t_min, args.t_max, args.step)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.starts is not None:
        overrides["starts"] = args.starts
    try:
        settings = OptimizationSettings(**overrides)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    backend = _resolve_backend(args)

    points: list[CurvePoint] = []
    failures: list[tuple[float, str]] = []
    prev: tuple[float, ...] | None = None
    for t in grid:
        warm = () if prev is None else (prev,)
        try:
            pt = maximize_guessing_at_t(t, settings, warm_starts=warm, backend=backend)
        except InfeasibleError as exc:
            failures.append((t, str(exc)))
            continue
        points.append(pt)
        prev = pt.argmax_params
    if points:
        points = monotonize_curve(points)

    out = args.out or "curve.csv"
    outputs: list[str] = []
    if points:
        try:
            write_curve(out, points)
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from None
        outputs.append(out)
        print(f"wrote {len(points)} curve points to {out}")
    for t, message in failures:
        print(f"infeasible: t={t:.6f}: {message}")
    if failures:
        print(f"{len(failures)} of {len(grid)} grid points infeasible")

    manifest = RunManifest(
        command="curve",
        parameters={
            "t_min": args.t_min,
            "t_max": args.t_max,
            "step": args.step,
            "grid_size": len(grid),
            "settings": {
                "starts": settings.starts,
                "penalty_weight_schedule": list(settings.penalty_weight_schedule),
                "constraint_tolerance": settings.constraint_tolerance,
                "convergence_tolerance": settings.convergence_tolerance,
                "max_iterations": settings.max_iterations,
            },
            "backend": args.backend,
            "threads": args.threads,
        },
        rng_seeds={"optimizer": settings.rng_seed},
        tool_version=__version__,
        input_paths=[],
        output_paths=outputs,
        duration_seconds=time.monotonic() - start,
    )
    _emit_manifest(args, out, manifest)
    if not points:
        raise CliError("every grid point was infeasible", EXIT_NO_VIOLATION)
    return EXIT_NO_VIOLATION if failures else EXIT_OK


def _round_log_text(log: RoundLog) -> str:
    lines = ["round_index,a,y,b"]
    labels = PREPARATION_LABELS
    lines.extend(
        f"{i},{labels[a]},{y},{b}"
        for i, (a, y, b) in enumerate(zip(log.a, log.y, log.b))
    )
    return "\n".join(lines) + "\n"


def _cmd_simulate(args: argparse.Namespace) -> int:
    start = time.monotonic()
    device, source, inputs = _resolve_device(args)
    noise = _noise_from_args(args)
    seed = args.seed if args.seed is not None else _DEFAULT_PROTOCOL_SEED
    log = run_rounds(device, noise, args.n, seed)
    try:
        report = estimate_witness(log, args.confidence)
    except (EstimationError, ValueError) as exc:
        code = EXIT_NO_VIOLATION if isinstance(exc, EstimationError) else EXIT_USAGE
        raise CliError(str(exc), code) from None

    out = args.out or "simulate_report.json"
    payload = {
        "device": source,
        "n_rounds": args.n,
        "seed": seed,
        "noise": {"depolarizing_q": noise.depolarizing_q, "flip_p": noise.flip_p},
        "consumed_input_bits": INPUT_BITS_PER_ROUND * args.n,
        "report": report.to_dict(),
        "assumption": IID_ASSUMPTION,
    }
    _write_json(out, payload)
    outputs = [out]
    if args.round_log:
        _write_text(args.round_log, _round_log_text(log))
        outputs.append(args.round_log)
    print(f"t_hat = {report.t_hat:.6f}")
    print(f"t_lower = {report.t_lower:.6f} at confidence {report.confidence}")
    print(f"report written to {out}")

    manifest = RunManifest(
        command="simulate",
        parameters={
            "preset": args.preset,
            "device_file": args.device,
            "n": args.n,
            "confidence": args.confidence,
            "depolarizing_q": noise.depolarizing_q,
            "flip_p": noise.flip_p,
            "threads": args.threads,
        },
        rng_seeds={"rounds": seed},
        tool_version=__version__,
        input_paths=inputs,
        output_paths=outputs,
        duration_seconds=time.monotonic() - start,
    )
    _emit_manifest(args, out, manifest)
    return EXIT_OK


def _load_or_build_curve(
    args: argparse.Namespace, out: str, inputs: list[str], outputs: list[str]
) -> tuple[list[CurvePoint], str]:
    if args.curve != "auto":
        try:
            points = read_curve(args.curve)
        except FileNotFoundError:
            raise CliError(f"curve file not found: {args.curve}", EXIT_IO) from None
        except OSError as exc:
            raise CliError(f"cannot read curve file {args.curve}: {exc}", EXIT_IO) from None
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE) from None
        inputs.append(args.curve)
        return points, args.curve

    curve_path = f"{out}.curve.csv"
    settings = OptimizationSettings()
    backend = _resolve_backend(args)
    points = []
    prev: tuple[float, ...] | None = None
    for t in _curve_grid(2.0, quantum_bound(), 0.02):
        warm = () if prev is None else (prev,)
        pt = maximize_guessing_at_t(t, settings, warm_starts=warm, backend=backend)
        points.append(pt)
        prev = pt.argmax_params
    points = monotonize_curve(points)
    try:
        write_curve(curve_path, points)
    except OSError as exc:
        raise CliError(f"cannot write {curve_path}: {exc}", EXIT_IO) from None
    outputs.append(curve_path)
    return points, curve_path


def _cmd_expand(args: argparse.Namespace) -> int:
    start = time.monotonic()
    device, source, inputs = _resolve_device(args)
    noise = _noise_from_args(args)
    seed = args.seed if args.seed is not None else _DEFAULT_PROTOCOL_SEED
    if not 0.0 < args.epsilon < 1.0:
        raise CliError(
            f"--epsilon must lie in (0, 1), got {args.epsilon}", EXIT_USAGE
        )
    out = args.out or "expand_output.bin"
    outputs: list[str] = []
    curve, curve_path = _load_or_build_curve(args, out, inputs, outputs)

    log = run_rounds(device, noise, args.n, seed)
    try:
        report = estimate_witness(log, args.confidence)
    except (EstimationError, ValueError) as exc:
        code = EXIT_NO_VIOLATION if isinstance(exc, EstimationError) else EXIT_USAGE
        raise CliError(str(exc), code) from None
    try:
        report = with_certification(report, curve)
    except CertificationError as exc:
        raise CliError(str(exc), EXIT_NO_VIOLATION) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    rate = report.h_min_certified or 0.0

    n_bits = extraction_output_length(args.n, rate, args.epsilon)
    bits = None
    packed = b""
    if n_bits > 0:
        seed_bits = toeplitz_seed_bits(args.n, n_bits, seed)
        params = ExtractionParams(args.n, rate, args.epsilon, seed_bits)
        bits = extract_bits(log.b, params)
        packed = pack_bits_msb_first(bits)
    status = "ok" if n_bits > 0 else "no violation"

    payload = {
        "device": source,
        "n_rounds": args.n,
        "seed": seed,
        "noise": {"depolarizing_q": noise.depolarizing_q, "flip_p": noise.flip_p},
        "epsilon": args.epsilon,
        "curve_file": curve_path,
        "report": report.to_dict(),
        "status": status,
        "consumed_input_bits": INPUT_BITS_PER_ROUND * args.n,
        "produced_output_bits": n_bits,
        "valid_bit_count": n_bits,
        "output_file": out if n_bits > 0 else None,
        "assumption": IID_ASSUMPTION,
    }
    if n_bits > 0:
        _write_bytes(out, packed)
        outputs.insert(0, out)
    report_path = f"{out}.report.json"
    _write_json(report_path, payload)
    outputs.append(report_path)

    print(f"t_hat = {report.t_hat:.6f}, t_lower = {report.t_lower:.6f}")
    print(f"certified rate = {rate:.6f} bits/round")
    print(f"status: {status}")
    if n_bits > 0:
        print(
            f"consumed {INPUT_BITS_PER_ROUND * args.n} input bits, "
            f"produced {n_bits} output bits ({len(packed)} bytes) -> {out}"
        )
    else:
        print("no certified randomness; report written, no output file")

    manifest = RunManifest(
        command="expand",
        parameters={
            "preset": args.preset,
            "device_file": args.device,
            "n": args.n,
            "confidence": args.confidence,
            "epsilon": args.epsilon,
            "depolarizing_q": noise.depolarizing_q,
            "flip_p": noise.flip_p,
            "curve": args.curve,
            "backend": args.backend,
            "threads": args.threads,
        },
        rng_seeds={"rounds": seed, "extractor": seed},
        tool_version=__version__,
        input_paths=inputs,
        output_paths=outputs,
        duration_seconds=time.monotonic() - start,
    )
    _emit_manifest(args, out, manifest)
    return EXIT_OK if n_bits > 0 else EXIT_NO_VIOLATION


def _cmd_oracle(args: argparse.Namespace) -> int:
    start = time.monotonic()
    backend = _resolve_backend(args)
    try:
        p_guess, params = grid_oracle_search(
            args.t, args.resolution, args.band, backend=backend
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    except InfeasibleError as exc:
        raise CliError(str(exc), EXIT_NO_VIOLATION) from None
    h = min_entropy(p_guess)
    print(f"t_target = {args.t:.6f} (resolution {args.resolution}, band {args.band})")
    print(f"p_guess = {p_guess:.12f}")
    print(f"h_min = {h:.12f}")
    angles = {
        "preparations": [
            {"theta": params[2 * a], "eta": params[2 * a + 1]} for a in range(4)
        ],
        "measurement_1": {"theta": params[8], "eta": params[9]},
        "measurement_0": {"theta": params[10], "eta": params[11]},
    }
    if args.out:
        _write_json(
            args.out,
            {
                "t_target": args.t,
                "resolution": args.resolution,
                "band": args.band,
                "p_guess": p_guess,
                "h_min": h,
                "argmax": angles,
            },
        )
        manifest = RunManifest(
            command="oracle",
            parameters={
                "t": args.t,
                "resolution": args.resolution,
                "band": args.band,
                "backend": args.backend,
                "threads": args.threads,
            },
            rng_seeds={},
            tool_version=__version__,
            input_paths=[],
            output_paths=[args.out],
            duration_seconds=time.monotonic() - start,
        )
        _emit_manifest(args, args.out, manifest)
    return EXIT_OK


_DISPATCH: dict[str, Callable[[argparse.Namespace], int]] = {
    "witness": _cmd_witness,
    "curve": _cmd_curve,
    "simulate": _cmd_simulate,
    "expand": _cmd_expand,
    "oracle": _cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
