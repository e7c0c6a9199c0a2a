"""Command-line front end: simulate, analyze, cbd, quantum, prbox.

Exit codes: 0 ok, 1 property violation, 2 usage or parse error, 3 data insufficiency.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, quantum
from .cbd import delta_min
from .errors import ConfigError, InsufficientData, MalformedRecord, MissingContext
from .estimation import ingest, read_csv, signaling_deltas
from .inequalities import TSIRELSON
from .report import DEFAULT_ALPHA, analyze_counts, analyze_system, file_provenance, format_text
from .simulator import SimulationConfig, pr_box_system, write_run

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
THREADS_ENV = "CONTEXTUALITY_KIT_THREADS"

log = logging.getLogger("contextuality_kit")


class UsageError(Exception):
    pass


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, indent=2) + "\n")


def _load(path):
    try:
        records = read_csv(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return ingest(records)


# --- commands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    try:
        config = SimulationConfig(
            mode=args.mode,
            angles_a=tuple(args.angles_a),
            angles_b=tuple(args.angles_b),
            n_trials=args.trials,
            seed=args.seed,
            setting_schedule=args.schedule,
            drift_epsilon=args.drift_epsilon,
            crosstalk_strength=args.crosstalk_strength,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    csv_path, meta = write_run(config, args.out)
    print(f"wrote {csv_path} and {meta}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    system, counts = _load(args.input)
    report = analyze_counts(counts, args.alpha, args.force_fine, file_provenance(args.input))
    if args.format == "json":
        _emit(report.to_dict(include_coupling=args.dump_coupling))
    else:
        sys.stdout.write(format_text(report))
    return EXIT_OK


def cmd_cbd(args) -> int:
    system, _ = _load(args.input)
    report = delta_min(system)
    _emit(report.to_dict(include_coupling=args.dump_coupling))
    return EXIT_OK


def cmd_prbox(args) -> int:
    report = analyze_system(pr_box_system(), force_fine=True)
    _emit(report.to_dict(include_coupling=args.dump_coupling))
    return EXIT_OK


def _check_landau(rng):
    dims = [(2, 2), (2, 4), (4, 2)][int(rng.integers(3))]
    bundle = quantum.random_local_bundle(dims, rng)
    res = quantum.landau_residual(bundle)
    return res <= 1e-9, {"residual": res, "bundle": bundle.to_dict()}


def _check_tsirelson(rng):
    dims = [(2, 2), (2, 4), (4, 2)][int(rng.integers(3))]
    bundle = quantum.random_local_bundle(dims, rng)
    rho = quantum.random_state(bundle.dim, rng)
    value = 2 * abs(quantum.chsh_expectation(rho, bundle))
    return value <= TSIRELSON + 1e-9, {"chsh": value, "bundle": bundle.to_dict(), "state": rho.to_dict()}


def _check_theorem1(rng):
    a1, a2, b1, b2 = quantum.random_qubit_quadruple(rng)
    verdict = quantum.local_incompatibility_criterion(a1, a2, b1, b2)
    return verdict.consistent, {
        "violates": verdict.violates,
        "bell_norm": verdict.norm,
        "instance": {k: o.to_dict() for k, o in zip(("A1", "A2", "B1", "B2"), (a1, a2, b1, b2))},
    }


def _check_nosignaling(rng):
    bundle = quantum.random_nonlocal_bundle(rng)
    rho = quantum.random_state(bundle.dim, rng)
    d0 = signaling_deltas(quantum.quantum_system(rho, bundle)).delta0
    return d0 <= 1e-9, {"delta0": d0, "bundle": bundle.to_dict(), "state": rho.to_dict()}


CHECKS = {
    "landau": _check_landau,
    "tsirelson": _check_tsirelson,
    "theorem1": _check_theorem1,
    "nosignaling": _check_nosignaling,
}


def run_check(name: str, samples: int, seed: int, threads: int = 1) -> list:
    """Run ``samples`` randomized instances; each instance gets its own spawned stream."""
    check = CHECKS[name]
    seeds = np.random.SeedSequence(seed).spawn(samples)

    def one(ss):
        return check(np.random.Generator(np.random.PCG64(ss)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, seeds))
    return [one(ss) for ss in seeds]


def cmd_quantum(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    results = run_check(args.check, args.samples, args.seed, thread_cap())
    failures = [(k, info) for k, (ok, info) in enumerate(results) if not ok]
    print(f"{args.check}: {len(results) - len(failures)}/{len(results)} passed")
    if failures:
        k, info = failures[0]
        _emit({"check": args.check, "instance": k, **info}, sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contextuality-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging (LP tableaus)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate click data")
    p.add_argument("--mode", choices=["clean", "crosstalk", "drift"], default="clean")
    p.add_argument("--angles-a", nargs=2, type=float, default=list(quantum.CANONICAL_ANGLES_A), metavar="RAD")
    p.add_argument("--angles-b", nargs=2, type=float, default=list(quantum.CANONICAL_ANGLES_B), metavar="RAD")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", choices=["uniform", "round-robin"], default="uniform")
    p.add_argument("--drift-epsilon", type=float, default=0.0)
    p.add_argument("--crosstalk-strength", type=float, default=0.0)
    p.add_argument("--out", required=True, help="CSV path; metadata goes next to it as .json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="full report on a click-data CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--force-fine", action="store_true", help="run the joint-distribution oracle despite signaling")
    p.add_argument("--dump-coupling", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cbd", help="Contextuality-by-Default measure of a click-data CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dump-coupling", action="store_true")
    p.set_defaults(func=cmd_cbd)

    p = sub.add_parser("quantum", help="randomized checks of the Hilbert-space oracle")
    p.add_argument("--check", choices=sorted(CHECKS), required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("prbox", help="analysis of the PR box")
    p.add_argument("--dump-coupling", action="store_true")
    p.set_defaults(func=cmd_prbox)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if getattr(args, "alpha", 0.5) is not None and not 0 < getattr(args, "alpha", 0.5) < 1:
            raise UsageError("--alpha must lie in (0, 1)")
        return args.func(args)
    except (UsageError, MalformedRecord) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingContext, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
