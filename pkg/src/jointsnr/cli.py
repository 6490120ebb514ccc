"""Command-line front end: ``jointsnr validate | simulate | estimate``.

Exit codes: 0 success, 1 validation failure, 2 usage/config/data error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import JointSNRError, QuadratureError
from .fusion import GAMMA1, JOINT, METHODS, detect
from .model import (
    JointPriorParams,
    NoisePriorParams,
    SufficientStatistic,
    angular_constant,
    sufficient_statistic,
)
from .moments import log_moment_h0, log_moment_h1
from .montecarlo import ExperimentConfig, run_sweep, with_param
from .oracle import QuadratureSettings, prior_mass, quad_angular_constant, quad_moment_h0, quad_moment_h1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3

DEFAULT_SWEEP = [("alpha", [3.0, 4.0, 6.0]), ("noise_prior.beta0", [0.5, 1.0, 2.0, 4.0, 8.0])]
METRIC_COLUMNS = [
    ("detection_error", "detection_error_prob"),
    ("detection_error_se", "detection_error_se"),
    ("signal_mse", "signal_mse"),
    ("signal_mse_se", "signal_mse_se"),
    ("noise_mse", "noise_mse"),
    ("noise_mse_se", "noise_mse_se"),
    ("bayes_risk", "empirical_bayes_risk"),
    ("bayes_risk_se", "empirical_bayes_risk_se"),
]

VALIDATION_NS = (2, 4, 8)
VALIDATION_TS = (0.0, 1.0, 10.0, 100.0)
H1_ORDERS = [(p, q) for p in range(3) for q in range(3) if p + q <= 2]


class UsageError(Exception):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _fmt(x) -> str:
    """Shortest round-trip representation."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    for flag, key in (("seed", "seed"), ("trials", "trials"), ("vector_len", "vector_len")):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    methods = getattr(args, "methods", None)
    if methods:
        data["methods"] = methods.split(",")
    try:
        return ExperimentConfig.from_dict(data)
    except (JointSNRError, TypeError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def parse_sweep(items: Sequence[str]) -> List[Tuple[str, List[float]]]:
    sweep = []
    for item in items:
        path, eq, values = item.partition("=")
        if not eq or not path.strip() or not values.strip():
            raise UsageError(f"sweep must look like param=v1,v2,... got {item!r}")
        try:
            sweep.append((path.strip(), [float(v) for v in values.split(",")]))
        except ValueError:
            raise UsageError(f"non-numeric value in sweep {item!r}") from None
    return sweep


def _validation_priors(config: ExperimentConfig):
    return [
        ("config", config.noise_prior, config.joint_prior),
        ("quadrant", NoisePriorParams(3.0, 2.0), JointPriorParams(3.0, 9.1, 0.0, math.pi / 2)),
        ("offset", NoisePriorParams(5.5, 0.7), JointPriorParams(2.5, 1.3, 0.2, 1.1)),
    ]


def validation_checks(config: ExperimentConfig, tol: float, settings: QuadratureSettings):
    """Yield ``(name, max_error, tolerance)`` for each validation group."""

    def rel(a, b):
        return abs(a / b - 1.0)

    for label, h0, h1 in _validation_priors(config):
        worst = 0.0
        for n in VALIDATION_NS:
            for t in VALIDATION_TS:
                stat = SufficientStatistic(n, t)
                for p, q in H1_ORDERS:
                    if h1.alpha1 + 0.5 * n - 1 - p - q <= 0:
                        continue
                    worst = max(worst, rel(log_moment_h1(p, q, stat, h1).value, quad_moment_h1(p, q, stat, h1, settings)))
                for q in range(3):
                    if h0.alpha0 + 0.5 * n - q <= 0:
                        continue
                    worst = max(worst, rel(log_moment_h0(q, stat, h0).value, quad_moment_h0(q, stat, h0, settings)))
        yield f"moments vs quadrature [{label}]", worst, tol
        mass = max(abs(prior_mass(h0, settings) - 1.0), abs(prior_mass(h1, settings) - 1.0))
        yield f"prior mass [{label}]", mass, tol

    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(100):
        a, b = np.sort(rng.uniform(0.0, math.pi / 2, 2))
        c11 = angular_constant(1, 1, a, b)
        worst = max(worst, abs(angular_constant(1, 3, a, b) + angular_constant(3, 1, a, b) - c11) / c11)
    yield "C13 + C31 = C11", worst, 1e-12

    worst = 0.0
    for phi1, phi2 in ((0.0, math.pi / 8), (0.0, math.pi / 2), (0.3, 1.2)):
        for m in (1, 3, 5):
            for n in (1, 3, 5):
                worst = max(worst, rel(angular_constant(m, n, phi1, phi2), quad_angular_constant(m, n, phi1, phi2, settings)))
    yield "angular constants vs quadrature", worst, 1e-10


def cmd_validate(args) -> int:
    config = load_config(args)
    try:
        quad_tol = args.quad_rel_tol if args.quad_rel_tol is not None else min(1e-12, args.tol)
        settings = QuadratureSettings(rel_tol=quad_tol)
    except JointSNRError as exc:
        raise UsageError(str(exc)) from None
    ok = True
    print(f"{'check':<40} {'max error':>12} {'tolerance':>10}  result")
    checks = validation_checks(config, args.tol, settings)
    while True:
        try:
            name, err, tol = next(checks)
        except StopIteration:
            break
        except QuadratureError as exc:
            print(f"{'quadrature':<40} {'-':>12} {'-':>10}  FAIL ({exc})")
            ok = False
            break
        passed = err <= tol
        ok &= passed
        print(f"{name:<40} {err:12.3e} {tol:10.1e}  {'PASS' if passed else 'FAIL'}")
    print("all checks passed" if ok else "validation FAILED")
    return EXIT_OK if ok else EXIT_FAIL


def sweep_csv(rows, paths: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(paths) + ["method", "trials"] + [c for c, _ in METRIC_COLUMNS])
    for point, summary in rows:
        for method, metrics in summary.methods.items():
            writer.writerow(
                [_fmt(point[p]) for p in paths]
                + [method, _fmt(summary.trials)]
                + [_fmt(getattr(metrics, attr)) for _, attr in METRIC_COLUMNS]
            )
    return buf.getvalue()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def cmd_simulate(args) -> int:
    config = load_config(args)
    if args.single:
        sweep = []
    else:
        sweep = parse_sweep(args.sweep) if args.sweep else DEFAULT_SWEEP
    try:
        for path, values in sweep:
            for value in values:
                with_param(config, path, value)
    except JointSNRError as exc:
        raise UsageError(f"invalid sweep: {exc}") from None
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    started = _now()
    try:
        rows = run_sweep(config, sweep, threads=args.threads)
    except JointSNRError as exc:
        raise UsageError(f"invalid configuration: {exc}") from None
    text = sweep_csv(rows, [p for p, _ in sweep])
    out = Path(args.out)
    manifest = {
        "tool": "jointsnr",
        "version": __version__,
        "command": "simulate",
        "config": config.to_dict(),
        "seed": config.seed,
        "sweep": [[p, v] for p, v in sweep],
        "threads": args.threads,
        "started": started,
        "finished": _now(),
        "outputs": {"csv": str(out)},
    }
    try:
        out.write_text(text)
        manifest_path(out).write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(rows)} sweep point(s) to {out}")
    return EXIT_OK


def read_observations(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read data file {path}: {exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for token in line.split():
            try:
                x = float(token)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: not a number: {token!r}") from None
            if not math.isfinite(x):
                raise UsageError(f"{path}:{lineno}: non-finite value {token!r}")
            values.append(x)
    if not values:
        raise UsageError(f"{path}: no observations")
    return np.array(values)


def cmd_estimate(args) -> int:
    config = load_config(args)
    y = read_observations(args.data)
    try:
        cfg = ExperimentConfig.from_dict(config.to_dict() | {"vector_len": len(y), "methods": [args.method]})
        stat = sufficient_statistic(y)
        rep = detect(args.method, stat, cfg.priors, cfg.costs)
    except JointSNRError as exc:
        raise UsageError(f"precondition violated: {exc}") from None
    record = {
        "method": args.method,
        "decision": "gamma1" if rep.decision == GAMMA1 else "gamma0",
        "s_hat": float(rep.s_hat),
        "v_hat": float(rep.v_hat),
        "log_lambda1": float(rep.glr.log_lambda1),
        "log_lambda0": float(rep.glr.log_lambda0),
        "n": stat.n,
        "t": float(stat.t),
    }
    print(json.dumps(record))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointsnr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--vector-len", dest="vector_len", type=int)

    p = sub.add_parser("validate", help="check closed forms against quadrature")
    common(p)
    p.add_argument("--tol", type=float, default=1e-8, help="relative tolerance for moment agreement and prior mass")
    p.add_argument(
        "--quad-rel-tol",
        type=float,
        help="relative tolerance requested from the quadrature (default: min(1e-12, --tol))",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run the Monte Carlo comparison")
    common(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--sweep", action="append", default=[], help='grid axis, e.g. "noise_prior.beta0=0.5,1,2"')
    p.add_argument("--single", action="store_true", help="run the configuration once without a sweep")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="detect and estimate on a data file")
    common(p)
    p.add_argument("data", help="whitespace-separated observations")
    p.add_argument("--method", choices=METHODS, default=JOINT)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
