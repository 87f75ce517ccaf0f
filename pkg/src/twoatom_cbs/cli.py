"""Command-line parameter sweeps and verification runs.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .averaging import AverageSpec
from .model import Configuration, DriveParams
from .observables import (
    CbsPoint,
    averaged_intensities,
    cbs_point,
    elastic_analytic,
    theta_profile,
)
from .oracle import oracle_report
from .perturbation import BatchSolver

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
UNITS_LINE = "# units: intensities in |g(r_mean)|^2; rates in gamma"
S_COLUMNS = ["s", "L_tot", "C_tot0", "I_tot", "L_el", "C_el", "L_inel", "C_inel",
             "alpha", "alpha_err"]
THETA_COLUMNS = ["theta", "C_tot", "C_tot_err", "L_tot"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    sweep: str = "s"
    grid_min: float = 1e-4
    grid_max: float = 1e3
    grid_count: int = 50
    log: bool = True
    delta: float = 0.0
    s: float = 1.0
    average: AverageSpec = field(default_factory=AverageSpec)
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.sweep not in ("s", "theta"):
            raise ValueError(f"sweep must be 's' or 'theta', got {self.sweep!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.format!r}")
        if self.grid_count < 2:
            raise ValueError("grid count must be >= 2")
        if not self.grid_min < self.grid_max:
            raise ValueError("grid min must be below grid max")
        if self.sweep == "s" and self.grid_min <= 0:
            raise ValueError("s-grid minimum must be positive")
        if self.sweep == "theta" and max(abs(self.grid_min), abs(self.grid_max)) > 0.1:
            raise ValueError("theta grid must lie within +-0.1 rad")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def grid(self) -> np.ndarray:
        if self.log and self.sweep == "s":
            return np.geomspace(self.grid_min, self.grid_max, self.grid_count)
        return np.linspace(self.grid_min, self.grid_max, self.grid_count)


def _point(args) -> CbsPoint:
    s, delta, spec = args
    try:
        return cbs_point(DriveParams.from_saturation(s, delta), spec)
    except Exception as exc:  # annotate and re-raise for the sweep
        raise SweepError(f"s={s:g}: {exc}") from exc


def sweep_s(config: RunConfig) -> list[CbsPoint]:
    """One ``CbsPoint`` per grid value of s, in grid order."""
    tasks = [(float(s), config.delta, config.average) for s in config.grid()]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_point, tasks))
    return [_point(t) for t in tasks]


def sweep_theta(config: RunConfig) -> list[dict]:
    """Crossed term versus observation angle at fixed ``config.s``."""
    thetas = config.grid()
    params = DriveParams.from_saturation(config.s, config.delta)
    try:
        crossed, err, ladder = theta_profile(params, thetas, config.average)
    except Exception as exc:
        raise SweepError(f"s={config.s:g}: {exc}") from exc
    return [dict(theta=float(t), C_tot=float(c), C_tot_err=float(e), L_tot=ladder)
            for t, c, e in zip(thetas, crossed, err)]


def point_row(p: CbsPoint) -> dict:
    return dict(s=p.s, L_tot=p.L_tot, C_tot0=p.C_tot, I_tot=p.I_tot, L_el=p.L_el,
                C_el=p.C_el, L_inel=p.L_inel, C_inel=p.C_inel, alpha=p.alpha,
                alpha_err=p.errors["alpha"])


@dataclass
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def verify(config: RunConfig, b_sign: float = 1.0) -> list[Check]:
    """Run the invariant checks; ``b_sign != 1`` corrupts the coupling (mutation hook)."""
    spec = config.average
    checks = []

    eq13, recip = 0.0, 0.0
    for d in (0.0, 1.0):
        for s in (0.01, 1 / 3, 1.0, 10.0, 100.0):
            params = DriveParams.from_saturation(s, d)
            _, _, l_el, c_el = averaged_intensities(
                params, spec, solver=BatchSolver(params, b_sign=b_sign))
            ref = elastic_analytic(s, d * d)
            eq13 = max(eq13, abs(l_el / ref - 1), abs(c_el / ref - 1))
            recip = max(recip, abs(l_el - c_el) / abs(l_el))
    checks.append(Check("elastic closed form (max rel. dev.)", eq13, 1e-6))
    checks.append(Check("elastic reciprocity L_el = C_el (max rel. dev.)", recip, 1e-10))

    rng = np.random.default_rng(spec.seed)
    worst = 0.0
    for s, d in ((0.1, 0.0), (1.0, 1.0), (10.0, 0.0)):
        n = rng.standard_normal(3)
        config_ = Configuration.from_vector(n / np.linalg.norm(n) * rng.uniform(30.0, 60.0))
        rep = oracle_report(DriveParams.from_saturation(s, d), config_, integrate=False)
        for k, v in rep.perturbative_coeffs.items():
            worst = max(worst, abs(rep.richardson_coeffs[k] - v) / abs(v))
    checks.append(Check("oracle: perturbative vs Richardson (max rel. err.)", worst, 1e-4))

    doubled = replace(spec, n_orient=2 * spec.n_orient, n_radial=2 * spec.n_radial)
    conv = 0.0
    for s in (0.1, 1.0, 10.0):
        params = DriveParams.from_saturation(s, config.delta)
        solver = BatchSolver(params, b_sign=b_sign)
        a = averaged_intensities(params, spec, solver=solver)
        b = averaged_intensities(params, doubled, solver=solver)
        conv = max(conv, abs(a[0] / b[0] - 1), abs(a[1] / b[1] - 1))
    checks.append(Check("quadrature convergence under doubling (max rel. change)", conv, 1e-3))
    return checks


def _fmt(x) -> str:
    return repr(float(x))


def render(config: RunConfig, rows: list[dict], columns: list[str]) -> str:
    if config.format == "json":
        doc = dict(schema_version=SCHEMA_VERSION, config=asdict(config), rows=rows)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(UNITS_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) if not isinstance(row[c], str) else row[c]
                         for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cbs-sim", description=(
        "Coherent backscattering of intense light by two atoms: sweeps over the "
        "saturation parameter or the observation angle, and a verification run."))
    p.add_argument("--sweep", choices=("s", "theta"), default="s")
    p.add_argument("--verify", action="store_true", help="run the invariant checks instead")
    p.add_argument("--s-min", type=float, default=1e-4)
    p.add_argument("--s-max", type=float, default=1e3)
    p.add_argument("--s-points", type=int, default=50)
    p.add_argument("--log", action=argparse.BooleanOptionalAction, default=True,
                   help="logarithmic s grid (default)")
    p.add_argument("--s", type=float, default=1.0, help="saturation for the theta sweep")
    p.add_argument("--theta-max", type=float, default=0.02)
    p.add_argument("--theta-points", type=int, default=21)
    p.add_argument("--delta", type=float, default=0.0, help="detuning in units of gamma")
    p.add_argument("--r-mean", type=float, default=1000.0, help="mean k0 r12")
    p.add_argument("--window", type=float, default=0.5, help="radial half-width in wavelengths")
    p.add_argument("--n-orient", type=int, default=128)
    p.add_argument("--n-radial", type=int, default=16)
    p.add_argument("--n-samples", type=int, default=None, help="monte-carlo sample count")
    p.add_argument("--mode", choices=("quad", "mc"), default="quad")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--corrupt-coupling", action="store_true", help=argparse.SUPPRESS)
    return p


def config_from_args(args) -> RunConfig:
    average = AverageSpec(
        r_mean=args.r_mean, window=args.window, n_orient=args.n_orient,
        n_radial=args.n_radial, mode={"quad": "quadrature", "mc": "monte-carlo"}[args.mode],
        seed=args.seed, n_samples=args.n_samples,
    )
    if args.sweep == "theta":
        grid = dict(grid_min=-args.theta_max, grid_max=args.theta_max,
                    grid_count=args.theta_points, log=False)
    else:
        grid = dict(grid_min=args.s_min, grid_max=args.s_max,
                    grid_count=args.s_points, log=args.log)
    return RunConfig(sweep=args.sweep, delta=args.delta, s=args.s, average=average,
                     out=args.out, format=args.format, workers=args.workers, **grid)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"cbs-sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.verify:
            checks = verify(config, b_sign=-1.0 if args.corrupt_coupling else 1.0)
            rows = [dict(check=c.name, value=c.value, tolerance=c.tolerance,
                         passed=str(c.passed)) for c in checks]
            for c in checks:
                print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: "
                      f"{c.value:.3e} (tol {c.tolerance:.0e})", file=sys.stderr)
            if config.out:
                _emit(render(config, rows, ["check", "value", "tolerance", "passed"]),
                      config.out)
            failures = sum(not c.passed for c in checks)
            return EXIT_VERIFY if failures else EXIT_OK
        if config.sweep == "s":
            rows = [point_row(p) for p in sweep_s(config)]
            text = render(config, rows, S_COLUMNS)
        else:
            text = render(config, sweep_theta(config), THETA_COLUMNS)
    except (SweepError, np.linalg.LinAlgError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"cbs-sim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(text, config.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
