"""Command-line entry point: ``fracspec solve|sweep|eigenfunction|validate``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from fracspec.assembly import FractionalOrders
from fracspec.eigensolver import Spectrum, classify, compute_spectrum, is_real, region_labels
from fracspec.errors import FracspecError
from fracspec.fracops import Mesh
from fracspec.validation import perturbed_stiffness, run_validation

log = logging.getLogger("fracspec")

__all__ = [
    "EIGENFUNCTION_HEADER",
    "SPECTRUM_HEADER",
    "SWEEP_HEADER",
    "RunConfig",
    "cmd_eigenfunction",
    "cmd_solve",
    "cmd_sweep",
    "cmd_validate",
    "main",
]

SPECTRUM_HEADER = ("index", "re_lambda", "im_lambda", "residual", "is_real", "region", "cone_margin")
SWEEP_HEADER = ("alpha", "beta", "lambda1_re", "lambda1_im", "real_count", "cone_margin", "error")
EIGENFUNCTION_HEADER = ("x", "re_u", "im_u", "abs_u")

# values are rounded so that linspace noise never reaches the output
_DIGITS = 12


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> Range:
        try:
            lo, hi, steps = text.split(":")
            out = cls(float(lo), float(hi), int(steps))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {text!r}") from None
        if out.steps < 1 or (out.steps == 1 and out.lo != out.hi):
            raise argparse.ArgumentTypeError(f"need steps >= 2 for a nonempty range: {text!r}")
        return out

    def values(self) -> list[float]:
        return [round(float(v), _DIGITS) for v in np.linspace(self.lo, self.hi, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    a: float = 0.0
    b: float = 1.0
    n: int = 200
    alpha: float | None = None
    beta: float | None = None
    alpha_range: Range | None = None
    beta_range: Range | None = None
    sum_fixed: float | None = None
    diagonal: bool = False
    count: int = 0
    indices: tuple[int, ...] = (1,)
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    perturb: float = 0.0

    @property
    def mesh(self) -> Mesh:
        return Mesh(self.a, self.b, self.n)

    @property
    def orders(self) -> FractionalOrders:
        return FractionalOrders(self.alpha, self.beta)

    def validate(self) -> None:
        """Raise :class:`~fracspec.errors.DomainError` on an inconsistent config."""
        self.mesh
        if self.command in ("solve", "eigenfunction"):
            if self.alpha is None or self.beta is None:
                raise FracspecError(f"{self.command} needs --alpha and --beta")
            self.orders
        if self.command == "sweep":
            if self.alpha_range is None:
                raise FracspecError("sweep needs --alpha-range")
            modes = (self.beta_range is not None) + (self.sum_fixed is not None) + self.diagonal
            if modes != 1:
                raise FracspecError("sweep needs exactly one of --beta-range, --sum-fixed, --diagonal")
        if self.count < 0:
            raise FracspecError(f"--count must be nonnegative: {self.count}")

    def output(self, default: str) -> Path:
        path = Path(self.out or default)
        return path if path.suffix else path.with_suffix("." + self.format)


# {{{ writers


def _write_table(path: Path, header: Sequence[str], rows: list[list], fmt_name: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt_name == "json":
        records = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(records, indent=2) + "\n")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(fmt(v) if isinstance(v, float) else v for v in row)


def _suffixed(path: Path, index: int) -> Path:
    return path.with_name(f"{path.stem}_j{index}{path.suffix}")


def _eigenfunction_rows(spectrum: Spectrum, j: int) -> list[list]:
    mesh = spectrum.mesh
    u = np.zeros(mesh.n + 1, dtype=complex)
    u[1:-1] = spectrum.vector(j)
    return [
        [float(x), float(z.real), float(z.imag), float(abs(z))] for x, z in zip(mesh.nodes, u)
    ]


# }}}


# {{{ commands


def cmd_solve(config: RunConfig) -> list[Path]:
    spectrum = compute_spectrum(config.mesh, config.orders, seed=config.seed)
    report = classify(spectrum, config.orders)
    values = spectrum.values
    real = is_real(values)
    regions = region_labels(len(values))
    rows = [
        [j, float(z.real), float(z.imag), float(r), bool(ok), reg, report.cone_margin]
        for j, (z, r, ok, reg) in enumerate(
            zip(values, spectrum.residuals, real, regions), start=1
        )
    ]
    path = config.output("spectrum")
    _write_table(path, SPECTRUM_HEADER, rows, config.format)
    written = [path]

    summary = {**spectrum.summary(), **report.as_dict(), "failures": list(spectrum.failures)}
    report_path = path.with_name(f"{path.stem}_report.json")
    report_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(report_path)

    for j in range(1, min(config.count, len(spectrum)) + 1):
        p = _suffixed(path, j)
        _write_table(p, EIGENFUNCTION_HEADER, _eigenfunction_rows(spectrum, j), config.format)
        written.append(p)
    return written


def _sweep_points(config: RunConfig) -> list[tuple[float, float]]:
    alphas = config.alpha_range.values()
    if config.diagonal:
        pairs = [(a, a) for a in alphas]
    elif config.sum_fixed is not None:
        pairs = [(a, round(config.sum_fixed - a, _DIGITS)) for a in alphas]
    else:
        pairs = [(a, b) for a in alphas for b in config.beta_range.values()]

    feasible = []
    for alpha, beta in sorted(set(pairs)):
        if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0 and 1.0 <= alpha + beta <= 2.0):
            log.warning("skipping infeasible point alpha=%g beta=%g", alpha, beta)
            continue
        feasible.append((alpha, beta))
    return feasible


def _sweep_point(args: tuple[float, float, Mesh, int]) -> dict:
    alpha, beta, mesh, seed = args
    row = {"alpha": alpha, "beta": beta}
    try:
        orders = FractionalOrders(alpha, beta)
        spectrum = compute_spectrum(mesh, orders, seed=seed)
        report = classify(spectrum, orders)
    except (FracspecError, ArithmeticError, ValueError) as exc:
        return {**row, "error": f"{type(exc).__name__}: {exc}"}
    values = spectrum.values
    real = np.asarray(report.is_real)
    # last real eigenvalue of the leading run, before complex pairs begin
    lead = int(np.argmin(real)) if not real.all() else len(real)
    return {
        **row,
        "lambda1": values[0],
        "real_count": report.real_count,
        "cone_margin": report.cone_margin,
        "largest_real_before_complex": float(values[lead - 1].real) if lead else None,
        "error": "",
    }


def _workers() -> int:
    env = os.environ.get("FRACSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer FRACSPEC_THREADS=%r", env)
    return os.cpu_count() or 1


def cmd_sweep(config: RunConfig) -> list[Path]:
    points = _sweep_points(config)
    tasks = [(a, b, config.mesh, config.seed) for a, b in points]
    workers = min(_workers(), max(1, len(tasks)))
    if workers == 1:
        results = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))

    path = config.output("sweep")
    if config.format == "json":
        records = [
            {
                **{k: v for k, v in r.items() if k != "lambda1"},
                "lambda1_re": r["lambda1"].real if "lambda1" in r else None,
                "lambda1_im": r["lambda1"].imag if "lambda1" in r else None,
            }
            for r in results
        ]
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(records, indent=2) + "\n")
        return [path]

    rows = []
    for r in results:
        if r["error"]:
            rows.append([r["alpha"], r["beta"], "", "", "", "", r["error"]])
            continue
        lam = r["lambda1"]
        rows.append(
            [r["alpha"], r["beta"], float(lam.real), float(lam.imag), r["real_count"], r["cone_margin"], ""]
        )
    _write_table(path, SWEEP_HEADER, rows, "csv")
    return [path]


def cmd_eigenfunction(config: RunConfig) -> list[Path]:
    spectrum = compute_spectrum(config.mesh, config.orders, seed=config.seed)
    for j in config.indices:
        if not 1 <= j <= len(spectrum):
            raise FracspecError(f"eigenpair index {j} outside 1..{len(spectrum)}")
    path = config.output("eigenfunction")
    written = []
    for j in config.indices:
        p = _suffixed(path, j)
        _write_table(p, EIGENFUNCTION_HEADER, _eigenfunction_rows(spectrum, j), config.format)
        written.append(p)
    return written


def cmd_validate(config: RunConfig) -> tuple[bool, Path]:
    kwargs = {}
    if config.perturb:
        kwargs["stiffness"] = perturbed_stiffness(config.perturb, config.seed)
    report = run_validation(config.seed, **kwargs)
    for c in report.criteria:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.id:2d} {c.name}")
    path = config.output("validation")
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json())
    return report.passed, path


# }}}


# {{{ argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float, default=0.0, help="left endpoint (default 0)")
    common.add_argument("--b", type=float, default=1.0, help="right endpoint (default 1)")
    common.add_argument("--n", type=int, default=200, help="number of elements (default 200)")
    common.add_argument("--out", help="output path; the format suffix is added if missing")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0, help="seed for inverse-iteration start vectors")
    common.add_argument("-v", "--verbose", action="store_true")

    orders = argparse.ArgumentParser(add_help=False)
    orders.add_argument("--alpha", type=float, required=True, help="left derivative order")
    orders.add_argument("--beta", type=float, required=True, help="right derivative order")

    parser = argparse.ArgumentParser(
        prog="fracspec", description="Spectra of two-sided fractional operators by linear FEM."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, orders], help="compute and classify a spectrum")
    p.add_argument("--count", type=int, default=0, help="number of eigenvectors to export")

    p = sub.add_parser("sweep", parents=[common], help="principal eigenvalue over an (alpha, beta) grid")
    p.add_argument("--alpha-range", type=Range.parse, required=True, metavar="LO:HI:STEPS")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--beta-range", type=Range.parse, metavar="LO:HI:STEPS")
    mode.add_argument("--sum-fixed", type=float, metavar="S", help="beta = S - alpha")
    mode.add_argument("--diagonal", action="store_true", help="beta = alpha")

    p = sub.add_parser("eigenfunction", parents=[common, orders], help="export eigenfunction traces")
    p.add_argument("--index", type=int, nargs="+", default=[1], help="1-based eigenpair indices")

    p = sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def parse_config(argv: Sequence[str] | None = None) -> tuple[RunConfig, bool]:
    ns = build_parser().parse_args(argv)
    config = RunConfig(
        command=ns.command,
        a=ns.a,
        b=ns.b,
        n=ns.n,
        out=ns.out,
        format=ns.format,
        seed=ns.seed,
    )
    if ns.command in ("solve", "eigenfunction"):
        config = replace(config, alpha=ns.alpha, beta=ns.beta)
    if ns.command == "solve":
        config = replace(config, count=ns.count)
    if ns.command == "eigenfunction":
        config = replace(config, indices=tuple(ns.index))
    if ns.command == "sweep":
        config = replace(
            config,
            alpha_range=ns.alpha_range,
            beta_range=ns.beta_range,
            sum_fixed=ns.sum_fixed,
            diagonal=ns.diagonal,
        )
    if ns.command == "validate":
        config = replace(config, perturb=ns.perturb)
    return config, ns.verbose


def main(argv: Sequence[str] | None = None) -> int:
    config, verbose = parse_config(argv)
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config.validate()
    except (FracspecError, ValueError) as exc:
        print(f"fracspec: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        if config.command == "validate":
            passed, path = cmd_validate(config)
            print(f"report written to {path}")
            return 0 if passed else 1
        commands = {"solve": cmd_solve, "sweep": cmd_sweep, "eigenfunction": cmd_eigenfunction}
        for path in commands[config.command](config):
            print(path)
    except FracspecError as exc:
        print(f"fracspec {config.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


# }}}


if __name__ == "__main__":
    sys.exit(main())
