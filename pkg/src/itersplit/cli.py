"""Command-line driver for the splitting experiments.

Every subcommand writes a CSV table (or gnuplot data blocks with
``--gnuplot``) and exits with status 0 only if its built-in checks pass::

    itersplit example1 --out example1.csv
    itersplit transport --dt 0.05,0.025 --mode one-sided-b
    itersplit orders
    itersplit quadcheck --seed 7
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .analysis import leading_term_fit, observed_order
from .linalg import TimeGrid, expm
from .models import (
    MemoryClosure,
    TransportConfig,
    example1_exact,
    example1_problem,
    reference_solution,
    solve_transport,
)
from .quadrature import integrate, rule_coefficients
from .schemes import MODES, SCHEMES, IterativeConfig, SplitProblem, run_scheme, to_trajectory

__all__ = [
    "ExperimentConfig",
    "CommandResult",
    "cmd_example1",
    "cmd_transport",
    "cmd_orders",
    "cmd_quadcheck",
    "format_csv",
    "format_gnuplot",
    "main",
]

EXPERIMENTS = ("example1", "transport", "orders", "quadcheck")
BASELINES = ("lie", "swss", "strang")
# stop tolerance small enough that every run performs exactly `iters` sweeps
NEVER_STOP = np.finfo(float).tiny
# slack when checking that an error sequence does not increase
MONOTONE_SLACK = 1e-14

STANDARD_A = np.array([[0.0, 1.0], [0.0, 0.0]])
STANDARD_B = np.array([[0.0, 0.0], [1.0, 0.0]])
STANDARD_C0 = np.array([1.0, 1.0])

_DEFAULT_DTS = {
    "example1": [1.0, 0.5, 0.25, 0.125, 0.0625],
    "transport": [0.1, 0.05, 0.025],
    "orders": [0.1 / 2**k for k in range(7)],
    "quadcheck": [1.0],
}
_DEFAULT_ITERS = {"example1": 8, "transport": 6, "orders": 2, "quadcheck": 1}


@dataclass
class ExperimentConfig:
    """Settings of one CLI run; unset list fields take per-experiment defaults."""

    experiment: str = "example1"
    schemes: list[str] | None = None
    dts: list[float] | None = None
    iters: int | None = None
    modes: list[str] = field(default_factory=lambda: list(MODES))
    transport: dict = field(default_factory=dict)
    closure: str = "case1_moment"
    t_end: float = 1.0
    refinement: int = 16
    out: str | None = None
    seed: int = 0
    gnuplot: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.schemes is None:
            self.schemes = list(SCHEMES if self.experiment in ("example1", "transport") else BASELINES)
        if self.dts is None:
            self.dts = list(_DEFAULT_DTS[self.experiment])
        if self.iters is None:
            self.iters = _DEFAULT_ITERS[self.experiment]
        if not self.schemes or not self.dts:
            raise ValueError("scheme and dt lists must be nonempty")
        if any(not dt > 0 for dt in self.dts):
            raise ValueError("all dts must be positive")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown schemes {bad}")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ValueError(f"modes must be a nonempty subset of {MODES}")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        blob = {k: v for k, v in asdict(self).items() if k not in ("out", "gnuplot")}
        return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:12]


@dataclass
class CommandResult:
    header: tuple[str, ...]
    rows: list[tuple]
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


# ---------------------------------------------------------------- commands

def _iter_cfg(mode: str, k: int) -> IterativeConfig:
    return IterativeConfig(max_iters=k, eps=NEVER_STOP, mode=mode)


def _monotone_until_floor(errs: Sequence[float], band: float = 10.0) -> bool:
    """Nonincreasing up to the minimum; later entries stay within `band` x minimum."""
    k_min = int(np.argmin(errs))
    head = all(b <= a + MONOTONE_SLACK for a, b in zip(errs[: k_min + 1], errs[1: k_min + 1]))
    return head and all(e <= band * errs[k_min] + MONOTONE_SLACK for e in errs[k_min:])


def cmd_example1(cfg: ExperimentConfig) -> CommandResult:
    """Iterative and baseline errors for ``c' = (1 + t) c`` at ``t_end``."""
    exact = example1_exact(cfg.t_end)
    rows = []
    table: dict[tuple[str, float], list[float]] = {}
    for dt in cfg.dts:
        for scheme in cfg.schemes:
            if scheme != "iterative":
                tr = to_trajectory(run_scheme(example1_problem(dt, cfg.t_end), scheme))
                rows.append((scheme, "-", dt, 0, abs(tr.final[0] - exact)))
                continue
            for mode in cfg.modes:
                for k in range(1, cfg.iters + 1):
                    tr = to_trajectory(run_scheme(example1_problem(dt, cfg.t_end), "iterative", _iter_cfg(mode, k)))
                    err = abs(tr.final[0] - exact)
                    rows.append(("iterative", mode, dt, k, err))
                    table.setdefault((mode, dt), []).append(err)

    checks = []
    if table:
        dt_small = min(cfg.dts)
        best = min(cfg.modes, key=lambda m: table[(m, dt_small)][-1])
        if math.isclose(dt_small, 2.0**-4) and cfg.iters >= 8:
            e = table[(best, dt_small)][7]
            checks.append(("best mode error at dt=2^-4, 8 iterations <= 1e-5", e <= 1e-5, f"{best}: {e:.3e}"))
        mono = [(m, dt) for (m, dt), errs in table.items() if not _monotone_until_floor(errs)]
        checks.append(("errors decrease with iteration until a floor", not mono, f"violations: {mono}"))
        if cfg.iters >= 8 and len(cfg.dts) >= 2:
            finals = [table[(best, dt)][7] for dt in sorted(cfg.dts, reverse=True)]
            ratios = [a / b for a, b in zip(finals, finals[1:])]
            halving = all(r >= 4.0 for r in ratios)
            checks.append(("dt halving reduces iteration-8 error >= 4x", halving,
                           f"{best}: " + ", ".join(f"{r:.1f}" for r in ratios)))
    return CommandResult(("scheme", "mode", "dt", "iterations", "error"), rows, checks)


def _transport_parts(cfg: ExperimentConfig):
    tcfg = TransportConfig(**cfg.transport)
    closure = MemoryClosure(kind=cfg.closure)
    return tcfg, closure


def cmd_transport(cfg: ExperimentConfig) -> CommandResult:
    """Errors of the split transport solutions against an unsplit fine-step reference."""
    tcfg, closure = _transport_parts(cfg)
    rows = []
    table: dict[tuple[str, float], list[float]] = {}
    for dt in cfg.dts:
        grid = TimeGrid.from_step(0.0, cfg.t_end, dt)
        ref = reference_solution(tcfg, closure, grid, cfg.refinement)
        for scheme in cfg.schemes:
            if scheme != "iterative":
                tr = solve_transport(tcfg, closure, grid, scheme)
                rows.append((scheme, "-", dt, 0, float(np.max(np.abs(tr.final - ref.final)))))
                continue
            for mode in cfg.modes:
                for k in range(1, cfg.iters + 1):
                    tr = solve_transport(tcfg, closure, grid, "iterative", _iter_cfg(mode, k))
                    err = float(np.max(np.abs(tr.final - ref.final)))
                    rows.append(("iterative", mode, dt, k, err))
                    table.setdefault((mode, dt), []).append(err)

    checks = []
    if table:
        bad = [(m, dt) for (m, dt), errs in table.items()
               if any(b > a + MONOTONE_SLACK for a, b in zip(errs, errs[1:]))]
        checks.append(("iterative errors nonincreasing in iteration count", not bad, f"violations: {bad}"))
        if {"one_sided_A", "one_sided_B"} <= set(cfg.modes) and cfg.iters >= 4:
            worse = [(dt, k + 1) for dt in cfg.dts for k in range(3, cfg.iters)
                     if table[("one_sided_B", dt)][k] > table[("one_sided_A", dt)][k] + MONOTONE_SLACK]
            checks.append(("one_sided_B at least as accurate as one_sided_A for >= 4 iterations",
                           not worse, f"violations (dt, iters): {worse}"))
    # the hash also covers the quadrature settings that the config file cannot set
    quad = f"{closure.history_quad.name}/{closure.history_panels}"
    pinned = hashlib.sha256(f"{cfg.digest()}|{tcfg.digest()}|{quad}".encode()).hexdigest()[:12]
    notes = [f"config hash {pinned} (transport {tcfg.digest()}, history rule {quad})"]
    return CommandResult(("scheme", "mode", "dt", "iterations", "error"), rows, checks, notes)


def _global_error(A, B, c0, t_end, dt, scheme, mode="one_sided_A", iters=2):
    p = SplitProblem(A, B, c0, TimeGrid.from_step(0.0, t_end, dt))
    it = _iter_cfg(mode, iters) if scheme == "iterative" else None
    tr = to_trajectory(run_scheme(p, scheme, it))
    return float(np.max(np.abs(tr.final - expm(t_end * (A + B)) @ c0)))


_EXPECTED_ORDER = {"lie": 1.0, "swss": 2.0, "strang": 2.0}


def cmd_orders(cfg: ExperimentConfig) -> CommandResult:
    """Observed global orders and leading-term fits on fixed and random operator pairs."""
    rng = np.random.default_rng(cfg.seed)
    A_r, B_r, c_r = rng.standard_normal((3, 3)), rng.standard_normal((3, 3)), rng.standard_normal(3)
    pairs = {"standard": (STANDARD_A, STANDARD_B, STANDARD_C0), "random": (A_r, B_r, c_r)}
    fit_dts = [dt for dt in sorted(cfg.dts, reverse=True) if dt >= 1e-3][:4]

    rows, checks = [], []
    for pair, (A, B, c0) in pairs.items():
        for scheme in cfg.schemes:
            label = scheme if scheme != "iterative" else f"iterative-{cfg.iters}"
            errs = [(dt, _global_error(A, B, c0, cfg.t_end, dt, scheme, cfg.modes[0], cfg.iters))
                    for dt in cfg.dts]
            est = observed_order(errs, scheme)
            if est.exact:
                rows.append((label, pair, "max_error", max(e for _, e in errs), "exact"))
                continue
            rows.append((label, pair, "observed_order", est.observed_order, "ok"))
            if pair == "standard" and scheme in _EXPECTED_ORDER:
                ok = abs(est.observed_order - _EXPECTED_ORDER[scheme]) <= 0.15
                checks.append((f"{scheme} order {_EXPECTED_ORDER[scheme]:.0f} +- 0.15", ok,
                               f"{est.observed_order:.3f}"))
            if scheme in ("lie", "strang") and len(fit_dts) >= 2:
                fit = leading_term_fit(scheme, A, B, c0, fit_dts)
                rows.append((label, pair, "fit_constant", fit.constant, "ok"))
                rows.append((label, pair, "residual_order", fit.residual_order, "ok"))
                if pair == "standard":
                    need = 2.0 if scheme == "lie" else 3.0
                    checks.append((f"{scheme} leading-term constant 1 +- 0.1", abs(fit.constant - 1) <= 0.1,
                                   f"{fit.constant:.4f}"))
                    checks.append((f"{scheme} residual order >= {need:.0f}", fit.residual_order >= need,
                                   f"{fit.residual_order:.3f}"))

    A_d, B_d, c_d = np.diag([1.0, -2.0]), np.diag([-0.5, 0.75]), np.array([1.0, 2.0])
    for scheme in cfg.schemes:
        label = scheme if scheme != "iterative" else f"iterative-{cfg.iters}"
        err = max(_global_error(A_d, B_d, c_d, cfg.t_end, dt, scheme, cfg.modes[0], cfg.iters) for dt in cfg.dts)
        status = "exact" if err <= 1e-10 else "inexact"
        rows.append((label, "commuting", "max_error", err, status))
        if scheme in _EXPECTED_ORDER:
            checks.append((f"{scheme} exact on commuting pair", status == "exact", f"{err:.2e}"))
    return CommandResult(("scheme", "pair", "metric", "value", "status"), rows, checks)


def cmd_quadcheck(cfg: ExperimentConfig) -> CommandResult:
    """Degree of exactness on random polynomials and composite orders on exp(x)."""
    rng = np.random.default_rng(cfg.seed)
    rows, checks = [], []
    for degree in (1, 2, 3, 4):
        rule = rule_coefficients(degree)
        worst = 0.0
        for _ in range(50):
            coeffs = rng.uniform(-1, 1, rule.exactness + 1)
            a = float(rng.uniform(-1, 1))
            b = a + float(rng.uniform(0.1, 2))
            P = np.polynomial.Polynomial(coeffs)
            exact = P.integ()(b) - P.integ()(a)
            for panels in (1, 3):
                approx = integrate(P, a, b, rule, panels)
                worst = max(worst, abs(approx - exact) / max(abs(exact), 1.0))
        ok = worst < 1e-12
        rows.append((rule.name, f"exact_to_degree_{rule.exactness}", worst, "ok" if ok else "fail"))
        checks.append((f"{rule.name} exact to degree {rule.exactness}", ok, f"{worst:.1e}"))

        exact = math.e - 1.0
        errs = [(1.0 / p, abs(integrate(math.exp, 0.0, 1.0, rule, p) - exact)) for p in (1, 2, 4)]
        est = observed_order(errs, rule.name)
        nominal = rule.error_order - 1
        ok = abs(est.observed_order - nominal) <= 0.2
        rows.append((rule.name, "composite_order_exp", est.observed_order, "ok" if ok else "fail"))
        checks.append((f"{rule.name} composite order {nominal} +- 0.2", ok, f"{est.observed_order:.3f}"))
    return CommandResult(("rule", "test", "value", "status"), rows, checks)


COMMANDS = {
    "example1": cmd_example1,
    "transport": cmd_transport,
    "orders": cmd_orders,
    "quadcheck": cmd_quadcheck,
}


# ------------------------------------------------------------------ output

def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.5e}"
    return str(x)


def _sorted_rows(result: CommandResult):
    def key(row):
        return tuple((0, -x) if isinstance(x, (float, np.floating)) else (1, x) if isinstance(x, str) else (0, x)
                     for x in row[:-1])
    return sorted(result.rows, key=key)


def format_csv(result: CommandResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.header)
    for row in _sorted_rows(result):
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def format_gnuplot(result: CommandResult) -> str:
    """Whitespace-separated blocks, one per leading label group, two blank lines apart."""
    groups: dict[tuple, list] = {}
    for row in _sorted_rows(result):
        labels = tuple(x for x in row if isinstance(x, str))
        groups.setdefault(labels, []).append([x for x in row if not isinstance(x, str)])
    blocks = []
    for labels, data in groups.items():
        lines = ["# " + " ".join(labels)]
        lines += [" ".join(_cell(x) for x in r) for r in data]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


# --------------------------------------------------------------------- CLI

_HELP = {
    "example1": "iterative and baseline errors on the scalar test equation",
    "transport": "split transport solutions against a fine-step reference",
    "orders": "observed orders and leading-term fits",
    "quadcheck": "Newton-Cotes exactness and composite orders",
}
_MODE_FLAGS = {"one-sided-a": "one_sided_A", "one-sided-b": "one_sided_B", "alternating": "alternating"}


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _mode_list(text: str) -> list[str]:
    out = []
    for m in text.split(","):
        m = m.strip().lower()
        if m not in _MODE_FLAGS:
            raise argparse.ArgumentTypeError(f"mode must be one of {sorted(_MODE_FLAGS)}")
        out.append(_MODE_FLAGS[m])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itersplit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--dt", type=_float_list, help="comma-separated step sizes")
        p.add_argument("--scheme", type=lambda s: [x.strip() for x in s.split(",")],
                       help=f"comma-separated subset of {','.join(SCHEMES)}")
        p.add_argument("--iters", type=int, help="iteration cap for the iterative scheme")
        p.add_argument("--mode", type=_mode_list, help="one-sided-a, one-sided-b and/or alternating")
        p.add_argument("--seed", type=int, help="seed for random test operators")
        p.add_argument("--gnuplot", action="store_true", default=None,
                       help="emit whitespace-separated data blocks instead of CSV")
        if name == "transport":
            p.add_argument("--closure", choices=("case1_moment", "case2_history"))
            p.add_argument("--refinement", type=int, help="reference step is dt / refinement")
            for key in ("v", "D", "lambda1", "lambda2", "domain_length"):
                p.add_argument(f"--{key}", type=float, dest=f"t_{key}")
            p.add_argument("--n-points", type=int, dest="t_n_points")
            p.add_argument("--stencil", dest="t_stencil", choices=("upwind", "display", "in_text"))
        if name in ("example1", "transport", "orders"):
            p.add_argument("--t-end", type=float)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    data["experiment"] = args.experiment
    overrides = {"out": args.out, "dts": args.dt, "schemes": args.scheme, "iters": args.iters,
                 "modes": args.mode, "seed": args.seed, "gnuplot": args.gnuplot,
                 "closure": getattr(args, "closure", None), "refinement": getattr(args, "refinement", None),
                 "t_end": getattr(args, "t_end", None)}
    data.update({k: v for k, v in overrides.items() if v is not None})
    transport = dict(data.get("transport", {}))
    for key, value in vars(args).items():
        if key.startswith("t_") and key != "t_end" and value is not None:
            transport[key[2:]] = value
    data["transport"] = transport
    return ExperimentConfig.from_mapping(data)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(str(exc))
    try:
        result = COMMANDS[cfg.experiment](cfg)
    except ValueError as exc:
        # bad transport parameters or a dt that does not divide t_end
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    text = format_gnuplot(result) if cfg.gnuplot else format_csv(result)
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)

    for note in result.notes:
        print(note, file=sys.stderr)
    for name, ok, detail in result.checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}", file=sys.stderr)
    if not result.passed:
        failed = sum(not ok for _, ok, _ in result.checks)
        print(f"{failed} of {len(result.checks)} checks failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
