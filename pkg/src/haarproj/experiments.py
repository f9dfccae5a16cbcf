"""Desk-scale experiments pairing computed projection constants with reference curves."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__, constants, numtheory
from .dirichlet import DirichletSpace, Frequency, harper_integral, projection_constant
from .indexsets import generate
from .integrate import MCConfig, TrigPolynomial, block_rng, l1_norm, l2_norm_exact

COLUMNS = ("x", "computed", "stderr", "reference", "ratio")


@dataclass(frozen=True)
class Row:
    x: float
    computed: float
    stderr: float
    reference: float
    ratio: float
    label: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be non-negative")


@dataclass
class ExperimentReport:
    name: str
    rows: list[Row]
    config: dict
    failures: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("an experiment report needs at least one row")

    @property
    def passed(self) -> bool:
        return not self.failures


def _row(x, computed, stderr, reference, **label) -> Row:
    ratio = computed / reference if reference else math.nan
    return Row(float(x), float(computed), float(stderr), float(reference), float(ratio), label)


# -- serialisation ----------------------------------------------------------


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def _dump(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_dump(str(k))}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def report_dict(report: ExperimentReport) -> dict:
    rows = []
    for r in report.rows:
        d = {c: getattr(r, c) for c in COLUMNS}
        d.update(r.label)
        rows.append(d)
    return {"name": report.name, "config": report.config, "rows": rows,
            "passed": report.passed, "failures": report.failures}


def render(report: ExperimentReport, fmt: str = "csv") -> str:
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    if fmt == "json":
        return _dump(report_dict(report)) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in report.rows:
        w.writerow([fmt_float(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def emit(report: ExperimentReport, fmt: str = "csv", path=None) -> str:
    text = render(report, fmt)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# -- experiments --------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    name: str
    anchor: str
    run: Callable[..., ExperimentReport]
    default_samples: int | None = None


def _budget(samples, seed, blocks, default) -> MCConfig:
    return MCConfig(samples=int(samples or default), seed=seed, blocks=blocks)


def _config(name, seed, samples, blocks, **params) -> dict:
    return {"name": name, "version": __version__, "seed": seed, "samples": samples,
            "blocks": blocks, "params": params}


def run_lozinski(seed=0, samples=None, blocks=32, xs=None) -> ExperimentReport:
    xs = xs or [2**j - 1 for j in range(2, 15)]
    rows, fails = [], []
    for x in xs:
        space = DirichletSpace(Frequency("natural"), range(0, x + 1))
        res = projection_constant(space)
        rows.append(_row(x, res.value, res.stderr, constants.reference_curve("lozinski", x)))
    gaps = [r.computed - r.reference for r in rows]
    for r, g in zip(rows, gaps):
        if abs(g) > 1.2:
            fails.append(f"x={r.x:g}: |gap| {abs(g):.6g} > 1.2")
    for (r0, g0), (r1, g1) in zip(zip(rows, gaps), zip(rows[1:], gaps[1:])):
        if abs(g1) > abs(g0) + 1e-9:
            fails.append(f"x={r1.x:g}: gap {g1:.12g} grew from {g0:.12g}")
    return ExperimentReport("lozinski", rows, _config("lozinski", seed, samples, blocks, xs=xs), fails)


def run_logp_limit(seed=0, samples=None, blocks=32, ns=None) -> ExperimentReport:
    ns = ns or [1, 2, 3, 5, 8, 10, 30, 100, 300, 1000, 3000, 10000]
    rows, fails = [], []
    for n in ns:
        space = DirichletSpace(Frequency("log_primes"), range(1, n + 1))
        res = projection_constant(space)
        rows.append(_row(n, res.value, 0.0, constants.reference_curve("logp", n)))
        if not res.in_bracket():
            fails.append(f"n={n}: outside [sqrt(n/2), sqrt(n)]")
    big = [r for r in rows if r.x >= 1000]
    for r in big:
        if abs(r.ratio - 1) > 0.05:
            fails.append(f"n={r.x:g}: ratio {r.ratio:.6g} not within 0.05 of 1")
    for r0, r1 in zip(big, big[1:]):
        if abs(r1.ratio - 1) >= abs(r0.ratio - 1):
            fails.append(f"n={r1.x:g}: ratio did not approach 1")
    return ExperimentReport("logp-limit", rows, _config("logp-limit", seed, samples, blocks, ns=ns), fails)


def run_harper(seed=0, samples=None, blocks=32, xs=None) -> ExperimentReport:
    xs = xs or [16, 64, 256, 1024, 4096]
    budget = _budget(samples, seed, blocks, 1 << 20)
    rows, fails = [], []
    for x in xs:
        res = harper_integral(x, budget, rel_target=None)
        rows.append(_row(x, res.value, res.stderr, constants.reference_curve("harper", x),
                         ratio_sqrt=res.extras["ratio_sqrt"]))
        if res.value > math.sqrt(x) + 3 * res.stderr:
            fails.append(f"x={x}: {res.value:.6g} above sqrt(x) + 3 sigma")
    for r0, r1 in zip(rows, rows[1:]):
        s0, s1 = r0.stderr / math.sqrt(r0.x), r1.stderr / math.sqrt(r1.x)
        slack = 2 * math.hypot(s0, s1)
        if r1.label["ratio_sqrt"] > r0.label["ratio_sqrt"] + slack:
            fails.append(f"x={r1.x:g}: value/sqrt(x) increased beyond 2 sigma")
    return ExperimentReport("harper", rows, _config("harper", seed, budget.samples, blocks, xs=xs), fails)


def run_babenko(seed=0, samples=None, blocks=32, ms=None, n=3) -> ExperimentReport:
    ms = ms or [4, 8, 16, 32]
    budget = _budget(samples, seed, blocks, 1 << 16)
    rows, fails = [], []
    for m in ms:
        est = l1_norm(TrigPolynomial(generate("sphere", m=m, n=n)), budget)
        rows.append(_row(m, est.value, est.stderr, constants.reference_curve("babenko", m, n=n)))
    ratios = [r.ratio for r in rows]
    if max(ratios) > 3 * min(ratios):
        fails.append(f"ratios {min(ratios):.6g}..{max(ratios):.6g} leave a factor-3 band")
    return ExperimentReport("babenko", rows,
                            _config("babenko", seed, budget.samples, blocks, ms=ms, n=n), fails)


def run_limit_formula(seed=0, samples=None, blocks=32, ms=None, n=2) -> ExperimentReport:
    ms = ms or [10, 100, 1000, 10000]
    rows, fails = [], []
    for m in ms:
        val = constants.proj_box_exact([m] * n)
        rows.append(_row(m, val, 0.0, constants.reference_curve("limit_formula", m, n=n)))
    for r in rows:
        if r.ratio <= 1:
            fails.append(f"m={r.x:g}: ratio {r.ratio:.6g} <= 1")
    for r0, r1 in zip(rows, rows[1:]):
        if r1.ratio >= r0.ratio:
            fails.append(f"m={r1.x:g}: ratio did not decrease")
    return ExperimentReport("limit-formula", rows,
                            _config("limit-formula", seed, samples, blocks, ms=ms, n=n), fails)


def landau_ratio(m: int, x: int) -> float:
    count = len(numtheory.n1_numbers(m, x))
    return count / constants.reference_curve("landau", x, m=m)


def run_landau(seed=0, samples=None, blocks=32, ms=None, xs=None) -> ExperimentReport:
    ms = ms or [1, 2, 3]
    xs = xs or [10**4, 10**5, 10**6]
    rows, fails = [], []
    for m in ms:
        for x in xs:
            count = len(numtheory.n1_numbers(m, x))
            rows.append(_row(x, count, 0.0, constants.reference_curve("landau", x, m=m), m=m))
    for r in rows:
        if r.x == 10**6 and r.label["m"] in (2, 3) and not 0.5 <= r.ratio <= 2:
            fails.append(f"m={r.label['m']}: ratio {r.ratio:.6g} outside [0.5, 2]")
    return ExperimentReport("landau", rows, _config("landau", seed, samples, blocks, ms=ms, xs=xs), fails)


def weissler_case(i: int, seed: int, max_n: int = 3, max_m: int = 3):
    """Random analytic polynomial of degree <= m in n variables with complex Gaussian coefficients."""
    rng = block_rng(seed, i)
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    J = generate("lambda_le", p=1, m=m, n=n)
    c = rng.standard_normal(len(J)) + 1j * rng.standard_normal(len(J))
    return n, m, TrigPolynomial(J, c)


def run_weissler(seed=0, samples=None, blocks=32, count=200) -> ExperimentReport:
    budget = _budget(samples, seed, blocks, 1 << 14)
    rows, fails = [], []
    for i in range(count):
        n, m, P = weissler_case(i, seed)
        l1 = l1_norm(P, budget)
        scale = math.sqrt(2.0**m)
        l2 = l2_norm_exact(P)
        rows.append(_row(i, l2, scale * l1.stderr, scale * l1.value, n=n, m=m))
        if l2 > scale * l1.value + 3 * scale * l1.stderr:
            fails.append(f"case {i} (n={n}, m={m}): ||P||_2 {l2:.6g} > sqrt(2^m) ||P||_1")
    return ExperimentReport("weissler", rows,
                            _config("weissler", seed, budget.samples, blocks, count=count), fails)


REGISTRY: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment("lozinski", "L+_x = (4/pi^2) log(x+1) + O(1) for the natural frequency", run_lozinski),
        Experiment("logp-limit", "lambda(l_1^n(C)) / sqrt(n) -> sqrt(pi)/2 for log-prime frequencies",
                   run_logp_limit),
        Experiment("harper", "ordinary Dirichlet polynomials of length x: lambda <= sqrt(x), growth below it",
                   run_harper, 1 << 20),
        Experiment("babenko", "Euclidean ball of radius m in Z^n: lambda ~ m^((n-1)/2)", run_babenko, 1 << 16),
        Experiment("limit-formula", "cube {|alpha_j| <= m}^n: lambda / ((4/pi^2) log m)^n -> 1",
                   run_limit_formula),
        Experiment("landau", "integers <= x with m prime factors ~ (x/log x)(log log x)^(m-1)/(m-1)!",
                   run_landau),
        Experiment("weissler", "||P||_2 <= sqrt(2^m) ||P||_1 for analytic P of degree m", run_weissler,
                   1 << 14),
    )
}


def run_experiment(name: str, **params) -> ExperimentReport:
    if name not in REGISTRY:
        raise KeyError(f"unknown experiment {name!r}; known: {', '.join(REGISTRY)}")
    return REGISTRY[name].run(**params)
