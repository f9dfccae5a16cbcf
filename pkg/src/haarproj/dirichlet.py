"""Spaces of Dirichlet polynomials sum_{n in J} a_n exp(-omega_n s) and their projection constants.

A frequency omega is either one of the named sequences (natural numbers, logs
of integers, logs of primes) or an explicit list of reals. Named frequencies
are realised on a finite torus through the Bohr transform; the projection
constant is then the L1 norm of the all-ones character sum over the lifted
support, computed by whichever engine is exact or cheapest for that shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import constants, kernels, numtheory
from .constants import Bracket
from .indexsets import IndexSet, lift_integers
from .integrate import IntegralEstimate, MCConfig, TrigPolynomial, ergodic_l1, l1_norm

KINDS = ("natural", "log_integers", "log_primes", "q_independent_explicit", "explicit")
METHODS = ("auto", "exact_kernel", "exact_product", "closed_form_l1", "mc", "qmc", "ergodic")
LIFTABLE = ("natural", "log_integers", "log_primes", "q_independent_explicit")


class UnsupportedFrequency(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Frequency:
    """A strictly increasing non-negative sequence omega_n.

    ``natural`` is indexed from n = 0, every other kind from n = 1. Explicit
    kinds store their values; ``b2`` is a user declaration that the
    characters form a B2 set, it is not checked.
    """

    kind: str
    values: np.ndarray | None = None
    b2: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown frequency kind {self.kind!r}")
        if self.kind in ("explicit", "q_independent_explicit"):
            if self.values is None:
                raise ValueError(f"{self.kind} frequency needs values")
            v = np.asarray(self.values, dtype=float).reshape(-1)
            if not np.all(np.isfinite(v)):
                raise ValueError("frequency values must be finite")
            if len(v) and v[0] < 0:
                raise ValueError("frequency values must be non-negative")
            if np.any(np.diff(v) <= 0):
                raise ValueError("frequency values must be strictly increasing")
            v.flags.writeable = False
            object.__setattr__(self, "values", v)
        elif self.values is not None:
            raise ValueError(f"{self.kind} frequency is derived, do not pass values")

    @property
    def first_index(self) -> int:
        return 0 if self.kind == "natural" else 1

    @property
    def last_index(self) -> int | None:
        if self.values is None:
            return None
        return len(self.values)

    def value(self, n: int) -> float:
        return float(self.at([n])[0])

    def at(self, indices: Sequence[int]) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if len(idx) and idx.min() < self.first_index:
            raise ValueError(f"{self.kind} frequency is indexed from {self.first_index}")
        if self.kind == "natural":
            return idx.astype(float)
        if self.kind == "log_integers":
            return np.log(idx.astype(float))
        if self.kind == "log_primes":
            top = int(idx.max()) if len(idx) else 1
            return np.log(np.asarray(numtheory.nth_primes(top), dtype=float)[idx - 1])
        if len(idx) and idx.max() > len(self.values):
            raise ValueError(f"frequency file has only {len(self.values)} values")
        return self.values[idx - 1]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Frequency":
        """Parse ``# frequency explicit [qindependent] [b2]`` followed by one real per line."""
        kind = "explicit"
        b2 = False
        vals = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                toks = line[1:].split()
                if toks[:1] == ["frequency"]:
                    if "qindependent" in toks:
                        kind = "q_independent_explicit"
                    b2 = "b2" in toks
                continue
            vals.append(float(line))
        return cls(kind, np.asarray(vals), b2)

    @classmethod
    def load(cls, path) -> "Frequency":
        with open(path) as fh:
            return cls.from_lines(fh)

    def to_lines(self) -> list[str]:
        if self.values is None:
            raise ValueError("only explicit frequencies are written to files")
        head = "# frequency explicit"
        if self.kind == "q_independent_explicit":
            head += " qindependent"
        if self.b2:
            head += " b2"
        return [head] + [repr(float(v)) for v in self.values]


@dataclass(frozen=True, eq=False)
class DirichletSpace:
    """H^J(omega): polynomials supported on the finite index set J."""

    frequency: Frequency
    support: tuple
    coefficients: Mapping[int, complex] | None = None

    def __post_init__(self):
        J = tuple(sorted({int(n) for n in self.support}))
        if not J:
            raise ValueError("support must be non-empty")
        self.frequency.at([J[0], J[-1]])  # domain check
        object.__setattr__(self, "support", J)
        if self.coefficients is not None:
            extra = set(int(k) for k in self.coefficients) - set(J)
            if extra:
                raise KeyError(f"coefficient keys outside the support: {sorted(extra)[:5]}")

    def __len__(self) -> int:
        return len(self.support)

    def frequencies(self) -> np.ndarray:
        return self.frequency.at(self.support)

    def coefficient_array(self) -> np.ndarray:
        if self.coefficients is None:
            return np.ones(len(self.support), dtype=complex)
        return np.array([complex(self.coefficients.get(n, 0)) for n in self.support])

    def omega(self) -> int:
        """max Omega(n) over the support (log_integers only)."""
        return max(numtheory.big_omega(n) for n in self.support)


@dataclass(frozen=True)
class ProjectionConstantResult:
    estimate: IntegralEstimate
    method: str
    torus_dim: int
    bracket: Bracket | None = None
    warning: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.estimate.value

    @property
    def stderr(self) -> float:
        return self.estimate.stderr

    def in_bracket(self, sigmas: float = 3.0) -> bool:
        if self.bracket is None:
            return True
        s = sigmas * self.stderr
        return self.bracket.lo - s <= self.value <= self.bracket.hi + s

    def to_dict(self) -> dict:
        out = self.estimate.to_dict()
        out.update(method=self.method, engine=self.estimate.method, torus_dim=self.torus_dim,
                   warning=self.warning)
        if self.bracket is not None:
            out.update(lambda_lo=self.bracket.lo, lambda_hi=self.bracket.hi,
                       bracket_source=self.bracket.source)
        out.update(self.extras)
        return out


def bohr_transform(space: DirichletSpace) -> IndexSet:
    """The torus support realising H^J(omega) isometrically."""
    kind = space.frequency.kind
    J = np.asarray(space.support, dtype=np.int64)
    if kind == "natural":
        return IndexSet(1, J.reshape(-1, 1), "custom", {})
    if kind == "log_integers":
        dim = max(numtheory.prime_pi(int(J[-1])), 1)
        return IndexSet(dim, lift_integers(J, dim), "custom", {})
    if kind in ("log_primes", "q_independent_explicit"):
        return IndexSet(len(J), np.eye(len(J), dtype=np.int64), "custom", {})
    raise UnsupportedFrequency("explicit frequency has no torus realisation; use the ergodic engine")


def _is_contiguous(J: Sequence[int]) -> bool:
    return J[-1] - J[0] + 1 == len(J)


def _bracket(space: DirichletSpace) -> Bracket | None:
    N = len(space)
    kind = space.frequency.kind
    if space.frequency.b2:
        return constants.lambda2_bracket(N, math.sqrt(2.0), "b2")
    if kind == "log_integers":
        return constants.omega_bracket(N, space.omega())
    if kind in ("log_primes", "q_independent_explicit"):
        return constants.omega_bracket(N, 1)
    return None


def _auto_method(space: DirichletSpace, lift: IndexSet | None) -> str:
    kind = space.frequency.kind
    if kind == "natural":
        return "exact_kernel"
    if kind in ("log_primes", "q_independent_explicit"):
        return "closed_form_l1"
    if kind == "log_integers":
        return "exact_product" if lift.is_box() else "qmc"
    return "ergodic"


def _sampled(P: TrigPolynomial, budget: MCConfig, rel_target: float | None) -> tuple[IntegralEstimate, str | None]:
    """Double the sample count from a small start until stderr <= rel_target * value."""
    if not rel_target:
        return l1_norm(P, budget), None
    cap = budget.samples
    n = min(cap, budget.blocks * 512)
    while True:
        est = l1_norm(P, replace(budget, samples=n))
        if est.stderr <= rel_target * est.value:
            return est, None
        if n >= cap:
            return est, (f"stderr {est.stderr:.3g} above target {rel_target:g} x value "
                         f"after {est.samples} samples")
        n = min(cap, 2 * n)


def projection_constant(
    space: DirichletSpace,
    method: str = "auto",
    budget: MCConfig | None = None,
    rel_target: float | None = 0.005,
    T: float = 1e4,
) -> ProjectionConstantResult:
    """lambda(H^J(omega)) = int |sum_{n in J} h_n| over the Bohr group.

    Coefficients on ``space`` are ignored: the constant belongs to the support.
    ``rel_target`` only applies to auto-routed sampling; a forced ``mc`` or
    ``qmc`` uses exactly ``budget.samples``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    budget = budget or MCConfig()
    kind = space.frequency.kind
    lift = bohr_transform(space) if kind in LIFTABLE else None
    chosen = _auto_method(space, lift) if method == "auto" else method
    torus_dim = lift.dim if lift is not None else 0
    warning = None
    J = space.support

    if chosen == "exact_kernel":
        if kind != "natural":
            raise UnsupportedFrequency("exact_kernel needs the natural frequency")
        val = kernels.lebesgue_Lplus(J[-1] - J[0]) if _is_contiguous(J) else kernels.circle_l1(J)
        est = IntegralEstimate(val, 0.0, 0, "exact")
    elif chosen == "closed_form_l1":
        if kind not in ("log_primes", "q_independent_explicit"):
            raise UnsupportedFrequency("closed_form_l1 needs a Q-independent frequency")
        est = IntegralEstimate(constants.proj_l1_complex(len(J)), 0.0, 0, "exact")
    elif chosen == "exact_product":
        if lift is None or not lift.is_box():
            raise UnsupportedFrequency("exact_product needs a box-shaped lift")
        est = IntegralEstimate(constants.proj_product(lift.axis_ranges()), 0.0, 0, "exact")
    elif chosen in ("mc", "qmc"):
        if lift is None:
            raise UnsupportedFrequency("sampling needs a torus realisation")
        P = TrigPolynomial(lift)
        if method == "auto":
            est, warning = _sampled(P, replace(budget, engine="qmc"), rel_target)
        else:
            est = l1_norm(P, replace(budget, engine=chosen))
    else:
        est = ergodic_l1(space, np.ones(len(J), dtype=complex), T=T)
    return ProjectionConstantResult(est, chosen, torus_dim, _bracket(space), warning)


def harper_integral(x: int, budget: MCConfig | None = None,
                    rel_target: float | None = 0.005) -> ProjectionConstantResult:
    """lambda of ordinary Dirichlet polynomials of length x, with growth ratios."""
    if x < 2:
        raise ValueError("x must be >= 2")
    space = DirichletSpace(Frequency("log_integers"), tuple(range(1, x + 1)))
    res = projection_constant(space, "auto", budget, rel_target)
    extras = {"x": x, "ratio_sqrt": res.value / math.sqrt(x)}
    extras["ratio_harper"] = res.value / constants.reference_curve("harper", x) if x > math.e else None
    return replace(res, extras=extras)
