"""Finite sets of multi-indices (characters of the torus) and their counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, isqrt
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import numtheory

FAMILIES = (
    "lambda_exact",
    "lambda_le",
    "j_exact",
    "j_le",
    "box",
    "sphere",
    "delta_x",
    "n1_lift",
    "ninf_lift",
    "custom",
)

DEFAULT_CAP = 10**8


class ParameterError(ValueError):
    pass


class CardinalityError(MemoryError):
    """Predicted set size above the configured cap."""


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Duplicate-free set of integer vectors, stored sorted lexicographically.

    ``elements`` has shape (N, dim), dtype int64.
    """

    dim: int
    elements: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.elements, dtype=np.int64).reshape(-1, self.dim)
        if len(arr):
            arr = np.unique(arr, axis=0)
        arr.flags.writeable = False
        object.__setattr__(self, "elements", arr)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        for row in self.elements:
            yield tuple(int(v) for v in row)

    def __contains__(self, alpha) -> bool:
        a = np.asarray(alpha, dtype=np.int64)
        if a.shape != (self.dim,):
            return False
        return bool(np.any(np.all(self.elements == a, axis=1)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash((self.dim, self.elements.tobytes()))

    def as_set(self) -> set[tuple[int, ...]]:
        return set(self)

    @property
    def is_analytic(self) -> bool:
        return bool(np.all(self.elements >= 0))

    def max_order(self) -> int:
        """max |alpha| = sum |alpha_j| over the set."""
        if not len(self):
            return 0
        return int(np.abs(self.elements).sum(axis=1).max())

    def axis_ranges(self) -> list[np.ndarray]:
        return [np.unique(self.elements[:, j]) for j in range(self.dim)]

    def is_box(self) -> bool:
        """True if the set is the full product of its coordinate projections."""
        size = 1
        for r in self.axis_ranges():
            size *= len(r)
        return size == len(self)

    def to_lines(self) -> list[str]:
        tag = " ".join(f"{k}={_fmt_param(v)}" for k, v in self.params.items())
        head = f"# dim={self.dim} family={self.family} params={tag or '-'}"
        return [head] + [" ".join(str(int(v)) for v in row) for row in self.elements]

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.to_lines()) + "\n")

    @classmethod
    def load(cls, path) -> "IndexSet":
        with open(path) as fh:
            return cls.from_lines(fh.read().splitlines())

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "IndexSet":
        dim = None
        family = "custom"
        rows = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("dim="):
                        dim = int(tok[4:])
                    elif tok.startswith("family="):
                        family = tok[7:]
                continue
            rows.append([int(t) for t in line.split()])
        if dim is None:
            if not rows:
                raise ParameterError("index set file has neither header nor rows")
            dim = len(rows[0])
        if any(len(r) != dim for r in rows):
            raise ParameterError(f"every row must have {dim} entries")
        if family not in FAMILIES:
            family = "custom"
        return cls(dim, np.asarray(rows, dtype=np.int64).reshape(-1, dim), family, {})


def _fmt_param(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def cardinality_lambda1(m: int, n: int) -> int:
    """|Lambda_1(m, n)| = binom(n + m - 1, m); exact Python integers."""
    if m < 0 or n < 1:
        raise ParameterError("need m >= 0, n >= 1")
    return comb(n + m - 1, m)


@lru_cache(maxsize=None)
def _ball_count(r2: int, n: int) -> int:
    if n == 1:
        return 2 * isqrt(r2) + 1
    total = 0
    for a in range(isqrt(r2) + 1):
        c = _ball_count(r2 - a * a, n - 1)
        total += c if a == 0 else 2 * c
    return total


def lattice_count(m: int, n: int, cap: int | None = None) -> int:
    """Number of alpha in Z^n with sum alpha_j^2 <= m^2."""
    if n < 1 or m < 0:
        raise ParameterError("need n >= 1, m >= 0")
    count = _ball_count(m * m, n)
    if cap is not None and count > cap:
        raise CardinalityError(f"|J_2(<={m},{n})| = {count} exceeds cap {cap}")
    return count


# -- enumeration ------------------------------------------------------------


def _norm_parts(p) -> str:
    if p in (1, "1"):
        return "1"
    if p in (2, "2"):
        return "2"
    if p in ("inf", "oo", math.inf, "∞"):
        return "inf"
    raise ParameterError(f"unsupported p={p!r}; use 1, 2 or inf")


def _coord_budget(kind: str, m: int) -> int:
    return m * m if kind == "2" else m


def _cost(kind: str, a: int) -> int:
    a = abs(a)
    return a * a if kind == "2" else a


def _enum(kind: str, m: int, n: int, signed: bool, exact: bool) -> Iterator[tuple[int, ...]]:
    """Vectors with ||alpha||_p <= m (or == m); p encoded by ``kind``."""
    budget = _coord_budget(kind, m)

    def rec(prefix: list[int], used: int, left: int):
        if left == 0:
            if kind == "inf":
                ok = (max((abs(v) for v in prefix), default=0) == m) if exact else True
            else:
                ok = (used == budget) if exact else True
            if ok:
                yield tuple(prefix)
            return
        if kind == "inf":
            lo, hi = (-m if signed else 0), m
            rng = range(lo, hi + 1)
        else:
            rest = budget - used
            top = isqrt(rest) if kind == "2" else rest
            rng = range(-top if signed else 0, top + 1)
        for a in rng:
            cost = 0 if kind == "inf" else _cost(kind, a)
            if kind != "inf" and exact and left == 1 and used + cost != budget:
                continue
            prefix.append(a)
            yield from rec(prefix, used + cost, left - 1)
            prefix.pop()

    yield from rec([], 0, n)


def _predict(kind: str, m: int, n: int, signed: bool) -> int:
    """Cardinality of the <= m ball (upper bound for the == m shell)."""
    if kind == "inf":
        return (2 * m + 1 if signed else m + 1) ** n
    if kind == "1":
        if not signed:
            return comb(n + m, m)
        # |J_1(<=m, n)| = sum_k 2^k binom(n,k) binom(m,k)
        return sum(2**k * comb(n, k) * comb(m, k) for k in range(min(n, m) + 1))
    return lattice_count(m, n)


def _check_cap(pred: int, cap: int | None):
    cap = DEFAULT_CAP if cap is None else cap
    if pred > cap:
        raise CardinalityError(f"predicted cardinality {pred} exceeds cap {cap}")


def generate(family: str, cap: int | None = None, **params) -> IndexSet:
    """Build one of the named index families.

    lambda_exact/lambda_le/j_exact/j_le take p (1, 2 or 'inf'), m, n;
    box takes d (sequence); sphere takes m, n; delta_x takes x;
    n1_lift takes m, x; ninf_lift takes m, n; custom takes elements (and dim).
    """
    if family in ("lambda_exact", "lambda_le", "j_exact", "j_le"):
        kind = _norm_parts(params.get("p", 1))
        m, n = int(params["m"]), int(params["n"])
        if m < 0 or n < 1:
            raise ParameterError("need m >= 0, n >= 1")
        signed = family.startswith("j")
        exact = family.endswith("exact")
        _check_cap(_predict(kind, m, n, signed), cap)
        rows = list(_enum(kind, m, n, signed, exact))
        return IndexSet(n, np.asarray(rows, dtype=np.int64).reshape(-1, n), family,
                        {"p": kind, "m": m, "n": n})
    if family == "sphere":
        m, n = int(params["m"]), int(params["n"])
        _check_cap(lattice_count(m, n), cap)
        rows = list(_enum("2", m, n, True, False))
        return IndexSet(n, np.asarray(rows, dtype=np.int64).reshape(-1, n), family, {"m": m, "n": n})
    if family == "box":
        d = [int(v) for v in params["d"]]
        if any(v < 0 for v in d):
            raise ParameterError("box degrees must be >= 0")
        pred = math.prod(2 * v + 1 for v in d)
        _check_cap(pred, cap)
        grids = np.meshgrid(*[np.arange(-v, v + 1) for v in d], indexing="ij")
        rows = np.stack([g.ravel() for g in grids], axis=1)
        return IndexSet(len(d), rows, family, {"d": d})
    if family == "ninf_lift":
        m, n = int(params["m"]), int(params["n"])
        _check_cap((m + 1) ** n, cap)
        grids = np.meshgrid(*[np.arange(0, m + 1)] * n, indexing="ij")
        rows = np.stack([g.ravel() for g in grids], axis=1)
        return IndexSet(n, rows, family, {"m": m, "n": n})
    if family == "delta_x":
        x = int(params["x"])
        if x < 1:
            raise ParameterError("need x >= 1")
        _check_cap(x, cap)
        dim = max(numtheory.prime_pi(x), 1)
        return IndexSet(dim, lift_integers(range(1, x + 1), dim), family, {"x": x})
    if family == "n1_lift":
        m, x = int(params["m"]), int(params["x"])
        dim = numtheory.prime_pi(x)
        nums = numtheory.n1_numbers(m, x)
        _check_cap(len(nums), cap)
        return IndexSet(dim, lift_integers(nums, dim), family, {"m": m, "x": x})
    if family == "custom":
        elements = np.asarray(params["elements"], dtype=np.int64)
        dim = int(params.get("dim", elements.shape[-1] if elements.ndim > 1 else 1))
        _check_cap(len(elements), cap)
        return IndexSet(dim, elements.reshape(-1, dim), family, {})
    raise ParameterError(f"unknown family {family!r}")


def lift_integers(nums: Iterable[int], dim: int) -> np.ndarray:
    """Rows bohr_lift(n, dim) for each n, built from the smallest-prime-factor table."""
    nums = [int(n) for n in nums]
    out = np.zeros((len(nums), dim), dtype=np.int64)
    if not nums:
        return out
    top = max(nums)
    if top <= numtheory.SIEVE.bound:
        spf = numtheory.SIEVE.spf_table(top)
        primes = numtheory.SIEVE.primes_up_to(top)
        pos = np.zeros(top + 1, dtype=np.int64)
        pos[primes] = np.arange(len(primes))
        for i, n in enumerate(nums):
            while n > 1:
                p = int(spf[n])
                j = pos[p]
                if j >= dim:
                    raise numtheory.DimensionError(f"prime {p} needs dimension >= {j + 1}")
                out[i, j] += 1
                n //= p
        return out
    for i, n in enumerate(nums):
        out[i] = numtheory.bohr_lift(n, dim)
    return out


def nums_from_lift(index_set: IndexSet) -> list[int]:
    """Inverse Bohr lift: p^alpha for every (non-negative) element."""
    primes = numtheory.nth_primes(index_set.dim)
    out = []
    for alpha in index_set:
        v = 1
        for p, a in zip(primes, alpha):
            if a < 0:
                raise ParameterError("inverse lift needs non-negative exponents")
            v *= p**a
        out.append(v)
    return out


def ninf_numbers(m: int, n: int) -> list[int]:
    """N_inf(<=m, n): the integers p^alpha with alpha in {0..m}^n, ascending."""
    return sorted(nums_from_lift(generate("ninf_lift", m=m, n=n)))
