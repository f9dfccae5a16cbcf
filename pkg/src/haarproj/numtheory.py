"""Prime sieving, factorization and the Bohr lift n -> alpha with n = p^alpha.

Everything here is exact integer arithmetic. A smallest-prime-factor table is
built lazily (and grown on demand) up to ``Sieve.bound``; integers above the
table are factored by trial division.
"""

from __future__ import annotations

import math
import os
import threading
from bisect import bisect_right
from dataclasses import dataclass
from math import isqrt

import numpy as np

DEFAULT_BOUND = 10**7


class DimensionError(ValueError):
    """A multi-index dimension too small to house a prime factor."""


@dataclass(frozen=True)
class Factorization:
    n: int
    exponents: tuple[int, ...]

    def value(self) -> int:
        out = 1
        for p, a in zip(nth_primes(len(self.exponents)), self.exponents):
            out *= p**a
        return out


def _trial_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for q in (f, f + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class Sieve:
    """Smallest-prime-factor table on [0, size).

    The table only ever grows, and each growth step swaps in complete arrays,
    so readers never observe a half-built table.
    """

    def __init__(self, bound: int = DEFAULT_BOUND):
        self.bound = int(bound)
        self._lock = threading.Lock()
        self._spf = np.zeros(2, dtype=np.int64)
        self._primes = np.zeros(0, dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self._spf)

    def ensure(self, n: int) -> None:
        """Make the table cover 0..n (clamped to the bound)."""
        n = min(int(n), self.bound)
        if n < self.size:
            return
        with self._lock:
            if n < self.size:
                return
            target = max(n + 1, 2 * self.size, 1 << 12)
            target = min(target, self.bound + 1)
            spf = _load_cached(target)
            if spf is None:
                spf = _build_spf(target)
                _store_cached(spf)
            primes = np.flatnonzero(spf[2:] == np.arange(2, target)) + 2
            self._primes = primes.astype(np.int64)
            self._spf = spf

    def spf(self, n: int) -> int:
        if n < 2:
            raise ValueError("spf undefined below 2")
        self.ensure(n)
        if n < self.size:
            return int(self._spf[n])
        return min(_trial_factor(n))

    def spf_table(self, n: int) -> np.ndarray:
        """Read-only view of the table on 0..n (n must not exceed the bound)."""
        if n > self.bound:
            raise ValueError(f"table bound {self.bound} below requested {n}")
        self.ensure(n)
        view = self._spf[: n + 1]
        view.flags.writeable = False
        return view

    def primes_up_to(self, x: int) -> np.ndarray:
        if x <= self.bound:
            self.ensure(x)
            return self._primes[: np.searchsorted(self._primes, x, side="right")]
        # beyond the table: extend by segmented trial division, rarely needed
        base = list(self.primes_up_to(self.bound))
        tail = [q for q in range(self.bound + 1, x + 1) if _is_prime_trial(q)]
        return np.asarray(base + tail, dtype=np.int64)

    def factor(self, n: int) -> dict[int, int]:
        if n < 1:
            raise ValueError("n must be positive")
        if n > self.bound:
            return _trial_factor(n)
        self.ensure(n)
        spf = self._spf
        out: dict[int, int] = {}
        while n > 1:
            p = int(spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out


def _is_prime_trial(q: int) -> bool:
    if q < 2:
        return False
    for d in range(2, isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def _build_spf(size: int) -> np.ndarray:
    spf = np.arange(size, dtype=np.int64)
    for p in range(2, isqrt(size - 1) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, size, p)
            block[mask] = p
    return spf


def _cache_path(size: int) -> str | None:
    root = os.environ.get("HAAR_CACHE_DIR")
    if not root:
        return None
    return os.path.join(root, f"spf-{size}.npy")


def _load_cached(size: int) -> np.ndarray | None:
    path = _cache_path(size)
    if path is None or not os.path.exists(path):
        return None
    try:
        arr = np.load(path)
    except (OSError, ValueError):
        return None
    return arr if arr.shape == (size,) else None


def _store_cached(spf: np.ndarray) -> None:
    path = _cache_path(len(spf))
    if path is None:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = f"{path[:-4]}.{os.getpid()}.tmp.npy"
    np.save(tmp, spf)
    os.replace(tmp, path)


SIEVE = Sieve()


def primes_up_to(x: int) -> list[int]:
    if x < 1:
        raise ValueError("x must be >= 1")
    return [int(p) for p in SIEVE.primes_up_to(x)]


def prime_pi(x: int) -> int:
    if x < 1:
        raise ValueError("x must be >= 1")
    return len(SIEVE.primes_up_to(x))


def _largest_needed_prime(dim: int) -> int:
    # p_k < k (log k + log log k) for k >= 6
    if dim < 6:
        return 13
    return int(dim * (math.log(dim) + math.log(math.log(dim)))) + 1


def nth_primes(dim: int) -> list[int]:
    """The first ``dim`` primes."""
    if dim == 0:
        return []
    return primes_up_to(_largest_needed_prime(dim))[:dim]


def factorize(n: int) -> Factorization:
    fac = SIEVE.factor(n)
    if not fac:
        return Factorization(n, ())
    pmax = max(fac)
    dim = prime_pi(pmax)
    return Factorization(n, tuple(bohr_lift(n, dim)))


def bohr_lift(n: int, dim: int) -> tuple[int, ...]:
    """Exponent vector alpha (length ``dim``) with prod p_j^alpha_j = n."""
    if n < 1:
        raise ValueError("n must be positive")
    alpha = [0] * dim
    fac = SIEVE.factor(n)
    if not fac:
        return tuple(alpha)
    primes = SIEVE.primes_up_to(max(fac))
    for p, a in fac.items():
        j = int(np.searchsorted(primes, p))
        if j >= dim:
            raise DimensionError(f"prime {p} of {n} needs dimension >= {j + 1}, got {dim}")
        alpha[j] = a
    return tuple(alpha)


def big_omega(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return sum(SIEVE.factor(n).values())


def big_omega_table(x: int) -> np.ndarray:
    """Omega(n) for n = 0..x (entry 0 is 0 by convention)."""
    spf = SIEVE.spf_table(x)
    omega = np.zeros(x + 1, dtype=np.int64)
    rem = np.arange(x + 1, dtype=np.int64)
    rem[0] = 1
    live = rem > 1
    while live.any():
        idx = np.flatnonzero(live)
        rem[idx] //= spf[rem[idx]]
        omega[idx] += 1
        live[idx] = rem[idx] > 1
    return omega


def n1_numbers(m: int, x: int) -> list[int]:
    """All 1 <= n <= x with Omega(n) = m, ascending."""
    if m < 1 or x < 2:
        raise ValueError("need m >= 1 and x >= 2")
    omega = big_omega_table(x)
    return [int(v) for v in np.flatnonzero(omega == m) if v >= 1]


def prime_index(p: int) -> int:
    """Zero-based position of the prime p in 2, 3, 5, ..."""
    primes = SIEVE.primes_up_to(p)
    j = bisect_right(primes, p) - 1
    if j < 0 or primes[j] != p:
        raise ValueError(f"{p} is not prime")
    return j
