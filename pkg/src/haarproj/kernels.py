"""Dirichlet kernels D_m, D_m^+ and their L1 norms (Lebesgue constants).

L_m and L_m^+ are computed by panel-wise Gauss-Kronrod quadrature with
breakpoints at the zeros of the kernel, where |D| has its kinks. Between kinks
the integrand is analytic, so each panel converges at once.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .quadrature import integrate_panels

TWO_PI = 2.0 * math.pi
SMALL_SIN = 1e-8
PANEL_TOL = 1e-12

Kind = Literal["symmetric", "analytic"]


@dataclass(frozen=True)
class KernelSpec:
    m: int
    kind: Kind = "symmetric"

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("degree must be non-negative")
        if self.kind not in ("symmetric", "analytic"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def _explicit_sum(m: int, t, lo: int) -> np.ndarray:
    k = np.arange(lo, m + 1)
    return np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), k)).sum(axis=-1)


def kernel_eval(spec: KernelSpec, t):
    """D_m(t) (real) or D_m^+(t) (complex) at t in radians."""
    t = np.asarray(t, dtype=float)
    m = spec.m
    s = np.sin(0.5 * t)
    near = np.abs(s) < SMALL_SIN
    safe = np.where(near, 1.0, s)
    if spec.kind == "symmetric":
        val = np.sin((m + 0.5) * t) / safe
        if np.any(near):
            val = np.where(near, _explicit_sum(m, t, -m).real, val)
    else:
        val = np.exp(-0.5j * m * t) * np.sin(0.5 * (m + 1) * t) / safe
        if np.any(near):
            val = np.where(near, _explicit_sum(m, t, 0), val)
    return val[()] if val.ndim == 0 else val


def _abs_ratio(freq: float):
    # |sin(freq * t) / sin(t / 2)| on (0, pi]
    def f(t):
        return np.abs(np.sin(freq * t) / np.sin(0.5 * t))

    return f


def _half_period_integral(freq: float) -> float:
    """(1/pi) * int_0^pi |sin(freq t)/sin(t/2)| dt with kinks at k*pi/freq."""
    nk = int(math.floor(freq - 1e-12))  # zeros strictly inside (0, pi)
    kinks = np.arange(0, nk + 1) * (math.pi / freq)
    pts = np.append(kinks, math.pi)
    val, err = integrate_panels(_abs_ratio(freq), pts, tol=PANEL_TOL)
    return val / math.pi


_memo: dict[tuple[str, int], float] = {}
_memo_lock = threading.Lock()


def _memoized(kind: str, m: int, compute) -> float:
    key = (kind, m)
    got = _memo.get(key)
    if got is not None:
        return got
    val = compute()
    with _memo_lock:
        _memo[key] = val
    return val


def lebesgue_L(m: int) -> float:
    """L_m = (1/2pi) int_0^{2pi} |D_m(t)| dt."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 1.0
    return _memoized("symmetric", m, lambda: _half_period_integral(m + 0.5))


def lebesgue_Lplus(m: int) -> float:
    """L_m^+ = (1/2pi) int_0^{2pi} |D_m^+(t)| dt; |D_m^+(t)| = |sin((m+1)t/2) / sin(t/2)|."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 1.0
    return _memoized("analytic", m, lambda: _half_period_integral(0.5 * (m + 1)))


def lebesgue_batch(ms: Sequence[int], kind: Kind = "symmetric") -> np.ndarray:
    fn = lebesgue_L if kind == "symmetric" else lebesgue_Lplus
    return np.array([fn(int(m)) for m in ms])


# -- arbitrary finite subsets of Z ----------------------------------------


def _unit_circle_kinks(exps: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    """Angles in (0, 2pi) where sum c_k e^{ikt} may vanish."""
    lo = int(exps.min())
    deg = int(exps.max()) - lo
    if deg == 0:
        return np.zeros(0)
    poly = np.zeros(deg + 1, dtype=complex)
    np.add.at(poly, exps - lo, coefs)
    # numpy.roots wants highest degree first
    roots = np.roots(poly[::-1])
    near = np.abs(np.abs(roots) - 1.0) < 1e-6
    ang = np.mod(np.angle(roots[near]), TWO_PI)
    return np.sort(ang)


def circle_l1(exps: Sequence[int], coefs: Sequence[complex] | None = None) -> float:
    """(1/2pi) int_0^{2pi} |sum_k c_k e^{ikt}| dt for a finite set of integers k.

    Breakpoints: numerically located zeros on the unit circle plus a uniform
    grid fine enough to resolve the oscillation at the top frequency.
    """
    exps = np.asarray(list(exps), dtype=np.int64)
    if len(exps) == 0:
        raise ValueError("empty support")
    if coefs is None:
        coefs = np.ones(len(exps), dtype=complex)
    coefs = np.asarray(coefs, dtype=complex)
    if len(exps) == 1:
        return float(abs(coefs[0]))
    shift = exps - exps.min()
    deg = int(shift.max())

    def f(t):
        return np.abs(np.exp(1j * np.multiply.outer(t, shift)) @ coefs)

    kinks = _unit_circle_kinks(exps, coefs)
    grid = np.linspace(0.0, TWO_PI, 4 * deg + 1)
    pts = np.unique(np.concatenate([grid, kinks]))
    val, _ = integrate_panels(f, pts, tol=PANEL_TOL)
    return val / TWO_PI
