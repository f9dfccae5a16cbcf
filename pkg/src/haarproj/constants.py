"""Closed forms, exact products and reference curves for projection constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from . import kernels
from .quadrature import QuadratureError, integrate_panels

LOZINSKI_SLOPE = 4.0 / math.pi**2
KST_COMPLEX = math.sqrt(math.pi) / 2.0
KST_REAL = math.sqrt(2.0 / math.pi)
BESSEL_TOL = 1e-10


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    source: str = ""

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid bracket [{self.lo}, {self.hi}]")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


def proj_l2_complex(n: int) -> float:
    """(sqrt(pi)/2) n! / Gamma(n + 1/2), via log-Gamma."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return KST_COMPLEX * math.exp(math.lgamma(n + 1) - math.lgamma(n + 0.5))


def proj_l2_real(n: int) -> float:
    """(2/sqrt(pi)) Gamma((n+2)/2) / Gamma((n+1)/2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 / math.sqrt(math.pi) * math.exp(math.lgamma((n + 2) / 2) - math.lgamma((n + 1) / 2))


def proj_l1_real(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return proj_l2_real(n if n % 2 else max(n - 1, 1)) if n > 1 else 1.0


def kadets_snobar(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(n)


def lewis_deficit(n: int) -> float:
    """sqrt(n) - lewis_bound(n) = sqrt(n) n^-2 5^-(2n+11), computed in log space."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.exp(0.5 * math.log(n) - 2 * math.log(n) - (2 * n + 11) * math.log(5.0))


def lewis_bound(n: int) -> float:
    """sqrt(n) (1 - n^-2 (1/5)^(2n+11)).

    From n = 6 on the correction is below double resolution and the value
    rounds to sqrt(n); use lewis_deficit for the gap itself.
    """
    return math.sqrt(n) - lewis_deficit(n)


# -- Bessel integral for the complex l1 constant ------------------------------


def j0_series(t) -> np.ndarray:
    """J0 - 1 by its ascending series; accurate for |t| <= 2 without cancellation."""
    t = np.asarray(t, dtype=float)
    q = -(t * t) / 4.0
    term = q.copy()
    total = term.copy()
    for k in range(2, 30):
        term = term * q / (k * k)
        total = total + term
    return total


def _log_j0(t: np.ndarray) -> np.ndarray:
    small = t <= 2.0
    out = np.empty_like(t)
    out[small] = np.log1p(j0_series(t[small]))
    out[~small] = np.log(special.j0(t[~small]))
    return out


def _bessel_integrand(n: int):
    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        near = t < 2.0
        tn = t[near]
        # 1 - J0^n = -expm1(n log J0): no cancellation near t = 0
        out[near] = -np.expm1(n * _log_j0(tn)) / (tn * tn)
        tf = t[~near]
        out[~near] = (1.0 - special.j0(tf) ** n) / (tf * tf)
        return out

    return f


def _tail_bound(n: int, T: float) -> float:
    # int_T^inf |J0|^n / t^2 with |J0(t)| <= sqrt(2 / (pi t))
    a = n / 2.0
    return (2.0 / math.pi) ** a * T ** (-(a + 1)) / (a + 1)


def _cutoff(n: int, tol: float) -> float:
    a = n / 2.0
    # solve (2/pi)^a T^-(a+1) / (a+1) = tol
    log_t = (a * math.log(2 / math.pi) - math.log(a + 1) - math.log(tol)) / (a + 1)
    return max(40.0, math.exp(log_t))


@lru_cache(maxsize=None)
def proj_l1_complex(n: int) -> float:
    """lambda(l_1^n(C)) = int_0^inf (1 - J0(t)^n) / t^2 dt.

    Integrated to T_cut; beyond it the "1/t^2" part is exactly 1/T_cut and the
    J0^n part is bounded by the decay envelope of J0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tol = BESSEL_TOL
    T = _cutoff(n, tol / 2)
    s = 1.0 / math.sqrt(n)
    head = [0.0] + [s * 2.0**k for k in range(-4, 8) if s * 2.0**k < 20.0] + [20.0]
    body = np.arange(20.0, T, math.pi / 2)
    pts = np.unique(np.concatenate([head, body, [T]]))
    per_panel = tol / 4 / len(pts)
    val, err = integrate_panels(_bessel_integrand(n), pts, tol=per_panel)
    tail = _tail_bound(n, T)
    if tail > tol:
        raise QuadratureError("Bessel tail bound above tolerance", tail)
    return val + 1.0 / T


def bessel_integral_bound(n: int) -> float:
    """A-priori truncation bound used by proj_l1_complex."""
    return _tail_bound(n, _cutoff(n, BESSEL_TOL / 2))


# -- brackets and product formulas -------------------------------------------


def lambda2_bracket(N: int, C2: float, source: str = "lambda2") -> Bracket:
    """[sqrt(N)/C2, sqrt(N)] for N distinct characters with Lambda(2) constant C2."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if C2 < 1:
        raise ValueError("a Lambda(2) constant is at least 1")
    r = math.sqrt(N)
    return Bracket(r / C2, r, source)


def omega_bracket(N: int, omega: int) -> Bracket:
    """Bracket for supports inside Lambda_1(<= omega): C2 = sqrt(2^omega)."""
    return lambda2_bracket(N, math.sqrt(2.0**omega), f"lambda1(<={omega})")


def proj_box_exact(d: Sequence[int], analytic: bool = False) -> float:
    """prod_j L_{d_j} (signed box I_d) or prod_j L^+_{d_j} (analytic box)."""
    if any(v < 0 for v in d):
        raise ValueError("degrees must be >= 0")
    fn = kernels.lebesgue_Lplus if analytic else kernels.lebesgue_L
    return math.prod(fn(int(v)) for v in d)


def proj_product(axis_sets: Sequence[Sequence[int]]) -> float:
    """prod_j int_T |sum_{k in I_j} z^k| for a product set I_1 x ... x I_n."""
    out = 1.0
    for ks in axis_sets:
        ks = sorted(int(k) for k in ks)
        lo, hi = ks[0], ks[-1]
        if ks == list(range(lo, hi + 1)):
            out *= kernels.lebesgue_Lplus(hi - lo)
        else:
            out *= kernels.circle_l1(ks)
    return out


# -- reference curves --------------------------------------------------------


def _loglog(x: float) -> float:
    if x <= math.e:
        raise ValueError("curve needs x > e (log log x > 0)")
    return math.log(math.log(x))


def reference_curve(name: str, x: float, **params) -> float:
    """Named asymptotic reference curves.

    lozinski: (4/pi^2) log(x+1); harper: sqrt(x)/(log log x)^(1/4);
    logp: (sqrt(pi)/2) sqrt(x); landau (m): (x/log x)(log log x)^(m-1)/(m-1)!;
    babenko (n): x^((n-1)/2); limit_formula (n): (4/pi^2)^n log^n x.
    """
    if name == "lozinski":
        if x < 0:
            raise ValueError("x must be >= 0")
        return LOZINSKI_SLOPE * math.log(x + 1)
    if name == "harper":
        return math.sqrt(x) / _loglog(x) ** 0.25
    if name == "logp":
        if x < 0:
            raise ValueError("x must be >= 0")
        return KST_COMPLEX * math.sqrt(x)
    if name == "landau":
        m = int(params.get("m", 1))
        if m < 1:
            raise ValueError("m must be >= 1")
        ll = _loglog(x)
        return x / math.log(x) * ll ** (m - 1) / math.factorial(m - 1)
    if name == "babenko":
        n = int(params["n"])
        if x <= 0:
            raise ValueError("x must be > 0")
        return x ** ((n - 1) / 2)
    if name == "limit_formula":
        n = int(params["n"])
        if x <= 1:
            raise ValueError("x must be > 1")
        return (LOZINSKI_SLOPE * math.log(x)) ** n
    raise ValueError(f"unknown reference curve {name!r}")


CURVES = ("lozinski", "harper", "logp", "landau", "babenko", "limit_formula")
