"""Certified lower bounds for Sidon constants of finite character sets.

For a polynomial f with spectrum in J, sum |c| / ||f||_inf <= Sid(J) <= sqrt(|J|).
The lower bound is only trustworthy if ||f||_inf is bounded from above, so
every ratio here divides by a grid certificate, never by a raw grid maximum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .indexsets import IndexSet
from .integrate import TrigPolynomial, block_rng, get_jobs

MAX_DIM = 4
MAX_GRID_POINTS = 1 << 26
AUTO_GRID_POINTS = 1 << 22
SLACK = 1e-3


@dataclass(frozen=True)
class SupCertificate:
    bound: float
    grid_max: float
    grid: int


@dataclass(frozen=True)
class SidonEstimate:
    lower: float
    upper: float
    witness: TrigPolynomial
    sup_certificate: float
    grid: int = 0
    candidates: int = 0

    def to_dict(self) -> dict:
        c = self.witness.coefficients
        return {
            "lower": self.lower,
            "upper": self.upper,
            "sup_certificate": self.sup_certificate,
            "grid": self.grid,
            "candidates": self.candidates,
            "witness_support": self.witness.support.elements.tolist(),
            "witness_coefficients": [[float(z.real), float(z.imag)] for z in c],
        }


def _shifted(P: TrigPolynomial) -> np.ndarray:
    el = P.support.elements
    return el - el.min(axis=0)


def total_degree(P: TrigPolynomial) -> int:
    """Largest |alpha|_1 after moving every axis to start at 0."""
    return int(_shifted(P).sum(axis=1).max())


def min_grid(P: TrigPolynomial) -> int:
    return 4 * (1 + total_degree(P))


def grid_values(P: TrigPolynomial, grid: int) -> np.ndarray:
    """|P| at the points k/grid (k in Z^d) by one zero-padded inverse FFT."""
    d = P.dim
    shift = _shifted(P)
    if shift.max() >= grid:
        raise ValueError("grid too coarse: exponents would alias")
    spec = np.zeros((grid,) * d, dtype=complex)
    np.add.at(spec, tuple(shift.T), P.coefficients)
    return np.abs(np.fft.ifftn(spec)) * float(grid) ** d


def certify(P: TrigPolynomial, grid: int) -> SupCertificate:
    """Upper bound for sup|P| from a uniform grid.

    With beta the centre of the support, S = sum|c|, L1 = 2pi sum|c| |alpha-beta|,
    L2 = 4pi^2 sum|c| |alpha-beta|^2 and h the half grid diagonal:
    first order   M <= g + h L1,
    second order  M^2 <= g^2 + h^2 (L1^2 + M L2), using grad|P|^2 = 0 at the maximiser.
    The smaller of the two is returned, plus a floating point margin.
    """
    d = P.dim
    if d > MAX_DIM:
        raise ValueError(f"grid certification is limited to dimension <= {MAX_DIM}")
    if grid < min_grid(P):
        raise ValueError(f"grid must be >= {min_grid(P)} (4 * (1 + total degree))")
    if float(grid) ** d > MAX_GRID_POINTS:
        raise ValueError(f"grid {grid}^{d} exceeds {MAX_GRID_POINTS} points")
    c = np.abs(P.coefficients)
    S = float(c.sum())
    if len(c) == 1:
        return SupCertificate(S, S, grid)
    g = float(grid_values(P, grid).max())
    el = P.support.elements.astype(float)
    centre = 0.5 * (el.min(axis=0) + el.max(axis=0))
    r = np.sqrt(((el - centre) ** 2).sum(axis=1))
    L1 = 2 * math.pi * float(c @ r)
    L2 = 4 * math.pi**2 * float(c @ (r * r))
    h = 0.5 * math.sqrt(d) / grid
    first = g + h * L1
    a = h * h * L2
    second = 0.5 * (a + math.sqrt(a * a + 4 * (g * g + (h * L1) ** 2)))
    roundoff = 8 * np.finfo(float).eps * S * (1 + d * math.log2(grid))
    return SupCertificate(min(first, second) + roundoff, g, grid)


def sup_norm_certified(P: TrigPolynomial, grid: int | None = None) -> float:
    """Certified upper bound on ||P||_inf; ``grid`` points per axis (auto if None)."""
    if grid is None:
        return auto_certify(P).bound
    return certify(P, grid).bound


def auto_certify(P: TrigPolynomial, slack: float = SLACK) -> SupCertificate:
    """Refine a power-of-two grid until the certificate is within ``slack`` of the grid max."""
    d = P.dim
    G = 1 << max(2, math.ceil(math.log2(min_grid(P))))
    best = certify(P, G)
    while best.bound > (1 + slack) * best.grid_max and float(2 * G) ** d <= AUTO_GRID_POINTS:
        G *= 2
        cert = certify(P, G)
        if cert.bound < best.bound:
            best = cert
    return best


def shapiro_coefficients(k: int) -> np.ndarray:
    """±1 coefficients of the level-k Shapiro polynomial (2^k of them)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    p = np.ones(1, dtype=np.int64)
    q = np.ones(1, dtype=np.int64)
    for _ in range(k):
        p, q = np.concatenate([p, q]), np.concatenate([p, -q])
    return p


def shapiro_polynomial(k: int) -> TrigPolynomial:
    """P_k with P_{j+1} = P_j + z^(2^j) Q_j, Q_{j+1} = P_j - z^(2^j) Q_j, P_0 = Q_0 = 1."""
    c = shapiro_coefficients(k)
    support = IndexSet(1, np.arange(len(c)).reshape(-1, 1))
    return TrigPolynomial(support, c.astype(complex))


def _contiguous_1d(J: IndexSet) -> bool:
    if J.dim != 1:
        return False
    e = J.elements[:, 0]
    return int(e[-1] - e[0]) + 1 == len(e)


def _shapiro_on(J: IndexSet) -> np.ndarray:
    k = max(0, math.ceil(math.log2(len(J))))
    return shapiro_coefficients(k)[: len(J)].astype(complex)


def _candidate(J: IndexSet, kind: str, rng: np.random.Generator) -> np.ndarray:
    n = len(J)
    if kind == "gauss":
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if kind == "signs":
        return rng.choice(np.array([-1.0, 1.0]), size=n).astype(complex)
    # perturbed Shapiro: flip a few signs and jitter the phases
    c = _shapiro_on(J)
    flips = rng.random(n) < 2.0 / n
    c = np.where(flips, -c, c)
    return c * np.exp(0.1j * rng.standard_normal(n))


def _plan(J: IndexSet, budget: int) -> list[str]:
    if _contiguous_1d(J):
        n_gauss = budget // 2
        n_signs = budget // 4
        kinds = ["gauss"] * n_gauss + ["signs"] * n_signs
        return kinds + ["shapiro"] * (budget - n_gauss - n_signs)
    # no Shapiro structure: its share goes to sign patterns
    n_gauss = budget // 2
    return ["gauss"] * n_gauss + ["signs"] * (budget - n_gauss)


def _ratio(P: TrigPolynomial, grid: int | None) -> tuple[float, SupCertificate]:
    cert = auto_certify(P) if grid is None else certify(P, grid)
    return P.abs_coef_sum() / cert.bound, cert


def sidon_bounds(J: IndexSet, budget: int = 64, grid: int | None = None, seed: int = 0) -> SidonEstimate:
    """upper = sqrt|J|; lower = best certified sum|c| / ||f||_inf over a candidate family.

    Candidate 0 is a single character (ratio exactly 1). For one-dimensional
    contiguous J the Shapiro polynomial on J comes next, then ``budget``
    random candidates. The maximum ratio wins; ties go to the lower index.
    """
    if len(J) == 0:
        raise ValueError("empty character set")
    upper = math.sqrt(len(J))
    single = TrigPolynomial(IndexSet(J.dim, J.elements[:1]))
    trivial = SidonEstimate(1.0, upper, single, 1.0, 0, 1)
    if budget <= 0 or J.dim > MAX_DIM or len(J) == 1:
        return trivial

    polys: list[TrigPolynomial] = []
    if _contiguous_1d(J):
        polys.append(TrigPolynomial(J, _shapiro_on(J)))
    for i, kind in enumerate(_plan(J, budget)):
        polys.append(TrigPolynomial(J, _candidate(J, kind, block_rng(seed, i))))

    jobs = min(get_jobs(), len(polys))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda P: _ratio(P, grid), polys))
    else:
        results = [_ratio(P, grid) for P in polys]

    best = trivial
    for P, (ratio, cert) in zip(polys, results):
        if ratio > best.lower:
            best = SidonEstimate(ratio, upper, P, cert.bound, cert.grid, 0)
    return SidonEstimate(best.lower, upper, best.witness, best.sup_certificate, best.grid,
                         len(polys) + 1)
