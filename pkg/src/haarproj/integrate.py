"""L1 / Lp norms of character sums on the torus, and ergodic time averages.

Torus integrals are estimated by Monte Carlo or by a randomly shifted rank-1
lattice rule. Work is split into ``blocks``: block b draws from its own
Philox stream keyed by (seed, b), so results depend only on (seed, blocks,
samples) and never on how many worker threads evaluate the blocks.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Mapping

import numba
import numpy as np

from .indexsets import IndexSet
from .quadrature import gauss_legendre_composite

TWO_PI = 2.0 * math.pi
LATTICE_BITS = 20
LATTICE_MAX = 1 << LATTICE_BITS
CHUNK_VALUES = 1 << 18

_jobs = 1


def set_jobs(n: int) -> None:
    """Cap on worker threads used by a single estimate (process-wide)."""
    global _jobs
    if n < 1:
        raise ValueError("jobs must be >= 1")
    _jobs = int(n)


def get_jobs() -> int:
    return _jobs


# -- data types -------------------------------------------------------------


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    stderr: float
    samples: int
    method: str
    seed: int = 0
    blocks: int = 1
    diagnostics: tuple = ()

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if self.method == "exact" and self.stderr != 0:
            raise ValueError("exact estimates carry zero stderr")

    @property
    def bracket_lo(self) -> float:
        return self.value - 3.0 * self.stderr

    @property
    def bracket_hi(self) -> float:
        return self.value + 3.0 * self.stderr

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "method": self.method,
            "seed": self.seed,
            "bracket_lo": self.bracket_lo,
            "bracket_hi": self.bracket_hi,
        }


@dataclass(frozen=True)
class MCConfig:
    samples: int = 1 << 16
    seed: int = 0
    blocks: int = 32
    engine: str = "qmc"
    control_variate: bool = False

    def __post_init__(self):
        if self.blocks < 1 or self.samples < self.blocks:
            raise ValueError("need samples >= blocks >= 1")
        if self.engine not in ("mc", "qmc"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.control_variate and self.blocks < 3:
            raise ValueError("control variate needs at least 3 blocks (one pilot)")
        if self.engine == "qmc" and self.samples // self.blocks > LATTICE_MAX:
            raise ValueError(f"qmc allows at most {LATTICE_MAX} points per shift")

    @property
    def per_block(self) -> int:
        return self.samples // self.blocks


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """sum_alpha c_alpha z^alpha over a finite support (all-ones by default)."""

    support: IndexSet
    coefficients: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.support)
        if n == 0:
            raise ValueError("empty support")
        c = self.coefficients
        if c is None:
            c = np.ones(n, dtype=complex)
        elif isinstance(c, Mapping):
            arr = np.zeros(n, dtype=complex)
            index = {alpha: i for i, alpha in enumerate(self.support)}
            for key, val in c.items():
                key = tuple(int(v) for v in np.atleast_1d(key))
                if key not in index:
                    raise KeyError(f"coefficient key {key} not in support")
                arr[index[key]] = val
            c = arr
        c = np.asarray(c, dtype=complex).reshape(n)
        if not np.any(c != 0):
            raise ValueError("at least one coefficient must be non-zero")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def dim(self) -> int:
        return self.support.dim

    @classmethod
    def from_terms(cls, dim: int, terms: Mapping) -> "TrigPolynomial":
        keys = [tuple(int(v) for v in np.atleast_1d(k)) for k in terms]
        support = IndexSet(dim, np.asarray(keys, dtype=np.int64).reshape(-1, dim))
        return cls(support, dict(zip(keys, terms.values())))

    def abs_coef_sum(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @cached_property
    def plan(self) -> "_Plan":
        return _Plan.build(self.support.elements, self.coefficients)


@dataclass(frozen=True)
class _Plan:
    """Evaluation order for z^alpha: each node is its parent times z_j^{+-1}.

    The node set is the support closed under moving the last non-zero
    coordinate one step toward zero; extra nodes carry coefficient 0.
    """

    coords: np.ndarray  # torus coordinates actually used
    parent: np.ndarray
    coord: np.ndarray  # index into coords
    step: np.ndarray  # +1 or -1
    coef: np.ndarray

    @classmethod
    def build(cls, elements: np.ndarray, coefficients: np.ndarray) -> "_Plan":
        used = np.flatnonzero(np.any(elements != 0, axis=0))
        rows = elements[:, used]
        d = rows.shape[1]
        zero = (0,) * d
        nodes: dict[tuple, int] = {zero: 0}
        keys: list[tuple] = [zero]
        par = [0]
        crd = [0]
        stp = [1]
        coef = [0j]
        pending = [tuple(int(v) for v in r) for r in rows]
        for key, c in zip(pending, coefficients):
            if key in nodes:
                coef[nodes[key]] += c
                continue
            chain = []
            cur = key
            while cur not in nodes:
                nz = [j for j, v in enumerate(cur) if v != 0]
                j = nz[-1]
                s = 1 if cur[j] > 0 else -1
                lst = list(cur)
                lst[j] -= s
                chain.append((cur, j, s))
                cur = tuple(lst)
            for node, j, s in reversed(chain):
                parent_key = list(node)
                parent_key[j] -= s
                nodes[node] = len(keys)
                keys.append(node)
                par.append(nodes[tuple(parent_key)])
                crd.append(j)
                stp.append(s)
                coef.append(0j)
            coef[nodes[key]] += c
        return cls(
            used.astype(np.int64),
            np.asarray(par, dtype=np.int64),
            np.asarray(crd, dtype=np.int64),
            np.asarray(stp, dtype=np.int64),
            np.asarray(coef, dtype=np.complex128),
        )

    @property
    def dim(self) -> int:
        return len(self.coords)


@numba.njit(nogil=True, cache=True)
def _abs_sum_batch(theta, parent, coord, step, coef, out):
    n = theta.shape[0]
    d = theta.shape[1]
    k_nodes = parent.shape[0]
    z = np.empty(d, dtype=np.complex128)
    vals = np.empty(k_nodes, dtype=np.complex128)
    for i in range(n):
        for c in range(d):
            ang = TWO_PI * theta[i, c]
            z[c] = complex(math.cos(ang), math.sin(ang))
        vals[0] = 1.0
        acc = coef[0]
        for k in range(1, k_nodes):
            zc = z[coord[k]]
            if step[k] < 0:
                zc = zc.conjugate()
            v = vals[parent[k]] * zc
            vals[k] = v
            acc += coef[k] * v
        out[i] = abs(acc)


def _abs_values(plan: _Plan, theta: np.ndarray) -> np.ndarray:
    out = np.empty(theta.shape[0])
    _abs_sum_batch(np.ascontiguousarray(theta, dtype=np.float64), plan.parent, plan.coord,
                   plan.step, plan.coef, out)
    return out


def eval_abs_sum(P: TrigPolynomial, theta) -> float:
    """|sum_alpha c_alpha exp(2 pi i <alpha, theta>)| at one point theta in [0,1)^n."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != P.dim:
        raise ValueError(f"theta has dimension {theta.shape[0]}, polynomial has {P.dim}")
    plan = P.plan
    return float(_abs_values(plan, theta[plan.coords][None, :])[0])


def abs_values(P: TrigPolynomial, theta: np.ndarray) -> np.ndarray:
    """Vectorised eval_abs_sum over rows of theta (shape (N, dim))."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != P.dim:
        raise ValueError("theta must have shape (N, dim)")
    plan = P.plan
    return _abs_values(plan, theta[:, plan.coords])


def l2_norm_exact(P: TrigPolynomial) -> float:
    """sqrt(sum |c|^2): characters are orthonormal in L2 of the Haar measure."""
    return math.sqrt(math.fsum(np.abs(P.coefficients) ** 2))


# -- sampling ---------------------------------------------------------------

_lattice_lock = threading.Lock()
_lattice_vec: np.ndarray | None = None


def lattice_vector() -> np.ndarray:
    """Generating vector of an extensible base-2 rank-1 lattice (<= 2^20 points)."""
    global _lattice_vec
    if _lattice_vec is None:
        with _lattice_lock:
            if _lattice_vec is None:
                text = resources.files("haarproj.data").joinpath(
                    "lattice-33002-1024-1048576.9125.txt").read_text()
                vals = [int(s) for s in text.split("\n") if s and not s.startswith("#")]
                _lattice_vec = np.asarray(vals, dtype=np.uint64)
    return _lattice_vec


def _bit_reverse(i: np.ndarray, bits: int) -> np.ndarray:
    i = i.astype(np.uint64)
    out = np.zeros_like(i)
    for _ in range(bits):
        out = (out << np.uint64(1)) | (i & np.uint64(1))
        i = i >> np.uint64(1)
    return out


def lattice_points(start: int, count: int, dim: int) -> np.ndarray:
    """Points start..start+count-1 of the lattice in radical-inverse order.

    Any prefix of length 2^k is the full 2^k-point lattice.
    """
    vec = lattice_vector()
    if dim > len(vec):
        raise ValueError(f"lattice rule supports at most {len(vec)} dimensions")
    idx = np.arange(start, start + count, dtype=np.uint64)
    rev = _bit_reverse(idx, LATTICE_BITS)
    prod = (rev[:, None] * vec[None, :dim]) & np.uint64(LATTICE_MAX - 1)
    return prod.astype(np.float64) / LATTICE_MAX


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block; the key mixes (seed, block)."""
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _block_sums(plan: _Plan, cfg: MCConfig, block: int, power: float) -> np.ndarray:
    """[sum f, sum g, sum f^2, sum g^2, sum f g] with f = |P|^power, g = |P|^2."""
    n = cfg.per_block
    d = plan.dim
    rng = block_rng(cfg.seed, block)
    shift = rng.random(d) if cfg.engine == "qmc" else None
    rows = max(1, CHUNK_VALUES // max(d, 1))
    acc = np.zeros(5)
    for s in range(0, n, rows):
        c = min(rows, n - s)
        if cfg.engine == "mc":
            theta = rng.random((c, d))
        else:
            theta = lattice_points(s, c, d) + shift
            theta -= np.floor(theta)
        a = _abs_values(plan, theta)
        f = a if power == 1 else a**power
        g = a * a
        acc += [f.sum(), g.sum(), (f * f).sum(), (g * g).sum(), (f * g).sum()]
    return acc


def _run_blocks(plan: _Plan, cfg: MCConfig, power: float) -> np.ndarray:
    blocks = range(cfg.blocks)
    jobs = min(_jobs, cfg.blocks)
    if jobs == 1:
        sums = [_block_sums(plan, cfg, b, power) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            sums = list(pool.map(lambda b: _block_sums(plan, cfg, b, power), blocks))
    return np.asarray(sums)


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def _moment_estimate(P: TrigPolynomial, cfg: MCConfig, power: float) -> tuple[float, float]:
    """Estimate of E|P|^power with its standard error."""
    sums = _run_blocks(P.plan, cfg, power)
    n = cfg.per_block
    if not cfg.control_variate:
        return _mean_stderr(sums[:, 0] / n)
    # pilot block fixes the regression coefficient; the rest stay unbiased
    sf, sg, sff, sgg, sfg = sums[0]
    mf, mg = sf / n, sg / n
    var_g = sgg / n - mg * mg
    beta = (sfg / n - mf * mg) / var_g if var_g > 0 else 0.0
    mu = float(np.sum(np.abs(P.coefficients) ** 2))
    rest = sums[1:]
    adj = rest[:, 0] / n - beta * (rest[:, 1] / n - mu)
    return _mean_stderr(adj)


def lp_norm(P: TrigPolynomial, p: float, cfg: MCConfig) -> IntegralEstimate:
    """(int |P|^p)^(1/p) with the delta-method standard error."""
    if p < 1:
        raise ValueError("p must be >= 1")
    mean, se = _moment_estimate(P, cfg, p)
    if p == 1:
        value, stderr = mean, se
    else:
        value = mean ** (1.0 / p)
        stderr = se * (mean ** (1.0 / p - 1.0)) / p if mean > 0 else 0.0
    return IntegralEstimate(value, stderr, cfg.per_block * cfg.blocks, cfg.engine, cfg.seed,
                            cfg.blocks)


def l1_norm(P: TrigPolynomial, cfg: MCConfig) -> IntegralEstimate:
    return lp_norm(P, 1, cfg)


# -- ergodic time average ---------------------------------------------------


def ergodic_panels(omegas, T: float, nodes: int, order: int = 8) -> int:
    w = np.asarray(omegas, dtype=float)
    wmax = 0.5 * float(w.max() - w.min())
    panels = max(1, math.ceil(nodes / order))
    if wmax > 0:
        panels = max(panels, math.ceil(2 * T / (math.pi / (4 * wmax))))
    return panels


def ergodic_average(omegas, coefficients=None, T: float = 1e4, nodes: int = 2,
                    order: int = 8) -> float:
    """(1/2T) int_{-T}^{T} |sum_n a_n exp(-i omega_n t)| dt by composite Gauss-Legendre.

    Panel width is at most pi / (4 * max|omega_n - c|) with c the centre of the
    frequency range; subtracting c multiplies the sum by a unimodular factor.
    """
    w = np.asarray(omegas, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite frequency value")
    if T <= 0 or nodes < 2:
        raise ValueError("need T > 0 and nodes >= 2")
    a = np.ones(len(w), dtype=complex) if coefficients is None else np.asarray(coefficients, complex)
    centre = 0.5 * (w.min() + w.max())
    wc = w - centre
    panels = ergodic_panels(w, T, nodes, order)

    def f(t):
        flat = t.reshape(-1)
        vals = np.abs(np.exp(-1j * np.multiply.outer(flat, wc)) @ a)
        return vals.reshape(t.shape)

    return gauss_legendre_composite(f, -T, T, panels, order) / (2 * T)


def ergodic_l1(space, coefficients=None, T: float = 1e4, nodes: int = 2) -> IntegralEstimate:
    """Time average for a Dirichlet space, with diagnostics at T, 2T, 4T.

    ``stderr`` is the largest change seen when doubling T twice; it is a
    truncation indicator, not a statistical error.
    """
    omegas = space.frequencies()
    if coefficients is None:
        coefficients = space.coefficient_array()
    vals = tuple(ergodic_average(omegas, coefficients, T * k, nodes) for k in (1, 2, 4))
    spread = max(abs(v - vals[0]) for v in vals)
    n_eval = 8 * ergodic_panels(omegas, T, nodes)
    return IntegralEstimate(vals[0], spread, n_eval, "quadrature", 0, 1, vals)
