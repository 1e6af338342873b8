"""Multiple ergodic averages on U_n / U_n(Z) against their limit integral.

The time side follows ``p_j(m) = a^(j m) x`` for ``j = 1..k+1`` by left
multiplication with ``a^j`` and reduces every point to the fundamental domain
after each step.  Orbit points are carried in double-double precision, since
rounding errors separate polynomially along a unipotent orbit.  The limit side integrates

    prod_j f_j(x prod_{i <= min(j, k)} y_i^C(j, i))

over independent Haar-distributed ``y_i`` in ``N^i / Γ^i``.  Both sides use
the reduced representative of ``x``, so they only depend on ``xΓ``.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .ergodicity import green_ergodic_Sx, green_ergodic_T
from .group import GroupElement
from .leibman import gbinom
from .nilmanifold import TestFunction, coordinate_arrays, reduce
from .scalars import Radical

__all__ = [
    "ESTIMATORS",
    "ExperimentConfig",
    "Trace",
    "LimitEstimate",
    "Report",
    "default_checkpoints",
    "average_json",
    "limit_json",
    "nonconventional_average",
    "limit_integral",
    "korobov_generator",
    "compare",
]

log = logging.getLogger(__name__)

ESTIMATORS = ("monte_carlo", "lattice_rule", "tensor_grid")
CHUNK = 1 << 16


def default_checkpoints(n_steps: int, per_decade: int = 4) -> list[int]:
    """Geometrically spaced checkpoints ending at ``n_steps``."""
    pts = {n_steps}
    e = 0
    while True:
        v = int(round(10 ** (e / per_decade)))
        if v >= n_steps:
            break
        pts.add(v)
        e += 1
    return sorted(pts)


@dataclass
class ExperimentConfig:
    a: GroupElement
    x: GroupElement
    functions: list[TestFunction]
    n_steps: int = 100_000
    m_samples: int = 100_000
    estimator: str = "monte_carlo"
    seed: int = 0
    checkpoints: list[int] | None = None
    tolerance: float = 5e-3
    jobs: int = 1
    name: str = ""
    bound: float | None = None

    def __post_init__(self):
        if self.a.n != self.x.n:
            raise ValueError("a and x live in different groups")
        if self.a.mode == "float" or self.x.mode == "float":
            raise ValueError("a and x must be given exactly")
        if len(self.functions) != self.k + 1:
            raise ValueError(f"need k+1 = {self.k + 1} test functions, got {len(self.functions)}")
        if any(f.n != self.n for f in self.functions):
            raise ValueError("test function over the wrong group")
        if self.n_steps < 1 or self.m_samples < 1:
            raise ValueError("n_steps and m_samples must be >= 1")
        if self.bound is not None and self.bound < 0:
            raise ValueError("bound must be non-negative")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.n_steps)
        cps = sorted({int(c) for c in self.checkpoints if 1 <= int(c) <= self.n_steps})
        if not cps or cps[-1] != self.n_steps:
            cps.append(self.n_steps)
        self.checkpoints = cps

    @property
    def n(self) -> int:
        return self.a.n

    @property
    def k(self) -> int:
        return self.a.n - 1


@dataclass
class Trace:
    checkpoints: list[int]
    values: list[complex]

    @property
    def final(self) -> complex:
        return self.values[-1]


@dataclass
class LimitEstimate:
    estimate: complex
    stderr: float
    samples: int
    deterministic: bool


@dataclass
class Report:
    name: str
    n: int
    time_average: complex
    trace: Trace
    limit: LimitEstimate
    tolerance: float
    ergodic_T: dict
    ergodic_Sx: dict
    seed: int
    config: dict = field(default_factory=dict)
    timing: dict | None = None
    bound: float | None = None

    @property
    def abs_difference(self) -> float:
        return abs(self.time_average - self.limit.estimate)

    @property
    def passed(self) -> bool:
        return self.abs_difference <= self.tolerance + 3 * self.limit.stderr

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def hypothesis_violation(self) -> bool:
        return not self.ergodic_T["ergodic"]

    @property
    def bound_check(self) -> dict | None:
        """Optional modulus bound on both sides (used for non-resonant cases)."""
        if self.bound is None:
            return None
        return _bound_json(self.bound, average=self.time_average, limit=self.limit.estimate)

    @property
    def ok(self) -> bool:
        """Verdict and, when configured, the modulus bound."""
        bc = self.bound_check
        return self.passed and (bc is None or bc["passed"])

    def to_json(self) -> dict:
        out = {
            "schema_version": 1,
            "kind": "compare",
            "name": self.name,
            "n": self.n,
            "k": self.n - 1,
            "time_average": _cjson(self.time_average),
            "checkpoints": [{"n": c, **_cjson(v)} for c, v in
                            zip(self.trace.checkpoints, self.trace.values)],
            "limit_estimate": _cjson(self.limit.estimate),
            "stderr": self.limit.stderr,
            "deterministic_estimator": self.limit.deterministic,
            "samples": self.limit.samples,
            "abs_difference": self.abs_difference,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "hypothesis_violation": self.hypothesis_violation,
            "bound_check": self.bound_check,
            "ergodic_T": self.ergodic_T,
            "ergodic_Sx": self.ergodic_Sx,
            "seed": self.seed,
            "config": self.config,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def trace_rows(self) -> list[tuple[int, float, float, float]]:
        lim = self.limit.estimate
        return [(c, v.real, v.imag, abs(v - lim))
                for c, v in zip(self.trace.checkpoints, self.trace.values)]


def _cjson(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _bound_json(bound: float, **sides: complex) -> dict:
    mods = {name: abs(v) for name, v in sides.items()}
    return {"bound": bound, "modulus": mods,
            "passed": all(m <= bound for m in mods.values())}


def average_json(cfg: ExperimentConfig, trace: Trace, config_echo: dict | None = None) -> dict:
    """Machine-readable result of the time side alone."""
    bc = None if cfg.bound is None else _bound_json(cfg.bound, average=trace.final)
    return {
        "schema_version": 1,
        "kind": "average",
        "name": cfg.name,
        "n": cfg.n,
        "k": cfg.k,
        "time_average": _cjson(trace.final),
        "checkpoints": [{"n": c, **_cjson(v)} for c, v in zip(trace.checkpoints, trace.values)],
        "bound_check": bc,
        "verdict": "fail" if bc is not None and not bc["passed"] else "pass",
        "seed": cfg.seed,
        "config": config_echo or {},
    }


def limit_json(cfg: ExperimentConfig, lim: LimitEstimate, config_echo: dict | None = None) -> dict:
    """Machine-readable result of the limit side alone."""
    bc = None if cfg.bound is None else _bound_json(cfg.bound, limit=lim.estimate)
    return {
        "schema_version": 1,
        "kind": "limit",
        "name": cfg.name,
        "n": cfg.n,
        "k": cfg.k,
        "estimator": cfg.estimator,
        "limit_estimate": _cjson(lim.estimate),
        "stderr": lim.stderr,
        "deterministic_estimator": lim.deterministic,
        "samples": lim.samples,
        "bound_check": bc,
        "verdict": "fail" if bc is not None and not bc["passed"] else "pass",
        "seed": cfg.seed,
        "config": config_echo or {},
    }


# -- packing -------------------------------------------------------------------


def _pack(functions: Sequence[TestFunction]):
    T = max(max(len(f.terms), 1) for f in functions)
    d = functions[0].n * (functions[0].n - 1) // 2
    J = len(functions)
    freqs = np.zeros((J, T, d), dtype=np.int64)
    coeffs = np.zeros((J, T), dtype=np.complex128)
    nterms = np.zeros(J, dtype=np.int64)
    windows = np.zeros(J, dtype=np.int64)
    for j, f in enumerate(functions):
        fr, co = f.packed(T)
        freqs[j], coeffs[j] = fr, co
        nterms[j] = len(f.terms)
        windows[j] = f.window
    return freqs, coeffs, nterms, windows, functions[0].window_mask()


def _base_point(cfg: ExperimentConfig) -> np.ndarray:
    return reduce(cfg.x)[0].to_array()


def _split(v) -> tuple[float, float]:
    """``v ~ hi + lo`` to about 106 bits."""
    if isinstance(v, Radical):
        lo, hi = v.enclosure(160)
        q = (lo + hi) / 2
    else:
        q = Fraction(v)
    h = float(q)
    return h, float(q - Fraction(h))


def _split_array(g: GroupElement) -> tuple[np.ndarray, np.ndarray]:
    n = g.n
    hi, lo = np.zeros((n, n)), np.zeros((n, n))
    for r in range(n):
        for c in range(n):
            hi[r, c], lo[r, c] = _split(g[r, c])
    return hi, lo


def _orbit_start(cfg: ExperimentConfig) -> tuple[np.ndarray, ...]:
    """``a^j`` (j = 1..k+1) and ``k+1`` copies of the base point, as hi/lo pairs."""
    steps = [_split_array(cfg.a ** j) for j in range(1, cfg.k + 2)]
    x0 = _split_array(reduce(cfg.x)[0])
    J = cfg.k + 1
    return (np.stack([s[0] for s in steps]), np.stack([s[1] for s in steps]),
            np.stack([x0[0]] * J), np.stack([x0[1]] * J))


# -- time side -----------------------------------------------------------------


def nonconventional_average(cfg: ExperimentConfig) -> Trace:
    """Running averages of ``prod_j f_j(a^(j m) x)`` over ``m = 0..N-1`` at the checkpoints."""
    oi, oj, dist = coordinate_arrays(cfg.n)
    start = _orbit_start(cfg)
    freqs, coeffs, nterms, windows, wmask = _pack(cfg.functions)
    cps = np.asarray(cfg.checkpoints, dtype=np.int64)
    vals = K.orbit_trace(*start, oi, oj, dist, freqs, coeffs, nterms, windows, wmask,
                         cfg.n_steps, cps)
    return Trace(list(cfg.checkpoints), [complex(v) for v in vals])


def orbit_points(cfg: ExperimentConfig, n_steps: int) -> np.ndarray:
    """Reduced float orbit points, shape ``(n_steps + 1, k + 1, n, n)``."""
    oi, oj, dist = coordinate_arrays(cfg.n)
    return K.orbit_points(*_orbit_start(cfg), oi, oj, dist, n_steps)


# -- limit side --------------------------------------------------------------


def _sample_dim(n: int) -> int:
    _, _, dist = coordinate_arrays(n)
    return int(sum((dist >= i).sum() for i in range(1, n)))


def _binoms(k: int) -> np.ndarray:
    out = np.zeros((k + 1, k), dtype=np.int64)
    for j in range(k + 1):
        for i in range(k):
            out[j, i] = gbinom(j + 1, i + 1)
    return out


class _Integrand:
    def __init__(self, cfg: ExperimentConfig):
        self.n = cfg.n
        self.x0 = _base_point(cfg)
        self.coords = coordinate_arrays(cfg.n)
        self.binoms = _binoms(cfg.k)
        self.packed = _pack(cfg.functions)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        oi, oj, dist = self.coords
        freqs, coeffs, nterms, windows, wmask = self.packed
        out = np.empty(u.shape[0], dtype=np.complex128)
        K.limit_integrand(self.x0, np.ascontiguousarray(u), oi, oj, dist, self.binoms,
                          freqs, coeffs, nterms, windows, wmask, out)
        return out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _sums(values: np.ndarray) -> tuple[complex, float]:
    return complex(values.sum()), float(np.sum(values.real ** 2 + values.imag ** 2))


def _run_chunks(func, nchunks: int, jobs: int) -> list:
    if jobs <= 1 or nchunks <= 1:
        return [func(c) for c in range(nchunks)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, range(nchunks)))


def korobov_generator(m: int, dim: int, candidates: int = 24) -> np.ndarray:
    """Korobov vector ``(1, g, g^2, ...) mod m`` minimizing the P_2 criterion."""
    if m < 2:
        return np.ones(dim, dtype=np.int64)
    golden = (math.sqrt(5) - 1) / 2
    pool = sorted({max(2, int(m * ((c * golden) % 1.0))) % m for c in range(1, 4 * candidates)})
    pool = [g for g in pool if math.gcd(g, m) == 1][:candidates] or [1]
    idx = np.arange(m, dtype=np.int64)
    best, best_score = None, math.inf
    for g in pool:
        z = np.array([pow(g, p, m) for p in range(dim)], dtype=np.int64)
        score = 0.0
        for start in range(0, m, CHUNK):
            i = idx[start:start + CHUNK, None]
            x = ((i * z[None, :]) % m) / m
            b2 = x * x - x + 1.0 / 6.0
            score += float(np.prod(1.0 + 2.0 * math.pi ** 2 * b2, axis=1).sum())
        score = score / m - 1.0
        if score < best_score:
            best, best_score = z, score
    return best


def limit_integral(cfg: ExperimentConfig) -> LimitEstimate:
    """Estimate the limit integral with the configured estimator."""
    f = _Integrand(cfg)
    dim = _sample_dim(cfg.n)
    M = cfg.m_samples
    if cfg.estimator == "monte_carlo":
        nchunks = -(-M // CHUNK)

        def work(c: int):
            size = min(CHUNK, M - c * CHUNK)
            u = _chunk_rng(cfg.seed, c).random((size, dim))
            return _sums(f(u))

        parts = _run_chunks(work, nchunks, cfg.jobs)
        total = sum((p[0] for p in parts), 0j)
        sq = math.fsum(p[1] for p in parts)
        mean = total / M
        var = max(sq - M * abs(mean) ** 2, 0.0) / (M - 1) if M > 1 else 0.0
        return LimitEstimate(mean, math.sqrt(var / M), M, False)
    if cfg.estimator == "lattice_rule":
        z = korobov_generator(M, dim)

        def work(c: int):
            i = np.arange(c * CHUNK, min((c + 1) * CHUNK, M), dtype=np.int64)[:, None]
            u = ((i * z[None, :]) % M) / M
            return _sums(f(u))

        parts = _run_chunks(work, -(-M // CHUNK), cfg.jobs)
        return LimitEstimate(sum((p[0] for p in parts), 0j) / M, 0.0, M, True)
    # tensor_grid
    if cfg.k != 2:
        raise ValueError("tensor_grid is only supported for k = 2")
    P = max(2, int(round(M ** (1.0 / dim))))
    axis = (np.arange(P) + 0.5) / P
    total_pts = P ** dim
    grid_index = np.arange(total_pts, dtype=np.int64)

    def work(c: int):
        idx = grid_index[c * CHUNK:(c + 1) * CHUNK]
        digits = np.stack([(idx // P ** r) % P for r in range(dim)], axis=1)
        return _sums(f(axis[digits]))

    parts = _run_chunks(work, -(-total_pts // CHUNK), cfg.jobs)
    return LimitEstimate(sum((p[0] for p in parts), 0j) / total_pts, 0.0, total_pts, True)


def compare(cfg: ExperimentConfig, tolerance: float | None = None,
            config_echo: dict | None = None, with_timing: bool = False) -> Report:
    """Run both sides and judge ``|time average - limit| <= tol + 3 stderr``."""
    tol = cfg.tolerance if tolerance is None else tolerance
    erg_T = green_ergodic_T(cfg.a)
    if not erg_T.ergodic:
        log.warning("translation by a is not ergodic (witness %s); the limit formula "
                    "is not expected to hold", erg_T.witness)
    erg_Sx = green_ergodic_Sx(cfg.a, cfg.x)
    t0 = time.perf_counter()
    trace = nonconventional_average(cfg)
    t1 = time.perf_counter()
    lim = limit_integral(cfg)
    t2 = time.perf_counter()
    timing = {"average_s": t1 - t0, "limit_s": t2 - t1} if with_timing else None
    log.info("time average %.6g%+.6gi, limit %.6g%+.6gi (stderr %.2g) in %.1fs + %.1fs",
             trace.final.real, trace.final.imag, lim.estimate.real, lim.estimate.imag,
             lim.stderr, t1 - t0, t2 - t1)
    return Report(cfg.name, cfg.n, trace.final, trace, lim, tol, erg_T.to_json(),
                  erg_Sx.to_json(), cfg.seed, config_echo or {}, timing, cfg.bound)
