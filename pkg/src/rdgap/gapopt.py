"""Universality rate gap: evaluation, analytic gradients, worst-case search.

The gap at a fixed target distortion is the random-coding rate minus the
oracle waterfilling rate.  The worst case over spectra is found by a
deterministic multi-start search: a coarse log-space scan over (levels,
weights) for each level count k, then Nelder-Mead refinement from the top
16 scan cells per k, under the reparametrization levels = exp(x),
weights = softmax(y), projected to unit mean.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import rdrc, waterfill
from ._parallel import ordered_map, resolve_threads
from .errors import KinkError
from .spectra import Spectrum, _merge_values

_LN2 = math.log(2.0)
_STREAM_GAPOPT = 5


@dataclass(frozen=True)
class GapRecord:
    """Both curve rates and their gap at one (spectrum, distortion) point."""

    spectrum: Spectrum
    d_star: float
    rate_wf_bits: float
    rate_rc_bits: float
    gap_bits: float
    level_t: float
    level_T: float


@dataclass(frozen=True)
class PointDiagnostics:
    """Optimizer bookkeeping for one grid point."""

    d_star: float
    restarts: int
    converged: int
    best_k: int
    uses_five_levels: bool


@dataclass(frozen=True)
class SweepResult:
    d_grid: tuple[float, ...]
    records: tuple[GapRecord, ...]
    best: GapRecord
    diagnostics: tuple[PointDiagnostics, ...]


@dataclass(frozen=True)
class SearchConfig:
    """Deterministic search knobs; identical configs give identical results."""

    seed: int = 0
    starts_per_k: int = 16
    coarse_per_k: int = 256
    nm_fev_per_dim: int = 70
    nm_fev_base: int = 120
    merge_tol: float = 1e-7


def gap_at(s: Spectrum, d_star: float) -> GapRecord:
    """Evaluate both curves at the same target distortion via the public solvers."""
    if not 0.0 < d_star < 1.0:
        raise ValueError("d_star must lie in (0, 1)")
    t = waterfill.t_for_distortion(s, d_star)
    rate_wf = waterfill.r_wf(s, t)
    T = rdrc.t_rc_for_distortion(s, d_star)
    rate_rc = rdrc.r_rc(s, T)
    return GapRecord(
        spectrum=s,
        d_star=d_star,
        rate_wf_bits=rate_wf,
        rate_rc_bits=rate_rc,
        gap_bits=rate_rc - rate_wf,
        level_t=t,
        level_T=T,
    )


def grad_rates(s: Spectrum, d_star: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-level gradients of (rate_wf_bits, rate_rc_bits) in the level values,
    weights held fixed, at fixed target distortion.

    Raises KinkError when a level sits on the waterfilling level (the oracle
    curve has a kink there and is not differentiable).
    """
    if not 0.0 < d_star < 1.0:
        raise ValueError("d_star must lie in (0, 1)")
    t = waterfill.t_for_distortion(s, d_star)
    for v in s.values:
        if abs(v - t) <= 1e-9 * max(v, t):
            raise KinkError(f"level {v} sits on the waterfilling level {t}")
    grad_wf = tuple(
        w / (2.0 * _LN2 * v) if v > t else w / (2.0 * _LN2 * t)
        for v, w in zip(s.values, s.weights)
    )
    T = rdrc.t_rc_for_distortion(s, d_star)
    num = sum(w * v / (1.0 + v * T) for v, w in zip(s.values, s.weights))
    den = sum(w * v * v / (1.0 + v * T) ** 2 for v, w in zip(s.values, s.weights))
    A = num / den
    grad_rc = tuple(
        w / (2.0 * _LN2) * (T / (1.0 + v * T) + A / (1.0 + v * T) ** 2)
        for v, w in zip(s.values, s.weights)
    )
    return grad_wf, grad_rc


def _gap_core(values, weights, d_star: float) -> float:
    """Fast gap evaluation on raw arrays (closed-form t, Newton T)."""
    t = waterfill._t_wf_exact(values, weights, d_star)
    rate_wf = waterfill._r_wf(values, weights, t)
    T = rdrc._t_for_distortion_newton(values, weights, d_star)
    return rdrc._r_rc(values, weights, T) - rate_wf


def _dstar_key(d_star: float) -> tuple[int, int]:
    bits = struct.unpack("<Q", struct.pack("<d", d_star))[0]
    return (bits & 0xFFFFFFFF, bits >> 32)


def _unpack(z: np.ndarray, k: int) -> tuple[list[float], list[float]]:
    x = np.clip(z[:k], -60.0, 60.0)
    values = np.exp(x)
    logits = np.append(z[k:], 0.0)
    logits -= logits.max()
    w = np.exp(logits)
    w /= w.sum()
    values /= float(values @ w)
    return values.tolist(), w.tolist()


def _pack(values, weights) -> np.ndarray:
    x = [math.log(max(v, 1e-24)) for v in values]
    ref = math.log(weights[-1])
    y = [math.log(w) - ref for w in weights[:-1]]
    return np.asarray(x + y, dtype=float)


def _coarse_candidates(d_star: float, k: int, cfg: SearchConfig) -> list[tuple[list[float], list[float]]]:
    """Deterministic coarse scan cells for level count k (already unit-mean)."""
    cands: list[tuple[list[float], list[float]]] = []
    if k == 1:
        return [([1.0], [1.0])]
    if k == 2:
        # Exhaustive two-level family: top weight x position of the top level
        # between 1 and its feasibility bound 1/w1.
        for w1 in np.linspace(0.04, 0.96, 24):
            for u in np.linspace(0.02, 0.98, 24):
                v1 = 1.0 + u * (1.0 / w1 - 1.0)
                v2 = (1.0 - w1 * v1) / (1.0 - w1)
                if v2 < 0.0:
                    continue
                cands.append(([float(v1), float(v2)], [float(w1), float(1.0 - w1)]))
        return cands
    rng = np.random.Generator(
        np.random.Philox(
            np.random.SeedSequence(
                entropy=cfg.seed, spawn_key=(_STREAM_GAPOPT, k, *_dstar_key(d_star))
            )
        )
    )
    for _ in range(cfg.coarse_per_k):
        values = np.exp(rng.uniform(-4.0, 4.0, size=k))
        weights = rng.dirichlet(np.ones(k))
        if float(weights.min()) < 1e-8:
            continue
        order = np.argsort(-values)
        values, weights = values[order], weights[order]
        values = values / float(values @ weights)
        cands.append((values.tolist(), weights.tolist()))
    return cands


def _search_k(d_star: float, k: int, cfg: SearchConfig, carry):
    """Best (gap, values, weights, nm_runs, converged) over spectra with k levels."""
    cands = _coarse_candidates(d_star, k, cfg)
    scored = sorted(
        ((_gap_core(v, w, d_star), v, w) for v, w in cands), key=lambda c: -c[0]
    )
    starts = [(v, w) for _, v, w in scored[: cfg.starts_per_k]]
    if carry is not None and len(starts) == cfg.starts_per_k and k > 2:
        # Continuation: split the previous level count's top level in two.
        cv, cw = carry
        v = [cv[0] * 1.05, cv[0] * 0.95] + list(cv[1:])
        w = [cw[0] / 2.0, cw[0] / 2.0] + list(cw[1:])
        m = sum(a * b for a, b in zip(v, w))
        starts[-1] = ([a / m for a in v], list(w))
    if k == 1:
        starts = starts[:1]

    dim = 2 * k - 1
    maxfev = cfg.nm_fev_base + cfg.nm_fev_per_dim * dim

    def objective(z: np.ndarray) -> float:
        v, w = _unpack(z, k)
        return -_gap_core(v, w, d_star)

    best = (-math.inf, None, None)
    converged = 0
    for v0, w0 in starts:
        res = minimize(
            objective,
            _pack(v0, w0),
            method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": 1e-9, "fatol": 1e-13},
        )
        converged += bool(res.success)
        v, w = _unpack(res.x, k)
        g = _gap_core(v, w, d_star)
        if g > best[0]:
            best = (g, v, w)
    return best[0], best[1], best[2], len(starts), converged


def _point_search(d_star: float, k_max: int, cfg: SearchConfig) -> tuple[GapRecord, PointDiagnostics]:
    best = (-math.inf, [1.0], [1.0], 1)
    restarts = 0
    converged = 0
    carry = None
    for k in range(1, k_max + 1):
        g, v, w, runs, conv = _search_k(d_star, k, cfg, carry)
        restarts += runs
        converged += conv
        carry = (v, w)
        if g > best[0]:
            best = (g, v, w, k)
    _, values, weights, best_k = best
    values, weights = _merge_values(
        *_sorted_desc(values, weights), tol=cfg.merge_tol * max(values)
    )
    mean = sum(v * w for v, w in zip(values, weights))
    spectrum = Spectrum(tuple(v / mean for v in values), tuple(weights))
    record = gap_at(spectrum, d_star)
    diag = PointDiagnostics(
        d_star=d_star,
        restarts=restarts,
        converged=converged,
        best_k=best_k,
        uses_five_levels=spectrum.k == 5,
    )
    return record, diag


def _sorted_desc(values, weights):
    pairs = sorted(zip(values, weights), key=lambda p: -p[0])
    return [p[0] for p in pairs], [p[1] for p in pairs]


def maximize_gap(d_star: float, k_max: int, search: SearchConfig | None = None) -> GapRecord:
    """Best gap found over spectra with at most k_max distinct levels."""
    if not 0.0 < d_star < 1.0:
        raise ValueError("d_star must lie in (0, 1)")
    if not 1 <= int(k_max) <= 5:
        raise ValueError("k_max must lie in 1..5")
    record, _ = _point_search(d_star, int(k_max), search or SearchConfig())
    return record


def _sweep_worker(args):
    d_star, k_max, cfg = args
    return _point_search(d_star, k_max, cfg)


def sweep(
    d_grid,
    k_max: int,
    search: SearchConfig | None = None,
    threads: int | None = None,
) -> SweepResult:
    """Per-point worst-case gaps over a distortion grid.

    Grid points are independent; with threads > 1 they run in a process pool
    and are reduced in grid order, so the result does not depend on
    scheduling.
    """
    grid = tuple(float(d) for d in d_grid)
    if not grid:
        raise ValueError("empty distortion grid")
    for d in grid:
        if not 0.005 - 1e-12 <= d <= 0.995 + 1e-12:
            raise ValueError(f"grid point {d} outside [0.005, 0.995]")
    if not 1 <= int(k_max) <= 5:
        raise ValueError("k_max must lie in 1..5")
    cfg = search or SearchConfig()
    args = [(d, int(k_max), cfg) for d in grid]
    results = ordered_map(_sweep_worker, args, resolve_threads(threads))
    records = tuple(r for r, _ in results)
    diags = tuple(d for _, d in results)
    best = max(records, key=lambda r: r.gap_bits)
    return SweepResult(d_grid=grid, records=records, best=best, diagnostics=diags)


SWEEP_CSV_HEADER = "d_star,rate_rc_bits,rate_wf_bits,gap_bits,levels,weights"


def sweep_csv_rows(result: SweepResult) -> list[str]:
    """CSV rows for a sweep; gap fixed to 6 decimals per the output contract."""
    rows = []
    for rec in result.records:
        levels = ";".join(repr(v) for v in rec.spectrum.values)
        weights = ";".join(repr(w) for w in rec.spectrum.weights)
        gap = rec.gap_bits if abs(rec.gap_bits) >= 5e-7 else 0.0  # avoid "-0.000000"
        rows.append(
            f"{rec.d_star!r},{rec.rate_rc_bits!r},{rec.rate_wf_bits!r},"
            f"{gap:.6f},{levels},{weights}"
        )
    return rows
