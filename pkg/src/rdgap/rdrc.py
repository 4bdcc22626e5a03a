"""Universal random-coding rate-distortion curve and codebook scaling.

Distortion at parameter T is sum_j w_j * v_j / (1 + v_j T); rate in bits is
(1/2) sum_j w_j * log2(1 + v_j T).  Also houses the per-realization
distortion D(V, T), the codebook scaling tau, and its rounding quantizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .spectra import Spectrum, expand_to_n

REL_TOL = 1e-12
MAX_ITER = 200
T_BRACKET_CAP = 2.0**200  # T grows like 2^(2nR); beyond this the rate is absurd


@dataclass(frozen=True)
class RcPoint:
    """A point on the random-coding curve."""

    level_T: float
    distortion: float
    rate_bits: float


def _d_rc(values, weights, T: float) -> float:
    return sum(w * v / (1.0 + v * T) for v, w in zip(values, weights))


def _r_rc(values, weights, T: float) -> float:
    return 0.5 * sum(w * math.log2(1.0 + v * T) for v, w in zip(values, weights))


def d_rc(s: Spectrum, T: float) -> float:
    """Distortion at parameter T; equals the mean eigenvalue (1) at T = 0."""
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    if T == 0.0:
        return 1.0
    return min(_d_rc(s.values, s.weights, T), 1.0)


def r_rc(s: Spectrum, T: float) -> float:
    """Rate in bits at parameter T; 0 at T = 0, strictly increasing."""
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    return _r_rc(s.values, s.weights, T)


def _bracket_and_bisect(f, target: float, increasing: bool) -> float:
    """Solve f(T) = target by doubling the bracket from [0, 1], then bisection
    to relative tolerance 1e-12, with early exit on exact residuals."""
    lo, hi = 0.0, 1.0
    fhi = f(hi)
    while (fhi < target) if increasing else (fhi > target):
        lo, hi = hi, hi * 2.0
        if hi > T_BRACKET_CAP:
            raise SolverError(f"target {target} not bracketed below T = 2^200")
        fhi = f(hi)
    if fhi == target:
        return hi
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == target:
            return mid
        if (fm < target) == increasing:
            lo = mid
        else:
            hi = mid
        if hi - lo <= REL_TOL * hi:
            return 0.5 * (lo + hi)
    raise SolverError(f"bisection did not converge: [{lo}, {hi}]")


def _t_for_rate(values, weights, rate: float) -> float:
    return _bracket_and_bisect(lambda T: _r_rc(values, weights, T), rate, increasing=True)


def _t_for_distortion(values, weights, d_star: float) -> float:
    mean = _d_rc(values, weights, 0.0)
    if d_star >= mean:
        raise SolverError(f"d_star {d_star} is not below the zero-rate distortion {mean}")
    return _bracket_and_bisect(lambda T: _d_rc(values, weights, T), d_star, increasing=False)


def _t_for_distortion_newton(values, weights, d_star: float) -> float:
    """Optimizer fast path: bracketed Newton on the distortion equation.

    Agrees with the public bisection solver to ~1e-12 relative; kept as an
    independent route and cross-checked in tests.
    """
    lo, hi = 0.0, 1.0
    while _d_rc(values, weights, hi) > d_star:
        lo, hi = hi, hi * 2.0
        if hi > T_BRACKET_CAP:
            raise SolverError(f"d_star {d_star} not bracketed below T = 2^200")
    T = 0.5 * (lo + hi)
    for _ in range(80):
        g = _d_rc(values, weights, T) - d_star
        if g > 0.0:
            lo = T
        else:
            hi = T
        gp = -sum(w * v * v / (1.0 + v * T) ** 2 for v, w in zip(values, weights))
        step = g / gp if gp != 0.0 else 0.0
        T_new = T - step
        if not lo < T_new < hi:
            T_new = 0.5 * (lo + hi)
        if abs(T_new - T) <= 1e-14 * max(T_new, 1e-300):
            return T_new
        T = T_new
    return T


def t_rc_for_rate(s: Spectrum, rate: float) -> float:
    """The unique T with r_rc(s, T) = rate, rate > 0."""
    if not rate > 0.0:
        raise ValueError("rate must be positive")
    return _t_for_rate(s.values, s.weights, rate)


def t_rc_for_distortion(s: Spectrum, d_star: float) -> float:
    """The unique T with d_rc(s, T) = d_star, d_star in (0, 1)."""
    if not 0.0 < d_star < 1.0:
        raise ValueError("d_star must lie in (0, 1)")
    return _t_for_distortion(s.values, s.weights, d_star)


def rr_rc(s: Spectrum, d_star: float) -> float:
    """Random-coding rate in bits at target distortion."""
    return r_rc(s, t_rc_for_distortion(s, d_star))


def dd_rc(s: Spectrum, rate: float) -> float:
    """Random-coding distortion at a given rate; the mean eigenvalue at rate 0."""
    if rate < 0.0:
        raise ValueError("rate must be nonnegative")
    if rate == 0.0:
        return d_rc(s, 0.0)
    return d_rc(s, t_rc_for_rate(s, rate))


def point_at_rate(s: Spectrum, rate: float) -> RcPoint:
    T = t_rc_for_rate(s, rate)
    return RcPoint(level_T=T, distortion=d_rc(s, T), rate_bits=r_rc(s, T))


def _coordinate_lambdas(s: Spectrum, n: int) -> np.ndarray:
    lams, dropped = expand_to_n(s, n)
    if dropped:
        raise ValueError(
            f"levels {dropped} receive zero dimensions at n={n}; use a larger n"
        )
    return lams

def d_rc_per_w(s: Spectrum, w_tilde_sq, T: float) -> float:
    """Per-realization distortion D(V, T) for squared eigenbasis coordinates.

    Entries of length s.k are per-level average squared coordinates;
    any other length is treated as per-coordinate at dimension n = len(...).
    Reduces to d_rc when all entries are 1.
    """
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    x = [float(u) for u in w_tilde_sq]
    if any(u < 0.0 for u in x):
        raise ValueError("squared coordinates must be nonnegative")
    if len(x) == s.k:
        return sum(w * u * v / (1.0 + v * T) for v, w, u in zip(s.values, s.weights, x))
    lams = _coordinate_lambdas(s, len(x))
    return float(np.asarray(x) @ (lams / (1.0 + lams * T))) / len(x)


def tau(s: Spectrum, w_tilde, rate: float, threshold: float | None = None) -> float:
    """Codebook scaling tau for a source realization in the eigenbasis.

    tau = sqrt(T * sum w~_j^2 lam_j^2/(1+lam_j T)^2) / sqrt(sum lam_j/(1+lam_j T))
    with T solved from the rate.  A vector of length s.k is read per-level
    (entries are root-mean-square coordinates at that level); any other
    length is per-coordinate.  With a threshold, tau is 0 whenever
    ||w~||_inf exceeds it.  Always satisfies 0 <= tau <= ||w~||_inf.
    """
    if not rate > 0.0:
        raise ValueError("rate must be positive")
    if threshold is not None and threshold < 0.0:
        raise ValueError("threshold must be nonnegative")
    w = np.asarray([float(u) for u in w_tilde], dtype=float)
    if threshold is not None and float(np.max(np.abs(w), initial=0.0)) > threshold:
        return 0.0
    T = t_rc_for_rate(s, rate)
    if len(w) == s.k:
        num = T * sum(
            wt * u * u * v * v / (1.0 + v * T) ** 2
            for v, wt, u in zip(s.values, s.weights, w)
        )
        den = sum(wt * v / (1.0 + v * T) for v, wt in zip(s.values, s.weights))
    else:
        lams = _coordinate_lambdas(s, len(w))
        num = T * float((w * w) @ (lams**2 / (1.0 + lams * T) ** 2))
        den = float(np.sum(lams / (1.0 + lams * T)))
    return math.sqrt(num) / math.sqrt(den)


def quantize_tau(tau_val: float, w_inf_norm: float, delta: float) -> float:
    """Round tau to the nearest multiple of delta * ||w~||_inf (half away up).

    |q(tau) - tau| <= delta * ||w~||_inf / 2.
    """
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    if not w_inf_norm > 0.0:
        raise ValueError("w_inf_norm must be positive")
    unit = delta * w_inf_norm
    return unit * math.floor(tau_val / unit + 0.5)


def dd_rc_eigen_sensitivity(s: Spectrum, rate: float, level_index: int, step: float | None = None) -> float:
    """Central finite-difference sensitivity of the per-dimension distortion
    at fixed rate with respect to a single eigenvalue level.

    The perturbed value vectors are intentionally not renormalized (the
    distortion formulas do not need unit mean); the estimate is divided by
    the level weight so it is a per-eigenvalue figure, bounded by [0, 2].
    """
    if not rate > 0.0:
        raise ValueError("rate must be positive")
    j = int(level_index)
    if not 0 <= j < s.k:
        raise ValueError("level_index out of range")
    values = list(s.values)
    h = step if step is not None else 1e-6 * max(1.0, values[j])

    def dd(vals) -> float:
        T = _t_for_rate(vals, s.weights, rate)
        return _d_rc(vals, s.weights, T)

    hi = values.copy()
    lo = values.copy()
    hi[j] += h
    lo[j] -= h
    if lo[j] < 0.0:
        raise ValueError("step too large for this level")
    return (dd(hi) - dd(lo)) / (2.0 * h * s.weights[j])
