"""Oracle waterfilling rate-distortion curve.

Distortion at water level t is sum_j w_j * min(v_j, t); rate in bits is
(1/2) sum_j w_j * max(0, log2(v_j / t)).  All rates are per dimension,
base-2.  The module exposes Spectrum-level operations plus private
array-based cores shared with the gap optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SolverError
from .spectra import Spectrum

BISECT_ABS_TOL = 1e-13
BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class WfPoint:
    """A point on the waterfilling curve."""

    level_t: float
    distortion: float
    rate_bits: float


def _d_wf(values, weights, t: float) -> float:
    return sum(w * (v if v < t else t) for v, w in zip(values, weights))


def _r_wf(values, weights, t: float) -> float:
    # Zero levels never satisfy v > t, so the max{0, log(lambda/t)} summand
    # never sees a -inf branch.
    acc = 0.0
    for v, w in zip(values, weights):
        if v > t:
            acc += w * math.log2(v / t)
    return 0.5 * acc


def _check_t(t: float) -> None:
    if not t > 0.0:
        raise ValueError("water level t must be positive")


def d_wf(s: Spectrum, t: float) -> float:
    """Distortion at water level t; nondecreasing in t, 1 for t >= max value."""
    _check_t(t)
    if t >= s.max_value:
        return 1.0
    # The stored mean is 1 only to 1e-12, so cap the rounding residue.
    return min(_d_wf(s.values, s.weights, t), 1.0)


def r_wf(s: Spectrum, t: float) -> float:
    """Rate in bits at water level t; nonincreasing, 0 for t >= max value."""
    _check_t(t)
    return _r_wf(s.values, s.weights, t)


def _t_for_distortion(values, weights, d_star: float) -> float:
    """Bracketed bisection on [0, max value] to absolute tolerance 1e-13.

    Exits early on an exact residual so that dyadic targets (flat spectrum,
    semi-flat grids) return exact water levels.
    """
    lo, hi = 0.0, values[0]
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        d = _d_wf(values, weights, mid)
        if d == d_star:
            return mid
        if d < d_star:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_ABS_TOL:
            return 0.5 * (lo + hi)
    raise SolverError(
        f"waterfilling bisection did not converge: interval [{lo}, {hi}]"
    )


def t_for_distortion(s: Spectrum, d_star: float) -> float:
    """The unique t with d_wf(s, t) = d_star, for d_star in (0, 1).

    d_star >= 1 is rejected: the rate there is 0 and t is not unique
    (any t >= max value works), so callers must handle that regime.
    """
    if not 0.0 < d_star < 1.0:
        raise ValueError("d_star must lie in (0, 1)")
    return _t_for_distortion(s.values, s.weights, d_star)


def _t_wf_exact(values, weights, d_star: float) -> float:
    """Closed-form waterfilling solve (piecewise-linear inversion).

    Optimizer fast path; agrees with the public bisection to ~1e-13.
    Does not require unit-mean normalization: d_star must lie in
    (0, sum w*v).
    """
    # Walk segments from the smallest level upward.  Within a segment all
    # levels above contribute t, the rest contribute their own value.
    below = 0.0  # sum of w*v over levels <= current segment floor
    wabove = sum(weights)
    for v, w in sorted(zip(values, weights), key=lambda p: p[0]):
        d_at_v = below + wabove * v
        if d_at_v >= d_star:
            return (d_star - below) / wabove
        below += w * v
        wabove -= w
    raise SolverError(f"d_star {d_star} not reachable (mean {below})")


def rr_wf(s: Spectrum, d_star: float) -> float:
    """Minimum oracle rate in bits achieving distortion d_star."""
    return r_wf(s, t_for_distortion(s, d_star))


def dd_wf(s: Spectrum, rate: float) -> float:
    """Distortion at a given oracle rate; 1 at rate 0."""
    if rate < 0.0:
        raise ValueError("rate must be nonnegative")
    if rate == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        r = rr_wf(s, mid)
        if r == rate:
            return mid
        if r > rate:  # rate decreases in distortion
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_ABS_TOL:
            return 0.5 * (lo + hi)
    raise SolverError(f"distortion bisection did not converge: [{lo}, {hi}]")


def per_coord_distortions(s: Spectrum, t: float) -> list[float]:
    """Per-level distortion shares D_j = min(t / v_j, 1), 1 at zero levels."""
    _check_t(t)
    return [min(t / v, 1.0) if v > 0.0 else 1.0 for v in s.values]


def point_at_distortion(s: Spectrum, d_star: float) -> WfPoint:
    """The full waterfilling curve point for a target distortion."""
    t = t_for_distortion(s, d_star)
    return WfPoint(level_t=t, distortion=_d_wf(s.values, s.weights, t), rate_bits=_r_wf(s.values, s.weights, t))
