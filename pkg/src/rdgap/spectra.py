"""Eigenvalue spectra normalized to unit mean.

A Spectrum stores the distinct eigenvalue levels of a covariance matrix
together with the fraction of dimensions at each level.  The mean eigenvalue
is pinned to 1 (one unit of variance per dimension), which makes every
downstream curve formula dimension-free: a single Spectrum describes the
same source at any dimension n.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

WEIGHT_SUM_TOL = 1e-12
UNIT_MEAN_TOL = 1e-12

# Substream id used by sample_random; see README "Randomness" for the full map.
_STREAM_SPECTRA = 0


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalue levels (strictly decreasing) with mass fractions.

    weights are positive, sum to 1, and the weighted mean of values is 1.
    Zero eigenvalues are a regular level (rank deficiency is a first-class
    case).  Instances are immutable and safe to share across threads.
    """

    values: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if not values or len(values) != len(weights):
            raise ValueError("values and weights must be nonempty and equally long")
        if any(v < 0.0 for v in values):
            raise ValueError("eigenvalues must be nonnegative")
        if any(values[i] <= values[i + 1] for i in range(len(values) - 1)):
            raise ValueError("values must be strictly decreasing (no duplicates)")
        if values[0] <= 0.0:
            raise ValueError("at least one eigenvalue must be positive")
        if any(not 0.0 < w <= 1.0 for w in weights):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to 1")
        mean = sum(w * v for w, v in zip(weights, values))
        if abs(mean - 1.0) > UNIT_MEAN_TOL:
            raise ValueError(f"weighted mean must be 1, got {mean!r}")

    @property
    def k(self) -> int:
        """Number of distinct levels."""
        return len(self.values)

    @property
    def max_value(self) -> float:
        return self.values[0]

    def as_literal(self) -> str:
        """Render in the CLI literal form ``v1:w1,v2:w2,...``."""
        return ",".join(f"{v!r}:{w!r}" for v, w in zip(self.values, self.weights))


def flat() -> Spectrum:
    """The flat (identity-covariance) spectrum."""
    return Spectrum((1.0,), (1.0,))


def from_eigenvalues(raw) -> Spectrum:
    """Canonicalize a raw eigenvalue list: scale to unit mean, merge exact
    duplicates into weighted levels, sort decreasing."""
    vals = [float(v) for v in raw]
    if not vals:
        raise ValueError("eigenvalue list is empty")
    if any(v < 0.0 for v in vals):
        raise ValueError("eigenvalues must be nonnegative")
    mean = sum(vals) / len(vals)
    if mean <= 0.0:
        raise ValueError("all eigenvalues are zero")
    scaled = [v / mean for v in vals]
    counts: dict[float, int] = {}
    for v in scaled:
        counts[v] = counts.get(v, 0) + 1
    levels = sorted(counts, reverse=True)
    n = len(vals)
    return Spectrum(tuple(levels), tuple(counts[v] / n for v in levels))


def semi_flat(active_fraction: float) -> Spectrum:
    """One positive level on a fraction of the dimensions, zeros elsewhere.

    Degenerates to the flat spectrum at active_fraction = 1.
    """
    f = float(active_fraction)
    if not 0.0 < f <= 1.0:
        raise ValueError("active_fraction must lie in (0, 1]")
    if f == 1.0:
        return flat()
    return Spectrum((1.0 / f, 0.0), (f, 1.0 - f))


def merge_close(s: Spectrum, tol: float) -> Spectrum:
    """Merge levels within tol of each other into their weight-averaged value.

    Adjacent-value chains closer than tol merge transitively.  The result is
    re-normalized to unit mean.  tol = 0 returns s unchanged.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    if tol == 0.0 or s.k == 1:
        return s
    values, weights = _merge_values(s.values, s.weights, tol)
    mean = sum(w * v for w, v in zip(weights, values))
    return Spectrum(tuple(v / mean for v in values), tuple(weights))


def _merge_values(values, weights, tol):
    """Single-linkage merge of a decreasing value list; no normalization."""
    out_v: list[float] = []
    out_w: list[float] = []
    cur_v = values[0]
    cur_w = weights[0]
    cur_sum = values[0] * weights[0]
    for v, w in zip(values[1:], weights[1:]):
        if cur_v - v <= tol:
            cur_w += w
            cur_sum += v * w
            cur_v = v  # chain on the running lower edge
        else:
            out_v.append(cur_sum / cur_w)
            out_w.append(cur_w)
            cur_v, cur_w, cur_sum = v, w, v * w
    out_v.append(cur_sum / cur_w)
    out_w.append(cur_w)
    total = sum(out_w)
    return [v for v in out_v], [w / total for w in out_w]


def sample_random(k: int, seed: int) -> Spectrum:
    """A deterministic random Spectrum with at most k distinct levels.

    Levels are log-uniform over e^[-3, 3] before normalization; weights are
    Dirichlet(1).  Rejects near-degenerate draws so the result always passes
    the full invariant set.
    """
    if not 1 <= int(k) <= 16:
        raise ValueError("k must lie in 1..16")
    k = int(k)
    if k == 1:
        return flat()
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=int(seed), spawn_key=(_STREAM_SPECTRA,)))
    )
    for _ in range(64):
        values = np.exp(rng.uniform(-3.0, 3.0, size=k))
        weights = rng.dirichlet(np.ones(k))
        if float(weights.min()) < 1e-6:
            continue
        order = np.argsort(-values)
        values, weights = values[order], weights[order]
        values = values / float(values @ weights)
        weights = weights / float(weights.sum())
        if k > 1 and float(np.min(values[:-1] - values[1:])) <= 1e-9 * float(values[0]):
            continue
        return Spectrum(tuple(float(v) for v in values), tuple(float(w) for w in weights))
    raise RuntimeError("could not sample a non-degenerate spectrum")


def expand_to_n(s: Spectrum, n: int) -> tuple[np.ndarray, list[int]]:
    """Expand to n concrete eigenvalues by largest-remainder apportionment.

    Returns (eigenvalues sorted decreasing, indices of levels that received
    zero dimensions).  The caller decides how to handle dropped levels; the
    returned eigenvalues are NOT rescaled here.
    """
    if n < 1:
        raise ValueError("n must be positive")
    quotas = [w * n for w in s.weights]
    counts = [int(q) for q in quotas]
    short = n - sum(counts)
    # Hand leftover dimensions to the largest fractional remainders,
    # ties to the larger eigenvalue (lower index) for determinism.
    order = sorted(range(s.k), key=lambda j: (-(quotas[j] - counts[j]), j))
    for j in order[:short]:
        counts[j] += 1
    dropped = [j for j in range(s.k) if counts[j] == 0]
    lams = np.repeat(np.asarray(s.values, dtype=float), counts)
    return lams, dropped


def parse_spectrum(text: str) -> Spectrum:
    """Parse the CLI spectrum literal.

    Accepted forms: ``flat``, ``semiflat:<fraction>``, ``v1:w1,v2:w2,...``,
    or ``@file.csv`` with columns value,weight.  Weights are normalized to
    sum 1 and values rescaled to unit mean, so unnormalized masses are fine.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty spectrum literal")
    if text == "flat":
        return flat()
    if text.startswith("semiflat:"):
        return semi_flat(float(text.split(":", 1)[1]))
    if text.startswith("@"):
        pairs = _read_spectrum_csv(Path(text[1:]))
    else:
        pairs = []
        for item in text.split(","):
            parts = item.split(":")
            if len(parts) != 2:
                raise ValueError(f"bad spectrum item {item!r}, expected value:weight")
            pairs.append((float(parts[0]), float(parts[1])))
    return _from_pairs(pairs)


def _read_spectrum_csv(path: Path) -> list[tuple[float, float]]:
    pairs = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                pairs.append((float(row[0]), float(row[1])))
            except ValueError:
                continue  # header row
    if not pairs:
        raise ValueError(f"no value,weight rows in {path}")
    return pairs


def _from_pairs(pairs: list[tuple[float, float]]) -> Spectrum:
    for v, w in pairs:
        if v < 0.0:
            raise ValueError("eigenvalues must be nonnegative")
        if w <= 0.0:
            raise ValueError("weights must be positive")
    merged: dict[float, float] = {}
    for v, w in pairs:
        merged[v] = merged.get(v, 0.0) + w
    values = sorted(merged, reverse=True)
    weights = [merged[v] for v in values]
    wsum = sum(weights)
    weights = [w / wsum for w in weights]
    mean = sum(w * v for w, v in zip(weights, values))
    if mean <= 0.0:
        raise ValueError("all eigenvalues are zero")
    return Spectrum(tuple(v / mean for v in values), tuple(weights))
