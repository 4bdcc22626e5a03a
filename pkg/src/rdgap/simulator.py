"""Monte-Carlo validation of the quantization scheme and its couplings.

Randomness contract (repository constant): every draw comes from numpy's
Philox 4x64-10 counter-based generator, with one substream per unit of work
derived as SeedSequence(entropy=seed, spawn_key=(stream_id, unit_index)).
Units are trials for the scheme/coupling/filter runs and source batches for
success-probability runs; codebook and rotation have dedicated streams.
Parallel execution distributes whole units and reduces in unit order, so
results never depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rdrc, waterfill
from ._parallel import ordered_map, resolve_threads
from .spectra import Spectrum, expand_to_n

STREAM_CODEBOOK = 1
STREAM_ROTATION = 2
STREAM_TRIAL = 3
STREAM_WBATCH = 4

_CHUNK = 256  # trials per work unit; fixed so chunking never depends on threads
_CODEWORD_BLOCK = 8192  # codewords per distance block (memory cap)

_Z_TWO_SIDED = 1.959963984540054  # 97.5% normal quantile
_Z_ONE_SIDED = 1.6448536269514722  # 95% normal quantile


def _rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimConfig:
    """Full deterministic description of a Monte-Carlo run."""

    n: int
    rate_bits: float
    spectrum: Spectrum
    trials: int
    seed: int
    rotation: str = "identity"
    tau_delta: float | None = None
    tau_threshold: float | None = None
    codebook_cap: int = 2**22
    eta: float = 0.0
    w_batches: int = 64

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.rate_bits < 0.0:
            raise ValueError("rate_bits must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.rotation not in ("identity", "haar"):
            raise ValueError("rotation must be 'identity' or 'haar'")
        if self.tau_delta is not None and not self.tau_delta > 0.0:
            raise ValueError("tau_delta must be positive when given")
        if self.tau_threshold is not None and self.tau_threshold < 0.0:
            raise ValueError("tau_threshold must be nonnegative when given")
        if self.codebook_cap < 1:
            raise ValueError("codebook_cap must be positive")
        if self.eta < 0.0:
            raise ValueError("eta must be nonnegative")
        if self.w_batches < 1:
            raise ValueError("w_batches must be positive")

    @property
    def codebook_size(self) -> int:
        return max(1, int(math.floor(2.0 ** (self.n * self.rate_bits))))


@dataclass(frozen=True)
class Codebook:
    """M iid standard normal codewords; bit-identical regeneration from seed."""

    vectors: np.ndarray  # (M, n), read-only
    seed: int


@dataclass(frozen=True)
class SimReport:
    """Measured statistics with uncertainty; reproducible from the config."""

    mode: str
    mean: float
    se: float
    analytic: float
    trials: int
    p_hat: float | None = None
    wilson_low: float | None = None
    wilson_high: float | None = None
    exponent: float | None = None
    exponent_is_lower_bound: bool = False
    warnings: tuple[str, ...] = ()
    per_trial: np.ndarray | None = None


def haar_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR with positive diagonal of R)."""
    if n < 1:
        raise ValueError("n must be positive")
    g = _rng(seed, STREAM_ROTATION).standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    return q * d


def build_codebook(config: SimConfig) -> Codebook:
    m = config.codebook_size
    if m > config.codebook_cap:
        raise ValueError(
            f"codebook of size {m} exceeds codebook_cap {config.codebook_cap}"
        )
    vectors = _rng(config.seed, STREAM_CODEBOOK).standard_normal((m, config.n))
    vectors.setflags(write=False)
    return Codebook(vectors=vectors, seed=config.seed)


def _realized_lambdas(s: Spectrum, n: int) -> tuple[np.ndarray, tuple[str, ...]]:
    """Concrete eigenvalues for dimension n, with drop warnings and rescale."""
    lams, dropped = expand_to_n(s, n)
    warnings = ()
    if dropped:
        amount = ", ".join(
            f"value {s.values[j]!r} (weight {s.weights[j]!r})" for j in dropped
        )
        warnings = (
            f"apportionment to n={n} left zero dimensions for: {amount}; "
            "dropped and remaining eigenvalues rescaled to unit mean",
        )
        lams = lams / lams.mean()
    return lams, warnings


def _trial_normals(seed: int, start: int, count: int, cols: int, draws: int = 1) -> list[np.ndarray]:
    """Stack per-trial substream draws: `draws` vectors of length `cols` each."""
    out = [np.empty((count, cols)) for _ in range(draws)]
    for i in range(count):
        rng = _rng(seed, STREAM_TRIAL, start + i)
        for d in range(draws):
            out[d][i] = rng.standard_normal(cols)
    return out


def _mean_se(per_trial: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(per_trial))
    se = float(np.std(per_trial, ddof=1) / math.sqrt(per_trial.size)) if per_trial.size > 1 else 0.0
    return mean, se


def _wilson(successes: int, total: int) -> tuple[float, float]:
    if successes == 0:
        z = _Z_ONE_SIDED
        return 0.0, z * z / (total + z * z)
    z = _Z_TWO_SIDED
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# --- universal quantization scheme -----------------------------------------

_SCHEME_STATE: dict | None = None


def _scheme_chunk(args: tuple[int, int]) -> np.ndarray:
    start, count = args
    st = _SCHEME_STATE
    n = st["n"]
    lam = st["lam"]
    (w,) = _trial_normals(st["seed"], start, count, n)
    wt = w @ st["u"] if st["u"] is not None else w
    wsq = wt * wt
    norms = np.max(np.abs(wt), axis=1)
    T = st["T"]
    tau = np.sqrt(T * (wsq @ st["alam2"]) / st["den"])
    if st["threshold"] is not None:
        tau = np.where(norms > st["threshold"], 0.0, tau)
    # The scaling rule never exceeds the sup-norm; checked for every trial.
    assert np.all(tau >= 0.0) and np.all(tau <= norms * (1.0 + 1e-12) + 1e-300)
    if st["delta"] is not None:
        unit = st["delta"] * norms
        with np.errstate(invalid="ignore", divide="ignore"):
            q = unit * np.floor(tau / unit + 0.5)
        tau = np.where(unit > 0.0, q, 0.0)
    a0 = wsq @ lam
    wl = wt * lam
    cb = st["codebook_rot"]
    g = st["codebook_gram"]
    best = np.full(count, np.inf)
    for b0 in range(0, cb.shape[0], _CODEWORD_BLOCK):
        blk = slice(b0, min(b0 + _CODEWORD_BLOCK, cb.shape[0]))
        score = tau[:, None] ** 2 * g[None, blk] - 2.0 * tau[:, None] * (wl @ cb[blk].T)
        np.minimum(best, score.min(axis=1), out=best)
    return (a0 + best) / n


def run_universal_scheme(
    config: SimConfig, threads: int | None = None, keep_per_trial: bool = False
) -> SimReport:
    """Run the random-codebook quantizer end to end.

    Per trial: draw W ~ N(0, I_n), compute the scaling tau in the eigenbasis
    (optionally thresholded then quantized), pick the codeword minimizing the
    covariance-weighted error (lowest index on ties), and record the
    per-dimension distortion.  The analytic reference is dd_rc at the
    configured rate.
    """
    if not config.rate_bits > 0.0:
        raise ValueError("scheme mode needs rate_bits > 0")
    lam, warnings = _realized_lambdas(config.spectrum, config.n)
    u = None if config.rotation == "identity" else haar_orthogonal(config.n, config.seed)
    codebook = build_codebook(config)
    c_rot = codebook.vectors @ u if u is not None else codebook.vectors
    T = rdrc._t_for_rate(lam.tolist(), [1.0 / config.n] * config.n, config.rate_bits)
    global _SCHEME_STATE
    _SCHEME_STATE = {
        "n": config.n,
        "seed": config.seed,
        "lam": lam,
        "u": u,
        "T": T,
        "alam2": lam**2 / (1.0 + lam * T) ** 2,
        "den": float(np.sum(lam / (1.0 + lam * T))),
        "threshold": config.tau_threshold,
        "delta": config.tau_delta,
        "codebook_rot": c_rot,
        "codebook_gram": (c_rot * c_rot) @ lam,
    }
    try:
        chunks = [(i, min(_CHUNK, config.trials - i)) for i in range(0, config.trials, _CHUNK)]
        parts = ordered_map(_scheme_chunk, chunks, resolve_threads(threads))
    finally:
        _SCHEME_STATE = None
    per_trial = np.concatenate(parts)
    mean, se = _mean_se(per_trial)
    return SimReport(
        mode="scheme",
        mean=mean,
        se=se,
        analytic=rdrc.dd_rc(config.spectrum, config.rate_bits),
        trials=config.trials,
        warnings=warnings,
        per_trial=per_trial if keep_per_trial else None,
    )


# --- single-codeword success probability ------------------------------------

_SUCCESS_STATE: dict | None = None


def _success_batch(b: int) -> int:
    st = _SUCCESS_STATE
    if st["T"] == 0.0:
        # Degenerate boundary: tau = 0 makes the distance equal the target
        # minus eta exactly, so every draw succeeds; skip the float compare.
        return st["trials"]
    rng = _rng(st["seed"], STREAM_WBATCH, b)
    w = rng.standard_normal(st["n"])
    wt = w @ st["u"] if st["u"] is not None else w
    wsq = wt * wt
    norm = float(np.max(np.abs(wt)))
    target = float(wsq @ st["dlam"]) / st["n"] + st["eta"]
    T = st["T"]
    tau = math.sqrt(T * float(wsq @ st["alam2"]) / st["den"]) if T > 0.0 else 0.0
    if st["threshold"] is not None and norm > st["threshold"]:
        tau = 0.0
    assert 0.0 <= tau <= norm * (1.0 + 1e-12) + 1e-300
    if st["delta"] is not None and norm > 0.0:
        tau = rdrc.quantize_tau(tau, norm, st["delta"])
    c = rng.standard_normal((st["trials"], st["n"]))
    ct = c @ st["u"] if st["u"] is not None else c
    diff = wt[None, :] - tau * ct
    d = (diff * diff) @ st["lam"] / st["n"]
    return int(np.count_nonzero(d <= target))


def estimate_codeword_success(config: SimConfig, threads: int | None = None) -> SimReport:
    """Estimate the probability that one random codeword lands inside the
    per-realization distortion ball, over w_batches sources x trials codewords.

    Reports the pooled success fraction, its Wilson 95% interval, and the
    empirical exponent -(1/n) log2 p.  rate_bits = 0 is the degenerate
    boundary (tau = 0, success certain).
    """
    if config.rate_bits > 0.0 and not config.eta > 0.0:
        raise ValueError("success mode needs eta > 0")
    if config.n * config.rate_bits > 26.0:
        raise ValueError("n * rate_bits must be <= 26 for direct sampling")
    lam, warnings = _realized_lambdas(config.spectrum, config.n)
    u = None if config.rotation == "identity" else haar_orthogonal(config.n, config.seed)
    T = (
        rdrc._t_for_rate(lam.tolist(), [1.0 / config.n] * config.n, config.rate_bits)
        if config.rate_bits > 0.0
        else 0.0
    )
    global _SUCCESS_STATE
    _SUCCESS_STATE = {
        "n": config.n,
        "seed": config.seed,
        "trials": config.trials,
        "eta": config.eta,
        "lam": lam,
        "u": u,
        "T": T,
        "dlam": lam / (1.0 + lam * T),
        "alam2": lam**2 / (1.0 + lam * T) ** 2,
        "den": float(np.sum(lam / (1.0 + lam * T))),
        "threshold": config.tau_threshold,
        "delta": config.tau_delta,
    }
    try:
        counts = ordered_map(
            _success_batch, list(range(config.w_batches)), resolve_threads(threads)
        )
    finally:
        _SUCCESS_STATE = None
    total = config.trials * config.w_batches
    successes = int(sum(counts))
    p_hat = successes / total
    low, high = _wilson(successes, total)
    if successes > 0:
        exponent = -math.log2(p_hat) / config.n
        lower_only = False
    else:
        exponent = -math.log2(high) / config.n
        lower_only = True
    se = math.sqrt(p_hat * (1.0 - p_hat) / total)
    return SimReport(
        mode="success",
        mean=p_hat,
        se=se,
        analytic=config.rate_bits,
        trials=total,
        p_hat=p_hat,
        wilson_low=low,
        wilson_high=high,
        exponent=exponent,
        exponent_is_lower_bound=lower_only,
        warnings=warnings,
    )


# --- exact-expectation constructions ----------------------------------------

_COUPLING_STATE: dict | None = None


def _coupling_chunk(args: tuple[int, int]) -> np.ndarray:
    start, count = args
    st = _COUPLING_STATE
    z, ynoise = _trial_normals(st["seed"], start, count, st["n"], draws=2)
    y = st["sig_y"] * ynoise
    w = y + st["sqrt_d"] * z
    err = w - y
    return (err * err) @ st["weighted"] / st["n"]


def simulate_wf_coupling(
    s: Spectrum,
    t: float,
    n: int,
    trials: int,
    seed: int,
    threads: int | None = None,
    keep_per_trial: bool = False,
) -> SimReport:
    """Simulate the test-channel coupling W_i = Y_i + sqrt(D_i) Z_i and measure
    the covariance-weighted error against Y; its expectation is exactly d_wf."""
    if not t > 0.0:
        raise ValueError("water level t must be positive")
    lam, warnings = _realized_lambdas(s, n)
    d = np.minimum(np.divide(t, lam, out=np.full(n, np.inf), where=lam > 0.0), 1.0)
    global _COUPLING_STATE
    _COUPLING_STATE = {
        "n": n,
        "seed": seed,
        "sqrt_d": np.sqrt(d),
        "sig_y": np.sqrt(1.0 - d),
        "weighted": lam,
    }
    try:
        chunks = [(i, min(_CHUNK, trials - i)) for i in range(0, trials, _CHUNK)]
        parts = ordered_map(_coupling_chunk, chunks, resolve_threads(threads))
    finally:
        _COUPLING_STATE = None
    per_trial = np.concatenate(parts)
    mean, se = _mean_se(per_trial)
    return SimReport(
        mode="coupling",
        mean=mean,
        se=se,
        analytic=waterfill.d_wf(s, t),
        trials=trials,
        warnings=warnings,
        per_trial=per_trial if keep_per_trial else None,
    )


_FILTER_STATE: dict | None = None


def _filter_chunk(args: tuple[int, int]) -> np.ndarray:
    start, count = args
    st = _FILTER_STATE
    gx, gz = _trial_normals(st["seed"], start, count, st["n"], draws=2)
    x = st["sqrt_lam"] * gx
    z = st["noise_scale"] * gz
    e = (st["f"] - 1.0) * x + st["f"] * z
    return np.sum(e * e, axis=1) / st["n"]


def simulate_mmse_filter(
    s: Spectrum,
    T: float,
    n: int,
    trials: int,
    seed: int,
    threads: int | None = None,
    keep_per_trial: bool = False,
) -> SimReport:
    """Add white noise at level 1/T and MMSE-estimate back; the mean squared
    error per dimension has expectation exactly d_rc(s, T)."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    lam, warnings = _realized_lambdas(s, n)
    global _FILTER_STATE
    _FILTER_STATE = {
        "n": n,
        "seed": seed,
        "sqrt_lam": np.sqrt(lam),
        "noise_scale": 1.0 / math.sqrt(T),
        "f": lam * T / (1.0 + lam * T),
    }
    try:
        chunks = [(i, min(_CHUNK, trials - i)) for i in range(0, trials, _CHUNK)]
        parts = ordered_map(_filter_chunk, chunks, resolve_threads(threads))
    finally:
        _FILTER_STATE = None
    per_trial = np.concatenate(parts)
    mean, se = _mean_se(per_trial)
    return SimReport(
        mode="filter",
        mean=mean,
        se=se,
        analytic=rdrc.d_rc(s, T),
        trials=trials,
        warnings=warnings,
        per_trial=per_trial if keep_per_trial else None,
    )
