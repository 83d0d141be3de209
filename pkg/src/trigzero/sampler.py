"""Exact sampling of the stationary Gaussian coefficient sequences.

The atomic part of the spectral measure is synthesized exactly from one
cos/sin pair per atom; the absolutely continuous part goes through circulant
embedding of its Toeplitz covariance, falling back to a (cached) Cholesky
factor when the embedding has structurally negative eigenvalues, which
happens for densities with jumps (the Gibbs oscillation of the truncated
Fourier series does not shrink with the embedding size).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, toeplitz

from .kernels import next_pow2

# relative eigenvalue clip: below this the covariance perturbation is far
# under Monte Carlo noise
EIG_CLIP_REL = 1e-8
EMBED_SIZE_CAP = 2**24
CHOLESKY_MAX_N = 4096


class EmbeddingError(RuntimeError):
    def __init__(self, msg, min_eigenvalue=None, need_lags=None):
        super().__init__(msg)
        self.min_eigenvalue = min_eigenvalue
        self.need_lags = need_lags


@dataclass
class CoefficientSample:
    """One realization of the coefficient pair (a_1..a_n, b_1..b_n)."""

    n: int
    a: np.ndarray
    b: np.ndarray
    master_seed: int
    stream_id: int


@dataclass
class EmbeddingPlan:
    target_n: int
    embedding_size: int
    eigenvalues: np.ndarray
    clip_magnitude: float


def _covariance_values(density, max_lag):
    lags = np.arange(max_lag + 1)
    return density.correlation(lags)


def build_embedding(cov, n, size_cap=EMBED_SIZE_CAP):
    """Nonnegative circulant embedding of the Toeplitz covariance cov(0..).

    cov must reach lag M for embedding size 2M; M starts at the next power
    of two >= 2n and doubles while negative eigenvalues keep shrinking.
    Stagnating negatives (a density with jumps) fail fast.
    """
    cov = np.asarray(cov, dtype=float)
    m = next_pow2(2 * n)
    worst_prev = None
    while True:
        if len(cov) - 1 < m:
            raise EmbeddingError(
                f"embedding size {2 * m} needs covariance lags to {m}, "
                f"have {len(cov) - 1}",
                min_eigenvalue=worst_prev,
                need_lags=m,
            )
        row = np.concatenate([cov[: m + 1], cov[m - 1 : 0 : -1]])
        lam = np.fft.fft(row).real
        lam_max = float(lam.max())
        lam_min = float(lam.min())
        tol = EIG_CLIP_REL * max(lam_max, 1e-300)
        if lam_min >= -tol:
            clip = max(0.0, -lam_min)
            return EmbeddingPlan(
                target_n=n,
                embedding_size=2 * m,
                eigenvalues=np.clip(lam, 0.0, None),
                clip_magnitude=clip,
            )
        # negatives that do not shrink under doubling are structural (Gibbs
        # oscillation at a density jump): fail fast instead of burning the cap
        if worst_prev is not None and abs(lam_min) > 0.7 * abs(worst_prev):
            raise EmbeddingError(
                f"circulant eigenvalues stagnate at {lam_min:.3e} "
                f"(size {2 * m}); covariance is not embeddable",
                min_eigenvalue=lam_min,
            )
        worst_prev = lam_min
        if 4 * m > size_cap:
            raise EmbeddingError(
                f"embedding size cap {size_cap} exceeded (min eig {lam_min:.3e})",
                min_eigenvalue=lam_min,
            )
        m *= 2


def _draw_from_plan(plan, n, rng):
    """One stationary Gaussian vector of length n from an embedding plan."""
    size = plan.embedding_size
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    y = np.fft.fft(z * np.sqrt(plan.eigenvalues / size))
    return y.real[:n]


# plans and Cholesky factors are deterministic in (measure, n): cache them
_plan_cache: dict = {}
_chol_cache: dict = {}


def _density_sampler(density, n):
    """Returns draw(rng) -> length-n vector with the density's covariance."""
    key = (density.cache_key(), n)
    if key in _plan_cache:
        plan = _plan_cache[key]
        return lambda rng: _draw_from_plan(plan, n, rng)
    if key in _chol_cache:
        L = _chol_cache[key]
        return lambda rng: L @ rng.standard_normal(n)
    lag_need = next_pow2(2 * n)
    failure = None
    while failure is None:
        cov = _covariance_values(density, lag_need)
        try:
            plan = build_embedding(cov, n)
            _plan_cache[key] = plan
            return lambda rng: _draw_from_plan(plan, n, rng)
        except EmbeddingError as exc:
            if exc.need_lags is not None and 2 * exc.need_lags <= EMBED_SIZE_CAP // 2:
                lag_need = 2 * exc.need_lags
            else:
                failure = exc
    if n > CHOLESKY_MAX_N:
        raise EmbeddingError(
            f"embedding failed ({failure}) and n={n} exceeds the "
            f"Cholesky fallback cap {CHOLESKY_MAX_N}",
            min_eigenvalue=failure.min_eigenvalue,
        ) from failure
    cov = _covariance_values(density, n - 1)
    # densities that vanish on a set have exponentially small Toeplitz
    # eigenvalues (deterministic process); a diagonal jitter far below the
    # Monte Carlo noise floor keeps the factorization well posed
    L = None
    for jitter in (1e-10, 1e-8):
        try:
            L = cholesky(
                toeplitz(cov) + jitter * cov[0] * np.eye(n), lower=True
            )
            break
        except np.linalg.LinAlgError:
            continue
    if L is None:
        raise EmbeddingError(
            f"Cholesky fallback failed for n={n} even with jitter",
            min_eigenvalue=failure.min_eigenvalue,
        ) from failure
    _chol_cache[key] = L
    return lambda rng: L @ rng.standard_normal(n)


def _stream_rng(master_seed, stream_index):
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(stream_index,))
    return np.random.default_rng(ss)


def _one_sequence(measure, n, rng):
    k = np.arange(1, n + 1, dtype=float)
    seq = np.zeros(n)
    for alpha, w in measure.atoms:
        xi, eta = rng.standard_normal(2)
        seq += math.sqrt(w) * (xi * np.cos(k * alpha) + eta * np.sin(k * alpha))
    if measure.density is not None and measure.density.mass() > 0:
        seq += _density_sampler(measure.density, n)(rng)
    return seq


def sample_coefficients(measure, n, master_seed, stream_id):
    """Draw (a, b) with the measure's correlation, deterministically seeded.

    The a and b sequences come from disjoint substreams 2*stream_id and
    2*stream_id + 1 of the master seed, so replicates are reproducible
    independently of evaluation order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = _one_sequence(measure, n, _stream_rng(master_seed, 2 * stream_id))
    b = _one_sequence(measure, n, _stream_rng(master_seed, 2 * stream_id + 1))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise RuntimeError("sampler produced non-finite values")
    return CoefficientSample(
        n=n, a=a, b=b, master_seed=int(master_seed), stream_id=int(stream_id)
    )


# -- empirical covariance validation ----------------------------------------------


@dataclass
class CovarianceReport:
    lags: np.ndarray
    rho_hat: np.ndarray
    se: np.ndarray
    rho_ref: np.ndarray
    passed_lags: np.ndarray
    passed: bool


def covariance_check(samples, rho, max_lag=8, n_se=4.0):
    """Pooled empirical correlations against a reference sequence.

    Each sample contributes two sequences (a and b); the check passes when
    every pooled estimate sits within n_se standard errors of the reference.
    """
    if len(samples) < 50:
        raise ValueError("need at least 50 samples for a covariance check")
    rho.require(max_lag)
    lags = np.arange(max_lag + 1)
    per_stream = []
    for s in samples:
        for x in (s.a, s.b):
            n = len(x)
            ests = [np.dot(x[: n - k], x[k:]) / (n - k) for k in lags]
            per_stream.append(ests)
    per_stream = np.asarray(per_stream)
    rho_hat = per_stream.mean(axis=0)
    se = per_stream.std(axis=0, ddof=1) / math.sqrt(per_stream.shape[0])
    ref = rho.values[: max_lag + 1]
    ok = np.abs(rho_hat - ref) < n_se * np.maximum(se, 1e-300)
    return CovarianceReport(
        lags=lags,
        rho_hat=rho_hat,
        se=se,
        rho_ref=ref,
        passed_lags=ok,
        passed=bool(np.all(ok)),
    )


def cross_correlation_check(samples, max_lag=8, n_se=4.0):
    """Independence of the a and b streams: pooled cross-correlations near 0."""
    lags = np.arange(max_lag + 1)
    ests = []
    for s in samples:
        n = len(s.a)
        ests.append([np.dot(s.a[: n - k], s.b[k:]) / (n - k) for k in lags])
    ests = np.asarray(ests)
    mean = ests.mean(axis=0)
    se = ests.std(axis=0, ddof=1) / math.sqrt(ests.shape[0])
    return bool(np.all(np.abs(mean) < n_se * np.maximum(se, 1e-300)))


def birkhoff_average(sample):
    """(1/2n) sum (a_k^2 + b_k^2); converges to 1 for atomless measures."""
    return float((np.sum(sample.a**2) + np.sum(sample.b**2)) / (2.0 * sample.n))
