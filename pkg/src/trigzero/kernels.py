"""Trigonometric kernels and kernel-measure convolutions as finite Fourier sums.

Everything a zero-count computation needs from a measure enters through
three second-moment arrays on a grid:

    s0(x) = E[f_n(x)^2]        = sum_{|r|<=n} (1-|r|/n) rho(r) e^{irx}
    s1(x) = E[f_n(x) f_n'(x)]  = -sum_{r=1}^{n} r (1-r/n) rho(r) sin(rx)
    s2(x) = E[f_n'(x)^2]       = sum_{|r|<n} c_|r| rho(r) e^{irx}

with c_r = (1/n) sum_{k=1}^{n-r} k (r+k).  These are exact up to round-off
(zero-padded inverse FFT), never kernel quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# closed kernel forms lose ~8 digits where sin(x/2) ~ 0; switch to the sum
SING_GUARD = 1e-8


def next_pow2(m):
    return 1 << max(int(m) - 1, 0).bit_length()


def default_grid_size(n):
    """Power of two >= 32n (>= 4096): 32x oversampling of the top frequency."""
    return max(4096, next_pow2(32 * n))


def alpha_n(n):
    """Derivative normalization 6/((n+1)(2n+1))."""
    return 6.0 / ((n + 1.0) * (2.0 * n + 1.0))


@dataclass
class KernelCoefficients:
    """Fourier coefficients of the degree-n kernels, indexed by lag r."""

    n: int
    fejer: np.ndarray        # r = 0..n:   1 - r/n
    ln_scaled: np.ndarray    # r = 0..n-1: (1/n) sum_{k=1}^{n-r} k (r+k)
    fejer_prime: np.ndarray  # r = 0..n:   r (1 - r/n); entry 0 is a pad
    alpha_n: float


def kernel_coefficients(n):
    if n < 1:
        raise ValueError("degree must be >= 1")
    r = np.arange(n + 1, dtype=float)
    fejer = 1.0 - r / n
    m = n - np.arange(n, dtype=float)  # m = n - r for r = 0..n-1
    ln_scaled = (np.arange(n, dtype=float) * m * (m + 1) / 2.0
                 + m * (m + 1) * (2.0 * m + 1) / 6.0) / n
    fejer_prime = r * (1.0 - r / n)
    return KernelCoefficients(
        n=n, fejer=fejer, ln_scaled=ln_scaled,
        fejer_prime=fejer_prime, alpha_n=alpha_n(n),
    )


# -- pointwise kernel evaluation -------------------------------------------------


def fejer_eval(n, x):
    """Fejer kernel (1/n)(sin(nx/2)/sin(x/2))^2, Fourier sum at the singularity."""
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2.0)
    near = np.abs(half) < SING_GUARD
    safe = np.where(near, 1.0, half)
    vals = (np.sin(n * x / 2.0) / safe) ** 2 / n
    if np.any(near):
        r = np.arange(1, n + 1, dtype=float)
        w = 1.0 - r / n
        xs = np.atleast_1d(x)[np.atleast_1d(near)]
        series = 1.0 + 2.0 * np.cos(np.outer(xs, r)) @ w
        vals = np.asarray(vals)
        if vals.ndim == 0:
            return float(series[0])
        vals[near] = series
    return vals if vals.ndim else float(vals)


def ln_eval(n, x):
    """Derivative-weighted kernel (alpha_n/n) |sum_{k=0}^n k e^{ikx}|^2.

    The direct complex sum is stable everywhere, including x = 0 where it
    reduces to alpha_n n (n+1)^2 / 4.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.arange(n + 1, dtype=float)
    z = np.exp(1j * np.outer(xs, k)) @ k
    vals = alpha_n(n) / n * np.abs(z) ** 2
    return float(vals[0]) if scalar else vals


def fejer_prime_eval(n, x):
    """Derivative of the Fejer kernel; odd, zero at the origin."""
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2.0)
    near = np.abs(half) < SING_GUARD
    safe = np.where(near, 1.0, half)
    ratio = np.sin(n * x / 2.0) / safe
    inner = (n * np.cos(n * x / 2.0) / (2.0 * safe)
             - np.sin(n * x / 2.0) * np.cos(x / 2.0) / (2.0 * safe**2))
    vals = 2.0 / n * ratio * inner
    if np.any(near):
        r = np.arange(1, n + 1, dtype=float)
        w = r * (1.0 - r / n)
        xs = np.atleast_1d(x)[np.atleast_1d(near)]
        series = -2.0 * np.sin(np.outer(xs, r)) @ w
        vals = np.asarray(vals)
        if vals.ndim == 0:
            return float(series[0])
        vals[near] = series
    return vals if vals.ndim else float(vals)


# -- convolution profiles ---------------------------------------------------------


@dataclass
class ConvolutionProfile:
    """Second moments of (f_n, f_n') on an equispaced grid over [0, 2pi)."""

    n: int
    grid: np.ndarray
    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray


def _irfft_sum(half_spectrum, m):
    """Real signal sum_r A_r e^{irx} + conj on the m-point grid."""
    return np.fft.irfft(half_spectrum, m) * m


def convolution_profile(rho, n, m=None, offset=0.0):
    """Evaluate s0, s1, s2 at m equispaced points x_j = offset + 2pi j/m.

    Exact zero-padded inverse FFT of the coefficient-weighted correlation
    sequence; m must be a power of two with m >= 2n+2.
    """
    rho.require(n)
    if m is None:
        m = default_grid_size(n)
    if m < 2 * n + 2 or m & (m - 1):
        raise ValueError("grid size must be a power of two >= 2n+2")
    coef = kernel_coefficients(n)
    vals = rho.values[: n + 1]
    phase = np.exp(1j * np.arange(n + 1) * offset)

    half = np.zeros(m // 2 + 1, dtype=complex)
    half[: n + 1] = coef.fejer * vals * phase
    s0 = _irfft_sum(half, m)

    half = np.zeros(m // 2 + 1, dtype=complex)
    half[: n + 1] = 0.5j * coef.fejer_prime * vals * phase
    s1 = _irfft_sum(half, m)

    half = np.zeros(m // 2 + 1, dtype=complex)
    half[:n] = coef.ln_scaled * vals[:n] * phase[:n]
    s2 = _irfft_sum(half, m)

    grid = offset + TWO_PI * np.arange(m) / m
    return ConvolutionProfile(n=n, grid=grid, s0=s0, s1=s1, s2=s2)


def moments_at(rho, n, x):
    """(s0, s1, s2) at arbitrary angles by direct cosine/sine sums."""
    rho.require(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coef = kernel_coefficients(n)
    vals = rho.values[: n + 1]
    r = np.arange(1, n + 1, dtype=float)
    c = np.cos(np.outer(x, r))
    s = np.sin(np.outer(x, r))
    s0 = 1.0 + 2.0 * c @ (coef.fejer[1:] * vals[1:])
    s1 = -s @ (coef.fejer_prime[1:] * vals[1:])
    s2 = coef.ln_scaled[0] + 2.0 * c[:, : n - 1] @ (
        coef.ln_scaled[1:] * vals[1 : n]
    )
    return s0, s1, s2


def s0_lower_bound(rho, n, x):
    """Pointwise variance floor (1/2n)(1 - rho(n) cos(nx))."""
    rho.require(n)
    return (1.0 - rho.values[n] * np.cos(n * np.asarray(x, dtype=float))) / (2.0 * n)


# -- two-point covariance ----------------------------------------------------------


def _dirichlet_ratio(m, theta):
    """sin(m theta)/sin(theta) with the L'Hopital value near sin(theta) = 0."""
    s = np.sin(theta)
    if np.abs(s) >= SING_GUARD:
        return np.sin(m * theta) / s
    return m * np.cos(m * theta) / np.cos(theta)


def two_point_brute(rho, n, x, y):
    """E[f_n(x) f_n(y)] by the full double sum (1/n) sum rho(k-l) cos(kx-ly)."""
    rho.require(n)
    k = np.arange(1, n + 1)
    rmat = rho.values[np.abs(np.subtract.outer(k, k))]
    cmat = np.cos(np.subtract.outer(k * x, k * y))
    return float(np.sum(rmat * cmat) / n)


def two_point_closed(rho, n, x, y):
    """E[f_n(x) f_n(y)] by the polarized-kernel factorization.

    Grouping the double sum by diagonals k-l = r turns each diagonal into a
    Dirichlet sum in x-y with the closed sin(m theta)/sin(theta) form, so the
    cost is O(n) per pair instead of O(n^2).
    """
    rho.require(n)
    delta = x - y
    theta = delta / 2.0
    r = np.arange(1, n)
    m = n - r
    s = np.sin(theta)
    if abs(s) >= SING_GUARD:
        ratio = np.sin(m * theta) / s
        ratio0 = np.sin(n * theta) / s
    else:
        ratio = m * np.cos(m * theta) / np.cos(theta)
        ratio0 = n * np.cos(n * theta) / np.cos(theta)
    head = (m + 1.0) * theta
    total = rho.values[0] * ratio0 * math.cos((n + 1.0) * theta)
    if n > 1:
        total += np.sum(
            rho.values[1:n] * ratio * (np.cos(r * x + head) + np.cos(head - r * y))
        )
    return float(total / n)


def two_point_cov(rho, n, x, y, method="auto"):
    """Two-point covariance E[f_n(x) f_n(y)]; both routes agree to round-off."""
    if method == "auto":
        method = "brute" if n <= 128 else "closed"
    if method == "brute":
        return two_point_brute(rho, n, x, y)
    if method == "closed":
        return two_point_closed(rho, n, x, y)
    raise ValueError(f"unknown method {method!r}")


def two_point_grid(rho, n, xs, ys):
    """Two-point covariance on a grid (len(xs) x len(ys)), Toeplitz-accelerated."""
    from scipy.linalg import matmul_toeplitz

    rho.require(n)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    k = np.arange(1, n + 1, dtype=float)
    col = rho.values[np.abs(np.arange(n))]
    ex = np.exp(1j * np.outer(k, xs))
    u = matmul_toeplitz((col, col), ex)
    ey = np.exp(-1j * np.outer(k, ys))
    return np.real(u.T @ ey) / n
