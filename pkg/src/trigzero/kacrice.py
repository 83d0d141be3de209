"""Expected zero counts via the Kac-Rice integral and the limit-law targets.

The normalized integrand is sqrt(I_n(x))/n = sqrt(s2/(n^2 s0) - (s1/(n s0))^2)
computed from the exact moment arrays; the expected zero ratio over [a, b] is
its (1/pi)-weighted integral by a midpoint rule with grid doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import (
    TWO_PI,
    alpha_n,
    convolution_profile,
    default_grid_size,
    moments_at,
)
from .spectral import nodal_measure

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
UNIVERSAL_LIMIT = 2.0 / SQRT3

# below this the conditional variance is treated as degenerate; for measures
# with a density part the variance floor C/n keeps s0 far above it
DEGENERATE_S0 = 1e-14


class DegenerateVarianceError(RuntimeError):
    """s0(x) vanished at an evaluation point (purely singular resonance)."""


@dataclass
class KacRiceProfile:
    n: int
    grid: np.ndarray
    integrand: np.ndarray
    ratio: float
    quadrature_error_estimate: float
    converged: bool = True


@dataclass
class LimitPrediction:
    regime: str                      # universal | non_universal | atomic_nonconvergent
    limit: float | None
    nodal_measure: float | None = None
    adherence: tuple | None = None   # closure interval for the atomic case


def integrand_from_moments(n, s0, s1, s2):
    """sqrt(max(0, s2/(n^2 s0) - (s1/(n s0))^2)); clamping absorbs round-off."""
    radicand = s2 / (n * n * s0) - (s1 / (n * s0)) ** 2
    return np.sqrt(np.clip(radicand, 0.0, None))


def integrand_at(rho, n, x):
    """Normalized Kac-Rice integrand at one angle or an array of angles."""
    scalar = np.ndim(x) == 0
    s0, s1, s2 = moments_at(rho, n, x)
    if np.any(s0 < DEGENERATE_S0):
        bad = np.atleast_1d(np.asarray(x, dtype=float))[s0 < DEGENERATE_S0]
        raise DegenerateVarianceError(
            f"degenerate variance at x={bad[0]!r} (s0 < {DEGENERATE_S0})"
        )
    vals = integrand_from_moments(n, s0, s1, s2)
    return float(vals[0]) if scalar else vals


def profile_integrand(rho, n, profile):
    """Integrand on the profile's midpoint grid, subdividing degenerate cells.

    Midpoints with s0 below the degeneracy floor (possible only for purely
    atomic measures at resonant angles) are replaced by the average over 16
    sub-midpoints, dropping any still-degenerate sub-point.
    """
    s0, s1, s2 = profile.s0, profile.s1, profile.s2
    good = s0 >= DEGENERATE_S0
    vals = np.zeros_like(s0)
    vals[good] = integrand_from_moments(n, s0[good], s1[good], s2[good])
    if not np.all(good):
        h = profile.grid[1] - profile.grid[0]
        for j in np.nonzero(~good)[0]:
            sub = profile.grid[j] + h * (np.arange(16) - 7.5) / 16.0
            t0, t1, t2 = moments_at(rho, n, sub)
            ok = t0 >= DEGENERATE_S0
            if np.any(ok):
                vals[j] = float(
                    np.mean(integrand_from_moments(n, t0[ok], t1[ok], t2[ok]))
                )
    return vals


def expected_zero_ratio(
    rho, n, interval=(0.0, TWO_PI), rel_tol=1e-4, max_points=2**22
):
    """E[N(f_n, [a, b])] / n by midpoint quadrature with grid doubling.

    The grid doubles until the ratio moves by less than rel_tol relatively;
    exhausting the point budget returns the last value flagged non-converged.
    """
    a, b = float(interval[0]), float(interval[1])
    if not (0.0 <= a < b <= TWO_PI + 1e-12):
        raise ValueError("interval must satisfy 0 <= a < b <= 2pi")
    m = default_grid_size(n)
    ratio_prev = None
    first_grid = first_vals = None
    ratio = math.nan
    err = math.inf
    converged = False
    while True:
        prof = convolution_profile(rho, n, m, offset=math.pi / m)
        vals = profile_integrand(rho, n, prof)
        h = TWO_PI / m
        left = prof.grid - h / 2.0
        weights = np.clip(np.minimum(b, left + h) - np.maximum(a, left), 0.0, h)
        ratio = float(np.dot(weights, vals) / math.pi)
        if first_grid is None:
            inside = weights > 0
            first_grid, first_vals = prof.grid[inside], vals[inside]
        if ratio_prev is not None:
            err = abs(ratio - ratio_prev)
            if err <= rel_tol * max(abs(ratio), 1e-30):
                converged = True
                break
        ratio_prev = ratio
        if 2 * m > max_points:
            break
        m *= 2
    return KacRiceProfile(
        n=n,
        grid=first_grid,
        integrand=first_vals,
        ratio=ratio,
        quadrature_error_estimate=err,
        converged=converged,
    )


def nonuniversal_limit(nodal):
    """lambda/(pi sqrt(2)) + (2pi - lambda)/(pi sqrt(3)) for nodal measure lambda."""
    return nodal / (math.pi * SQRT2) + (TWO_PI - nodal) / (math.pi * SQRT3)


def predicted_limit(density):
    """Limit of E[N]/n predicted by the density's nodal measure.

    None stands for a purely atomic measure, whose normalized zero count does
    not converge; its closure interval [sqrt(2), 2] is attached instead.
    """
    if density is None:
        return LimitPrediction(
            regime="atomic_nonconvergent", limit=None, adherence=(SQRT2, 2.0)
        )
    lam = nodal_measure(density)
    if lam <= 0.0:
        return LimitPrediction(
            regime="universal", limit=UNIVERSAL_LIMIT, nodal_measure=0.0
        )
    return LimitPrediction(
        regime="non_universal", limit=nonuniversal_limit(lam), nodal_measure=lam
    )


@dataclass
class LimitOperatorDiagnostic:
    """Two finite-n approximations of the nodal-set limit operator.

    Both arrays converge to -sum_k |k| rho(k) e^{ikx}; where psi vanishes the
    limit is >= (density mass)/2, which is the mechanism behind the 1/sqrt(2)
    integrand value on the nodal set.
    """

    grid: np.ndarray
    from_variance: np.ndarray       # n (s0 - 2 pi psi)
    from_derivative: np.ndarray     # (2/(n alpha_n)) (alpha_n s2 - 2 pi psi)
    face_value: np.ndarray          # -sum_{|k|<=R} |k| rho(k) e^{ikx}
    tail: float
    reliable: bool


def l2_limit_operator(rho, n, grid, density=None, tail_tol=1e-6):
    """Diagnostic for the L2 limit of the rescaled kernel-convolution errors.

    psi is evaluated exactly when the density is supplied; otherwise it is
    reconstructed from lags up to 4n, which is only trustworthy when the
    empirical tail of sum k^2 rho(k)^2 is below tail_tol (reported flag).
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    R = min(rho.max_lag, 4 * n)
    if R < 2 * n:
        raise ValueError(f"need correlation lags to {2 * n}, have {rho.max_lag}")
    k = np.arange(1, R + 1, dtype=float)
    kv = rho.values[1 : R + 1]
    tail_terms = (k * kv) ** 2
    tail = float(np.sum(tail_terms[k > 2 * n]))
    reliable = tail < tail_tol
    cos_kx = np.cos(np.outer(grid, k))
    if density is not None:
        psi = density.evaluate(grid)
    else:
        psi = (1.0 + 2.0 * cos_kx @ kv) / TWO_PI
        reliable = reliable and rho.max_lag >= 4 * n
    face = -2.0 * cos_kx @ (k * kv)
    s0, _, s2 = moments_at(rho, n, grid)
    an = alpha_n(n)
    return LimitOperatorDiagnostic(
        grid=grid,
        from_variance=n * (s0 - TWO_PI * psi),
        from_derivative=(2.0 / (n * an)) * (an * s2 - TWO_PI * psi),
        face_value=face,
        tail=tail,
        reliable=reliable,
    )
