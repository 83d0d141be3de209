"""Salem-Zygmund central-limit targets.

Characteristic-function curves of f_n at a uniform random angle, their
deterministic conditional counterpart, and the Gaussian-mixture limit
(1/2pi) int exp(-(t^2/2) 2 pi psi(x)) dx; plus the finite-dimensional
variance of the localized process against its sinc-covariance limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import TWO_PI, convolution_profile, default_grid_size, two_point_cov
from .spectral import adaptive_simpson
from .zeros import evaluate_grid


def sinc(t):
    """sin(t)/t with the removable singularity patched."""
    return np.sinc(np.asarray(t, dtype=float) / np.pi)


@dataclass
class CharFunctionCurve:
    t_grid: np.ndarray
    values: np.ndarray
    kind: str           # empirical | conditional | limit
    n: int | None = None


def default_t_grid():
    """61 points on [-3, 3]; CF tails carry nothing at desk tolerances."""
    return np.linspace(-3.0, 3.0, 61)


def empirical_cf(sample, t_grid=None, m=None):
    """phi_n(t) = grid average of exp(i t f_n(x)); exact quadrature in X."""
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    if m is None:
        m = default_grid_size(sample.n)
    f = evaluate_grid(sample, m)
    values = np.exp(1j * np.outer(t_grid, f)).mean(axis=1)
    return CharFunctionCurve(t_grid=t_grid, values=values, kind="empirical",
                             n=sample.n)


def conditional_cf(rho, n, t_grid=None, m=None):
    """Grid average of exp(-(t^2/2) s0(x)): the finite-n deterministic target."""
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    if m is None:
        m = default_grid_size(n)
    s0 = convolution_profile(rho, n, m).s0
    values = np.exp(-0.5 * np.outer(t_grid**2, s0)).mean(axis=1).astype(complex)
    return CharFunctionCurve(t_grid=t_grid, values=values, kind="conditional", n=n)


def limit_cf(density, t_grid=None, tol=1e-8):
    """Mixture CF (1/2pi) int exp(-(t^2/2) 2 pi psi(x)) dx.

    Piecewise-constant densities have a two-piece closed form; anything else
    is integrated adaptively to the absolute tolerance.
    """
    if density is None:
        raise ValueError("limit CF needs a density (purely atomic measure)")
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    kind = density.kind
    if kind in ("uniform", "constant_corr"):
        level = TWO_PI * density.evaluate(0.0)
        values = np.exp(-0.5 * t_grid**2 * level)
    elif kind in ("box", "annulus"):
        support = 2.0 * (density.a - (density.b or 0.0)) if kind == "annulus" \
            else 2.0 * density.a
        level = TWO_PI / support
        values = ((TWO_PI - support)
                  + support * np.exp(-0.5 * t_grid**2 * level)) / TWO_PI
    else:
        values = np.empty_like(t_grid)
        for i, t in enumerate(t_grid):
            f = lambda x: math.exp(-0.5 * t * t * TWO_PI * float(density.evaluate(x)))
            values[i] = adaptive_simpson(f, 0.0, math.pi, tol=tol / 2.0) / math.pi
    return CharFunctionCurve(t_grid=t_grid, values=values.astype(complex),
                             kind="limit")


def cf_distance(curve1, curve2):
    """Sup over the shared t grid of |values1 - values2|."""
    if curve1.t_grid.shape != curve2.t_grid.shape or not np.allclose(
        curve1.t_grid, curve2.t_grid, atol=0.0
    ):
        raise ValueError("characteristic-function curves live on different t grids")
    return float(np.max(np.abs(curve1.values - curve2.values)))


# -- localized process -----------------------------------------------------------------


@dataclass
class LocalizedCovarianceCheck:
    X0: float
    t_points: np.ndarray
    lambdas: np.ndarray
    variance_n: float
    variance_limit: float | None

    @property
    def rel_gap(self):
        if self.variance_limit is None or self.variance_limit == 0.0:
            return None
        return abs(self.variance_n - self.variance_limit) / abs(self.variance_limit)


def localized_variance(rho, n, X0, t_points, lambdas, density=None):
    """Var of sum_p lambda_p f_n(X0 + t_p/n) against its sinc-mixture limit.

    The finite-n value is assembled from exact two-point covariances; the
    limit 2 pi psi(X0) sum lambda_p lambda_q sinc(t_p - t_q) needs the density
    and is reported as None for a purely atomic measure.
    """
    t_points = np.asarray(t_points, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    if t_points.shape != lambdas.shape:
        raise ValueError("t_points and lambdas must have matching shapes")
    var_n = 0.0
    for p in range(t_points.size):
        for q in range(t_points.size):
            var_n += (
                lambdas[p]
                * lambdas[q]
                * two_point_cov(rho, n, X0 + t_points[p] / n, X0 + t_points[q] / n)
            )
    limit = None
    if density is not None:
        gram = sinc(np.subtract.outer(t_points, t_points))
        limit = float(
            TWO_PI * float(density.evaluate(X0)) * lambdas @ gram @ lambdas
        )
    return LocalizedCovarianceCheck(
        X0=float(X0),
        t_points=t_points,
        lambdas=lambdas,
        variance_n=float(var_n),
        variance_limit=limit,
    )


def normalization_sum(n, t_points, lambdas):
    """Exact Riemann sum sum_pq lambda_p lambda_q (1/n) sum_k cos(k(t_p-t_q)/n)
    and its sinc limit; their gap is O(1/n)."""
    t_points = np.asarray(t_points, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    k = np.arange(1, n + 1, dtype=float)
    diff = np.subtract.outer(t_points, t_points)
    riemann = np.cos(np.multiply.outer(diff, k) / n).mean(axis=-1)
    exact = float(lambdas @ riemann @ lambdas)
    limit = float(lambdas @ sinc(diff) @ lambdas)
    return exact, limit
