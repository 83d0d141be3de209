"""Symmetric spectral measures on [-pi, pi] and their correlation sequences.

A measure is an atomic part (pairs folded onto [0, pi]) plus an absolutely
continuous part given by a density specification.  Correlations are the
cosine moments rho(k) = integral of cos(kx) against the measure; closed
forms are used for every built-in density kind, adaptive Simpson otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh, toeplitz

TWO_PI = 2.0 * math.pi

DENSITY_KINDS = (
    "uniform",
    "box",
    "annulus",
    "poisson",
    "constant_corr",
    "raised_cosine_squared",
    "tabulated",
)

# Spectral densities evaluated below this level count as zero when measuring
# the nodal set of a tabulated density; built-in kinds use closed forms.
ZERO_LEVEL = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach tolerance within its budget."""


def wrap_angle(x):
    """Map angles to [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi


def fold_angle(x):
    """Map angles to [0, pi] using |x| first, so psi(x) == psi(-x) exactly."""
    u = np.mod(np.abs(np.asarray(x, dtype=float)), TWO_PI)
    return np.minimum(u, TWO_PI - u)


@dataclass
class DensitySpec:
    """Parametric description of the absolutely continuous part.

    kind selects the family; a/b/r are the scalar parameters, grid/values
    carry a tabulated density on [0, pi] (interpolated linearly, extended
    evenly).  The density is always even and 2*pi-periodic.
    """

    kind: str
    a: float | None = None
    b: float | None = None
    r: float | None = None
    grid: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "box":
            if not (self.a is not None and 0.0 < self.a < np.pi):
                raise ValueError("box requires 0 < a < pi")
        elif self.kind == "annulus":
            if not (
                self.a is not None
                and self.b is not None
                and 0.0 <= self.b < self.a <= np.pi
            ):
                raise ValueError("annulus requires 0 <= b < a <= pi")
        elif self.kind == "poisson":
            if not (self.r is not None and abs(self.r) < 1.0):
                raise ValueError("poisson requires |r| < 1")
        elif self.kind == "constant_corr":
            # r < 0 would need a negative atom at the origin, which is not a
            # measure (and the constant sequence rho(k) = r < 0 is not PSD).
            if not (self.r is not None and 0.0 <= self.r < 1.0):
                raise ValueError("constant_corr requires 0 <= r < 1")
        elif self.kind == "tabulated":
            g = np.asarray(self.grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if g.ndim != 1 or g.shape != v.shape or g.size < 2:
                raise ValueError("tabulated needs matching 1-d grid/values")
            if not (np.all(np.diff(g) > 0) and g[0] >= 0.0 and g[-1] <= np.pi):
                raise ValueError("tabulated grid must increase within [0, pi]")
            if np.any(v < 0):
                raise ValueError("tabulated values must be >= 0")
            self.grid, self.values = g, v

    # -- pointwise evaluation -------------------------------------------------

    def evaluate(self, x):
        """psi(x), vectorized; symmetry is enforced by evaluating at |x|."""
        u = fold_angle(x)
        k = self.kind
        if k == "uniform":
            return np.full_like(u, 1.0 / TWO_PI)
        if k == "box":
            return np.where(u <= self.a, 1.0 / (2.0 * self.a), 0.0)
        if k == "annulus":
            inside = (u >= self.b) & (u <= self.a)
            return np.where(inside, 1.0 / (2.0 * (self.a - self.b)), 0.0)
        if k == "poisson":
            r = self.r
            return (1.0 - r * r) / (TWO_PI * (1.0 - 2.0 * r * np.cos(u) + r * r))
        if k == "constant_corr":
            # density part only; the atom at 0 lives on the measure
            return np.full_like(u, (1.0 - self.r) / TWO_PI)
        if k == "raised_cosine_squared":
            return (1.0 + np.cos(u)) ** 2 / (3.0 * np.pi)
        # tabulated: values outside the table clamp to the edge values
        return np.interp(u, self.grid, self.values)

    def mass(self):
        """Total integral of psi over one period."""
        if self.kind == "constant_corr":
            return 1.0 - self.r
        if self.kind == "tabulated":
            # exact integral of the even piecewise-linear interpolant
            return float(
                np.sum((self.values[1:] + self.values[:-1]) * np.diff(self.grid))
            )
        return 1.0

    # -- correlations ----------------------------------------------------------

    def correlation(self, lags, use_closed_form=True):
        """Cosine moments rho(k) = int cos(kx) psi(x) dx for the given lags."""
        lags = np.asarray(lags, dtype=int)
        if use_closed_form and self.kind != "tabulated":
            return self._correlation_closed(lags)
        if self.kind == "tabulated":
            return self._correlation_tabulated(lags)
        return np.array([self._correlation_quadrature(int(k)) for k in lags])

    def _correlation_closed(self, lags):
        k = lags.astype(float)
        out = np.empty_like(k)
        pos = lags > 0
        out[~pos] = self.mass()
        kp = k[pos]
        kind = self.kind
        if kind == "uniform" or kind == "constant_corr":
            out[pos] = 0.0
        elif kind == "box":
            out[pos] = np.sin(kp * self.a) / (kp * self.a)
        elif kind == "annulus":
            out[pos] = (np.sin(kp * self.a) - np.sin(kp * self.b)) / (
                kp * (self.a - self.b)
            )
        elif kind == "poisson":
            out[pos] = self.r ** kp
        elif kind == "raised_cosine_squared":
            table = {1: 2.0 / 3.0, 2: 1.0 / 6.0}
            out[pos] = np.array([table.get(int(x), 0.0) for x in lags[pos]])
        else:  # pragma: no cover - guarded by caller
            raise ValueError(f"no closed form for {kind}")
        return out

    def _correlation_tabulated(self, lags):
        # exact cosine moments of the piecewise-linear interpolant,
        # segment by segment: psi even, so the total is twice [0, pi]
        x0, x1 = self.grid[:-1], self.grid[1:]
        v0, v1 = self.values[:-1], self.values[1:]
        slope = (v1 - v0) / (x1 - x0)
        out = np.empty(len(lags))
        for i, k in enumerate(np.asarray(lags, dtype=int)):
            if k == 0:
                out[i] = self.mass()
                continue
            i0 = (np.sin(k * x1) - np.sin(k * x0)) / k
            i1 = (x1 - x0) * np.sin(k * x1) / k + (
                np.cos(k * x1) - np.cos(k * x0)
            ) / k**2
            out[i] = 2.0 * np.sum(v0 * i0 + slope * i1)
        return out

    def _correlation_quadrature(self, k):
        f = lambda x: np.cos(k * x) * self.evaluate(x)
        value = 2.0 * adaptive_simpson(
            f, 0.0, np.pi, tol=5e-11, max_evals=2**20, label=f"lag {k}"
        )
        return value

    def cache_key(self):
        if self.kind == "tabulated":
            return ("tabulated", self.grid.tobytes(), self.values.tobytes())
        return (self.kind, self.a, self.b, self.r)


@dataclass
class SpectralMeasure:
    """Atoms on [0, pi] (each standing for its symmetric pair) plus a density.

    An atom (alpha, w) contributes w*cos(k*alpha) to rho(k); an atom at zero
    is stored once with its full weight.
    """

    atoms: list = field(default_factory=list)
    density: DensitySpec | None = None

    def __post_init__(self):
        folded = []
        for alpha, w in self.atoms:
            alpha, w = float(alpha), float(w)
            if not 0.0 <= alpha <= np.pi:
                raise ValueError("atom locations must lie in [0, pi]")
            if w <= 0.0:
                raise ValueError("atom weights must be positive")
            folded.append((alpha, w))
        self.atoms = folded
        if abs(self.total_mass - 1.0) > 1e-10:
            raise ValueError(
                f"measure mass {self.total_mass!r} != 1 (atoms + density)"
            )

    @property
    def total_mass(self):
        m = sum(w for _, w in self.atoms)
        if self.density is not None:
            m += self.density.mass()
        return m

    @property
    def atomic_mass(self):
        return sum(w for _, w in self.atoms)

    def cache_key(self):
        dk = None if self.density is None else self.density.cache_key()
        return (tuple(self.atoms), dk)


@dataclass
class CorrelationSequence:
    """rho(0..R) with rho(0) = 1; the cosine-moment transform of a measure."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("correlation sequence must be a 1-d array")
        if abs(self.values[0] - 1.0) > 1e-10:
            raise ValueError("rho(0) must equal 1")
        if np.max(np.abs(self.values)) > 1.0 + 1e-10:
            raise ValueError("|rho(k)| must not exceed 1")

    @property
    def max_lag(self):
        return self.values.size - 1

    def require(self, lag):
        if self.max_lag < lag:
            raise ValueError(
                f"correlation sequence covers lags 0..{self.max_lag}, "
                f"lag {lag} required"
            )


def correlation_of(measure, max_lag, use_closed_form=True):
    """Correlation sequence rho(0..max_lag) of a spectral measure."""
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    lags = np.arange(max_lag + 1)
    rho = np.zeros(max_lag + 1)
    for alpha, w in measure.atoms:
        rho += w * np.cos(lags * alpha)
    if measure.density is not None:
        rho += measure.density.correlation(lags, use_closed_form=use_closed_form)
    return CorrelationSequence(rho)


# -- measure factories ---------------------------------------------------------


def measure_from_density(kind, **params):
    """Build the probability measure for a density kind.

    constant_corr(r) is the one mixed case: an atom of weight r at the
    origin plus a flat density of mass 1 - r, so that rho(k) = r for k >= 1.
    """
    spec = DensitySpec(kind=kind, **params)
    atoms = [(0.0, spec.r)] if kind == "constant_corr" and spec.r > 0 else []
    return SpectralMeasure(atoms=atoms, density=spec)


def atomic_measure(alpha, weight=1.0):
    """Purely singular measure: the symmetric pair of atoms at +-alpha."""
    return SpectralMeasure(atoms=[(alpha, weight)], density=None)


def tabulated_from_csv(path):
    """Load a two-column CSV `x,psi` with x in [0, pi]."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("tabulated CSV must have two columns x,psi")
    return DensitySpec(kind="tabulated", grid=data[:, 0], values=data[:, 1])


def measure_from_dict(decl):
    """Measure from a config mapping {atoms: [[alpha, w], ...], density: {...}}."""
    atoms = [(float(a), float(w)) for a, w in decl.get("atoms", [])]
    density = None
    ddecl = decl.get("density")
    if ddecl:
        params = {k: v for k, v in ddecl.items() if k != "kind"}
        kind = ddecl["kind"]
        if kind == "tabulated" and "path" in params:
            density = tabulated_from_csv(params["path"])
        else:
            density = DensitySpec(kind=kind, **params)
        if kind == "constant_corr" and not atoms and density.r > 0:
            atoms = [(0.0, density.r)]
    return SpectralMeasure(atoms=atoms, density=density)


# -- positive semidefiniteness -------------------------------------------------


@dataclass
class PsdReport:
    fejer_min: float
    toeplitz_min_eig: float
    passed: bool


def _fejer_sum(values, n, m_grid):
    """Sum over |r| <= n of (1-|r|/n) rho(r) e^{irx} on an m_grid-point grid."""
    g = np.zeros(n + 1)
    upto = min(n, len(values) - 1)
    g[: upto + 1] = values[: upto + 1] * (1.0 - np.arange(upto + 1) / n)
    m = max(m_grid, 2 * (n + 1))
    return np.fft.irfft(g, m) * m


def validate_psd(rho, tol=-1e-8):
    """Check a correlation sequence for positive semidefiniteness.

    Reports the minimum Fejer sum over test grids for n in {R/4, R/2, R}
    and the smallest eigenvalue of the order-min(R, 64) Toeplitz matrix;
    a failing report is a valid return, not an error.
    """
    R = rho.max_lag
    fejer_min = math.inf
    for n in sorted({max(R // 4, 1), max(R // 2, 1), R}):
        s = _fejer_sum(rho.values, n, 4 * n)
        fejer_min = min(fejer_min, float(s.min()))
    order = min(R, 64)
    order = max(order, 1)
    eigs = eigvalsh(toeplitz(rho.values[:order]))
    toe_min = float(eigs.min())
    return PsdReport(
        fejer_min=fejer_min,
        toeplitz_min_eig=toe_min,
        passed=(fejer_min >= tol and toe_min >= tol),
    )


# -- nodal set and theorem hypotheses -------------------------------------------


def nodal_measure(density):
    """Lebesgue measure of {psi = 0} over one period."""
    k = density.kind
    if k in ("uniform", "poisson", "constant_corr", "raised_cosine_squared"):
        return 0.0
    if k == "box":
        return TWO_PI - 2.0 * density.a
    if k == "annulus":
        return TWO_PI - 2.0 * (density.a - density.b)
    x = wrap_angle(np.linspace(-np.pi, np.pi, 2**16, endpoint=False))
    psi = density.evaluate(x)
    return TWO_PI * np.count_nonzero(psi < ZERO_LEVEL) / x.size


@dataclass
class HypothesisReport:
    """Numerical checks of the integrability/regularity theorem hypotheses."""

    nodal_measure: float
    log_norm: float
    neg_moment: float
    besov_exponent_estimate: float
    applicable_theorems: set
    eta: float
    gamma: float


# names for the three regimes the report can certify
THM_NONUNIVERSAL = "nonuniversal-limit"
THM_MEAN_UNIVERSAL = "mean-universal"
THM_AS_UNIVERSAL = "almost-sure-universal"

_INTEGRAL_CAP = 1e12


def _refined_integral(density, transform, base=2**16, max_pts=2**20):
    """Midpoint integral of transform(psi) over a period, with divergence check.

    The grid starts at `base` cells and doubles; a sum that keeps growing by
    more than 50% per refinement (or exceeds the cap, or hits an infinite
    cell) is reported as +inf rather than trusted.
    """
    prev = None
    m = base
    s = math.inf
    last_rel = math.inf
    while m <= max_pts:
        x = -np.pi + (np.arange(m) + 0.5) * (TWO_PI / m)
        with np.errstate(divide="ignore", over="ignore"):
            vals = transform(density.evaluate(x))
        s = float(np.sum(vals) * (TWO_PI / m))
        if not np.isfinite(s) or s > _INTEGRAL_CAP:
            return math.inf
        if prev is not None:
            if s > 1.5 * prev:
                return math.inf
            last_rel = abs(s - prev) / max(abs(s), 1e-300)
            if last_rel <= 1e-3:
                return s
        prev = s
        m *= 2
    # budget exhausted: a sum still creeping upward is treated as divergent
    return s if last_rel <= 5e-2 else math.inf


def besov_modulus(density, deltas=None, n_shifts=32, grid=2**13):
    """Second-difference L1 modulus omega*(psi, delta) over a delta ladder."""
    if deltas is None:
        deltas = 2.0 ** -np.arange(3, 11)
    x = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    psi0 = density.evaluate(x)
    omega = []
    for d in deltas:
        worst = 0.0
        for h in np.linspace(d / n_shifts, d, n_shifts):
            diff = density.evaluate(x + h) + density.evaluate(x - h) - 2.0 * psi0
            worst = max(worst, float(np.mean(np.abs(diff)) * TWO_PI))
        omega.append(worst)
    return np.asarray(deltas, dtype=float), np.asarray(omega)


def hypothesis_report(density, eta=0.5, gamma=1.0):
    """Evaluate the hypotheses behind the three limit regimes for a density."""
    if eta <= 0 or gamma <= 0:
        raise ValueError("eta and gamma must be positive")
    lam = nodal_measure(density)
    log_norm = _refined_integral(
        density, lambda p: np.abs(np.log(p)) ** (1.0 + eta)
    )
    neg_moment = _refined_integral(density, lambda p: p**-gamma)
    deltas, omega = besov_modulus(density)
    if np.all(omega < 1e-14):
        slope = math.inf  # constant density: any regularity order holds
    else:
        mask = omega > 1e-300
        slope = float(np.polyfit(np.log(deltas[mask]), np.log(omega[mask]), 1)[0])
    applicable = {THM_NONUNIVERSAL}
    if math.isfinite(log_norm):
        applicable.add(THM_MEAN_UNIVERSAL)
    if slope > 0.1 and math.isfinite(neg_moment):
        applicable.add(THM_AS_UNIVERSAL)
    return HypothesisReport(
        nodal_measure=lam,
        log_norm=log_norm,
        neg_moment=neg_moment,
        besov_exponent_estimate=slope,
        applicable_theorems=applicable,
        eta=eta,
        gamma=gamma,
    )


# -- adaptive quadrature ---------------------------------------------------------


def adaptive_simpson(f, a, b, tol=1e-10, max_evals=2**20, min_panels=16, label=""):
    """Adaptive Simpson with interval bisection and an evaluation budget.

    The starting partition has min_panels uniform panels so oscillatory
    integrands cannot fool the error estimate on the first pass.
    """
    edges = np.linspace(a, b, min_panels + 1)
    evals = 0
    total = 0.0
    stack = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        stack.append((lo, hi, f(lo), f(mid), f(hi), None))
        evals += 3
    # each entry carries the one-panel Simpson value once computed
    out = 0.0
    work = []
    for lo, hi, flo, fmid, fhi, _ in stack:
        s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        work.append((lo, hi, flo, fmid, fhi, s, tol / min_panels))
    while work:
        lo, hi, flo, fmid, fhi, s_whole, tol_here = work.pop()
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm, frm = f(lmid), f(rmid)
        evals += 2
        s_left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        s_right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = (s_left + s_right - s_whole) / 15.0
        if abs(err) <= tol_here or (hi - lo) < 1e-14:
            out += s_left + s_right + err
            continue
        if evals > max_evals:
            raise QuadratureError(
                f"quadrature budget {max_evals} exhausted"
                + (f" ({label})" if label else "")
            )
        work.append((lo, mid, flo, flm, fmid, s_left, tol_here / 2.0))
        work.append((mid, hi, fmid, frm, fhi, s_right, tol_here / 2.0))
    return out + total
