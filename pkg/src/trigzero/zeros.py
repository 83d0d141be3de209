"""Real-zero counting for sampled trigonometric polynomials.

Counting is sign changes on a 32x-oversampled periodic grid with bisection
refinement; near-tangent cells are subdivided and, if still unresolved,
surfaced as suspicious rather than guessed.  An algebraic companion-matrix
oracle cross-validates counts for small degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import TWO_PI, next_pow2
from .sampler import sample_coefficients
from .utils import parallel_map

COMPANION_MAX_N = 128
ROOT_MERGE_TOL = 1e-10
# safety factor on the Bernstein bounds |f^(j)| <= n^j max|f| deciding
# whether a sampled cell could conceal a zero pair between its nodes
HIDE_SAFETY = 2.0


def _hide_tol(n, scale, spacing):
    """Largest sampled |f| compatible with a sign dip between sample nodes.

    If all samples at spacing s exceed n^2 scale s^2 / 8, the quadratic bound
    f(x) >= f(x*) - |f''| (s/2)^2 / 2 forces the interior extremum positive.
    """
    return HIDE_SAFETY * n * n * scale * spacing * spacing / 8.0


def _hermite_tol(n, scale, width):
    """Cubic-Hermite model error bound over one cell: n^4 scale w^4 / 384."""
    return HIDE_SAFETY * (n * width) ** 4 * scale / 384.0


def _hermite_min(y0, d0, y1, d1):
    """Vectorized minimum over [0, 1] of the cubic Hermite interpolant.

    y are endpoint values, d endpoint derivatives already scaled by the cell
    width.  Returns (minimum, argmin in [0, 1])."""
    a = 6.0 * (y0 - y1) + 3.0 * (d0 + d1)
    b = -6.0 * (y0 - y1) - 4.0 * d0 - 2.0 * d1
    c = d0
    m = np.where(y0 <= y1, y0, y1)
    t = np.where(y0 <= y1, 0.0, 1.0)

    def hermite(tt):
        t2 = tt * tt
        t3 = t2 * tt
        return (y0 * (2 * t3 - 3 * t2 + 1) + d0 * (t3 - 2 * t2 + tt)
                + y1 * (-2 * t3 + 3 * t2) + d1 * (t3 - t2))

    quad = np.abs(a) > 1e-300
    disc = b * b - 4.0 * a * c
    ok = quad & (disc >= 0.0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = [
            np.where(ok, (-b + sq) / (2.0 * a), -1.0),
            np.where(ok, (-b - sq) / (2.0 * a), -1.0),
            np.where(~quad & (np.abs(b) > 1e-300), -c / b, -1.0),
        ]
    for r in roots:
        inside = (r > 0.0) & (r < 1.0)
        val = np.where(inside, hermite(np.clip(r, 0.0, 1.0)), np.inf)
        better = val < m
        m = np.where(better, val, m)
        t = np.where(better, r, t)
    return m, t


@dataclass
class ZeroCount:
    count: int
    roots: np.ndarray | None
    suspicious_cells: int
    method: str


def default_zero_grid(n):
    return max(4096, next_pow2(32 * n))


def evaluate_grid(sample, m=None):
    """f_n at m equispaced points via one inverse FFT of the half spectrum.

    The spectrum (a_k - i b_k)/(2 sqrt(n)) sits at frequency k with its
    conjugate implied at -k, which is exactly what irfft reconstructs.
    """
    n = sample.n
    if m is None:
        m = default_zero_grid(n)
    if m < 2 * n + 2 or m & (m - 1):
        raise ValueError("grid size must be a power of two >= 2n+2")
    half = np.zeros(m // 2 + 1, dtype=complex)
    half[1 : n + 1] = (sample.a - 1j * sample.b) * (m / (2.0 * math.sqrt(n)))
    return np.fft.irfft(half, m)


def derivative_grid(sample, m=None):
    """f_n' on the same grid (spectrum multiplied by ik)."""
    n = sample.n
    if m is None:
        m = default_zero_grid(n)
    k = np.arange(1, n + 1)
    half = np.zeros(m // 2 + 1, dtype=complex)
    half[1 : n + 1] = 1j * k * (sample.a - 1j * sample.b) * (m / (2.0 * math.sqrt(n)))
    return np.fft.irfft(half, m)


def evaluate_at(sample, x):
    """Direct O(n |x|) evaluation at arbitrary angles.

    Large batches run on complex running powers (one exp per point, then
    z^k by blockwise cumulative products feeding BLAS matvecs); the phase
    drift is O(n eps), far below the counting tolerances.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = sample.n
    if x.size * n <= 1 << 21:
        kx = np.outer(x, np.arange(1, n + 1, dtype=float))
        return (np.cos(kx) @ sample.a + np.sin(kx) @ sample.b) / math.sqrt(n)
    coef = (sample.a - 1j * sample.b) / math.sqrt(n)
    z = np.exp(1j * x)
    out = np.zeros(x.size)
    power = np.ones(x.size, dtype=complex)
    block = 256
    mat = np.empty((x.size, block), dtype=complex)
    for k0 in range(0, n, block):
        width = min(block, n - k0)
        mat[:, 0] = power * z
        for j in range(1, width):
            mat[:, j] = mat[:, j - 1] * z
        out += (mat[:, :width] @ coef[k0 : k0 + width]).real
        power = mat[:, width - 1]
    return out


def _bisect_brackets(sample, lo, hi, steps):
    flo = evaluate_at(sample, lo)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        fmid = evaluate_at(sample, mid)
        left = flo * fmid <= 0.0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fmid)
    return 0.5 * (lo + hi)


def _resolve_tangency_cells(sample, cells, scale, max_depth=12):
    """Batched halving of suspected tangency cells (4096x total refinement).

    cells holds (lo, hi, f(lo), f(hi)) intervals whose endpoint values sit
    inside the Bernstein window for their width.  Each level evaluates all
    pending midpoints in one call; halves whose window has closed are
    discarded, sign changes become brackets, and anything still ambiguous at
    full depth is a genuine near-tangency reported as suspicious.
    """
    brackets = []
    suspicious = 0
    n = sample.n
    for _ in range(max_depth):
        if not cells:
            break
        lo = np.array([c[0] for c in cells])
        hi = np.array([c[1] for c in cells])
        flo = np.array([c[2] for c in cells])
        fhi = np.array([c[3] for c in cells])
        mid = 0.5 * (lo + hi)
        fmid = evaluate_at(sample, mid)
        nxt = []
        for i in range(len(cells)):
            if flo[i] * fmid[i] < 0.0:
                # the dip crosses: one zero in each half
                brackets.append((lo[i], mid[i]))
                brackets.append((mid[i], hi[i]))
                continue
            tol = _hide_tol(n, scale, 0.5 * (hi[i] - lo[i]))
            if min(abs(flo[i]), abs(fmid[i])) < tol:
                nxt.append((lo[i], mid[i], flo[i], fmid[i]))
            if min(abs(fmid[i]), abs(fhi[i])) < tol:
                nxt.append((mid[i], hi[i], fmid[i], fhi[i]))
        cells = nxt
    # several unresolved slivers can hug one tangency point: count clusters
    # of (circularly) adjacent intervals as single events
    if cells:
        ivals = sorted((c[0], c[1]) for c in cells)
        eps = 4.0 * max(c[1] - c[0] for c in cells)
        suspicious += 1
        run_hi = ivals[0][1]
        for lo_i, hi_i in ivals[1:]:
            if lo_i - run_hi > eps:
                suspicious += 1
            run_hi = max(run_hi, hi_i)
        if (
            suspicious > 1
            and ivals[0][0] <= eps
            and run_hi >= TWO_PI - eps
        ):
            suspicious -= 1
    return brackets, suspicious


def count_zeros(sample, interval=(0.0, TWO_PI), m=None, retain_roots=None,
                bisect_steps=60):
    """Count the zeros of f_n in [a, b) (a period or less).

    Sign changes on the periodic grid delimit brackets; each bracket is
    refined by bisection when roots are retained or the interval is partial.
    No-flip cells whose Hermite model dips near zero are subdivided; cells
    unresolved at full depth are reported as suspicious, never guessed.
    """
    n = sample.n
    if m is None:
        m = default_zero_grid(n)
    if retain_roots is None:
        retain_roots = n <= 1024
    a, b = float(interval[0]), float(interval[1])
    span = b - a
    if not 0.0 < span <= TWO_PI + 1e-12:
        raise ValueError("interval must have positive length at most 2pi")
    full_circle = span >= TWO_PI - 1e-12

    f = evaluate_grid(sample, m)
    scale = float(np.max(np.abs(f)))
    x = TWO_PI * np.arange(m) / m
    signs = np.where(f >= 0.0, 1.0, -1.0)
    flip = signs * np.roll(signs, -1) < 0
    h = TWO_PI / m
    brackets = [(x[j], x[j] + h) for j in np.nonzero(flip)[0]]

    # tangency sweep: inside a no-flip cell the cubic Hermite model built
    # from the sampled values and derivatives tracks f to n^4 scale h^4/384,
    # so only cells whose modeled minimum dips into that window can conceal
    # a zero pair
    fp = derivative_grid(sample, m)
    fwrap, fpwrap = np.roll(f, -1), np.roll(fp, -1)
    hmin, targ = _hermite_min(
        signs * f, signs * fp * h, signs * fwrap, signs * fpwrap * h
    )
    cand_mask = ~flip & (hmin < _hermite_tol(n, scale, h))
    # a minimum sitting at a node shared with a flip cell is the already
    # bracketed zero next door, not a concealed pair
    at_left = targ <= 1e-3
    at_right = targ >= 1.0 - 1e-3
    cand_mask &= ~(at_left & np.roll(flip, 1)) & ~(at_right & np.roll(flip, -1))
    cand = np.nonzero(cand_mask)[0]
    suspicious = 0
    if cand.size:
        xstar = x[cand] + np.clip(targ[cand], 1e-3, 1.0 - 1e-3) * h
        fstar = evaluate_at(sample, xstar)
        cells = []
        for j, xs, fs in zip(cand, xstar, fstar):
            if f[j] * fs < 0.0:
                # the dip crosses: one zero on each side of the modeled min
                brackets.append((x[j], xs))
                brackets.append((xs, x[j] + h))
            else:
                cells.append((x[j], xs, f[j], fs))
                cells.append((xs, x[j] + h, fs, fwrap[j]))
        subs, suspicious = _resolve_tangency_cells(sample, cells, scale)
        brackets.extend(subs)

    if not brackets:
        return ZeroCount(0, np.array([]) if retain_roots else None,
                         suspicious, "grid_bisection")

    if retain_roots or not full_circle:
        lo = np.array([p[0] for p in brackets])
        hi = np.array([p[1] for p in brackets])
        roots = np.mod(_bisect_brackets(sample, lo, hi, bisect_steps), TWO_PI)
        roots = np.sort(roots)
        keep = np.ones(roots.size, dtype=bool)
        keep[1:] = np.diff(roots) > ROOT_MERGE_TOL
        if roots.size > 1 and roots[0] + TWO_PI - roots[-1] <= ROOT_MERGE_TOL:
            keep[-1] = False
        roots = roots[keep]
        if not full_circle:
            inside = np.mod(roots - a, TWO_PI) < span - 1e-15
            roots = roots[inside]
        count = int(roots.size)
        return ZeroCount(count, roots if retain_roots else None,
                         suspicious, "grid_bisection")
    return ZeroCount(len(brackets), None, suspicious, "grid_bisection")


# -- algebraic oracle ---------------------------------------------------------------


def companion_polynomial(sample):
    """Degree-2n coefficients (highest power first) of z^n * sqrt(n) * f_n(arg z).

    Power n+m carries (a_m - i b_m)/2 and power n-m carries (a_m + i b_m)/2,
    so the constant term is (a_n + i b_n)/2 and the leading term its conjugate.
    """
    n = sample.n
    coeffs = np.zeros(2 * n + 1, dtype=complex)
    up = (sample.a - 1j * sample.b) / 2.0    # power n+m, m = 1..n
    down = (sample.a + 1j * sample.b) / 2.0  # power n-m
    # index i holds the power 2n - i
    coeffs[n - 1 :: -1] = up
    coeffs[n + 1 :] = down
    return coeffs


def companion_oracle(sample, circle_tol=1e-6, identity_tol=1e-9):
    """Zeros of f_n as unit-circle roots of the associated algebraic polynomial.

    The construction is validated against direct evaluation before the
    eigen-solve: Q(e^{i theta}) must equal e^{i n theta} sqrt(n) f(theta).
    """
    n = sample.n
    if n > COMPANION_MAX_N:
        raise ValueError(f"companion oracle capped at n={COMPANION_MAX_N}")
    coeffs = companion_polynomial(sample)
    if abs(coeffs[0]) < 1e-13:
        raise RuntimeError("degenerate leading coefficient (a_n + i b_n)/2 ~ 0")
    thetas = np.mod(0.61803398875 * TWO_PI * np.arange(1, 9), TWO_PI)
    z = np.exp(1j * thetas)
    lhs = np.polyval(coeffs, z)
    rhs = np.exp(1j * n * thetas) * math.sqrt(n) * evaluate_at(sample, thetas)
    err = np.max(np.abs(lhs - rhs))
    if err > identity_tol * (1.0 + np.max(np.abs(rhs))):
        raise RuntimeError(f"companion construction failed validation ({err:.2e})")
    roots = np.roots(coeffs)
    on_circle = np.abs(np.abs(roots) - 1.0) < circle_tol
    angles = np.sort(np.mod(np.angle(roots[on_circle]), TWO_PI))
    return ZeroCount(int(angles.size), angles, 0, "companion")


# -- Monte Carlo summaries ------------------------------------------------------------


@dataclass
class ZeroStatistics:
    n: int
    replicates: int
    master_seed: int
    counts: np.ndarray
    ratios: np.ndarray
    suspicious: np.ndarray
    mean_ratio: float
    var_ratio: float
    se: float


def zero_statistics(measure, n, replicates, master_seed, retain_roots=False):
    """Mean/variance/standard error of N/n across seeded replicates."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")

    def one(stream_id):
        try:
            sample = sample_coefficients(measure, n, master_seed, stream_id)
            zc = count_zeros(sample, retain_roots=retain_roots)
        except Exception as exc:
            raise RuntimeError(f"replicate {stream_id}: {exc}") from exc
        return zc.count, zc.suspicious_cells

    results = parallel_map(one, range(replicates))
    counts = np.array([r[0] for r in results], dtype=float)
    susp = np.array([r[1] for r in results], dtype=int)
    ratios = counts / n
    mean = float(np.mean(ratios))
    var = float(np.var(ratios, ddof=1))
    return ZeroStatistics(
        n=n,
        replicates=replicates,
        master_seed=int(master_seed),
        counts=counts.astype(int),
        ratios=ratios,
        suspicious=susp,
        mean_ratio=mean,
        var_ratio=var,
        se=math.sqrt(var / replicates),
    )
