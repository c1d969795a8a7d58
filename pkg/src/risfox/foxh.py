"""Single-variable Fox's H-function.

A parameter set describes ``kappa * H^{m,n}_{p,q}[c x]`` with the usual
Mellin-Barnes kernel

    Theta(s) = prod_{j<m} G(b_j + B_j s) prod_{j<n} G(1 - a_j - A_j s)
               / prod_{j>=n} G(a_j + A_j s) prod_{j>=m} G(1 - b_j - B_j s)

and ``H[y] = (1 / 2 pi i) int Theta(s) y^{-s} ds`` along a vertical line
that separates the two pole families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import HigherOrderPole, ParamError, PoleOnContour
from .specfun import QuadratureSpec, complex_log_gamma, contour_integrate

Pair = tuple[float, float]


@dataclass(frozen=True)
class FoxHParams:
    m: int
    n: int
    upper: tuple[Pair, ...] = ()
    lower: tuple[Pair, ...] = ()
    kappa: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple((float(a), float(A)) for a, A in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(B)) for b, B in self.lower))

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    def strip(self) -> tuple[float, float]:
        """Open interval of admissible contour abscissae."""
        lo = max((-b / B for b, B in self.lower[: self.m]), default=-math.inf)
        hi = min(((1.0 - a) / A for a, A in self.upper[: self.n]), default=math.inf)
        return lo, hi

    def decay(self) -> float:
        """Exponential decay rate a* of the kernel along vertical lines."""
        A = [A for _, A in self.upper]
        B = [B for _, B in self.lower]
        return sum(A[: self.n]) - sum(A[self.n:]) + sum(B[: self.m]) - sum(B[self.m:])


@dataclass
class ValidationReport:
    valid: bool
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    strip: tuple[float, float] = (-math.inf, math.inf)
    decay: float = 0.0

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class ResidueExpansion:
    """Small-argument behaviour coefficient * x^exponent * ln(1/(c x))^log_power."""

    dominant_exponent: float
    coefficient: float
    log_power: int
    pole_order: int
    scale: float = 1.0
    next_coefficient: float = 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        lead = self.coefficient * x ** self.dominant_exponent
        if self.log_power == 0:
            return lead
        log_term = np.log(1.0 / (self.scale * x))
        out = lead * log_term ** self.log_power
        if self.next_coefficient:
            out = out + self.next_coefficient * x ** self.dominant_exponent * log_term ** (self.log_power - 1)
        return out


def _same_ratio(x: float, y: float) -> bool:
    fx = Fraction(x).limit_denominator(1000)
    fy = Fraction(y).limit_denominator(1000)
    if abs(float(fx) - x) < 1e-12 and abs(float(fy) - y) < 1e-12:
        return fx == fy
    return abs(x - y) <= 1e-9 * max(1.0, abs(x), abs(y))


def _ladder_collisions(pairs: Sequence[Pair], sign: float, depth: int = 10) -> list[str]:
    hits = []
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            (bi, Bi), (bj, Bj) = pairs[i], pairs[j]
            for k in range(depth):
                for kk in range(depth):
                    if _same_ratio((bi + k) / Bi, (bj + kk) / Bj):
                        hits.append(f"pairs {i} and {j} share pole at s={sign * (bi + k) / Bi:g}")
                        break
                else:
                    continue
                break
    return hits


def validate(params: FoxHParams) -> ValidationReport:
    report = ValidationReport(valid=True)
    if not (0 <= params.m <= params.q and 0 <= params.n <= params.p):
        report.errors.append(f"orders out of range: m={params.m}, n={params.n}, p={params.p}, q={params.q}")
    if any(A <= 0 for _, A in params.upper) or any(B <= 0 for _, B in params.lower):
        report.errors.append("nonpositive coefficient")
    if report.errors:
        report.valid = False
        return report

    lo, hi = params.strip()
    report.strip = (lo, hi)
    report.decay = params.decay()
    if not lo < hi:
        report.errors.append(f"empty existence strip ({lo:g}, {hi:g})")
    if report.decay <= 0:
        report.errors.append(f"no exponential decay along the contour (a*={report.decay:g})")
    if not (params.kappa == params.kappa and params.c > 0):
        report.errors.append("scale c must be positive")

    lower_m = [(b, B) for b, B in params.lower[: params.m]]
    upper_n = [(1.0 - a, A) for a, A in params.upper[: params.n]]
    for msg in _ladder_collisions(lower_m, -1.0):
        report.warnings.append("non-simple poles: " + msg)
    for msg in _ladder_collisions(upper_n, 1.0):
        report.warnings.append("non-simple poles: " + msg)
    report.valid = not report.errors
    return report


def log_kernel(params: FoxHParams, s):
    """log Theta(s) evaluated elementwise on complex ``s``."""
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    for j, (a, A) in enumerate(params.upper):
        if j < params.n:
            out += complex_log_gamma(1.0 - a - A * s)
        else:
            out -= complex_log_gamma(a + A * s)
    for j, (b, B) in enumerate(params.lower):
        if j < params.m:
            out += complex_log_gamma(b + B * s)
        else:
            out -= complex_log_gamma(1.0 - b - B * s)
    return out


def default_abscissa(params: FoxHParams) -> float:
    lo, hi = params.strip()
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _check_abscissa(params: FoxHParams, gamma: float) -> float:
    lo, hi = params.strip()
    if not lo < gamma < hi:
        raise PoleOnContour(f"abscissa {gamma:g} outside strip ({lo:g}, {hi:g})")
    for b, B in params.lower[: params.m]:
        if abs(gamma + b / B) < 1e-12:
            raise PoleOnContour(f"abscissa {gamma:g} on pole")
    for a, A in params.upper[: params.n]:
        if abs((1.0 - a) / A - gamma) < 1e-12:
            raise PoleOnContour(f"abscissa {gamma:g} on pole")
    return gamma


def evaluate(params: FoxHParams, x, spec: QuadratureSpec | None = None, abscissa: float | None = None):
    """Numerical value of ``kappa * H[c x]`` for scalar or array ``x > 0``.

    Returns ``(value, err)`` with the shape of ``x``.
    """
    report = validate(params)
    if not report.valid:
        raise ParamError("; ".join(report.errors))
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any(x_arr <= 0):
        raise ParamError("Fox's H evaluation needs x > 0")

    log_y = np.log(params.c * x_arr)
    if abscissa is None:
        gammas, log_peak = _pick_abscissae(params, log_y)
    else:
        gamma = _check_abscissa(params, float(abscissa))
        gammas = np.full(log_y.shape, gamma)
        log_peak = _log_size(params, np.array([gamma]), log_y)[0]

    value = np.empty_like(log_y)
    err = np.empty_like(log_y)
    for gamma in np.unique(gammas):
        idx = np.nonzero(gammas == gamma)[0]
        ly, lp = log_y[idx], log_peak[idx]

        # work relative to the integrand size near t = 0 so tolerances and the
        # truncation cutoff do not depend on kappa or on how small H is
        def integrand(t, gamma=gamma, ly=ly, lp=lp):
            s = gamma + 1j * np.asarray(t)
            lk = log_kernel(params, s)[:, None]
            return np.exp(lk - s[:, None] * ly[None, :] - lp[None, :]).real + 0j

        val, e = contour_integrate(integrand, spec or QuadratureSpec(), lower=0.0)
        scale = params.kappa / math.pi * np.exp(lp)
        value[idx] = scale * val.real
        err[idx] = np.abs(scale) * e
    if scalar:
        return float(value[0]), float(err[0])
    return value, err


_PROBE_T = np.array([0.0, 0.5, 1.0, 2.0])


def _log_size(params: FoxHParams, gammas: np.ndarray, log_y: np.ndarray) -> np.ndarray:
    """max over a few t of log|integrand| at s = gamma + i t, shape (G, X)."""
    s = gammas[:, None] + 1j * _PROBE_T[None, :]
    lk = log_kernel(params, s).real.max(axis=1)
    return lk[:, None] - gammas[:, None] * log_y[None, :]


def _pick_abscissae(params: FoxHParams, log_y: np.ndarray):
    """Per-argument abscissa in the strip that keeps the integrand smallest.

    A contour where the integrand is small relative to H avoids the
    cancellation that ruins a shared contour at extreme arguments.
    """
    lo, hi = params.strip()
    centre = default_abscissa(params)
    a = lo if math.isfinite(lo) else centre - 60.0
    b = hi if math.isfinite(hi) else centre + 60.0
    margin = 0.02 * min(b - a, 5.0)
    grid = np.linspace(a + margin, b - margin, 241)
    ok = np.ones(grid.shape, dtype=bool)
    for i, g in enumerate(grid):
        try:
            _check_abscissa(params, float(g))
        except PoleOnContour:
            ok[i] = False
    grid = grid[ok]
    size = _log_size(params, grid, log_y)
    best = np.argmin(size, axis=0)
    return grid[best], size[best, np.arange(log_y.size)]


def asymptotic(params: FoxHParams, max_order: int = 2) -> ResidueExpansion:
    """Leading small-argument term of ``kappa * H[c x]`` from its dominant residue.

    Poles of order above ``max_order`` raise HigherOrderPole; for order k the
    leading term carries ln(1/(c x))^(k-1) / (k-1)!.
    """
    if params.m == 0:
        raise ParamError("no left pole family (m = 0); H vanishes faster than any power")
    ratios = [b / B for b, B in params.lower[: params.m]]
    zeta = min(ratios)
    hits = [j for j, r in enumerate(ratios) if _same_ratio(r, zeta)]
    order = len(hits)
    if order > max_order:
        raise HigherOrderPole(f"pole of order {order} at s={-zeta:g}")

    rest = replace(params, m=params.m - order, lower=_reorder_without(params, hits))
    inv_B = 1.0
    for j in hits:
        inv_B /= params.lower[j][1]

    def log_rest(s):
        return log_kernel(rest, np.array([s], dtype=complex))[0].real

    # rest may hit a denominator pole (1/Gamma -> 0); exp(-inf) -> 0 is correct
    with np.errstate(over="ignore"):
        r0 = math.exp(log_rest(-zeta))
    scale_pow = params.c ** zeta
    coeff = params.kappa * inv_B * r0 * scale_pow
    if order == 1:
        return ResidueExpansion(zeta, coeff, 0, 1, params.c)
    if order > 2:
        coeff /= math.factorial(order - 1)
        return ResidueExpansion(zeta, coeff, order - 1, order, params.c)
    h = 1e-5
    # Gamma(B e) = Gamma(1 + B e) / (B e) contributes B psi(1) = -B euler_gamma
    euler = 0.5772156649015329
    dlog = (log_rest(-zeta + h) - log_rest(-zeta - h)) / (2 * h)
    dlog -= euler * sum(params.lower[j][1] for j in hits)
    nxt = coeff * dlog
    return ResidueExpansion(zeta, coeff, 1, 2, params.c, nxt)


def _reorder_without(params: FoxHParams, hits: Sequence[int]) -> tuple[Pair, ...]:
    kept_m = [pr for j, pr in enumerate(params.lower[: params.m]) if j not in hits]
    return tuple(kept_m) + params.lower[params.m:]


def shift(params: FoxHParams, k: float = 1.0) -> FoxHParams:
    """Pairs moved so that Theta_new(s) = Theta(s + k)."""
    return replace(
        params,
        upper=tuple((a + k * A, A) for a, A in params.upper),
        lower=tuple((b + k * B, B) for b, B in params.lower),
    )


def stretch(params: FoxHParams, k: float) -> FoxHParams:
    """Multiply every A_j and B_j by k > 0 (Fox's H scaling property)."""
    if k <= 0:
        raise ParamError("stretch factor must be positive")
    return replace(
        params,
        upper=tuple((a, k * A) for a, A in params.upper),
        lower=tuple((b, k * B) for b, B in params.lower),
    )


def product(first: FoxHParams, second: FoxHParams) -> FoxHParams:
    """Density of X*Y for independent X, Y with Fox's H densities."""
    return FoxHParams(
        m=first.m + second.m,
        n=first.n + second.n,
        upper=first.upper[: first.n] + second.upper[: second.n] + first.upper[first.n:] + second.upper[second.n:],
        lower=first.lower[: first.m] + second.lower[: second.m] + first.lower[first.m:] + second.lower[second.m:],
        kappa=first.kappa * second.kappa,
        c=first.c * second.c,
    )


def cdf_params(pdf: FoxHParams) -> FoxHParams:
    """CDF F(y) = int_0^y pdf, again a Fox's H function of c*y."""
    sh = shift(pdf, 1.0)
    return FoxHParams(
        m=pdf.m,
        n=pdf.n + 1,
        upper=((1.0, 1.0),) + sh.upper,
        lower=sh.lower + ((0.0, 1.0),),
        kappa=pdf.kappa / pdf.c,
        c=pdf.c,
    )


def log_moment(pdf: FoxHParams, u):
    """log E[X^u] for a Fox's H density (complex ``u`` inside the moment strip)."""
    u = np.asarray(u, dtype=complex)
    return math.log(pdf.kappa) - (1.0 + u) * math.log(pdf.c) + log_kernel(pdf, 1.0 + u)


def moment_strip(pdf: FoxHParams) -> tuple[float, float]:
    """Real u for which E[X^u] is finite."""
    lo, hi = pdf.strip()
    return lo - 1.0, hi - 1.0
