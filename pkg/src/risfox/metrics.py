"""Outage and ergodic capacity of a single RIS-assisted link.

With ideal phase alignment the end-to-end amplitude is S = sum_i |h_i||g_i|,
the instantaneous SNR is rho_L * S^2, and

    outage   P(log2(1 + rho_L S^2) < rho) = P(S < sqrt(rho_t)),
             rho_t = (2^rho - 1) / rho_L
    capacity E[log2(1 + rho_L S^2)]   (bits per channel use)

All SNRs are linear here; dB conversion belongs to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import foxh
from . import foxh_multi as fm
from .errors import ArityError, DimensionLimit, ParamError
from .fading import HopPair, product_params
from .foxh import FoxHParams
from .specfun import QuadratureSpec

LN2 = math.log(2.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class RisLink:
    n_elements: int
    hops: tuple[HopPair, ...]
    avg_snr: float

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        if self.n_elements < 1:
            raise ParamError("n_elements must be >= 1")
        if len(self.hops) != self.n_elements:
            raise ArityError(f"{len(self.hops)} hop pairs for {self.n_elements} elements")
        if not self.avg_snr > 0:
            raise ParamError("avg_snr must be positive (linear scale)")

    @classmethod
    def iid(cls, n: int, pair: HopPair, avg_snr: float) -> "RisLink":
        return cls(n, (pair,) * n, avg_snr)

    def with_snr(self, avg_snr: float) -> "RisLink":
        return RisLink(self.n_elements, self.hops, avg_snr)


@dataclass(frozen=True)
class OutageQuery:
    threshold_bits: float = 1.0

    def __post_init__(self):
        if not self.threshold_bits >= 0:
            raise ParamError("threshold_bits must be >= 0")

    def rho_t(self, avg_snr: float) -> float:
        return (2.0 ** self.threshold_bits - 1.0) / avg_snr


@dataclass(frozen=True)
class AsymptoticOutage:
    """coefficient * rho_t^snr_exponent * ln(1/rho_t)^log_power."""

    coefficient: float
    snr_exponent: float
    log_power: int
    validity_note: Literal["simple-poles", "iid-power-log"]
    value: float = math.nan

    def __post_init__(self):
        if not self.snr_exponent > 0:
            raise ParamError("snr_exponent must be positive")

    def at(self, rho_t):
        rho_t = np.asarray(rho_t, dtype=float)
        out = self.coefficient * rho_t ** self.snr_exponent
        if self.log_power:
            out = out * np.log(1.0 / rho_t) ** self.log_power
        return out


@dataclass(frozen=True)
class OutageResult:
    """Outcome of :func:`outage`; ``value`` is nan when only bounds were available."""

    value: float
    err: float
    method: str
    upper: float = math.nan
    lower: float = math.nan


# ---------------------------------------------------------------- helpers

def _element_pdfs(link: RisLink) -> list[FoxHParams]:
    return [product_params(pair) for pair in link.hops]


def moment_block(pdf: FoxHParams) -> FoxHParams:
    """Block with kernel Gamma(-u) * Theta_pdf(1 + u); its variable is the moment order u."""
    sh = foxh.shift(pdf, 1.0)
    return FoxHParams(pdf.m, pdf.n + 1, ((1.0, 1.0),) + sh.upper, sh.lower, 1.0, pdf.c)


def sum_cdf_params(pdfs: Sequence[FoxHParams]) -> fm.MultiFoxHParams:
    """Multivariable H whose value at (z, ..., z) is P(sum X_i < z)."""
    scale = math.prod(p.kappa / p.c for p in pdfs)
    return fm.outage_form([moment_block(p) for p in pdfs], scale, [p.c for p in pdfs])


def _merged_pdf(pdfs: Sequence[FoxHParams]) -> FoxHParams:
    out = pdfs[0]
    for p in pdfs[1:]:
        out = foxh.product(out, p)
    return out


def _clip01(v):
    return min(max(v, 0.0), 1.0)


# ----------------------------------------------------------------- outage

def outage_exact(link: RisLink, q: OutageQuery, spec: QuadratureSpec | None = None, seed: int = 0):
    """Exact outage via the multivariable H-function; returns ``(value, err)``."""
    rho_t = q.rho_t(link.avg_snr)
    fm.pick_method(link.n_elements, None)
    if rho_t == 0:
        return 0.0, 0.0
    params = sum_cdf_params(_element_pdfs(link))
    res = fm.eval_multi(params, [math.sqrt(rho_t)] * link.n_elements, spec, seed=seed)
    return _clip01(res.value), res.err


def outage_curve(link: RisLink, rho_t, spec: QuadratureSpec | None = None):
    """Exact outage at many thresholds rho_t in one lattice pass (N <= 8)."""
    rho_t = np.atleast_1d(np.asarray(rho_t, dtype=float))
    out = np.zeros_like(rho_t)
    err = np.zeros_like(rho_t)
    pos = rho_t > 0
    if np.any(pos):
        params = sum_cdf_params(_element_pdfs(link))
        v, e = fm.eval_multi_scaled(params, np.sqrt(rho_t[pos]), spec)
        out[pos] = np.clip(v, 0.0, 1.0)
        err[pos] = e
    return out, err


def outage_n1(link: RisLink, q: OutageQuery, spec: QuadratureSpec | None = None) -> float:
    """Single-element outage as an ordinary Fox's H CDF."""
    if link.n_elements != 1:
        raise ArityError("outage_n1 needs exactly one element")
    rho_t = q.rho_t(link.avg_snr)
    if rho_t == 0:
        return 0.0
    cdf = foxh.cdf_params(product_params(link.hops[0]))
    value, _ = foxh.evaluate(cdf, math.sqrt(rho_t), spec)
    return _clip01(value)


def outage_upper(link: RisLink, q: OutageQuery, spec: QuadratureSpec | None = None) -> float:
    """AM-GM upper bound: S >= N (prod X_i)^(1/N), so P(S < z) <= P(prod X_i < (z/N)^N)."""
    rho_t = q.rho_t(link.avg_snr)
    if rho_t == 0:
        return 0.0
    n = link.n_elements
    cdf = foxh.cdf_params(_merged_pdf(_element_pdfs(link)))
    value, _ = foxh.evaluate(cdf, (math.sqrt(rho_t) / n) ** n, spec)
    return _clip01(value)


def _element_expansions(link: RisLink):
    return [foxh.asymptotic(foxh.cdf_params(p)) for p in _element_pdfs(link)]


def diversity_order(link: RisLink) -> float:
    """Sum of per-element dominant exponents over 2; the high-SNR outage slope."""
    return sum(e.dominant_exponent for e in _element_expansions(link)) / 2.0


def outage_asymptotic(link: RisLink, q: OutageQuery | None = None) -> AsymptoticOutage:
    """Leading high-SNR term of the exact outage.

    Each element CDF behaves like A_i x^z_i ln(1/x)^L_i near 0 (L_i = 1 when
    both hops share the dominant pole).  For the sum, Laplace-transform
    asymptotics give prod(A_i Gamma(1+z_i)) / Gamma(1 + sum z_i) on
    sqrt(rho_t)^(sum z_i) ln(1/sqrt(rho_t))^(sum L_i).
    """
    exps = _element_expansions(link)
    zeta = sum(e.dominant_exponent for e in exps)
    logp = sum(e.log_power for e in exps)
    log_c = sum(math.log(e.coefficient) + math.lgamma(1.0 + e.dominant_exponent) for e in exps)
    log_c -= math.lgamma(1.0 + zeta)
    coeff = math.exp(log_c) * 0.5 ** logp  # ln(1/sqrt(r)) = ln(1/r) / 2
    note = "iid-power-log" if logp else "simple-poles"
    res = AsymptoticOutage(coeff, zeta / 2.0, logp, note)
    if q is not None:
        rho_t = q.rho_t(link.avg_snr)
        res = AsymptoticOutage(coeff, zeta / 2.0, logp, note, float(res.at(rho_t)) if rho_t > 0 else 0.0)
    return res


def outage_upper_asymptotic(link: RisLink, q: OutageQuery | None = None) -> AsymptoticOutage:
    """Leading term of the AM-GM bound; i.i.d. hops give ln(1/rho_t)^(2N-1)."""
    n = link.n_elements
    exp = foxh.asymptotic(foxh.cdf_params(_merged_pdf(_element_pdfs(link))), max_order=2 * n)
    # bound argument y = rho_t^(N/2) / N^N
    coeff = exp.coefficient * n ** (-n * exp.dominant_exponent)
    coeff *= (n / 2.0) ** exp.log_power
    note = "iid-power-log" if exp.log_power else "simple-poles"
    res = AsymptoticOutage(coeff, n * exp.dominant_exponent / 2.0, exp.log_power, note)
    if q is not None:
        rho_t = q.rho_t(link.avg_snr)
        res = AsymptoticOutage(res.coefficient, res.snr_exponent, res.log_power, note,
                               float(res.at(rho_t)) if rho_t > 0 else 0.0)
    return res


def outage_lower_asymptotic(link: RisLink, q: OutageQuery) -> float:
    """High-SNR lower bound from (sum X_i)^2 <= N sum X_i^2.

    P(S < z) >= P(sum X_i^2 < z^2/N); the right side is evaluated with its
    leading asymptotic term.  Tight at N = 1.
    """
    rho_t = q.rho_t(link.avg_snr)
    if rho_t == 0:
        return 0.0
    n = link.n_elements
    exps = _element_expansions(link)
    # X_i^2 has CDF A_i y^(z_i/2) ln(1/sqrt y)^L_i
    halves = [e.dominant_exponent / 2.0 for e in exps]
    logp = sum(e.log_power for e in exps)
    log_c = sum(math.log(e.coefficient) + math.lgamma(1.0 + h) - e.log_power * LN2 for e, h in zip(exps, halves))
    log_c -= math.lgamma(1.0 + sum(halves))
    y = rho_t / n
    value = math.exp(log_c) * y ** sum(halves)
    if logp:
        value *= math.log(1.0 / y) ** logp
    return value


def outage(link: RisLink, q: OutageQuery, spec: QuadratureSpec | None = None, seed: int = 0) -> OutageResult:
    """Exact outage when feasible, else the (upper bound, lower asymptote) pair."""
    try:
        value, err = outage_exact(link, q, spec, seed)
        method = "nested-quadrature" if link.n_elements <= fm.NESTED_MAX_DIM else "randomized-contour"
        return OutageResult(value, err, method)
    except DimensionLimit:
        upper = outage_upper(link, q, spec)
        try:
            lower = outage_lower_asymptotic(link, q)
        except Exception:  # noqa: BLE001 - lower asymptote is best effort
            lower = math.nan
        return OutageResult(math.nan, math.nan, "bounds", upper, lower)


# --------------------------------------------------------------- capacity

def _capacity_params(pdf: FoxHParams, n: int) -> FoxHParams:
    """E[ln(1 + rho' Y^2)] with Y = P^(1/n), P having density ``pdf``.

    Mellin-Parseval with M[ln(1+y)](s) = Gamma(s) Gamma(1-s) / s gives the
    kernel Gamma(n v/2) Gamma(1 - n v/2) Gamma(v) / Gamma(1 + v) * Theta(1 + v)
    at argument c / (n sqrt(rho))^n, prefactor kappa / c.
    """
    sh = foxh.shift(pdf, 1.0)
    half = n / 2.0
    upper = ((0.0, half),) + sh.upper[: pdf.n] + sh.upper[pdf.n:] + ((1.0, 1.0),)
    lower = ((0.0, 1.0), (0.0, half)) + sh.lower[: pdf.m] + sh.lower[pdf.m:]
    return FoxHParams(pdf.m + 2, pdf.n + 1, upper, lower, pdf.kappa / (pdf.c * LN2), pdf.c)


def capacity_n1(link: RisLink, spec: QuadratureSpec | None = None) -> float:
    """Ergodic capacity in bits for a single element."""
    if link.n_elements != 1:
        raise ArityError("capacity_n1 needs exactly one element")
    params = _capacity_params(product_params(link.hops[0]), 1)
    value, _ = foxh.evaluate(params, 1.0 / math.sqrt(link.avg_snr), spec)
    return max(value, 0.0)


def capacity_lower(link: RisLink, spec: QuadratureSpec | None = None) -> float:
    """Lower bound E[log2(1 + N^2 rho_L (prod X_i)^(2/N))] <= capacity."""
    n = link.n_elements
    if n < 2:
        raise ArityError("capacity_lower is meant for N >= 2; use capacity_n1")
    params = _capacity_params(_merged_pdf(_element_pdfs(link)), n)
    value, _ = foxh.evaluate(params, (1.0 / (n * math.sqrt(link.avg_snr))) ** n, spec)
    return max(value, 0.0)


def capacity_exact(link: RisLink, spec: QuadratureSpec | None = None, points: int = 401):
    """Ergodic capacity in bits, ``(value, err)``.

    Uses C ln 2 = int_0^inf (1 - F_S(s)) 2 rho s^2 / (1 + rho s^2) d(ln s):
    F_S comes from one multi-argument lattice pass, the outer integral from
    the trapezoidal rule in ln s (error from halving the grid).
    """
    n = link.n_elements
    rho = link.avg_snr
    fm.pick_method(n, None)
    pdfs = _element_pdfs(link)
    params = sum_cdf_params(pdfs)
    s_max, tail = _tail_point(pdfs)
    grid = np.linspace(math.log(1e-7 / math.sqrt(rho)), math.log(s_max), points)
    s = np.exp(grid)
    # abscissae near the Gamma(-u) pole keep z^(-w) small at large z
    F, Ferr = fm.eval_multi_scaled(params, s, spec, position=0.85)
    weight = 2.0 * rho * s * s / (1.0 + rho * s * s)
    f = (1.0 - np.clip(F, 0.0, 1.0)) * weight
    fine = np.trapezoid(f, grid)
    coarse = np.trapezoid(f[::2], grid[::2])
    err = abs(fine - coarse) + np.trapezoid(Ferr * weight, grid) + tail + 1e-7 ** 2
    return fine / LN2, err / LN2


def _tail_point(pdfs, budget: float = 1e-10):
    """Grid end s_max and a bound on the capacity integral beyond it.

    Minkowski gives E[S^k]^(1/k) <= sum_i E[X_i^k]^(1/k); Markov then bounds
    P(S > t) and int_s^inf P(S > t) 2 dt / t <= 2 E[S^k] / (k s^k).
    """
    k = min(8.0, 0.9 * min(foxh.moment_strip(p)[1] for p in pdfs))
    norm = sum(math.exp(float(foxh.log_moment(p, k).real) / k) for p in pdfs)
    s_max = norm * (2.0 / (k * budget)) ** (1.0 / k)
    return s_max, 2.0 / k * (norm / s_max) ** k
