"""Spatial outage for M RISs dropped uniformly on a disc (binomial point process).

The user is served by the nearest RIS at distance r; the path loss
(d + r)^-alpha is used in its far-field factorized form (d r)^-alpha, so the
outage threshold on S becomes sqrt(rho_t) (d r)^(alpha/2).  ``avg_snr`` of
the template link is the SNR before path loss.

With v = (r/R)^2 ~ Beta(1, M), averaging over the distance only touches the
w = sum u_i coupling of the link's multivariable H-function:

    E[v^(-alpha w/4)] = M sum_k (-1)^k C(M-1, k) / (k + 1 - alpha w/4)
                      = Gamma(M+1) Gamma(1 - alpha w/4) / Gamma(M+1 - alpha w/4)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import foxh
from . import foxh_multi as fm
from .errors import AlternatingSumLoss, DomainError, ParamError
from .foxh import FoxHParams
from .metrics import (
    AsymptoticOutage,
    OutageQuery,
    RisLink,
    _element_pdfs,
    _merged_pdf,
    moment_block,
    outage_asymptotic,
    outage_curve,
)
from .specfun import QuadratureSpec

MAX_DIGITS_LOST = 6.0


@dataclass(frozen=True)
class DeploymentScene:
    m_ris: int
    radius: float
    bs_distance: float
    pathloss_exp: float
    link_template: RisLink

    def __post_init__(self):
        if self.m_ris < 1:
            raise ParamError("m_ris must be >= 1")
        if not (self.radius > 0 and self.bs_distance > 0 and self.pathloss_exp > 0):
            raise ParamError("radius, bs_distance and pathloss_exp must be positive")

    @property
    def n_elements(self) -> int:
        return self.link_template.n_elements

    def base_argument(self, q: OutageQuery) -> float:
        """Threshold on S for a RIS at the disc edge: sqrt(rho_t) (d R)^(alpha/2)."""
        rho_t = q.rho_t(self.link_template.avg_snr)
        return math.sqrt(rho_t) * (self.bs_distance * self.radius) ** (self.pathloss_exp / 2.0)


def nearest_pdf(x, scene: DeploymentScene):
    """Density of the nearest of M uniform points on a disc of radius R."""
    x_arr = np.asarray(x, dtype=float)
    R, M = scene.radius, scene.m_ris
    if np.any((x_arr <= 0) | (x_arr >= R)):
        raise DomainError(f"nearest_pdf needs 0 < x < R={R}")
    t = (x_arr / R) ** 2
    out = 2.0 * M / x_arr * (1.0 - t) ** (M - 1) * t
    return float(out) if out.ndim == 0 else out


def _term_params(scene: DeploymentScene, k: int | None) -> fm.MultiFoxHParams:
    """Multivariable H for one binomial term (k) or the closed Beta form (k=None)."""
    pdfs = _element_pdfs(scene.link_template)
    n = len(pdfs)
    a4 = scene.pathloss_exp / 4.0
    M = scene.m_ris
    scale = math.prod(p.kappa / p.c for p in pdfs)
    if k is None:
        upper = (fm.row(0.0, a4, n), fm.row(M + 1.0, -a4, n))
        scale *= math.gamma(M + 1)
    else:
        upper = (fm.row(-k, a4, n), fm.row(k + 2.0, -a4, n))
        scale *= M * (-1) ** k * math.comb(M - 1, k)
    return fm.MultiFoxHParams(
        tuple(moment_block(p) for p in pdfs), upper, (fm.row(0.0, 1.0, n),), 1, scale, tuple(p.c for p in pdfs)
    )


def spatial_outage(
    scene: DeploymentScene,
    q: OutageQuery,
    spec: QuadratureSpec | None = None,
    method: Literal["binomial", "beta"] = "binomial",
    seed: int = 0,
):
    """Distance-averaged outage, ``(value, err)``.

    ``binomial`` sums the M alternating terms with compensated summation and
    raises AlternatingSumLoss past 6 lost digits; ``beta`` uses the
    equivalent single Beta-function coupling, which has no cancellation.
    """
    z0 = scene.base_argument(q)
    if z0 == 0:
        return 0.0, 0.0
    n = scene.n_elements
    args = [z0] * n
    if method == "beta":
        res = fm.eval_multi(_term_params(scene, None), args, spec, seed=seed)
        return min(max(res.value, 0.0), 1.0), res.err
    if method != "binomial":
        raise ValueError(f"unknown method {method!r}")

    terms, errs = [], []
    for k in range(scene.m_ris):
        res = fm.eval_multi(_term_params(scene, k), args, spec, seed=seed)
        terms.append(res.value)
        errs.append(res.err)
    value = math.fsum(terms)
    biggest = max(abs(t) for t in terms)
    lost = math.log10(biggest / abs(value)) if value != 0 else math.inf
    if lost > MAX_DIGITS_LOST:
        raise AlternatingSumLoss(
            f"binomial sum over M={scene.m_ris} terms lost {lost:.1f} digits", value=value, digits_lost=lost
        )
    return min(max(value, 0.0), 1.0), math.fsum(errs)


def _panel_nodes(lo: float, hi: float, panels: int = 48, order: int = 24):
    """Gauss-Legendre nodes on geometrically graded panels toward ``lo``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = lo + (hi - lo) * np.concatenate([[0.0], 2.0 ** -np.arange(panels - 1, -1, -1.0)])
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def spatial_outage_quadrature(
    scene: DeploymentScene,
    q: OutageQuery,
    exact_kernel: bool = False,
    spec: QuadratureSpec | None = None,
) -> float:
    """Reference value by direct quadrature over the nearest distance.

    ``exact_kernel`` keeps (d + x)^alpha instead of the far-field (d x)^alpha.
    """
    rho_t = q.rho_t(scene.link_template.avg_snr)
    if rho_t == 0:
        return 0.0
    R, d, alpha = scene.radius, scene.bs_distance, scene.pathloss_exp
    x, w = _panel_nodes(0.0, R)
    loss = (d + x) ** alpha if exact_kernel else (d * x) ** alpha
    F, _ = outage_curve(scene.link_template, rho_t * loss, spec)
    return float(np.sum(w * F * nearest_pdf(x, scene)))


def _upper_params(scene: DeploymentScene, large_m: bool = False) -> FoxHParams:
    """AM-GM bound averaged over v: extra Gamma(1 - N a s/4) / Gamma(M+1 - N a s/4)."""
    n = scene.n_elements
    cdf = foxh.cdf_params(_merged_pdf(_element_pdfs(scene.link_template)))
    na4 = n * scene.pathloss_exp / 4.0
    upper = cdf.upper[: cdf.n] + ((0.0, na4),) + cdf.upper[cdf.n:]
    lower = cdf.lower
    kappa = cdf.kappa
    if not large_m:
        lower = lower + ((-float(scene.m_ris), na4),)
        kappa *= math.gamma(scene.m_ris + 1)
    return FoxHParams(cdf.m, cdf.n + 1, upper, lower, kappa, cdf.c)


def _bound_argument(scene: DeploymentScene, q: OutageQuery) -> float:
    return (scene.base_argument(q) / scene.n_elements) ** scene.n_elements


def spatial_outage_upper(scene: DeploymentScene, q: OutageQuery, spec: QuadratureSpec | None = None) -> float:
    """Upper bound from S >= N (prod X_i)^(1/N), averaged over the distance."""
    y = _bound_argument(scene, q)
    if y == 0:
        return 0.0
    value, _ = foxh.evaluate(_upper_params(scene), y, spec)
    return min(max(value, 0.0), 1.0)


def scaling_law_large_m(scene: DeploymentScene, q: OutageQuery, spec: QuadratureSpec | None = None) -> float:
    """M -> infinity form of the bound: Gamma(M+1)/Gamma(M+1-t) ~ M^t.

    The argument shrinks by M^(N alpha/4): SNR effectively grows as M^(alpha/2) N^2.
    """
    y = _bound_argument(scene, q)
    if y == 0:
        return 0.0
    y /= scene.m_ris ** (scene.n_elements * scene.pathloss_exp / 4.0)
    value, _ = foxh.evaluate(_upper_params(scene, large_m=True), y, spec)
    return min(max(value, 0.0), 1.0)


def spatial_asymptotic(scene: DeploymentScene, q: OutageQuery) -> AsymptoticOutage:
    """High-SNR spatial outage: link asymptote averaged over v^(alpha zeta/4)."""
    link = outage_asymptotic(scene.link_template)
    zeta = 2.0 * link.snr_exponent  # exponent on the S threshold
    a = scene.pathloss_exp
    M = scene.m_ris
    log_beta = math.lgamma(M + 1) + math.lgamma(1.0 + a * zeta / 4.0) - math.lgamma(1.0 + M + a * zeta / 4.0)
    geo = (a * zeta / 2.0) * math.log(scene.bs_distance * scene.radius)
    coeff = link.coefficient * math.exp(log_beta + geo)
    rho_t = q.rho_t(scene.link_template.avg_snr)
    value = 0.0
    if rho_t > 0:
        value = coeff * rho_t ** link.snr_exponent
        if link.log_power:
            # logs follow the edge-of-disc threshold, ln(1/z0^2)
            value *= math.log(1.0 / scene.base_argument(q) ** 2) ** link.log_power
    return AsymptoticOutage(coeff, link.snr_exponent, link.log_power, link.validity_note, value)
