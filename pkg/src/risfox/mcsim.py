"""Monte-Carlo oracle for link and spatial metrics.

Trials are split into fixed batches; batch ``b`` draws from its own Philox
stream keyed by (seed, b), so the estimate does not depend on how batches
are scheduled and memory stays bounded by the batch size.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .deployment import DeploymentScene
from .errors import ParamError
from .fading import sample_with
from .metrics import OutageQuery, RisLink

UNRESOLVED_COUNT = 10


@dataclass(frozen=True)
class McConfig:
    trials: int = 10**6
    seed: int = 0
    batch: int = 10**6
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1000:
            raise ParamError("trials must be >= 1000")
        if not 1 <= self.batch:
            raise ParamError("batch must be >= 1")
        if self.workers < 1:
            raise ParamError("workers must be >= 1")

    def batches(self) -> list[int]:
        size = min(self.batch, self.trials)
        full, rest = divmod(self.trials, size)
        return [size] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    unresolved: bool = False

    def z_score(self, analytic: float) -> float:
        if self.std_error == 0:
            return 0.0 if analytic == self.mean else math.inf
        return (analytic - self.mean) / self.std_error


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _run(cfg: McConfig, batch_fn: Callable[[np.random.Generator, int], np.ndarray]):
    """Sum and sum of squares of per-trial values over all batches."""
    sizes = cfg.batches()

    def one(i):
        vals = batch_fn(_rng(cfg.seed, i), sizes[i])
        return math.fsum(vals), math.fsum(vals * vals)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    return total, total_sq


def _sum_amplitude(link: RisLink, rng: np.random.Generator, count: int) -> np.ndarray:
    s = np.zeros(count)
    for pair in link.hops:
        s += sample_with(pair.h, count, rng) * sample_with(pair.g, count, rng)
    return s


def _proportion(hits: int, n: int) -> McEstimate:
    p = hits / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n, hits < UNRESOLVED_COUNT)


def mc_outage(link: RisLink, q: OutageQuery, cfg: McConfig = McConfig()) -> McEstimate:
    """Fraction of trials with log2(1 + rho_L S^2) < rho."""
    z = math.sqrt(q.rho_t(link.avg_snr))

    def batch(rng, count):
        return (_sum_amplitude(link, rng, count) < z).astype(float)

    hits, _ = _run(cfg, batch)
    return _proportion(int(round(hits)), cfg.trials)


def mc_capacity(link: RisLink, cfg: McConfig = McConfig()) -> McEstimate:
    """Sample mean of log2(1 + rho_L S^2)."""

    def batch(rng, count):
        s = _sum_amplitude(link, rng, count)
        return np.log2(1.0 + link.avg_snr * s * s)

    total, total_sq = _run(cfg, batch)
    n = cfg.trials
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


def sample_nearest(scene: DeploymentScene, count: int, rng: np.random.Generator) -> np.ndarray:
    """Nearest of M points uniform on the disc (radius R sqrt(U) each)."""
    u = rng.random((count, scene.m_ris))
    return scene.radius * np.sqrt(u.min(axis=1))


def mc_spatial_outage(scene: DeploymentScene, q: OutageQuery, cfg: McConfig = McConfig()) -> McEstimate:
    """Outage with a random nearest-RIS distance and far-field path loss (d r)^alpha."""
    rho_t = q.rho_t(scene.link_template.avg_snr)
    half = scene.pathloss_exp / 2.0

    def batch(rng, count):
        r = sample_nearest(scene, count, rng)
        s = _sum_amplitude(scene.link_template, rng, count)
        return (s < math.sqrt(rho_t) * (scene.bs_distance * r) ** half).astype(float)

    hits, _ = _run(cfg, batch)
    return _proportion(int(round(hits)), cfg.trials)
