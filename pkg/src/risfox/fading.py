"""Fading catalog: amplitude densities as Fox's H parameters, plus samplers.

Every model is normalized to E[|X|^2] = 1 so that the link SNR is the only
power knob.

Generalized-K naming: ``m`` is the multipath (Nakagami) shape and ``k`` the
gamma shadowing shape.  The Fox's H prefactor is always called ``kappa`` on
:class:`FoxHParams`, never ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import foxh
from .errors import ParamError
from .foxh import FoxHParams


@dataclass(frozen=True)
class Rayleigh:
    kind = "rayleigh"


@dataclass(frozen=True)
class Nakagami:
    m: float
    kind = "nakagami"

    def __post_init__(self):
        if not self.m >= 0.5:
            raise ParamError(f"Nakagami m must be >= 0.5, got {self.m}")


@dataclass(frozen=True)
class AlphaMu:
    alpha: float
    mu: float
    kind = "alpha-mu"

    def __post_init__(self):
        if not (self.alpha > 0 and self.mu > 0):
            raise ParamError(f"alpha-mu needs alpha > 0 and mu > 0, got {self.alpha}, {self.mu}")


@dataclass(frozen=True)
class FisherF:
    m: float
    ms: float
    kind = "fisher-f"

    def __post_init__(self):
        if not (self.m > 0 and self.ms > 1):
            raise ParamError(f"Fisher-F needs m > 0 and ms > 1, got {self.m}, {self.ms}")


@dataclass(frozen=True)
class GeneralizedK:
    m: float
    k: float
    kind = "generalized-k"

    def __post_init__(self):
        if not (self.m > 0 and self.k > 0):
            raise ParamError(f"generalized-K needs m > 0 and k > 0, got {self.m}, {self.k}")


FadingModel = Union[Rayleigh, Nakagami, AlphaMu, FisherF, GeneralizedK]
MODEL_KINDS = {cls.kind: cls for cls in (Rayleigh, Nakagami, AlphaMu, FisherF, GeneralizedK)}


@dataclass(frozen=True)
class HopPair:
    """Fading of one RIS element: ``h`` is RIS->user, ``g`` is BS->RIS."""

    h: FadingModel
    g: FadingModel


def to_foxh(model: FadingModel) -> FoxHParams:
    """Amplitude pdf of ``model`` as Fox's H parameters."""
    if isinstance(model, Rayleigh):
        return to_foxh(Nakagami(1.0))
    if isinstance(model, Nakagami):
        m = model.m
        return FoxHParams(1, 0, (), ((m - 0.5, 0.5),), kappa=math.sqrt(m) / math.gamma(m), c=math.sqrt(m))
    if isinstance(model, AlphaMu):
        a, mu = model.alpha, model.mu
        eta = math.exp(math.lgamma(mu + 2.0 / a) - math.lgamma(mu))
        return FoxHParams(
            1, 0, (), ((mu - 1.0 / a, 1.0 / a),),
            kappa=math.sqrt(eta) / math.gamma(mu), c=math.sqrt(eta),
        )
    if isinstance(model, FisherF):
        m, ms = model.m, model.ms
        c = math.sqrt(m / (ms - 1.0))
        return FoxHParams(
            1, 1, ((0.5 - ms, 0.5),), ((m - 0.5, 0.5),),
            kappa=c / (math.gamma(m) * math.gamma(ms)), c=c,
        )
    if isinstance(model, GeneralizedK):
        m, k = model.m, model.k
        c = math.sqrt(m * k)
        return FoxHParams(
            2, 0, (), ((m - 0.5, 0.5), (k - 0.5, 0.5)),
            kappa=c / (math.gamma(m) * math.gamma(k)), c=c,
        )
    raise ParamError(f"unknown fading model {model!r}")


def product_params(pair: HopPair) -> FoxHParams:
    """pdf of |h|*|g| for independent hops."""
    return foxh.product(to_foxh(pair.h), to_foxh(pair.g))


def sample_with(model: FadingModel, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(model, Rayleigh):
        return sample_with(Nakagami(1.0), count, rng)
    if isinstance(model, Nakagami):
        return np.sqrt(rng.gamma(model.m, 1.0 / model.m, count))
    if isinstance(model, AlphaMu):
        a, mu = model.alpha, model.mu
        eta = math.exp(math.lgamma(mu + 2.0 / a) - math.lgamma(mu))
        return rng.gamma(mu, 1.0, count) ** (1.0 / a) / math.sqrt(eta)
    if isinstance(model, FisherF):
        # gamma multipath power over gamma (inverse-gamma shadowing), unit mean
        multipath = rng.gamma(model.m, 1.0 / model.m, count)
        shadow = rng.gamma(model.ms, 1.0 / (model.ms - 1.0), count)
        return np.sqrt(multipath / shadow)
    if isinstance(model, GeneralizedK):
        multipath = rng.gamma(model.m, 1.0 / model.m, count)
        shadow = rng.gamma(model.k, 1.0 / model.k, count)
        return np.sqrt(multipath * shadow)
    raise ParamError(f"unknown fading model {model!r}")


def sample(model: FadingModel, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. amplitude draws, deterministic in ``seed``."""
    if count < 1:
        raise ParamError("count must be >= 1")
    return sample_with(model, count, np.random.Generator(np.random.Philox(seed)))


def to_dict(model: FadingModel) -> dict:
    out = {"kind": model.kind}
    out.update({k: v for k, v in vars(model).items()})
    return out


def from_dict(spec: dict | str) -> FadingModel:
    """Build a model from ``{"kind": "nakagami", "m": 2}`` (or just ``"rayleigh"``)."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    try:
        cls = MODEL_KINDS[spec.pop("kind")]
    except KeyError as exc:
        raise ParamError(f"unknown or missing fading kind in {spec!r}") from exc
    try:
        return cls(**{k: float(v) for k, v in spec.items()})
    except TypeError as exc:
        raise ParamError(f"bad parameters for {cls.kind}: {exc}") from exc
