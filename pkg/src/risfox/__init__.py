"""Outage and capacity of RIS-assisted links under Fox's H fading."""

from .errors import (
    AlternatingSumLoss,
    ArityError,
    DimensionLimit,
    DomainError,
    HigherOrderPole,
    NonConvergence,
    ParamError,
    PoleError,
    PoleOnContour,
    RisFoxError,
)
from .fading import AlphaMu, FisherF, GeneralizedK, HopPair, Nakagami, Rayleigh
from .foxh import FoxHParams
from .foxh_multi import MultiEvalResult, MultiFoxHParams
from .metrics import AsymptoticOutage, OutageQuery, RisLink
from .deployment import DeploymentScene
from .mcsim import McConfig, McEstimate
from .specfun import QuadratureSpec

__version__ = "0.1.0"
