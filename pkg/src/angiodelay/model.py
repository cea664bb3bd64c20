"""Model parameters, growth law, steady state and right-hand sides.

The model couples tumour volume ``p`` to the carrying capacity ``q`` of its
vasculature.  Vessel stimulation acts through the delayed density ratio
``p/q`` while inhibition scales with the tumour surface ``p**(2/3)``.  All
analysis code works on the rescaled coordinates ``x = ln(p/p_e)`` and
``y = ln(p*q_e/(q*p_e))``, whose equilibrium sits at the origin.

Convolution values of the delayed terms are *inputs* here: the quadrature
policy lives in :mod:`angiodelay.simulate`, which keeps both right-hand
sides pure and unit-testable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NoPositiveSteadyStateError

__all__ = [
    "ModelParams",
    "GrowthFunction",
    "SteadyState",
    "DerivedRates",
    "LOG_GROWTH",
    "steady_state",
    "derived_rates",
    "rhs_rescaled",
    "rhs_original",
    "params_from_json",
    "params_to_json",
]


@dataclass(frozen=True)
class ModelParams:
    """Kinetic constants of the model family.

    r      tumour growth rate (1/time)
    b      stimulation coefficient (1/time)
    a_H    inhibition coefficient (1/(time*volume^(2/3)))
    mu     vasculature loss rate / constant treatment rate (1/time)
    alpha  exponent coupling vessel dynamics to the density ratio, in [0, 1]
    """

    r: float
    b: float
    a_H: float
    mu: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.r > 0 and self.b > 0 and self.a_H > 0):
            raise ValueError("r, b and a_H must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def has_positive_steady_state(self) -> bool:
        return self.b > self.mu

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "b": self.b,
            "a_H": self.a_H,
            "mu": self.mu,
            "alpha": self.alpha,
        }


# Parameter set used throughout the numerical experiments (no treatment).
HAHNFELDT_PARAMS = ModelParams(r=0.192, b=5.85, a_H=8.73e-3, mu=0.0, alpha=1.0)


@dataclass(frozen=True)
class GrowthFunction:
    """Tumour growth law ``h`` with ``h(1) = 0`` and ``h'(1) = -1``.

    Only those two normalisations enter the linear analysis, so any strictly
    decreasing plug-in satisfying them is admissible.  The default is the
    logarithmic law ``h(theta) = -ln(theta)``.
    """

    eval: Callable[[float], float]
    deriv: Callable[[float], float]
    label: str = "log"

    def __post_init__(self):
        if abs(self.eval(1.0)) > 1e-12:
            raise ValueError("growth function must satisfy h(1) = 0")
        if abs(self.deriv(1.0) + 1.0) > 1e-12:
            raise ValueError("growth function must satisfy h'(1) = -1")
        grid = np.logspace(-3.0, 3.0, 61)
        slopes = np.array([self.deriv(t) for t in grid])
        if not np.all(slopes < 0.0):
            raise ValueError("growth function must be strictly decreasing")

    def __call__(self, theta: float) -> float:
        return self.eval(theta)

    @staticmethod
    def log() -> "GrowthFunction":
        return GrowthFunction(eval=lambda t: -math.log(t), deriv=lambda t: -1.0 / t, label="log")


LOG_GROWTH = GrowthFunction.log()

_GROWTH_REGISTRY = {"log": LOG_GROWTH}


@dataclass(frozen=True)
class SteadyState:
    """Positive equilibrium; tumour volume and carrying capacity coincide there."""

    p_e: float
    q_e: float


@dataclass(frozen=True)
class DerivedRates:
    """Rates entering the linearised dynamics.

    beta   combined delayed feedback strength, ``r + alpha*b`` (1/time)
    gamma  restoring rate through the surface term, ``2*r*(b - mu)/3`` (1/time^2)
    """

    beta: float
    gamma: float


def steady_state(params: ModelParams) -> SteadyState:
    """Unique positive steady state; exists iff ``b > mu``."""
    if not params.has_positive_steady_state:
        raise NoPositiveSteadyStateError(
            f"no positive steady state: b={params.b} must exceed mu={params.mu}"
        )
    level = ((params.b - params.mu) / params.a_H) ** 1.5
    return SteadyState(p_e=level, q_e=level)


def derived_rates(params: ModelParams) -> DerivedRates:
    return DerivedRates(
        beta=params.r + params.alpha * params.b,
        gamma=2.0 * params.r * (params.b - params.mu) / 3.0,
    )


def rhs_rescaled(params: ModelParams, h: GrowthFunction, conv1: float, conv2: float,
                 x: float, y: float):
    """Right-hand side in rescaled coordinates.

    ``conv1`` and ``conv2`` are the delayed convolutions of ``exp(y)`` and
    ``exp(alpha*y)`` supplied by the caller.  Returns ``(dx, dy)``.
    """
    if conv1 <= 0.0:
        raise DomainError(f"conv1 must be positive, got {conv1}")
    growth = params.r * h.eval(conv1)
    dy = (growth - params.b * conv2
          + (params.b - params.mu) * math.exp(2.0 * x / 3.0) + params.mu)
    return growth, dy


def rhs_original(params: ModelParams, h: GrowthFunction, conv_ratio1: float,
                 conv_ratio2: float, p: float, q: float):
    """Right-hand side in original coordinates.

    ``conv_ratio1`` is the delayed convolution of ``p/q`` and ``conv_ratio2``
    the convolution of ``(p/q)**alpha``.  Returns ``(dp, dq)``.
    """
    if p <= 0.0 or q <= 0.0:
        raise DomainError("p and q must be positive")
    if conv_ratio1 <= 0.0:
        raise DomainError(f"conv_ratio1 must be positive, got {conv_ratio1}")
    dp = params.r * p * h.eval(conv_ratio1)
    dq = q * (params.b * conv_ratio2 - params.a_H * p ** (2.0 / 3.0) - params.mu)
    return dp, dq


def params_from_json(source) -> tuple[ModelParams, GrowthFunction]:
    """Parse ``{"r":…, "b":…, "a_H":…, "mu":…, "alpha":…, "h":"log"}``.

    ``source`` may be a JSON string or an already-decoded dict.
    """
    data = json.loads(source) if isinstance(source, str) else dict(source)
    label = data.pop("h", "log")
    if label not in _GROWTH_REGISTRY:
        raise ValueError(f"unknown growth function {label!r}")
    params = ModelParams(
        r=float(data["r"]),
        b=float(data["b"]),
        a_H=float(data["a_H"]),
        mu=float(data.get("mu", 0.0)),
        alpha=float(data.get("alpha", 1.0)),
    )
    return params, _GROWTH_REGISTRY[label]


def params_to_json(params: ModelParams, h: GrowthFunction = LOG_GROWTH) -> str:
    payload = params.to_dict()
    payload["h"] = h.label
    return json.dumps(payload)
