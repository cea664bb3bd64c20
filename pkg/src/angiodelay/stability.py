"""Local stability of the positive steady state and its switches.

Three independent routes to the same verdict are kept deliberately separate
so they can cross-check each other:

* Routh-Hurwitz array on the reduced polynomial (non-shifted Erlang only),
* right-half-plane root counting by the argument-principle sweep of the
  characteristic function along the imaginary axis (works for any kernel),
* direct eigenvalues of the companion matrix (tests only).

Critical parameter values come from the closed forms for non-shifted
Erlang kernels, from phase reconstruction at crossing frequencies for
shifted Erlang kernels, and from Newton continuation of the system
``Re W(i*omega) = Im W(i*omega) = 0`` for tent kernels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .charfun import (
    AuxFunction,
    Polynomial,
    _central_derivative,
    _erlang_delay_numerator,
    aux_function_erlang,
    erlang_reduced_poly,
    tent_char_parts,
    tent_g1,
)
from .errors import (
    ConditionFailureError,
    ContinuationStallError,
    DegenerateInputError,
    InconclusiveSignError,
    NonConvergentError,
    NoPositiveSteadyStateError,
    OnAxisZeroError,
)
from .model import ModelParams, derived_rates

__all__ = [
    "STABLE",
    "UNSTABLE",
    "BOUNDARY",
    "StabilityReport",
    "AlwaysStable",
    "ALWAYS_STABLE",
    "routh_hurwitz",
    "critical_erlang_rate",
    "critical_sigma_dirac",
    "CrossingCandidate",
    "SigmaSwitch",
    "UnstableAtZero",
    "critical_erlang_shift",
    "mikhailov_count",
    "TentBounds",
    "tent_sufficient_bounds",
    "SwitchCurve",
    "tent_switch_curve",
    "tent_neutral_boundary_point",
    "SwitchGuarantee",
    "erlang_21_switch_conditions",
    "hopf_transversality",
]

STABLE = "stable"
UNSTABLE = "unstable"
BOUNDARY = "boundary"


@dataclass
class StabilityReport:
    """Outcome of a stability query.

    ``rhp_root_count`` is ``None`` when the method used cannot count roots
    (e.g. a boundary verdict).  Whenever both are known, ``verdict ==
    STABLE`` iff ``rhp_root_count == 0``.
    """

    verdict: str
    rhp_root_count: Optional[int] = None
    critical_value: Optional[tuple[str, float]] = None
    omega0: Optional[float] = None
    transversal: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "rhp_root_count": self.rhp_root_count,
            "critical_value": list(self.critical_value) if self.critical_value else None,
            "omega0": self.omega0,
            "transversal": self.transversal,
        }


class AlwaysStable:
    """Marker: the steady state is stable for every value of the swept parameter."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AlwaysStable"


ALWAYS_STABLE = AlwaysStable()


# ---------------------------------------------------------------------------
# Routh-Hurwitz
# ---------------------------------------------------------------------------

def routh_hurwitz(poly: Polynomial) -> StabilityReport:
    """Verdict from the full Routh array.

    Zero pivots use the standard epsilon substitution; an all-zero row is
    replaced by the derivative of its auxiliary polynomial.  Either event
    means roots sit symmetric about the origin or on the boundary, so the
    verdict is BOUNDARY unless the continued array still shows strict sign
    changes (then roots are provably in the right half-plane).
    """
    coeffs = np.asarray(poly.coeffs, dtype=float)
    if not np.any(coeffs != 0.0):
        raise DegenerateInputError("zero polynomial has no stability verdict")
    desc = coeffs[::-1].copy()
    while desc[0] == 0.0:
        desc = desc[1:]
    if len(desc) == 1:
        return StabilityReport(verdict=STABLE, rhp_root_count=0)
    if desc[0] < 0.0:
        desc = -desc

    n = len(desc) - 1
    scale = np.max(np.abs(desc))
    tol = 1e-12 * scale
    width = n // 2 + 1
    rows = np.zeros((n + 1, width + 1))
    rows[0, : len(desc[0::2])] = desc[0::2]
    rows[1, : len(desc[1::2])] = desc[1::2]

    boundary = False
    eps = 1e-30 * scale
    for i in range(2, n + 1):
        upper, lower = rows[i - 2], rows[i - 1]
        if np.all(np.abs(lower) <= tol):
            # symmetric-root row: differentiate the auxiliary (even) polynomial
            boundary = True
            order = n - (i - 2)
            powers = np.array([order - 2 * j for j in range(width + 1)], dtype=float)
            lower = rows[i - 1] = np.where(powers > 0, upper * powers, 0.0)
        pivot = lower[0]
        if abs(pivot) <= tol:
            boundary = True
            pivot = eps if pivot >= 0 else -eps
        for j in range(width):
            rows[i, j] = (pivot * upper[j + 1] - upper[0] * lower[j + 1]) / pivot

    first_col = np.concatenate([[desc[0]], rows[1:, 0]])
    signs = np.sign(np.where(np.abs(first_col) <= tol, 0.0, first_col))
    nonzero = signs[signs != 0.0]
    changes = int(np.sum(nonzero[1:] != nonzero[:-1]))

    if boundary and changes == 0:
        return StabilityReport(verdict=BOUNDARY, rhp_root_count=None)
    if changes > 0:
        return StabilityReport(verdict=UNSTABLE, rhp_root_count=changes)
    return StabilityReport(verdict=STABLE, rhp_root_count=0)


# ---------------------------------------------------------------------------
# Critical Erlang rate (non-shifted kernels)
# ---------------------------------------------------------------------------

_SUPPORTED_RATE_CASES = {(1, 1), (2, 2), (3, 3), (1, 2), (2, 1)}


def _require_steady_state(params: ModelParams, allow_equal=False):
    ok = params.b >= params.mu if allow_equal else params.b > params.mu
    if not ok:
        raise NoPositiveSteadyStateError(
            f"b={params.b} must exceed mu={params.mu} for this analysis"
        )


def critical_erlang_rate(params: ModelParams, m1: int, m2: int):
    """Threshold rate above which the steady state is stable at zero shift.

    Returns ``ALWAYS_STABLE`` when no positive threshold exists.  The limit
    ``mu == b`` (vanishing restoring rate) is accepted so treatment sweeps
    can include their endpoint.  All thresholds except (3, 3) are exact
    Routh boundaries; the (3, 3) closed form is a sufficient pair that can
    sit up to about a percent above the exact boundary (stability above it
    still holds, and the treatment limit is shared).
    """
    if (m1, m2) not in _SUPPORTED_RATE_CASES:
        raise ConditionFailureError(f"no closed-form rate threshold for (m1, m2)=({m1}, {m2})")
    _require_steady_state(params, allow_equal=True)
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma
    ab = params.alpha * params.b

    if (m1, m2) == (1, 1):
        return gamma / beta if gamma > 0.0 else ALWAYS_STABLE
    if (m1, m2) == (2, 2):
        return 0.5 * beta + 2.0 * gamma / beta
    if (m1, m2) == (3, 3):
        cubic = Polynomial([-gamma**2, 3.0 * gamma * beta,
                            -3.0 * (8.0 * gamma + 3.0 * beta**2), 8.0 * beta])
        candidates = [z.real for z in cubic.roots()
                      if abs(z.imag) < 1e-9 * max(1.0, abs(z)) and z.real > 0.0]
        top = max(candidates) if candidates else 0.0
        return max(top, 9.0 * beta / 8.0)
    if (m1, m2) == (2, 1):
        value = 0.5 * beta + 2.0 * gamma / beta - ab
        return value if value > 0.0 else ALWAYS_STABLE

    # (1, 2): the Routh condition for the quartic
    # lambda^4 + 2a lambda^3 + a(a+r) lambda^2 + a(a beta + gamma) lambda + gamma a^2
    # reduces (after dividing by a^2) to the cubic below being positive; its
    # sign rule admits exactly one positive root, the threshold.
    cubic = Polynomial([
        -gamma**2,
        -2.0 * ab * gamma,
        2.0 * params.r * beta - beta**2 - 2.0 * gamma,
        2.0 * beta,
    ])
    roots = cubic.roots()
    scale = max(1.0, float(np.max(np.abs(roots))) if len(roots) else 1.0)
    positive = sorted(z.real for z in roots
                      if abs(z.imag) < 1e-9 * scale and z.real > 1e-12 * scale)
    if not positive:
        return ALWAYS_STABLE
    if len(positive) > 1:
        raise ConditionFailureError("rate condition produced several positive roots")
    return positive[0]


# ---------------------------------------------------------------------------
# Crossing shifts
# ---------------------------------------------------------------------------

def critical_sigma_dirac(params: ModelParams):
    """Critical discrete delay and its crossing frequency.

    The crossing frequency solves ``omega**4 = beta**2*omega**2 + gamma**2``
    and the shift follows from the phase condition.
    """
    _require_steady_state(params, allow_equal=True)
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma
    omega = math.sqrt((beta**2 + math.hypot(beta * beta, 2.0 * gamma)) / 2.0)
    sigma = math.atan2(beta * omega, gamma) / omega
    return sigma, omega


@dataclass(frozen=True)
class CrossingCandidate:
    """One crossing frequency with its admissible shifts and direction.

    Crossing shifts for this frequency are ``sigma_first + k*period`` for
    ``k = 0, 1, 2, ...``; ``direction`` is +1 when roots cross into the
    right half-plane as the shift grows.
    """

    omega: float
    sigma_first: float
    period: float
    direction: int
    simple: bool


@dataclass
class SigmaSwitch:
    """First stability switch in the shift parameter."""

    sigma0: float
    omega0: float
    candidates: list
    multiple_root: bool = False


@dataclass(frozen=True)
class UnstableAtZero:
    """The state is already unstable at zero shift, hence for every shift."""

    rhp_count: Optional[int] = None


def critical_erlang_shift(params: ModelParams, m1: int, m2: int, a: float):
    """Smallest destabilising shift for shared-rate Erlang kernels.

    Returns :class:`UnstableAtZero` when the zero-shift state is already
    unstable.  Otherwise every positive root of the crossing function is
    turned into its family of candidate shifts and the smallest shift with
    a rightward crossing is reported.  A ``multiple_root`` flag marks the
    non-generic case of a (numerically) multiple crossing root, which is
    reported rather than analysed.
    """
    _require_steady_state(params, allow_equal=True)
    reduced = erlang_reduced_poly(params, m1, m2, a)
    at_zero = routh_hurwitz(reduced)
    if at_zero.verdict == UNSTABLE:
        return UnstableAtZero(rhp_count=at_zero.rhp_root_count)
    if at_zero.verdict == BOUNDARY:
        raise ConditionFailureError("steady state sits on the stability boundary at zero shift")

    aux = aux_function_erlang(params, m1, m2, a)
    roots = aux.positive_roots()
    if not roots:
        raise ConditionFailureError("no crossing frequency found; shift sweep cannot destabilise")
    m_max = max(m1, m2)
    candidates = []
    for root in roots:
        omega = root.omega
        head = -(omega * omega) * (a + 1j * omega) ** m_max
        numer = _erlang_delay_numerator(params, m1, m2, a, 1j * omega)
        phase = (-cmath.phase(-head / numer)) % (2.0 * math.pi)
        candidates.append(CrossingCandidate(
            omega=omega,
            sigma_first=phase / omega,
            period=2.0 * math.pi / omega,
            direction=1 if root.fprime > 0 else -1,
            simple=root.simple,
        ))
    rightward = [c for c in candidates if c.direction > 0]
    if not rightward:
        raise ConditionFailureError("no rightward crossing among the crossing frequencies")
    best = min(rightward, key=lambda c: c.sigma_first)
    return SigmaSwitch(
        sigma0=best.sigma_first,
        omega0=best.omega,
        candidates=candidates,
        multiple_root=any(not c.simple for c in candidates),
    )


# ---------------------------------------------------------------------------
# Generalized argument-principle count
# ---------------------------------------------------------------------------

def _auto_omega_max(w: Callable[[complex], complex], n: int) -> float:
    omega = 16.0
    for _ in range(40):
        ratio = abs(w(1j * omega)) / omega**n
        if 0.6 < ratio < 1.6:
            return 8.0 * omega
        omega *= 2.0
    raise NonConvergentError("could not locate the asymptotic regime of the characteristic function")


def mikhailov_count(w: Callable[[complex], complex], n: int, omega_max: Optional[float] = None,
                    steps: int = 512, on_axis_tol: float = 1e-8,
                    max_points: int = 400_000) -> int:
    """Number of zeros in the open right half-plane.

    ``w`` must be analytic with ``w(lambda) ~ lambda**n`` at infinity and
    zero-free on the imaginary axis.  The total argument change of
    ``w(i*omega)`` over ``[0, omega_max]`` is accumulated from principal
    increments, inserting midpoints wherever an increment exceeds pi/4; the
    remaining change up to infinity is taken from the known leading power.
    The count is ``n/2 - Delta/pi`` rounded to the nearest integer.
    """
    if omega_max is None:
        omega_max = _auto_omega_max(w, n)
    omegas = np.linspace(0.0, omega_max, steps + 1)
    values = np.array([w(1j * om) for om in omegas], dtype=complex)

    def check_on_axis(oms, vals):
        norms = np.abs(vals) / (1.0 + oms**n)
        if norms.min() < on_axis_tol * norms.max():
            raise OnAxisZeroError("characteristic value too small on the imaginary axis")

    for _ in range(64):
        check_on_axis(omegas, values)
        increments = np.angle(values[1:] / values[:-1])
        bad = np.flatnonzero(np.abs(increments) > math.pi / 4.0)
        if len(bad) == 0:
            break
        if len(omegas) + len(bad) > max_points:
            raise NonConvergentError("argument sweep did not resolve within the point budget")
        mids = 0.5 * (omegas[bad] + omegas[bad + 1])
        mid_vals = np.array([w(1j * om) for om in mids], dtype=complex)
        omegas = np.insert(omegas, bad + 1, mids)
        values = np.insert(values, bad + 1, mid_vals)
    else:
        raise NonConvergentError("argument sweep kept refining without resolving increments")

    delta_sweep = float(np.sum(np.angle(values[1:] / values[:-1])))
    target = n * math.pi / 2.0
    tail = (target - cmath.phase(values[-1]) + math.pi) % (2.0 * math.pi) - math.pi
    delta = delta_sweep + tail
    count_real = n / 2.0 - delta / math.pi
    count = round(count_real)
    if abs(count_real - count) > 0.1 or count < 0:
        raise NonConvergentError(f"count did not settle on an integer: {count_real}")
    return int(count)


# ---------------------------------------------------------------------------
# Tent kernels: sufficient bounds and the numeric switch curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TentBounds:
    """Closed-form sufficient bounds for tent kernels.

    Shifts below ``stable_below`` are provably stable for every admissible
    half-width; shifts inside ``unstable_interval`` (when present) are
    provably unstable.  The two regions are mutually exclusive.
    """

    stable_below: float
    unstable_interval: Optional[tuple[float, float]]


def tent_sufficient_bounds(params: ModelParams) -> TentBounds:
    _require_steady_state(params, allow_equal=True)
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma
    root = math.sqrt(beta * beta + 4.0 * gamma)
    stable_below = math.pi / (beta + root + gamma * math.pi / beta)
    upper = 2.0 * math.pi / (beta + root)
    if gamma > 0.0 and beta / gamma < upper:
        interval = (beta / gamma, upper)
    else:
        interval = None
    return TentBounds(stable_below=stable_below, unstable_interval=interval)


@dataclass
class SwitchCurve:
    """Stability-switch curve in the (half-width, shift) plane.

    ``trimmed`` collects continuation samples whose shift fell below the
    half-width (neutral region); they are excluded from the main arrays.
    """

    epsilon: np.ndarray
    sigma: np.ndarray
    omega: np.ndarray
    trimmed: list


def _tent_residual(params, eps, omega, sigma):
    re, im = tent_char_parts(params, sigma, eps, omega)
    return np.array([re, im])


def _tent_newton(params, eps, omega, sigma, tol=1e-11, max_iter=60):
    x = np.array([omega, sigma], dtype=float)
    for _ in range(max_iter):
        res = _tent_residual(params, eps, x[0], x[1])
        norm = float(np.hypot(res[0], res[1]))
        if norm < tol:
            return x, norm
        jac = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(1.0, abs(x[j]))
            bumped = x.copy()
            bumped[j] += h
            hi = _tent_residual(params, eps, bumped[0], bumped[1])
            bumped[j] -= 2.0 * h
            lo = _tent_residual(params, eps, bumped[0], bumped[1])
            jac[:, j] = (hi - lo) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            return None
        # damped update: backtrack until the residual shrinks
        for damp in (1.0, 0.5, 0.25, 0.125, 0.0625):
            trial = x - damp * step
            if trial[0] <= 0.0:
                continue
            trial_norm = float(np.linalg.norm(_tent_residual(params, eps, trial[0], trial[1])))
            if trial_norm < norm:
                x = trial
                break
        else:
            return None
    res = _tent_residual(params, eps, x[0], x[1])
    norm = float(np.hypot(res[0], res[1]))
    if norm < tol:
        return x, norm
    return None


def tent_switch_curve(params: ModelParams, epsilon_grid) -> SwitchCurve:
    """Trace the switch curve over a grid of half-widths by continuation.

    The first point is seeded from the discrete-delay limit; each solve
    warm-starts from its predecessor.  When Newton stalls, the half-width
    step is bisected up to three times before giving up.
    """
    _require_steady_state(params, allow_equal=True)
    grid = np.sort(np.asarray(epsilon_grid, dtype=float))
    if len(grid) == 0 or grid[0] <= 0.0:
        raise ValueError("epsilon grid must be nonempty and positive")
    sigma_seed, omega_seed = critical_sigma_dirac(params)

    kept_eps, kept_sigma, kept_omega, trimmed = [], [], [], []
    prev_eps = 0.0
    state = (omega_seed, sigma_seed)
    for eps_target in grid:
        solution = _advance_tent_branch(params, prev_eps, state, eps_target)
        state = solution
        prev_eps = eps_target
        omega, sigma = solution
        if sigma < eps_target:
            trimmed.append((eps_target, sigma, omega))
        else:
            kept_eps.append(eps_target)
            kept_sigma.append(sigma)
            kept_omega.append(omega)
    return SwitchCurve(
        epsilon=np.array(kept_eps),
        sigma=np.array(kept_sigma),
        omega=np.array(kept_omega),
        trimmed=trimmed,
    )


def _advance_tent_branch(params, eps_from, state, eps_to, retries=3):
    """Continuation step with bisected retries on Newton failure."""
    omega, sigma = state
    attempt = _tent_newton(params, eps_to, omega, sigma)
    if attempt is not None:
        return float(attempt[0][0]), float(attempt[0][1])
    if retries == 0:
        raise ContinuationStallError(
            f"Newton stalled advancing the switch curve to epsilon={eps_to}"
        )
    midpoint = 0.5 * (eps_from + eps_to)
    mid_state = _advance_tent_branch(params, eps_from, state, midpoint, retries - 1)
    return _advance_tent_branch(params, midpoint, mid_state, eps_to, retries - 1)


def tent_neutral_boundary_point(params: ModelParams):
    """Point where the switch curve meets the neutral boundary (shift = half-width).

    On that line the phase variable ``s = omega*sigma`` equals
    ``omega*epsilon``, which reduces the two crossing equations to one
    scalar equation on ``(0, pi/2]``.
    """
    _require_steady_state(params, allow_equal=True)
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma

    def psi(s):
        return gamma * math.sin(s) ** 2 - beta**2 * float(tent_g1(s)) * math.cos(s)

    if gamma <= 0.0:
        s_star = math.pi / 2.0
    else:
        s_star = brentq(psi, 1e-9, math.pi / 2.0, xtol=1e-15, rtol=8.9e-16)
    g = float(tent_g1(s_star))
    disc = (g * beta * math.sin(s_star)) ** 2 + 4.0 * g * gamma * math.cos(s_star)
    omega = 0.5 * (g * beta * math.sin(s_star) + math.sqrt(disc))
    sigma = s_star / omega
    return sigma, omega


# ---------------------------------------------------------------------------
# Single-switch guarantees for the (2, 1) Erlang case
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchGuarantee:
    """Evaluated single-switch conditions for the (m1, m2) = (2, 1) case."""

    alpha1: float
    alpha2: float
    basic: bool
    verA_first: bool
    verA_second: bool
    verA: bool
    notcontra: bool
    aux_sign_changes: int
    guarantee: Optional[str]


def erlang_21_switch_conditions(params: ModelParams, a: float) -> SwitchGuarantee:
    _require_steady_state(params, allow_equal=True)
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma
    ab = params.alpha * params.b

    alpha1 = 2.0 * ab * gamma - a * beta**2
    alpha2 = ab * ab - a * a
    threshold = ab * min(1.0, 2.0 * gamma / beta**2)
    basic = a >= threshold
    verA_first = a < threshold
    verA_second = (a * a + 2.0 * ab * ab) ** 3 < 27.0 * (2.0 * ab * gamma + a * (ab * ab - beta**2)) ** 2
    verA = verA_first and verA_second
    notcontra = (ab < beta) and (1.0 < 2.0 * gamma / beta**2)

    aux = aux_function_erlang(params, 2, 1, a)
    sign_changes = aux.poly_u.descartes_sign_changes()

    if basic:
        guarantee = "min-condition"
    elif verA:
        guarantee = "verA"
    elif sign_changes == 1:
        guarantee = "descartes"
    else:
        guarantee = None
    return SwitchGuarantee(
        alpha1=alpha1, alpha2=alpha2, basic=basic,
        verA_first=verA_first, verA_second=verA_second, verA=verA,
        notcontra=notcontra, aux_sign_changes=sign_changes, guarantee=guarantee,
    )


def hopf_transversality(aux: AuxFunction, omega0: float) -> int:
    """Sign of the crossing-function slope at a root.

    A positive sign certifies that the characteristic roots cross the
    imaginary axis rightward with positive speed as the shift grows.
    """
    slope = _central_derivative(aux.fn_omega, omega0)
    scale = aux._deriv_scale(omega0)
    if abs(slope) < 1e-8 * scale:
        raise InconclusiveSignError(
            f"|F'({omega0})| = {abs(slope):.3e} below resolution; multiple root suspected"
        )
    return 1 if slope > 0.0 else -1
