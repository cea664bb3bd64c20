"""Characteristic function of the linearised dynamics and derived objects.

For kernels ``f1, f2`` with Laplace transforms ``L1, L2`` the characteristic
function of the linearisation around the positive steady state is

    W(lambda) = lambda**2 + lambda*(r*L1(lambda) + alpha*b*L2(lambda))
                + gamma*L1(lambda),

with ``gamma = 2*r*(b - mu)/3``.  For Erlang kernels sharing one rate ``a``
the zeros of ``W`` coincide with the zeros of the pole-free form

    D(lambda) = lambda**2*(a+lambda)**mM
                + (lambda*(r*a**m1*(a+lambda)**(mM-m1)
                           + alpha*b*a**m2*(a+lambda)**(mM-m2))
                   + gamma*a**m1*(a+lambda)**(mM-m1)) * exp(-lambda*sigma),

where ``mM = max(m1, m2)``; at ``sigma = 0`` this is a polynomial of degree
``2 + mM``.  Imaginary-axis crossings happen at positive roots of a real
auxiliary function ``F`` built from squared moduli; closed polynomial forms
in ``u = omega**2`` exist for ``(m, m)``, ``(1, 2)`` and ``(2, 1)``.

For tent kernels, with ``g1(x) = 2*(1 - cos x)/x**2`` (so ``g1(0) = 1``),

    Re W(i*omega) = -omega**2 + g1(omega*eps)*(gamma*cos(omega*sig)
                                               + beta*omega*sin(omega*sig)),
    Im W(i*omega) = g1(omega*eps)*(beta*omega*cos(omega*sig)
                                   - gamma*sin(omega*sig)),

and the crossing function is ``F(omega) = omega**4 -
(omega**2*beta**2 + gamma**2)*g1(eps*omega)**2``.  The normalisation of
``g1`` is fixed so that ``F(omega0) = 0`` is literally the squared-modulus
condition ``|i*omega|**2 = |(i*omega*beta + gamma)*g(i*omega*eps)|**2``;
roots are independent of that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import UnsupportedError
from .kernels import DelayKernel
from .model import ModelParams, derived_rates

__all__ = [
    "Polynomial",
    "CharFunction",
    "AuxFunction",
    "AuxRoot",
    "erlang_reduced_poly",
    "erlang_shifted_char",
    "aux_function_erlang",
    "aux_function_tent",
    "tent_char_parts",
    "tent_g1",
    "hodograph_points",
]


class Polynomial:
    """Real-coefficient polynomial, coefficients in ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        # trim exact trailing zeros but keep at least the constant term
        last = len(c) - 1
        while last > 0 and c[last] == 0.0:
            last -= 1
        self.coeffs = c[: last + 1].copy()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = np.zeros(n)
        out[: len(a)] += a
        out[: len(b)] += b
        return Polynomial(out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, len(self.coeffs))
        return Polynomial(self.coeffs[1:] * k)

    def roots(self) -> np.ndarray:
        """All complex roots via the companion-matrix eigenvalues."""
        if self.degree == 0:
            return np.array([], dtype=complex)
        return np.roots(self.coeffs[::-1])

    def descartes_sign_changes(self) -> int:
        """Number of sign changes between consecutive nonzero coefficients."""
        signs = [c > 0 for c in self.coeffs if c != 0.0]
        return sum(1 for s1, s2 in zip(signs, signs[1:]) if s1 != s2)

    @staticmethod
    def shifted_monomial_power(a: float, k: int) -> "Polynomial":
        """``(a + x)**k`` expanded in ascending powers of ``x``."""
        coeffs = [math.comb(k, j) * a ** (k - j) for j in range(k + 1)]
        return Polynomial(coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


@dataclass(frozen=True)
class CharFunction:
    """Characteristic function for a kernel pair; callable on complex arguments."""

    params: ModelParams
    kernel1: DelayKernel
    kernel2: DelayKernel

    @property
    def beta(self) -> float:
        return derived_rates(self.params).beta

    @property
    def gamma(self) -> float:
        return derived_rates(self.params).gamma

    def __call__(self, lam: complex) -> complex:
        lam = complex(lam)
        p = self.params
        l1 = self.kernel1.laplace(lam)
        l2 = self.kernel2.laplace(lam)
        gamma = 2.0 * p.r * (p.b - p.mu) / 3.0
        return lam * lam + lam * (p.r * l1 + p.alpha * p.b * l2) + gamma * l1


def _erlang_pieces(params: ModelParams, m1: int, m2: int, a: float):
    rates = derived_rates(params)
    m_max = max(m1, m2)
    return rates, m_max


def erlang_reduced_poly(params: ModelParams, m1: int, m2: int, a: float) -> Polynomial:
    """Polynomial whose roots are exactly the characteristic zeros at zero shift.

    Degree is ``2 + max(m1, m2)``; multiplying the characteristic function by
    ``(a + lambda)**max(m1, m2)`` clears the kernel poles.
    """
    if a <= 0.0:
        raise ValueError("rate a must be positive")
    rates, m_max = _erlang_pieces(params, m1, m2, a)
    ab = params.alpha * params.b
    lam = Polynomial([0.0, 1.0])
    head = lam * lam * Polynomial.shifted_monomial_power(a, m_max)
    tail1 = (params.r * a**m1) * (lam * Polynomial.shifted_monomial_power(a, m_max - m1))
    tail2 = (ab * a**m2) * (lam * Polynomial.shifted_monomial_power(a, m_max - m2))
    tail3 = (rates.gamma * a**m1) * Polynomial.shifted_monomial_power(a, m_max - m1)
    return head + tail1 + tail2 + tail3


def erlang_shifted_char(params: ModelParams, m1: int, m2: int, a: float,
                        sigma: float, lam: complex) -> complex:
    """Pole-free characteristic form for shifted Erlang kernels at one point."""
    lam = complex(lam)
    rates, m_max = _erlang_pieces(params, m1, m2, a)
    ab = params.alpha * params.b
    s = a + lam
    head = lam * lam * s**m_max
    numer = (lam * (params.r * a**m1 * s ** (m_max - m1) + ab * a**m2 * s ** (m_max - m2))
             + rates.gamma * a**m1 * s ** (m_max - m1))
    return head + numer * np.exp(-lam * sigma)


def _erlang_delay_numerator(params: ModelParams, m1: int, m2: int, a: float,
                            lam: complex) -> complex:
    rates, m_max = _erlang_pieces(params, m1, m2, a)
    ab = params.alpha * params.b
    s = a + lam
    return (lam * (params.r * a**m1 * s ** (m_max - m1) + ab * a**m2 * s ** (m_max - m2))
            + rates.gamma * a**m1 * s ** (m_max - m1))


@dataclass(frozen=True)
class AuxRoot:
    """A positive root of a crossing function, with its derivative sign."""

    omega: float
    fprime: float
    simple: bool


@dataclass
class AuxFunction:
    """Real function whose positive simple roots give crossing frequencies.

    ``poly_u`` holds the closed polynomial in ``u = omega**2`` when one
    exists; ``fn_omega`` always evaluates the squared-modulus form directly.
    """

    case: str
    fn_omega: Callable[[float], float]
    omega_max: float
    poly_u: Optional[Polynomial] = None

    def __call__(self, omega):
        return self.fn_omega(omega)

    def positive_roots(self, rel_tol: float = 1e-12) -> list[AuxRoot]:
        """All positive roots of F with a simplicity flag per root.

        Polynomial cases go through companion-matrix roots in ``u`` followed
        by a Newton polish; the tent / general cases bracket sign changes on
        a log-spaced grid and bisect.
        """
        if self.poly_u is not None:
            return self._roots_from_poly(rel_tol)
        return self._roots_from_scan(rel_tol)

    def _roots_from_poly(self, rel_tol):
        poly = self.poly_u
        dpoly = poly.derivative()
        raw = poly.roots()
        scale = max(1.0, np.max(np.abs(raw))) if len(raw) else 1.0
        out = []
        for u in raw:
            if abs(u.imag) > 1e-9 * scale or u.real <= 1e-14 * scale:
                continue
            u0 = u.real
            for _ in range(4):  # polish in exact arithmetic of the closed form
                d = dpoly(u0)
                if d == 0.0:
                    break
                step = poly(u0) / d
                u0 -= step
                if abs(step) <= rel_tol * max(1.0, abs(u0)):
                    break
            if u0 <= 0.0:
                continue
            omega = math.sqrt(u0)
            out.append(self._package_root(omega))
        out.sort(key=lambda root: root.omega)
        return _dedupe_roots(out)

    def _roots_from_scan(self, rel_tol):
        grid = np.concatenate([
            np.logspace(-6, math.log10(self.omega_max), 600),
        ])
        vals = np.array([self.fn_omega(w) for w in grid])
        out = []
        for i in range(len(grid) - 1):
            v1, v2 = vals[i], vals[i + 1]
            if v1 == 0.0:
                out.append(self._package_root(grid[i]))
                continue
            if v1 * v2 < 0.0:
                w0 = brentq(self.fn_omega, grid[i], grid[i + 1],
                            xtol=1e-300, rtol=max(rel_tol, 4e-16))
                out.append(self._package_root(w0))
        return _dedupe_roots(out)

    def _package_root(self, omega):
        fprime = _central_derivative(self.fn_omega, omega)
        simple = abs(fprime) >= 1e-6 * self._deriv_scale(omega)
        return AuxRoot(omega=omega, fprime=fprime, simple=simple)

    def _deriv_scale(self, omega):
        # local magnitude of F around the root, per unit of omega
        w = max(omega, 1e-6)
        probe = max(abs(self.fn_omega(1.5 * w)), abs(self.fn_omega(0.5 * w)), 1e-300)
        return probe / w


def _dedupe_roots(roots, rel=1e-8):
    out = []
    for root in roots:
        if out and abs(root.omega - out[-1].omega) <= rel * max(1.0, out[-1].omega):
            continue
        out.append(root)
    return out


def _central_derivative(fn, x, scale=None):
    h = 1e-6 * max(1.0, abs(x))
    d1 = (fn(x + h) - fn(x - h)) / (2.0 * h)
    h2 = 0.5 * h
    d2 = (fn(x + h2) - fn(x - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0  # Richardson step


def aux_function_erlang(params: ModelParams, m1: int, m2: int, a: float) -> AuxFunction:
    """Crossing function for shifted Erlang kernels sharing rate ``a``."""
    if a <= 0.0:
        raise ValueError("rate a must be positive")
    rates, m_max = _erlang_pieces(params, m1, m2, a)
    beta, gamma = rates.beta, rates.gamma
    ab = params.alpha * params.b
    r = params.r

    def fn(omega):
        omega = float(omega)
        numer = _erlang_delay_numerator(params, m1, m2, a, 1j * omega)
        return omega**4 * (a * a + omega * omega) ** m_max - abs(numer) ** 2

    omega_max = 2.0 * max(1.0, a + beta + math.sqrt(max(gamma, 0.0)))

    if m1 == m2:
        # u**2*(a**2 + u)**m - a**(2m)*(u*beta**2 + gamma**2)
        m = m1
        u = Polynomial([0.0, 1.0])
        poly = (u * u) * Polynomial.shifted_monomial_power(a * a, m) \
            - Polynomial([a ** (2 * m) * gamma**2, a ** (2 * m) * beta**2])
        case = "erlang-equal-m"
    elif (m1, m2) == (1, 2):
        poly = Polynomial([
            -(a**4) * gamma**2,
            -(a**2) * (a**2 * beta**2 + 2.0 * a * ab * gamma + gamma**2),
            a**2 * (a**2 - r**2),
            2.0 * a**2,
            1.0,
        ])
        case = "erlang-12"
    elif (m1, m2) == (2, 1):
        poly = Polynomial([
            -(gamma**2) * a**4,
            -(a**3) * (a * beta**2 - 2.0 * ab * gamma),
            a**2 * (a**2 - ab**2),
            2.0 * a**2,
            1.0,
        ])
        case = "erlang-21"
    else:
        poly = None
        case = "erlang-general"

    return AuxFunction(case=case, fn_omega=fn, omega_max=omega_max, poly_u=poly)


def tent_g1(x):
    """``2*(1 - cos x)/x**2`` with the series value near zero; ``g1(0) = 1``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 12.0 + x**4 / 360.0,
                   2.0 * (1.0 - np.cos(xs)) / (xs * xs))
    return out if out.ndim else float(out)


def tent_char_parts(params: ModelParams, sigma: float, epsilon: float, omega):
    """Real and imaginary part of the tent characteristic function on the axis."""
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma
    omega = np.asarray(omega, dtype=float)
    g = tent_g1(omega * epsilon)
    c, s = np.cos(omega * sigma), np.sin(omega * sigma)
    re = -omega * omega + g * (gamma * c + beta * omega * s)
    im = g * (beta * omega * c - gamma * s)
    if re.ndim:
        return re, im
    return float(re), float(im)


def aux_function_tent(params: ModelParams, epsilon: float) -> AuxFunction:
    """Crossing function for tent kernels of half-width ``epsilon``."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    rates = derived_rates(params)
    beta, gamma = rates.beta, rates.gamma

    def fn(omega):
        omega = float(omega)
        g = tent_g1(omega * epsilon)
        return omega**4 - (omega * omega * beta**2 + gamma**2) * g * g

    omega_max = 2.0 * max(1.0, epsilon * math.hypot(beta, gamma),
                          beta + math.sqrt(max(gamma, 0.0)))
    return AuxFunction(case="tent", fn_omega=fn, omega_max=omega_max, poly_u=None)


def hodograph_points(w: Callable[[complex], complex], omegas) -> np.ndarray:
    """Sample ``w(i*omega)`` along the axis; rows are (omega, re, im)."""
    omegas = np.asarray(omegas, dtype=float)
    vals = np.array([w(1j * om) for om in omegas])
    return np.column_stack([omegas, vals.real, vals.imag])
