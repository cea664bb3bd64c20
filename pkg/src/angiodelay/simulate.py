"""Time integration of the nonlinear delayed dynamics.

The integrator is classical RK4 in which every stage evaluates the delayed
convolutions by composite Gauss-Legendre quadrature over the truncated
kernel support, reading past states from a cubic-Hermite history on the
step grid.  Stage reads that fall beyond the last accepted sample (lags
shorter than the stage offset) use a first-order predictor from the stage
slope; kernels separated from zero never hit that path.

For non-shifted Erlang kernels the dynamics are equivalently a finite
ladder of ordinary differential equations (one stage per unit of kernel
shape), which serves as an independent cross-check of the quadrature
integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, ConfigError, UnsupportedError
from .kernels import DelayKernel, DiracKernel, ErlangKernel, TentKernel
from .model import GrowthFunction, ModelParams, rhs_rescaled, steady_state

__all__ = [
    "SimConfig",
    "History",
    "Trajectory",
    "simulate",
    "simulate_linear_chain",
    "classify_trajectory",
    "Converging",
    "Oscillating",
    "Diverging",
    "Inconclusive",
    "constant_history",
]

_BLOWUP_GUARD = 1e6


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``dt`` must resolve every time scale the kernels bring in (half-width,
    inverse rate, shift) by a factor of twenty.
    """

    dt: float
    T: float
    tail_tol: float = 1e-10
    quad_order: int = 8
    method: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0.0 or self.T <= 0.0:
            raise ConfigError("dt and T must be positive")
        if self.method != "rk4":
            raise ConfigError(f"unknown method {self.method!r}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ConfigError("tail_tol must lie in (0, 1)")
        if self.quad_order < 2:
            raise ConfigError("quad_order must be at least 2")

    def to_dict(self):
        return {"dt": self.dt, "T": self.T, "tail_tol": self.tail_tol,
                "quad_order": self.quad_order, "method": self.method}


def _kernel_scales(kernel: DelayKernel):
    if isinstance(kernel, DiracKernel):
        return [kernel.sigma] if kernel.sigma > 0.0 else []
    if isinstance(kernel, ErlangKernel):
        scales = [1.0 / kernel.a]
        if kernel.sigma > 0.0:
            scales.append(kernel.sigma)
        return scales
    if isinstance(kernel, TentKernel):
        return [kernel.epsilon, kernel.sigma]
    raise UnsupportedError(f"unknown kernel type {type(kernel).__name__}")


def _check_resolution(cfg: SimConfig, kernels):
    scales = [s for k in kernels for s in _kernel_scales(k)]
    if scales and cfg.dt > min(scales) / 20.0 * (1.0 + 1e-12):
        raise ConfigError(
            f"dt={cfg.dt} too coarse: must be <= {min(scales) / 20.0:g} "
            "to resolve the kernel scales"
        )


def _hermite(theta, h, y0, y1, m0, m1):
    t2 = theta * theta
    t3 = t2 * theta
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + h * ((t3 - 2.0 * t2 + theta) * m0 + (t3 - t2) * m1))


class History:
    """State record on a uniform step grid with cubic Hermite interpolation.

    Samples cover ``[-lookback, t_now]``; queries left of the recorded span
    return the earliest value (constant extension of the initial function).
    """

    def __init__(self, phi: Callable[[float], tuple], lookback: float, dt: float,
                 horizon: float):
        self.dt = dt
        n_back = int(math.ceil(lookback / dt)) + 1
        n_fwd = int(math.ceil(horizon / dt)) + 2
        size = n_back + n_fwd + 1
        self.t_first = -n_back * dt
        self.x = np.empty(size)
        self.y = np.empty(size)
        self.mx = np.zeros(size)
        self.my = np.zeros(size)
        # right-end slopes: identical to mx/my except at the t = 0 junction,
        # where the initial function's one-sided slope applies to the
        # interval ending there (the model derivative jumps at t = 0)
        self.mx_right = np.zeros(size)
        self.my_right = np.zeros(size)
        self.head = n_back  # index of t = 0
        self.junction = n_back
        ts = self.t_first + dt * np.arange(n_back + 1)
        vals = np.array([phi(t) for t in ts], dtype=float)
        self.x[: n_back + 1] = vals[:, 0]
        self.y[: n_back + 1] = vals[:, 1]
        if n_back >= 2:
            self.mx[1:n_back] = (self.x[2 : n_back + 1] - self.x[: n_back - 1]) / (2.0 * dt)
            self.my[1:n_back] = (self.y[2 : n_back + 1] - self.y[: n_back - 1]) / (2.0 * dt)
            self.mx[0] = (self.x[1] - self.x[0]) / dt
            self.my[0] = (self.y[1] - self.y[0]) / dt
            # second-order one-sided slope of the initial function at 0-
            self.mx[n_back] = (3.0 * self.x[n_back] - 4.0 * self.x[n_back - 1]
                               + self.x[n_back - 2]) / (2.0 * dt)
            self.my[n_back] = (3.0 * self.y[n_back] - 4.0 * self.y[n_back - 1]
                               + self.y[n_back - 2]) / (2.0 * dt)
        self.mx_right[: n_back + 1] = self.mx[: n_back + 1]
        self.my_right[: n_back + 1] = self.my[: n_back + 1]

    @property
    def t_now(self):
        return self.t_first + self.head * self.dt

    def set_head_slope(self, mx, my):
        # the right-end slope of the interval arriving at t = 0 keeps the
        # initial function's one-sided value; later nodes have no kink
        self.mx[self.head] = mx
        self.my[self.head] = my
        if self.head != self.junction:
            self.mx_right[self.head] = mx
            self.my_right[self.head] = my

    def append(self, x, y, mx, my):
        self.head += 1
        self.x[self.head] = x
        self.y[self.head] = y
        self.mx[self.head] = mx
        self.my[self.head] = my
        self.mx_right[self.head] = mx
        self.my_right[self.head] = my

    def values_at(self, tq):
        """Vectorised Hermite read of (x, y) at query times <= t_now."""
        pos = (np.asarray(tq, dtype=float) - self.t_first) / self.dt
        idx = np.clip(np.floor(pos).astype(int), 0, self.head - 1)
        theta = np.clip(pos - idx, 0.0, 1.0)
        x = _hermite(theta, self.dt, self.x[idx], self.x[idx + 1],
                     self.mx[idx], self.mx_right[idx + 1])
        y = _hermite(theta, self.dt, self.y[idx], self.y[idx + 1],
                     self.my[idx], self.my_right[idx + 1])
        return x, y

    def y_at(self, tq):
        """Hermite read of the delayed component only."""
        pos = (np.asarray(tq, dtype=float) - self.t_first) / self.dt
        idx = np.clip(np.floor(pos).astype(int), 0, self.head - 1)
        theta = np.clip(pos - idx, 0.0, 1.0)
        return _hermite(theta, self.dt, self.y[idx], self.y[idx + 1],
                        self.my[idx], self.my_right[idx + 1])


@dataclass
class Trajectory:
    """Sampled states in rescaled coordinates with slope data for interpolation."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    mx: np.ndarray
    my: np.ndarray
    params: ModelParams

    def interp(self, tq):
        dt = self.t[1] - self.t[0]
        pos = (np.asarray(tq, dtype=float) - self.t[0]) / dt
        idx = np.clip(np.floor(pos).astype(int), 0, len(self.t) - 2)
        theta = np.clip(pos - idx, 0.0, 1.0)
        x = _hermite(theta, dt, self.x[idx], self.x[idx + 1], self.mx[idx], self.mx[idx + 1])
        y = _hermite(theta, dt, self.y[idx], self.y[idx + 1], self.my[idx], self.my[idx + 1])
        return x, y

    def original_coordinates(self):
        """Map back to (p, q); positive by construction."""
        eq = steady_state(self.params)
        p = eq.p_e * np.exp(self.x)
        q = eq.q_e * np.exp(self.x - self.y)
        return p, q


def constant_history(x0: float, y0: float) -> Callable[[float], tuple]:
    """Constant initial function, the default for numerical experiments."""
    return lambda t: (x0, y0)


class _KernelQuadrature:
    """Nodes and density-weighted Gauss-Legendre weights on the truncated support."""

    def __init__(self, kernel: DelayKernel, tail_tol: float, quad_order: int):
        if isinstance(kernel, DiracKernel):
            self.tau = np.array([kernel.sigma])
            self.weights = np.array([1.0])
            return
        t_lo, t_hi = kernel.quadrature_support(tail_tol)
        if isinstance(kernel, TentKernel):
            pieces = [(t_lo, kernel.sigma), (kernel.sigma, t_hi)]
            scale = kernel.epsilon
        else:
            pieces = [(t_lo, t_hi)]
            scale = 1.0 / kernel.a
        glx, glw = np.polynomial.legendre.leggauss(quad_order)
        taus, weights = [], []
        for lo, hi in pieces:
            n_panels = max(2, int(math.ceil((hi - lo) / scale)))
            edges = np.linspace(lo, hi, n_panels + 1)
            for p0, p1 in zip(edges[:-1], edges[1:]):
                half = 0.5 * (p1 - p0)
                nodes = half * glx + 0.5 * (p0 + p1)
                dens = np.array([kernel.density(tn) for tn in nodes])
                taus.append(nodes)
                weights.append(glw * half * dens)
        self.tau = np.concatenate(taus)
        self.weights = np.concatenate(weights)
        # enforce unit mass on the truncated support
        self.weights /= self.weights.sum()


def simulate(params: ModelParams, h: GrowthFunction, kernel1: DelayKernel,
             kernel2: DelayKernel, initial: Callable[[float], tuple],
             cfg: SimConfig) -> Trajectory:
    """Integrate the rescaled system forward from a given initial function.

    ``initial`` maps times in ``(-lookback, 0]`` to ``(x, y)`` pairs and is
    extended constantly to the left of the sampled span.
    """
    _check_resolution(cfg, (kernel1, kernel2))
    dt = cfg.dt
    quad1 = _KernelQuadrature(kernel1, cfg.tail_tol, cfg.quad_order)
    shared = kernel2 == kernel1
    quad2 = quad1 if shared else _KernelQuadrature(kernel2, cfg.tail_tol, cfg.quad_order)
    alpha = params.alpha
    lookback = max(quad1.tau.max(), quad2.tau.max())
    history = History(initial, lookback, dt, cfg.T)
    y_arr, my_arr, my_right_arr = history.y, history.my, history.my_right
    n_base = history.head  # grid index of t = 0

    class _StagePlan:
        """Fixed gather pattern: on the uniform step grid every stage reads the
        same fractional offsets, so the Hermite basis is precomputed once."""

        def __init__(self, quad, c):
            n_ext = int(np.searchsorted(quad.tau, c * dt))
            self.w_ext = quad.weights[:n_ext].copy()
            self.ext_off = c * dt - quad.tau[:n_ext]
            self.w_hist = quad.weights[n_ext:].copy()
            rel = c - quad.tau[n_ext:] / dt
            base = np.floor(rel).astype(np.int64)
            theta = rel - base
            self.base = base + n_base
            t2 = theta * theta
            t3 = t2 * theta
            self.h00 = 2.0 * t3 - 3.0 * t2 + 1.0
            self.h01 = -2.0 * t3 + 3.0 * t2
            self.h10 = (t3 - 2.0 * t2 + theta) * dt
            self.h11 = (t3 - t2) * dt

        def convolution(self, n, base_y, slope_y, exponent):
            idx = self.base + n
            y_interp = (self.h00 * y_arr[idx] + self.h01 * y_arr[idx + 1]
                        + self.h10 * my_arr[idx] + self.h11 * my_right_arr[idx + 1])
            if exponent != 1.0:
                y_interp = exponent * y_interp
            acc = float(np.dot(self.w_hist, np.exp(y_interp)))
            if len(self.w_ext):
                y_hat = base_y + self.ext_off * slope_y
                acc += float(np.dot(self.w_ext, np.exp(exponent * y_hat)))
            return acc

    plans1 = {c: _StagePlan(quad1, c) for c in (0.0, 0.5, 1.0)}
    plans2 = plans1 if shared else {c: _StagePlan(quad2, c) for c in (0.0, 0.5, 1.0)}

    def stage_rhs(n, c, state, base_y, slope_y):
        conv1 = plans1[c].convolution(n, base_y, slope_y, 1.0)
        conv2 = 1.0 if alpha == 0.0 else plans2[c].convolution(n, base_y, slope_y, alpha)
        return np.array(rhs_rescaled(params, h, conv1, conv2, state[0], state[1]))

    state = np.array(initial(0.0), dtype=float)
    steps = int(round(cfg.T / dt))
    for n in range(steps):
        base_y = state[1]
        k1 = stage_rhs(n, 0.0, state, base_y, 0.0)
        history.set_head_slope(k1[0], k1[1])
        k2 = stage_rhs(n, 0.5, state + 0.5 * dt * k1, base_y, k1[1])
        k3 = stage_rhs(n, 0.5, state + 0.5 * dt * k2, base_y, k2[1])
        k4 = stage_rhs(n, 1.0, state + dt * k3, base_y, k3[1])
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (abs(state[0]) <= _BLOWUP_GUARD and abs(state[1]) <= _BLOWUP_GUARD):
            raise BlowUpError(time=(n + 1) * dt)
        # slope provisionally the last stage slope; replaced by the next k1
        history.append(state[0], state[1], k4[0], k4[1])
    k_final = stage_rhs(steps, 0.0, state, state[1], 0.0)
    history.set_head_slope(k_final[0], k_final[1])

    i0, i1 = history.head - steps, history.head + 1
    return Trajectory(
        t=dt * np.arange(steps + 1),
        x=history.x[i0:i1].copy(),
        y=history.y[i0:i1].copy(),
        mx=history.mx[i0:i1].copy(),
        my=history.my[i0:i1].copy(),
        params=params,
    )


def simulate_linear_chain(params: ModelParams, h: GrowthFunction, m1: int, m2: int,
                          a: float, initial: Callable[[float], tuple],
                          cfg: SimConfig) -> Trajectory:
    """Integrate the equivalent ladder of ODEs for non-shifted Erlang kernels.

    Ladder variables carry the convolutions of the history through Erlang
    kernels of increasing shape; their initial values are quadratures of
    the initial function.
    """
    kernels = (ErlangKernel(m=m1, a=a), ErlangKernel(m=m2, a=a))
    _check_resolution(cfg, kernels)
    dt = cfg.dt
    exponents = (1.0, params.alpha)

    z0 = []
    for which, m in enumerate((m1, m2)):
        for j in range(1, m + 1):
            quad = _KernelQuadrature(ErlangKernel(m=j, a=a), cfg.tail_tol, cfg.quad_order)
            y_init = np.array([initial(-tau)[1] for tau in quad.tau])
            z0.append(float(np.dot(quad.weights, np.exp(exponents[which] * y_init))))

    def deriv(v):
        x, y = v[0], v[1]
        z1 = v[2 : 2 + m1]
        z2 = v[2 + m1 :]
        dx, dy = rhs_rescaled(params, h, z1[-1], z2[-1], x, y)
        dz1 = np.empty(m1)
        dz1[0] = a * (math.exp(y) - z1[0])
        dz1[1:] = a * (z1[:-1] - z1[1:])
        dz2 = np.empty(m2)
        dz2[0] = a * (math.exp(params.alpha * y) - z2[0])
        dz2[1:] = a * (z2[:-1] - z2[1:])
        return np.concatenate([[dx, dy], dz1, dz2])

    steps = int(round(cfg.T / dt))
    v = np.concatenate([np.asarray(initial(0.0), dtype=float), z0])
    ts = dt * np.arange(steps + 1)
    xs = np.empty(steps + 1)
    ys = np.empty(steps + 1)
    mxs = np.empty(steps + 1)
    mys = np.empty(steps + 1)
    for n in range(steps + 1):
        dv = deriv(v)
        xs[n], ys[n] = v[0], v[1]
        mxs[n], mys[n] = dv[0], dv[1]
        if n == steps:
            break
        k1 = dv
        k2 = deriv(v + 0.5 * dt * k1)
        k3 = deriv(v + 0.5 * dt * k2)
        k4 = deriv(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (abs(v[0]) <= _BLOWUP_GUARD and abs(v[1]) <= _BLOWUP_GUARD):
            raise BlowUpError(time=(n + 1) * dt)
    return Trajectory(t=ts, x=xs, y=ys, mx=mxs, my=mys, params=params)


# ---------------------------------------------------------------------------
# Trajectory classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Converging:
    final_norm: float


@dataclass(frozen=True)
class Oscillating:
    period: float
    amplitude: float


@dataclass(frozen=True)
class Diverging:
    reason: str = "envelope growth"


@dataclass(frozen=True)
class Inconclusive:
    reason: str = ""


def classify_trajectory(traj: Trajectory, window: float, steady=None):
    """Classify the tail behaviour of a trajectory.

    Checks, in order: decay of the state norm below 1e-4 over the last
    window; regular oscillation (period and per-cycle amplitude both within
    5 percent variation) over the last two windows; monotone envelope
    growth over the last three windows.  Anything else is inconclusive.
    The optional ``steady`` argument is accepted for callers holding
    original-coordinate data; rescaled trajectories are already centred.
    """
    span = traj.t[-1] - traj.t[0]
    if span < 3.0 * window:
        raise ValueError("trajectory must cover at least three windows")

    norm = np.hypot(traj.x, traj.y)
    t_end = traj.t[-1]
    last = traj.t >= t_end - window
    final_norm = float(norm[last].max())
    if final_norm < 1e-4:
        return Converging(final_norm=final_norm)

    tail = traj.t >= t_end - 2.0 * window
    t_tail = traj.t[tail]
    x_tail = traj.x[tail]
    crossings = []
    for i in range(len(x_tail) - 1):
        if x_tail[i] < 0.0 <= x_tail[i + 1]:
            frac = -x_tail[i] / (x_tail[i + 1] - x_tail[i])
            crossings.append(t_tail[i] + frac * (t_tail[i + 1] - t_tail[i]))
    if len(crossings) >= 4:
        periods = np.diff(crossings)
        amplitudes = []
        for left, right in zip(crossings[:-1], crossings[1:]):
            mask = (t_tail >= left) & (t_tail <= right)
            if mask.any():
                amplitudes.append(np.abs(x_tail[mask]).max())
        amplitudes = np.array(amplitudes)
        period_cv = periods.std() / periods.mean()
        amp_cv = amplitudes.std() / amplitudes.mean()
        if period_cv < 0.05 and amp_cv < 0.05:
            return Oscillating(period=float(periods.mean()),
                               amplitude=float(amplitudes.mean()))

    envelopes = []
    for k in (3, 2, 1):
        mask = (traj.t >= t_end - k * window) & (traj.t < t_end - (k - 1) * window)
        envelopes.append(norm[mask].max() if mask.any() else 0.0)
    if envelopes[0] < envelopes[1] < envelopes[2] and envelopes[2] > 1.02 * envelopes[0]:
        return Diverging()
    return Inconclusive(reason="neither settled, regular, nor growing")
