"""Alternating projected stochastic gradient descent.

The outer loop alternates two inner SGD blocks: beamformer updates projected
onto the transmit-power ball, then phase-shift updates projected elementwise
onto the unit circle.  Each inner step picks one training sample uniformly at
random, takes a gradient step of the sigmoid-margin at that sample, projects,
then evaluates the full sample-average objective; the block stops early once
the relative objective change falls to ``epsilon``.

Gradients of the sigmoid-margin in the lifted real coordinates:

    grad_w = S(c*d1) (1 - S(c*d1)) * c * (-2/gamma) * h_tilde h_tilde^T w_tilde
    grad_v = S(c*d2) (1 - S(c*d2)) * c * (-2/gamma) * (a_tilde b_tilde
                                                       + a_tilde a_tilde^T v_tilde)

where c is the margin scale applied inside the sigmoid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from irsmin import _kernels
from irsmin.channel import ChannelSample, ChannelSampleSet
from irsmin.objective import (
    MODULUS_TOL,
    POWER_TOL,
    RealLiftV,
    RealLiftW,
    SystemParams,
    as_complex_vector,
    as_real_vector,
    cascaded_channel,
    cascaded_channels,
    empirical_outage,
    is_power_feasible,
    is_unimodular,
    lift_v,
    lift_w,
    resolve_margin_scale,
    sigmoid,
)

__all__ = [
    "SolverConfig",
    "SolverResult",
    "grad_w",
    "grad_v",
    "project_ball",
    "project_unimodular",
    "init_point",
    "inner_loop_w",
    "inner_loop_v",
    "alternating_sgd",
    "gradient_check",
]


@dataclass(frozen=True)
class SolverConfig:
    """Step sizes, loop bounds and stopping threshold.

    ``decay`` multiplies both step sizes once per outer iteration
    (``decay_scope="outer"``, the default) or after every inner step
    (``decay_scope="inner"``).  ``margin_scale=None`` selects the default
    1/sigma2 scaling of the sigmoid argument.
    """

    l_w: float = 1.0
    l_v: float = 0.1
    decay: float = 0.99
    outer_iters: int = 1000
    inner_iters: int = 5000
    epsilon: float = 1e-5
    seed: int = 0
    margin_scale: float | None = None
    decay_scope: str = "outer"

    def __post_init__(self):
        if not (self.l_w > 0.0 and self.l_v > 0.0):
            raise ValueError("step sizes must be > 0")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("iteration bounds must be >= 1")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be > 0")
        if self.decay_scope not in ("outer", "inner"):
            raise ValueError("decay_scope must be 'outer' or 'inner'")


@dataclass
class SolverResult:
    """Optimized point plus diagnostics.

    ``objective_trace`` concatenates the per-inner-step objective values of
    every inner block, starting with the objective at the initial point.
    """

    w: np.ndarray
    v: np.ndarray
    objective_trace: np.ndarray
    outage_on_train: float
    outer_iterations_run: int


def grad_w(lift: RealLiftW, params: SystemParams, margin_scale: float | None = None) -> np.ndarray:
    """Gradient of sigmoid(scale * lifted margin) with respect to w_tilde."""
    scale = resolve_margin_scale(params, margin_scale)
    s = sigmoid(scale * lift.margin(params))
    core = lift.h_tilde @ (lift.h_tilde.T @ lift.w_tilde)
    return s * (1.0 - s) * scale * (-2.0 / params.gamma) * core


def grad_v(lift: RealLiftV, params: SystemParams, margin_scale: float | None = None) -> np.ndarray:
    """Gradient of sigmoid(scale * lifted margin) with respect to v_tilde."""
    scale = resolve_margin_scale(params, margin_scale)
    s = sigmoid(scale * lift.margin(params))
    core = lift.a_tilde @ (lift.b_tilde + lift.a_tilde.T @ lift.v_tilde)
    return s * (1.0 - s) * scale * (-2.0 / params.gamma) * core


def project_ball(y: np.ndarray, p_max: float) -> np.ndarray:
    """Euclidean projection onto the ball ||y||**2 <= p_max."""
    if not p_max > 0.0:
        raise ValueError("p_max must be > 0")
    y = np.asarray(y, dtype=float)
    nrm2 = float(y @ y)
    if nrm2 < p_max:
        return y.copy()
    return np.sqrt(p_max / nrm2) * y


def project_unimodular(y: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Elementwise projection of a lifted vector onto the unit circle.

    Pairs (y[j], y[j + n]) are normalized by their joint modulus.  A pair of
    exact zeros projects onto every point of the circle; it is replaced by
    the matching element of ``fallback`` (the previous iterate, when
    stepping) or by 1 + 0j.
    """
    y = np.asarray(y, dtype=float)
    z = as_complex_vector(y)
    mod = np.abs(z)
    zero = mod == 0.0
    if np.any(zero):
        if fallback is not None:
            z = np.where(zero, as_complex_vector(np.asarray(fallback, dtype=float)), z)
        else:
            z = np.where(zero, 1.0 + 0.0j, z)
        mod = np.where(zero, np.abs(z), mod)
    return as_real_vector(z / mod)


def init_point(
    m: int, n: int, params: SystemParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random feasible starting point.

    The beamformer is an isotropic random direction at full power
    (||w||**2 = p); the phase shifts are i.i.d. uniform on the circle.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    g = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = g * (np.sqrt(params.p) / np.linalg.norm(g))
    v = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=n))
    return w, v


def _prep_w_inputs(v, sset):
    return np.ascontiguousarray(cascaded_channels(v, sset))


def _prep_v_inputs(w, sset):
    w = np.asarray(w, dtype=np.complex128)
    a = np.ascontiguousarray(sset.h_r.conj() * (sset.g @ w))
    b_pair = np.ascontiguousarray((sset.h_d.conj() @ w).conj())
    return a, b_pair


def _draw_indices(rng: np.random.Generator, t: int, k: int) -> np.ndarray:
    return rng.integers(0, t, size=k, dtype=np.int64)


def inner_loop_w(
    w: np.ndarray,
    v: np.ndarray,
    sset: ChannelSampleSet,
    params: SystemParams,
    config: SolverConfig,
    rng: np.random.Generator,
    step: float | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """One beamformer SGD block with the phase vector held fixed.

    Returns the updated beamformer, the objective trace (entry value first),
    and the number of steps executed.
    """
    h = _prep_w_inputs(v, sset)
    w_work = np.array(w, dtype=np.complex128, copy=True)
    scale = resolve_margin_scale(params, config.margin_scale)
    idx = _draw_indices(rng, sset.t, config.inner_iters)
    trace = np.empty(config.inner_iters + 1)
    decay = config.decay if config.decay_scope == "inner" else 1.0
    ran = _kernels.backend().inner_loop_w(
        h,
        w_work,
        params.p,
        params.gamma,
        params.sigma2,
        scale,
        config.l_w if step is None else step,
        decay,
        config.epsilon,
        idx,
        trace,
    )
    return w_work, trace[: ran + 1].copy(), ran


def inner_loop_v(
    w: np.ndarray,
    v: np.ndarray,
    sset: ChannelSampleSet,
    params: SystemParams,
    config: SolverConfig,
    rng: np.random.Generator,
    step: float | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """One phase-shift SGD block with the beamformer held fixed."""
    a, b_pair = _prep_v_inputs(w, sset)
    v_work = np.array(v, dtype=np.complex128, copy=True)
    scale = resolve_margin_scale(params, config.margin_scale)
    idx = _draw_indices(rng, sset.t, config.inner_iters)
    trace = np.empty(config.inner_iters + 1)
    decay = config.decay if config.decay_scope == "inner" else 1.0
    ran = _kernels.backend().inner_loop_v(
        a,
        b_pair,
        v_work,
        params.gamma,
        params.sigma2,
        scale,
        config.l_v if step is None else step,
        decay,
        config.epsilon,
        idx,
        trace,
    )
    return v_work, trace[: ran + 1].copy(), ran


def alternating_sgd(
    sset: ChannelSampleSet,
    params: SystemParams,
    config: SolverConfig,
    w0: np.ndarray | None = None,
    v0: np.ndarray | None = None,
    optimize_phases: bool = True,
) -> SolverResult:
    """Run the full alternating solver on one training set.

    Starts from ``(w0, v0)`` when given (must be feasible), otherwise from a
    random feasible point drawn from the config seed.  With
    ``optimize_phases=False`` the phase vector is frozen at its initial
    value and only the beamformer blocks run (the no-IRS case n = 0 skips
    the phase blocks automatically).
    """
    rng = np.random.default_rng(config.seed)
    w_init, v_init = init_point(sset.m, sset.n, params, rng)
    w = np.asarray(w0, dtype=np.complex128).copy() if w0 is not None else w_init
    v = np.asarray(v0, dtype=np.complex128).copy() if v0 is not None else v_init
    if w.shape != (sset.m,) or v.shape != (sset.n,):
        raise ValueError("initial point does not match the sample dimensions")
    if not is_power_feasible(w, params.p, POWER_TOL):
        raise ValueError("initial beamformer violates the power constraint")
    if not is_unimodular(v, MODULUS_TOL):
        raise ValueError("initial phase vector is not unimodular")

    l_w, l_v = config.l_w, config.l_v
    run_v = optimize_phases and sset.n > 0
    pieces = []
    for j in range(config.outer_iters):
        w, trace_w, ran_w = inner_loop_w(w, v, sset, params, config, rng, step=l_w)
        pieces.append(trace_w if j == 0 else trace_w[1:])
        ran_v = 0
        if run_v:
            v, trace_v, ran_v = inner_loop_v(w, v, sset, params, config, rng, step=l_v)
            pieces.append(trace_v[1:])
        if config.decay_scope == "outer":
            l_w *= config.decay
            l_v *= config.decay
        else:
            l_w *= config.decay**ran_w
            l_v *= config.decay**ran_v

    return SolverResult(
        w=w,
        v=v,
        objective_trace=np.concatenate(pieces),
        outage_on_train=empirical_outage(w, v, sset, params),
        outer_iterations_run=config.outer_iters,
    )


def _fd_gradient(fun, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite differences at a step of rel_step * ||x||."""
    h = rel_step * np.linalg.norm(x)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out


def gradient_check(
    sizes: tuple[tuple[int, int], ...] = ((2, 3), (8, 16)),
    instances: int = 10,
    seed: int = 0,
    margin_scale: float | None = None,
) -> float:
    """Validate both analytic gradients against central finite differences.

    Draws random unit-scale channels, beamformers and phase vectors for each
    (m, n) size, and returns the worst relative error between the analytic
    gradients and finite differences of the sigmoid-margin.
    """
    rng = np.random.default_rng(seed)
    params = SystemParams(p=4.0, sigma2=1.0, gamma=2.0)
    worst = 0.0
    for m, n in sizes:
        for _ in range(instances):
            sample = ChannelSample(
                h_d=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2),
                g=(rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2),
                h_r=(rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2),
            )
            w, v = init_point(m, n, params, rng)
            w *= rng.uniform(0.3, 1.0)
            scale = resolve_margin_scale(params, margin_scale)

            lw = lift_w(w, cascaded_channel(v, sample))
            analytic = grad_w(lw, params, margin_scale)
            h_tilde = lw.h_tilde

            def f_w(wt):
                lift = RealLiftW(w_tilde=wt, h_tilde=h_tilde)
                return sigmoid(scale * lift.margin(params))

            fd = _fd_gradient(f_w, lw.w_tilde)
            worst = max(worst, np.linalg.norm(analytic - fd) / np.linalg.norm(fd))

            lv = lift_v(w, sample, v)
            analytic_v = grad_v(lv, params, margin_scale)
            a_tilde, b_tilde = lv.a_tilde, lv.b_tilde

            def f_v(vt):
                lift = RealLiftV(v_tilde=vt, a_tilde=a_tilde, b_tilde=b_tilde)
                return sigmoid(scale * lift.margin(params))

            fd_v = _fd_gradient(f_v, lv.v_tilde)
            worst = max(worst, np.linalg.norm(analytic_v - fd_v) / np.linalg.norm(fd_v))
    return float(worst)
