"""Pure-NumPy kernel backend.

Mirrors the compiled ``_cyloops`` extension operation for operation; the
solver selects whichever backend is available at import time.  All state the
loops touch is passed in explicitly: sample indices are pre-drawn by the
caller and the iterate arrays are mutated in place, so the two backends walk
bit-compatible trajectories (up to float summation order).

Conventions shared by both backends:

* ``h``: (t, m) effective channels; the beamformer objective averages
  sigmoid(scale * (sigma2 - |h_t^H w|**2 / gamma)).
* ``a``: (t, n) lifted IRS responses and ``b``: (t,) direct terms already
  conjugate-paired, so the phase objective uses |b_t + a_t^H v|.
* ``trace[0]`` holds the objective at entry; ``trace[k]`` the objective
  after step k.  The loops return the number of steps executed, stopping
  early once the relative objective change drops to ``eps`` (first checked
  when two post-step values exist).
* ``decay`` is a per-step step-size factor (1.0 = constant step).
"""

from __future__ import annotations

import math

import numpy as np

NAME = "numpy"


def _sigmoid_scalar(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _sigmoid_vec(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def objective_w(h, w, gamma, sigma2, scale):
    """Mean sigmoid-margin over all samples for a fixed beamformer."""
    z = h.conj() @ w
    d = sigma2 - (z.real**2 + z.imag**2) / gamma
    return float(np.mean(_sigmoid_vec(scale * d)))


def objective_v(a, b, v, gamma, sigma2, scale):
    """Mean sigmoid-margin over all samples for a fixed phase vector."""
    c = b + a.conj() @ v
    d = sigma2 - (c.real**2 + c.imag**2) / gamma
    return float(np.mean(_sigmoid_vec(scale * d)))


def inner_loop_w(h, w, p_max, gamma, sigma2, scale, step, decay, eps, idx, trace):
    """Projected SGD on the beamformer; ``w`` is updated in place."""
    trace[0] = objective_w(h, w, gamma, sigma2, scale)
    ran = 0
    for k in range(1, idx.shape[0] + 1):
        i = idx[k - 1]
        u = np.vdot(h[i], w)
        d = sigma2 - (u.real**2 + u.imag**2) / gamma
        s = _sigmoid_scalar(scale * d)
        coef = step * s * (1.0 - s) * scale * 2.0 / gamma
        w += (coef * u) * h[i]
        nrm2 = np.vdot(w, w).real
        if nrm2 >= p_max:
            w *= math.sqrt(p_max / nrm2)
        o = objective_w(h, w, gamma, sigma2, scale)
        trace[k] = o
        ran = k
        if k >= 2:
            prev = trace[k - 1]
            if prev == 0.0 or abs(prev - o) / prev <= eps:
                break
        step *= decay
    return ran


def inner_loop_v(a, b, v, gamma, sigma2, scale, step, decay, eps, idx, trace):
    """Projected SGD on the phase vector; ``v`` is updated in place.

    Each element of the stepped vector is renormalized to the unit circle;
    an exactly-zero element keeps its previous value (the projection is
    undefined at the origin).
    """
    trace[0] = objective_v(a, b, v, gamma, sigma2, scale)
    ran = 0
    for k in range(1, idx.shape[0] + 1):
        i = idx[k - 1]
        c = b[i] + np.vdot(a[i], v)
        d = sigma2 - (c.real**2 + c.imag**2) / gamma
        s = _sigmoid_scalar(scale * d)
        coef = step * s * (1.0 - s) * scale * 2.0 / gamma
        y = v + (coef * c) * a[i]
        mod = np.abs(y)
        nonzero = mod > 0.0
        v[nonzero] = y[nonzero] / mod[nonzero]
        o = objective_v(a, b, v, gamma, sigma2, scale)
        trace[k] = o
        ran = k
        if k >= 2:
            prev = trace[k - 1]
            if prev == 0.0 or abs(prev - o) / prev <= eps:
                break
        step *= decay
    return ran
