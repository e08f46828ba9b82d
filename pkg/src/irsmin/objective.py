"""Outage margin, its smooth surrogate, and the complex-to-real lifts.

The margin of a channel realization is

    d(w, v) = sigma2 - |h^H w|**2 / gamma,      h^H = v^H diag(h_r^H) g + h_d^H

and the outage event is exactly ``d > 0``.  The empirical outage over a
sample set averages the (discontinuous) indicator of the margin; the smooth
training objective averages a sigmoid of the margin instead.

Margins carry watt units.  Because the sigmoid saturates for arguments far
from zero, its argument is ``margin_scale * d`` with ``margin_scale``
defaulting to ``1 / sigma2`` (which turns the margin into the dimensionless
``1 - snr / gamma``).  Pass ``margin_scale=1.0`` to feed raw watt margins to
the sigmoid.

The real lifts re-express the margin as a function of stacked
real/imaginary vectors so plain real gradients apply; both lifts reproduce
the complex margin exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from irsmin.channel import ChannelSample, ChannelSampleSet, dbm_to_watts

__all__ = [
    "SystemParams",
    "sigmoid",
    "indicator",
    "cascaded_channel",
    "cascaded_channels",
    "margin",
    "margins",
    "snr",
    "empirical_outage",
    "surrogate_objective",
    "RealLiftW",
    "RealLiftV",
    "lift_w",
    "lift_v",
    "resolve_margin_scale",
    "as_real_vector",
    "as_complex_vector",
    "is_power_feasible",
    "is_unimodular",
]

POWER_TOL = 1e-9
MODULUS_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Link-budget constants: transmit power cap, noise power, SNR threshold."""

    p: float
    sigma2: float
    gamma: float

    def __post_init__(self):
        if not (self.p > 0.0 and self.sigma2 > 0.0 and self.gamma > 0.0):
            raise ValueError("p, sigma2 and gamma must all be > 0")

    @classmethod
    def from_dbm(cls, p_dbm: float, noise_dbm: float, gamma: float) -> "SystemParams":
        return cls(p=dbm_to_watts(p_dbm), sigma2=dbm_to_watts(noise_dbm), gamma=gamma)


def resolve_margin_scale(params: SystemParams, scale: float | None) -> float:
    """None means the default ``1 / sigma2``; any positive float is taken as is."""
    if scale is None:
        return 1.0 / params.sigma2
    if not scale > 0.0:
        raise ValueError("margin_scale must be > 0")
    return float(scale)


def sigmoid(z):
    """Numerically stable logistic function 1 / (1 + exp(-z)).

    Evaluated split by sign so arguments of any magnitude neither overflow
    nor produce NaN.  Scalars in, scalar out; arrays in, array out.
    """
    arr = np.asarray(z, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    if np.isscalar(z) or arr.ndim == 0:
        return float(out)
    return out


def indicator(x):
    """1 where x > 0 (strict), else 0.  A margin of exactly zero is no outage."""
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > 0.0, 1.0, 0.0)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def cascaded_channel(v: np.ndarray, sample: ChannelSample) -> np.ndarray:
    """Effective channel h with h^H = v^H diag(h_r^H) g + h_d^H.

    For n = 0 this is just the direct channel h_d.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (sample.n,):
        raise ValueError(f"v has shape {v.shape}, expected ({sample.n},)")
    if sample.n == 0:
        return sample.h_d.copy()
    return sample.g.conj().T @ (v * sample.h_r) + sample.h_d


def cascaded_channels(v: np.ndarray, sset: ChannelSampleSet) -> np.ndarray:
    """Stacked effective channels, shape (t, m)."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (sset.n,):
        raise ValueError(f"v has shape {v.shape}, expected ({sset.n},)")
    if sset.n == 0:
        return sset.h_d.copy()
    return np.einsum("tnm,tn->tm", sset.g.conj(), v * sset.h_r) + sset.h_d


def snr(w: np.ndarray, v: np.ndarray, sample: ChannelSample, params: SystemParams) -> float:
    """Received SNR |h^H w|**2 / sigma2 for one realization."""
    h = cascaded_channel(v, sample)
    return float(np.abs(np.vdot(h, w)) ** 2 / params.sigma2)


def margin(w: np.ndarray, v: np.ndarray, sample: ChannelSample, params: SystemParams) -> float:
    """Outage margin sigma2 - |h^H w|**2 / gamma; positive iff outage."""
    h = cascaded_channel(v, sample)
    return float(params.sigma2 - np.abs(np.vdot(h, w)) ** 2 / params.gamma)


def margins(w: np.ndarray, v: np.ndarray, sset: ChannelSampleSet, params: SystemParams) -> np.ndarray:
    """All-sample margins, shape (t,)."""
    h = cascaded_channels(v, sset)
    z = h.conj() @ np.asarray(w, dtype=np.complex128)
    return params.sigma2 - (z.real**2 + z.imag**2) / params.gamma


def empirical_outage(
    w: np.ndarray, v: np.ndarray, sset: ChannelSampleSet, params: SystemParams
) -> float:
    """Fraction of samples in outage: mean of indicator(margin)."""
    if len(sset) < 1:
        raise ValueError("sample set is empty")
    return float(np.mean(margins(w, v, sset, params) > 0.0))


def surrogate_objective(
    w: np.ndarray,
    v: np.ndarray,
    sset: ChannelSampleSet,
    params: SystemParams,
    margin_scale: float | None = None,
) -> float:
    """Smooth outage objective: mean of sigmoid(margin_scale * margin)."""
    if len(sset) < 1:
        raise ValueError("sample set is empty")
    scale = resolve_margin_scale(params, margin_scale)
    return float(np.mean(sigmoid(scale * margins(w, v, sset, params))))


def as_real_vector(z: np.ndarray) -> np.ndarray:
    """Stack a complex vector as [Re; Im]."""
    z = np.asarray(z, dtype=np.complex128)
    return np.concatenate([z.real, z.imag])


def as_complex_vector(x: np.ndarray) -> np.ndarray:
    """Inverse of as_real_vector; exact round trip."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] % 2:
        raise ValueError("real-lift vectors have even length")
    half = x.shape[0] // 2
    return x[:half] + 1j * x[half:]


def _block_lift(z: np.ndarray) -> np.ndarray:
    """The (2k, 2) block matrix [[Re z, -Im z], [Im z, Re z]]."""
    z = np.asarray(z, dtype=np.complex128)
    return np.block([[z.real[:, None], -z.imag[:, None]], [z.imag[:, None], z.real[:, None]]])


@dataclass(frozen=True)
class RealLiftW:
    """Real reparameterization of the beamforming subproblem.

    ``h_tilde.T @ w_tilde`` stacks Re and Im of h^H w, so the lifted margin
    sigma2 - ||h_tilde.T w_tilde||**2 / gamma equals the complex margin.
    """

    w_tilde: np.ndarray  # (2m,)
    h_tilde: np.ndarray  # (2m, 2)

    def margin(self, params: SystemParams) -> float:
        proj = self.h_tilde.T @ self.w_tilde
        return float(params.sigma2 - (proj @ proj) / params.gamma)


@dataclass(frozen=True)
class RealLiftV:
    """Real reparameterization of the phase-shift subproblem.

    ``a_tilde.T @ v_tilde`` stacks Re and Im of a^H v; pairing it with the
    conjugate of the direct term b = h_d^H w keeps
    ||b_tilde + a_tilde.T v_tilde|| equal to |v^H a + b|, i.e. the lifted
    margin equals the complex margin for every unimodular v.
    """

    v_tilde: np.ndarray  # (2n,)
    a_tilde: np.ndarray  # (2n, 2)
    b_tilde: np.ndarray  # (2,)

    def margin(self, params: SystemParams) -> float:
        resid = self.b_tilde + self.a_tilde.T @ self.v_tilde
        return float(params.sigma2 - (resid @ resid) / params.gamma)


def lift_w(w: np.ndarray, h: np.ndarray) -> RealLiftW:
    """Lift the beamformer and an effective channel to real form."""
    w = np.asarray(w, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if w.shape != h.shape or w.ndim != 1:
        raise ValueError(f"w {w.shape} and h {h.shape} must be equal-length vectors")
    return RealLiftW(w_tilde=as_real_vector(w), h_tilde=_block_lift(h))


def lift_v(w: np.ndarray, sample: ChannelSample, v: np.ndarray) -> RealLiftV:
    """Lift the phase-shift subproblem around a fixed beamformer.

    Builds a = diag(h_r^H) g w and the direct term b = h_d^H w, then stacks
    real/imaginary blocks.  b enters conjugated (see RealLiftV).
    """
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (sample.m,):
        raise ValueError(f"w has shape {w.shape}, expected ({sample.m},)")
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (sample.n,):
        raise ValueError(f"v has shape {v.shape}, expected ({sample.n},)")
    a = sample.h_r.conj() * (sample.g @ w)
    b_pair = np.conj(np.vdot(sample.h_d, w))
    return RealLiftV(
        v_tilde=as_real_vector(v),
        a_tilde=_block_lift(a),
        b_tilde=np.array([b_pair.real, b_pair.imag]),
    )


def is_power_feasible(w: np.ndarray, p: float, tol: float = POWER_TOL) -> bool:
    """||w||**2 <= p within an absolute tolerance."""
    w = np.asarray(w, dtype=np.complex128)
    return bool(np.vdot(w, w).real <= p + tol)


def is_unimodular(v: np.ndarray, tol: float = MODULUS_TOL) -> bool:
    """Every element within ``tol`` of unit modulus (vacuously true if empty)."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size == 0:
        return True
    return bool(np.max(np.abs(np.abs(v) - 1.0)) <= tol)
