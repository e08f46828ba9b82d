"""Shared builders for synthetic problem instances."""

import numpy as np

from irsmin.channel import ChannelSample, ChannelSampleSet


def random_sample(m: int, n: int, rng: np.random.Generator, gain: float = 1.0) -> ChannelSample:
    """One unit-scale CN(0, gain) channel sample (no geometry attached)."""
    scale = np.sqrt(gain / 2.0)
    return ChannelSample(
        h_d=scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m)),
        g=scale * (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))),
        h_r=scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
    )


def random_set(t: int, m: int, n: int, rng: np.random.Generator, gain: float = 1.0) -> ChannelSampleSet:
    return ChannelSampleSet.from_samples(random_sample(m, n, rng, gain) for _ in range(t))


def scalar_direct_set(amplitudes, sigma2=1.0) -> ChannelSampleSet:
    """m = 1, n = 0 set whose margins under w = [1], gamma = 1 are
    sigma2 - a**2 for each requested real amplitude a."""
    amps = np.asarray(amplitudes, dtype=float)
    t = amps.shape[0]
    return ChannelSampleSet(
        h_d=amps[:, None].astype(np.complex128),
        g=np.zeros((t, 0, 1), dtype=np.complex128),
        h_r=np.zeros((t, 0), dtype=np.complex128),
    )
