"""Scenario geometry and random channel-sample generation.

Every link combines a power-law path loss ``d**-beta`` (distance in meters,
implicit 1 m reference) with i.i.d. Rayleigh fading: each channel entry is
drawn as a circularly-symmetric complex Gaussian CN(0, 1) -- real and
imaginary parts N(0, 1/2) each -- and scaled by the square root of the link
gain.  No array geometry or steering structure is modeled.

Randomness always comes from an explicitly passed seed or
``numpy.random.Generator``, so generation is reproducible and safe to run
concurrently (one generator per producer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Position3D",
    "ScenarioGeometry",
    "ChannelSample",
    "ChannelSampleSet",
    "dbm_to_watts",
    "path_loss",
    "draw_user_position",
    "generate_channel_sample",
    "generate_sample_set",
]


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power in dBm to watts: 10**((p_dbm - 30) / 10)."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def path_loss(distance: float, beta: float) -> float:
    """Power gain of a link of length ``distance`` meters: distance**(-beta).

    Raises:
        ValueError: if ``distance`` is not strictly positive (degenerate
            geometry, e.g. two nodes at the same point).
    """
    if not distance > 0.0:
        raise ValueError(f"link distance must be positive, got {distance}")
    return float(distance) ** (-float(beta))


@dataclass(frozen=True)
class Position3D:
    """A point of the scenario's 3-D coordinate system, in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"coordinates must be finite, got {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def distance_to(self, other: "Position3D") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class ScenarioGeometry:
    """Node placement, user drop region, and per-link path-loss exponents.

    The user is dropped uniformly on an axis-aligned square of side
    ``user_region_side`` centered at ``user_region_center`` (same z plane).
    """

    bs_position: Position3D
    irs_position: Position3D
    user_region_center: Position3D
    user_region_side: float
    beta_direct: float
    beta_bs_irs: float
    beta_irs_user: float

    def __post_init__(self):
        if self.user_region_side < 0.0:
            raise ValueError("user_region_side must be >= 0")
        for name in ("beta_direct", "beta_bs_irs", "beta_irs_user"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")

    @classmethod
    def default(cls) -> "ScenarioGeometry":
        """Standard layout: BS at (0, 0, 10), IRS at (15, 5, 5), user square
        of side 2 m centered at (18, 1, 0); exponents 2.5 / 2.1 / 2.2 for the
        direct, BS-IRS and IRS-user links."""
        return cls(
            bs_position=Position3D(0.0, 0.0, 10.0),
            irs_position=Position3D(15.0, 5.0, 5.0),
            user_region_center=Position3D(18.0, 1.0, 0.0),
            user_region_side=2.0,
            beta_direct=2.5,
            beta_bs_irs=2.1,
            beta_irs_user=2.2,
        )


def draw_user_position(geometry: ScenarioGeometry, rng: np.random.Generator) -> Position3D:
    """Drop the user uniformly on the configured square (ground-plane z)."""
    c = geometry.user_region_center
    half = geometry.user_region_side / 2.0
    x = rng.uniform(c.x - half, c.x + half)
    y = rng.uniform(c.y - half, c.y + half)
    return Position3D(float(x), float(y), c.z)


@dataclass(frozen=True)
class ChannelSample:
    """One realization of the three channel responses.

    Attributes:
        h_d: direct BS-user response, shape (m,).
        g:   BS-IRS response, shape (n, m).
        h_r: IRS-user response, shape (n,).

    ``n = 0`` encodes a deployment without an IRS (``g`` and ``h_r`` empty).
    """

    h_d: np.ndarray
    g: np.ndarray
    h_r: np.ndarray

    def __post_init__(self):
        h_d = np.asarray(self.h_d, dtype=np.complex128)
        g = np.asarray(self.g, dtype=np.complex128)
        h_r = np.asarray(self.h_r, dtype=np.complex128)
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h_r", h_r)
        if h_d.ndim != 1 or g.ndim != 2 or h_r.ndim != 1:
            raise ValueError("h_d and h_r must be vectors, g a matrix")
        if g.shape != (h_r.shape[0], h_d.shape[0]):
            raise ValueError(
                f"inconsistent dimensions: h_d {h_d.shape}, g {g.shape}, h_r {h_r.shape}"
            )
        if not (
            np.all(np.isfinite(h_d.view(float)))
            and np.all(np.isfinite(g.view(float)))
            and np.all(np.isfinite(h_r.view(float)))
        ):
            raise ValueError("channel entries must be finite")

    @property
    def m(self) -> int:
        return self.h_d.shape[0]

    @property
    def n(self) -> int:
        return self.h_r.shape[0]


@dataclass(frozen=True)
class ChannelSampleSet:
    """An ordered collection of channel samples sharing one user placement.

    Samples are stored stacked for fast vectorized evaluation:
    ``h_d`` has shape (t, m), ``g`` shape (t, n, m), ``h_r`` shape (t, n).
    Metadata records how the set was produced (when known) so identical sets
    can be regenerated or replayed from disk.
    """

    h_d: np.ndarray
    g: np.ndarray
    h_r: np.ndarray
    geometry: ScenarioGeometry | None = None
    user_position: Position3D | None = None
    seed: int | None = None

    def __post_init__(self):
        h_d = np.ascontiguousarray(self.h_d, dtype=np.complex128)
        g = np.ascontiguousarray(self.g, dtype=np.complex128)
        h_r = np.ascontiguousarray(self.h_r, dtype=np.complex128)
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h_r", h_r)
        if h_d.ndim != 2 or g.ndim != 3 or h_r.ndim != 2:
            raise ValueError("expected stacked arrays (t,m), (t,n,m), (t,n)")
        t, m = h_d.shape
        if t < 1:
            raise ValueError("a sample set must contain at least one sample")
        if g.shape != (t, h_r.shape[1], m) or h_r.shape[0] != t:
            raise ValueError(
                f"inconsistent stacked shapes: h_d {h_d.shape}, g {g.shape}, h_r {h_r.shape}"
            )

    @property
    def t(self) -> int:
        return self.h_d.shape[0]

    @property
    def m(self) -> int:
        return self.h_d.shape[1]

    @property
    def n(self) -> int:
        return self.h_r.shape[1]

    def __len__(self) -> int:
        return self.t

    def __getitem__(self, i: int) -> ChannelSample:
        return ChannelSample(h_d=self.h_d[i], g=self.g[i], h_r=self.h_r[i])

    def __iter__(self):
        return (self[i] for i in range(self.t))

    @property
    def samples(self) -> tuple[ChannelSample, ...]:
        return tuple(self)

    def without_irs(self) -> "ChannelSampleSet":
        """View of this set with the IRS links removed (n = 0)."""
        t = self.t
        return ChannelSampleSet(
            h_d=self.h_d,
            g=np.zeros((t, 0, self.m), dtype=np.complex128),
            h_r=np.zeros((t, 0), dtype=np.complex128),
            geometry=self.geometry,
            user_position=self.user_position,
            seed=self.seed,
        )

    @classmethod
    def from_samples(
        cls,
        samples,
        geometry: ScenarioGeometry | None = None,
        user_position: Position3D | None = None,
        seed: int | None = None,
    ) -> "ChannelSampleSet":
        samples = list(samples)
        if not samples:
            raise ValueError("a sample set must contain at least one sample")
        return cls(
            h_d=np.stack([s.h_d for s in samples]),
            g=np.stack([s.g for s in samples]),
            h_r=np.stack([s.h_r for s in samples]),
            geometry=geometry,
            user_position=user_position,
            seed=seed,
        )


def _rayleigh(shape, gain: float, rng: np.random.Generator) -> np.ndarray:
    """CN(0, gain) entries: unit-variance complex Gaussian scaled by sqrt(gain)."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.sqrt(gain / 2.0) * z


def generate_channel_sample(
    geometry: ScenarioGeometry,
    m: int,
    n: int,
    user_pos: Position3D,
    rng: np.random.Generator,
) -> ChannelSample:
    """Draw one joint realization of the three links.

    Args:
        geometry: node placement and path-loss exponents.
        m: number of BS antennas (>= 1).
        n: number of IRS elements (0 encodes the no-IRS case).
        user_pos: the user location the sample is conditioned on.
        rng: random source; consumed in the fixed order h_d, g, h_r.

    Returns:
        A ChannelSample whose entries have per-entry second moment equal to
        the corresponding link gain.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    gain_direct = path_loss(geometry.bs_position.distance_to(user_pos), geometry.beta_direct)
    h_d = _rayleigh((m,), gain_direct, rng)
    if n > 0:
        gain_bs_irs = path_loss(
            geometry.bs_position.distance_to(geometry.irs_position), geometry.beta_bs_irs
        )
        gain_irs_user = path_loss(
            geometry.irs_position.distance_to(user_pos), geometry.beta_irs_user
        )
        g = _rayleigh((n, m), gain_bs_irs, rng)
        h_r = _rayleigh((n,), gain_irs_user, rng)
    else:
        g = np.zeros((0, m), dtype=np.complex128)
        h_r = np.zeros((0,), dtype=np.complex128)
    return ChannelSample(h_d=h_d, g=g, h_r=h_r)


def generate_sample_set(
    geometry: ScenarioGeometry,
    m: int,
    n: int,
    t: int,
    user_pos: Position3D,
    rng,
) -> ChannelSampleSet:
    """Draw ``t`` independent channel samples for one fixed user placement.

    The samples model temporal fading variation only: the user position is
    shared by the whole set.

    Args:
        rng: a ``numpy.random.Generator``, or anything accepted by
            ``numpy.random.default_rng`` (an integer seed is recorded in the
            returned set's metadata).
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    gen = np.random.default_rng(rng)
    samples = [generate_channel_sample(geometry, m, n, user_pos, gen) for _ in range(t)]
    return ChannelSampleSet.from_samples(
        samples, geometry=geometry, user_position=user_pos, seed=seed
    )
