"""Binary serialization of channel sample sets.

Layout (little-endian throughout)::

    offset  size  field
    0       4     magic b"IRSS"
    4       1     format version (currently 1)
    5       4     t   uint32   number of samples
    9       4     m   uint32   BS antennas
    13      4     n   uint32   IRS elements
    17      8     seed uint64  generating seed (meaningful iff flag bit 1)
    25      1     flags uint8  bit 0: geometry + user position present
                               bit 1: seed present
    26      13*8  geometry float64[13]: bs xyz, irs xyz, user-center xyz,
                  user-region side, beta_direct, beta_bs_irs, beta_irs_user
                  (present only when flagged)
    +       3*8   user position float64[3] (present only when flagged)
    +       t*m*16    h_d complex128, C order
    +       t*n*m*16  g   complex128, C order
    +       t*n*16    h_r complex128, C order

A set written and read back compares exactly (bit-identical arrays).
"""

from __future__ import annotations

import struct

import numpy as np

from irsmin.channel import ChannelSampleSet, Position3D, ScenarioGeometry

__all__ = ["save_sample_set", "load_sample_set", "FORMAT_VERSION"]

MAGIC = b"IRSS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBIIIQB")
_FLAG_META = 1
_FLAG_SEED = 2


def save_sample_set(sset: ChannelSampleSet, path) -> None:
    """Write a sample set to ``path`` in the documented binary format."""
    has_meta = sset.geometry is not None and sset.user_position is not None
    flags = (_FLAG_META if has_meta else 0) | (_FLAG_SEED if sset.seed is not None else 0)
    seed = sset.seed if sset.seed is not None else 0
    blob = [_HEADER.pack(MAGIC, FORMAT_VERSION, sset.t, sset.m, sset.n, seed, flags)]
    if has_meta:
        geo = sset.geometry
        meta = [
            *geo.bs_position.as_array(),
            *geo.irs_position.as_array(),
            *geo.user_region_center.as_array(),
            geo.user_region_side,
            geo.beta_direct,
            geo.beta_bs_irs,
            geo.beta_irs_user,
            *sset.user_position.as_array(),
        ]
        blob.append(np.asarray(meta, dtype="<f8").tobytes())
    for arr in (sset.h_d, sset.g, sset.h_r):
        blob.append(np.ascontiguousarray(arr, dtype="<c16").tobytes())
    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(blob))
    except OSError as exc:
        raise OSError(f"cannot write sample set to {path}: {exc}") from exc


def load_sample_set(path) -> ChannelSampleSet:
    """Read a sample set written by :func:`save_sample_set`."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read sample set from {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated sample-set file")
    magic, version, t, m, n, seed, flags = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a sample-set file (bad magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _HEADER.size
    geometry = user_position = None
    if flags & _FLAG_META:
        meta = np.frombuffer(raw, dtype="<f8", count=16, offset=off)
        off += 16 * 8
        geometry = ScenarioGeometry(
            bs_position=Position3D(*meta[0:3]),
            irs_position=Position3D(*meta[3:6]),
            user_region_center=Position3D(*meta[6:9]),
            user_region_side=float(meta[9]),
            beta_direct=float(meta[10]),
            beta_bs_irs=float(meta[11]),
            beta_irs_user=float(meta[12]),
        )
        user_position = Position3D(*meta[13:16])

    def take(count, shape):
        nonlocal off
        arr = np.frombuffer(raw, dtype="<c16", count=count, offset=off)
        off += count * 16
        return arr.reshape(shape).copy()

    h_d = take(t * m, (t, m))
    g = take(t * n * m, (t, n, m))
    h_r = take(t * n, (t, n))
    if off != len(raw):
        raise ValueError(f"{path}: trailing bytes after sample data")
    return ChannelSampleSet(
        h_d=h_d,
        g=g,
        h_r=h_r,
        geometry=geometry,
        user_position=user_position,
        seed=int(seed) if flags & _FLAG_SEED else None,
    )
