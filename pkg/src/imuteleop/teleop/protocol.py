"""Binary pose datagram: the UDP wire format for streaming input poses.

Fixed 73-byte little-endian layout:

    magic     4 bytes  b"TPOS"
    version   u8       currently 1
    seq       u32      strictly increasing per stream, gaps allowed
    t         f64      seconds
    position  3 x f64  meters
    quaternion 4 x f64 (w, x, y, z), unit within 1e-6

The datagram carries raw wire floats; conversion to geometry types happens
at ingestion so that encode/decode round-trips are bit-exact.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from ..geom import RigidTransform, UnitQuaternion, Vector3

MAGIC = b"TPOS"
VERSION = 1
DATAGRAM_SIZE = 73
QUAT_NORM_TOL = 1e-6

_LAYOUT = struct.Struct("<4sBId3d4d")
assert _LAYOUT.size == DATAGRAM_SIZE


class DatagramError(ValueError):
    """Malformed or invalid pose datagram."""


class ShortBufferError(DatagramError):
    pass


class BadMagicError(DatagramError):
    pass


class UnsupportedVersionError(DatagramError):
    pass


class NonUnitQuaternionError(DatagramError):
    pass


@dataclass(frozen=True, slots=True)
class PoseDatagram:
    seq: int
    t: float
    position: tuple[float, float, float]
    quaternion: tuple[float, float, float, float]  # (w, x, y, z)
    version: int = VERSION

    def __post_init__(self) -> None:
        if not 0 <= self.seq <= 0xFFFFFFFF:
            raise ValueError("seq outside u32 range")
        n = math.sqrt(sum(c * c for c in self.quaternion))
        if abs(n - 1.0) > QUAT_NORM_TOL:
            raise NonUnitQuaternionError(f"quaternion norm {n} off unit by >{QUAT_NORM_TOL}")

    @classmethod
    def from_pose(cls, seq: int, t: float, pose: RigidTransform) -> "PoseDatagram":
        return cls(
            seq=seq,
            t=t,
            position=pose.translation.as_tuple(),
            quaternion=pose.rotation.as_tuple(),
        )

    def pose(self) -> RigidTransform:
        return RigidTransform(
            UnitQuaternion.from_seq(self.quaternion),
            Vector3.from_seq(self.position),
        )


def encode_datagram(d: PoseDatagram) -> bytes:
    return _LAYOUT.pack(MAGIC, d.version, d.seq, d.t, *d.position, *d.quaternion)


def decode_datagram(buf: bytes) -> PoseDatagram:
    if len(buf) < DATAGRAM_SIZE:
        raise ShortBufferError(f"need {DATAGRAM_SIZE} bytes, got {len(buf)}")
    magic, version, seq, t, px, py, pz, qw, qx, qy, qz = _LAYOUT.unpack(
        buf[:DATAGRAM_SIZE]
    )
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    n = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
    if abs(n - 1.0) > QUAT_NORM_TOL:
        raise NonUnitQuaternionError(f"quaternion norm {n} off unit by >{QUAT_NORM_TOL}")
    return PoseDatagram(
        seq=seq, t=t, position=(px, py, pz), quaternion=(qw, qx, qy, qz), version=version
    )
