"""Three-factor voter identity: document hash, fingerprint hash, pattern hash.

The composed identity is SHA-256 over the concatenated lowercase hex of the
three factor hashes (128 + 64 + 64 = 256 ASCII characters). Login succeeds
only when all three factors reproduce their stored hashes; there is no
partial acceptance.
"""

import enum
from dataclasses import dataclass
from typing import Protocol

from .errors import ValidationError
from .hashing import (
    BLAKE2B512_HEX_LEN,
    SHA256_HEX_LEN,
    blake2b512,
    require_digest,
    sha256,
    sha256_utf8,
)
from .pattern import RotationPattern, hash_pattern

MAX_TEMPLATE_POINTS = 512


class IdKind(enum.Enum):
    AADHAAR = "AADHAAR"
    DRIVING_LICENSE = "DRIVING_LICENSE"


class MinutiaKind(enum.Enum):
    RIDGE_ENDING = "E"
    BIFURCATION = "B"


@dataclass(frozen=True)
class GovernmentId:
    """Uploaded government-issued document. Only the raw bytes are hashed;
    the kind is off-chain bookkeeping and never enters any digest."""

    kind: IdKind
    document_bytes: bytes

    def __post_init__(self):
        if not self.document_bytes:
            raise ValidationError("document must be non-empty")


@dataclass(frozen=True, order=True)
class MinutiaPoint:
    """One fingerprint feature point: position, ridge direction, type."""

    x: int
    y: int
    theta: int
    kind: MinutiaKind

    def __post_init__(self):
        if not 0 <= self.x <= 65535:
            raise ValidationError(f"x out of range: {self.x}")
        if not 0 <= self.y <= 65535:
            raise ValidationError(f"y out of range: {self.y}")
        if not 0 <= self.theta <= 359:
            raise ValidationError(f"theta out of range: {self.theta}")

    @property
    def sort_key(self) -> tuple[int, int, int, str]:
        return (self.x, self.y, self.theta, self.kind.value)


@dataclass(frozen=True)
class MinutiaeTemplate:
    """Extracted minutiae set; 1..512 points, duplicates rejected."""

    points: tuple[MinutiaPoint, ...]

    def __post_init__(self):
        if not self.points:
            raise ValidationError("template must contain at least one point")
        if len(self.points) > MAX_TEMPLATE_POINTS:
            raise ValidationError(
                f"template holds {len(self.points)} points, max {MAX_TEMPLATE_POINTS}"
            )
        seen = set()
        for p in self.points:
            if p in seen:
                raise ValidationError(f"duplicate minutia point {p}")
            seen.add(p)

    def to_json_dict(self) -> dict:
        return {
            "points": [
                {"x": p.x, "y": p.y, "theta": p.theta, "kind": p.kind.value}
                for p in self.points
            ]
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MinutiaeTemplate":
        if not isinstance(data, dict) or "points" not in data:
            raise ValidationError("template JSON must be an object with 'points'")
        raw = data["points"]
        if not isinstance(raw, list):
            raise ValidationError("'points' must be a list")
        points = []
        for i, item in enumerate(raw):
            try:
                kind = MinutiaKind(item["kind"])
                points.append(
                    MinutiaPoint(int(item["x"]), int(item["y"]), int(item["theta"]), kind)
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad point at index {i}: {exc}") from exc
        return cls(tuple(points))


@dataclass(frozen=True)
class DigitalIdentity:
    """The four hashes making up one voter's identity."""

    h_identity: str
    h_fingerprint: str
    h_pattern: str
    b_identity: str

    def __post_init__(self):
        require_digest(self.h_identity, BLAKE2B512_HEX_LEN, "h_identity")
        require_digest(self.h_fingerprint, SHA256_HEX_LEN, "h_fingerprint")
        require_digest(self.h_pattern, SHA256_HEX_LEN, "h_pattern")
        require_digest(self.b_identity, SHA256_HEX_LEN, "b_identity")
        expected = compose_identity(self.h_identity, self.h_fingerprint, self.h_pattern)
        if self.b_identity != expected:
            raise ValidationError("b_identity does not recompose from factor hashes")

    @classmethod
    def create(cls, h_identity: str, h_fingerprint: str, h_pattern: str) -> "DigitalIdentity":
        return cls(
            h_identity=h_identity,
            h_fingerprint=h_fingerprint,
            h_pattern=h_pattern,
            b_identity=compose_identity(h_identity, h_fingerprint, h_pattern),
        )


def hash_identity_document(gid: GovernmentId) -> str:
    """Document-factor hash: BLAKE2b-512 over the raw uploaded bytes."""
    return blake2b512(gid.document_bytes)


def encode_minutiae(template: MinutiaeTemplate) -> bytes:
    """Canonical ASCII encoding of a template.

    Points are sorted by (x, y, theta, kind letter) and serialized as
    "n=<count>;" followed by "<x>:<y>:<theta>:<E|B>" tokens joined by ";".
    Any permutation of the same point set encodes identically.
    """
    ordered = sorted(template.points, key=lambda p: p.sort_key)
    tokens = [f"{p.x}:{p.y}:{p.theta}:{p.kind.value}" for p in ordered]
    return (f"n={len(ordered)};" + ";".join(tokens)).encode("ascii")


def hash_fingerprint(template: MinutiaeTemplate) -> str:
    """Fingerprint-factor hash: SHA-256 over the canonical encoding."""
    return sha256(encode_minutiae(template))


def compose_identity(h_identity: str, h_fingerprint: str, h_pattern: str) -> str:
    """Unified identity: SHA-256 over the three hex strings concatenated."""
    require_digest(h_identity, BLAKE2B512_HEX_LEN, "h_identity")
    require_digest(h_fingerprint, SHA256_HEX_LEN, "h_fingerprint")
    require_digest(h_pattern, SHA256_HEX_LEN, "h_pattern")
    return sha256_utf8(h_identity + h_fingerprint + h_pattern)


def verify_login(
    stored: DigitalIdentity,
    gid: GovernmentId,
    template: MinutiaeTemplate,
    p: RotationPattern,
) -> bool:
    """True iff all three presented factors hash to the stored values."""
    return (
        hash_identity_document(gid) == stored.h_identity
        and hash_fingerprint(template) == stored.h_fingerprint
        and hash_pattern(p) == stored.h_pattern
    )


class MinutiaeExtractor(Protocol):
    """Pluggable extraction from raw fingerprint image bytes."""

    def extract(self, data: bytes) -> MinutiaeTemplate: ...


class ToyMinutiaeExtractor:
    """Deterministic stand-in extractor for tests and demos.

    Maps each non-overlapping 4-byte window (a, b, c, d) of the input to one
    point: x = a<<8|b, y = c<<8|d, theta = (x + y) mod 360, kind by parity of
    d. The input is zero-padded to a multiple of 4; duplicate points are
    dropped and the template is capped at 512 points. Not a biometric
    algorithm in any sense.
    """

    def extract(self, data: bytes) -> MinutiaeTemplate:
        if not data:
            raise ValidationError("fingerprint bytes must be non-empty")
        padded = data + b"\x00" * (-len(data) % 4)
        points: list[MinutiaPoint] = []
        seen = set()
        for i in range(0, len(padded), 4):
            a, b, c, d = padded[i : i + 4]
            x = (a << 8) | b
            y = (c << 8) | d
            kind = MinutiaKind.RIDGE_ENDING if d % 2 == 0 else MinutiaKind.BIFURCATION
            point = MinutiaPoint(x, y, (x + y) % 360, kind)
            if point not in seen:
                seen.add(point)
                points.append(point)
            if len(points) == MAX_TEMPLATE_POINTS:
                break
        return MinutiaeTemplate(tuple(points))
