"""Picture-rotation authentication pattern: model, canonical string, hash.

Grammar (ASCII, bit-exact):
    PATTERN := TOKEN ("_" TOKEN)*
    TOKEN   := "PhotoWall" INDEX "_" ANGLE
    INDEX   := decimal 1..N, strictly ascending
    ANGLE   := "0" | "90" | "180" | "270"

With the default four images the secret space is 4^4 = 256 patterns; the
pattern is a low-entropy knowledge factor, never a standalone credential.
"""

from dataclasses import dataclass

from .errors import ValidationError
from .hashing import sha256_utf8

ALLOWED_ANGLES = (0, 90, 180, 270)
IMAGE_NAME_PREFIX = "PhotoWall"
DEFAULT_IMAGE_COUNT = 4


@dataclass(frozen=True)
class RotationPattern:
    """Ordered (image name, angle) pairs; the interactive login secret."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("pattern must have at least one entry")
        for i, (name, angle) in enumerate(self.entries):
            expected = f"{IMAGE_NAME_PREFIX}{i + 1}"
            if name != expected:
                raise ValidationError(
                    f"entry {i}: image name must be {expected!r}, got {name!r}"
                )
            if angle not in ALLOWED_ANGLES:
                raise ValidationError(
                    f"entry {i}: angle {angle!r} not in {ALLOWED_ANGLES}"
                )

    @classmethod
    def from_angles(cls, angles: list[int] | tuple[int, ...]) -> "RotationPattern":
        return cls(
            tuple((f"{IMAGE_NAME_PREFIX}{i + 1}", a) for i, a in enumerate(angles))
        )

    @property
    def angles(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.entries)

    @property
    def image_count(self) -> int:
        return len(self.entries)


def serialize_pattern(p: RotationPattern) -> str:
    """Canonical string: "<name>_<angle>" tokens joined by "_"."""
    return "_".join(f"{name}_{angle}" for name, angle in p.entries)


def parse_pattern(s: str, n: int) -> RotationPattern:
    """Strict inverse of serialize_pattern for an n-image pattern.

    Rejects anything that is not exactly the serialization of a valid
    pattern: wrong image count, out-of-order indices, unknown angles,
    stray whitespace or padding.
    """
    if n < 1:
        raise ValidationError("image count must be >= 1")
    tokens = s.split("_")
    if len(tokens) != 2 * n:
        raise ValidationError(
            f"expected {2 * n} underscore-separated tokens for {n} images, "
            f"got {len(tokens)}"
        )
    entries = []
    for k in range(n):
        name, angle_text = tokens[2 * k], tokens[2 * k + 1]
        expected = f"{IMAGE_NAME_PREFIX}{k + 1}"
        if name != expected:
            raise ValidationError(f"bad token {name!r}: expected image {expected!r}")
        if angle_text not in ("0", "90", "180", "270"):
            raise ValidationError(
                f"bad token {angle_text!r}: angle must be one of 0, 90, 180, 270"
            )
        entries.append((name, int(angle_text)))
    return RotationPattern(tuple(entries))


def infer_image_count(s: str) -> int:
    """Image count implied by a serialized pattern (token pairs)."""
    tokens = s.split("_")
    if len(tokens) % 2 != 0:
        raise ValidationError("pattern string has an odd token count")
    return len(tokens) // 2


def hash_pattern(p: RotationPattern) -> str:
    """H over the pattern: SHA-256 of the canonical serialization (UTF-8)."""
    return sha256_utf8(serialize_pattern(p))
