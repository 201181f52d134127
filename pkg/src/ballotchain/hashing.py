"""Byte-level hash primitives and hex/bit helpers used by every other module.

All digests travel through the system as lowercase hex strings; wherever two
digests are combined, it is the hex *strings* that are concatenated (as ASCII
bytes), never the raw digest bytes.
"""

import hashlib
import string

from .errors import ValidationError

BLAKE2B512_HEX_LEN = 128  # 512 bits
SHA256_HEX_LEN = 64  # 256 bits

_HEX_CHARS = set(string.hexdigits.lower()) - set("ABCDEF")


def blake2b512(data: bytes) -> str:
    """BLAKE2b with 512-bit output, unkeyed, as 128 lowercase hex chars."""
    return hashlib.blake2b(data, digest_size=64).hexdigest()


def sha256(data: bytes) -> str:
    """SHA-256 of the input bytes as 64 lowercase hex chars."""
    return hashlib.sha256(data).hexdigest()


def sha256_utf8(text: str) -> str:
    """SHA-256 over the UTF-8 encoding of a string."""
    return sha256(text.encode("utf-8"))


def is_hex_digest(value: str, hex_len: int) -> bool:
    """True iff value is exactly hex_len lowercase hex characters."""
    return len(value) == hex_len and all(c in _HEX_CHARS for c in value)


def require_digest(value: str, hex_len: int, what: str = "digest") -> str:
    """Validate a lowercase hex digest of the given width; return it unchanged."""
    if not isinstance(value, str) or not is_hex_digest(value, hex_len):
        raise ValidationError(
            f"{what} must be {hex_len} lowercase hex characters, got {value!r}"
        )
    return value


def hex_to_bits(digest: str) -> str:
    """Expand a hex string to its bits, most significant bit first.

    Returns a string of '0'/'1' characters of length 4 * len(digest).
    """
    if not digest:
        return ""
    for ch in digest:
        if ch not in _HEX_CHARS:
            raise ValidationError(f"malformed hex character {ch!r}")
    return bin(int(digest, 16))[2:].zfill(4 * len(digest))


def bits_to_hex(bits: str) -> str:
    """Inverse of hex_to_bits; bit length must be a multiple of 4."""
    if len(bits) % 4 != 0:
        raise ValidationError("bit length must be a multiple of 4")
    if not bits:
        return ""
    if set(bits) - {"0", "1"}:
        raise ValidationError("bit string may contain only '0' and '1'")
    return format(int(bits, 2), "x").zfill(len(bits) // 4)


def count_ones(digest: str) -> int:
    """Number of 1 bits in a hex digest."""
    return hex_to_bits(digest).count("1")
