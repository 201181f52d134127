"""Append-only hash-linked chain of blocks.

Block hash formula: SHA-256 over canonical-JSON payload bytes, an ASCII "|"
separator, then the predecessor's hash ("0" for the genesis block). The
combined chain hash, the chain's single audit fingerprint, is SHA-256 over
every block hash concatenated in order.

Two instances exist at runtime: the registration chain (whose genesis is the
first voter, as in the published block format) and the per-election vote
chain (whose genesis is a sentinel manifest block).
"""

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Union

from .errors import IntegrityError, ValidationError
from .hashing import BLAKE2B512_HEX_LEN, SHA256_HEX_LEN, require_digest, sha256
from .pattern import infer_image_count, parse_pattern

GENESIS_PREVIOUS_HASH = "0"
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
MAX_CANDIDATE_ID_LEN = 64


@dataclass
class RegistrationPayload:
    """On-chain registration record; field names match the published block
    format exactly ("aadhaar_hash" even for a driving license)."""

    aadhaar_hash: str
    fingerprint_hash: str
    photo_rotation_pattern: str

    def __post_init__(self):
        require_digest(self.aadhaar_hash, BLAKE2B512_HEX_LEN, "aadhaar_hash")
        require_digest(self.fingerprint_hash, SHA256_HEX_LEN, "fingerprint_hash")
        # grammar check only; the configured image count is enforced upstream
        parse_pattern(
            self.photo_rotation_pattern, infer_image_count(self.photo_rotation_pattern)
        )

    def to_dict(self) -> dict:
        return {
            "aadhaar_hash": self.aadhaar_hash,
            "fingerprint_hash": self.fingerprint_hash,
            "photo_rotation_pattern": self.photo_rotation_pattern,
        }


@dataclass
class VotePayload:
    """On-chain vote record: the binding digest plus the choice in clear.

    The voter's identity digest is deliberately NOT stored here; only the
    off-chain registry can link a vote back to a registration.
    """

    b_vote: str
    candidate_id: str
    election_id: str
    cast_at: str

    def __post_init__(self):
        require_digest(self.b_vote, SHA256_HEX_LEN, "b_vote")
        if not self.candidate_id or len(self.candidate_id) > MAX_CANDIDATE_ID_LEN:
            raise ValidationError("candidate_id must be 1..64 characters")
        if not self.election_id:
            raise ValidationError("election_id must be non-empty")
        try:
            datetime.strptime(self.cast_at, TIMESTAMP_FORMAT)
        except ValueError as exc:
            raise ValidationError(
                f"cast_at must be UTC ISO-8601 with seconds precision "
                f"({TIMESTAMP_FORMAT}), got {self.cast_at!r}"
            ) from exc

    def to_dict(self) -> dict:
        return {
            "b_vote": self.b_vote,
            "candidate_id": self.candidate_id,
            "election_id": self.election_id,
            "cast_at": self.cast_at,
        }


Payload = Union[RegistrationPayload, VotePayload]

_REG_KEYS = {"aadhaar_hash", "fingerprint_hash", "photo_rotation_pattern"}
_VOTE_KEYS = {"b_vote", "candidate_id", "election_id", "cast_at"}


def payload_from_dict(data: dict) -> Payload:
    """Reconstruct a payload from its wire dict; strict on keys."""
    if not isinstance(data, dict):
        raise ValidationError("payload must be a JSON object")
    keys = set(data)
    if keys == _REG_KEYS:
        return RegistrationPayload(**data)
    if keys == _VOTE_KEYS:
        return VotePayload(**data)
    raise ValidationError(f"unrecognized payload keys: {sorted(keys)}")


def canonical_json(payload) -> bytes:
    """Deterministic serialization: keys sorted, no whitespace, UTF-8 bytes."""
    data = payload.to_dict() if hasattr(payload, "to_dict") else payload
    return json.dumps(
        data, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def compute_block_hash_from_bytes(payload_bytes: bytes, previous_hash: str) -> str:
    """Hash of a block given already-serialized payload bytes."""
    return sha256(payload_bytes + b"|" + previous_hash.encode("ascii"))


def compute_block_hash(payload, previous_hash: str) -> str:
    return compute_block_hash_from_bytes(canonical_json(payload), previous_hash)


@dataclass
class Block:
    index: int
    payload: Payload
    previous_hash: str
    block_hash: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "payload": self.payload.to_dict(),
            "previous_hash": self.previous_hash,
            "block_hash": self.block_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Block":
        expected = {"index", "payload", "previous_hash", "block_hash"}
        if set(data) != expected:
            off = sorted(set(data) ^ expected)
            raise ValidationError(f"block fields do not match the ledger format: {off}")
        return cls(
            index=int(data["index"]),
            payload=payload_from_dict(data["payload"]),
            previous_hash=str(data["previous_hash"]),
            block_hash=str(data["block_hash"]),
        )


@dataclass
class Chain:
    """Ordered block list; all mutation goes through make_genesis/append_block."""

    blocks: list[Block] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def head(self) -> Block | None:
        return self.blocks[-1] if self.blocks else None

    @property
    def head_hash(self) -> str:
        """Hash the next block must link to ("0" while the chain is empty)."""
        return self.blocks[-1].block_hash if self.blocks else GENESIS_PREVIOUS_HASH


@dataclass(frozen=True)
class ChainVerification:
    ok: bool
    first_bad_index: int | None = None
    reason: str | None = None  # "hash-mismatch" | "link-mismatch" | "index-mismatch"

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "first_bad_index": self.first_bad_index,
            "reason": self.reason,
        }


def make_genesis(payload: Payload) -> Block:
    """Index-0 block with the literal previous hash "0"."""
    return Block(
        index=0,
        payload=payload,
        previous_hash=GENESIS_PREVIOUS_HASH,
        block_hash=compute_block_hash(payload, GENESIS_PREVIOUS_HASH),
    )


def append_block(chain: Chain, payload: Payload) -> Block:
    """Extend a non-empty, currently valid chain by one block."""
    if not chain.blocks:
        raise IntegrityError("chain is empty; use make_genesis for the first block")
    report = verify_chain(chain)
    if not report.ok:
        raise IntegrityError(
            f"refusing to append to invalid chain: {report.reason} "
            f"at index {report.first_bad_index}"
        )
    previous = chain.blocks[-1].block_hash
    block = Block(
        index=len(chain.blocks),
        payload=payload,
        previous_hash=previous,
        block_hash=compute_block_hash(payload, previous),
    )
    chain.blocks.append(block)
    return block


def verify_chain(chain: Chain) -> ChainVerification:
    """Check every linking and hashing invariant; report the first failure.

    Per block, in order: index contiguity, previous-hash link, then the
    recomputed block hash. Failures are reported, never raised.
    """
    for i, block in enumerate(chain.blocks):
        if block.index != i:
            return ChainVerification(False, i, "index-mismatch")
        expected_prev = (
            GENESIS_PREVIOUS_HASH if i == 0 else chain.blocks[i - 1].block_hash
        )
        if block.previous_hash != expected_prev:
            return ChainVerification(False, i, "link-mismatch")
        if compute_block_hash(block.payload, block.previous_hash) != block.block_hash:
            return ChainVerification(False, i, "hash-mismatch")
    return ChainVerification(True)


def combined_hash(chain: Chain) -> str:
    """SHA-256 over all block hashes concatenated in chain order."""
    if not chain.blocks:
        raise IntegrityError("combined hash of an empty chain is undefined")
    report = verify_chain(chain)
    if not report.ok:
        raise IntegrityError(
            f"chain invalid: {report.reason} at index {report.first_bad_index}"
        )
    return sha256("".join(b.block_hash for b in chain.blocks).encode("ascii"))
