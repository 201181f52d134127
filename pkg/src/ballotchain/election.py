"""Vote casting, duplicate prevention, tallying, and receipt verification.

A vote is bound to a voter by B_vote = SHA-256(B_identity hex ∥ candidate_id);
the chain stores B_vote and the choice, never the identity itself. The
off-chain registry carries the voted flags, so duplicate prevention does not
require inverting any hash.
"""

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Callable

from .consensus import (
    Decision,
    FaultProfile,
    Proposal,
    QuorumConfig,
    Validator,
    run_round,
)
from .errors import (
    AuthorizationError,
    ConsensusAbort,
    DuplicateRegistrationError,
    DuplicateVoteError,
    IntegrityError,
    ValidationError,
)
from .hashing import SHA256_HEX_LEN, blake2b512, require_digest, sha256, sha256_utf8
from .identity import (
    DigitalIdentity,
    GovernmentId,
    MinutiaeTemplate,
    compose_identity,
    hash_fingerprint,
    hash_identity_document,
    verify_login,
)
from .ledger import (
    Chain,
    RegistrationPayload,
    TIMESTAMP_FORMAT,
    VotePayload,
    canonical_json,
    combined_hash,
    verify_chain,
)
from .pattern import RotationPattern, hash_pattern, serialize_pattern

if TYPE_CHECKING:
    from .store import SystemState


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    display_name: str

    def __post_init__(self):
        if not self.candidate_id or len(self.candidate_id) > 64:
            raise ValidationError("candidate_id must be 1..64 characters")

    def to_dict(self) -> dict:
        return {"candidate_id": self.candidate_id, "display_name": self.display_name}


@dataclass(frozen=True)
class Receipt:
    """Voter-held proof: enough to verify the vote without identifying it."""

    b_vote: str
    block_index: int
    election_id: str

    def to_dict(self) -> dict:
        return {
            "b_vote": self.b_vote,
            "block_index": self.block_index,
            "election_id": self.election_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Receipt":
        return cls(str(data["b_vote"]), int(data["block_index"]), str(data["election_id"]))


@dataclass(frozen=True)
class Tally:
    counts: dict[str, int]
    total: int

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise ValidationError("tally total must equal the sum of counts")

    def to_dict(self) -> dict:
        return {"counts": dict(self.counts), "total": self.total}


def bind_vote(b_identity: str, candidate_id: str) -> str:
    """B_vote: SHA-256 over the identity hex concatenated with the choice."""
    require_digest(b_identity, SHA256_HEX_LEN, "b_identity")
    if not candidate_id or len(candidate_id) > 64:
        raise ValidationError("candidate_id must be 1..64 characters")
    return sha256_utf8(b_identity + candidate_id)


def tally(vote_chain: Chain, candidates: list[Candidate] | None = None) -> Tally:
    """Count votes by candidate over all vote blocks (sentinel genesis at
    index 0 excluded). Configured candidates appear even with zero votes."""
    report = verify_chain(vote_chain)
    if not report.ok:
        raise IntegrityError(
            f"vote chain invalid: {report.reason} at index {report.first_bad_index}"
        )
    counts: dict[str, int] = {c.candidate_id: 0 for c in candidates or []}
    total = 0
    for block in vote_chain.blocks[1:]:
        if not isinstance(block.payload, VotePayload):
            raise IntegrityError(f"non-vote payload at index {block.index}")
        counts[block.payload.candidate_id] = counts.get(block.payload.candidate_id, 0) + 1
        total += 1
    return Tally(counts=counts, total=total)


def verify_receipt(
    b_identity: str, candidate_id: str, receipt: Receipt, vote_chain: Chain
) -> bool:
    """True iff the receipt's digest recomputes, its block holds that digest,
    and the whole chain verifies. Mismatches return False, never raise."""
    try:
        expected = bind_vote(b_identity, candidate_id)
    except ValidationError:
        return False
    if expected != receipt.b_vote:
        return False
    if not 0 <= receipt.block_index < len(vote_chain.blocks):
        return False
    block = vote_chain.blocks[receipt.block_index]
    if not isinstance(block.payload, VotePayload):
        return False
    if block.payload.b_vote != receipt.b_vote:
        return False
    if block.payload.election_id != receipt.election_id:
        return False
    return verify_chain(vote_chain).ok


def election_manifest_bytes(
    election_id: str, n_validators: int, image_count: int
) -> bytes:
    """Canonical bytes of the fixed election parameters, hashed into the vote
    chain's sentinel genesis so the configuration is tamper-evident too. The
    candidate roster stays out on purpose: it may grow until voting starts."""
    return canonical_json(
        {
            "election_id": election_id,
            "n_validators": n_validators,
            "pattern_image_count": image_count,
        }
    )


def manifest_genesis_payload(
    election_id: str, n_validators: int, image_count: int
) -> RegistrationPayload:
    """Sentinel genesis for a vote chain: a registration-shaped payload whose
    hash fields are digests of the election manifest and whose pattern is the
    all-zero rotation."""
    manifest = election_manifest_bytes(election_id, n_validators, image_count)
    zero_pattern = serialize_pattern(RotationPattern.from_angles([0] * image_count))
    return RegistrationPayload(
        aadhaar_hash=blake2b512(manifest),
        fingerprint_hash=sha256(manifest),
        photo_rotation_pattern=zero_pattern,
    )


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Election:
    """Single-node orchestrator: all ledger mutations pass through one lock,
    one validator quorum, and one durable store."""

    def __init__(
        self,
        state: "SystemState",
        clock: Callable[[], datetime] | None = None,
        fault_profiles: dict[int, FaultProfile] | None = None,
    ):
        self.state = state
        self.config = state.config
        self.store = state.store
        self.registration_chain = state.registration_chain
        self.vote_chain = state.vote_chain
        self.registry = state.registry
        self.candidates = state.candidates
        self.clock = clock or _utc_now
        self.quorum = QuorumConfig(n_validators=self.config.n_validators)
        self._lock = threading.Lock()
        self.validators = self._build_validators(fault_profiles or {})

    @classmethod
    def open(cls, data_dir, **kwargs) -> "Election":
        from .errors import LoadError
        from .store import load_state

        state = load_state(data_dir)
        if not state.initialized:
            raise LoadError("data directory is not initialized", str(data_dir))
        return cls(state, **kwargs)

    def _build_validators(self, fault_profiles: dict[int, FaultProfile]) -> list[Validator]:
        candidate_ids = {c.candidate_id for c in self.candidates}
        validators = []
        for i in range(self.config.n_validators):
            v = Validator(
                validator_id=i,
                election_id=self.config.election_id,
                candidate_ids=candidate_ids,
                image_count=self.config.pattern_image_count,
                profile=fault_profiles.get(i, FaultProfile.HONEST),
            )
            v.registered = {entry.b_identity for entry in self.registry.values()}
            v.voted = {
                entry.b_identity
                for entry in self.registry.values()
                if self.config.election_id in entry.elections_voted
            }
            validators.append(v)
        return validators

    @property
    def election_id(self) -> str:
        return self.config.election_id

    def candidate_ids(self) -> set[str]:
        return {c.candidate_id for c in self.candidates}

    # -- registration -----------------------------------------------------

    def compose_factors(
        self, gid: GovernmentId, template: MinutiaeTemplate, pat: RotationPattern
    ) -> DigitalIdentity:
        if pat.image_count != self.config.pattern_image_count:
            raise ValidationError(
                f"pattern must cover {self.config.pattern_image_count} images, "
                f"got {pat.image_count}"
            )
        return DigitalIdentity.create(
            h_identity=hash_identity_document(gid),
            h_fingerprint=hash_fingerprint(template),
            h_pattern=hash_pattern(pat),
        )

    def register(
        self, gid: GovernmentId, template: MinutiaeTemplate, pat: RotationPattern
    ) -> str:
        """Propose a registration block through consensus; returns b_identity."""
        ident = self.compose_factors(gid, template, pat)
        payload = RegistrationPayload(
            aadhaar_hash=ident.h_identity,
            fingerprint_hash=ident.h_fingerprint,
            photo_rotation_pattern=serialize_pattern(pat),
        )
        with self._lock:
            if ident.b_identity in self.registry:
                raise DuplicateRegistrationError(
                    "this identity is already registered"
                )
            proposal = Proposal(payload, previous_hash=self.registration_chain.head_hash)
            result = run_round(
                self.registration_chain,
                proposal,
                self.validators,
                self.quorum,
                round_id=self._round_id("registry", proposal),
                persist=lambda b: self.store.persist_block("registry", b),
            )
            self.store.append_audit_trace(result.to_trace_dict())
            if result.outcome is not Decision.COMMIT:
                raise ConsensusAbort(
                    "registration rejected by quorum", result.reject_reasons
                )
            entry = self.store.record_registration(
                b_identity=ident.b_identity,
                registration_block=result.block.index,
                id_kind=gid.kind.value,
            )
            self.registry[ident.b_identity] = entry
        return ident.b_identity

    def stored_identity(self, b_identity: str) -> DigitalIdentity | None:
        """Rebuild the DigitalIdentity recorded for b_identity, if any."""
        entry = self.registry.get(b_identity)
        if entry is None:
            return None
        block = self.registration_chain.blocks[entry.registration_block]
        payload = block.payload
        return DigitalIdentity(
            h_identity=payload.aadhaar_hash,
            h_fingerprint=payload.fingerprint_hash,
            h_pattern=sha256_utf8(payload.photo_rotation_pattern),
            b_identity=b_identity,
        )

    def authenticate(
        self, gid: GovernmentId, template: MinutiaeTemplate, pat: RotationPattern
    ) -> str | None:
        """Verify all three factors; return b_identity on success, else None."""
        try:
            ident = self.compose_factors(gid, template, pat)
        except ValidationError:
            return None
        stored = self.stored_identity(ident.b_identity)
        if stored is None:
            return None
        if not verify_login(stored, gid, template, pat):
            return None
        return ident.b_identity

    # -- voting ------------------------------------------------------------

    def cast_vote(
        self, b_identity: str, candidate_id: str, timestamp: datetime | None = None
    ) -> Receipt:
        """Submit one vote through consensus; duplicate detection is atomic
        with the append (both run under the single-writer lock)."""
        if candidate_id not in self.candidate_ids():
            raise ValidationError(f"unknown candidate {candidate_id!r}")
        require_digest(b_identity, SHA256_HEX_LEN, "b_identity")
        when = timestamp or self.clock()
        cast_at = when.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)
        with self._lock:
            entry = self.registry.get(b_identity)
            if entry is None:
                raise AuthorizationError("identity is not registered")
            if self.election_id in entry.elections_voted:
                raise DuplicateVoteError("this identity has already voted")
            payload = VotePayload(
                b_vote=bind_vote(b_identity, candidate_id),
                candidate_id=candidate_id,
                election_id=self.election_id,
                cast_at=cast_at,
            )
            proposal = Proposal(
                payload,
                previous_hash=self.vote_chain.head_hash,
                b_identity=b_identity,
            )
            result = run_round(
                self.vote_chain,
                proposal,
                self.validators,
                self.quorum,
                round_id=self._round_id("votes", proposal),
                persist=lambda b: self.store.persist_block(self.vote_chain_name, b),
            )
            self.store.append_audit_trace(result.to_trace_dict())
            if result.outcome is not Decision.COMMIT:
                raise ConsensusAbort("vote rejected by quorum", result.reject_reasons)
            self.store.record_vote(b_identity, self.election_id)
            entry.elections_voted.add(self.election_id)
            return Receipt(
                b_vote=payload.b_vote,
                block_index=result.block.index,
                election_id=self.election_id,
            )

    @property
    def vote_chain_name(self) -> str:
        return f"votes-{self.election_id}"

    def _round_id(self, chain_name: str, proposal: Proposal) -> str:
        chain = self.registration_chain if chain_name == "registry" else self.vote_chain
        return f"{chain_name}:{len(chain.blocks)}:{proposal.payload_hash[:12]}"

    # -- audit -------------------------------------------------------------

    def tally(self) -> Tally:
        return tally(self.vote_chain, self.candidates)

    def verify_receipt(self, b_identity: str, candidate_id: str, receipt: Receipt) -> bool:
        return verify_receipt(b_identity, candidate_id, receipt, self.vote_chain)

    def verification_report(self) -> dict:
        """Shared verification path used by both the CLI and the service."""
        return verification_report(self.registration_chain, self.vote_chain)


def verification_report(registration_chain: Chain, vote_chain: Chain) -> dict:
    """Full-audit summary for a pair of chains. Combined hashes are reported
    per chain and only when that chain is non-empty and verifies."""
    reg_report = verify_chain(registration_chain)
    vote_report = verify_chain(vote_chain)
    return {
        "ok": reg_report.ok and vote_report.ok,
        "registry_combined_hash": (
            combined_hash(registration_chain)
            if reg_report.ok and registration_chain.blocks
            else None
        ),
        "votes_combined_hash": (
            combined_hash(vote_chain) if vote_report.ok and vote_chain.blocks else None
        ),
        "registry": reg_report.to_dict(),
        "votes": vote_report.to_dict(),
    }
