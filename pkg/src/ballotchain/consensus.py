"""In-process quorum validation: N validators check each proposed block and a
strict majority of accepts is required before the single writer commits.

Validators read the shared chain snapshot for link checks but keep their own
replicas of the registered/voted sets, refreshed only on commit, so replica
divergence is exercised by the fault-injection tests. There is no network
transport; the module boundary would permit one later.
"""

import enum
from dataclasses import dataclass, field
from typing import Callable

from .errors import ValidationError
from .hashing import sha256
from .identity import compose_identity
from .ledger import (
    Block,
    Chain,
    Payload,
    RegistrationPayload,
    VotePayload,
    append_block,
    canonical_json,
    make_genesis,
)
from .pattern import infer_image_count


class FaultProfile(enum.Enum):
    HONEST = "HONEST"
    CRASH = "CRASH"
    ALWAYS_REJECT = "ALWAYS_REJECT"
    CORRUPT_HASH = "CORRUPT_HASH"


class Decision(enum.Enum):
    COMMIT = "COMMIT"
    ABORT = "ABORT"


@dataclass(frozen=True)
class QuorumConfig:
    n_validators: int = 4
    threshold: int | None = None  # defaults to strict majority

    def __post_init__(self):
        if self.n_validators < 1:
            raise ValidationError("n_validators must be >= 1")
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.n_validators // 2 + 1)
        if not 1 <= self.threshold <= self.n_validators:
            raise ValidationError(
                f"threshold {self.threshold} out of range 1..{self.n_validators}"
            )


@dataclass(frozen=True)
class ValidatorVerdict:
    validator_id: int
    decision: str  # "ACCEPT" | "REJECT"
    reason: str = ""

    def __post_init__(self):
        if self.decision not in ("ACCEPT", "REJECT"):
            raise ValidationError(f"bad decision {self.decision!r}")
        if self.decision == "REJECT" and not self.reason:
            raise ValidationError("REJECT verdicts must carry a reason")

    def to_dict(self) -> dict:
        return {
            "validator_id": self.validator_id,
            "decision": self.decision,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class Proposal:
    """A payload offered for commit, plus the context validators need."""

    payload: Payload
    previous_hash: str  # head the committer intends to extend
    b_identity: str | None = None  # proposer identity, vote proposals only

    @property
    def payload_hash(self) -> str:
        return sha256(canonical_json(self.payload))


def _corrupt(digest: str) -> str:
    # deterministic single-position corruption of a hex string (or "0")
    return ("f" if digest[0] != "f" else "0") + digest[1:]


@dataclass
class Validator:
    """One replica: fault profile plus independent registered/voted sets."""

    validator_id: int
    election_id: str
    candidate_ids: set[str]
    image_count: int
    profile: FaultProfile = FaultProfile.HONEST
    registered: set[str] = field(default_factory=set)
    voted: set[str] = field(default_factory=set)

    def validate(self, chain: Chain, proposal: Proposal) -> ValidatorVerdict | None:
        """Produce a verdict, or None when this replica has crashed."""
        if self.profile is FaultProfile.CRASH:
            return None
        if self.profile is FaultProfile.ALWAYS_REJECT:
            return ValidatorVerdict(self.validator_id, "REJECT", "injected fault")

        head = chain.head_hash
        if self.profile is FaultProfile.CORRUPT_HASH:
            head = _corrupt(head)

        reason = self._check(head, proposal)
        if reason:
            return ValidatorVerdict(self.validator_id, "REJECT", reason)
        return ValidatorVerdict(self.validator_id, "ACCEPT")

    def _check(self, head: str, proposal: Proposal) -> str | None:
        payload = proposal.payload
        if isinstance(payload, RegistrationPayload):
            if infer_image_count(payload.photo_rotation_pattern) != self.image_count:
                return "pattern image count mismatch"
            b_identity = compose_identity(
                payload.aadhaar_hash,
                payload.fingerprint_hash,
                sha256(payload.photo_rotation_pattern.encode("utf-8")),
            )
            if b_identity in self.registered:
                return "duplicate registration"
        elif isinstance(payload, VotePayload):
            if proposal.b_identity is None:
                return "vote proposal missing proposer identity"
            if payload.election_id != self.election_id:
                return "wrong election"
            if payload.candidate_id not in self.candidate_ids:
                return "unknown candidate"
            if proposal.b_identity not in self.registered:
                return "unregistered identity"
            if proposal.b_identity in self.voted:
                return "duplicate vote"
            expected = sha256(
                (proposal.b_identity + payload.candidate_id).encode("utf-8")
            )
            if payload.b_vote != expected:
                return "vote binding mismatch"
        else:
            return "unknown payload type"
        if proposal.previous_hash != head:
            return "link mismatch with local head"
        return None

    def observe_commit(self, proposal: Proposal, block: Block) -> None:
        """Refresh this replica's sets after a committed block."""
        payload = block.payload
        if isinstance(payload, RegistrationPayload):
            self.registered.add(
                compose_identity(
                    payload.aadhaar_hash,
                    payload.fingerprint_hash,
                    sha256(payload.photo_rotation_pattern.encode("utf-8")),
                )
            )
        elif isinstance(payload, VotePayload) and proposal.b_identity:
            self.voted.add(proposal.b_identity)


def validate_proposal(
    validator: Validator, chain: Chain, proposal: Proposal
) -> ValidatorVerdict | None:
    return validator.validate(chain, proposal)


def decide(verdicts: list[ValidatorVerdict], config: QuorumConfig) -> Decision:
    """COMMIT iff accepts reach the threshold; crashes count as neither."""
    seen = set()
    for v in verdicts:
        if v.validator_id in seen:
            raise ValidationError(f"duplicate verdict from validator {v.validator_id}")
        seen.add(v.validator_id)
    if len(verdicts) > config.n_validators:
        raise ValidationError("more verdicts than validators")
    accepts = sum(1 for v in verdicts if v.decision == "ACCEPT")
    return Decision.COMMIT if accepts >= config.threshold else Decision.ABORT


@dataclass(frozen=True)
class RoundResult:
    round_id: str
    payload_hash: str
    outcome: Decision
    verdicts: tuple[ValidatorVerdict, ...]
    block: Block | None

    @property
    def reject_reasons(self) -> list[str]:
        return [v.reason for v in self.verdicts if v.decision == "REJECT"]

    def to_trace_dict(self) -> dict:
        return {
            "round_id": self.round_id,
            "payload_hash": self.payload_hash,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "outcome": self.outcome.value,
            "block_index": self.block.index if self.block else None,
        }


def run_round(
    chain: Chain,
    proposal: Proposal,
    validators: list[Validator],
    config: QuorumConfig,
    round_id: str = "",
    persist: Callable[[Block], None] | None = None,
) -> RoundResult:
    """Gather verdicts, decide, and on COMMIT perform the serialized append.

    Callers are responsible for serializing invocations (single-writer
    contract). The persist callback runs before the commit is acknowledged;
    if it raises, the in-memory chain is rolled back and the error
    propagates.
    """
    verdicts = tuple(
        v for v in (validate_proposal(val, chain, proposal) for val in validators)
        if v is not None
    )
    outcome = decide(list(verdicts), config)
    block: Block | None = None
    if outcome is Decision.COMMIT:
        if chain.blocks:
            block = append_block(chain, proposal.payload)
        else:
            block = make_genesis(proposal.payload)
            chain.blocks.append(block)
        if persist is not None:
            try:
                persist(block)
            except Exception:
                chain.blocks.pop()
                raise
        for val in validators:
            val.observe_commit(proposal, block)
    return RoundResult(
        round_id=round_id,
        payload_hash=proposal.payload_hash,
        outcome=outcome,
        verdicts=verdicts,
        block=block,
    )
