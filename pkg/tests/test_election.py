"""Vote binding, tallying, receipts, and the end-to-end orchestrator."""

import hashlib
import threading

import pytest

from ballotchain.consensus import FaultProfile
from ballotchain.election import (
    Candidate,
    Election,
    Receipt,
    Tally,
    bind_vote,
    election_manifest_bytes,
    manifest_genesis_payload,
    tally,
    verify_receipt,
)
from ballotchain.errors import (
    AuthorizationError,
    ConsensusAbort,
    DuplicateRegistrationError,
    DuplicateVoteError,
    IntegrityError,
    ValidationError,
)
from ballotchain.ledger import Chain, append_block, make_genesis
from ballotchain.pattern import parse_pattern

from .conftest import GENESIS_PATTERN, make_factors
from .test_ledger import vote_payload


def test_bind_vote_against_flat_oracle():
    b_identity = hashlib.sha256(b"voter").hexdigest()
    expected = hashlib.sha256((b_identity + "candidate-7").encode("ascii")).hexdigest()
    assert bind_vote(b_identity, "candidate-7") == expected


def test_bind_vote_validates_inputs():
    with pytest.raises(ValidationError):
        bind_vote("not-a-digest", "a")
    with pytest.raises(ValidationError):
        bind_vote(hashlib.sha256(b"x").hexdigest(), "")
    with pytest.raises(ValidationError):
        bind_vote(hashlib.sha256(b"x").hexdigest(), "c" * 65)


def test_candidate_id_bounds():
    with pytest.raises(ValidationError):
        Candidate("", "Empty")
    with pytest.raises(ValidationError):
        Candidate("x" * 65, "Long")
    Candidate("x" * 64, "EdgeOK")


def test_tally_counts_and_zero_seeds():
    chain = Chain()
    chain.blocks.append(make_genesis(manifest_genesis_payload("gen-2026", 4, 4)))
    b_identity = hashlib.sha256(b"v").hexdigest()
    for cid in ("a", "a", "b"):
        p = vote_payload(cid)
        p.b_vote = bind_vote(b_identity + "", cid)  # binding content irrelevant to tally
        p.candidate_id = cid
        append_block(chain, p)
    result = tally(chain, [Candidate("a", "A"), Candidate("b", "B"), Candidate("c", "C")])
    assert result.counts == {"a": 2, "b": 1, "c": 0}
    assert result.total == 3


def test_tally_rejects_invalid_chain():
    chain = Chain()
    chain.blocks.append(make_genesis(manifest_genesis_payload("gen-2026", 4, 4)))
    chain.blocks[0].block_hash = "0" * 64
    with pytest.raises(IntegrityError):
        tally(chain)


def test_tally_rejects_registration_payload_after_sentinel():
    chain = Chain()
    chain.blocks.append(make_genesis(manifest_genesis_payload("gen-2026", 4, 4)))
    append_block(chain, manifest_genesis_payload("gen-2026", 4, 4))
    with pytest.raises(IntegrityError):
        tally(chain)


def test_tally_total_invariant():
    with pytest.raises(ValidationError):
        Tally(counts={"a": 2}, total=3)


def test_manifest_genesis_is_deterministic_and_zero_patterned():
    one = manifest_genesis_payload("gen-2026", 4, 4)
    two = manifest_genesis_payload("gen-2026", 4, 4)
    assert one.to_dict() == two.to_dict()
    assert one.photo_rotation_pattern == "PhotoWall1_0_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0"
    manifest = election_manifest_bytes("gen-2026", 4, 4)
    assert one.aadhaar_hash == hashlib.blake2b(manifest, digest_size=64).hexdigest()
    assert one.fingerprint_hash == hashlib.sha256(manifest).hexdigest()
    other = manifest_genesis_payload("gen-2027", 4, 4)
    assert other.to_dict() != one.to_dict()


def test_register_then_authenticate(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    assert len(b_identity) == 64
    assert election.authenticate(gid, template, pat) == b_identity

    wrong_pat = parse_pattern(
        "PhotoWall1_0_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90", 4
    )
    assert election.authenticate(gid, template, wrong_pat) is None
    other_gid, other_template, _ = make_factors("voter-2")
    assert election.authenticate(other_gid, template, pat) is None
    assert election.authenticate(gid, other_template, pat) is None


def test_register_rejects_duplicates(election):
    gid, template, pat = make_factors("voter-1")
    election.register(gid, template, pat)
    with pytest.raises(DuplicateRegistrationError):
        election.register(gid, template, pat)


def test_register_rejects_wrong_image_count(election):
    gid, template, _ = make_factors("voter-1")
    short = parse_pattern("PhotoWall1_90_PhotoWall2_180", 2)
    with pytest.raises(ValidationError):
        election.register(gid, template, short)


def test_registration_chain_genesis_is_first_voter(election):
    gid, template, pat = make_factors("voter-1")
    election.register(gid, template, pat)
    genesis = election.registration_chain.blocks[0]
    assert genesis.previous_hash == "0"
    assert genesis.payload.photo_rotation_pattern == GENESIS_PATTERN


def test_cast_vote_and_receipt(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    receipt = election.cast_vote(b_identity, "a")
    assert receipt.block_index == 1  # index 0 is the sentinel genesis
    assert receipt.election_id == "gen-2026"
    assert election.verify_receipt(b_identity, "a", receipt)
    assert not election.verify_receipt(b_identity, "b", receipt)
    assert election.tally().to_dict() == {"counts": {"a": 1, "b": 0}, "total": 1}


def test_vote_requires_registration(election):
    stranger = hashlib.sha256(b"never met").hexdigest()
    with pytest.raises(AuthorizationError):
        election.cast_vote(stranger, "a")


def test_vote_rejects_unknown_candidate(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    with pytest.raises(ValidationError):
        election.cast_vote(b_identity, "nobody")


def test_double_vote_rejected(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    election.cast_vote(b_identity, "a")
    with pytest.raises(DuplicateVoteError):
        election.cast_vote(b_identity, "b")
    assert election.tally().total == 1


def test_concurrent_same_identity_votes_commit_once(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    receipts, rejections, surprises = [], [], []

    def attempt():
        try:
            receipts.append(election.cast_vote(b_identity, "a"))
        except DuplicateVoteError:
            rejections.append(1)
        except Exception as exc:  # noqa: BLE001 - test wants any stray error
            surprises.append(exc)

    threads = [threading.Thread(target=attempt) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not surprises
    assert len(receipts) == 1
    assert len(rejections) == 15
    assert election.tally().total == 1
    assert len(election.vote_chain.blocks) == 2


def test_quorum_abort_surfaces_reasons(data_dir):
    election = Election.open(
        data_dir,
        fault_profiles={0: FaultProfile.ALWAYS_REJECT, 1: FaultProfile.ALWAYS_REJECT},
    )
    gid, template, pat = make_factors("voter-1")
    with pytest.raises(ConsensusAbort) as excinfo:
        election.register(gid, template, pat)
    assert "injected fault" in excinfo.value.reasons
    assert election.registration_chain.blocks == []


def test_single_faulty_validator_does_not_block(data_dir):
    for fault in (FaultProfile.CRASH, FaultProfile.ALWAYS_REJECT, FaultProfile.CORRUPT_HASH):
        election = Election.open(data_dir, fault_profiles={2: fault})
        gid, template, pat = make_factors(f"voter-{fault.name}")
        b_identity = election.register(gid, template, pat)
        receipt = election.cast_vote(b_identity, "b")
        assert election.verify_receipt(b_identity, "b", receipt)


def test_verification_report_healthy(election):
    gid, template, pat = make_factors("voter-1")
    b_identity = election.register(gid, template, pat)
    election.cast_vote(b_identity, "a")
    report = election.verification_report()
    assert report["ok"]
    assert len(report["registry_combined_hash"]) == 64
    assert len(report["votes_combined_hash"]) == 64
    assert report["registry"]["ok"] and report["votes"]["ok"]


def test_verification_report_flags_tamper(election):
    gid, template, pat = make_factors("voter-1")
    election.register(gid, template, pat)
    election.registration_chain.blocks[0].payload.fingerprint_hash = (
        hashlib.sha256(b"swapped in").hexdigest()
    )
    report = election.verification_report()
    assert not report["ok"]
    assert report["registry_combined_hash"] is None
    assert report["registry"]["first_bad_index"] == 0


def test_receipt_roundtrip_and_mismatches():
    b_identity = hashlib.sha256(b"voter").hexdigest()
    chain = Chain()
    chain.blocks.append(make_genesis(manifest_genesis_payload("gen-2026", 4, 4)))
    p = vote_payload("r")
    p.b_vote = bind_vote(b_identity, "a")
    p.candidate_id = "a"
    block = append_block(chain, p)
    receipt = Receipt(b_vote=p.b_vote, block_index=block.index, election_id="gen-2026")
    assert Receipt.from_dict(receipt.to_dict()) == receipt
    assert verify_receipt(b_identity, "a", receipt, chain)
    assert not verify_receipt(b_identity, "b", receipt, chain)
    assert not verify_receipt("junk", "a", receipt, chain)
    off_index = Receipt(b_vote=p.b_vote, block_index=9, election_id="gen-2026")
    assert not verify_receipt(b_identity, "a", off_index, chain)
    wrong_election = Receipt(b_vote=p.b_vote, block_index=1, election_id="other")
    assert not verify_receipt(b_identity, "a", wrong_election, chain)
    chain.blocks[1].payload.candidate_id = "b"  # tamper: receipt must now fail
    assert not verify_receipt(b_identity, "a", receipt, chain)
