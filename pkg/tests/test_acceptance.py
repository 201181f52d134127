"""Acceptance gate: one test per release criterion, each printing a PASS/FAIL
line with the measured values at the stated tolerance.

Run with `pytest -v` (the suite's -rA flag surfaces the printed lines).
"""

import base64
import copy
import hashlib
import random
import string
import threading
import time

import pytest
from fastapi.testclient import TestClient

from ballotchain.analysis import (
    binary_entropy,
    bit_entropy,
    chain_avalanche,
    collision_scan,
    full_report,
    hamming_weight_pct,
)
from ballotchain.consensus import (
    Decision,
    FaultProfile,
    Proposal,
    QuorumConfig,
    Validator,
    run_round,
)
from ballotchain.election import Candidate, Election, Receipt
from ballotchain.errors import DuplicateVoteError
from ballotchain.hashing import blake2b512, sha256
from ballotchain.ledger import (
    Chain,
    RegistrationPayload,
    append_block,
    combined_hash,
    make_genesis,
    verify_chain,
)
from ballotchain.pattern import ALLOWED_ANGLES, RotationPattern, parse_pattern, serialize_pattern
from ballotchain.service import create_app
from ballotchain.store import init_data_dir, load_state

from .conftest import GENESIS_PATTERN, make_factors
from .test_ledger import reg_payload, vote_payload


def report(name: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line)
    assert ok, line


# --- criterion 1: hash correctness ------------------------------------------

SHA256_VECTORS = {
    b"": "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
    b"abc": "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
}
BLAKE2B_VECTORS = {
    b"": (
        "786a02f742015903c6c6fd852552d272912f4740e15847618a86e217f71f5419"
        "d25e1031afee585313896444934eb04b903a685b1448b755d56f701afe9be2ce"
    ),
    b"abc": (
        "ba80a53f981c4d0d6a2797b69f12f6e94c212f14685ac4b74b12bb6fdbffa2d1"
        "7d87c5392aab792dc252d5de4533cc9518d38aa8dbf1925ab92386edd4009923"
    ),
}


def test_hash_correctness():
    start = time.monotonic()
    ok = all(sha256(m) == d for m, d in SHA256_VECTORS.items()) and all(
        blake2b512(m) == d for m, d in BLAKE2B_VECTORS.items()
    )
    elapsed = time.monotonic() - start
    report(
        "hash correctness",
        ok and elapsed < 1.0,
        f"4/4 published vectors exact in {elapsed:.3f}s (< 1 s)",
    )


# --- criterion 2: pattern fidelity -------------------------------------------

def test_pattern_fidelity():
    start = time.monotonic()
    import itertools

    failures = 0
    seen = set()
    for angles in itertools.product(ALLOWED_ANGLES, repeat=4):
        s = serialize_pattern(RotationPattern.from_angles(angles))
        if parse_pattern(s, 4).angles != angles:
            failures += 1
        seen.add(s)
    published = (
        "PhotoWall1_90_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90",
        "PhotoWall1_270_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90",
    )
    published_ok = all(
        serialize_pattern(parse_pattern(p, 4)) == p and p in seen for p in published
    )
    elapsed = time.monotonic() - start
    report(
        "pattern fidelity",
        failures == 0 and len(seen) == 256 and published_ok and elapsed < 1.0,
        f"256/256 round-trips exact, both published strings included, {elapsed:.3f}s (< 1 s)",
    )


# --- criterion 3: chain tamper evidence ---------------------------------------

def _mutate_one_char(rng: random.Random, chain: Chain) -> int:
    """Apply one random single-character mutation; returns the block index."""
    i = rng.randrange(len(chain.blocks))
    block = chain.blocks[i]
    choices = ["previous_hash", "block_hash", "payload", "index"]
    what = rng.choice(choices)
    if what == "index":
        block.index = block.index + rng.choice([1, 2, 7])
        return i
    if what == "payload":
        payload = block.payload
        if isinstance(payload, RegistrationPayload):
            field = rng.choice(["aadhaar_hash", "fingerprint_hash", "photo_rotation_pattern"])
        else:
            field = rng.choice(["b_vote", "candidate_id", "election_id", "cast_at"])
        original = getattr(payload, field)
    else:
        field = what
        original = getattr(block, field)
    pos = rng.randrange(len(original))
    alphabet = string.digits + string.ascii_letters
    replacement = rng.choice(alphabet.replace(original[pos], ""))
    mutated = original[:pos] + replacement + original[pos + 1 :]
    if what == "payload":
        setattr(block.payload, field, mutated)
    else:
        setattr(block, field, mutated)
    return i


def test_chain_tamper_evidence():
    start = time.monotonic()
    rng = random.Random(20260818)
    chain = Chain()
    chain.blocks.append(make_genesis(reg_payload("genesis")))
    for i in range(1, 50):
        append_block(chain, reg_payload(f"r{i}") if i % 2 else vote_payload(f"v{i}"))
    assert verify_chain(chain).ok

    detected = 0
    correct_index = 0
    trials = 1000
    for _ in range(trials):
        target = copy.deepcopy(chain)
        i = _mutate_one_char(rng, target)
        result = verify_chain(target)
        if not result.ok:
            detected += 1
            if result.first_bad_index == i:
                correct_index += 1
    elapsed = time.monotonic() - start
    report(
        "chain tamper evidence",
        detected == trials and correct_index == trials and elapsed < 10.0,
        f"{detected}/{trials} detected, {correct_index}/{trials} at the correct "
        f"first-bad-index, {elapsed:.2f}s (< 10 s)",
    )


# --- criterion 4: headline metric reproduction --------------------------------

def test_metric_reproduction():
    start = time.monotonic()
    rng = random.Random(51333)
    entropies, weights = [], []
    digests = []
    for c in range(100):
        chain = Chain()
        chain.blocks.append(make_genesis(reg_payload(f"chain-{c}-genesis")))
        for i in range(1, rng.randint(3, 7)):
            append_block(chain, reg_payload(f"chain-{c}-voter-{i}"))
        digest = combined_hash(chain)
        digests.append(digest)
        digests.extend(b.block_hash for b in chain.blocks)
        entropies.append(bit_entropy(digest))
        weights.append(hamming_weight_pct(digest))
    mean_entropy = sum(entropies) / len(entropies)
    mean_weight = sum(weights) / len(weights)
    collision_free = len(set(digests)) == len(digests)
    elapsed = time.monotonic() - start
    report(
        "headline metric reproduction",
        mean_entropy >= 0.99
        and 45.0 <= mean_weight <= 55.0
        and collision_free
        and elapsed < 30.0,
        f"mean entropy {mean_entropy:.4f} (>= 0.99, published 0.9993), mean Hamming "
        f"weight {mean_weight:.2f}% (in [45, 55], published 51.56%), collision-free "
        f"over {len(digests)} digests (published True), {elapsed:.2f}s (< 30 s)",
    )


# --- criterion 5: entropy/Hamming consistency ----------------------------------

def test_entropy_hamming_consistency():
    start = time.monotonic()
    worst = 0.0
    for i in range(200):
        digest = sha256(f"consistency-{i}".encode())
        ones = bin(int(digest, 16)).count("1")
        worst = max(worst, abs(bit_entropy(digest) - binary_entropy(ones / 256)))
    published_digest = f"{int('1' * 132 + '0' * 124, 2):064x}"
    published_entropy = bit_entropy(published_digest)
    published_weight = hamming_weight_pct(published_digest)
    reconciles = abs(published_entropy - 0.9993) < 1e-4 and abs(published_weight - 51.5625) < 1e-9
    elapsed = time.monotonic() - start
    report(
        "entropy/Hamming consistency",
        worst < 1e-12 and reconciles and elapsed < 1.0,
        f"max |bit_entropy - H(ones/256)| = {worst:.2e} over 200 digests (< 1e-12); "
        f"132/256-bit digest gives entropy {published_entropy:.5f} (0.9993 ± 1e-4) at "
        f"{published_weight:.2f}% weight, {elapsed:.3f}s (< 1 s)",
    )


# --- criterion 6: full-pipeline avalanche ---------------------------------------

def test_avalanche_pipeline():
    start = time.monotonic()
    chain = Chain()
    chain.blocks.append(make_genesis(reg_payload("avalanche-genesis")))
    for i in range(1, 5):
        append_block(chain, reg_payload(f"avalanche-{i}"))
    fraction = chain_avalanche(chain, trials=256)
    note = full_report(chain, trials=16).avalanche_note
    flagged = "0.78" in note and "not" in note.lower()
    elapsed = time.monotonic() - start
    report(
        "avalanche",
        0.45 <= fraction <= 0.55 and flagged and elapsed < 10.0,
        f"full-pipeline avalanche {fraction:.4f} over 256 trials (0.50 ± 0.05); the "
        f"published 0.78% figure is flagged as not reproduced in every report, "
        f"{elapsed:.2f}s (< 10 s)",
    )


# --- criterion 7: one identity, one vote ----------------------------------------

def test_one_identity_one_vote(tmp_path):
    start = time.monotonic()
    data_dir = tmp_path / "data"
    init_data_dir(data_dir, "gen-2026", [Candidate("a", "Alice"), Candidate("b", "Bob")])
    election = Election.open(data_dir)
    gid, template, pat = make_factors("contended-voter")
    b_identity = election.register(gid, template, pat)

    receipts, duplicates, surprises = [], [], []

    def attempt():
        try:
            receipts.append(election.cast_vote(b_identity, "a"))
        except DuplicateVoteError:
            duplicates.append(1)
        except Exception as exc:  # noqa: BLE001 - the criterion counts all outcomes
            surprises.append(exc)

    threads = [threading.Thread(target=attempt) for _ in range(100)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    committed_blocks = len(election.vote_chain.blocks) - 1  # sentinel excluded
    total = election.tally().total
    elapsed = time.monotonic() - start
    report(
        "one identity, one vote",
        len(receipts) == 1
        and len(duplicates) == 99
        and not surprises
        and committed_blocks == 1
        and total == committed_blocks
        and elapsed < 10.0,
        f"100 concurrent attempts: {len(receipts)} committed, {len(duplicates)} "
        f"duplicate-vote rejections, tally total {total} == {committed_blocks} "
        f"committed blocks, {elapsed:.2f}s (< 10 s)",
    )


# --- criterion 8: quorum safety ---------------------------------------------------

def _fresh_validators(faults):
    return [
        Validator(
            validator_id=i,
            election_id="gen-2026",
            candidate_ids={"a", "b"},
            image_count=4,
            profile=faults.get(i, FaultProfile.HONEST),
        )
        for i in range(4)
    ]


def test_quorum_safety():
    import itertools

    start = time.monotonic()
    config = QuorumConfig(n_validators=4)
    faults = (FaultProfile.CRASH, FaultProfile.ALWAYS_REJECT, FaultProfile.CORRUPT_HASH)
    cases = 0
    for fault, position in itertools.product(faults, range(4)):
        validators = _fresh_validators({position: fault})
        chain = Chain()
        valid = Proposal(reg_payload("valid"), previous_hash=chain.head_hash)
        outcome = run_round(chain, valid, validators, config).outcome
        assert outcome is Decision.COMMIT, f"valid proposal blocked by {fault} at {position}"
        # resubmitting the same registration is invalid (duplicate)
        invalid = Proposal(reg_payload("valid"), previous_hash=chain.head_hash)
        outcome = run_round(chain, invalid, validators, config).outcome
        assert outcome is Decision.ABORT, f"invalid proposal committed with {fault} at {position}"
        cases += 1

    two_rejectors = _fresh_validators(
        {0: FaultProfile.ALWAYS_REJECT, 1: FaultProfile.ALWAYS_REJECT}
    )
    chain = Chain()
    valid = Proposal(reg_payload("threshold-check"), previous_hash=chain.head_hash)
    aborted = run_round(chain, valid, two_rejectors, config).outcome is Decision.ABORT
    elapsed = time.monotonic() - start
    report(
        "quorum safety",
        cases == 12 and aborted and elapsed < 5.0,
        f"12/12 single-fault placements commit valid and refuse invalid proposals; "
        f"2 ALWAYS_REJECT of 4 aborts a valid proposal (threshold 3), {elapsed:.2f}s (< 5 s)",
    )


# --- criterion 9: durability --------------------------------------------------------

def test_durability(tmp_path):
    start = time.monotonic()
    data_dir = tmp_path / "data"
    init_data_dir(data_dir, "gen-2026", [Candidate("a", "Alice"), Candidate("b", "Bob")])
    election = Election.open(data_dir)
    rng = random.Random(99)
    voters = []
    checks = 0
    for i in range(20):
        if voters and rng.random() < 0.5:
            b_identity = voters.pop(rng.randrange(len(voters)))
            try:
                election.cast_vote(b_identity, rng.choice(["a", "b"]))
            except DuplicateVoteError:
                pass
        else:
            gid, template, pat = make_factors(f"durable-{i}")
            voters.append(election.register(gid, template, pat))

        # simulate a crash: re-read everything from disk with fresh objects
        reloaded = load_state(data_dir)
        assert combined_hash(reloaded.registration_chain) == combined_hash(
            election.registration_chain
        )
        assert combined_hash(reloaded.vote_chain) == combined_hash(election.vote_chain)
        assert Election(reloaded).tally().counts == election.tally().counts
        checks += 1
    elapsed = time.monotonic() - start
    report(
        "durability",
        checks == 20 and elapsed < 30.0,
        f"20/20 kill-and-reload cycles reproduced identical combined hashes and "
        f"tallies, {elapsed:.2f}s (< 30 s)",
    )


# --- criterion 10: end-to-end API ------------------------------------------------------

def test_end_to_end_api(tmp_path):
    start = time.monotonic()
    data_dir = tmp_path / "data"
    init_data_dir(
        data_dir,
        "gen-2026",
        [Candidate("a", "Alice"), Candidate("b", "Bob")],
        admin_token="acceptance-admin",
    )
    client = TestClient(create_app(Election.open(data_dir)))
    body = {
        "id_kind": "AADHAAR",
        "id_document": base64.b64encode(b"acceptance voter document").decode(),
        "fingerprint": base64.b64encode(b"acceptance voter fingerprint").decode(),
        "pattern": GENESIS_PATTERN,
    }
    b_identity = client.post("/api/register", json=body).json()["b_identity"]
    token = client.post("/api/login", json=body).json()["token"]
    vote = client.post("/api/vote", json={"token": token, "candidate_id": "a"})
    receipt = Receipt.from_dict(vote.json()["receipt"])

    receipt_ok = Election.open(data_dir).verify_receipt(b_identity, "a", receipt)

    token2 = client.post("/api/login", json=body).json()["token"]
    second = client.post("/api/vote", json={"token": token2, "candidate_id": "b"})

    wrong = dict(body, pattern="PhotoWall1_0_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90")
    wrong_login = client.post("/api/login", json=wrong)

    blocks = client.get("/api/chain/registry").json()["blocks"]
    shape_ok = all(
        set(b) == {"index", "data", "previous_hash", "block_hash"} for b in blocks
    ) and set(blocks[0]["data"]) == {
        "aadhaar_hash",
        "fingerprint_hash",
        "photo_rotation_pattern",
    }
    elapsed = time.monotonic() - start
    report(
        "end-to-end API",
        vote.status_code == 200
        and receipt_ok
        and second.status_code == 409
        and wrong_login.status_code == 401
        and shape_ok
        and elapsed < 10.0,
        f"register→login→vote 200 with verifiable receipt; second vote {second.status_code} "
        f"(409); wrong-pattern login {wrong_login.status_code} (401); chain blocks carry the "
        f"published field set, {elapsed:.2f}s (< 10 s)",
    )
