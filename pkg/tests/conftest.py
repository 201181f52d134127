import pytest

from ballotchain.election import Candidate, Election
from ballotchain.identity import GovernmentId, IdKind, ToyMinutiaeExtractor
from ballotchain.pattern import parse_pattern
from ballotchain.store import init_data_dir

GENESIS_PATTERN = "PhotoWall1_90_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90"
ADMIN_TOKEN = "test-admin-token"


def make_factors(tag: str, pattern: str = GENESIS_PATTERN, kind: IdKind = IdKind.AADHAAR):
    """Deterministic factor triple for one synthetic voter."""
    gid = GovernmentId(kind=kind, document_bytes=f"document scan for {tag}".encode())
    template = ToyMinutiaeExtractor().extract(f"fingerprint ridge data {tag}".encode() * 3)
    pat = parse_pattern(pattern, pattern.count("PhotoWall"))
    return gid, template, pat


@pytest.fixture
def data_dir(tmp_path):
    d = tmp_path / "data"
    init_data_dir(
        d,
        election_id="gen-2026",
        candidates=[Candidate("a", "Alice"), Candidate("b", "Bob")],
        admin_token=ADMIN_TOKEN,
    )
    return d


@pytest.fixture
def election(data_dir):
    return Election.open(data_dir)
