"""Durable persistence: append-only JSON-lines ledgers, the off-chain voter
registry, election config and candidates, and directory-level replication.

Data directory layout:
    config.json
    candidates.json
    registry.jsonl            append-only register/vote events
    chains/registry.jsonl     registration chain, one block per line
    chains/votes-<id>.jsonl   vote chain, one block per line
    audit/consensus.jsonl     verdict traces, one round per line

Every acknowledged block is flushed and fsynced before the commit returns.
Loading re-verifies both chains and cross-checks the registry against chain
contents; any inconsistency refuses to start.
"""

import json
import os
import secrets
from dataclasses import dataclass, field
from pathlib import Path

from .election import Candidate, bind_vote, manifest_genesis_payload
from .errors import LoadError, StorageError, ValidationError
from .hashing import sha256_utf8
from .identity import compose_identity
from .ledger import (
    Block,
    Chain,
    canonical_json,
    make_genesis,
    verify_chain,
)

CONFIG_FILE = "config.json"
CANDIDATES_FILE = "candidates.json"
REGISTRY_FILE = "registry.jsonl"
CHAINS_DIR = "chains"
AUDIT_DIR = "audit"
AUDIT_FILE = "consensus.jsonl"
LOCK_FILE = ".lock"

DEFAULT_PORT = 8080
DEFAULT_SESSION_TTL = 600


@dataclass(frozen=True)
class ElectionConfig:
    election_id: str
    n_validators: int = 4
    pattern_image_count: int = 4
    admin_token: str = ""
    session_ttl_seconds: int = DEFAULT_SESSION_TTL
    port: int = DEFAULT_PORT
    ui_origin: str = "*"

    def __post_init__(self):
        if not self.election_id:
            raise ValidationError("election_id must be non-empty")
        if self.n_validators < 1:
            raise ValidationError("n_validators must be >= 1")
        if self.pattern_image_count < 1:
            raise ValidationError("pattern_image_count must be >= 1")

    def to_dict(self) -> dict:
        return {
            "election_id": self.election_id,
            "n_validators": self.n_validators,
            "pattern_image_count": self.pattern_image_count,
            "admin_token": self.admin_token,
            "session_ttl_seconds": self.session_ttl_seconds,
            "port": self.port,
            "ui_origin": self.ui_origin,
        }


@dataclass
class RegistryEntry:
    b_identity: str
    registration_block: int
    id_kind: str
    elections_voted: set[str] = field(default_factory=set)


@dataclass
class SystemState:
    """Everything load_state reconstructs from disk."""

    store: "DataStore"
    initialized: bool
    config: ElectionConfig | None = None
    candidates: list[Candidate] = field(default_factory=list)
    registration_chain: Chain = field(default_factory=Chain)
    vote_chain: Chain = field(default_factory=Chain)
    registry: dict[str, RegistryEntry] = field(default_factory=dict)


class DataStore:
    """File-level persistence for one data directory. Single writer; the
    committing authority must serialize all mutating calls."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self._next_index: dict[str, int] = {}

    # -- paths ---------------------------------------------------------

    @property
    def config_path(self) -> Path:
        return self.data_dir / CONFIG_FILE

    @property
    def candidates_path(self) -> Path:
        return self.data_dir / CANDIDATES_FILE

    @property
    def registry_path(self) -> Path:
        return self.data_dir / REGISTRY_FILE

    def chain_path(self, chain_name: str) -> Path:
        return self.data_dir / CHAINS_DIR / f"{chain_name}.jsonl"

    @property
    def audit_path(self) -> Path:
        return self.data_dir / AUDIT_DIR / AUDIT_FILE

    @property
    def lock_path(self) -> Path:
        return self.data_dir / LOCK_FILE

    # -- writes --------------------------------------------------------

    def _append_line(self, path: Path, payload: dict) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        line = canonical_json(payload).decode("utf-8")
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"append to {path} failed: {exc}") from exc

    def persist_block(self, chain_name: str, block: Block) -> None:
        """Append one block line; flushed to stable storage before return."""
        expected = self._next_index.get(chain_name, 0)
        if block.index != expected:
            raise StorageError(
                f"block index {block.index} is not the next block of "
                f"{chain_name} (expected {expected})"
            )
        self._append_line(self.chain_path(chain_name), block.to_dict())
        self._next_index[chain_name] = expected + 1

    def record_registration(
        self, b_identity: str, registration_block: int, id_kind: str
    ) -> RegistryEntry:
        self._append_line(
            self.registry_path,
            {
                "type": "register",
                "b_identity": b_identity,
                "registration_block": registration_block,
                "id_kind": id_kind,
            },
        )
        return RegistryEntry(b_identity, registration_block, id_kind)

    def record_vote(self, b_identity: str, election_id: str) -> None:
        self._append_line(
            self.registry_path,
            {"type": "vote", "b_identity": b_identity, "election_id": election_id},
        )

    def append_audit_trace(self, trace: dict) -> None:
        self._append_line(self.audit_path, trace)

    # -- reads ---------------------------------------------------------

    def read_chain(self, chain_name: str) -> Chain:
        """Strict parse + full verification; any fault is a LoadError."""
        path = self.chain_path(chain_name)
        chain = Chain()
        if not path.exists():
            return chain
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    chain.blocks.append(Block.from_dict(json.loads(line)))
                except (json.JSONDecodeError, ValidationError, KeyError) as exc:
                    raise LoadError(
                        f"bad block line: {exc}", str(path), lineno
                    ) from exc
        report = verify_chain(chain)
        if not report.ok:
            raise LoadError(
                f"chain verification failed: {report.reason} at index "
                f"{report.first_bad_index}",
                str(path),
                report.first_bad_index + 1,
            )
        self._next_index[chain_name] = len(chain.blocks)
        return chain

    def read_chain_lenient(self, chain_name: str) -> tuple[Chain, int | None]:
        """Best-effort parse for audit tooling: returns the chain plus the
        0-based index of the first unparseable line, if any. Blocks whose
        payloads fail schema checks are kept with their raw dicts so hash
        verification can still point at them."""
        path = self.chain_path(chain_name)
        chain = Chain()
        if not path.exists():
            return chain, None
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                    block = Block(
                        index=int(data["index"]),
                        payload=_OpaquePayload(data["payload"]),
                        previous_hash=str(data["previous_hash"]),
                        block_hash=str(data["block_hash"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    return chain, i
                chain.blocks.append(block)
        return chain, None

    def read_config(self) -> ElectionConfig:
        try:
            with open(self.config_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise LoadError(f"cannot read config: {exc}", str(self.config_path)) from exc
        data.pop("data_dir", None)
        try:
            return ElectionConfig(**data)
        except (TypeError, ValidationError) as exc:
            raise LoadError(f"bad config: {exc}", str(self.config_path)) from exc

    def read_candidates(self) -> list[Candidate]:
        try:
            with open(self.candidates_path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise LoadError(
                f"cannot read candidates: {exc}", str(self.candidates_path)
            ) from exc
        return parse_candidates(raw, source=str(self.candidates_path))

    # -- replication -----------------------------------------------------

    def state_files(self) -> list[Path]:
        """Relative paths of every file that belongs in a replica."""
        files = [Path(CONFIG_FILE), Path(CANDIDATES_FILE), Path(REGISTRY_FILE)]
        chains_dir = self.data_dir / CHAINS_DIR
        if chains_dir.is_dir():
            files.extend(
                Path(CHAINS_DIR) / p.name for p in sorted(chains_dir.glob("*.jsonl"))
            )
        if self.audit_path.exists():
            files.append(Path(AUDIT_DIR) / AUDIT_FILE)
        return [f for f in files if (self.data_dir / f).exists()]

    def replicate(self, replica_dirs: list) -> "ReplicationReport":
        """Copy state files to each replica and verify byte-equality.

        Append-only files on a replica may lag the primary (they get
        extended); a replica file that is not a byte-prefix of the primary
        is reported as a mismatch and left untouched, never overwritten.
        """
        results = []
        for replica in replica_dirs:
            replica = Path(replica)
            file_reports = []
            ok = True
            for rel in self.state_files():
                src = self.data_dir / rel
                dst = replica / rel
                primary_bytes = src.read_bytes()
                if dst.exists():
                    replica_bytes = dst.read_bytes()
                    if replica_bytes != primary_bytes[: len(replica_bytes)]:
                        file_reports.append({"file": str(rel), "status": "mismatch"})
                        ok = False
                        continue
                dst.parent.mkdir(parents=True, exist_ok=True)
                dst.write_bytes(primary_bytes)
                status = "ok" if dst.read_bytes() == primary_bytes else "mismatch"
                ok = ok and status == "ok"
                file_reports.append({"file": str(rel), "status": status})
            results.append({"replica": str(replica), "ok": ok, "files": file_reports})
        return ReplicationReport(results)


class _OpaquePayload:
    """Raw payload dict used by the lenient read path; hashes like the
    original bytes but skips schema checks."""

    def __init__(self, data):
        self._data = data

    def to_dict(self):
        return self._data


@dataclass(frozen=True)
class ReplicationReport:
    replicas: list[dict]

    @property
    def all_ok(self) -> bool:
        return all(r["ok"] for r in self.replicas)


def parse_candidates(raw, source: str = "candidates") -> list[Candidate]:
    if not isinstance(raw, list) or not raw:
        raise LoadError("candidates must be a non-empty JSON array", source)
    seen = set()
    candidates = []
    for item in raw:
        try:
            candidate = Candidate(
                candidate_id=item["candidate_id"],
                display_name=item.get("display_name", item["candidate_id"]),
            )
        except (TypeError, KeyError, ValidationError) as exc:
            raise LoadError(f"bad candidate entry {item!r}: {exc}", source) from exc
        if candidate.candidate_id in seen:
            raise LoadError(
                f"duplicate candidate id {candidate.candidate_id!r}", source
            )
        seen.add(candidate.candidate_id)
        candidates.append(candidate)
    return candidates


def init_data_dir(
    data_dir,
    election_id: str,
    candidates: list[Candidate],
    n_validators: int = 4,
    pattern_image_count: int = 4,
    admin_token: str | None = None,
    port: int = DEFAULT_PORT,
    session_ttl_seconds: int = DEFAULT_SESSION_TTL,
) -> Block:
    """Create a fresh data directory: config, candidates, and the vote
    chain's sentinel manifest genesis. Returns the genesis block."""
    data_dir = Path(data_dir)
    if data_dir.exists() and any(data_dir.iterdir()):
        raise ValidationError(f"data directory {data_dir} is not empty")
    seen = set()
    for c in candidates:
        if c.candidate_id in seen:
            raise ValidationError(f"duplicate candidate id {c.candidate_id!r}")
        seen.add(c.candidate_id)
    config = ElectionConfig(
        election_id=election_id,
        n_validators=n_validators,
        pattern_image_count=pattern_image_count,
        admin_token=admin_token or secrets.token_hex(16),
        session_ttl_seconds=session_ttl_seconds,
        port=port,
    )
    store = DataStore(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    (data_dir / CHAINS_DIR).mkdir()
    (data_dir / AUDIT_DIR).mkdir()
    config_dict = config.to_dict()
    config_dict["data_dir"] = str(data_dir)
    store.config_path.write_text(json.dumps(config_dict, indent=2) + "\n")
    store.candidates_path.write_text(
        json.dumps([c.to_dict() for c in candidates], indent=2) + "\n"
    )
    genesis = make_genesis(
        manifest_genesis_payload(election_id, n_validators, pattern_image_count)
    )
    store.persist_block(f"votes-{election_id}", genesis)
    return genesis


def load_state(data_dir) -> SystemState:
    """Read and re-verify everything; refuse to start on any inconsistency.

    An empty or config-less directory loads as an uninitialized fresh state.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise LoadError("data directory does not exist", str(data_dir))
    store = DataStore(data_dir)
    if not store.config_path.exists():
        return SystemState(store=store, initialized=False)

    config = store.read_config()
    candidates = store.read_candidates()
    registration_chain = store.read_chain("registry")
    vote_chain_name = f"votes-{config.election_id}"
    vote_chain = store.read_chain(vote_chain_name)

    if not vote_chain.blocks:
        raise LoadError(
            "vote chain is missing its sentinel genesis (init required)",
            str(store.chain_path(vote_chain_name)),
        )
    expected_genesis = manifest_genesis_payload(
        config.election_id, config.n_validators, config.pattern_image_count
    )
    if vote_chain.blocks[0].payload.to_dict() != expected_genesis.to_dict():
        raise LoadError(
            "vote chain genesis does not match the election manifest",
            str(store.chain_path(vote_chain_name)),
            1,
        )

    registry = _replay_registry(store, registration_chain, vote_chain, candidates, config)
    return SystemState(
        store=store,
        initialized=True,
        config=config,
        candidates=candidates,
        registration_chain=registration_chain,
        vote_chain=vote_chain,
        registry=registry,
    )


def _replay_registry(
    store: DataStore,
    registration_chain: Chain,
    vote_chain: Chain,
    candidates: list[Candidate],
    config: ElectionConfig,
) -> dict[str, RegistryEntry]:
    """Rebuild the registry from its event log and cross-check every claim
    against chain contents."""
    path = store.registry_path
    registry: dict[str, RegistryEntry] = {}
    events = []
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append((lineno, json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise LoadError(f"bad registry line: {exc}", str(path), lineno) from exc

    unclaimed_votes: dict[str, int] = {}
    for block in vote_chain.blocks[1:]:
        unclaimed_votes[block.payload.b_vote] = block.index

    candidate_ids = [c.candidate_id for c in candidates]
    for lineno, event in events:
        kind = event.get("type")
        if kind == "register":
            b_identity = event.get("b_identity", "")
            block_index = event.get("registration_block", -1)
            if not isinstance(block_index, int) or not (
                0 <= block_index < len(registration_chain.blocks)
            ):
                raise LoadError(
                    f"registration block {block_index} out of range", str(path), lineno
                )
            payload = registration_chain.blocks[block_index].payload
            recomposed = compose_identity(
                payload.aadhaar_hash,
                payload.fingerprint_hash,
                sha256_utf8(payload.photo_rotation_pattern),
            )
            if recomposed != b_identity:
                raise LoadError(
                    f"registry entry does not recompose from registration block "
                    f"{block_index}",
                    str(path),
                    lineno,
                )
            if b_identity in registry:
                raise LoadError(
                    f"duplicate registration event for {b_identity[:12]}...",
                    str(path),
                    lineno,
                )
            registry[b_identity] = RegistryEntry(
                b_identity, block_index, str(event.get("id_kind", ""))
            )
        elif kind == "vote":
            b_identity = event.get("b_identity", "")
            election_id = event.get("election_id", "")
            entry = registry.get(b_identity)
            if entry is None:
                raise LoadError(
                    "vote event for an unregistered identity", str(path), lineno
                )
            if election_id != config.election_id:
                raise LoadError(
                    f"vote event for unknown election {election_id!r}", str(path), lineno
                )
            if election_id in entry.elections_voted:
                raise LoadError(
                    "duplicate vote event for one identity", str(path), lineno
                )
            matched = None
            for cid in candidate_ids:
                b_vote = bind_vote(b_identity, cid)
                if b_vote in unclaimed_votes:
                    matched = b_vote
                    break
            if matched is None:
                raise LoadError(
                    "registry claims a vote absent from the vote chain",
                    str(path),
                    lineno,
                )
            del unclaimed_votes[matched]
            entry.elections_voted.add(election_id)
        else:
            raise LoadError(f"unknown registry event type {kind!r}", str(path), lineno)

    if unclaimed_votes:
        index = min(unclaimed_votes.values())
        raise LoadError(
            f"vote block {index} is not claimed by any registry entry",
            str(store.chain_path(f"votes-{config.election_id}")),
            index + 1,
        )

    expected_registrations = len(registration_chain.blocks)
    if len(registry) != expected_registrations:
        raise LoadError(
            f"registry holds {len(registry)} entries but the registration chain "
            f"has {expected_registrations} blocks",
            str(path),
        )
    return registry
