"""HTTP+JSON API: registration, login, voting, and public audit endpoints.

The service is the only mutation path into the ledgers; every write funnels
through the election orchestrator's consensus round and single-writer lock.
Authentication failures are deliberately uniform: no response distinguishes
which factor failed or whether an identity exists.
"""

import base64
import binascii
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .analysis import DEFAULT_SEED, DEFAULT_TRIALS, full_report
from .election import Election
from .errors import (
    AuthorizationError,
    ConsensusAbort,
    DuplicateRegistrationError,
    DuplicateVoteError,
    IntegrityError,
    ValidationError,
)
from .identity import (
    GovernmentId,
    IdKind,
    MinutiaeTemplate,
    ToyMinutiaeExtractor,
)
from .ledger import combined_hash, verify_chain
from .pattern import RotationPattern, parse_pattern

SESSION_TOKEN_BYTES = 32
GENERIC_AUTH_FAILURE = "authentication failed"


@dataclass
class Session:
    token: str
    b_identity: str
    expires_at: datetime


class SessionManager:
    """In-memory session table with TTL expiry and single-use consumption."""

    def __init__(self, ttl_seconds: int, clock):
        self.ttl = timedelta(seconds=ttl_seconds)
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def issue(self, b_identity: str) -> Session:
        token = secrets.token_hex(SESSION_TOKEN_BYTES)
        session = Session(token, b_identity, self.clock() + self.ttl)
        with self._lock:
            self._sessions[token] = session
        return session

    def peek(self, token: str) -> Session | None:
        """Return the live session for token, dropping it if expired."""
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if self.clock() >= session.expires_at:
                del self._sessions[token]
                return None
            return session

    def consume(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)


class RegisterRequest(BaseModel):
    id_kind: str
    id_document: str
    fingerprint: dict | str
    pattern: str


class LoginRequest(BaseModel):
    id_kind: str
    id_document: str
    fingerprint: dict | str
    pattern: str


class VoteRequest(BaseModel):
    token: str
    candidate_id: str


def _decode_factors(req, image_count: int):
    """Turn the wire encoding into domain objects; raises ValidationError."""
    try:
        kind = IdKind(req.id_kind)
    except ValueError:
        raise ValidationError(f"unknown id_kind {req.id_kind!r}") from None
    try:
        document = base64.b64decode(req.id_document, validate=True)
    except (binascii.Error, ValueError):
        raise ValidationError("id_document is not valid base64") from None
    gid = GovernmentId(kind=kind, document_bytes=document)
    if isinstance(req.fingerprint, dict):
        template = MinutiaeTemplate.from_json_dict(req.fingerprint)
    else:
        try:
            raw = base64.b64decode(req.fingerprint, validate=True)
        except (binascii.Error, ValueError):
            raise ValidationError("fingerprint is not valid base64") from None
        template = ToyMinutiaeExtractor().extract(raw)
    pat = parse_pattern(req.pattern, image_count)
    return gid, template, pat


def create_app(election: Election) -> FastAPI:
    config = election.config
    app = FastAPI(title="ballotchain", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.ui_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionManager(config.session_ttl_seconds, election.clock)
    app.state.election = election
    app.state.sessions = sessions

    def require_admin(request: Request) -> None:
        header = request.headers.get("authorization", "")
        expected = f"Bearer {config.admin_token}"
        if not config.admin_token or not secrets.compare_digest(header, expected):
            raise HTTPException(status_code=403, detail="admin token required")

    @app.post("/api/register")
    def register(req: RegisterRequest):
        try:
            gid, template, pat = _decode_factors(req, config.pattern_image_count)
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            b_identity = election.register(gid, template, pat)
        except DuplicateRegistrationError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ConsensusAbort as exc:
            raise HTTPException(
                status_code=503,
                detail={"message": str(exc), "reasons": exc.reasons},
            ) from exc
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"b_identity": b_identity}

    @app.post("/api/login")
    def login(req: LoginRequest):
        # Malformed factors and mismatched factors are indistinguishable on
        # purpose: a 401 here must not leak what exists or what failed.
        try:
            gid, template, pat = _decode_factors(req, config.pattern_image_count)
            b_identity = election.authenticate(gid, template, pat)
        except ValidationError:
            b_identity = None
        if b_identity is None:
            raise HTTPException(status_code=401, detail=GENERIC_AUTH_FAILURE)
        session = sessions.issue(b_identity)
        return {
            "token": session.token,
            "expires_at": session.expires_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        }

    @app.post("/api/vote")
    def vote(req: VoteRequest):
        session = sessions.peek(req.token)
        if session is None:
            raise HTTPException(status_code=401, detail=GENERIC_AUTH_FAILURE)
        if req.candidate_id not in election.candidate_ids():
            raise HTTPException(
                status_code=422, detail=f"unknown candidate {req.candidate_id!r}"
            )
        try:
            receipt = election.cast_vote(session.b_identity, req.candidate_id)
        except DuplicateVoteError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except AuthorizationError as exc:
            raise HTTPException(status_code=401, detail=GENERIC_AUTH_FAILURE) from exc
        except ConsensusAbort as exc:
            raise HTTPException(
                status_code=503,
                detail={"message": str(exc), "reasons": exc.reasons},
            ) from exc
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        sessions.consume(req.token)
        return {"receipt": receipt.to_dict()}

    @app.get("/api/chain/{chain_name}")
    def chain_listing(chain_name: str):
        if chain_name == "registry":
            chain = election.registration_chain
        elif chain_name == "votes":
            chain = election.vote_chain
        else:
            raise HTTPException(status_code=404, detail="unknown chain")
        ok = verify_chain(chain).ok
        return {
            "chain": chain_name,
            "blocks": [
                {
                    "index": b.index,
                    "data": b.payload.to_dict(),
                    "previous_hash": b.previous_hash,
                    "block_hash": b.block_hash,
                }
                for b in chain.blocks
            ],
            "combined_hash": combined_hash(chain) if ok and chain.blocks else None,
        }

    @app.get("/api/verify")
    def verify():
        return election.verification_report()

    @app.get("/api/tally", dependencies=[Depends(require_admin)])
    def tally():
        return election.tally().to_dict()

    @app.get("/api/analysis", dependencies=[Depends(require_admin)])
    def analysis(
        trials: int = Query(default=DEFAULT_TRIALS, ge=1, le=65536),
        seed: int = Query(default=DEFAULT_SEED),
    ):
        try:
            report = full_report(
                election.registration_chain, trials=trials, seed=seed
            )
        except (IntegrityError, ValidationError) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return report.to_dict()

    return app
