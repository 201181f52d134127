"""Administrative command line: initialize an election, manage candidates,
run the service, verify ledgers, tally, and export audit reports.

Exit codes are a stable contract: 0 success, 1 integrity or validation
failure, 2 usage error.
"""

import json
import sys
from pathlib import Path

import click
from filelock import FileLock, Timeout

from .analysis import DEFAULT_SEED, DEFAULT_TRIALS, full_report, write_report_files
from .election import Election, verification_report
from .errors import IntegrityError, LoadError, ValidationError
from .ledger import ChainVerification, combined_hash, verify_chain
from .store import (
    DataStore,
    init_data_dir,
    load_state,
    parse_candidates,
)

EXIT_OK = 0
EXIT_INTEGRITY = 1
EXIT_USAGE = 2

LOCK_TIMEOUT_SECONDS = 0.5


def _usage_error(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _integrity_error(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INTEGRITY)


def _require_data_dir(data_dir: str) -> Path:
    path = Path(data_dir)
    if not path.is_dir():
        _usage_error(f"data directory {path} does not exist")
    return path


def _load_or_die(data_dir: str):
    """Load persisted state; usage errors exit 2, integrity failures exit 1."""
    path = _require_data_dir(data_dir)
    store = DataStore(path)
    if not store.config_path.exists():
        _usage_error(f"data directory {path} is not initialized (run init)")
    try:
        return load_state(path)
    except LoadError as exc:
        _integrity_error(str(exc))


def _hold_lock(path: Path) -> FileLock:
    lock = FileLock(str(path / ".lock"))
    try:
        lock.acquire(timeout=LOCK_TIMEOUT_SECONDS)
    except Timeout:
        _usage_error(f"data directory {path} is locked by a running service")
    return lock


@click.group()
def main():
    """Hash-chained ballot box: election administration tool."""


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--election-id", required=True)
@click.option(
    "--candidates-file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON array of {candidate_id, display_name}.",
)
@click.option("--validators", default=4, show_default=True)
@click.option("--image-count", default=4, show_default=True)
@click.option("--admin-token", default=None, help="Generated when omitted.")
@click.option("--port", default=8080, show_default=True)
@click.option("--session-ttl", default=600, show_default=True)
def init(data_dir, election_id, candidates_file, validators, image_count,
         admin_token, port, session_ttl):
    """Create a fresh election data directory."""
    try:
        raw = json.loads(Path(candidates_file).read_text(encoding="utf-8"))
        candidates = parse_candidates(raw, source=candidates_file)
    except (json.JSONDecodeError, LoadError) as exc:
        _usage_error(str(exc))
    try:
        genesis = init_data_dir(
            data_dir,
            election_id=election_id,
            candidates=candidates,
            n_validators=validators,
            pattern_image_count=image_count,
            admin_token=admin_token,
            port=port,
            session_ttl_seconds=session_ttl,
        )
    except ValidationError as exc:
        _usage_error(str(exc))
    click.echo(f"initialized {data_dir} for election {election_id!r}")
    click.echo(f"genesis hash: {genesis.block_hash}")


@main.group()
def candidate():
    """Manage the candidate roster."""


@candidate.command("add")
@click.option("--data-dir", required=True, type=click.Path())
@click.argument("candidate_id")
@click.option("--display-name", default=None)
def candidate_add(data_dir, candidate_id, display_name):
    """Add one candidate to the roster."""
    path = _require_data_dir(data_dir)
    store = DataStore(path)
    if not store.config_path.exists():
        _usage_error(f"data directory {path} is not initialized (run init)")
    lock = _hold_lock(path)
    try:
        candidates = store.read_candidates()
        if any(c.candidate_id == candidate_id for c in candidates):
            _usage_error(f"duplicate candidate id {candidate_id!r}")
        try:
            raw = json.loads(store.candidates_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            _integrity_error(f"bad candidates file: {exc}")
        raw.append(
            {
                "candidate_id": candidate_id,
                "display_name": display_name or candidate_id,
            }
        )
        try:
            parse_candidates(raw, source=str(store.candidates_path))
        except LoadError as exc:
            _usage_error(str(exc))
        store.candidates_path.write_text(json.dumps(raw, indent=2) + "\n")
    except LoadError as exc:
        _integrity_error(str(exc))
    finally:
        lock.release()
    click.echo(f"added candidate {candidate_id!r}")


@candidate.command("list")
@click.option("--data-dir", required=True, type=click.Path())
def candidate_list(data_dir):
    """Print the candidate roster."""
    path = _require_data_dir(data_dir)
    store = DataStore(path)
    if not store.candidates_path.exists():
        _usage_error(f"data directory {path} is not initialized (run init)")
    try:
        candidates = store.read_candidates()
    except LoadError as exc:
        _integrity_error(str(exc))
    for c in candidates:
        click.echo(f"{c.candidate_id}\t{c.display_name}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Overrides the configured port.")
def serve(data_dir, host, port):
    """Run the HTTP service (holds the data-dir lock while running)."""
    import uvicorn

    from .service import create_app

    path = _require_data_dir(data_dir)
    lock = _hold_lock(path)
    try:
        state = _load_or_die(data_dir)
        election = Election(state)
        app = create_app(election)
        uvicorn.run(app, host=host, port=port or state.config.port)
    finally:
        lock.release()


def _chain_report(store: DataStore, chain_name: str) -> tuple[ChainVerification, str | None]:
    """Lenient verification of one on-disk chain, tolerant of tampering."""
    chain, bad_line = store.read_chain_lenient(chain_name)
    if bad_line is not None:
        return ChainVerification(False, bad_line, "unparseable"), None
    report = verify_chain(chain)
    digest = combined_hash(chain) if report.ok and chain.blocks else None
    return report, digest


def _echo_chain_report(label: str, report: ChainVerification, digest: str | None):
    if report.ok:
        click.echo(f"{label}: ok")
        if digest is not None:
            click.echo(f"{label} combined hash: {digest}")
    else:
        click.echo(
            f"{label}: FAILED ({report.reason} at index {report.first_bad_index})"
        )


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
def verify(data_dir):
    """Re-verify every block of both chains and print combined hashes."""
    path = _require_data_dir(data_dir)
    store = DataStore(path)
    if not store.config_path.exists():
        _usage_error(f"data directory {path} is not initialized (run init)")
    try:
        state = load_state(path)
    except LoadError as exc:
        # The state refused to load; fall back to a lenient read so the
        # report can still point at the first bad block.
        try:
            config = store.read_config()
            vote_chain_name = f"votes-{config.election_id}"
        except LoadError:
            vote_chain_name = None
        reg_report, reg_digest = _chain_report(store, "registry")
        _echo_chain_report("registry", reg_report, reg_digest)
        if vote_chain_name:
            vote_report, vote_digest = _chain_report(store, vote_chain_name)
            _echo_chain_report("votes", vote_report, vote_digest)
        click.echo(f"state: FAILED ({exc})")
        sys.exit(EXIT_INTEGRITY)
    report = verification_report(state.registration_chain, state.vote_chain)
    _echo_chain_report(
        "registry",
        ChainVerification(**report["registry"]),
        report["registry_combined_hash"],
    )
    _echo_chain_report(
        "votes", ChainVerification(**report["votes"]), report["votes_combined_hash"]
    )
    sys.exit(EXIT_OK if report["ok"] else EXIT_INTEGRITY)


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
def tally(data_dir):
    """Count votes per candidate."""
    state = _load_or_die(data_dir)
    try:
        result = Election(state).tally()
    except IntegrityError as exc:
        _integrity_error(str(exc))
    for candidate_id in sorted(result.counts):
        click.echo(f"{candidate_id}={result.counts[candidate_id]}")
    click.echo(f"total={result.total}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--trials", default=DEFAULT_TRIALS, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", default="report.json", show_default=True, type=click.Path())
def analyze(data_dir, trials, seed, out):
    """Run the hash-quality audit over the registration chain."""
    state = _load_or_die(data_dir)
    try:
        report = full_report(state.registration_chain, trials=trials, seed=seed)
    except (IntegrityError, ValidationError) as exc:
        _integrity_error(str(exc))
    paths = write_report_files(report, out)
    for line in report.headline_lines():
        click.echo(line)
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
def export(data_dir, out):
    """Write a self-contained audit bundle: chains, verification, tally,
    and the hash-quality report."""
    state = _load_or_die(data_dir)
    election = Election(state)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def dump(name: str, data) -> None:
        p = out_dir / name
        p.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
        written.append(p)

    for label, chain in (
        ("registry", state.registration_chain),
        ("votes", state.vote_chain),
    ):
        ok = verify_chain(chain).ok
        dump(
            f"chain_{label}.json",
            {
                "chain": label,
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
            },
        )
    dump("verification.json", election.verification_report())
    try:
        dump("tally.json", election.tally().to_dict())
    except IntegrityError as exc:
        _integrity_error(str(exc))
    if state.registration_chain.blocks:
        report = full_report(state.registration_chain)
        written.extend(write_report_files(report, out_dir / "analysis.json"))
    for p in written:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
