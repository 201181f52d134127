"""Hash-chained voting ledger with multi-factor voter authentication.

Subpackages cover the byte-level hash primitives, the three-factor voter
identity (document, fingerprint minutiae, picture-rotation pattern), the
tamper-evident block chain, quorum-validated vote casting, durable storage,
an HTTP API, an admin CLI, and a hash-quality audit suite.
"""

__version__ = "0.1.0"
