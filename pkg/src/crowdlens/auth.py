"""API-key store backed by a single-file sqlite database.

Only a salted one-way hash of each secret is stored; the plaintext is printed
once at creation and never persisted or logged. Verification is constant-time
and burns a hash even for unknown key ids, so callers cannot distinguish
missing, revoked, and mismatched keys by timing or by response.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import secrets
import sqlite3
from contextlib import closing
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

logger = logging.getLogger(__name__)

_DUMMY_SALT = "00" * 16
_SCHEMA = """
CREATE TABLE IF NOT EXISTS api_keys (
    key_id TEXT PRIMARY KEY,
    salt TEXT NOT NULL,
    secret_hash TEXT NOT NULL,
    label TEXT NOT NULL,
    revoked INTEGER NOT NULL DEFAULT 0,
    created_at TEXT NOT NULL
)
"""


@dataclass(frozen=True)
class ApiKeyRecord:
    key_id: str
    secret_hash: str
    label: str
    revoked: bool
    created_at: str


class UnknownKeyError(KeyError):
    pass


def _digest(salt_hex: str, secret: str) -> str:
    return hashlib.sha256(bytes.fromhex(salt_hex) + secret.encode("utf-8")).hexdigest()


class KeyStore:
    def __init__(self, path: str):
        self.path = path
        with closing(self._connect()) as conn:
            conn.execute(_SCHEMA)
            conn.commit()

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.path, timeout=10)

    def add(self, label: str) -> tuple[str, str]:
        """Create a key; returns (key_id, secret). The secret is not stored."""
        key_id = "k" + secrets.token_hex(6)
        secret = secrets.token_urlsafe(32)
        salt = secrets.token_hex(16)
        created = datetime.now(tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        with closing(self._connect()) as conn:
            conn.execute(
                "INSERT INTO api_keys (key_id, salt, secret_hash, label, revoked, created_at)"
                " VALUES (?, ?, ?, ?, 0, ?)",
                (key_id, salt, _digest(salt, secret), label, created),
            )
            conn.commit()
        logger.info("created api key %s (%s)", key_id, label)
        return key_id, secret

    def verify(self, presented: Optional[str]) -> Optional[str]:
        """key_id when `<key_id>.<secret>` matches a live record, else None."""
        if not presented or "." not in presented:
            _digest(_DUMMY_SALT, presented or "")
            return None
        key_id, secret = presented.split(".", 1)
        with closing(self._connect()) as conn:
            row = conn.execute(
                "SELECT salt, secret_hash, revoked FROM api_keys WHERE key_id = ?",
                (key_id,),
            ).fetchone()
        if row is None:
            _digest(_DUMMY_SALT, secret)
            return None
        salt, stored_hash, revoked = row
        if not hmac.compare_digest(_digest(salt, secret), stored_hash):
            return None
        if revoked:
            return None
        return key_id

    def is_revoked(self, key_id: str) -> bool:
        with closing(self._connect()) as conn:
            row = conn.execute(
                "SELECT revoked FROM api_keys WHERE key_id = ?", (key_id,)
            ).fetchone()
        return row is None or bool(row[0])

    def revoke(self, key_id: str) -> None:
        with closing(self._connect()) as conn:
            updated = conn.execute(
                "UPDATE api_keys SET revoked = 1 WHERE key_id = ?", (key_id,)
            ).rowcount
            conn.commit()
        if not updated:
            raise UnknownKeyError(key_id)
        logger.info("revoked api key %s", key_id)

    def list_keys(self) -> list[ApiKeyRecord]:
        with closing(self._connect()) as conn:
            rows = conn.execute(
                "SELECT key_id, secret_hash, label, revoked, created_at"
                " FROM api_keys ORDER BY created_at, key_id"
            ).fetchall()
        return [
            ApiKeyRecord(key_id=r[0], secret_hash=r[1], label=r[2], revoked=bool(r[3]), created_at=r[4])
            for r in rows
        ]
