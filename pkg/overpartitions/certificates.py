"""
Certificate ledger for congruence families
SQLite store of search runs and the family certificates they produced
"""

import json
import sqlite3
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from .congruence import Certificate, CongruenceFamily

SCHEMA = """
CREATE TABLE IF NOT EXISTS run_log (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    run_type TEXT NOT NULL,
    m INTEGER,
    lmax INTEGER,
    status TEXT NOT NULL,
    families_found INTEGER DEFAULT 0,
    families_verified INTEGER DEFAULT 0,
    error_message TEXT,
    started_at TEXT NOT NULL,
    completed_at TEXT
);

CREATE TABLE IF NOT EXISTS certificates (
    m INTEGER NOT NULL,
    ell INTEGER NOT NULL,
    exponent INTEGER NOT NULL,
    epsilon INTEGER NOT NULL,
    eigenvalue INTEGER,
    status TEXT NOT NULL,
    sturm_bound INTEGER NOT NULL,
    checked_indices TEXT,
    cache_sha256 TEXT,
    created_at TEXT NOT NULL,
    PRIMARY KEY (m, ell, exponent, epsilon)
);
"""


class CertificateStore:
    def __init__(self, db_path: str = "opc_certificates.db"):
        """Open the ledger and create its tables"""
        self.db_path = str(db_path)
        self.connection = None
        self.connect()
        self.initialize_schema()

    def connect(self):
        try:
            self.connection = sqlite3.connect(self.db_path, check_same_thread=False)
            self.connection.row_factory = sqlite3.Row
        except Exception as e:
            print(f"❌ Error connecting to certificate ledger {self.db_path}: {e}", file=sys.stderr)
            raise

    def close(self):
        if self.connection:
            self.connection.close()
            self.connection = None

    def initialize_schema(self):
        self.connection.executescript(SCHEMA)
        self.connection.commit()

    def execute_query(self, query: str, params: tuple = None) -> List[sqlite3.Row]:
        cursor = self.connection.cursor()
        cursor.execute(query, params or ())
        return cursor.fetchall()

    @staticmethod
    def _process(data: Dict[str, Any]) -> Dict[str, Any]:
        # lists and dicts are stored as JSON text
        return {key: json.dumps(value) if isinstance(value, (dict, list)) else value
                for key, value in data.items()}

    def execute_insert(self, table: str, data: Dict[str, Any]) -> int:
        """INSERT OR REPLACE one record"""
        processed = self._process(data)
        columns = ', '.join(processed.keys())
        placeholders = ', '.join('?' for _ in processed)
        try:
            cursor = self.connection.cursor()
            cursor.execute(f"INSERT OR REPLACE INTO {table} ({columns}) VALUES ({placeholders})",
                           tuple(processed.values()))
            self.connection.commit()
            return cursor.lastrowid
        except Exception as e:
            print(f"❌ Error inserting into {table}: {e}", file=sys.stderr)
            raise

    def execute_many_inserts(self, table: str, data_list: List[Dict[str, Any]]):
        if not data_list:
            return
        processed = [self._process(data) for data in data_list]
        columns = ', '.join(processed[0].keys())
        placeholders = ', '.join('?' for _ in processed[0])
        try:
            cursor = self.connection.cursor()
            cursor.executemany(f"INSERT OR REPLACE INTO {table} ({columns}) VALUES ({placeholders})",
                               [tuple(data.values()) for data in processed])
            self.connection.commit()
            print(f"💾 Stored {len(processed)} records in {table}", file=sys.stderr)
        except Exception as e:
            print(f"❌ Error bulk inserting into {table}: {e}", file=sys.stderr)
            raise

    def log_run_start(self, run_type: str, m: Optional[int] = None, lmax: Optional[int] = None) -> int:
        return self.execute_insert('run_log', {
            'run_type': run_type,
            'm': m,
            'lmax': lmax,
            'status': 'running',
            'started_at': datetime.now(timezone.utc).isoformat(),
        })

    def log_run_complete(self, run_id: int, families_found: int = 0, families_verified: int = 0):
        self.connection.execute(
            """
            UPDATE run_log
            SET status = 'completed', families_found = ?, families_verified = ?, completed_at = ?
            WHERE id = ?
            """,
            (families_found, families_verified, datetime.now(timezone.utc).isoformat(), run_id))
        self.connection.commit()

    def log_run_error(self, run_id: int, error_message: str):
        self.connection.execute(
            """
            UPDATE run_log
            SET status = 'failed', error_message = ?, completed_at = ?
            WHERE id = ?
            """,
            (error_message, datetime.now(timezone.utc).isoformat(), run_id))
        self.connection.commit()

    def get_last_run(self, run_type: str) -> Optional[sqlite3.Row]:
        rows = self.execute_query(
            "SELECT * FROM run_log WHERE run_type = ? ORDER BY id DESC LIMIT 1", (run_type,))
        return rows[0] if rows else None

    def store_certificates(self, certificates: List[Certificate]):
        self.execute_many_inserts('certificates', [cert.model_dump() for cert in certificates])

    def get_certificates(self, m: int) -> List[Certificate]:
        rows = self.execute_query(
            "SELECT * FROM certificates WHERE m = ? ORDER BY ell, exponent, epsilon", (m,))
        certificates = []
        for row in rows:
            record = dict(row)
            record['checked_indices'] = json.loads(record['checked_indices'] or '[]')
            certificates.append(Certificate(**record))
        return certificates

    def get_families(self, m: int) -> List[CongruenceFamily]:
        return [CongruenceFamily(m=c.m, ell=c.ell, exponent=c.exponent, epsilon=c.epsilon,
                                 eigenvalue=c.eigenvalue, status=c.status,
                                 verified_bound=c.sturm_bound)
                for c in self.get_certificates(m)]
