"""
Append-only ledger of experiment records.
SQLite, one file per output directory; nothing is ever updated or deleted.
"""
import json
import logging
import sqlite3
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Optional

from src.experiments.records import ExperimentRecord

logger = logging.getLogger(__name__)


class ExperimentDatabase:
    """
    Stores every ExperimentRecord with its result rows.
    """

    def __init__(self, db_path: str = "results/experiments.db"):
        self.db_path = db_path
        Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        self._init_db()

    @contextmanager
    def _get_connection(self):
        """Create a database connection (safely closes when done)."""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        try:
            yield conn
        finally:
            conn.close()

    def _init_db(self):
        with self._get_connection() as conn:
            cursor = conn.cursor()

            cursor.execute('''
                CREATE TABLE IF NOT EXISTS records (
                    id TEXT PRIMARY KEY,
                    config_hash TEXT NOT NULL,
                    command TEXT NOT NULL,
                    version TEXT NOT NULL,
                    started_at TEXT NOT NULL,
                    finished_at TEXT,
                    passed INTEGER DEFAULT 1,
                    summary TEXT,
                    created_at TEXT DEFAULT CURRENT_TIMESTAMP
                )
            ''')

            # One row per result-table row, payload kept as JSON
            cursor.execute('''
                CREATE TABLE IF NOT EXISTS record_rows (
                    record_id TEXT NOT NULL,
                    row_index INTEGER NOT NULL,
                    payload TEXT NOT NULL,
                    PRIMARY KEY (record_id, row_index),
                    FOREIGN KEY (record_id) REFERENCES records(id)
                )
            ''')

            cursor.execute('CREATE INDEX IF NOT EXISTS idx_records_command ON records(command)')
            cursor.execute('CREATE INDEX IF NOT EXISTS idx_records_hash ON records(config_hash)')
            conn.commit()
            logger.debug("ledger ready at %s", self.db_path)

    def insert_record(self, record: ExperimentRecord) -> bool:
        """
        Insert a record and its rows.
        Returns True if inserted, False if a record with the same id already exists.
        """
        data = record.to_dict()
        with self._get_connection() as conn:
            cursor = conn.cursor()
            try:
                cursor.execute('''
                    INSERT OR IGNORE INTO records
                    (id, config_hash, command, version, started_at, finished_at, passed, summary)
                    VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                ''', (
                    record.id, record.config_hash, record.command, record.version,
                    data["started_at"], data["finished_at"], int(record.passed),
                    json.dumps(data["summary"]),
                ))
                inserted = cursor.rowcount > 0
                if inserted:
                    cursor.executemany(
                        'INSERT OR IGNORE INTO record_rows (record_id, row_index, payload) VALUES (?, ?, ?)',
                        [(record.id, i, json.dumps(row)) for i, row in enumerate(data["rows"])],
                    )
                conn.commit()
                return inserted
            except sqlite3.Error as e:
                logger.error("could not store record %s: %s", record.id, e)
                return False

    def get_record(self, record_id: str) -> Optional[ExperimentRecord]:
        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute('SELECT * FROM records WHERE id = ?', (record_id,))
            row = cursor.fetchone()
            if row is None:
                return None
            cursor.execute(
                'SELECT payload FROM record_rows WHERE record_id = ? ORDER BY row_index', (record_id,)
            )
            rows = [json.loads(r["payload"]) for r in cursor.fetchall()]
            return self._row_to_record(row, rows)

    def list_records(
        self,
        command: Optional[str] = None,
        config_hash: Optional[str] = None,
        limit: int = 100,
    ) -> list[dict]:
        """Record headers (no rows), newest first."""
        conditions, params = [], []
        if command:
            conditions.append("command = ?")
            params.append(command)
        if config_hash:
            conditions.append("config_hash = ?")
            params.append(config_hash)

        sql = "SELECT id, config_hash, command, version, started_at, finished_at, passed FROM records"
        if conditions:
            sql += " WHERE " + " AND ".join(conditions)
        sql += " ORDER BY started_at DESC LIMIT ?"
        params.append(limit)

        with self._get_connection() as conn:
            cursor = conn.cursor()
            cursor.execute(sql, params)
            return [dict(r) for r in cursor.fetchall()]

    def latest(self, command: str, config_hash: Optional[str] = None) -> Optional[ExperimentRecord]:
        headers = self.list_records(command=command, config_hash=config_hash, limit=1)
        return self.get_record(headers[0]["id"]) if headers else None

    def get_stats(self) -> dict:
        with self._get_connection() as conn:
            cursor = conn.cursor()
            stats = {}
            cursor.execute("SELECT COUNT(*) FROM records")
            stats['total_records'] = cursor.fetchone()[0]
            cursor.execute("""
                SELECT command, COUNT(*) as count
                FROM records
                GROUP BY command
                ORDER BY count DESC
            """)
            stats['by_command'] = dict(cursor.fetchall())
            cursor.execute("SELECT COUNT(*) FROM records WHERE passed = 0")
            stats['failed'] = cursor.fetchone()[0]
            return stats

    def _row_to_record(self, row: sqlite3.Row, rows: list[dict]) -> ExperimentRecord:
        data = dict(row)
        record = ExperimentRecord(
            config_hash=data["config_hash"],
            command=data["command"],
            version=data["version"],
            started_at=datetime.fromisoformat(data["started_at"]),
            finished_at=datetime.fromisoformat(data["finished_at"]) if data["finished_at"] else None,
            rows=rows,
            summary=json.loads(data["summary"]) if data["summary"] else {},
            passed=bool(data["passed"]),
        )
        return record
