import logging
import sqlite3
import threading
from typing import Any, Mapping

from disentangle.config import SQLITE_DB_PATH
from disentangle.reports import dumps

logger = logging.getLogger(__name__)

_local = threading.local()


def _resolve_path(db_path: str | None) -> str:
    path = db_path or SQLITE_DB_PATH
    if not path:
        raise ValueError("no run ledger configured (set DISENTANGLE_DB_PATH or pass --db)")
    return str(path)


def _get_conn(db_path: str | None = None) -> sqlite3.Connection:
    """Return a per-thread SQLite connection for ``db_path`` (created on first call)."""
    path = _resolve_path(db_path)
    conns: dict[str, sqlite3.Connection] | None = getattr(_local, "conns", None)
    if conns is None:
        conns = {}
        _local.conns = conns
    conn = conns.get(path)
    if conn is None:
        conn = sqlite3.connect(path)
        conn.row_factory = sqlite3.Row
        conn.execute("PRAGMA journal_mode=WAL;")
        conns[path] = conn
    return conn


def close_connections() -> None:
    for conn in getattr(_local, "conns", {}).values():
        conn.close()
    _local.conns = {}


def initialize_database(db_path: str | None = None) -> None:
    ddl = """
    CREATE TABLE IF NOT EXISTS experiment_runs (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        created_at TEXT NOT NULL DEFAULT (datetime('now')),
        command TEXT NOT NULL,
        seed TEXT,
        exit_code INTEGER NOT NULL,
        passed_checks INTEGER,
        total_checks INTEGER,
        config TEXT NOT NULL,
        report TEXT NOT NULL
    );

    CREATE INDEX IF NOT EXISTS idx_experiment_runs_command_time
        ON experiment_runs (command, created_at DESC);
    """
    try:
        conn = _get_conn(db_path)
        conn.executescript(ddl)
        conn.commit()
    except sqlite3.Error as e:
        logger.critical("A database error occurred: %s", e)
        raise


def save_experiment_run(
    *,
    command: str,
    seed: int | None,
    exit_code: int,
    config: Mapping[str, Any],
    report: Mapping[str, Any],
    db_path: str | None = None,
) -> int:
    checks = report.get("checks", []) or []
    sql = """
    INSERT INTO experiment_runs (
        command, seed, exit_code, passed_checks, total_checks, config, report
    ) VALUES (
        :command, :seed, :exit_code, :passed_checks, :total_checks, :config, :report
    );
    """
    params = {
        "command": command,
        # text keeps 64-bit unsigned seeds exact
        "seed": None if seed is None else str(seed),
        "exit_code": int(exit_code),
        "passed_checks": sum(1 for check in checks if check.get("pass")),
        "total_checks": len(checks),
        "config": dumps(config),
        "report": dumps(report),
    }
    conn = _get_conn(db_path)
    cur = conn.execute(sql, params)
    conn.commit()
    logger.debug("Recorded %s run as ledger row %d", command, cur.lastrowid)
    return cur.lastrowid


def get_recent_runs(limit: int = 10, db_path: str | None = None) -> list[dict]:
    """Most recent runs, returned oldest first."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    sql = """
    SELECT id, created_at, command, seed, exit_code, passed_checks, total_checks, config
    FROM experiment_runs
    ORDER BY id DESC
    LIMIT :limit;
    """
    conn = _get_conn(db_path)
    cur = conn.execute(sql, {"limit": limit})
    rows = [dict(row) for row in cur.fetchall()]
    return list(reversed(rows))


def get_run_report(run_id: int, db_path: str | None = None) -> str | None:
    conn = _get_conn(db_path)
    row = conn.execute(
        "SELECT report FROM experiment_runs WHERE id = :id;", {"id": run_id}
    ).fetchone()
    return None if row is None else row["report"]
