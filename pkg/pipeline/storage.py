"""
Storage — atomic file output and JSON/JSONL loading.

Every artifact goes through atomic_write_text: the content is written to a
temp file in the destination directory, fsynced, then renamed over the
target, so an interrupted run never leaves a truncated file behind.
Writes to the same path are serialized by a per-path lock.
"""
import json
import os
import tempfile
import threading
from typing import Any, Dict, Iterable, List

_registry_lock = threading.Lock()
_path_locks: Dict[str, threading.Lock] = {}


def _lock_for(path: str) -> threading.Lock:
    key = os.path.abspath(path)
    with _registry_lock:
        lock = _path_locks.get(key)
        if lock is None:
            lock = _path_locks[key] = threading.Lock()
        return lock


def atomic_write_text(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with _lock_for(path):
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
    return path


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str, data: Any) -> str:
    return atomic_write_text(path, dumps_json(data))


def write_jsonl(path: str, rows: Iterable[Dict[str, Any]]) -> str:
    text = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
    return atomic_write_text(path, text)


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    """Load a JSONL file. Each non-blank line is one JSON object."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
