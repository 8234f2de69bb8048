"""
File safety utilities for run outputs.

This module provides run directory creation that never reuses a directory,
atomic writes with automatic temp-file cleanup, and JSON helpers.
"""
import json
import os
import re
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

from app.core.exceptions import FileProcessingError


class FileHandler:
    """
    Handles run directories and atomic file writes.

    Every write goes to a temporary file in the destination directory and is
    moved into place with ``os.replace``, so readers never observe a partial
    file and a failed write leaves nothing behind.
    """

    @staticmethod
    def create_run_dir(root: Path, run_id: str) -> Path:
        """
        Create a fresh run directory.

        Args:
            root: Output root directory (created if missing)
            run_id: Run identifier used as directory name

        Returns:
            Path: The new, empty directory

        Raises:
            FileProcessingError: If the directory already exists or cannot be created
        """
        safe_id = FileHandler.sanitize_component(run_id)
        run_dir = Path(root) / safe_id
        try:
            Path(root).mkdir(parents=True, exist_ok=True)
            run_dir.mkdir(exist_ok=False)
        except FileExistsError as e:
            raise FileProcessingError(
                f"Run directory already exists: {run_dir}",
                details={"run_dir": str(run_dir)}
            ) from e
        except OSError as e:
            raise FileProcessingError(
                f"Cannot create run directory: {run_dir}",
                details={"run_dir": str(run_dir), "reason": str(e)}
            ) from e
        return run_dir

    @staticmethod
    @contextmanager
    def temporary_file(
        suffix: Optional[str] = None,
        prefix: Optional[str] = None,
        dir: Optional[Path] = None
    ) -> Iterator[Path]:
        """
        Context manager for a temporary file with automatic cleanup.

        The file is deleted when the context exits unless it was moved away.
        """
        fd, temp_path = tempfile.mkstemp(suffix=suffix, prefix=prefix, dir=dir)
        temp_path_obj = Path(temp_path)
        try:
            os.close(fd)
            yield temp_path_obj
        finally:
            try:
                if temp_path_obj.exists():
                    temp_path_obj.unlink()
            except OSError:
                pass

    @staticmethod
    def atomic_write_text(path: Path, text: str) -> Path:
        """
        Write text to ``path`` atomically.

        Raises:
            FileProcessingError: If the write fails
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with FileHandler.temporary_file(prefix=f".{path.name}.", dir=path.parent) as tmp:
                tmp.write_text(text, encoding="utf-8")
                os.replace(tmp, path)
        except OSError as e:
            raise FileProcessingError(
                f"Failed to write {path}",
                details={"path": str(path), "reason": str(e)}
            ) from e
        return path

    @staticmethod
    def write_json(path: Path, payload: Dict[str, Any]) -> Path:
        """Write a JSON document atomically with stable key order."""
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
        return FileHandler.atomic_write_text(path, text + "\n")

    @staticmethod
    def read_json(path: Path) -> Dict[str, Any]:
        """
        Read a JSON document.

        Raises:
            FileProcessingError: If the file is missing or not valid JSON
        """
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise FileProcessingError(
                f"Cannot read JSON file {path}",
                details={"path": str(path), "reason": str(e)}
            ) from e

    @staticmethod
    def sanitize_component(text: str) -> str:
        """
        Reduce a string to a safe single path component.

        Example:
            FileHandler.sanitize_component("alpha=0.1/eps=1") == "alpha=0.1_eps=1"
        """
        text = text.replace('\x00', '')
        text = re.sub(r'[^A-Za-z0-9._=+-]+', '_', text)
        text = text.strip('._')
        return text[:120] or "run"


def _json_default(value: Any) -> Any:
    """Serialize numpy scalars and arrays, paths and sets."""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
