"""Atomic result-file I/O.

Every result file (trajectory CSVs, metadata JSON, spectra) goes through
FileSystemHandler so that a crash mid-write never leaves a truncated file:

1. Back up an existing target (.bak)
2. Write the new content to a temporary sibling (.tmp)
3. os.replace the temporary file onto the target
4. Remove the backup; on failure restore it and clean up
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import shutil
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

from adcovar.errors import AdcovarError

logger = logging.getLogger(__name__)


class FileReadError(AdcovarError):
    """Error during file read operation.

    Raised for:
    - File not found
    - Permission denied
    - Encoding errors
    """

    code = "READ_ERROR"


class FileWriteError(AdcovarError):
    """Error during file write operation.

    Raised for:
    - Permission denied
    - Disk full
    - Atomic replace failures
    """

    code = "WRITE_ERROR"


class FileSystemHandler:
    """Reads inputs and writes results atomically.

    Not safe for concurrent writes to the same path; the harness gives every
    run its own file name.
    """

    def read_file(self, path: Path | str) -> str:
        """Read a UTF-8 text file.

        Raises:
            FileReadError: If the file is missing, unreadable or not UTF-8
        """
        path = Path(path)
        if not path.exists():
            raise FileReadError(f"File not found: {path}")
        try:
            return path.read_text(encoding="utf-8")
        except PermissionError as e:
            raise FileReadError(f"Permission denied reading file: {path}") from e
        except UnicodeDecodeError as e:
            raise FileReadError(f"Encoding error reading file (not valid UTF-8): {path}") from e
        except OSError as e:
            raise FileReadError(f"Error reading file {path}: {e}") from e

    def read_csv(self, path: Path | str) -> list[dict[str, str]]:
        """Rows of a headed CSV file as dicts keyed by column."""
        return list(csv.DictReader(io.StringIO(self.read_file(path))))

    def write_file(self, path: Path | str, content: str) -> None:
        """Write text atomically, creating parent directories.

        Raises:
            FileWriteError: If any step fails; a previous file is restored
        """
        path = Path(path)
        backup_path = path.with_suffix(path.suffix + ".bak")
        temp_path = path.with_suffix(path.suffix + ".tmp")
        backup_created = False
        temp_created = False
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if path.exists():
                shutil.copy2(path, backup_path)
                backup_created = True
            temp_path.write_text(content, encoding="utf-8", newline="")
            temp_created = True
            os.replace(temp_path, path)
            temp_created = False
            if backup_created:
                try:
                    backup_path.unlink()
                    backup_created = False
                except OSError as e:
                    logger.warning("Could not delete backup %s: %s", backup_path, e)
            logger.debug("wrote %s", path)
        except Exception as e:
            self._cleanup_on_error(path, backup_path, temp_path, backup_created, temp_created)
            if isinstance(e, PermissionError):
                raise FileWriteError(f"Permission denied writing to {path}") from e
            raise FileWriteError(f"Error writing {path}: {e}") from e

    def _cleanup_on_error(
        self,
        path: Path,
        backup_path: Path,
        temp_path: Path,
        backup_created: bool,
        temp_created: bool,
    ) -> None:
        if temp_created and temp_path.exists():
            try:
                temp_path.unlink()
            except OSError as e:
                logger.warning("Could not clean up temp file %s: %s", temp_path, e)
        if backup_created and backup_path.exists():
            try:
                if not path.exists():
                    shutil.copy2(backup_path, path)
                    logger.debug("restored %s from backup", path)
                backup_path.unlink()
            except OSError as e:
                logger.warning("Could not restore from backup %s: %s", backup_path, e)

    def write_csv(
        self,
        path: Path | str,
        columns: Sequence[str],
        rows: Iterable[Mapping[str, Any]],
    ) -> None:
        """Write a CSV with a mandatory header row.

        Values are written with str(); callers format floats beforehand.
        """
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        self.write_file(path, buffer.getvalue())

    def write_json(self, path: Path | str, data: Any) -> None:
        """Pretty-printed JSON with sorted keys and a trailing newline."""
        self.write_file(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
