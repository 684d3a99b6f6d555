"""Output storage layer for sbfctl."""
import csv
import io
import json
import logging
import math
from pathlib import Path
from threading import Lock
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from errors import ValidationError
from utils import format_float

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "sbf_output"


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become 'inf', '-inf' or 'nan'."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else format_float(value)
    return obj


def dumps_json(obj: Any) -> str:
    """Stable JSON text: sorted keys, indent 2, round-trip float repr."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """RFC-4180 CSV with floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def read_centers(path: str, dim_n: Optional[int] = None) -> np.ndarray:
    """Read an 'n N' header followed by N lines of n + 1 coordinates.

    Raises:
        ValidationError: On a missing file, a bad header or a count mismatch
    """
    file = Path(path)
    if not file.is_file():
        raise ValidationError("centers file not found", path=str(path))
    lines = [ln.split() for ln in file.read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValidationError("centers file needs an 'n N' header", path=str(path))
    try:
        n, count = int(lines[0][0]), int(lines[0][1])
        rows = [[float(v) for v in ln] for ln in lines[1:]]
    except ValueError as e:
        raise ValidationError(f"unreadable centers file: {e}", path=str(path))
    if dim_n is not None and n != dim_n:
        raise ValidationError("centers file is for another sphere", file_n=n, n=dim_n)
    if len(rows) != count or any(len(r) != n + 1 for r in rows):
        raise ValidationError("centers file does not match its header",
                              expected=count, found=len(rows))
    points = np.array(rows, dtype=float)
    worst = float(np.max(np.abs(np.linalg.norm(points, axis=1) - 1.0))) if count else 0.0
    if worst > 1e-10:
        raise ValidationError("center coordinates are not unit vectors", max_deviation=worst)
    return points


class Storage:
    """Writes reports, tables and center files atomically into one directory."""

    def __init__(self, output_dir: str = DEFAULT_OUTPUT_DIR):
        """Initialize storage.

        Args:
            output_dir: Directory for every file a run writes
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._lock = Lock()
        self.written: list = []

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_text(self, name: str, text: str) -> Path:
        """Write to a temporary file, then rename over the target."""
        target = self.path(name)
        with self._lock:
            temp_file = target.with_name(target.name + ".tmp")
            try:
                with open(temp_file, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
                temp_file.replace(target)
            except Exception as e:
                logger.error(f"Error writing {target}: {e}")
                if temp_file.exists():
                    temp_file.unlink()
                raise
            self.written.append(str(target))
        logger.debug(f"Wrote {target}")
        return target

    def write_json(self, name: str, obj: Any) -> Path:
        return self._write_text(name, dumps_json(obj))

    def write_csv(self, name: str, header: Sequence[str],
                  rows: Iterable[Sequence[Any]]) -> Path:
        return self._write_text(name, dumps_csv(header, rows))

    def write_centers(self, name: str, dim_n: int, points: np.ndarray) -> Path:
        pts = np.asarray(points, dtype=float)
        lines = [f"{dim_n} {pts.shape[0]}"]
        lines += [" ".join(format_float(v) for v in row) for row in pts]
        return self._write_text(name, "\n".join(lines) + "\n")

    def write_coefficients(self, name: str, coeffs: Sequence[float]) -> Path:
        """'l,coeff' table of a coefficient sequence."""
        return self.write_csv(name, ["l", "coeff"],
                              ((l, float(c)) for l, c in enumerate(coeffs)))

    def write_network(self, name: str, network, centers_file: str) -> Path:
        """{family_tag, params, centers_file, coeffs[]}."""
        return self.write_json(name, network.to_dict(centers_file))

    def read_json(self, name: str) -> Any:
        with open(self.path(name), encoding="utf-8") as f:
            return json.load(f)
