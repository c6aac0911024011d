import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence, TextIO

import numpy as np

# CSV cells carry 12 significant digits
CSV_DIGITS = 12


def _make_json_serializable(obj):
    """Convert numpy scalars, arrays and complex numbers to JSON types."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.ndarray):
        return [_make_json_serializable(item) for item in obj.tolist()]
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, (tuple, list)):
        return [_make_json_serializable(item) for item in obj]
    elif isinstance(obj, dict):
        return {k: _make_json_serializable(v) for k, v in obj.items()}
    else:
        return obj


def format_number(value: Optional[float]) -> str:
    """Format a CSV cell; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return f"{float(value):.{CSV_DIGITS}g}"


@contextmanager
def open_output(path: Optional[Path]) -> Iterator[TextIO]:
    """Open `path` for writing with LF line endings, or yield stdout."""
    if path is None:
        yield sys.stdout
        return
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        yield handle


def write_csv(
    path: Optional[Path],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Optional[dict] = None,
) -> None:
    """Write rows as CSV; metadata goes on a leading line prefixed with '#'."""
    with open_output(path) as handle:
        if metadata:
            fields = " ".join(f"{key}={format_number(value)}" for key, value in metadata.items())
            handle.write(f"# {fields}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])


def write_json(path: Optional[Path], payload: Any) -> None:
    with open_output(path) as handle:
        handle.write(json.dumps(_make_json_serializable(payload), indent=2))
        handle.write("\n")
