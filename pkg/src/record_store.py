"""
Record Files for Vantage.
Reads and writes detection and position files (one JSON object per line)
and the JSON reports every command produces.
"""

import json
import logging
import math
import os
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from constants import ALL_OBJECT_CLASSES, OBJECT_CLASS_PERSON, STATUS_OK, STATUS_DEGENERATE
from entities.camera import PixelPoint
from entities.detection import DetectionRecord, PositionRecord
from errors import ParseError, DomainError

logger = logging.getLogger(__name__)


# =============================================================================
# LOW-LEVEL JSON
# =============================================================================

def _ensure_parent(path: str):
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)


def _clean(value: Any) -> Any:
    """Replace non-finite floats with None so the output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def iter_json_lines(path: str) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """
    Yield (line_number, object) for every non-blank line.

    Raises:
        ParseError: If the file is missing or a line is not a JSON object
    """
    if not os.path.exists(path):
        raise ParseError(path, None, "File not found")
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(path, line_number, f"Invalid JSON: {e.msg}") from e
            if not isinstance(data, dict):
                raise ParseError(path, line_number, "Expected a JSON object")
            yield line_number, data


def write_json_lines(rows: Sequence[Dict[str, Any]], path: str):
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        for row in rows:
            f.write(json.dumps(_clean(row), allow_nan=False))
            f.write('\n')


def load_json(path: str) -> Dict[str, Any]:
    """Load a JSON object from a file."""
    if not os.path.exists(path):
        raise ParseError(path, None, "File not found")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"Invalid JSON: {e.msg}") from e
    if not isinstance(data, dict):
        raise ParseError(path, None, "Expected a JSON object")
    return data


def save_json(data: Dict[str, Any], path: str):
    """Write a report as indented JSON."""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_clean(data), f, indent=2, allow_nan=False)
        f.write('\n')


# =============================================================================
# FIELD HELPERS
# =============================================================================

def _number(data: Dict[str, Any], key: str, path: str, line: int) -> float:
    if key not in data:
        raise ParseError(path, line, f"Missing field '{key}'")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(path, line, f"Field '{key}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(path, line, f"Field '{key}' must be finite")
    return float(value)


def _integer(data: Dict[str, Any], key: str, path: str, line: int,
             default: Optional[int] = None) -> int:
    if key not in data:
        if default is not None:
            return default
        raise ParseError(path, line, f"Missing field '{key}'")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(path, line, f"Field '{key}' must be an integer, got {value!r}")
    return value


def _pixel(data: Dict[str, Any], key: str, path: str, line: int) -> Optional[PixelPoint]:
    value = data.get(key)
    if value is None:
        return None
    if not (isinstance(value, list) and len(value) == 2):
        raise ParseError(path, line, f"Field '{key}' must be [u, v]")
    try:
        return PixelPoint(float(value[0]), float(value[1]))
    except (TypeError, ValueError, DomainError) as e:
        raise ParseError(path, line, f"Field '{key}': {e}") from e


def _object_class(data: Dict[str, Any], path: str, line: int) -> str:
    object_class = data.get('object_class')
    if object_class not in ALL_OBJECT_CLASSES:
        raise ParseError(path, line,
                         f"Field 'object_class' must be one of {ALL_OBJECT_CLASSES}, got {object_class!r}")
    return object_class


def _check_unique(ids: Dict[int, int], record_id: int, path: str, line: int):
    if record_id in ids:
        raise ParseError(path, line, f"Duplicate record_id {record_id} (first on line {ids[record_id]})")
    ids[record_id] = line


# =============================================================================
# DETECTIONS
# =============================================================================

def load_detections(path: str) -> List[DetectionRecord]:
    """
    Load a detections file.

    Each line holds frame_id, object_class, left, top, right, bottom and
    optionally record_id (defaults to the record's position in the file)
    and person keypoints foot / head as [u, v].

    Raises:
        ParseError: With the offending line number
    """
    records = []
    seen: Dict[int, int] = {}
    for index, (line, data) in enumerate(iter_json_lines(path)):
        object_class = _object_class(data, path, line)
        bbox = tuple(_number(data, key, path, line) for key in ('left', 'top', 'right', 'bottom'))
        record_id = _integer(data, 'record_id', path, line, default=index)
        _check_unique(seen, record_id, path, line)
        foot = head = None
        if object_class == OBJECT_CLASS_PERSON:
            foot = _pixel(data, 'foot', path, line)
            head = _pixel(data, 'head', path, line)
        try:
            records.append(DetectionRecord(
                record_id=record_id,
                frame_id=_integer(data, 'frame_id', path, line),
                object_class=object_class,
                bbox=bbox,
                foot=foot,
                head=head,
            ))
        except DomainError as e:
            raise ParseError(path, line, str(e)) from e

    logger.info("Loaded %d detection records from %s", len(records), path)
    return records


def save_detections(records: Sequence[DetectionRecord], path: str):
    write_json_lines([r.to_dict() for r in records], path)


# =============================================================================
# POSITIONS
# =============================================================================

def load_positions(path: str) -> List[PositionRecord]:
    """
    Load a positions file (record_id, frame_id, object_class, X, Y, Z, status).

    Records with status "degenerate" may omit coordinates.
    """
    records = []
    seen: Dict[int, int] = {}
    for index, (line, data) in enumerate(iter_json_lines(path)):
        object_class = _object_class(data, path, line)
        record_id = _integer(data, 'record_id', path, line, default=index)
        _check_unique(seen, record_id, path, line)
        status = data.get('status', STATUS_OK)
        if status not in (STATUS_OK, STATUS_DEGENERATE):
            raise ParseError(path, line, f"Unknown status {status!r}")

        coordinates = (None, None, None)
        if status == STATUS_OK:
            coordinates = tuple(_number(data, key, path, line) for key in ('X', 'Y', 'Z'))
        records.append(PositionRecord(
            record_id, _integer(data, 'frame_id', path, line), object_class, *coordinates, status))

    logger.info("Loaded %d position records from %s", len(records), path)
    return records


def save_positions(records: Sequence[PositionRecord], path: str):
    write_json_lines([r.to_dict() for r in records], path)


def format_json(data: Dict[str, Any]) -> str:
    """Render a report the way save_json writes it, for printing."""
    return json.dumps(_clean(data), indent=2, allow_nan=False)


def format_json_lines(rows: Sequence[Dict[str, Any]]) -> str:
    return ''.join(json.dumps(_clean(row), allow_nan=False) + '\n' for row in rows)
