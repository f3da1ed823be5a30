"""Atomic CSV and JSON output.

Numbers are written with 17 significant digits and a '.' decimal separator,
independent of the locale, so identical inputs give byte-identical files.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    number = float(value)
    if math.isnan(number):
        return 'nan'
    if math.isinf(number):
        return 'inf' if number > 0 else '-inf'
    return '{:.17g}'.format(number)


def _atomic_write(path: PathLike, text: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temporary = tempfile.mkstemp(prefix=f'.{target.name}.', suffix='.tmp', dir=target.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
        os.replace(temporary, target)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    LOGGER.info('wrote %s', target)
    return target


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f'row has {len(row)} values for {len(header)} columns')
        writer.writerow([cell if isinstance(cell, str) else format_number(cell) for cell in row])
    return _atomic_write(path, buffer.getvalue())


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else format_number(number)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def to_json(document: Mapping[str, Any]) -> str:
    return json.dumps(_jsonable(document), sort_keys=True, indent=2) + '\n'


def write_json(path: PathLike, document: Mapping[str, Any]) -> Path:
    return _atomic_write(path, to_json(document))


__all__ = ['format_number', 'to_json', 'write_csv', 'write_json']
