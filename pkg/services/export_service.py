from io import StringIO
from pathlib import Path
from typing import Any, Dict, Optional, Union
import json
import sys

import pandas as pd


FLOAT_FORMAT = "%.17g"


def export_to_json(document: Dict[str, Any]) -> str:
    """
    Serialize a result document.

    Floats are written with their shortest round-trip representation, so
    parsing the text back reproduces every value bit for bit.

    Args:
        document: JSON-compatible result dictionary

    Returns:
        JSON string
    """
    return json.dumps(document, indent=2) + "\n"


def export_to_csv(frame: pd.DataFrame) -> str:
    """
    Serialize a result table with 17 significant digits.

    Args:
        frame: Table to export

    Returns:
        CSV string without index column
    """
    csv_buffer = StringIO()
    frame.to_csv(csv_buffer, index=False, float_format=FLOAT_FORMAT)
    return csv_buffer.getvalue()


def write_output(text: str, path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """
    Write serialized results to a file, or to stdout when no path is given.

    Returns:
        The path written, or None for stdout
    """
    if path is None:
        sys.stdout.write(text)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path

