from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Sequence

import pandas as pd

FLOAT_FORMAT = "%.12g"
NOT_APPLICABLE = "n/a"
TOOL_NAME = "wpir_lab"


def support_label(support: Sequence[int]) -> str:
    return ";".join(str(i) for i in support)


def _round(value: Any) -> Any:
    if isinstance(value, float):
        return None if math.isnan(value) else float(FLOAT_FORMAT % value)
    if isinstance(value, Mapping):
        return {key: _round(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(item) for item in value]
    if hasattr(value, "item"):
        return _round(value.item())
    return value


def csv_text(rows: Iterable[Mapping[str, Any]] | pd.DataFrame) -> str:
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    return frame.to_csv(float_format=FLOAT_FORMAT, lineterminator="\n", index=False, na_rep=NOT_APPLICABLE)


def json_text(payload: Mapping[str, Any], metadata: Dict[str, Any] | None = None) -> str:
    """Flat payload plus a metadata block; floats carry 12 significant digits."""
    document = {"metadata": {"tool": TOOL_NAME, **(metadata or {})}, **payload}
    return json.dumps(_round(document), indent=2) + "\n"


def emit(text: str, output_path: Path | None = None) -> None:
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8", newline="") as f:
        f.write(text)
