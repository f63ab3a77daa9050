from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from src.utils.errors import ParameterError

TABLE_RATIO = 0.7828
TABLE_FILES = range(3, 9)
TABLE_COLUMNS = range(1, 6)


def g_value(mprime: int, n_files: int, q: float) -> float:
    """(q^(m'+1) - q^M) / (1 - q^(M-1)) - (1 - log(m'+1) / log M).

    Multiplying by 1 - q^(M-1) gives the MIL criterion coefficient for m'.
    """
    if n_files < 3 or not 1 <= mprime <= n_files - 2:
        raise ParameterError(f"g is defined for 1 <= m' <= M-2 with M >= 3, got m'={mprime}, M={n_files}")
    if not 0 < q < 1:
        raise ParameterError(f"q must lie in (0, 1), got {q}")
    share = (q ** (mprime + 1) - q**n_files) / (1 - q ** (n_files - 1))
    return share - (1 - math.log2(mprime + 1) / math.log2(n_files))


@dataclass(frozen=True)
class GTable:
    q: float
    entries: Dict[Tuple[int, int], float]

    def get(self, n_files: int, mprime: int) -> Optional[float]:
        """None marks a cell with m' > M-2."""
        return self.entries.get((n_files, mprime))

    @property
    def all_negative(self) -> bool:
        return all(value < 0 for value in self.entries.values())

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for n_files in TABLE_FILES:
            row = {"M": n_files}
            for mprime in TABLE_COLUMNS:
                row[f"m{mprime}"] = self.entries.get((n_files, mprime), np.nan)
            rows.append(row)
        return pd.DataFrame(rows)


def g_table(q: float = TABLE_RATIO) -> GTable:
    entries = {
        (n_files, mprime): g_value(mprime, n_files, q)
        for n_files in TABLE_FILES
        for mprime in TABLE_COLUMNS
        if mprime <= n_files - 2
    }
    return GTable(q=q, entries=entries)
