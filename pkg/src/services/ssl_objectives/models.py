"""BPR training triples."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TripleBatch:
    """(i, j, k) rows: (i, j) a training edge and (i, k) a non-edge."""

    triples: np.ndarray
    requested: int
    skipped: int = 0

    @property
    def size(self) -> int:
        return len(self.triples)
