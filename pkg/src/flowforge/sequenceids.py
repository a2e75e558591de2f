"""(shift, row, col) position IDs for a text prefix followed by frame patch grids.

Text token ``i`` sits at ``(i, 0, 0)``. Every frame, input or output, takes
the next value of a single shift counter, so frames are ordered in time
along the first axis while rows and cols index the patch grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple


class PositionId(NamedTuple):
    shift: int
    row: int
    col: int


@dataclass(frozen=True)
class SequenceLayout:
    text_len: int = 0
    frames: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.text_len < 0:
            raise ValueError("text_len must be non-negative")
        frames = tuple((int(r), int(c)) for r, c in self.frames)
        if any(r < 1 or c < 1 for r, c in frames):
            raise ValueError("every frame grid dimension must be >= 1")
        object.__setattr__(self, "frames", frames)


def assign_position_ids(layout: SequenceLayout) -> list[PositionId]:
    ids = [PositionId(i, 0, 0) for i in range(layout.text_len)]
    shift = layout.text_len
    for rows, cols in layout.frames:
        ids.extend(PositionId(shift, r, c) for r in range(rows) for c in range(cols))
        shift += 1
    return ids
