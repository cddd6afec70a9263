from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Range:
    """Half-open range [min, max); max may be infinite."""

    min: float
    max: float

    def contains(self, value):
        return (value >= self.min) & (value < self.max)

    @property
    def label(self) -> str:
        if np.isinf(self.max):
            return f">{self.min:g}"
        return f"{self.min:g}-{self.max:g}"


def map_range(value, in_min, in_max, out_min, out_max):
    return (value - in_min) * (out_max - out_min) / (in_max - in_min) + out_min
