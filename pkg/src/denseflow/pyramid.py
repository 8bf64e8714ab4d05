"""Gaussian image pyramids, level 0 finest."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .imagery import as_image, gaussian_smooth

__all__ = ["MIN_LEVEL_SIZE", "GaussianPyramid", "downsample2", "build_pyramid"]

#: Construction stops before either dimension would fall below this.
MIN_LEVEL_SIZE = 8


@dataclass(frozen=True)
class GaussianPyramid:
    levels: tuple[np.ndarray, ...]

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.levels[index]

    def __len__(self) -> int:
        return len(self.levels)


def downsample2(image) -> np.ndarray:
    """Keep every second pixel from index 0; odd sizes round up."""
    image = as_image(image)
    if image.shape[0] < 2 or image.shape[1] < 2:
        raise ShapeError(
            f"cannot halve a {image.shape[1]}x{image.shape[0]} image"
        )
    return image[::2, ::2].copy()


def _half(n: int) -> int:
    return (n + 1) // 2


def build_pyramid(image, requested_levels: int) -> GaussianPyramid:
    """Smooth and halve ``image`` until ``requested_levels`` or the size floor.

    The returned pyramid may be shallower than requested; check
    ``num_levels``. Level 0 is ``image`` itself.
    """
    if requested_levels < 1:
        raise ParameterError(f"requested_levels must be >= 1, got {requested_levels}")
    levels = [as_image(image)]
    while len(levels) < requested_levels:
        h, w = levels[-1].shape
        if _half(h) < MIN_LEVEL_SIZE or _half(w) < MIN_LEVEL_SIZE:
            break
        levels.append(downsample2(gaussian_smooth(levels[-1])))
    return GaussianPyramid(tuple(levels))
