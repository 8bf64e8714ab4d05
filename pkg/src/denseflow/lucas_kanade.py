"""Lucas-Kanade local flow: a least-squares OFCE fit per window."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ShapeError
from .imagery import as_image, spatial_gradients, temporal_gradient

__all__ = ["LkParams", "FlowPoint", "SparseFlow", "structure_tensor",
           "min_eigenvalue", "lk_solve_point", "lk_solve_grid"]


@dataclass(frozen=True)
class LkParams:
    """Window half-size and the acceptance threshold on the tensor.

    The window is ``(2 * window_radius + 1)`` pixels square. A point is
    accepted when the smaller eigenvalue of its structure tensor is at
    least ``min_eigenvalue`` (in normalized-intensity units).
    """

    window_radius: int = 2
    min_eigenvalue: float = 1e-4

    def __post_init__(self):
        if self.window_radius < 1:
            raise ParameterError(f"window_radius must be >= 1, got {self.window_radius}")
        if not self.min_eigenvalue >= 0:
            raise ParameterError(f"min_eigenvalue must be >= 0, got {self.min_eigenvalue}")


class FlowPoint(NamedTuple):
    x: int
    y: int
    u: float
    v: float
    accepted: bool


@dataclass
class SparseFlow:
    points: list[FlowPoint] = field(default_factory=list)

    def accepted(self) -> list[FlowPoint]:
        return [p for p in self.points if p.accepted]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "u", "v", "accepted"])
        for p in self.points:
            writer.writerow([p.x, p.y, repr(p.u), repr(p.v), int(p.accepted)])
        return buf.getvalue()


def structure_tensor(ix_patch, iy_patch) -> np.ndarray:
    """``A^T A`` for the stacked gradient rows ``[I_x, I_y]`` of a window."""
    ix = np.asarray(ix_patch, dtype=np.float64)
    iy = np.asarray(iy_patch, dtype=np.float64)
    if ix.shape != iy.shape or ix.size == 0:
        raise ShapeError(f"gradient patches must be non-empty and equal-shape, "
                         f"got {ix.shape} and {iy.shape}")
    sxx = float(np.sum(ix * ix))
    sxy = float(np.sum(ix * iy))
    syy = float(np.sum(iy * iy))
    return np.array([[sxx, sxy], [sxy, syy]])


def min_eigenvalue(tensor: np.ndarray) -> float:
    """Smaller eigenvalue of a symmetric 2x2 matrix, in closed form."""
    a, b, c = tensor[0, 0], tensor[0, 1], tensor[1, 1]
    half_trace = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), b)
    return float(half_trace - radius)


def lk_solve_point(gradients, point, params: LkParams = LkParams()):
    """Solve ``A^T A w = A^T b`` over the window centred at ``point``.

    Parameters
    ----------
    gradients : tuple of ndarray
        Full-frame ``(I_x, I_y, I_t)``.
    point : tuple of int
        ``(x, y)`` pixel; the window is truncated at the image border.
    params : LkParams

    Returns
    -------
    (u, v, accepted)
        ``(0.0, 0.0, False)`` when the window is too poorly textured.
    """
    ix, iy, it = gradients
    h, w = ix.shape
    x, y = point
    if not (0 <= x < w and 0 <= y < h):
        raise ShapeError(f"point ({x}, {y}) is outside the {w}x{h} image")
    r = params.window_radius
    rows = slice(max(y - r, 0), min(y + r + 1, h))
    cols = slice(max(x - r, 0), min(x + r + 1, w))
    wx, wy, wt = ix[rows, cols], iy[rows, cols], it[rows, cols]

    tensor = structure_tensor(wx, wy)
    lam = min_eigenvalue(tensor)
    if lam < params.min_eigenvalue or lam <= 0.0:
        return 0.0, 0.0, False

    # b = -I_t, so A^T b = -(sum I_x I_t, sum I_y I_t)
    bx = -float(np.sum(wx * wt))
    by = -float(np.sum(wy * wt))
    sxx, sxy, syy = tensor[0, 0], tensor[0, 1], tensor[1, 1]
    det = sxx * syy - sxy * sxy
    u = (syy * bx - sxy * by) / det
    v = (sxx * by - sxy * bx) / det
    return float(u), float(v), True


def lk_solve_grid(frame1, frame2, stride: int = 1,
                  params: LkParams = LkParams()) -> SparseFlow:
    """Run :func:`lk_solve_point` on a regular grid of points.

    Points start at ``window_radius`` and step by ``stride`` in each axis,
    keeping only those whose full window lies inside the frame. Output is
    in row-major order.
    """
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    frame1 = as_image(frame1, "frame1")
    frame2 = as_image(frame2, "frame2")
    it = temporal_gradient(frame1, frame2)
    ix, iy = spatial_gradients(frame1)
    h, w = frame1.shape
    r = params.window_radius
    flow = SparseFlow()
    for y in range(r, h - r, stride):
        for x in range(r, w - r, stride):
            u, v, ok = lk_solve_point((ix, iy, it), (x, y), params)
            flow.points.append(FlowPoint(x, y, u, v, ok))
    return flow
