"""Dense flow fields and the helpers shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ShapeError
from .imagery import bilinear_sample_grid

__all__ = ["FlowField", "UNKNOWN_FLOW_THRESHOLD", "zero_flow", "flow_delta",
           "upsample_flow"]

#: Components with magnitude above this mark unknown flow in ``.flo`` data.
UNKNOWN_FLOW_THRESHOLD = 1e9


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement ``(u, v)`` in pixels.

    ``u`` is horizontal (+x to the right) and ``v`` vertical (+y down),
    both ``float64`` arrays of shape ``(height, width)``.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if u.ndim != 2 or u.shape != v.shape:
            raise ShapeError(
                f"flow channels must be equal-shape 2-D arrays, got {u.shape} and {v.shape}"
            )
        if u.shape[0] < 1 or u.shape[1] < 1:
            raise ShapeError(f"flow must be at least 1x1, got {u.shape}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise DegenerateInputError("flow contains non-finite components")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    def valid_mask(self) -> np.ndarray:
        """Pixels not flagged with the unknown-flow sentinel."""
        return ((np.abs(self.u) <= UNKNOWN_FLOW_THRESHOLD)
                & (np.abs(self.v) <= UNKNOWN_FLOW_THRESHOLD))

    def __add__(self, other: "FlowField") -> "FlowField":
        _check_same(self, other, "flow addition")
        return FlowField(self.u + other.u, self.v + other.v)

    def __neg__(self) -> "FlowField":
        return FlowField(-self.u, -self.v)

    def scaled(self, factor: float) -> "FlowField":
        return FlowField(self.u * factor, self.v * factor)

    def equals(self, other: "FlowField") -> bool:
        """Exact element-wise equality of both channels."""
        return (self.shape == other.shape
                and np.array_equal(self.u, other.u)
                and np.array_equal(self.v, other.v))


def _check_same(a: FlowField, b: FlowField, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(
            f"{what}: dimension mismatch {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def zero_flow(width: int, height: int) -> FlowField:
    if width < 1 or height < 1:
        raise ShapeError(f"flow dimensions must be positive, got {width}x{height}")
    return FlowField(np.zeros((height, width)), np.zeros((height, width)))


def flow_delta(before: FlowField, after: FlowField) -> float:
    """L2 norm of the stacked change ``(du, dv)`` over the whole field."""
    _check_same(before, after, "flow delta")
    du = after.u - before.u
    dv = after.v - before.v
    return float(np.sqrt(np.sum(du * du) + np.sum(dv * dv)))


def _axis_coords(old: int, new: int) -> np.ndarray:
    # endpoint alignment: destination 0 and new-1 land on source 0 and old-1
    if old == 1 or new == 1:
        return np.zeros(new)
    return np.arange(new, dtype=np.float64) * ((old - 1) / (new - 1))


def upsample_flow(flow: FlowField, new_width: int, new_height: int) -> FlowField:
    """Prolong ``flow`` onto a finer grid.

    Each channel is bilinearly resampled with corner-aligned coordinates,
    then ``u`` is multiplied by ``new_width / width`` and ``v`` by
    ``new_height / height`` so displacements are in destination pixels.
    """
    if new_width < flow.width or new_height < flow.height:
        raise ShapeError(
            f"upsample_flow cannot shrink {flow.width}x{flow.height} "
            f"to {new_width}x{new_height}"
        )
    xs = _axis_coords(flow.width, new_width)
    ys = _axis_coords(flow.height, new_height)
    gx, gy = np.meshgrid(xs, ys)
    u = bilinear_sample_grid(flow.u, gx, gy)
    v = bilinear_sample_grid(flow.v, gx, gy)
    return FlowField(u * (new_width / flow.width), v * (new_height / flow.height))
