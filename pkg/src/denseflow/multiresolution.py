"""Coarse-to-fine Horn-Schunck over Gaussian pyramids.

The flow found at one level is prolonged to the next finer level, the
second frame of that level is warped by it, and Horn-Schunck estimates
the remaining (residual) motion between the first frame and the warped
one. The level's flow is the prolonged flow plus that residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NumericalInstabilityError, ParameterError, ShapeError
from .flow_core import FlowField, upsample_flow
from .horn_schunck import HsParams, HsTrace, hs_solve
from .imagery import as_image, warp
from .pyramid import build_pyramid

__all__ = ["MrParams", "MrTrace", "mrhs_solve"]


@dataclass(frozen=True)
class MrParams:
    levels: int = 4
    hs: HsParams = field(default_factory=HsParams)

    def __post_init__(self):
        if self.levels < 1:
            raise ParameterError(f"levels must be >= 1, got {self.levels}")


@dataclass(frozen=True)
class MrTrace:
    """Per-level solver traces, coarsest level first."""

    per_level: tuple[tuple[int, HsTrace], ...]

    @property
    def actual_levels(self) -> int:
        return len(self.per_level)


def _solve_level(level, frame1, frame2, params):
    try:
        return hs_solve(frame1, frame2, None, params)
    except NumericalInstabilityError as exc:
        raise NumericalInstabilityError(
            f"level {level}: {exc}", iteration=exc.iteration, level=level
        ) from exc


def mrhs_solve(frame1, frame2, params: MrParams = MrParams()):
    """Multiresolution Horn-Schunck.

    Returns
    -------
    flow : FlowField
        Total flow at full resolution.
    trace : MrTrace
    """
    frame1 = as_image(frame1, "frame1")
    frame2 = as_image(frame2, "frame2")
    if frame1.shape != frame2.shape:
        raise ShapeError(
            f"frames differ in size: {frame1.shape[1]}x{frame1.shape[0]} "
            f"vs {frame2.shape[1]}x{frame2.shape[0]}"
        )
    pyr1 = build_pyramid(frame1, params.levels)
    pyr2 = build_pyramid(frame2, params.levels)
    coarsest = pyr1.num_levels - 1

    flow, trace = _solve_level(coarsest, pyr1[coarsest], pyr2[coarsest], params.hs)
    traces = [(coarsest, trace)]
    for level in range(coarsest - 1, -1, -1):
        h, w = pyr1[level].shape
        prolonged = upsample_flow(flow, w, h)
        warped = warp(pyr2[level], prolonged)
        residual, trace = _solve_level(level, pyr1[level], warped, params.hs)
        flow = prolonged + residual
        traces.append((level, trace))
    return flow, MrTrace(tuple(traces))
