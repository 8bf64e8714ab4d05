"""Average angular error and end-point error between flow fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDomainError, ShapeError
from .flow_core import FlowField

__all__ = ["AAE_EPSILON", "FlowErrorReport", "average_angular_error",
           "angular_errors", "endpoint_error", "evaluate_pair"]

AAE_EPSILON = 1e-8


@dataclass(frozen=True)
class FlowErrorReport:
    aae_degrees: float
    epe_pixels: float
    pixel_count: int
    masked_out: int

    def format(self) -> str:
        return (f"AAE {self.aae_degrees:.4f} deg  EPE {self.epe_pixels:.4f} px  "
                f"pixels {self.pixel_count}  masked {self.masked_out}")


def _select(est: FlowField, gt: FlowField, mask) -> np.ndarray:
    if est.shape != gt.shape:
        raise ShapeError(
            f"estimate is {est.width}x{est.height} but ground truth is "
            f"{gt.width}x{gt.height}"
        )
    if mask is None:
        mask = np.ones(est.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != est.shape:
        raise ShapeError(f"mask shape {mask.shape} does not match flow {est.shape}")
    if not mask.any():
        raise EmptyDomainError("no unmasked pixels to average over")
    return mask


def angular_errors(est: FlowField, gt: FlowField, eps: float = AAE_EPSILON) -> np.ndarray:
    """Per-pixel angle in radians between ``est`` and ``gt``.

    ``eps`` enters under both square roots and once more in the
    denominator; the cosine is clipped to ``[-1, 1]``.
    """
    dot = est.u * gt.u + est.v * gt.v
    norm_est = np.sqrt(est.u * est.u + est.v * est.v + eps)
    norm_gt = np.sqrt(gt.u * gt.u + gt.v * gt.v + eps)
    cos = np.clip(dot / (norm_est * norm_gt + eps), -1.0, 1.0)
    return np.arccos(cos)


def average_angular_error(est: FlowField, gt: FlowField, mask=None,
                          eps: float = AAE_EPSILON) -> float:
    """Mean angular error in degrees over the pixels where ``mask`` is true."""
    mask = _select(est, gt, mask)
    return float(np.degrees(np.mean(angular_errors(est, gt, eps)[mask])))


def endpoint_error(est: FlowField, gt: FlowField, mask=None) -> float:
    """Mean Euclidean distance between the flow vectors, in pixels."""
    mask = _select(est, gt, mask)
    du = est.u - gt.u
    dv = est.v - gt.v
    return float(np.mean(np.sqrt(du * du + dv * dv)[mask]))


def evaluate_pair(est: FlowField, gt: FlowField, mask=None) -> FlowErrorReport:
    """Both metrics plus pixel counts.

    Pixels carrying the unknown-flow sentinel in ``gt`` are always
    excluded, in addition to any caller-supplied ``mask``.
    """
    valid = gt.valid_mask()
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != gt.shape:
            raise ShapeError(f"mask shape {mask.shape} does not match flow {gt.shape}")
        valid &= mask
    count = int(valid.sum())
    return FlowErrorReport(
        aae_degrees=average_angular_error(est, gt, valid),
        epe_pixels=endpoint_error(est, gt, valid),
        pixel_count=count,
        masked_out=int(valid.size - count),
    )
