"""Seeded synthetic frame pairs with analytic ground-truth flow.

The texture is uniform noise smoothed twice by the 5x5 binomial kernel
and stretched to ``[0, 1]``. It is generated with a margin around the
visible frame so that shifted samples never reach the clamped border.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .flow_core import FlowField
from .imagery import bilinear_sample_grid, gaussian_smooth

__all__ = ["SyntheticScene", "make_texture", "make_scene", "SCENE_KINDS"]

SCENE_KINDS = ("translation", "rotation", "zoom")


@dataclass(frozen=True)
class SyntheticScene:
    frame1: np.ndarray
    frame2: np.ndarray
    gt: FlowField
    kind: str
    parameters: dict = field(default_factory=dict)


def make_texture(width: int, height: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, 1.0, size=(height, width))
    tex = gaussian_smooth(gaussian_smooth(noise))
    lo, hi = tex.min(), tex.max()
    return (tex - lo) / (hi - lo)


def _forward_map(kind, params, xs, ys, cx, cy):
    """Where each frame-1 pixel moves to in frame 2."""
    if kind == "translation":
        return xs + params["dx"], ys + params["dy"]
    if kind == "rotation":
        theta = math.radians(params["angle_deg"])
        c, s = math.cos(theta), math.sin(theta)
        rx, ry = xs - cx, ys - cy
        return cx + c * rx - s * ry, cy + s * rx + c * ry
    scale = params["scale"]
    return cx + scale * (xs - cx), cy + scale * (ys - cy)


def _inverse_map(kind, params, xs, ys, cx, cy):
    """Where each frame-2 pixel came from in frame 1."""
    if kind == "translation":
        return xs - params["dx"], ys - params["dy"]
    if kind == "rotation":
        theta = math.radians(params["angle_deg"])
        c, s = math.cos(theta), math.sin(theta)
        rx, ry = xs - cx, ys - cy
        return cx + c * rx + s * ry, cy - s * rx + c * ry
    scale = params["scale"]
    return cx + (xs - cx) / scale, cy + (ys - cy) / scale


def make_scene(kind: str = "translation", width: int = 64, height: int = 64,
               seed: int = 0, **params) -> SyntheticScene:
    """Build a frame pair moving by a known global motion.

    ``kind`` selects the motion and its keyword parameters:

    - ``translation``: ``dx``, ``dy`` in pixels (default 1, 0)
    - ``rotation``: ``angle_deg`` about the frame centre (default 2)
    - ``zoom``: ``scale`` about the frame centre (default 1.05)

    Frame 2 is frame 1's texture resampled bilinearly through the inverse
    motion; ``gt`` is the forward displacement of every frame-1 pixel.
    """
    if kind not in SCENE_KINDS:
        raise ParameterError(f"unknown scene kind {kind!r}; expected one of {SCENE_KINDS}")
    if width < 1 or height < 1:
        raise ParameterError(f"scene size must be positive, got {width}x{height}")
    if kind == "translation":
        params = {"dx": float(params.get("dx", 1.0)), "dy": float(params.get("dy", 0.0))}
    elif kind == "rotation":
        params = {"angle_deg": float(params.get("angle_deg", 2.0))}
    else:
        params = {"scale": float(params.get("scale", 1.05))}
        if params["scale"] <= 0:
            raise ParameterError(f"zoom scale must be positive, got {params['scale']}")

    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    fx, fy = _forward_map(kind, params, xs, ys, cx, cy)
    bx, by = _inverse_map(kind, params, xs, ys, cx, cy)
    reach = max(np.max(np.abs(fx - xs)), np.max(np.abs(fy - ys)),
                np.max(np.abs(bx - xs)), np.max(np.abs(by - ys)))
    margin = int(math.ceil(reach)) + 2

    texture = make_texture(width + 2 * margin, height + 2 * margin, seed)
    frame1 = texture[margin:margin + height, margin:margin + width].copy()
    frame2 = bilinear_sample_grid(texture, bx + margin, by + margin)
    gt = FlowField(fx - xs, fy - ys)
    return SyntheticScene(frame1, frame2, gt, kind, params)
