"""Middlebury ``.flo`` files, colour-wheel rendering and Sintel ingestion.

``.flo`` layout (all little-endian)::

    bytes 0-3    b"PIEH"  (the float32 202021.25)
    bytes 4-7    int32 width
    bytes 8-11   int32 height
    bytes 12-    float32 u, v interleaved, row-major
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, EncodingError, FormatError, IngestionError
from .flow_core import FlowField
from .imagery import read_image

__all__ = ["FLO_MAGIC", "read_flo", "write_flo", "read_flo_file",
           "write_flo_file", "make_colorwheel", "flow_to_color",
           "write_color_png", "load_scene_pair"]

FLO_MAGIC = b"PIEH"
_HEADER = struct.Struct("<4sii")


def write_flo(flow: FlowField) -> bytes:
    """Encode ``flow`` as ``.flo`` bytes (components rounded to float32)."""
    with np.errstate(over="ignore"):
        u32 = flow.u.astype("<f4")
        v32 = flow.v.astype("<f4")
    if not (np.all(np.isfinite(u32)) and np.all(np.isfinite(v32))):
        raise EncodingError("flow has components that overflow float32")
    data = np.empty((flow.height, flow.width, 2), dtype="<f4")
    data[..., 0] = u32
    data[..., 1] = v32
    return _HEADER.pack(FLO_MAGIC, flow.width, flow.height) + data.tobytes()


def read_flo(data: bytes) -> FlowField:
    """Decode ``.flo`` bytes.

    Unknown-flow sentinel values are kept as stored; use
    :meth:`FlowField.valid_mask` to exclude them.
    """
    if len(data) < _HEADER.size:
        raise FormatError(
            f"truncated header: expected {_HEADER.size} bytes, got {len(data)}"
        )
    magic, width, height = _HEADER.unpack_from(data)
    if magic != FLO_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {FLO_MAGIC!r}")
    if width < 1 or height < 1:
        raise FormatError(f"invalid dimensions {width}x{height}")
    expected = _HEADER.size + 8 * width * height
    if len(data) != expected:
        raise FormatError(
            f"payload size mismatch for {width}x{height}: expected {expected} bytes, "
            f"got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    values = values.reshape(height, width, 2).astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise FormatError("flow payload contains NaN or infinite values")
    return FlowField(values[..., 0], values[..., 1])


def read_flo_file(path) -> FlowField:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise IngestionError(f"{path}: no such file") from None
    try:
        return read_flo(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_flo_file(path, flow: FlowField) -> None:
    Path(path).write_bytes(write_flo(flow))


def make_colorwheel() -> np.ndarray:
    """The 55-entry Middlebury colour wheel as float RGB in ``[0, 255]``.

    Segments: red-yellow 15, yellow-green 6, green-cyan 4, cyan-blue 11,
    blue-magenta 13, magenta-red 6.
    """
    segments = [(15, (255, 0, 0), (255, 255, 0)),
                (6, (255, 255, 0), (0, 255, 0)),
                (4, (0, 255, 0), (0, 255, 255)),
                (11, (0, 255, 255), (0, 0, 255)),
                (13, (0, 0, 255), (255, 0, 255)),
                (6, (255, 0, 255), (255, 0, 0))]
    rows = []
    for n, start, end in segments:
        ramp = np.floor(255.0 * np.arange(n) / n)
        seg = np.empty((n, 3))
        for c in range(3):
            if start[c] == end[c]:
                seg[:, c] = start[c]
            elif end[c] > start[c]:
                seg[:, c] = ramp
            else:
                seg[:, c] = 255.0 - ramp
        rows.append(seg)
    return np.vstack(rows)


_WHEEL = make_colorwheel()


def _wheel_color(position: np.ndarray) -> np.ndarray:
    """Interpolated wheel colour (0..1) at a fraction of a full turn."""
    ncols = _WHEEL.shape[0]
    fk = np.mod(position, 1.0) * ncols
    k0 = np.floor(fk).astype(np.intp) % ncols
    k1 = (k0 + 1) % ncols
    f = (fk - np.floor(fk))[..., None]
    return ((1 - f) * _WHEEL[k0] + f * _WHEEL[k1]) / 255.0


def flow_to_color(flow: FlowField, max_magnitude: float | None = None) -> np.ndarray:
    """Render ``flow`` as an ``(height, width, 3)`` uint8 RGB image.

    Hue follows the direction ``atan2(v, u)`` around the Middlebury wheel;
    saturation is ``min(1, |w| / max_magnitude)`` so zero motion is white.
    Without ``max_magnitude`` the 99th-percentile magnitude of the field is
    used (at least 1e-6). Unknown-flow pixels are drawn black.
    """
    valid = flow.valid_mask()
    u = np.where(valid, flow.u, 0.0)
    v = np.where(valid, flow.v, 0.0)
    mag = np.hypot(u, v)
    if max_magnitude is None:
        max_magnitude = float(np.percentile(mag[valid], 99)) if valid.any() else 0.0
    max_magnitude = max(float(max_magnitude), 1e-6)
    sat = np.minimum(1.0, mag / max_magnitude)[..., None]
    # position 0 points along -x, as in the reference colour code
    position = (np.arctan2(-v, -u) / np.pi + 1.0) / 2.0
    col = _wheel_color(position)
    rgb = 1.0 - sat * (1.0 - col)
    out = np.floor(255.0 * rgb + 0.5).astype(np.uint8)
    out[~valid] = 0
    return out


def write_color_png(path, rgb: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(rgb), mode="RGB").save(Path(path), format="PNG")


def load_scene_pair(frames_dir, frame_index: int, flow_dir=None):
    """Load frames ``t``, ``t+1`` and the ground truth for frame ``t``.

    Files follow Sintel naming: ``frame_0001.png`` and ``frame_0001.flo``.
    The ``.flo`` is looked up in ``flow_dir`` (default: ``frames_dir``).

    Returns
    -------
    frame1, frame2 : ndarray
    gt : FlowField
    """
    frames_dir = Path(frames_dir)
    flow_dir = frames_dir if flow_dir is None else Path(flow_dir)
    paths = (frames_dir / f"frame_{frame_index:04d}.png",
             frames_dir / f"frame_{frame_index + 1:04d}.png",
             flow_dir / f"frame_{frame_index:04d}.flo")
    for p in paths:
        if not p.is_file():
            raise IngestionError(f"missing file {p}")
    frame1 = read_image(paths[0])
    frame2 = read_image(paths[1])
    gt = read_flo_file(paths[2])
    if frame1.shape != frame2.shape:
        raise ConsistencyError(
            f"frames differ in size: {frame1.shape[1]}x{frame1.shape[0]} "
            f"vs {frame2.shape[1]}x{frame2.shape[0]}"
        )
    if gt.shape != frame1.shape:
        raise ConsistencyError(
            f"ground truth is {gt.width}x{gt.height} but frames are "
            f"{frame1.shape[1]}x{frame1.shape[0]}"
        )
    return frame1, frame2, gt
