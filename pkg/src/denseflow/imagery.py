"""Grayscale images and the low-level filters every solver consumes.

Images are plain ``float64`` numpy arrays of shape ``(height, width)``,
indexed ``image[y, x]``. Intensities are nominally in ``[0, 1]``; 8-bit
files are divided by 255 on load.

All filtering and sampling replicates the border pixel (clamp-to-edge),
so gradients stay quiet at the frame edges and warps are defined for any
displacement.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, IngestionError, ShapeError

__all__ = [
    "SOBEL_X",
    "SOBEL_Y",
    "GAUSSIAN_5X5",
    "as_image",
    "check_kernel",
    "convolve",
    "spatial_gradients",
    "temporal_gradient",
    "gaussian_smooth",
    "bilinear_sample",
    "bilinear_sample_grid",
    "warp",
    "read_image",
    "write_png",
]

# Divided by 8 so that the ramp I(x, y) = x has I_x = 1.
SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]]) / 8.0
SOBEL_Y = SOBEL_X.T.copy()

_BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
GAUSSIAN_5X5 = np.outer(_BINOMIAL_5, _BINOMIAL_5)

for _k in (SOBEL_X, SOBEL_Y, GAUSSIAN_5X5):
    _k.setflags(write=False)


def as_image(data, name="image") -> np.ndarray:
    """Validate ``data`` as a grayscale image and return it as float64.

    No copy is made when ``data`` is already a float64 array.
    """
    image = np.asarray(data, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ShapeError(f"{name} must be at least 1x1, got {image.shape}")
    if not np.all(np.isfinite(image)):
        raise DegenerateInputError(f"{name} contains non-finite intensities")
    return image


def check_kernel(kernel) -> np.ndarray:
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ShapeError(f"kernel must be square, got shape {kernel.shape}")
    if kernel.shape[0] % 2 == 0:
        raise ShapeError(f"kernel size must be odd, got {kernel.shape[0]}")
    return kernel


def _dims(image: np.ndarray) -> str:
    return f"{image.shape[1]}x{image.shape[0]}"


def _same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what}: dimension mismatch {_dims(a)} vs {_dims(b)}")


def _stencil(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # sum(K) * I + sum_k K_k (I_k - I): exact on constant images whenever
    # sum(K) is 1 (smoothing) or 0 (derivatives)
    r = kernel.shape[0] // 2
    h, w = image.shape
    padded = np.pad(image, r, mode="edge")
    total = float(kernel.sum())
    if total == 1.0:
        acc = image.copy()
    else:
        acc = image * total
    diff = np.empty_like(image)
    for dy in range(kernel.shape[0]):
        for dx in range(kernel.shape[1]):
            weight = kernel[dy, dx]
            if weight == 0.0 or (dy == r and dx == r):
                continue
            np.subtract(padded[dy:dy + h, dx:dx + w], image, out=diff)
            diff *= weight
            acc += diff
    return acc


def convolve(image, kernel) -> np.ndarray:
    """Apply ``kernel`` as a centred stencil with edge replication.

    The kernel is used as written (correlation), so ``SOBEL_X`` yields a
    positive response to intensity increasing along +x. For the symmetric
    smoothing kernels this is the same as convolution. A kernel summing
    to 1 maps constant images to themselves exactly, and one summing to 0
    maps them to exact zeros.

    Raises
    ------
    DegenerateInputError
        If the kernel is larger than the image in both dimensions.
    """
    image = as_image(image)
    kernel = check_kernel(kernel)
    size = kernel.shape[0]
    if size > image.shape[0] and size > image.shape[1]:
        raise DegenerateInputError(
            f"{size}x{size} kernel is larger than the {_dims(image)} image"
        )
    return _stencil(image, kernel)


def spatial_gradients(image) -> tuple[np.ndarray, np.ndarray]:
    """Sobel derivatives ``(I_x, I_y)`` of ``image`` in intensity per pixel."""
    image = as_image(image)
    if image.shape[0] < 3 or image.shape[1] < 3:
        raise DegenerateInputError(
            f"spatial gradients need at least a 3x3 image, got {_dims(image)}"
        )
    # I_y from the transposed image keeps the two derivatives exact mirrors
    return convolve(image, SOBEL_X), convolve(image.T, SOBEL_X).T.copy()


def temporal_gradient(frame1, frame2) -> np.ndarray:
    """Pixel-wise ``frame2 - frame1``."""
    frame1 = as_image(frame1, "frame1")
    frame2 = as_image(frame2, "frame2")
    _same_shape(frame1, frame2, "temporal gradient")
    return frame2 - frame1


def _smooth_axis(image: np.ndarray, axis: int) -> np.ndarray:
    n = image.shape[axis]
    pad = [(0, 0), (0, 0)]
    pad[axis] = (2, 2)
    padded = np.pad(image, pad, mode="edge")
    acc = image.copy()
    diff = np.empty_like(image)
    for k, weight in enumerate(_BINOMIAL_5):
        if k == 2:
            continue
        window = padded[:, k:k + n] if axis == 1 else padded[k:k + n, :]
        np.subtract(window, image, out=diff)
        diff *= weight
        acc += diff
    return acc


def gaussian_smooth(image) -> np.ndarray:
    """Local average with the 5x5 binomial kernel.

    Equal to ``convolve(image, GAUSSIAN_5X5)`` up to rounding; applied as
    two 1-D passes, which is cheaper inside the solver loops. Unlike
    :func:`convolve` it accepts images smaller than the kernel, since edge
    replication still defines every tap.
    """
    image = as_image(image)
    return _smooth_axis(_smooth_axis(image, 1), 0)


def bilinear_sample_grid(image: np.ndarray, xs, ys) -> np.ndarray:
    """Vectorised bilinear lookup at arrays of coordinates.

    Coordinates are clamped to ``[0, width-1] x [0, height-1]`` first, so
    the result is defined everywhere. ``image`` is assumed validated.
    """
    h, w = image.shape
    x = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    y = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    i = np.floor(x).astype(np.intp)
    j = np.floor(y).astype(np.intp)
    a = x - i
    b = y - j
    i1 = np.minimum(i + 1, w - 1)
    j1 = np.minimum(j + 1, h - 1)
    # nested lerps: algebraically the four-weight form, but exact on
    # constants and at lattice points
    f00, f10 = image[j, i], image[j, i1]
    f01, f11 = image[j1, i], image[j1, i1]
    top = f00 + a * (f10 - f00)
    bottom = f01 + a * (f11 - f01)
    return top + b * (bottom - top)


def bilinear_sample(image, x: float, y: float) -> float:
    """Bilinearly interpolated intensity at the continuous point ``(x, y)``.

    With ``i = floor(x)``, ``j = floor(y)``, ``a = x - i``, ``b = y - j``::

        (1-a)(1-b) f(i,j) + a(1-b) f(i+1,j) + (1-a)b f(i,j+1) + ab f(i+1,j+1)

    where ``f(i, j)`` is the pixel in column ``i``, row ``j``. Points
    outside the image are clamped onto its border.
    """
    image = as_image(image)
    return float(bilinear_sample_grid(image, x, y))


def warp(image, flow) -> np.ndarray:
    """Inverse-map ``image`` through ``flow``.

    ``out[y, x] = image(x + u[y, x], y + v[y, x])`` sampled bilinearly, so
    warping the second frame by the true flow reproduces the first.
    """
    image = as_image(image)
    if image.shape != flow.shape:
        raise ShapeError(
            f"warp: image is {_dims(image)} but flow is "
            f"{flow.width}x{flow.height}"
        )
    h, w = image.shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return bilinear_sample_grid(image, xs + flow.u, ys + flow.v)


def _luminance(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def read_image(path) -> np.ndarray:
    """Load an 8-bit PGM (P5) or PNG as a ``[0, 1]`` grayscale image.

    Colour inputs are reduced with ``0.299 R + 0.587 G + 0.114 B`` before
    the division by 255; an alpha channel is ignored.
    """
    from PIL import Image

    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "P", "RGB", "RGBA", "LA"):
                if mode == "P":
                    im = im.convert("RGB")
                    mode = "RGB"
                data = np.asarray(im)
            elif mode in ("I;16", "I", "F"):
                raise IngestionError(
                    f"{path}: only 8-bit images are supported (mode {mode})"
                )
            else:
                data = np.asarray(im.convert("RGB"))
                mode = "RGB"
    except FileNotFoundError:
        raise IngestionError(f"{path}: no such file") from None
    except IngestionError:
        raise
    except OSError as exc:
        raise IngestionError(f"{path}: cannot read image ({exc})") from None

    if mode == "LA":
        gray = data[..., 0].astype(np.float64)
    elif data.ndim == 3:
        gray = _luminance(data[..., :3])
    else:
        gray = data.astype(np.float64)
    return gray / 255.0


def write_png(path, image) -> None:
    """Save a ``[0, 1]`` image as 8-bit grayscale PNG (values clipped)."""
    from PIL import Image

    image = as_image(image)
    data = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")
