"""Independent scalar oracles and fixtures shared by the tests.

Everything here is written with explicit Python loops over pixels so it
shares no code path with the vectorised library routines it checks.
"""

import math

import numpy as np

from denseflow.imagery import spatial_gradients


def clamp(i, n):
    return min(max(i, 0), n - 1)


def naive_correlate(image, kernel):
    """Direct stencil sum with replicated borders."""
    h, w = image.shape
    r = kernel.shape[0] // 2
    out = np.zeros_like(image, dtype=float)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    acc += kernel[dy + r, dx + r] * image[clamp(y + dy, h), clamp(x + dx, w)]
            out[y, x] = acc
    return out


def scalar_bilinear(image, x, y):
    h, w = image.shape
    x = min(max(x, 0.0), w - 1.0)
    y = min(max(y, 0.0), h - 1.0)
    i, j = int(math.floor(x)), int(math.floor(y))
    a, b = x - i, y - j
    i1, j1 = min(i + 1, w - 1), min(j + 1, h - 1)
    return ((1 - a) * (1 - b) * image[j, i] + a * (1 - b) * image[j, i1]
            + (1 - a) * b * image[j1, i] + a * b * image[j1, i1])


def scalar_aae_deg(est, gt, eps=1e-8, mask=None):
    total, n = 0.0, 0
    for y in range(est.height):
        for x in range(est.width):
            if mask is not None and not mask[y, x]:
                continue
            u, v = est.u[y, x], est.v[y, x]
            ug, vg = gt.u[y, x], gt.v[y, x]
            c = (u * ug + v * vg) / (math.sqrt(u * u + v * v + eps)
                                     * math.sqrt(ug * ug + vg * vg + eps) + eps)
            c = min(1.0, max(-1.0, c))
            total += math.degrees(math.acos(c))
            n += 1
    return total / n


def scalar_epe(est, gt, mask=None):
    total, n = 0.0, 0
    for y in range(est.height):
        for x in range(est.width):
            if mask is not None and not mask[y, x]:
                continue
            total += math.hypot(est.u[y, x] - gt.u[y, x], est.v[y, x] - gt.v[y, x])
            n += 1
    return total / n


def interior_mask(frame1, margin=8):
    """Textured interior: gradient magnitude above its median, away from edges."""
    ix, iy = spatial_gradients(frame1)
    mag = np.hypot(ix, iy)
    mask = mag > np.median(mag)
    mask[:margin, :] = False
    mask[-margin:, :] = False
    mask[:, :margin] = False
    mask[:, -margin:] = False
    return mask


def interior_epe(flow, scene, margin=8):
    mask = interior_mask(scene.frame1, margin)
    err = np.hypot(flow.u - scene.gt.u, flow.v - scene.gt.v)
    return float(err[mask].mean())
