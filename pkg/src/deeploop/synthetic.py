"""Procedural grayscale scenes and image sequences for tests and demos.

Scenes are layered random primitives (shaded background, rectangles,
ellipses, bars, sinusoidal texture patches) so that images differ in both
coarse layout and fine texture.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import corner_quad, homography_from_four_points, random_four_points, warp_image
from .image import GrayImage, scale_intensity


def _draw(canvas, rng, n_shapes):
    h, w = canvas.shape
    for _ in range(n_shapes):
        kind = rng.integers(4)
        val = rng.uniform(0, 255)
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        size = rng.uniform(0.04, 0.3) * min(h, w)
        # every primitive fits in a box of half-width 2.1 * size around its center
        r = 2.1 * size
        x0, x1 = max(int(cx - r), 0), min(int(cx + r) + 1, w)
        y0, y1 = max(int(cy - r), 0), min(int(cy + r) + 1, h)
        yy, xx = np.mgrid[y0:y1, x0:x1].astype(np.float64)
        view = canvas[y0:y1, x0:x1]
        if kind == 0:
            rw, rh = size * rng.uniform(0.5, 2.0), size * rng.uniform(0.5, 2.0)
            m = (np.abs(xx - cx) < rw) & (np.abs(yy - cy) < rh)
        elif kind == 1:
            a, b = size * rng.uniform(0.5, 1.5), size * rng.uniform(0.5, 1.5)
            t = rng.uniform(0, np.pi)
            u = (xx - cx) * np.cos(t) + (yy - cy) * np.sin(t)
            v = -(xx - cx) * np.sin(t) + (yy - cy) * np.cos(t)
            m = (u / a) ** 2 + (v / b) ** 2 < 1
        elif kind == 2:
            t = rng.uniform(0, np.pi)
            d = (xx - cx) * np.cos(t) + (yy - cy) * np.sin(t)
            along = -(xx - cx) * np.sin(t) + (yy - cy) * np.cos(t)
            m = (np.abs(d) < size * 0.15) & (np.abs(along) < size * 2)
        else:
            rad = size * rng.uniform(0.8, 1.5)
            m = (xx - cx) ** 2 + (yy - cy) ** 2 < rad * rad
            f = rng.uniform(0.15, 0.6)
            t = rng.uniform(0, np.pi)
            tex = 0.5 + 0.5 * np.sin(f * ((xx - cx) * np.cos(t) + (yy - cy) * np.sin(t)))
            view[m] = (1 - tex[m]) * view[m] + tex[m] * val
            continue
        view[m] = val


def procedural_scene(rng: np.random.Generator, width: int = 160, height: int = 120,
                     n_shapes: int | None = None) -> GrayImage:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    g = rng.uniform(-1, 1, 2)
    canvas = rng.uniform(60, 190) + 50 * (g[0] * xx / width + g[1] * yy / height)
    _draw(canvas, rng, int(rng.integers(8, 16)) if n_shapes is None else n_shapes)
    canvas += rng.normal(0, 3, canvas.shape)
    return GrayImage.from_array(np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8))


def corpus(n: int, seed: int, width: int = 160, height: int = 120) -> list[GrayImage]:
    rng = np.random.default_rng(seed)
    return [procedural_scene(rng, width, height) for _ in range(n)]


def world_strip(rng: np.random.Generator, length: int, height: int = 120) -> np.ndarray:
    """A seamless panorama: slowly varying shaded background with primitives
    scattered along its whole length at the density of a single scene."""
    x = np.arange(length, dtype=np.float64)
    level = np.full(length, rng.uniform(90, 160))
    slope = np.zeros(length)
    for _ in range(4):
        period = rng.uniform(250, 1500)
        level += rng.uniform(10, 25) * np.sin(2 * np.pi * x / period + rng.uniform(0, 2 * np.pi))
        slope += rng.uniform(5, 15) * np.sin(2 * np.pi * x / period + rng.uniform(0, 2 * np.pi))
    yy = np.arange(height, dtype=np.float64)[:, None] / height - 0.5
    canvas = level[None, :] + 2 * slope[None, :] * yy
    _draw(canvas, rng, int(round(12 * length / 160)))
    canvas += rng.normal(0, 3, canvas.shape)
    return np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)


def alg1_warp(img: GrayImage, rng: np.random.Generator) -> GrayImage:
    """Warp by a random inner-quad-to-corners homography (training-style)."""
    quad = random_four_points(img.width, img.height, rng)
    return warp_image(img, homography_from_four_points(quad, corner_quad(img.width, img.height)))


@dataclass
class PlantedSequence:
    frames: list[GrayImage]
    revisit: range  # frame indices of the revisited segment
    source: dict[int, int]  # revisit frame -> original frame it re-observes


def planted_loop_sequence(seed: int, n_frames: int = 700, revisit_len: int = 70,
                          revisit_of: int = 70, step: int = 4,
                          gain_range: tuple[float, float] = (0.6, 0.85)) -> PlantedSequence:
    """Camera panning along a strip; the last ``revisit_len`` frames re-observe
    frames ``revisit_of ...`` under fresh random warps and a global gain."""
    n_orig = n_frames - revisit_len
    if revisit_len < 1 or revisit_of < 0 or revisit_of + revisit_len > n_orig:
        raise ValueError(f"revisit of frames {revisit_of}..{revisit_of + revisit_len - 1} "
                         f"does not fit before frame {n_orig}")
    rng = np.random.default_rng(seed)
    strip = world_strip(rng, (n_orig - 1) * step + 160)
    frames = [GrayImage.from_array(strip[:, i * step:i * step + 160]) for i in range(n_orig)]
    gain = rng.uniform(*gain_range)
    source = {}
    for j in range(revisit_len):
        src = revisit_of + j
        frames.append(scale_intensity(alg1_warp(frames[src], rng), gain))
        source[n_orig + j] = src
    return PlantedSequence(frames, range(n_orig, n_frames), source)
