"""Image loading, enhancement and Canny edge detection.

Images are 2-D ``uint8`` numpy arrays indexed ``[row, col]`` (so ``y`` first);
edge maps are 2-D boolean arrays of the same shape.  All intensity arithmetic
rounds half-up and clamps to [0, 255] so results are identical across
platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import ConfigError, DegenerateImageError, InvalidImageError

GrayImage = np.ndarray  # (h, w) uint8
EdgeMap = np.ndarray  # (h, w) bool

EDGE_ANGLES = (0, 45, 90, 135)


@dataclass
class EnhancementConfig:
    """Parameters for the enhancement chain and the Canny detector.

    The chain runs: white-border crop, histogram equalization, gamma
    correction, median denoising, unsharp masking.  Every step can be
    disabled through its parameter (``equalize=False``, ``gamma=1.0``,
    ``denoise_window=1``, ``unsharp_amount=0``, ``crop_threshold=256``).
    """

    gamma: float = 1.5
    denoise_window: int = 3
    unsharp_amount: float = 1.0
    unsharp_radius: float = 2.0
    crop_threshold: float = 245.0
    canny_low: float = 50.0
    canny_high: float = 150.0
    canny_sigma: float = 1.4
    equalize: bool = True

    def validate(self) -> None:
        if self.canny_low >= self.canny_high:
            raise ConfigError(f"canny_low ({self.canny_low}) must be < canny_high ({self.canny_high})")
        if self.denoise_window < 1 or self.denoise_window % 2 == 0:
            raise ConfigError(f"denoise_window must be odd and >= 1, got {self.denoise_window}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.unsharp_amount < 0:
            raise ConfigError(f"unsharp_amount must be >= 0, got {self.unsharp_amount}")


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def load_image(path: str | Path) -> GrayImage:
    """Read a PNG or PGM file as 8-bit grayscale (color inputs use luma weighting)."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_image(image: GrayImage, path: str | Path) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="L").save(path)


def _crop_white_border(image: GrayImage, threshold: float) -> GrayImage:
    """Strip contiguous border rows/columns whose mean intensity >= threshold."""
    img = image
    row_means = img.mean(axis=1)
    top, bottom = 0, img.shape[0]
    while top < bottom and row_means[top] >= threshold:
        top += 1
    while bottom > top and row_means[bottom - 1] >= threshold:
        bottom -= 1
    if top >= bottom:
        raise DegenerateImageError("white-border crop removed every row")
    img = img[top:bottom]
    col_means = img.mean(axis=0)
    left, right = 0, img.shape[1]
    while left < right and col_means[left] >= threshold:
        left += 1
    while right > left and col_means[right - 1] >= threshold:
        right -= 1
    if left >= right:
        raise DegenerateImageError("white-border crop removed every column")
    return img[:, left:right]


def _equalize(image: GrayImage) -> GrayImage:
    hist = np.bincount(image.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    total = image.size
    if cdf_min == total:  # constant image: equalization is the identity
        return image.copy()
    lut = _round_half_up(255.0 * (cdf - cdf_min) / (total - cdf_min))
    return lut[image]


def _gamma_correct(image: GrayImage, gamma: float) -> GrayImage:
    lut = _round_half_up(255.0 * (np.arange(256) / 255.0) ** gamma)
    return lut[image]


def _unsharp(image: GrayImage, amount: float, radius: float) -> GrayImage:
    img = image.astype(np.float64)
    blurred = ndimage.gaussian_filter(img, sigma=radius, mode="reflect")
    return _round_half_up(img + amount * (img - blurred))


def enhance(image: GrayImage, cfg: EnhancementConfig) -> GrayImage:
    """Run the enhancement chain: crop, equalize, gamma, median denoise, unsharp."""
    cfg.validate()
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2 or img.size == 0:
        raise InvalidImageError(f"expected a non-empty 2-D image, got shape {getattr(image, 'shape', None)}")
    img = _crop_white_border(img, cfg.crop_threshold)
    if cfg.equalize:
        img = _equalize(img)
    if cfg.gamma != 1.0:
        img = _gamma_correct(img, cfg.gamma)
    if cfg.denoise_window > 1:
        img = ndimage.median_filter(img, size=cfg.denoise_window, mode="reflect")
    if cfg.unsharp_amount > 0:
        img = _unsharp(img, cfg.unsharp_amount, cfg.unsharp_radius)
    return np.ascontiguousarray(img)


def sobel_gradients(image: GrayImage, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    smoothed = ndimage.gaussian_filter(image.astype(np.float64), sigma=sigma, mode="reflect")
    gx = ndimage.sobel(smoothed, axis=1, mode="reflect")
    gy = ndimage.sobel(smoothed, axis=0, mode="reflect")
    return gx, gy


def quantize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient direction to {0, 45, 90, 135} degrees (mod 180)."""
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    quantized = (np.round(angle / 45.0).astype(np.int32) * 45) % 180
    return quantized


def detect_edges(image: GrayImage, cfg: EnhancementConfig) -> EdgeMap:
    """Canny edge detection: Gaussian smooth, Sobel, 4-direction NMS, hysteresis.

    Output edges are 1-pixel-wide ridges.  Pixels with gradient magnitude >=
    ``canny_high`` seed the hysteresis; pixels >= ``canny_low`` survive only
    when 8-connected to a seed.
    """
    cfg.validate()
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2 or img.size == 0:
        raise InvalidImageError("expected a non-empty 2-D image")
    gx, gy = sobel_gradients(img, cfg.canny_sigma)
    mag = np.hypot(gx, gy)
    direction = quantize_direction(gx, gy)

    # Non-maximum suppression along the gradient direction.  Neighbours use
    # image coordinates (y down), so 45 deg compares the down-right and
    # up-left pixels.
    h, w = mag.shape
    suppressed = np.zeros_like(mag)
    if h > 2 and w > 2:
        center = mag[1:-1, 1:-1]
        neighbours = {
            0: (mag[1:-1, 2:], mag[1:-1, :-2]),
            45: (mag[2:, 2:], mag[:-2, :-2]),
            90: (mag[2:, 1:-1], mag[:-2, 1:-1]),
            135: (mag[:-2, 2:], mag[2:, :-2]),
        }
        keep = np.zeros(center.shape, dtype=bool)
        inner_dir = direction[1:-1, 1:-1]
        for ang, (fwd, bwd) in neighbours.items():
            sel = inner_dir == ang
            keep |= sel & (center >= fwd) & (center >= bwd)
        suppressed[1:-1, 1:-1] = np.where(keep, center, 0.0)

    strong = suppressed >= cfg.canny_high
    weak = suppressed >= cfg.canny_low
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros_like(strong)
    keep_labels = np.unique(labels[strong])
    keep_labels = keep_labels[keep_labels > 0]
    mask = np.isin(labels, keep_labels)
    return mask & weak


def edge_map_to_pgm(edges: EdgeMap, path: str | Path) -> None:
    """Write an edge map as a binary PGM with edge pixels at 255."""
    save_image(np.where(edges, 255, 0).astype(np.uint8), path)


def edge_map_to_rle(edges: EdgeMap) -> dict:
    """Run-length JSON form: {width, height, runs: [[row, start_col, length], ...]}."""
    h, w = edges.shape
    runs = []
    for row in range(h):
        line = edges[row]
        idx = np.flatnonzero(np.diff(np.concatenate(([0], line.view(np.uint8), [0]))))
        for start, stop in zip(idx[0::2], idx[1::2]):
            runs.append([row, int(start), int(stop - start)])
    return {"width": int(w), "height": int(h), "runs": runs}


def edge_map_from_rle(doc: dict) -> EdgeMap:
    edges = np.zeros((doc["height"], doc["width"]), dtype=bool)
    for row, start, length in doc["runs"]:
        edges[row, start : start + length] = True
    return edges


def save_edge_rle(edges: EdgeMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(edge_map_to_rle(edges)))
