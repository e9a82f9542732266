"""Stripe-wise colour histogram features.

An image is cut into four equal horizontal bands (top, upper middle, lower
middle, bottom). Each band yields a normalised 256-bin histogram and the four
are concatenated into a 1024-long vector.

Two binnings exist and must not be mixed within one model:

``rgb332``
    pixel colour quantised to 3-3-2 bits (default)
``byte256``
    raw sampled byte value behind each pixel
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .binviz import CLASS_TABLE, COLOR_NAMES, ByteImage, ColorClass
from .hilbert import curve_points

N_STRIPES = 4
N_BINS = 256
K = N_STRIPES * N_BINS
VARIANTS = ("rgb332", "byte256")
DEFAULT_VARIANT = "rgb332"


class Stripe(enum.IntEnum):
    TOP = 0
    UPPER_MIDDLE = 1
    LOWER_MIDDLE = 2
    BOTTOM = 3


@dataclass(eq=False)
class FeatureVector:
    values: np.ndarray
    source_ext: str | None = None
    variant: str = DEFAULT_VARIANT

    def __len__(self) -> int:
        return len(self.values)

    def block(self, stripe: Stripe) -> np.ndarray:
        return self.values[stripe * N_BINS : (stripe + 1) * N_BINS]


def quantize_color(r: int, g: int, b: int) -> int:
    return (r >> 5) << 5 | (g >> 5) << 2 | (b >> 6)


def quantize_pixels(pixels: np.ndarray) -> np.ndarray:
    """Vectorised :func:`quantize_color` over an ``(..., 3)`` uint8 array."""
    p = pixels.astype(np.uint16)
    return ((p[..., 0] >> 5) << 5 | (p[..., 1] >> 5) << 2 | (p[..., 2] >> 6)).astype(np.uint8)


def _bin_image(img: ByteImage, variant: str) -> np.ndarray:
    if variant == "rgb332":
        return quantize_pixels(img.pixels)
    if variant == "byte256":
        return img.values
    raise ValueError(f"unknown extractor variant {variant!r}; expected one of {VARIANTS}")


def _stripe_rows(side: int, stripe: Stripe) -> slice:
    h = side // N_STRIPES
    return slice(stripe * h, (stripe + 1) * h)


def stripe_histogram(img: ByteImage, stripe: Stripe, variant: str = DEFAULT_VARIANT) -> np.ndarray:
    if img.side < N_STRIPES:
        raise ValueError(f"image side {img.side} too small for {N_STRIPES} stripes")
    bins = _bin_image(img, variant)[_stripe_rows(img.side, Stripe(stripe))]
    counts = np.bincount(bins.ravel(), minlength=N_BINS)
    return counts / bins.size


def extract(img: ByteImage, variant: str = DEFAULT_VARIANT) -> FeatureVector:
    """Concatenate the four stripe histograms (top to bottom).

    A 2x2 image (files of at most four bytes) is treated as its 4x4
    nearest-neighbour enlargement, so each row feeds two stripes.
    """
    bins = _bin_image(img, variant)
    if img.side < N_STRIPES:
        bins = np.repeat(np.repeat(bins, 2, axis=0), 2, axis=1)
    side = bins.shape[0]
    out = np.empty(K, dtype=np.float64)
    for s in Stripe:
        band = bins[_stripe_rows(side, s)]
        out[s * N_BINS : (s + 1) * N_BINS] = np.bincount(band.ravel(), minlength=N_BINS) / band.size
    return FeatureVector(out, img.file_ext, variant)


def color_frequencies(img: ByteImage) -> dict[str, float]:
    """Fraction of non-padding pixels falling in each colour class."""
    n = img.data_pixels
    freqs = {COLOR_NAMES[c]: 0.0 for c in ColorClass}
    if n == 0:
        return freqs
    order = img.side.bit_length() - 1
    xs, ys = curve_points(order)
    seq = img.values[ys[:n], xs[:n]]
    counts = np.bincount(CLASS_TABLE[seq], minlength=len(ColorClass))
    for c in ColorClass:
        freqs[COLOR_NAMES[c]] = counts[c] / n
    return freqs


def write_csv(
    path: str | Path, vectors: Sequence[FeatureVector], labels: Sequence[str]
) -> None:
    """One row per vector: 1024 values, label, file extension."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(K)] + ["label", "ext"])
        for fv, label in zip(vectors, labels):
            w.writerow([repr(float(v)) for v in fv.values] + [label, fv.source_ext or ""])


def read_csv(path: str | Path, variant: str = DEFAULT_VARIANT) -> tuple[list[FeatureVector], list[str]]:
    vectors, labels = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or header[-2:] != ["label", "ext"] or len(header) != K + 2:
            raise ValueError(f"{path}: not a feature dataset CSV")
        for lineno, row in enumerate(r, start=2):
            if len(row) != K + 2:
                raise ValueError(f"{path}:{lineno}: expected {K + 2} columns, got {len(row)}")
            vals = np.array([float(v) for v in row[:K]], dtype=np.float64)
            vectors.append(FeatureVector(vals, row[K + 1] or None, variant))
            labels.append(row[K])
    return vectors, labels


def stack(vectors: Iterable[FeatureVector]) -> np.ndarray:
    return np.vstack([fv.values for fv in vectors])
