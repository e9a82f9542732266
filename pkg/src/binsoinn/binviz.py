"""Render a file's bytes as a Hilbert-ordered colour image."""

from __future__ import annotations

import enum
import hashlib
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hilbert import DEFAULT_MAX_SIDE, curve_points, order_for_length


class ColorClass(enum.IntEnum):
    PRINTABLE = 0
    CONTROL = 1
    EXTENDED = 2
    NULL = 3
    NON_BREAKING = 4


PALETTE = {
    ColorClass.PRINTABLE: (0, 0, 255),
    ColorClass.CONTROL: (0, 255, 0),
    ColorClass.EXTENDED: (255, 0, 0),
    ColorClass.NULL: (0, 0, 0),
    ColorClass.NON_BREAKING: (255, 255, 255),
}

COLOR_NAMES = {
    ColorClass.PRINTABLE: "blue",
    ColorClass.CONTROL: "green",
    ColorClass.EXTENDED: "red",
    ColorClass.NULL: "black",
    ColorClass.NON_BREAKING: "white",
}


def classify_byte(b: int) -> ColorClass:
    if not 0 <= b <= 0xFF:
        raise ValueError(f"not a byte value: {b}")
    if b == 0x00:
        return ColorClass.NULL
    if b == 0xFF:
        return ColorClass.NON_BREAKING
    if 0x20 <= b <= 0x7E:
        return ColorClass.PRINTABLE
    if b < 0x20 or b == 0x7F:
        return ColorClass.CONTROL
    return ColorClass.EXTENDED


def class_to_rgb(c: ColorClass) -> tuple[int, int, int]:
    return PALETTE[ColorClass(c)]


# byte value -> class / rgb lookup tables used by render()
CLASS_TABLE = np.array([classify_byte(b) for b in range(256)], dtype=np.uint8)
RGB_TABLE = np.array([class_to_rgb(c) for c in CLASS_TABLE], dtype=np.uint8)


def palette_hash() -> str:
    """Fingerprint of the byte -> colour mapping, stored with trained models."""
    return hashlib.sha256(RGB_TABLE.tobytes()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ByteImage:
    """A square image of side ``2**n`` built from a file's bytes.

    ``pixels`` is a ``(side, side, 3)`` uint8 array indexed ``[row, column]``;
    ``values`` holds the sampled byte behind every pixel (0 for padding).
    """

    side: int
    pixels: np.ndarray
    values: np.ndarray
    source_len: int
    file_ext: str | None = None

    @property
    def data_pixels(self) -> int:
        """Number of pixels backed by real file bytes rather than padding."""
        return min(self.source_len, self.side * self.side)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ByteImage):
            return NotImplemented
        return (
            self.side == other.side
            and self.source_len == other.source_len
            and self.file_ext == other.file_ext
            and np.array_equal(self.pixels, other.pixels)
            and np.array_equal(self.values, other.values)
        )


def sample_bytes(data: bytes, cells: int) -> np.ndarray:
    """Byte for every curve position: stride-sampled if too long, zero padded if short."""
    buf = np.frombuffer(data, dtype=np.uint8)
    n = len(buf)
    if n > cells:
        idx = (np.arange(cells, dtype=np.int64) * n) // cells
        return buf[idx]
    out = np.zeros(cells, dtype=np.uint8)
    out[:n] = buf
    return out


def render(
    data: bytes, max_side: int = DEFAULT_MAX_SIDE, file_ext: str | None = None
) -> ByteImage:
    order = order_for_length(len(data), max_side)
    side = 1 << order
    seq = sample_bytes(data, side * side)
    xs, ys = curve_points(order)
    values = np.empty((side, side), dtype=np.uint8)
    values[ys, xs] = seq
    pixels = RGB_TABLE[values]
    return ByteImage(side, pixels, values, len(data), file_ext)


def render_file(path: str | Path, max_side: int = DEFAULT_MAX_SIDE) -> ByteImage:
    path = Path(path)
    return render(path.read_bytes(), max_side, file_extension(path))


def file_extension(path: str | Path) -> str:
    return Path(path).suffix.lower().lstrip(".")


def _chunk(tag: bytes, body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + tag + body + struct.pack(">I", zlib.crc32(tag + body))


def encode_png(pixels: np.ndarray) -> bytes:
    """Encode an ``(h, w, 3)`` uint8 array as an 8-bit RGB PNG (filter 0, no ancillary chunks)."""
    h, w, c = pixels.shape
    if c != 3 or pixels.dtype != np.uint8:
        raise ValueError("expected an (h, w, 3) uint8 array")
    raw = np.zeros((h, 1 + 3 * w), dtype=np.uint8)
    raw[:, 1:] = pixels.reshape(h, 3 * w)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw.tobytes(), 9))
        + _chunk(b"IEND", b"")
    )


def write_png(img: ByteImage, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_png(img.pixels))
    except OSError as exc:
        raise OSError(f"cannot write PNG to {path}: {exc.strerror or exc}") from exc
