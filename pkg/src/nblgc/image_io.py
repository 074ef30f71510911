"""PGM image I/O, gray-level normalization, resizing, dataset loading.

Reads plain (P2) and binary (P5) PGM files, normalizes raw gray levels
to [0, 1] by the per-image maximum, resizes with bilinear interpolation,
and assembles labeled datasets from a ``root/<class>/<image>.pgm`` tree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_GRAY_LIMIT = 65535

_WHITESPACE = b" \t\n\r\x0b\x0c"


class PgmParseError(ValueError):
    """Malformed PGM bytes. ``offset`` is where in the input it went wrong."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class DatasetError(ValueError):
    """A dataset file could not be loaded; message includes the file path."""


@dataclass(frozen=True)
class RawImage:
    """Gray levels exactly as decoded from a PGM file, row-major."""

    width: int
    height: int
    max_gray: int
    pixels: np.ndarray  # 1-D uint16

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if not 1 <= self.max_gray <= MAX_GRAY_LIMIT:
            raise ValueError(f"max_gray must be in [1, {MAX_GRAY_LIMIT}]")
        px = np.asarray(self.pixels, dtype=np.uint16)
        if px.ndim != 1 or px.size != self.width * self.height:
            raise ValueError("pixel count does not match width*height")
        if px.size and int(px.max()) > self.max_gray:
            raise ValueError("pixel value exceeds max_gray")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other):
        if not isinstance(other, RawImage):
            return NotImplemented
        return (self.width, self.height, self.max_gray) == (
            other.width,
            other.height,
            other.max_gray,
        ) and bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class GrayImage:
    """Normalized image: 2-D float64 grid with every value in [0, 1]."""

    pixels: np.ndarray  # shape (height, width)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.isfinite(px).all():
            raise ValueError("pixels must be finite")
        if float(px.min()) < 0.0 or float(px.max()) > 1.0:
            raise ValueError("pixels must lie in [0, 1]")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class DatasetEntry:
    """One loaded image with its class label (its directory name)."""

    class_label: str
    image_index: int  # ordinal within the class, load order
    image: GrayImage
    source_path: str


class _Cursor:
    """Byte cursor over PGM data; skips whitespace and # comments."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_separators(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos : self.pos + 1]
            if b in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c"):
                self.pos += 1
            elif b == b"#":
                # comment runs to end of line
                while self.pos < n and data[self.pos : self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                return

    def next_token(self, what: str) -> tuple[bytes, int]:
        self.skip_separators()
        if self.pos >= len(self.data):
            raise PgmParseError(f"truncated input, missing {what}", self.pos)
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos : self.pos + 1]
            if b in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c", b"#"):
                break
            self.pos += 1
        return data[start : self.pos], start

    def read_uint(self, what: str) -> tuple[int, int]:
        token, offset = self.next_token(what)
        if not token.isdigit():
            raise PgmParseError(f"non-numeric {what} token {token!r}", offset)
        return int(token), offset


def parse_pgm(data: bytes) -> RawImage:
    """Decode P2 (ASCII) or P5 (binary) PGM bytes into a RawImage.

    Comments (# to end of line) may appear anywhere whitespace may.
    Raises PgmParseError naming the byte offset for malformed magic,
    non-numeric header tokens, truncated pixel data, out-of-range
    max_gray, and pixel values exceeding the declared maximum.
    """
    if len(data) < 2 or data[:1] != b"P":
        raise PgmParseError(f"malformed magic number {data[:2]!r}", 0)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"malformed magic number {magic!r}", 0)
    if len(data) > 2 and data[2:3] not in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c", b"#"):
        raise PgmParseError(f"malformed magic number {data[:3]!r}", 0)

    cur = _Cursor(data)
    cur.pos = 2
    width, w_off = cur.read_uint("width")
    height, h_off = cur.read_uint("height")
    if width < 1:
        raise PgmParseError("width must be at least 1", w_off)
    if height < 1:
        raise PgmParseError("height must be at least 1", h_off)
    max_gray, mg_off = cur.read_uint("max_gray")
    if not 1 <= max_gray <= MAX_GRAY_LIMIT:
        raise PgmParseError(f"max_gray {max_gray} outside [1, {MAX_GRAY_LIMIT}]", mg_off)

    count = width * height
    if magic == b"P2":
        values = np.empty(count, dtype=np.uint16)
        for i in range(count):
            try:
                value, offset = cur.read_uint("raster value")
            except PgmParseError as err:
                if "truncated" in str(err):
                    raise PgmParseError("truncated pixel data", err.offset) from None
                raise
            if value > max_gray:
                raise PgmParseError(f"pixel value {value} exceeds max_gray {max_gray}", offset)
            values[i] = value
        return RawImage(width, height, max_gray, values)

    # P5: exactly one separator byte after max_gray, then the raster
    if cur.pos >= len(data) or data[cur.pos : cur.pos + 1] not in (
        b" ",
        b"\t",
        b"\n",
        b"\r",
        b"\x0b",
        b"\x0c",
    ):
        raise PgmParseError("truncated pixel data", cur.pos)
    start = cur.pos + 1
    two_byte = max_gray > 255
    need = count * (2 if two_byte else 1)
    if len(data) - start < need:
        raise PgmParseError("truncated pixel data", len(data))
    raw = data[start : start + need]
    if two_byte:
        values = np.frombuffer(raw, dtype=">u2").astype(np.uint16)
    else:
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.uint16)
    if int(values.max()) > max_gray:
        bad = int(np.argmax(values > max_gray))
        offset = start + bad * (2 if two_byte else 1)
        raise PgmParseError(
            f"pixel value {int(values[bad])} exceeds max_gray {max_gray}", offset
        )
    return RawImage(width, height, max_gray, values)


def write_pgm(image: RawImage, binary: bool = False) -> bytes:
    """Serialize a RawImage as P2 (default) or P5 bytes.

    parse_pgm(write_pgm(img)) reproduces img exactly.
    """
    header = f"{'P5' if binary else 'P2'}\n{image.width} {image.height}\n{image.max_gray}\n"
    if binary:
        dtype = ">u2" if image.max_gray > 255 else np.uint8
        return header.encode("ascii") + image.pixels.astype(dtype).tobytes()
    rows = image.pixels.reshape(image.height, image.width)
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in rows)
    return (header + body + "\n").encode("ascii")


def normalize_unit(image: RawImage) -> GrayImage:
    """Divide by the image's own maximum pixel so the brightest pixel is 1.0.

    The header max_gray is deliberately not used. An all-zero image maps
    to all zeros.
    """
    grid = image.pixels.reshape(image.height, image.width).astype(np.float64)
    peak = float(grid.max())
    if peak == 0.0:
        return GrayImage(grid)
    return GrayImage(grid / peak)


def resize_bilinear(image: GrayImage, out_width: int, out_height: int) -> GrayImage:
    """Resize with bilinear interpolation, pixel centers aligned.

    Identity when the target equals the source size (bit-identical).
    """
    if out_width < 1 or out_height < 1:
        raise ValueError("target dimensions must be positive")
    if out_width == image.width and out_height == image.height:
        return image
    src = image.pixels
    xs = (np.arange(out_width) + 0.5) * (image.width / out_width) - 0.5
    ys = (np.arange(out_height) + 0.5) * (image.height / out_height) - 0.5
    xs = np.clip(xs, 0.0, image.width - 1)
    ys = np.clip(ys, 0.0, image.height - 1)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, image.width - 1)
    y1 = np.minimum(y0 + 1, image.height - 1)
    fx = xs - x0
    fy = (ys - y0)[:, None]
    # lerp form keeps constants exact: v0 + f*(v1 - v0)
    top = src[y0][:, x0] + fx * (src[y0][:, x1] - src[y0][:, x0])
    bottom = src[y1][:, x0] + fx * (src[y1][:, x1] - src[y1][:, x0])
    out = top + fy * (bottom - top)
    return GrayImage(np.clip(out, 0.0, 1.0))


def load_dataset(
    root: str | Path,
    resize_to: tuple[int, int] = (63, 63),
    skip_errors: bool = False,
) -> list[DatasetEntry]:
    """Load every ``root/<class>/*.pgm`` as a normalized, resized image.

    Class label = subdirectory name. Entries come back sorted by
    (class name, file name), so two calls on the same tree agree.
    Target dimensions must be positive multiples of 3 (the feature
    stage tiles images into 3x3 blocks). A bad file aborts the load
    unless skip_errors is set, which downgrades it to a warning.
    """
    out_w, out_h = resize_to
    if out_w < 3 or out_h < 3 or out_w % 3 or out_h % 3:
        raise ValueError(f"resize target {out_w}x{out_h} must be positive multiples of 3")
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    class_dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not class_dirs:
        warnings.warn(f"dataset root {root} contains no class directories")
        return []
    entries: list[DatasetEntry] = []
    for class_dir in class_dirs:
        files = sorted(
            (p for p in class_dir.iterdir() if p.is_file() and p.suffix.lower() == ".pgm"),
            key=lambda p: p.name,
        )
        index = 0
        for path in files:
            try:
                raw = parse_pgm(path.read_bytes())
                gray = resize_bilinear(normalize_unit(raw), out_w, out_h)
            except (PgmParseError, OSError, ValueError) as err:
                if skip_errors:
                    warnings.warn(f"skipping {path}: {err}")
                    continue
                raise DatasetError(f"failed to load {path}: {err}") from err
            entries.append(DatasetEntry(class_dir.name, index, gray, str(path)))
            index += 1
    return entries
