"""Block partitioning and the per-block entropy feature.

An image whose sides are multiples of 3 tiles exactly into non-overlapping
3x3 blocks, row-major. Each block contributes one feature: the center
membership weight times the -G*ln(G) entropy term of the selected gradient
contour. A 63x63 image yields a 441-dimensional vector.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .contours import ContourVariant, contour_value
from .image_io import GrayImage
from .infoset import FuzzifierRef, Window3x3, membership_center

FLOAT_DIGITS = 12  # significant digits in the feature CSV


@dataclass(frozen=True)
class FeatureVector:
    """Per-block features of one image, row-major over the block grid."""

    values: np.ndarray  # 1-D float64
    variant: ContourVariant
    ref: FuzzifierRef
    block_grid: tuple[int, int]  # (rows, cols)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        rows, cols = self.block_grid
        if vals.ndim != 1 or vals.size != rows * cols:
            raise ValueError("value count does not match the block grid")
        if not np.isfinite(vals).all():
            raise ValueError("feature values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)


def partition_blocks(image: GrayImage) -> list[Window3x3]:
    """Split the image into 3x3 windows, row-major over the block grid."""
    h, w = image.height, image.width
    if h % 3 or w % 3:
        raise ValueError(f"image dimensions {w}x{h} are not multiples of 3")
    cells = (
        image.pixels.reshape(h // 3, 3, w // 3, 3)
        .transpose(0, 2, 1, 3)
        .reshape(-1, 9)
        .tolist()
    )
    # flat cell layout per block: v0 v1 v2 / v3 v4 v5 / v6 v7 v8
    return [
        Window3x3(c[4], (c[0], c[1], c[2], c[5], c[8], c[7], c[6], c[3]))
        for c in cells
    ]


def entropy_feature(membership: float, contour: float) -> float:
    """-membership * contour * ln(contour); zero when either input
    degenerates (contour 0 or 1, membership 0)."""
    if membership == 0.0 or contour == 0.0 or contour == 1.0:
        return 0.0
    return -membership * contour * math.log(contour)


def block_feature(
    window: Window3x3,
    variant: ContourVariant = ContourVariant.G1,
    ref: FuzzifierRef = FuzzifierRef.AVERAGE,
) -> float:
    """The single feature value of one 3x3 window."""
    return entropy_feature(membership_center(window, ref), contour_value(window, variant))


def extract(
    image: GrayImage,
    variant: ContourVariant = ContourVariant.G1,
    ref: FuzzifierRef = FuzzifierRef.AVERAGE,
) -> FeatureVector:
    """Feature vector of a whole image, one value per 3x3 block."""
    windows = partition_blocks(image)
    values = np.fromiter(
        (block_feature(win, variant, ref) for win in windows),
        dtype=np.float64,
        count=len(windows),
    )
    return FeatureVector(values, variant, ref, (image.height // 3, image.width // 3))


def _extract_task(args: tuple[GrayImage, ContourVariant, FuzzifierRef]) -> FeatureVector:
    image, variant, ref = args
    return extract(image, variant, ref)


def extract_many(
    images: Sequence[GrayImage],
    variant: ContourVariant = ContourVariant.G1,
    ref: FuzzifierRef = FuzzifierRef.AVERAGE,
    workers: int = 1,
) -> list[FeatureVector]:
    """Extract a batch of images, optionally across processes.

    Results always come back in input order; the worker count never
    changes the values.
    """
    if workers <= 1 or len(images) < 2:
        return [extract(img, variant, ref) for img in images]
    tasks = [(img, variant, ref) for img in images]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_extract_task, tasks, chunksize=chunk))


def write_features_csv(
    path,
    rows: Iterable[tuple[str, str, FeatureVector]],
    n_features: int | None = None,
) -> None:
    """Write (source path, class label, features) rows as CSV.

    Header is path,class,variant,ref,v0..v{n-1}; values carry 12
    significant digits. n_features sizes the header when rows is empty.
    """
    rows = list(rows)
    if rows:
        n_features = len(rows[0][2])
    elif n_features is None:
        raise ValueError("n_features is required when there are no rows")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "class", "variant", "ref"] + [f"v{i}" for i in range(n_features)])
        for source, label, fv in rows:
            if len(fv) != n_features:
                raise ValueError("inconsistent feature vector lengths")
            writer.writerow(
                [source, label, fv.variant.value, fv.ref.value]
                + [f"{v:.{FLOAT_DIGITS}g}" for v in fv.values]
            )


def read_features_csv(path) -> list[tuple[str, str, ContourVariant, FuzzifierRef, np.ndarray]]:
    """Read back a feature CSV written by write_features_csv."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:4] != ["path", "class", "variant", "ref"]:
            raise ValueError(f"{path} is not a feature CSV")
        for row in reader:
            source, label, variant, ref = row[:4]
            values = np.array([float(v) for v in row[4:]], dtype=np.float64)
            out.append(
                (source, label, ContourVariant.from_string(variant),
                 FuzzifierRef.from_string(ref), values)
            )
    return out
