import numpy as np
import pytest

from nblgc import RawImage, Window3x3, write_pgm


def random_window(rng, lo=0.0, hi=1.0):
    vals = rng.uniform(lo, hi, size=9)
    return Window3x3(float(vals[0]), tuple(float(v) for v in vals[1:]))


def random_raw(rng, width=9, height=9, max_gray=255):
    px = rng.integers(0, max_gray + 1, size=width * height).astype(np.uint16)
    return RawImage(width, height, max_gray, px)


def make_pgm_tree(root, n_classes, per_class, size=(9, 9), seed=0, binary=True):
    """root/<class>/imgNN.pgm with a per-class base pattern plus noise,
    so classes are distinct and no two images are identical."""
    rng = np.random.default_rng(seed)
    w, h = size
    for ci in range(n_classes):
        cdir = root / f"s{ci + 1:02d}"
        cdir.mkdir(parents=True, exist_ok=True)
        base = rng.integers(0, 200, size=h * w)
        for ii in range(per_class):
            noise = rng.integers(0, 40, size=h * w)
            px = np.clip(base + noise, 0, 255).astype(np.uint16)
            img = RawImage(w, h, 255, px)
            (cdir / f"img{ii:02d}.pgm").write_bytes(write_pgm(img, binary=binary))


@pytest.fixture
def small_tree(tmp_path):
    root = tmp_path / "data"
    root.mkdir()
    make_pgm_tree(root, n_classes=4, per_class=6, size=(9, 9), seed=7)
    return root
