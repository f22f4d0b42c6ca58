"""Test images: varied baseline JPEGs and natural RGB photos shipped with installed packages."""

from pathlib import Path

import jpeglib
import numpy as np
import skimage
from PIL import Image

SKIMAGE_DATA = Path(skimage.__file__).parent / "data"

TRAIN_NAMES = ("astronaut.png", "chelsea.png", "coffee.png", "hubble_deep_field.jpg", "ihc.png",
               "motorcycle_left.png", "retina.jpg", "rocket.jpg")
TEST_NAMES = ("motorcycle_right.png",)


def _extra_photos() -> tuple[list[Path], list[Path]]:
    """Sample photos from scikit-learn and matplotlib, when present: (train, test)."""
    train, test = [], []
    try:
        import sklearn

        images = Path(sklearn.__file__).parent / "datasets" / "images"
        train.append(images / "china.jpg")
        test.append(images / "flower.jpg")
    except ImportError:
        pass
    try:
        import matplotlib

        train.append(Path(matplotlib.__file__).parent / "mpl-data" / "sample_data" / "grace_hopper.jpg")
    except ImportError:
        pass
    return [p for p in train if p.exists()], [p for p in test if p.exists()]


def natural_sources() -> tuple[list[Path], list[Path]]:
    """Disjoint train / held-out source photos."""
    extra_train, extra_test = _extra_photos()
    train = [SKIMAGE_DATA / n for n in TRAIN_NAMES] + extra_train
    test = [SKIMAGE_DATA / n for n in TEST_NAMES] + extra_test
    return train, test


def load_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def varied_jpegs(directory: Path) -> list[Path]:
    """Baseline 4:2:0 files from libjpeg over a spread of content, sizes, qualities and Huffman tables."""
    rng = np.random.default_rng(2024)
    photo = load_rgb(SKIMAGE_DATA / "astronaut.png")
    coffee = load_rgb(SKIMAGE_DATA / "coffee.png")
    smooth = np.clip(np.cumsum(rng.normal(0, 4, (97, 131, 3)), axis=1) + 128, 0, 255).astype(np.uint8)
    cases = [
        ("photo_q75", photo[:256, :256], 75, []),
        ("photo_q95_odd", photo[13:214, 7:190], 95, []),
        ("photo_q30", photo[100:356, 200:456], 30, []),
        ("photo_opt", photo[50:171, 60:299], 60, ["+OPTIMIZE_CODING"]),
        ("coffee_q90", coffee[:200, :300], 90, []),
        ("coffee_q25", coffee[50:123, 10:99], 25, []),
        ("coffee_q100", coffee[100:140, 100:180], 100, ["+OPTIMIZE_CODING"]),
        ("noise_q50", rng.integers(0, 256, (64, 48, 3)).astype(np.uint8), 50, []),
        ("smooth_q75", smooth, 75, []),
        ("flat", np.full((33, 17, 3), 77, np.uint8), 75, []),
        ("tiny", rng.integers(0, 256, (1, 1, 3)).astype(np.uint8), 75, []),
        ("wide", photo[300:309, :511], 85, []),
    ]
    paths = []
    for name, rgb, q, flags in cases:
        im = jpeglib.from_spatial(np.ascontiguousarray(rgb))
        im.samp_factor = ((2, 2), (1, 1), (1, 1))
        path = directory / f"{name}.jpg"
        im.write_spatial(str(path), qt=q, flags=flags)
        paths.append(path)
    return paths
