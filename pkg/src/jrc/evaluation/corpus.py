"""Deterministic tile corpora: seeded crops of source images, encoded as QP-75 JPEGs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..jpeg import compress_rgb

SPLITS = ("train", "test")


@dataclass(frozen=True)
class Split:
    sources: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class CorpusManifest:
    """Sources per split, crop size, quality and seed. Relative paths resolve against ``root``."""

    splits: dict = field(default_factory=dict)  # name -> Split
    crop: int = 256
    quality: int = 75
    seed: int = 0
    output: str = "corpus"
    root: str = "."

    def __post_init__(self):
        if self.crop < 8 or not 1 <= self.quality <= 100:
            raise ValueError("crop must be >= 8 and quality in 1..100")
        for name, split in self.splits.items():
            if not split.sources or split.count < 0:
                raise ValueError(f"split {name!r} needs sources and a non-negative count")

    @classmethod
    def from_dict(cls, data: dict, root: str = ".") -> "CorpusManifest":
        splits = {k: Split(tuple(v["sources"]), int(v["count"])) for k, v in data["splits"].items()}
        rest = {k: data[k] for k in ("crop", "quality", "seed", "output") if k in data}
        return cls(splits=splits, root=data.get("root", root), **rest)

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), root=str(path.parent))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["splits"] = {k: {"sources": list(v.sources), "count": v.count} for k, v in self.splits.items()}
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def resolve(self, source: str) -> Path:
        p = Path(source)
        return p if p.is_absolute() else Path(self.root) / p


def read_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def crop_tiles(images: list[np.ndarray], count: int, crop: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Tile i comes from image i mod len(images) at a uniformly drawn offset."""
    for im in images:
        if im.shape[0] < crop or im.shape[1] < crop:
            raise ValueError(f"source of size {im.shape[1]}x{im.shape[0]} is smaller than the {crop} crop")
    tiles = []
    for i in range(count):
        im = images[i % len(images)]
        y = int(rng.integers(0, im.shape[0] - crop + 1))
        x = int(rng.integers(0, im.shape[1] - crop + 1))
        tiles.append(im[y:y + crop, x:x + crop])
    return tiles


def generate_tiles(manifest: CorpusManifest) -> dict[str, list[bytes]]:
    """JPEG bytes per split; a pure function of the manifest and source pixels."""
    out = {}
    for k, name in enumerate(sorted(manifest.splits)):
        split = manifest.splits[name]
        images = [read_rgb(manifest.resolve(s)) for s in split.sources]
        rng = np.random.default_rng([manifest.seed, k])
        out[name] = [compress_rgb(t, manifest.quality) for t in crop_tiles(images, split.count, manifest.crop, rng)]
    return out


def prepare_corpus(manifest: CorpusManifest, output=None) -> dict[str, list[Path]]:
    """Write ``<output>/<split>/NNNN.jpg`` and a copy of the manifest; returns the tile paths."""
    base = Path(output) if output is not None else manifest.resolve(manifest.output)
    paths = {}
    for name, tiles in generate_tiles(manifest).items():
        d = base / name
        d.mkdir(parents=True, exist_ok=True)
        for old in d.glob("*.jpg"):
            old.unlink()
        paths[name] = []
        for i, data in enumerate(tiles):
            p = d / f"{i:04d}.jpg"
            p.write_bytes(data)
            paths[name].append(p)
    manifest.save(base / "manifest.json")
    return paths
