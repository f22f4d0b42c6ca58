import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jrc.cli import main
from jrc.evaluation import (
    CSV_FIELDS,
    CorpusManifest,
    RdPoint,
    Split,
    crop_tiles,
    generate_tiles,
    ms_ssim,
    mse,
    prepare_corpus,
    psnr,
    read_csv,
    write_csv,
)
from jrc.jpeg import parse_jpeg
from jrc.rd import TrainConfig, TrainState

from corpus_fixtures import SKIMAGE_DATA, load_rgb

PHOTO = load_rgb(SKIMAGE_DATA / "astronaut.png")


# --------------------------------------------------------------------------- metrics


def test_psnr_and_mse_by_hand():
    a = np.zeros((4, 4, 3), np.uint8)
    b = a.copy()
    b[0, 0, 0] = 255
    assert mse(a, b) == pytest.approx(1 / 48)
    assert psnr(a, b) == pytest.approx(10 * math.log10(48))
    assert psnr(a, a) == math.inf
    with pytest.raises(ValueError):
        psnr(a, b[:2])


def test_ms_ssim_matches_tensorflow():
    tf = pytest.importorskip("tensorflow")
    rng = np.random.default_rng(0)
    a = PHOTO[:200, :230].astype(np.float64)
    for noise in (2.0, 10.0, 40.0):
        b = np.clip(a + rng.normal(0, noise, a.shape), 0, 255)
        ref = float(tf.image.ssim_multiscale(tf.constant(a[None]), tf.constant(b[None]), 255.0)[0])
        assert ms_ssim(a, b) == pytest.approx(ref, abs=1e-5)


def test_ms_ssim_identity_and_monotone():
    a = PHOTO[:192, :192]
    assert ms_ssim(a, a) == pytest.approx(1.0)
    rng = np.random.default_rng(1)
    values = [ms_ssim(a, np.clip(a + rng.normal(0, s, a.shape), 0, 255)) for s in (1, 5, 20)]
    assert values[0] > values[1] > values[2]
    with pytest.raises(ValueError):
        ms_ssim(a[:100], a[:100])


# --------------------------------------------------------------------------- CSV


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100), st.floats(1e-3, 30),
                          st.one_of(st.floats(1, 99), st.just(math.inf)), st.floats(1e-3, 1)),
                min_size=1, max_size=5))
def test_csv_round_trip(tmp_path_factory, rows):
    points = [RdPoint(r, d, b, p, m, b * 1.1, b * 1.3) for r, d, b, p, m in rows]
    path = tmp_path_factory.mktemp("csv") / "rd.csv"
    write_csv(points, path)
    assert read_csv(path) == points
    header = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")][0]
    assert tuple(header.split(",")) == CSV_FIELDS


def test_rd_point_validation():
    with pytest.raises(ValueError):
        RdPoint(1, 1, 0.0, 30, 0.9, 1, 1)
    with pytest.raises(ValueError):
        RdPoint(1, 1, 1.0, 30, 1.5, 1, 1)


def test_csv_rejects_wrong_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)


# --------------------------------------------------------------------------- corpus


def _manifest(tmp_path, seed=0, crop=64):
    src = tmp_path / "src.png"
    from PIL import Image

    Image.fromarray(PHOTO[:200, :260]).save(src)
    return CorpusManifest(splits={"train": Split(("src.png",), 3), "test": Split(("src.png",), 2)},
                          crop=crop, seed=seed, root=str(tmp_path))


def test_corpus_is_a_function_of_the_manifest(tmp_path):
    m = _manifest(tmp_path)
    a, b = generate_tiles(m), generate_tiles(m)
    assert a == b
    assert generate_tiles(_manifest(tmp_path, seed=1)) != a
    for data in a["train"]:
        image = parse_jpeg(data)
        assert (image.width, image.height) == (64, 64)


def test_prepare_corpus_writes_tiles_and_manifest(tmp_path):
    m = _manifest(tmp_path)
    out = tmp_path / "corpus"
    paths = prepare_corpus(m, out)
    assert [p.name for p in paths["train"]] == ["0000.jpg", "0001.jpg", "0002.jpg"]
    assert CorpusManifest.load(out / "manifest.json").to_dict()["splits"] == m.to_dict()["splits"]


def test_crop_tiles_cycles_sources_and_checks_size():
    images = [np.zeros((40, 40, 3), np.uint8), np.ones((50, 60, 3), np.uint8)]
    tiles = crop_tiles(images, 4, 32, np.random.default_rng(0))
    assert [int(t[0, 0, 0]) for t in tiles] == [0, 1, 0, 1]
    with pytest.raises(ValueError):
        crop_tiles(images, 1, 48, np.random.default_rng(0))


def test_manifest_validation():
    with pytest.raises(ValueError):
        CorpusManifest(splits={"train": Split((), 3)})
    with pytest.raises(ValueError):
        CorpusManifest(crop=4)


# --------------------------------------------------------------------------- CLI


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    from PIL import Image

    Image.fromarray(PHOTO).save(root / "photo.png")
    (root / "manifest.json").write_text(json.dumps({
        "splits": {"train": {"sources": ["photo.png"], "count": 4},
                   "test": {"sources": ["photo.png"], "count": 1}},
        "crop": 192, "quality": 75, "seed": 0,
    }))
    assert main(["prepare-corpus", str(root / "manifest.json"), "--out", str(root / "corpus")]) == 0
    TrainConfig(latent_channels=8, hyper_channels=4, pad_multiple=16, batch_size=2, scale=100,
                stage1_lr=1e-3, rounds=1).to_file(root / "train.ini")
    ckpt = root / "model.ckpt"
    assert main(["train", "--config", str(root / "train.ini"), "--corpus", str(root / "corpus" / "train"),
                 "--lambda-r", "2", "--seed", "3", "--out", str(ckpt)]) == 0
    return root, ckpt


def test_cli_train_writes_checkpoint(workspace):
    _, ckpt = workspace
    state = TrainState.load(ckpt)
    assert state.config.lambda_r == 2.0 and state.config.seed == 3 and state.round_index == 1


@pytest.mark.parametrize("mode", ["lossless", "lossy"])
def test_cli_compress_decompress(workspace, mode):
    root, ckpt = workspace
    src = root / "corpus" / "test" / "0000.jpg"
    jrc = root / f"{mode}.jrc"
    out = root / f"{mode}.jpg"
    assert main(["compress", str(src), "--model", str(ckpt), "--mode", mode, "--out", str(jrc)]) == 0
    assert main(["decompress", str(jrc), "--model", str(ckpt), "--out", str(out)]) == 0
    back, orig = parse_jpeg(out.read_bytes()), parse_jpeg(src.read_bytes())
    if mode == "lossless":
        assert back.same_coefficients(orig)
    else:
        assert (back.width, back.height) == (orig.width, orig.height)


def test_cli_eval_writes_csv(workspace, capsys):
    root, ckpt = workspace
    out = root / "rd.csv"
    assert main(["eval", str(ckpt), "--model", str(ckpt), "--corpus", str(root / "corpus" / "test"),
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 2
    lossless, lossy = rows
    assert lossless.psnr_db == math.inf and lossless.bpp == lossless.lossless_bpp
    assert lossy.lambda_r == 2.0
    assert "bpp" in capsys.readouterr().out


def test_cli_tables(workspace, capsys):
    _, ckpt = workspace
    assert main(["tables", "--quality", "50"]) == 0
    assert "16." in capsys.readouterr().out
    assert main(["tables", "--model", str(ckpt)]) == 0
    assert "Q_t' luma" in capsys.readouterr().out


def test_cli_errors(workspace, tmp_path, capsys):
    _, ckpt = workspace
    bad = tmp_path / "bad.jpg"
    bad.write_bytes(b"not a jpeg at all")
    assert main(["compress", str(bad), "--model", str(ckpt), "--out", str(tmp_path / "x.jrc")]) == 1
    assert main(["decompress", str(bad), "--model", str(ckpt), "--out", str(tmp_path / "x.jpg")]) == 1
    assert main(["compress", str(tmp_path / "missing.jpg"), "--model", str(ckpt), "--out", "x"]) == 1
    assert "jrc:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["frobnicate"])
