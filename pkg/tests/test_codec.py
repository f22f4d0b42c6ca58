import jpeglib
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jrc.codec import (
    ContainerError,
    JrcContainer,
    ModelMismatch,
    compress,
    compress_image,
    decompress,
    decompress_image,
    quantize_symbols,
)
from jrc.codec.coding_tables import ESCAPE_FREQ, gaussian_tables, prior_tables, scale_index, scale_ladder
from jrc.entropy import SIGMA_MAX, SIGMA_MIN, CodecConfig, CodecModel
from jrc.jpeg import compress_rgb, parse_jpeg
from jrc.rd import LearnedTables
from jrc.rd.tables import softplus_inverse

from corpus_fixtures import varied_jpegs


@pytest.fixture(scope="module")
def jpegs(tmp_path_factory):
    return varied_jpegs(tmp_path_factory.mktemp("codec_jpegs"))


@pytest.fixture(scope="module")
def model():
    return CodecModel(CodecConfig(latent_channels=8, hyper_channels=4, pad_multiple=16, seed=3))


# --------------------------------------------------------------------------- coding tables


def test_scale_ladder_spans_sigma_range():
    ladder = scale_ladder()
    assert ladder.size == 256 and np.all(np.diff(ladder) > 0)
    assert np.isclose(ladder[0], SIGMA_MIN) and np.isclose(ladder[-1], SIGMA_MAX)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e4))
def test_scale_index_is_nearest_in_log_space(sigma):
    ladder = scale_ladder()
    i = int(scale_index(np.array([sigma]))[0])
    best = np.abs(np.log(ladder) - np.log(np.clip(sigma, SIGMA_MIN, SIGMA_MAX)))
    assert best[i] <= best.min() + 1e-12


def test_gaussian_tables_cover_plus_minus_one_and_reserve_escape():
    for t in gaussian_tables():
        assert t.lo <= -1 and t.hi >= 1 and t.lo == -t.hi
        assert t.freqs[-1] == ESCAPE_FREQ


def test_prior_tables_cover_plus_minus_one(model):
    for t in prior_tables(model.luma.prior):
        assert t.lo <= -1 <= 1 <= t.hi


# --------------------------------------------------------------------------- lossless


def test_lossless_round_trip(jpegs, model, tmp_path):
    for path in jpegs:
        data = path.read_bytes()
        blob = compress(data, model)
        out = decompress(blob, model)
        assert parse_jpeg(out).same_coefficients(parse_jpeg(data)), path.name
        rewritten = tmp_path / path.name
        rewritten.write_bytes(out)
        assert np.array_equal(jpeglib.read_spatial(str(path)).spatial,
                              jpeglib.read_spatial(str(rewritten)).spatial), path.name


def test_compression_is_deterministic(jpegs, model):
    data = jpegs[0].read_bytes()
    assert compress(data, model) == compress(data, model)


def test_container_fields(jpegs, model):
    image = parse_jpeg(jpegs[1].read_bytes())
    c = compress_image(image, model)
    back = JrcContainer.from_bytes(c.to_bytes())
    assert back.mode == "lossless" and (back.width, back.height) == (image.width, image.height)
    assert back.model_hash == model.model_hash()
    assert np.array_equal(back.inverse_tables[0], image.luma_qt.steps)
    assert len(c.to_bytes()) == len(back.to_bytes())


# --------------------------------------------------------------------------- lossy


def test_lossy_decodes_to_requantized_planes(model):
    rgb = np.random.default_rng(0).integers(0, 256, (40, 56, 3)).astype(np.uint8)
    image = parse_jpeg(compress_rgb(rgb, 90))
    tables = LearnedTables.standard(40)
    tables.params["qti_luma"].data[3] = softplus_inverse(np.array([21.3]))[0]
    container = compress_image(image, model, tables)
    assert container.mode == "lossy"
    out = decompress_image(JrcContainer.from_bytes(container.to_bytes()), model)
    batch, xl, xc = quantize_symbols(image, tables, model.config.pad_multiple)
    hb, wb = image.luma.coeffs.shape[:2]
    assert np.array_equal(out.luma.coeffs, xl[0][:, :hb, :wb].transpose(1, 2, 0))
    dl, dc = tables.decoder_tables()
    assert np.array_equal(out.luma_qt.steps, dl.steps) and np.array_equal(out.chroma_qt.steps, dc.steps)
    assert out.luma_qt.natural[3] == 21
    assert parse_jpeg(decompress(container.to_bytes(), model)).same_coefficients(out)


# --------------------------------------------------------------------------- errors


@pytest.fixture(scope="module")
def blob(jpegs, model):
    return compress(jpegs[0].read_bytes(), model)


def test_model_mismatch(blob):
    other = CodecModel(CodecConfig(latent_channels=8, hyper_channels=4, pad_multiple=16, seed=4))
    with pytest.raises(ModelMismatch):
        decompress(blob, other)


@pytest.mark.parametrize("mutate", [
    lambda b: b[:10],
    lambda b: b[: len(b) - 5],
    lambda b: b"JRC2" + b[4:],
    lambda b: b[:4] + bytes([9]) + b[5:],
    lambda b: b[:5] + bytes([7]) + b[6:],
    lambda b: b + b"\x00",
    lambda b: b[:-3] + bytes([b[-3] ^ 0x10]) + b[-2:],
])
def test_corrupt_containers_rejected(blob, model, mutate):
    with pytest.raises(ContainerError):
        decompress(mutate(blob), model)


def test_bad_table_in_container(blob, model):
    data = bytearray(blob)
    pos = 4 + 2 + 8 + 12
    data[pos:pos + 2] = (0).to_bytes(2, "little")
    with pytest.raises(ContainerError):
        JrcContainer.from_bytes(bytes(data))


def test_unknown_mode_on_write(jpegs, model):
    c = compress_image(parse_jpeg(jpegs[0].read_bytes()), model)
    with pytest.raises(ContainerError):
        JrcContainer("mystery", c.width, c.height, c.grids, c.inverse_tables, c.model_hash, c.segments).to_bytes()
