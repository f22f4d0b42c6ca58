import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jrc.rangecoder import (
    TOTAL,
    CdfTable,
    RangeCoderError,
    decode,
    encode,
    quantize_cdf,
    symbol_bits,
)


def test_quantize_uniform_four():
    t = quantize_cdf(np.full(4, 0.25), lo=-2)
    # 65535 slots for symbols, one for the escape; the lowest remainders lose
    assert t.cum.tolist() == [0, 16384, 32768, 49152, 65535, 65536]
    assert (t.lo, t.hi, t.size) == (-2, 1, 4)


def test_quantize_single_symbol():
    t = quantize_cdf([1.0], lo=7)
    assert t.freqs.tolist() == [65535, 1]


def test_quantize_empty_support():
    with pytest.raises(ValueError):
        quantize_cdf([])


def test_table_validation():
    with pytest.raises(ValueError):
        CdfTable(0, np.array([0, 10, 10, TOTAL]))
    with pytest.raises(ValueError):
        CdfTable(0, np.array([0, TOTAL]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=400), st.integers(-50, 50))
def test_quantize_is_strict_and_complete(probs, lo):
    t = quantize_cdf(probs, lo)
    assert t.cum[0] == 0 and t.cum[-1] == TOTAL
    assert np.all(np.diff(t.cum) >= 1)
    assert t.freqs[-1] >= 1


def test_quantize_adversarial_tiny_probabilities():
    p = np.full(3000, 1e-30)
    p[5] = 1.0
    t = quantize_cdf(p)
    assert np.all(t.freqs >= 1)
    assert t.freqs[5] == TOTAL - 3000


def test_empty_sequence():
    data = encode([], [])
    assert len(data) <= 8
    assert decode(data, [], count=0).size == 0


def test_escape_frequency():
    t = quantize_cdf([0.5, 0.5], lo=0, escape=64)
    assert t.freqs[-1] == 64 and t.freqs[:-1].sum() == TOTAL - 64
    syms = np.array([0, 1, 7, -3])
    idx = np.zeros(4, dtype=int)
    assert np.array_equal(decode(encode(syms, [t], idx), [t], idx), syms)
    assert np.isclose(symbol_bits(np.array([7]), [t], idx[:1])[0], 10 + 2 * (6).bit_length())
    with pytest.raises(ValueError):
        quantize_cdf([0.5, 0.5], escape=0)
    with pytest.raises(ValueError):
        quantize_cdf([0.5, 0.5], escape=TOTAL - 1)


def test_escape_round_trip():
    t = quantize_cdf([0.2, 0.6, 0.2], lo=-1)
    syms = np.array([0, 1, -1, 2, -2, 1023, -1024, 500000, 0])
    data = encode(syms, [t], np.zeros(syms.size, dtype=int))
    assert np.array_equal(decode(data, [t], np.zeros(syms.size, dtype=int)), syms)


def _random_tables(rng, count):
    tables = []
    for _ in range(count):
        n = int(rng.integers(1, 40))
        p = rng.dirichlet(np.full(n, rng.uniform(0.1, 3)))
        tables.append(quantize_cdf(p, int(rng.integers(-20, 5))))
    return tables


def test_random_round_trips():
    rng = np.random.default_rng(11)
    for trial in range(1000):
        tables = _random_tables(rng, int(rng.integers(1, 5)))
        n = int(rng.integers(0, 60))
        idx = rng.integers(0, len(tables), size=n)
        syms = np.array([
            rng.integers(tables[i].lo - 3, tables[i].hi + 4) for i in idx
        ], dtype=np.int64)
        data = encode(syms, tables, idx)
        assert np.array_equal(decode(data, tables, idx), syms), trial


def _skewed_stream(rng, n):
    p = np.array([0.6, 0.2, 0.1, 0.05, 0.03, 0.015, 0.005])
    t = quantize_cdf(p, lo=0)
    syms = rng.choice(len(p), size=n, p=p)
    return t, syms


def test_coded_length_near_cross_entropy():
    rng = np.random.default_rng(3)
    t, syms = _skewed_stream(rng, 10 ** 5)
    idx = np.zeros(syms.size, dtype=np.int64)
    data = encode(syms, [t], idx)
    ideal = symbol_bits(syms, [t], idx).sum()
    assert len(data) * 8 <= ideal * 1.002 + 64 * 8
    assert np.array_equal(decode(data, [t], idx), syms)


def test_truncated_stream_raises():
    rng = np.random.default_rng(5)
    t, syms = _skewed_stream(rng, 2000)
    idx = np.zeros(syms.size, dtype=np.int64)
    data = encode(syms, [t], idx)
    with pytest.raises(RangeCoderError):
        decode(data[: len(data) // 2], [t], idx)


def test_encoding_is_deterministic():
    rng = np.random.default_rng(9)
    t, syms = _skewed_stream(rng, 5000)
    idx = np.zeros(syms.size, dtype=np.int64)
    assert encode(syms, [t], idx) == encode(syms, [t], idx)
