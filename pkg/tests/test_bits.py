import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adder_spir.bits import BitString, sample_uniform
from adder_spir.model import party_stream


def test_xor_basic():
    a = BitString.from_bits([1, 0, 1, 1])
    b = BitString.from_bits([0, 0, 1, 1])
    assert (a ^ b) == BitString.from_bits([1, 0, 0, 0])


def test_xor_self_is_zero():
    a = BitString.from_bits([1, 1, 0, 1, 0, 0, 1, 1, 1])
    assert (a ^ a) == BitString.zeros(9)


def test_xor_length_mismatch():
    with pytest.raises(ValueError):
        BitString.zeros(3) ^ BitString.zeros(4)


def test_subselect_one_based():
    a = BitString.from_bits([1, 0, 1, 1, 0])
    assert a.subselect((1, 3, 5)) == BitString.from_bits([1, 1, 0])
    assert a.subselect(()) == BitString(b"", 0)


def test_subselect_sorts_indices():
    a = BitString.from_bits([1, 0, 1, 1, 0])
    assert a.subselect((5, 1, 3)) == a.subselect((1, 3, 5))


def test_subselect_out_of_range():
    a = BitString.zeros(4)
    with pytest.raises(IndexError):
        a.subselect((0,))
    with pytest.raises(IndexError):
        a.subselect((5,))


def test_bit_accessor():
    a = BitString.from_bits([0, 1, 0, 0, 0, 0, 0, 0, 1])
    assert a.bit(2) == 1
    assert a.bit(9) == 1
    assert a.bit(1) == 0
    with pytest.raises(IndexError):
        a.bit(10)


def test_trailing_bits_must_be_zero():
    with pytest.raises(ValueError):
        BitString(b"\x01", 4)  # bit 8 set but length 4


def test_ones_masks_trailing():
    a = BitString.ones(5)
    assert list(a.bits) == [1, 1, 1, 1, 1]
    assert a.packed == b"\xf8"


def test_int_roundtrip_examples():
    a = BitString.from_int(0b1011, 4)
    assert list(a.bits) == [1, 0, 1, 1]
    assert a.to_int() == 0b1011


@given(st.integers(min_value=0, max_value=16).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(min_value=0, max_value=2**n - 1 if n else 0))
))
def test_int_roundtrip_property(case):
    n, v = case
    assert BitString.from_int(v, n).to_int() == v


@given(st.lists(st.integers(0, 1), max_size=40), st.lists(st.integers(0, 1), max_size=40))
def test_concat_property(xs, ys):
    joined = BitString.from_bits(xs).concat(BitString.from_bits(ys))
    assert list(joined.bits) == xs + ys


@given(st.lists(st.integers(0, 1), min_size=6, max_size=24).filter(lambda b: len(b) % 3 == 0))
def test_split_join_roundtrip(bits):
    a = BitString.from_bits(bits)
    parts = a.split(3)
    assert all(len(p) == len(a) // 3 for p in parts)
    assert BitString.join(parts) == a


def test_split_requires_divisibility():
    with pytest.raises(ValueError):
        BitString.zeros(7).split(3)


def test_hex_roundtrip():
    a = BitString.from_bits([1, 0, 0, 0, 1, 1, 0, 1, 1])
    assert BitString.from_hex(a.to_hex(), len(a)) == a


def test_hash_and_eq():
    a = BitString.from_bits([1, 0])
    b = BitString.from_bits([1, 0])
    assert a == b and hash(a) == hash(b)
    assert a != BitString.from_bits([1, 0, 0])


def test_zero_length():
    z = BitString(b"", 0)
    assert len(z) == 0
    assert z.to_int() == 0
    assert (z ^ z) == z
    assert list(z.bits) == []


def test_sample_uniform_golden():
    # Frozen draw: any change to the stream derivation or packing breaks this.
    s = sample_uniform(20, party_stream(1234, (0,)))
    assert s.to_hex() == "8c7210"
    assert len(s) == 20


def test_sample_uniform_deterministic():
    a = sample_uniform(33, party_stream(7, (1, 2)))
    b = sample_uniform(33, party_stream(7, (1, 2)))
    assert a == b


def test_sample_uniform_zero_length():
    assert len(sample_uniform(0, party_stream(0, ()))) == 0


def test_from_array_matches_from_bits():
    arr = np.array([1, 1, 0, 1, 0], dtype=np.uint8)
    assert BitString.from_array(arr) == BitString.from_bits([1, 1, 0, 1, 0])
