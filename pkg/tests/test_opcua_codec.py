import math
import struct
import uuid
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st
from wiregen import PRIMITIVE_KINDS, RandomWire

from genpot.opcua.codec import (
    EPOCH_OFFSET_TICKS,
    DataValue,
    DecodingError,
    DiagnosticInfo,
    ExpandedNodeId,
    InvalidEncodingByteError,
    LocalizedText,
    NodeId,
    NodeIdType,
    QualifiedName,
    Reader,
    TruncatedError,
    Variant,
    VariantType,
    datetime_from_ticks,
    decode_primitive,
    encode_primitive,
    ticks_from_datetime,
    ticks_from_unix_ns,
    unix_ns_from_ticks,
)


def h(s):
    return bytes.fromhex(s.replace(" ", ""))


# -- fixed encodings


@pytest.mark.parametrize(
    "value,kind,expected",
    [
        (1, "UInt32", "01 00 00 00"),
        (None, "String", "ff ff ff ff"),
        ("", "String", "00 00 00 00"),
        ("Aé", "String", "03 00 00 00 41 c3 a9"),
        (True, "Boolean", "01"),
        (-2, "Int32", "fe ff ff ff"),
        (1.0, "Double", "00 00 00 00 00 00 f0 3f"),
        (0x80340000, "StatusCode", "00 00 34 80"),
        (NodeId(0, 85), "NodeId", "00 55"),
        (NodeId(2, 2032), "NodeId", "01 02 f0 07"),
        (NodeId(2, 70000), "NodeId", "02 02 00 70 11 01 00"),
        (NodeId(1, "x"), "NodeId", "03 01 00 01 00 00 00 78"),
        (NodeId(0, b"\x01\x02"), "NodeId", "05 00 00 02 00 00 00 01 02"),
        (QualifiedName(2, "Beam"), "QualifiedName", "02 00 04 00 00 00 42 65 61 6d"),
        (LocalizedText("Hi", "en"), "LocalizedText", "03 02 00 00 00 65 6e 02 00 00 00 48 69"),
        (LocalizedText(None, None), "LocalizedText", "00"),
        (Variant.double(0.5), "Variant", "0b 00 00 00 00 00 00 e0 3f"),
        (Variant(), "Variant", "00"),
        (Variant(VariantType.Int32, [1, 2], True, [2]), "Variant", "c6 02 00 00 00 01 00 00 00 02 00 00 00 01 00 00 00 02 00 00 00"),
        (DataValue(Variant.double(1.0), 0, 5), "DataValue", "07 0b 00 00 00 00 00 00 f0 3f 00 00 00 00 05 00 00 00 00 00 00 00"),
        (None, "DiagnosticInfo", "00"),
        (DiagnosticInfo(symbolic_id=1, locale=3), "DiagnosticInfo", "09 01 00 00 00 03 00 00 00"),
    ],
)
def test_known_encodings(value, kind, expected):
    assert encode_primitive(value, kind) == h(expected)
    assert decode_primitive(h(expected), kind) == value


def test_guid_layout():
    g = uuid.UUID("72962b91-fa75-4ae6-8d28-b404dc7daf63")
    assert encode_primitive(g, "Guid") == h("91 2b 96 72 75 fa e6 4a 8d 28 b4 04 dc 7d af 63")


def test_datetime_is_ticks_since_1601():
    assert ticks_from_unix_ns(0) == EPOCH_OFFSET_TICKS
    dt = datetime(2024, 1, 2, 3, 4, 5, 678900, tzinfo=timezone.utc)
    ticks = ticks_from_datetime(dt)
    assert datetime_from_ticks(ticks) == dt
    assert unix_ns_from_ticks(ticks) == int(dt.timestamp() * 1e6) * 1000
    assert ticks_from_datetime(datetime(1601, 1, 1, tzinfo=timezone.utc)) == 0


def test_nodeid_form_is_preserved():
    # a small id sent in the full numeric form re-encodes in that form
    data = h("02 00 00 55 00 00 00")
    node = decode_primitive(data, "NodeId")
    assert node == NodeId(0, 85) and node.form == NodeIdType.NUMERIC
    assert encode_primitive(node, "NodeId") == data
    assert str(NodeId(2, 2032)) == "ns=2;i=2032" and str(NodeId(0, 85)) == "i=85"


def test_expanded_nodeid_flags():
    e = ExpandedNodeId(NodeId(0, 5), "urn:x", 3)
    data = encode_primitive(e, "ExpandedNodeId")
    assert data[0] == 0xC0
    assert decode_primitive(data, "ExpandedNodeId") == e


# -- malformed input


def test_invalid_encoding_bytes():
    with pytest.raises(InvalidEncodingByteError):
        decode_primitive(b"\x07\x00", "NodeId")
    with pytest.raises(InvalidEncodingByteError):
        decode_primitive(b"\x1b", "Variant")
    with pytest.raises(InvalidEncodingByteError):
        decode_primitive(b"\x04", "LocalizedText")
    with pytest.raises(InvalidEncodingByteError):
        decode_primitive(b"\x00\x00\x05", "ExtensionObject")


def test_strict_boolean_and_utf8():
    with pytest.raises(DecodingError):
        decode_primitive(b"\x02", "Boolean")
    with pytest.raises(DecodingError):
        decode_primitive(h("02 00 00 00 c3 28"), "String")


def test_lengths_are_bounded_by_the_buffer():
    with pytest.raises(DecodingError):
        decode_primitive(h("fe ff ff ff"), "String")
    with pytest.raises(TruncatedError):
        decode_primitive(h("ff ff ff 7f 41"), "String")
    r = Reader(h("05 00 00 00 41 42 43 44 45 46"), 0, 6)
    with pytest.raises(TruncatedError):
        r.string()


def test_trailing_bytes_rejected():
    with pytest.raises(DecodingError):
        decode_primitive(h("01 00 00 00 00"), "UInt32")


def test_nesting_depth_is_limited():
    # a Variant array holding Variant arrays, deeper than the decoder allows
    data = b"\x98\x01\x00\x00\x00" * 80 + b"\x00"
    with pytest.raises(DecodingError):
        decode_primitive(data, "Variant")


# -- round trips


@pytest.mark.parametrize("kind", PRIMITIVE_KINDS)
def test_ten_thousand_random_values_round_trip(kind):
    gen = RandomWire(seed=sum(map(ord, kind)), max_depth=2)
    for _ in range(10_000):
        v = gen.value(kind)
        data = encode_primitive(v, kind)
        back = decode_primitive(data, kind)
        assert back == v
        assert encode_primitive(back, kind) == data


@pytest.mark.parametrize("kind", PRIMITIVE_KINDS)
def test_every_truncation_is_rejected(kind):
    gen = RandomWire(seed=7)
    for _ in range(50):
        data = encode_primitive(gen.value(kind), kind)
        for cut in range(len(data)):
            with pytest.raises(DecodingError):
                decode_primitive(data[:cut], kind)


@given(st.integers(0, 2**32 - 1))
def test_uint32_property(v):
    data = encode_primitive(v, "UInt32")
    assert data == struct.pack("<I", v) and decode_primitive(data, "UInt32") == v


@given(st.floats(allow_nan=False))
def test_double_property(x):
    assert decode_primitive(encode_primitive(x, "Double"), "Double") == x


@given(st.binary(min_size=4, max_size=4))
def test_float_bit_patterns_survive(raw):
    v = decode_primitive(raw, "Float")
    assert encode_primitive(v, "Float") == raw
    assert math.isnan(v) or struct.pack("<f", v) == raw


@given(st.one_of(st.none(), st.text()))
def test_string_property(s):
    assert decode_primitive(encode_primitive(s, "String"), "String") == s


@given(st.integers(0, 65535), st.one_of(st.integers(0, 2**32 - 1), st.text(min_size=1), st.uuids(), st.binary(min_size=1)))
def test_nodeid_property(ns, ident):
    node = NodeId(ns, ident)
    assert decode_primitive(encode_primitive(node, "NodeId"), "NodeId") == node


@given(st.binary(max_size=40), st.sampled_from(PRIMITIVE_KINDS))
def test_random_bytes_never_crash(data, kind):
    try:
        v = decode_primitive(data, kind)
    except DecodingError:
        return
    assert encode_primitive(v, kind) == data
