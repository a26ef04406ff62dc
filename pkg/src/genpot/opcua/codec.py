"""OPC UA binary encoding of built-in types.

Integers and floats are little-endian.  Strings and byte strings carry an
Int32 length prefix, ``-1`` meaning null (``None`` here).  Arrays likewise;
a null array decodes to ``None`` and an empty one to ``[]`` so re-encoding
reproduces the original bytes.
"""
from __future__ import annotations

import struct
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import IntEnum

from ..errors import GenpotError
from . import status as _status

MAX_DEPTH = 64


class DecodingError(GenpotError, ValueError):
    """Input bytes do not form a valid encoding."""

    status = _status.BadDecodingError


class TruncatedError(DecodingError):
    pass


class InvalidEncodingByteError(DecodingError):
    pass


# ---------------------------------------------------------------------------
# DateTime: 100 ns ticks since 1601-01-01 UTC

EPOCH_OFFSET_TICKS = 116444736000000000  # 1601 -> 1970


def ticks_from_unix_ns(ns: int) -> int:
    return EPOCH_OFFSET_TICKS + ns // 100


def unix_ns_from_ticks(ticks: int) -> int:
    return (ticks - EPOCH_OFFSET_TICKS) * 100


def ticks_from_datetime(dt: datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - datetime(1601, 1, 1, tzinfo=timezone.utc)
    return (delta.days * 86400 + delta.seconds) * 10_000_000 + delta.microseconds * 10


def datetime_from_ticks(ticks: int) -> datetime:
    from datetime import timedelta

    return datetime(1601, 1, 1, tzinfo=timezone.utc) + timedelta(microseconds=ticks // 10)


def now_ticks() -> int:
    import time

    return ticks_from_unix_ns(time.time_ns())


# ---------------------------------------------------------------------------
# composite built-ins


class NodeIdType(IntEnum):
    TWO_BYTE = 0
    FOUR_BYTE = 1
    NUMERIC = 2
    STRING = 3
    GUID = 4
    BYTE_STRING = 5


@dataclass(frozen=True)
class NodeId:
    namespace: int = 0
    identifier: int | str | bytes | uuid.UUID = 0
    # wire form seen when decoding; reused on encode so bytes round-trip
    form: NodeIdType | None = field(default=None, compare=False, repr=False)

    def is_null(self) -> bool:
        return self.namespace == 0 and self.identifier in (0, "", b"", None)

    def __str__(self) -> str:
        kind = {int: "i", str: "s", bytes: "b", uuid.UUID: "g"}[type(self.identifier)]
        ident = self.identifier.hex() if isinstance(self.identifier, bytes) else self.identifier
        return f"ns={self.namespace};{kind}={ident}" if self.namespace else f"{kind}={ident}"

    def canonical_form(self) -> NodeIdType:
        ident = self.identifier
        if isinstance(ident, bool):
            raise TypeError("NodeId identifier must not be bool")
        if isinstance(ident, int):
            if self.namespace == 0 and ident < 256:
                return NodeIdType.TWO_BYTE
            if self.namespace < 256 and ident < 65536:
                return NodeIdType.FOUR_BYTE
            return NodeIdType.NUMERIC
        if isinstance(ident, str):
            return NodeIdType.STRING
        if isinstance(ident, uuid.UUID):
            return NodeIdType.GUID
        if isinstance(ident, bytes):
            return NodeIdType.BYTE_STRING
        raise TypeError(f"unsupported NodeId identifier {ident!r}")


NULL_NODEID = NodeId(0, 0)


def numeric(i: int, ns: int = 0) -> NodeId:
    return NodeId(ns, i)


@dataclass(frozen=True)
class ExpandedNodeId:
    node_id: NodeId = NULL_NODEID
    namespace_uri: str | None = None
    server_index: int | None = None


@dataclass(frozen=True)
class QualifiedName:
    namespace: int = 0
    name: str | None = None


@dataclass(frozen=True)
class LocalizedText:
    text: str | None = None
    locale: str | None = None


@dataclass(frozen=True)
class ExtensionObject:
    type_id: NodeId = NULL_NODEID
    encoding: int = 0  # 0 no body, 1 binary, 2 xml
    body: bytes | None = None


@dataclass(frozen=True)
class DiagnosticInfo:
    symbolic_id: int | None = None
    namespace_uri: int | None = None
    localized_text: int | None = None
    locale: int | None = None
    additional_info: str | None = None
    inner_status_code: int | None = None
    inner_diagnostic_info: "DiagnosticInfo | None" = None


class VariantType(IntEnum):
    Null = 0
    Boolean = 1
    SByte = 2
    Byte = 3
    Int16 = 4
    UInt16 = 5
    Int32 = 6
    UInt32 = 7
    Int64 = 8
    UInt64 = 9
    Float = 10
    Double = 11
    String = 12
    DateTime = 13
    Guid = 14
    ByteString = 15
    XmlElement = 16
    NodeId = 17
    ExpandedNodeId = 18
    StatusCode = 19
    QualifiedName = 20
    LocalizedText = 21
    ExtensionObject = 22
    DataValue = 23
    Variant = 24
    DiagnosticInfo = 25


@dataclass(frozen=True)
class Variant:
    vtype: VariantType = VariantType.Null
    value: object = None
    is_array: bool = False
    dimensions: list | None = None

    @classmethod
    def double(cls, x: float) -> "Variant":
        return cls(VariantType.Double, float(x))


@dataclass(frozen=True)
class DataValue:
    value: Variant | None = None
    status: int | None = None
    source_timestamp: int | None = None
    source_picoseconds: int | None = None
    server_timestamp: int | None = None
    server_picoseconds: int | None = None


# ---------------------------------------------------------------------------
# reader / writer


class Float32Bits(float):
    """A decoded Float NaN that remembers its bit pattern.

    Widening a single-precision signaling NaN to a Python float quiets it, so
    the raw bits are kept to make re-encoding exact.
    """

    def __new__(cls, value, bits: int):
        obj = super().__new__(cls, value)
        obj.bits = bits
        return obj

_u8 = struct.Struct("<B")
_i8 = struct.Struct("<b")
_u16 = struct.Struct("<H")
_i16 = struct.Struct("<h")
_u32 = struct.Struct("<I")
_i32 = struct.Struct("<i")
_u64 = struct.Struct("<Q")
_i64 = struct.Struct("<q")
_f32 = struct.Struct("<f")
_u32_bits = struct.Struct("<I")
_f64 = struct.Struct("<d")


class Reader:
    """Cursor over a byte buffer; every read past the end raises :class:`TruncatedError`."""

    __slots__ = ("buf", "pos", "end")

    def __init__(self, buf, pos: int = 0, end: int | None = None):
        self.buf = bytes(buf)
        self.pos = pos
        self.end = len(self.buf) if end is None else end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def _take(self, s: struct.Struct):
        p = self.pos
        if p + s.size > self.end:
            raise TruncatedError(f"need {s.size} bytes at offset {p}, {self.end - p} left")
        self.pos = p + s.size
        return s.unpack_from(self.buf, p)[0]

    def bytes(self, n: int) -> bytes:
        p = self.pos
        if n < 0 or p + n > self.end:
            raise TruncatedError(f"need {n} bytes at offset {p}, {self.end - p} left")
        self.pos = p + n
        return self.buf[p : p + n]

    def boolean(self) -> bool:
        b = self._take(_u8)
        if b > 1:
            raise InvalidEncodingByteError(f"Boolean byte {b:#x}")
        return bool(b)

    def sbyte(self): return self._take(_i8)
    def byte(self): return self._take(_u8)
    def int16(self): return self._take(_i16)
    def uint16(self): return self._take(_u16)
    def int32(self): return self._take(_i32)
    def uint32(self): return self._take(_u32)
    def int64(self): return self._take(_i64)
    def uint64(self): return self._take(_u64)
    def float(self):
        raw = self.bytes(4)
        v = _f32.unpack(raw)[0]
        return Float32Bits(v, _u32_bits.unpack(raw)[0]) if v != v else v
    def double(self): return self._take(_f64)

    def length(self, min_item: int = 1) -> int:
        """Array/string length prefix; ``-1`` is null."""
        n = self._take(_i32)
        if n < -1:
            raise DecodingError(f"negative length {n}")
        if n > 0 and n * min_item > self.remaining:
            raise TruncatedError(f"length {n} exceeds the {self.remaining} remaining bytes")
        return n

    def bytestring(self) -> bytes | None:
        n = self.length()
        return None if n == -1 else self.bytes(n)

    def string(self) -> str | None:
        raw = self.bytestring()
        if raw is None:
            return None
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodingError(f"invalid UTF-8 in String: {exc}") from None

    def guid(self) -> uuid.UUID:
        return uuid.UUID(bytes_le=self.bytes(16))


class Writer:
    __slots__ = ("parts",)

    def __init__(self):
        self.parts = bytearray()

    def getvalue(self) -> bytes:
        return bytes(self.parts)

    def _put(self, s: struct.Struct, v):
        try:
            self.parts += s.pack(v)
        except struct.error as exc:
            raise ValueError(f"{v!r} does not fit: {exc}") from None

    def raw(self, b: bytes):
        self.parts += b

    def boolean(self, v): self._put(_u8, 1 if v else 0)
    def sbyte(self, v): self._put(_i8, v)
    def byte(self, v): self._put(_u8, v)
    def int16(self, v): self._put(_i16, v)
    def uint16(self, v): self._put(_u16, v)
    def int32(self, v): self._put(_i32, v)
    def uint32(self, v): self._put(_u32, v)
    def int64(self, v): self._put(_i64, v)
    def uint64(self, v): self._put(_u64, v)
    def float(self, v):
        if isinstance(v, Float32Bits):
            self._put(_u32_bits, v.bits)
        else:
            self._put(_f32, v)
    def double(self, v): self._put(_f64, v)

    def bytestring(self, v: bytes | None):
        if v is None:
            self.int32(-1)
        else:
            self.int32(len(v))
            self.parts += v

    def string(self, v: str | None):
        self.bytestring(None if v is None else v.encode("utf-8"))

    def guid(self, v: uuid.UUID):
        self.parts += v.bytes_le


# ---------------------------------------------------------------------------
# composite encoders


def write_nodeid(w: Writer, n: NodeId):
    form = n.form if n.form is not None else n.canonical_form()
    ident = n.identifier
    if form == NodeIdType.TWO_BYTE and isinstance(ident, int) and n.namespace == 0 and ident < 256:
        w.byte(0)
        w.byte(ident)
    elif form in (NodeIdType.TWO_BYTE, NodeIdType.FOUR_BYTE) and isinstance(ident, int) and n.namespace < 256 and ident < 65536:
        w.byte(1)
        w.byte(n.namespace)
        w.uint16(ident)
    elif isinstance(ident, int):
        w.byte(2)
        w.uint16(n.namespace)
        w.uint32(ident)
    elif isinstance(ident, str):
        w.byte(3)
        w.uint16(n.namespace)
        w.string(ident)
    elif isinstance(ident, uuid.UUID):
        w.byte(4)
        w.uint16(n.namespace)
        w.guid(ident)
    elif isinstance(ident, bytes):
        w.byte(5)
        w.uint16(n.namespace)
        w.bytestring(ident)
    else:
        raise TypeError(f"unsupported NodeId identifier {ident!r}")


def _read_nodeid_body(r: Reader, enc: int) -> NodeId:
    if enc == 0:
        return NodeId(0, r.byte(), NodeIdType.TWO_BYTE)
    if enc == 1:
        ns = r.byte()
        return NodeId(ns, r.uint16(), NodeIdType.FOUR_BYTE)
    if enc == 2:
        ns = r.uint16()
        return NodeId(ns, r.uint32(), NodeIdType.NUMERIC)
    if enc == 3:
        ns = r.uint16()
        s = r.string()
        if s is None:
            raise DecodingError("null String NodeId identifier")
        return NodeId(ns, s, NodeIdType.STRING)
    if enc == 4:
        ns = r.uint16()
        return NodeId(ns, r.guid(), NodeIdType.GUID)
    if enc == 5:
        ns = r.uint16()
        b = r.bytestring()
        if b is None:
            raise DecodingError("null ByteString NodeId identifier")
        return NodeId(ns, b, NodeIdType.BYTE_STRING)
    raise InvalidEncodingByteError(f"NodeId encoding byte {enc:#x}")


def read_nodeid(r: Reader) -> NodeId:
    return _read_nodeid_body(r, r.byte())


def write_expanded_nodeid(w: Writer, e: ExpandedNodeId):
    start = len(w.parts)
    write_nodeid(w, e.node_id)
    flags = 0
    if e.namespace_uri is not None:
        flags |= 0x80
    if e.server_index is not None:
        flags |= 0x40
    w.parts[start] |= flags
    if e.namespace_uri is not None:
        w.string(e.namespace_uri)
    if e.server_index is not None:
        w.uint32(e.server_index)


def read_expanded_nodeid(r: Reader) -> ExpandedNodeId:
    enc = r.byte()
    node = _read_nodeid_body(r, enc & 0x3F)
    uri = r.string() if enc & 0x80 else None
    if enc & 0x80 and uri is None:
        raise DecodingError("namespace URI flag set but URI is null")
    index = r.uint32() if enc & 0x40 else None
    return ExpandedNodeId(node, uri, index)


def write_qualified_name(w: Writer, q: QualifiedName):
    w.uint16(q.namespace)
    w.string(q.name)


def read_qualified_name(r: Reader) -> QualifiedName:
    ns = r.uint16()
    return QualifiedName(ns, r.string())


def write_localized_text(w: Writer, t: LocalizedText):
    mask = (0x01 if t.locale is not None else 0) | (0x02 if t.text is not None else 0)
    w.byte(mask)
    if t.locale is not None:
        w.string(t.locale)
    if t.text is not None:
        w.string(t.text)


def read_localized_text(r: Reader) -> LocalizedText:
    mask = r.byte()
    if mask & ~0x03:
        raise InvalidEncodingByteError(f"LocalizedText mask {mask:#x}")
    locale = r.string() if mask & 0x01 else None
    text = r.string() if mask & 0x02 else None
    if (mask & 0x01 and locale is None) or (mask & 0x02 and text is None):
        raise DecodingError("LocalizedText field flagged present but null")
    return LocalizedText(text, locale)


def write_extension_object(w: Writer, e: ExtensionObject):
    write_nodeid(w, e.type_id)
    w.byte(e.encoding)
    if e.encoding:
        w.bytestring(e.body if e.body is not None else b"")


def read_extension_object(r: Reader) -> ExtensionObject:
    type_id = read_nodeid(r)
    enc = r.byte()
    if enc == 0:
        return ExtensionObject(type_id, 0, None)
    if enc in (1, 2):
        body = r.bytestring()
        if body is None:
            raise DecodingError("ExtensionObject body flagged present but null")
        return ExtensionObject(type_id, enc, body)
    raise InvalidEncodingByteError(f"ExtensionObject encoding byte {enc:#x}")


def write_diagnostic_info(w: Writer, d: DiagnosticInfo | None, depth: int = 0):
    if d is None:
        w.byte(0)
        return
    if depth > MAX_DEPTH:
        raise ValueError("DiagnosticInfo nesting too deep")
    mask = 0
    for bit, v in (
        (0x01, d.symbolic_id), (0x02, d.namespace_uri), (0x04, d.localized_text),
        (0x08, d.locale), (0x10, d.additional_info), (0x20, d.inner_status_code),
        (0x40, d.inner_diagnostic_info),
    ):
        if v is not None:
            mask |= bit
    w.byte(mask)
    if d.symbolic_id is not None:
        w.int32(d.symbolic_id)
    if d.namespace_uri is not None:
        w.int32(d.namespace_uri)
    if d.locale is not None:
        w.int32(d.locale)
    if d.localized_text is not None:
        w.int32(d.localized_text)
    if d.additional_info is not None:
        w.string(d.additional_info)
    if d.inner_status_code is not None:
        w.uint32(d.inner_status_code)
    if d.inner_diagnostic_info is not None:
        write_diagnostic_info(w, d.inner_diagnostic_info, depth + 1)


def read_diagnostic_info(r: Reader, depth: int = 0) -> DiagnosticInfo | None:
    if depth > MAX_DEPTH:
        raise DecodingError("DiagnosticInfo nesting too deep")
    mask = r.byte()
    if mask == 0 and depth == 0:
        return None
    if mask & 0x80:
        raise InvalidEncodingByteError(f"DiagnosticInfo mask {mask:#x}")
    symbolic_id = r.int32() if mask & 0x01 else None
    namespace_uri = r.int32() if mask & 0x02 else None
    locale = r.int32() if mask & 0x08 else None
    localized_text = r.int32() if mask & 0x04 else None
    additional_info = r.string() if mask & 0x10 else None
    if mask & 0x10 and additional_info is None:
        raise DecodingError("AdditionalInfo flagged present but null")
    inner_status = r.uint32() if mask & 0x20 else None
    inner = read_diagnostic_info(r, depth + 1) if mask & 0x40 else None
    return DiagnosticInfo(symbolic_id, namespace_uri, localized_text, locale, additional_info, inner_status, inner)


_SCALAR_WRITERS = {
    VariantType.Boolean: Writer.boolean,
    VariantType.SByte: Writer.sbyte,
    VariantType.Byte: Writer.byte,
    VariantType.Int16: Writer.int16,
    VariantType.UInt16: Writer.uint16,
    VariantType.Int32: Writer.int32,
    VariantType.UInt32: Writer.uint32,
    VariantType.Int64: Writer.int64,
    VariantType.UInt64: Writer.uint64,
    VariantType.Float: Writer.float,
    VariantType.Double: Writer.double,
    VariantType.String: Writer.string,
    VariantType.DateTime: Writer.int64,
    VariantType.Guid: Writer.guid,
    VariantType.ByteString: Writer.bytestring,
    VariantType.XmlElement: Writer.bytestring,
    VariantType.NodeId: write_nodeid,
    VariantType.ExpandedNodeId: write_expanded_nodeid,
    VariantType.StatusCode: Writer.uint32,
    VariantType.QualifiedName: write_qualified_name,
    VariantType.LocalizedText: write_localized_text,
    VariantType.ExtensionObject: write_extension_object,
}

_SCALAR_READERS = {
    VariantType.Boolean: Reader.boolean,
    VariantType.SByte: Reader.sbyte,
    VariantType.Byte: Reader.byte,
    VariantType.Int16: Reader.int16,
    VariantType.UInt16: Reader.uint16,
    VariantType.Int32: Reader.int32,
    VariantType.UInt32: Reader.uint32,
    VariantType.Int64: Reader.int64,
    VariantType.UInt64: Reader.uint64,
    VariantType.Float: Reader.float,
    VariantType.Double: Reader.double,
    VariantType.String: Reader.string,
    VariantType.DateTime: Reader.int64,
    VariantType.Guid: Reader.guid,
    VariantType.ByteString: Reader.bytestring,
    VariantType.XmlElement: Reader.bytestring,
    VariantType.NodeId: read_nodeid,
    VariantType.ExpandedNodeId: read_expanded_nodeid,
    VariantType.StatusCode: Reader.uint32,
    VariantType.QualifiedName: read_qualified_name,
    VariantType.LocalizedText: read_localized_text,
    VariantType.ExtensionObject: read_extension_object,
}


def _write_variant_scalar(w: Writer, vtype: VariantType, v, depth: int):
    if vtype == VariantType.DataValue:
        write_datavalue(w, v, depth + 1)
    elif vtype == VariantType.Variant:
        write_variant(w, v, depth + 1)
    elif vtype == VariantType.DiagnosticInfo:
        write_diagnostic_info(w, v, depth + 1)
    else:
        _SCALAR_WRITERS[vtype](w, v)


def _read_variant_scalar(r: Reader, vtype: VariantType, depth: int):
    if vtype == VariantType.DataValue:
        return read_datavalue(r, depth + 1)
    if vtype == VariantType.Variant:
        return read_variant(r, depth + 1)
    if vtype == VariantType.DiagnosticInfo:
        return read_diagnostic_info(r, depth + 1)
    return _SCALAR_READERS[vtype](r)


def write_variant(w: Writer, v: Variant, depth: int = 0):
    if depth > MAX_DEPTH:
        raise ValueError("Variant nesting too deep")
    vtype = VariantType(v.vtype)
    if vtype == VariantType.Null:
        w.byte(0)
        return
    mask = int(vtype)
    if v.is_array:
        mask |= 0x80
        if v.dimensions is not None:
            mask |= 0x40
    w.byte(mask)
    if v.is_array:
        if v.value is None:
            w.int32(-1)
        else:
            w.int32(len(v.value))
            for item in v.value:
                _write_variant_scalar(w, vtype, item, depth)
        if v.dimensions is not None:
            w.int32(len(v.dimensions))
            for d in v.dimensions:
                w.int32(d)
    else:
        if vtype == VariantType.Variant:
            raise ValueError("a scalar Variant cannot contain a Variant")
        _write_variant_scalar(w, vtype, v.value, depth)


def read_variant(r: Reader, depth: int = 0) -> Variant:
    if depth > MAX_DEPTH:
        raise DecodingError("Variant nesting too deep")
    mask = r.byte()
    code = mask & 0x3F
    if code > 25:
        raise InvalidEncodingByteError(f"Variant type {code}")
    vtype = VariantType(code)
    if vtype == VariantType.Null:
        if mask:
            raise InvalidEncodingByteError(f"Null Variant with flags {mask:#x}")
        return Variant()
    if mask & 0x80:
        n = r.length()
        values = None if n == -1 else [_read_variant_scalar(r, vtype, depth) for _ in range(n)]
        dims = None
        if mask & 0x40:
            nd = r.length(4)
            if nd == -1:
                raise DecodingError("null ArrayDimensions with dimensions flag set")
            dims = [r.int32() for _ in range(nd)]
        return Variant(vtype, values, True, dims)
    if mask & 0x40 or vtype == VariantType.Variant:
        raise InvalidEncodingByteError(f"Variant mask {mask:#x}")
    return Variant(vtype, _read_variant_scalar(r, vtype, depth))


def write_datavalue(w: Writer, d: DataValue, depth: int = 0):
    mask = 0
    for bit, v in (
        (0x01, d.value), (0x02, d.status), (0x04, d.source_timestamp),
        (0x08, d.server_timestamp), (0x10, d.source_picoseconds), (0x20, d.server_picoseconds),
    ):
        if v is not None:
            mask |= bit
    w.byte(mask)
    if d.value is not None:
        write_variant(w, d.value, depth + 1)
    if d.status is not None:
        w.uint32(d.status)
    if d.source_timestamp is not None:
        w.int64(d.source_timestamp)
    if d.source_picoseconds is not None:
        w.uint16(d.source_picoseconds)
    if d.server_timestamp is not None:
        w.int64(d.server_timestamp)
    if d.server_picoseconds is not None:
        w.uint16(d.server_picoseconds)


def read_datavalue(r: Reader, depth: int = 0) -> DataValue:
    if depth > MAX_DEPTH:
        raise DecodingError("DataValue nesting too deep")
    mask = r.byte()
    if mask & 0xC0:
        raise InvalidEncodingByteError(f"DataValue mask {mask:#x}")
    value = read_variant(r, depth + 1) if mask & 0x01 else None
    status = r.uint32() if mask & 0x02 else None
    src = r.int64() if mask & 0x04 else None
    src_ps = r.uint16() if mask & 0x10 else None
    srv = r.int64() if mask & 0x08 else None
    srv_ps = r.uint16() if mask & 0x20 else None
    return DataValue(value, status, src, src_ps, srv, srv_ps)


# ---------------------------------------------------------------------------
# kind-keyed entry points

WRITERS = {
    "Boolean": Writer.boolean,
    "SByte": Writer.sbyte,
    "Byte": Writer.byte,
    "Int16": Writer.int16,
    "UInt16": Writer.uint16,
    "Int32": Writer.int32,
    "UInt32": Writer.uint32,
    "Int64": Writer.int64,
    "UInt64": Writer.uint64,
    "Float": Writer.float,
    "Double": Writer.double,
    "String": Writer.string,
    "ByteString": Writer.bytestring,
    "DateTime": Writer.int64,
    "Guid": Writer.guid,
    "StatusCode": Writer.uint32,
    "NodeId": write_nodeid,
    "ExpandedNodeId": write_expanded_nodeid,
    "QualifiedName": write_qualified_name,
    "LocalizedText": write_localized_text,
    "ExtensionObject": write_extension_object,
    "DiagnosticInfo": write_diagnostic_info,
    "Variant": write_variant,
    "DataValue": write_datavalue,
}

READERS = {
    "Boolean": Reader.boolean,
    "SByte": Reader.sbyte,
    "Byte": Reader.byte,
    "Int16": Reader.int16,
    "UInt16": Reader.uint16,
    "Int32": Reader.int32,
    "UInt32": Reader.uint32,
    "Int64": Reader.int64,
    "UInt64": Reader.uint64,
    "Float": Reader.float,
    "Double": Reader.double,
    "String": Reader.string,
    "ByteString": Reader.bytestring,
    "DateTime": Reader.int64,
    "Guid": Reader.guid,
    "StatusCode": Reader.uint32,
    "NodeId": read_nodeid,
    "ExpandedNodeId": read_expanded_nodeid,
    "QualifiedName": read_qualified_name,
    "LocalizedText": read_localized_text,
    "ExtensionObject": read_extension_object,
    "DiagnosticInfo": read_diagnostic_info,
    "Variant": read_variant,
    "DataValue": read_datavalue,
}


def encode_primitive(value, kind: str) -> bytes:
    w = Writer()
    WRITERS[kind](w, value)
    return w.getvalue()


def decode_primitive(data: bytes, kind: str, exact: bool = True):
    """Decode one value of ``kind``; with ``exact`` trailing bytes are an error."""
    r = Reader(data)
    value = READERS[kind](r)
    if exact and r.remaining:
        raise DecodingError(f"{r.remaining} trailing bytes after {kind}")
    return value
