"""Transport frames and the service structures the server understands.

Every structure is a dataclass whose fields carry their wire kind in the
field metadata; one generic walker encodes and decodes all of them in
declaration order.
"""
from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import ClassVar

from . import status
from .codec import (
    NULL_NODEID,
    READERS,
    WRITERS,
    DataValue,
    DecodingError,
    DiagnosticInfo,
    ExpandedNodeId,
    ExtensionObject,
    LocalizedText,
    NodeId,
    QualifiedName,
    Reader,
    TruncatedError,
    Variant,
    Writer,
    read_nodeid,
    write_nodeid,
)

HEADER = struct.Struct("<3scI")
HEADER_SIZE = HEADER.size
DEFAULT_BUFFER = 65536
MIN_BUFFER = 8192
PROTOCOL_VERSION = 0
SECURITY_POLICY_NONE = "http://opcfoundation.org/UA/SecurityPolicy#None"
TRANSPORT_PROFILE = "http://opcfoundation.org/UA-Profile/Transport/uatcp-uasc-uabinary"
SECURE_TYPES = (b"OPN", b"MSG", b"CLO")


class MessageTypeError(DecodingError):
    status = status.BadTcpMessageTypeInvalid


class MessageTooLargeError(DecodingError):
    status = status.BadTcpMessageTooLarge


class MessageSecurityMode(IntEnum):
    Invalid = 0
    None_ = 1
    Sign = 2
    SignAndEncrypt = 3


class SecurityTokenRequestType(IntEnum):
    Issue = 0
    Renew = 1


class BrowseDirection(IntEnum):
    Forward = 0
    Inverse = 1
    Both = 2


class NodeClass(IntEnum):
    Unspecified = 0
    Object = 1
    Variable = 2
    Method = 4
    ObjectType = 8
    VariableType = 16
    ReferenceType = 32
    DataType = 64
    View = 128


class TimestampsToReturn(IntEnum):
    Source = 0
    Server = 1
    Both = 2
    Neither = 3


class UserTokenType(IntEnum):
    Anonymous = 0
    UserName = 1
    Certificate = 2
    IssuedToken = 3


# ---------------------------------------------------------------------------
# generic structure machinery


def array(kind):
    return ("array", kind)


def _default(kind):
    if isinstance(kind, tuple):
        return list
    if isinstance(kind, type):
        return kind
    return {
        "Boolean": lambda: False,
        "Float": lambda: 0.0,
        "Double": lambda: 0.0,
        "String": lambda: None,
        "ByteString": lambda: None,
        "NodeId": lambda: NULL_NODEID,
        "ExpandedNodeId": ExpandedNodeId,
        "QualifiedName": QualifiedName,
        "LocalizedText": LocalizedText,
        "ExtensionObject": ExtensionObject,
        "DiagnosticInfo": lambda: None,
        "Variant": Variant,
        "DataValue": DataValue,
    }.get(kind, int)


def ua(kind):
    return field(default_factory=_default(kind), metadata={"ua": kind})


@lru_cache(maxsize=None)
def fields_of(cls) -> tuple:
    return tuple((f.name, f.metadata["ua"]) for f in dataclasses.fields(cls))


def write_value(w: Writer, kind, value):
    if isinstance(kind, tuple):
        if value is None:
            w.int32(-1)
            return
        w.int32(len(value))
        for item in value:
            write_value(w, kind[1], item)
    elif isinstance(kind, type):
        value.encode_into(w)
    else:
        WRITERS[kind](w, value)


def read_value(r: Reader, kind):
    if isinstance(kind, tuple):
        n = r.length()
        if n == -1:
            return None
        return [read_value(r, kind[1]) for _ in range(n)]
    if isinstance(kind, type):
        return kind.decode_from(r)
    return READERS[kind](r)


class Struct:
    TYPE_ID: ClassVar[int | None] = None

    def encode_into(self, w: Writer):
        for name, kind in fields_of(type(self)):
            write_value(w, kind, getattr(self, name))

    @classmethod
    def decode_from(cls, r: Reader):
        return cls(**{name: read_value(r, kind) for name, kind in fields_of(cls)})

    def to_bytes(self) -> bytes:
        w = Writer()
        self.encode_into(w)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes):
        r = Reader(data)
        obj = cls.decode_from(r)
        if r.remaining:
            raise DecodingError(f"{r.remaining} trailing bytes after {cls.__name__}")
        return obj


# ---------------------------------------------------------------------------
# transport messages


@dataclass
class Hello(Struct):
    MSG_TYPE: ClassVar[bytes] = b"HEL"
    protocol_version: int = ua("UInt32")
    receive_buffer_size: int = ua("UInt32")
    send_buffer_size: int = ua("UInt32")
    max_message_size: int = ua("UInt32")
    max_chunk_count: int = ua("UInt32")
    endpoint_url: str | None = ua("String")


@dataclass
class Acknowledge(Struct):
    MSG_TYPE: ClassVar[bytes] = b"ACK"
    protocol_version: int = ua("UInt32")
    receive_buffer_size: int = ua("UInt32")
    send_buffer_size: int = ua("UInt32")
    max_message_size: int = ua("UInt32")
    max_chunk_count: int = ua("UInt32")


@dataclass
class ErrorMessage(Struct):
    MSG_TYPE: ClassVar[bytes] = b"ERR"
    error: int = ua("StatusCode")
    reason: str | None = ua("String")


@dataclass
class AsymmetricSecurityHeader(Struct):
    security_policy_uri: str | None = ua("String")
    sender_certificate: bytes | None = ua("ByteString")
    receiver_certificate_thumbprint: bytes | None = ua("ByteString")


@dataclass
class UnknownBody:
    """A service body whose type id the server does not implement."""

    type_id: NodeId
    payload: bytes


@dataclass
class SecureMessage:
    msg_type: bytes  # OPN, MSG or CLO
    channel_id: int
    security: AsymmetricSecurityHeader | int  # token id for MSG/CLO
    sequence_number: int
    request_id: int
    body: object


# ---------------------------------------------------------------------------
# common structures


@dataclass
class RequestHeader(Struct):
    authentication_token: NodeId = ua("NodeId")
    timestamp: int = ua("DateTime")
    request_handle: int = ua("UInt32")
    return_diagnostics: int = ua("UInt32")
    audit_entry_id: str | None = ua("String")
    timeout_hint: int = ua("UInt32")
    additional_header: ExtensionObject = ua("ExtensionObject")


@dataclass
class ResponseHeader(Struct):
    timestamp: int = ua("DateTime")
    request_handle: int = ua("UInt32")
    service_result: int = ua("StatusCode")
    service_diagnostics: DiagnosticInfo | None = ua("DiagnosticInfo")
    string_table: list = ua(array("String"))
    additional_header: ExtensionObject = ua("ExtensionObject")


@dataclass
class ChannelSecurityToken(Struct):
    channel_id: int = ua("UInt32")
    token_id: int = ua("UInt32")
    created_at: int = ua("DateTime")
    revised_lifetime: int = ua("UInt32")


@dataclass
class SignatureData(Struct):
    algorithm: str | None = ua("String")
    signature: bytes | None = ua("ByteString")


@dataclass
class SignedSoftwareCertificate(Struct):
    certificate_data: bytes | None = ua("ByteString")
    signature: bytes | None = ua("ByteString")


@dataclass
class ApplicationDescription(Struct):
    application_uri: str | None = ua("String")
    product_uri: str | None = ua("String")
    application_name: LocalizedText = ua("LocalizedText")
    application_type: int = ua("Int32")
    gateway_server_uri: str | None = ua("String")
    discovery_profile_uri: str | None = ua("String")
    discovery_urls: list = ua(array("String"))


@dataclass
class UserTokenPolicy(Struct):
    policy_id: str | None = ua("String")
    token_type: int = ua("Int32")
    issued_token_type: str | None = ua("String")
    issuer_endpoint_url: str | None = ua("String")
    security_policy_uri: str | None = ua("String")


@dataclass
class EndpointDescription(Struct):
    endpoint_url: str | None = ua("String")
    server: ApplicationDescription = ua(ApplicationDescription)
    server_certificate: bytes | None = ua("ByteString")
    security_mode: int = ua("Int32")
    security_policy_uri: str | None = ua("String")
    user_identity_tokens: list = ua(array(UserTokenPolicy))
    transport_profile_uri: str | None = ua("String")
    security_level: int = ua("Byte")


@dataclass
class AnonymousIdentityToken(Struct):
    TYPE_ID = 321
    policy_id: str | None = ua("String")


@dataclass
class UserNameIdentityToken(Struct):
    TYPE_ID = 324
    policy_id: str | None = ua("String")
    user_name: str | None = ua("String")
    password: bytes | None = ua("ByteString")
    encryption_algorithm: str | None = ua("String")


@dataclass
class ViewDescription(Struct):
    view_id: NodeId = ua("NodeId")
    timestamp: int = ua("DateTime")
    view_version: int = ua("UInt32")


@dataclass
class BrowseDescription(Struct):
    node_id: NodeId = ua("NodeId")
    browse_direction: int = ua("Int32")
    reference_type_id: NodeId = ua("NodeId")
    include_subtypes: bool = ua("Boolean")
    node_class_mask: int = ua("UInt32")
    result_mask: int = ua("UInt32")


@dataclass
class ReferenceDescription(Struct):
    reference_type_id: NodeId = ua("NodeId")
    is_forward: bool = ua("Boolean")
    node_id: ExpandedNodeId = ua("ExpandedNodeId")
    browse_name: QualifiedName = ua("QualifiedName")
    display_name: LocalizedText = ua("LocalizedText")
    node_class: int = ua("Int32")
    type_definition: ExpandedNodeId = ua("ExpandedNodeId")


@dataclass
class BrowseResult(Struct):
    status_code: int = ua("StatusCode")
    continuation_point: bytes | None = ua("ByteString")
    references: list = ua(array(ReferenceDescription))


@dataclass
class ReadValueId(Struct):
    node_id: NodeId = ua("NodeId")
    attribute_id: int = ua("UInt32")
    index_range: str | None = ua("String")
    data_encoding: QualifiedName = ua("QualifiedName")


@dataclass
class WriteValue(Struct):
    node_id: NodeId = ua("NodeId")
    attribute_id: int = ua("UInt32")
    index_range: str | None = ua("String")
    value: DataValue = ua("DataValue")


# ---------------------------------------------------------------------------
# services


@dataclass
class ServiceFault(Struct):
    TYPE_ID = 397
    response_header: ResponseHeader = ua(ResponseHeader)


@dataclass
class GetEndpointsRequest(Struct):
    TYPE_ID = 428
    request_header: RequestHeader = ua(RequestHeader)
    endpoint_url: str | None = ua("String")
    locale_ids: list = ua(array("String"))
    profile_uris: list = ua(array("String"))


@dataclass
class GetEndpointsResponse(Struct):
    TYPE_ID = 431
    response_header: ResponseHeader = ua(ResponseHeader)
    endpoints: list = ua(array(EndpointDescription))


@dataclass
class OpenSecureChannelRequest(Struct):
    TYPE_ID = 446
    request_header: RequestHeader = ua(RequestHeader)
    client_protocol_version: int = ua("UInt32")
    request_type: int = ua("Int32")
    security_mode: int = ua("Int32")
    client_nonce: bytes | None = ua("ByteString")
    requested_lifetime: int = ua("UInt32")


@dataclass
class OpenSecureChannelResponse(Struct):
    TYPE_ID = 449
    response_header: ResponseHeader = ua(ResponseHeader)
    server_protocol_version: int = ua("UInt32")
    security_token: ChannelSecurityToken = ua(ChannelSecurityToken)
    server_nonce: bytes | None = ua("ByteString")


@dataclass
class CloseSecureChannelRequest(Struct):
    TYPE_ID = 452
    request_header: RequestHeader = ua(RequestHeader)


@dataclass
class CloseSecureChannelResponse(Struct):
    TYPE_ID = 455
    response_header: ResponseHeader = ua(ResponseHeader)


@dataclass
class CreateSessionRequest(Struct):
    TYPE_ID = 461
    request_header: RequestHeader = ua(RequestHeader)
    client_description: ApplicationDescription = ua(ApplicationDescription)
    server_uri: str | None = ua("String")
    endpoint_url: str | None = ua("String")
    session_name: str | None = ua("String")
    client_nonce: bytes | None = ua("ByteString")
    client_certificate: bytes | None = ua("ByteString")
    requested_session_timeout: float = ua("Double")
    max_response_message_size: int = ua("UInt32")


@dataclass
class CreateSessionResponse(Struct):
    TYPE_ID = 464
    response_header: ResponseHeader = ua(ResponseHeader)
    session_id: NodeId = ua("NodeId")
    authentication_token: NodeId = ua("NodeId")
    revised_session_timeout: float = ua("Double")
    server_nonce: bytes | None = ua("ByteString")
    server_certificate: bytes | None = ua("ByteString")
    server_endpoints: list = ua(array(EndpointDescription))
    server_software_certificates: list = ua(array(SignedSoftwareCertificate))
    server_signature: SignatureData = ua(SignatureData)
    max_request_message_size: int = ua("UInt32")


@dataclass
class ActivateSessionRequest(Struct):
    TYPE_ID = 467
    request_header: RequestHeader = ua(RequestHeader)
    client_signature: SignatureData = ua(SignatureData)
    client_software_certificates: list = ua(array(SignedSoftwareCertificate))
    locale_ids: list = ua(array("String"))
    user_identity_token: ExtensionObject = ua("ExtensionObject")
    user_token_signature: SignatureData = ua(SignatureData)


@dataclass
class ActivateSessionResponse(Struct):
    TYPE_ID = 470
    response_header: ResponseHeader = ua(ResponseHeader)
    server_nonce: bytes | None = ua("ByteString")
    results: list = ua(array("StatusCode"))
    diagnostic_infos: list = ua(array("DiagnosticInfo"))


@dataclass
class CloseSessionRequest(Struct):
    TYPE_ID = 473
    request_header: RequestHeader = ua(RequestHeader)
    delete_subscriptions: bool = ua("Boolean")


@dataclass
class CloseSessionResponse(Struct):
    TYPE_ID = 476
    response_header: ResponseHeader = ua(ResponseHeader)


@dataclass
class BrowseRequest(Struct):
    TYPE_ID = 527
    request_header: RequestHeader = ua(RequestHeader)
    view: ViewDescription = ua(ViewDescription)
    requested_max_references_per_node: int = ua("UInt32")
    nodes_to_browse: list = ua(array(BrowseDescription))


@dataclass
class BrowseResponse(Struct):
    TYPE_ID = 530
    response_header: ResponseHeader = ua(ResponseHeader)
    results: list = ua(array(BrowseResult))
    diagnostic_infos: list = ua(array("DiagnosticInfo"))


@dataclass
class ReadRequest(Struct):
    TYPE_ID = 631
    request_header: RequestHeader = ua(RequestHeader)
    max_age: float = ua("Double")
    timestamps_to_return: int = ua("Int32")
    nodes_to_read: list = ua(array(ReadValueId))


@dataclass
class ReadResponse(Struct):
    TYPE_ID = 634
    response_header: ResponseHeader = ua(ResponseHeader)
    results: list = ua(array("DataValue"))
    diagnostic_infos: list = ua(array("DiagnosticInfo"))


@dataclass
class WriteRequest(Struct):
    TYPE_ID = 673
    request_header: RequestHeader = ua(RequestHeader)
    nodes_to_write: list = ua(array(WriteValue))


@dataclass
class WriteResponse(Struct):
    TYPE_ID = 676
    response_header: ResponseHeader = ua(ResponseHeader)
    results: list = ua(array("StatusCode"))
    diagnostic_infos: list = ua(array("DiagnosticInfo"))


SERVICES = {
    cls.TYPE_ID: cls
    for cls in (
        ServiceFault,
        GetEndpointsRequest,
        GetEndpointsResponse,
        OpenSecureChannelRequest,
        OpenSecureChannelResponse,
        CloseSecureChannelRequest,
        CloseSecureChannelResponse,
        CreateSessionRequest,
        CreateSessionResponse,
        ActivateSessionRequest,
        ActivateSessionResponse,
        CloseSessionRequest,
        CloseSessionResponse,
        BrowseRequest,
        BrowseResponse,
        ReadRequest,
        ReadResponse,
        WriteRequest,
        WriteResponse,
    )
}

IDENTITY_TOKENS = {cls.TYPE_ID: cls for cls in (AnonymousIdentityToken, UserNameIdentityToken)}


def to_extension(obj: Struct) -> ExtensionObject:
    return ExtensionObject(NodeId(0, obj.TYPE_ID), 1, obj.to_bytes())


def from_extension(ext: ExtensionObject, registry=IDENTITY_TOKENS):
    """Decode a binary extension object body; ``None`` if the type is unknown."""
    tid = ext.type_id
    if ext.encoding != 1 or tid.namespace != 0 or tid.identifier not in registry:
        return None
    return registry[tid.identifier].from_bytes(ext.body)


# ---------------------------------------------------------------------------
# framing


def encode_body(body) -> bytes:
    w = Writer()
    if isinstance(body, UnknownBody):
        write_nodeid(w, body.type_id)
        w.raw(body.payload)
    else:
        write_nodeid(w, NodeId(0, body.TYPE_ID))
        body.encode_into(w)
    return w.getvalue()


def decode_body(r: Reader):
    type_id = read_nodeid(r)
    cls = SERVICES.get(type_id.identifier) if type_id.namespace == 0 else None
    if cls is None:
        return UnknownBody(type_id, r.bytes(r.remaining))
    return cls.decode_from(r)


def _frame(msg_type: bytes, payload: bytes) -> bytes:
    return HEADER.pack(msg_type, b"F", HEADER_SIZE + len(payload)) + payload


def encode_message(msg) -> bytes:
    if isinstance(msg, (Hello, Acknowledge, ErrorMessage)):
        return _frame(msg.MSG_TYPE, msg.to_bytes())
    if not isinstance(msg, SecureMessage):
        raise TypeError(f"cannot frame {type(msg).__name__}")
    w = Writer()
    w.uint32(msg.channel_id)
    if msg.msg_type == b"OPN":
        msg.security.encode_into(w)
    else:
        w.uint32(msg.security)
    w.uint32(msg.sequence_number)
    w.uint32(msg.request_id)
    w.raw(encode_body(msg.body))
    return _frame(msg.msg_type, w.getvalue())


def parse_header(data: bytes, max_size: int = DEFAULT_BUFFER) -> tuple[bytes, int]:
    """Validate an 8-byte frame header; returns (message type, total size)."""
    if len(data) < HEADER_SIZE:
        raise TruncatedError("incomplete message header")
    msg_type, chunk, size = HEADER.unpack_from(data)
    if msg_type not in (b"HEL", b"ACK", b"ERR") + SECURE_TYPES:
        raise MessageTypeError(f"unknown message type {msg_type!r}")
    if chunk != b"F":
        raise MessageTypeError(f"unsupported chunk type {chunk!r}")
    if size < HEADER_SIZE:
        raise DecodingError(f"declared size {size} is smaller than the header")
    if size > max_size:
        raise MessageTooLargeError(f"declared size {size} exceeds {max_size}")
    return msg_type, size


def decode_message(data: bytes, max_size: int = DEFAULT_BUFFER):
    """Decode one complete frame.  Never reads past the declared size."""
    msg_type, size = parse_header(data, max_size)
    if size > len(data):
        raise TruncatedError(f"declared size {size}, have {len(data)} bytes")
    if size < len(data):
        raise DecodingError(f"{len(data) - size} bytes beyond the declared size")
    r = Reader(data, HEADER_SIZE, size)
    if msg_type == b"HEL":
        msg = Hello.decode_from(r)
    elif msg_type == b"ACK":
        msg = Acknowledge.decode_from(r)
    elif msg_type == b"ERR":
        msg = ErrorMessage.decode_from(r)
    else:
        channel_id = r.uint32()
        security = AsymmetricSecurityHeader.decode_from(r) if msg_type == b"OPN" else r.uint32()
        seq = r.uint32()
        req = r.uint32()
        msg = SecureMessage(msg_type, channel_id, security, seq, req, decode_body(r))
    if r.remaining:
        raise DecodingError(f"{r.remaining} unread bytes in {msg_type.decode()} message")
    return msg
