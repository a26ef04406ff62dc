"""OPC UA binary server over TCP, security policy None only."""
from __future__ import annotations

import itertools
import json
import logging
import math
import secrets
import socket
import socketserver
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import status
from .addrspace import AddressSpace, AttributeId, NAMESPACES, build_address_space
from .codec import (
    DataValue,
    DecodingError,
    ExpandedNodeId,
    LocalizedText,
    NodeId,
    QualifiedName,
    Variant,
    VariantType,
    now_ticks,
)
from .messages import (
    DEFAULT_BUFFER,
    HEADER_SIZE,
    MIN_BUFFER,
    PROTOCOL_VERSION,
    SECURITY_POLICY_NONE,
    TRANSPORT_PROFILE,
    Acknowledge,
    ActivateSessionRequest,
    ActivateSessionResponse,
    AnonymousIdentityToken,
    ApplicationDescription,
    AsymmetricSecurityHeader,
    BrowseDirection,
    BrowseRequest,
    BrowseResponse,
    BrowseResult,
    ChannelSecurityToken,
    CloseSecureChannelRequest,
    CloseSessionRequest,
    CloseSessionResponse,
    CreateSessionRequest,
    CreateSessionResponse,
    EndpointDescription,
    ErrorMessage,
    GetEndpointsRequest,
    GetEndpointsResponse,
    Hello,
    MessageSecurityMode,
    NodeClass,
    OpenSecureChannelRequest,
    OpenSecureChannelResponse,
    ReadRequest,
    ReadResponse,
    ReferenceDescription,
    ResponseHeader,
    SecureMessage,
    SecurityTokenRequestType,
    ServiceFault,
    SignatureData,
    TimestampsToReturn,
    UnknownBody,
    UserNameIdentityToken,
    UserTokenPolicy,
    UserTokenType,
    WriteRequest,
    WriteResponse,
    decode_message,
    encode_message,
    from_extension,
    parse_header,
)

log = logging.getLogger(__name__)

DEFAULT_PORT = 4840
CHANNEL_LIFETIME_MS = 3_600_000
MAX_SESSIONS = 64
MAX_OPERATIONS = 1000
MAX_ENDPOINT_URL = 4096
SESSION_TIMEOUT_MS = 3_600_000.0


class IntrusionLog:
    """Append-only JSON-lines record of client activity.

    Each line holds ``ts`` (ISO 8601 UTC), ``session``, ``op``, ``node``,
    ``value``, ``status`` and ``peer``.  With ``keep=True`` the records are
    also kept in :attr:`records`.
    """

    def __init__(self, path=None, keep: bool = False, stream=None):
        self._lock = threading.Lock()
        self._fh = Path(path).open("a", encoding="utf-8") if path is not None else None
        self._stream = stream
        self.records: list[dict] | None = [] if keep else None

    def record(self, op: str, session=None, node=None, value=None, status_code: int = status.Good, peer=None) -> dict:
        ns = time.time_ns()
        rec = {
            "ts": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(ns // 1_000_000_000)) + f".{ns // 1000 % 1_000_000:06d}Z",
            "session": session,
            "op": op,
            "node": node,
            "value": _jsonable(value),
            "status": status.name(status_code),
            "peer": peer,
        }
        line = json.dumps(rec, separators=(",", ":"))
        with self._lock:
            if self.records is not None:
                self.records.append(rec)
            for out in (self._fh, self._stream):
                if out is not None:
                    out.write(line + "\n")
                    out.flush()
        return rec

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


@dataclass
class Channel:
    channel_id: int
    token_id: int
    created_at: int
    lifetime: int
    send_seq: int = 0


@dataclass
class Session:
    session_id: NodeId
    auth_token: NodeId
    name: str | None
    channel_id: int
    activated: bool = False


@dataclass
class ServerState:
    """Counters and sessions shared by all connections of one server."""

    lock: threading.Lock = field(default_factory=threading.Lock)
    channel_ids: itertools.count = field(default_factory=lambda: itertools.count(1))
    token_ids: itertools.count = field(default_factory=lambda: itertools.count(1))
    session_ids: itertools.count = field(default_factory=lambda: itertools.count(1))
    sessions: dict = field(default_factory=dict)  # auth token -> Session

    def next_channel(self) -> int:
        with self.lock:
            return next(self.channel_ids)

    def next_token(self) -> int:
        with self.lock:
            return next(self.token_ids)


class ProtocolViolation(Exception):
    def __init__(self, code: int, reason: str):
        super().__init__(reason)
        self.code = code


class Connection:
    """One client connection: handshake, secure channel and service dispatch."""

    def __init__(self, sock: socket.socket, server: "OpcUaServer", peer: str):
        self.sock = sock
        self.server = server
        self.peer = peer
        self.recv_limit = DEFAULT_BUFFER
        self.send_limit = DEFAULT_BUFFER
        self.hello_done = False
        self.channel: Channel | None = None

    # -- io

    def _recv_exact(self, n: int) -> bytes | None:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self.sock.recv(n - len(buf))
            except socket.timeout:
                if self.server.stopping.is_set():
                    return None
                continue
            if not chunk:
                return None
            buf += chunk
        return bytes(buf)

    def _send(self, msg) -> None:
        self.sock.sendall(encode_message(msg))

    def _error(self, code: int, reason: str) -> None:
        try:
            self._send(ErrorMessage(code, reason))
        except OSError:
            pass

    def run(self) -> None:
        try:
            while not self.server.stopping.is_set():
                head = self._recv_exact(HEADER_SIZE)
                if head is None:
                    return
                try:
                    _, size = parse_header(head, self.recv_limit)
                except DecodingError as exc:
                    self.server.log.record("protocol_error", value=str(exc), status_code=exc.status, peer=self.peer)
                    self._error(exc.status, str(exc))
                    return
                rest = self._recv_exact(size - HEADER_SIZE)
                if rest is None:
                    return
                try:
                    msg = decode_message(head + rest, self.recv_limit)
                except DecodingError as exc:
                    self.server.log.record("protocol_error", value=str(exc), status_code=exc.status, peer=self.peer)
                    self._error(exc.status, str(exc))
                    return
                try:
                    if not self.handle(msg):
                        return
                except ProtocolViolation as exc:
                    self.server.log.record("protocol_error", value=str(exc), status_code=exc.code, peer=self.peer)
                    self._error(exc.code, str(exc))
                    return
        except OSError:
            return
        except Exception as exc:  # never let one client take the listener down
            log.exception("connection %s failed", self.peer)
            self.server.log.record("internal_error", value=repr(exc), status_code=status.BadInternalError, peer=self.peer)
            self._error(status.BadTcpInternalError, "internal error")

    # -- transport level

    def handle(self, msg) -> bool:
        """Process one message; returns False when the connection should close."""
        if not self.hello_done:
            if not isinstance(msg, Hello):
                raise ProtocolViolation(status.BadTcpMessageTypeInvalid, "expected HEL")
            self._hello(msg)
            return True
        if isinstance(msg, (Hello, Acknowledge, ErrorMessage)):
            raise ProtocolViolation(status.BadTcpMessageTypeInvalid, f"unexpected {type(msg).__name__}")
        if msg.msg_type == b"OPN":
            self._open(msg)
            return True
        if self.channel is None or msg.channel_id != self.channel.channel_id:
            raise ProtocolViolation(status.BadTcpSecureChannelUnknown, f"unknown channel {msg.channel_id}")
        if msg.security != self.channel.token_id:
            raise ProtocolViolation(status.BadSecureChannelIdInvalid, f"unknown token {msg.security}")
        if msg.msg_type == b"CLO":
            if not isinstance(msg.body, CloseSecureChannelRequest):
                raise ProtocolViolation(status.BadTcpMessageTypeInvalid, "CLO without CloseSecureChannelRequest")
            self.server.log.record("close_channel", value=self.channel.channel_id, peer=self.peer)
            return False
        self._service(msg)
        return True

    def _hello(self, hel: Hello) -> None:
        if hel.receive_buffer_size < MIN_BUFFER or hel.send_buffer_size < MIN_BUFFER:
            raise ProtocolViolation(status.BadTcpInternalError, "buffer sizes below 8192")
        if hel.endpoint_url is not None and len(hel.endpoint_url.encode()) > MAX_ENDPOINT_URL:
            raise ProtocolViolation(status.BadTcpEndpointUrlInvalid, "endpoint URL too long")
        if hel.protocol_version < PROTOCOL_VERSION:
            raise ProtocolViolation(status.BadProtocolVersionUnsupported, "protocol version")
        self.recv_limit = min(hel.send_buffer_size, DEFAULT_BUFFER)
        self.send_limit = min(hel.receive_buffer_size, DEFAULT_BUFFER)
        max_msg = DEFAULT_BUFFER if hel.max_message_size == 0 else min(hel.max_message_size, DEFAULT_BUFFER)
        self.send_limit = min(self.send_limit, max_msg)
        self.hello_done = True
        self._send(Acknowledge(PROTOCOL_VERSION, self.recv_limit, self.send_limit, max_msg, 1))
        self.server.log.record("hello", value=hel.endpoint_url, peer=self.peer)

    def _open(self, msg: SecureMessage) -> None:
        req = msg.body
        if not isinstance(req, OpenSecureChannelRequest):
            raise ProtocolViolation(status.BadTcpMessageTypeInvalid, "OPN without OpenSecureChannelRequest")
        policy = msg.security.security_policy_uri
        handle = req.request_header.request_handle
        reply_security = AsymmetricSecurityHeader(SECURITY_POLICY_NONE, None, None)

        def reply(body, channel_id):
            seq = self.channel.send_seq + 1 if self.channel else 1
            if self.channel:
                self.channel.send_seq = seq
            self._send(SecureMessage(b"OPN", channel_id, reply_security, seq, msg.request_id, body))

        code = status.Good
        if policy != SECURITY_POLICY_NONE:
            code = status.BadSecurityPolicyRejected
        elif req.security_mode != MessageSecurityMode.None_:
            code = status.BadSecurityModeRejected
        elif req.request_type == SecurityTokenRequestType.Renew:
            if self.channel is None or msg.channel_id != self.channel.channel_id:
                code = status.BadTcpSecureChannelUnknown
        elif req.request_type != SecurityTokenRequestType.Issue:
            code = status.BadRequestTypeInvalid
        elif self.channel is not None:
            code = status.BadRequestTypeInvalid
        if code != status.Good:
            self.server.log.record("open_channel", value=policy, status_code=code, peer=self.peer)
            reply(ServiceFault(_rh(handle, code)), msg.channel_id)
            return

        lifetime = min(req.requested_lifetime or CHANNEL_LIFETIME_MS, CHANNEL_LIFETIME_MS)
        if self.channel is None:
            self.channel = Channel(self.server.state.next_channel(), self.server.state.next_token(), now_ticks(), lifetime)
        else:
            self.channel.token_id = self.server.state.next_token()
            self.channel.created_at = now_ticks()
            self.channel.lifetime = lifetime
        ch = self.channel
        self.server.log.record("open_channel", value=ch.channel_id, peer=self.peer)
        token = ChannelSecurityToken(ch.channel_id, ch.token_id, ch.created_at, ch.lifetime)
        reply(OpenSecureChannelResponse(_rh(handle), PROTOCOL_VERSION, token, b""), ch.channel_id)

    def _service(self, msg: SecureMessage) -> None:
        req = msg.body
        if isinstance(req, UnknownBody):
            self.server.log.record("unsupported", value=str(req.type_id), status_code=status.BadServiceUnsupported, peer=self.peer)
            resp = ServiceFault(_rh(0, status.BadServiceUnsupported))
        else:
            resp = self.server.dispatch(req, self.channel.channel_id, self.peer)
        seq = self.channel.send_seq + 1
        self.channel.send_seq = seq
        out = SecureMessage(b"MSG", self.channel.channel_id, self.channel.token_id, seq, msg.request_id, resp)
        data = encode_message(out)
        if len(data) > self.send_limit:
            handle = getattr(getattr(req, "request_header", None), "request_handle", 0)
            out.body = ServiceFault(_rh(handle, status.BadResponseTooLarge))
            data = encode_message(out)
        self.sock.sendall(data)


def _rh(handle: int, code: int = status.Good) -> ResponseHeader:
    return ResponseHeader(timestamp=now_ticks(), request_handle=handle, service_result=code)


class OpcUaServer:
    """Threaded TCP front-end for an :class:`AddressSpace`.

    ``port=0`` binds an ephemeral port; read it back from :attr:`address`.
    """

    def __init__(self, space: AddressSpace | None = None, host: str = "127.0.0.1", port: int = DEFAULT_PORT, log: IntrusionLog | None = None, log_reads: bool = True):
        self.space = space if space is not None else build_address_space()
        self.log = log if log is not None else IntrusionLog()
        self.log_reads = log_reads
        self.state = ServerState()
        self.stopping = threading.Event()
        self._conns: set[socket.socket] = set()
        self._conns_lock = threading.Lock()
        outer = self

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                self.request.settimeout(0.25)
                self.request.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                with outer._conns_lock:
                    outer._conns.add(self.request)
                try:
                    Connection(self.request, outer, f"{self.client_address[0]}:{self.client_address[1]}").run()
                finally:
                    with outer._conns_lock:
                        outer._conns.discard(self.request)

        class TCPServer(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._tcp = TCPServer((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._tcp.server_address[:2]

    @property
    def endpoint_url(self) -> str:
        host, port = self.address
        return f"opc.tcp://{host}:{port}"

    def start(self) -> "OpcUaServer":
        self._thread = threading.Thread(target=self._tcp.serve_forever, kwargs={"poll_interval": 0.1}, name="opcua-listener", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.stopping.set()
        self._tcp.shutdown()
        self._tcp.server_close()
        with self._conns_lock:
            for s in list(self._conns):
                try:
                    s.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
        if self._thread is not None:
            self._thread.join(timeout=1.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    # -- services

    def endpoints(self) -> list[EndpointDescription]:
        app = ApplicationDescription(
            application_uri=NAMESPACES[1],
            product_uri=NAMESPACES[1],
            application_name=LocalizedText("Aero CPS", None),
            application_type=0,
        )
        policy = UserTokenPolicy("anonymous", UserTokenType.Anonymous, None, None, None)
        return [
            EndpointDescription(
                endpoint_url=self.endpoint_url,
                server=app,
                server_certificate=None,
                security_mode=MessageSecurityMode.None_,
                security_policy_uri=SECURITY_POLICY_NONE,
                user_identity_tokens=[policy],
                transport_profile_uri=TRANSPORT_PROFILE,
                security_level=0,
            )
        ]

    def dispatch(self, req, channel_id: int, peer: str | None = None):
        handle = req.request_header.request_handle
        if isinstance(req, GetEndpointsRequest):
            self.log.record("get_endpoints", value=req.endpoint_url, peer=peer)
            return GetEndpointsResponse(_rh(handle), self.endpoints())
        if isinstance(req, CreateSessionRequest):
            return self._create_session(req, channel_id, peer)
        if isinstance(req, ActivateSessionRequest):
            return self._activate_session(req, channel_id, peer)

        handlers = {CloseSessionRequest: self._close_session, BrowseRequest: self._browse, ReadRequest: self._read, WriteRequest: self._write}
        fn = handlers.get(type(req))
        if fn is None:
            self.log.record("unsupported", value=type(req).__name__, status_code=status.BadServiceUnsupported, peer=peer)
            return ServiceFault(_rh(handle, status.BadServiceUnsupported))
        with self.state.lock:
            session = self.state.sessions.get(req.request_header.authentication_token)
        code = status.Good
        if session is None:
            code = status.BadSessionIdInvalid
        elif not session.activated and not isinstance(req, CloseSessionRequest):
            code = status.BadSessionNotActivated
        elif session.activated and session.channel_id != channel_id:
            code = status.BadSecureChannelIdInvalid
        if code != status.Good:
            sid = str(session.session_id) if session else None
            # rejected writes are still attempts; keep the target nodes
            if isinstance(req, WriteRequest):
                for wv in req.nodes_to_write or ():
                    self.log.record("write", sid, str(wv.node_id), _variant_value(wv.value.value), code, peer)
            else:
                self.log.record(type(req).__name__, sid, None, None, code, peer)
            return ServiceFault(_rh(handle, code))
        return fn(req, session, peer)

    def _create_session(self, req: CreateSessionRequest, channel_id: int, peer):
        handle = req.request_header.request_handle
        with self.state.lock:
            if len(self.state.sessions) >= MAX_SESSIONS:
                code = status.BadTooManySessions
            else:
                code = status.Good
                n = next(self.state.session_ids)
                session = Session(NodeId(1, n), NodeId(0, secrets.token_bytes(16)), req.session_name, channel_id)
                self.state.sessions[session.auth_token] = session
        if code != status.Good:
            self.log.record("create_session", value=req.session_name, status_code=code, peer=peer)
            return ServiceFault(_rh(handle, code))
        self.log.record("create_session", str(session.session_id), value=req.session_name, peer=peer)
        timeout = req.requested_session_timeout
        timeout = SESSION_TIMEOUT_MS if not (timeout > 0) else min(timeout, SESSION_TIMEOUT_MS)
        return CreateSessionResponse(
            _rh(handle),
            session.session_id,
            session.auth_token,
            timeout,
            secrets.token_bytes(32),
            None,
            self.endpoints(),
            [],
            SignatureData(None, None),
            DEFAULT_BUFFER,
        )

    def _activate_session(self, req: ActivateSessionRequest, channel_id: int, peer):
        handle = req.request_header.request_handle
        with self.state.lock:
            session = self.state.sessions.get(req.request_header.authentication_token)
        if session is None:
            self.log.record("activate_session", status_code=status.BadSessionIdInvalid, peer=peer)
            return ServiceFault(_rh(handle, status.BadSessionIdInvalid))
        sid = str(session.session_id)
        ext = req.user_identity_token
        try:
            token = None if ext.encoding == 0 and ext.type_id.is_null() else from_extension(ext)
        except DecodingError:
            token = False
        if isinstance(token, UserNameIdentityToken):
            # credentials are what an intruder tried; keep them
            self.log.record("activate_session", sid, None, [token.user_name, token.password], status.BadIdentityTokenRejected, peer)
            return ServiceFault(_rh(handle, status.BadIdentityTokenRejected))
        if not (token is None or isinstance(token, AnonymousIdentityToken)):
            self.log.record("activate_session", sid, None, str(ext.type_id), status.BadIdentityTokenInvalid, peer)
            return ServiceFault(_rh(handle, status.BadIdentityTokenInvalid))
        with self.state.lock:
            session.activated = True
            session.channel_id = channel_id
        self.log.record("activate_session", sid, peer=peer)
        return ActivateSessionResponse(_rh(handle), secrets.token_bytes(32), [], [])

    def _close_session(self, req: CloseSessionRequest, session: Session, peer):
        with self.state.lock:
            self.state.sessions.pop(session.auth_token, None)
        self.log.record("close_session", str(session.session_id), peer=peer)
        return CloseSessionResponse(_rh(req.request_header.request_handle))

    def _browse(self, req: BrowseRequest, session: Session, peer):
        handle = req.request_header.request_handle
        todo = req.nodes_to_browse or []
        if not todo:
            return ServiceFault(_rh(handle, status.BadNothingToDo))
        if len(todo) > MAX_OPERATIONS:
            return ServiceFault(_rh(handle, status.BadTooManyOperations))
        if not req.view.view_id.is_null():
            return ServiceFault(_rh(handle, status.BadViewIdUnknown))
        results = []
        for bd in todo:
            results.append(self._browse_one(bd))
            self.log.record("browse", str(session.session_id), str(bd.node_id), None, results[-1].status_code, peer)
        return BrowseResponse(_rh(handle), results, [])

    def _browse_one(self, bd) -> BrowseResult:
        if bd.browse_direction not in (0, 1, 2):
            return BrowseResult(status.BadBrowseDirectionInvalid, None, [])
        ref_type = bd.reference_type_id
        if not ref_type.is_null() and ref_type.namespace == 0 and ref_type not in _KNOWN_REF_TYPES:
            return BrowseResult(status.BadReferenceTypeIdInvalid, None, [])
        refs = self.space.browse(bd.node_id, BrowseDirection(bd.browse_direction), ref_type, bd.include_subtypes, bd.node_class_mask)
        if refs is None:
            return BrowseResult(status.BadNodeIdUnknown, None, [])
        mask = bd.result_mask
        out = []
        for ref in refs:
            target = self.space.get(ref.target)
            tdef = target.type_definition if target is not None and target.type_definition is not None else None
            out.append(
                ReferenceDescription(
                    reference_type_id=ref.ref_type if mask & 0x01 else NodeId(),
                    is_forward=ref.forward if mask & 0x02 else False,
                    node_id=ExpandedNodeId(ref.target),
                    browse_name=target.browse_name if target is not None and mask & 0x08 else QualifiedName(),
                    display_name=target.display_name if target is not None and mask & 0x10 else LocalizedText(),
                    node_class=int(target.node_class) if target is not None and mask & 0x04 else 0,
                    type_definition=ExpandedNodeId(tdef) if tdef is not None and mask & 0x20 else ExpandedNodeId(),
                )
            )
        return BrowseResult(status.Good, None, out)

    def _read(self, req: ReadRequest, session: Session, peer):
        handle = req.request_header.request_handle
        todo = req.nodes_to_read or []
        if not todo:
            return ServiceFault(_rh(handle, status.BadNothingToDo))
        if len(todo) > MAX_OPERATIONS:
            return ServiceFault(_rh(handle, status.BadTooManyOperations))
        if req.timestamps_to_return not in (0, 1, 2, 3):
            return ServiceFault(_rh(handle, status.BadTimestampsToReturnInvalid))
        ttr = TimestampsToReturn(req.timestamps_to_return)
        results = [self._read_one(rv, ttr) for rv in todo]
        if self.log_reads:
            self.log.record("read", str(session.session_id), [str(rv.node_id) for rv in todo], None, status.Good, peer)
        return ReadResponse(_rh(handle), results, [])

    def _read_one(self, rv, ttr: TimestampsToReturn) -> DataValue:
        node = self.space.get(rv.node_id)
        if node is None:
            return DataValue(status=status.BadNodeIdUnknown)
        if rv.index_range:
            return DataValue(status=status.BadIndexRangeInvalid)
        attr = rv.attribute_id
        if attr == AttributeId.Value:
            if node.data_type is None:
                return DataValue(status=status.BadAttributeIdInvalid)
            if not node.readable:
                return DataValue(status=status.BadNotReadable)
            value, src_ts, srv_ts = node.state  # one atomic snapshot
            return DataValue(
                Variant.double(value),
                None,
                src_ts if ttr in (TimestampsToReturn.Source, TimestampsToReturn.Both) else None,
                None,
                srv_ts if ttr in (TimestampsToReturn.Server, TimestampsToReturn.Both) else None,
                None,
            )
        v = _attribute(node, attr)
        if v is None:
            return DataValue(status=status.BadAttributeIdInvalid)
        return DataValue(v)

    def _write(self, req: WriteRequest, session: Session, peer):
        handle = req.request_header.request_handle
        todo = req.nodes_to_write or []
        if not todo:
            return ServiceFault(_rh(handle, status.BadNothingToDo))
        if len(todo) > MAX_OPERATIONS:
            return ServiceFault(_rh(handle, status.BadTooManyOperations))
        sid = str(session.session_id)
        results = []
        for wv in todo:
            code = self._write_one(wv)
            results.append(code)
            self.log.record("write", sid, str(wv.node_id), _variant_value(wv.value.value), code, peer)
        return WriteResponse(_rh(handle), results, [])

    def _write_one(self, wv) -> int:
        node = self.space.get(wv.node_id)
        if node is None:
            return status.BadNodeIdUnknown
        if wv.attribute_id != AttributeId.Value:
            return status.BadNotWritable if _attribute(node, wv.attribute_id) is not None else status.BadAttributeIdInvalid
        if node.data_type is None:
            return status.BadAttributeIdInvalid
        if not node.writable:
            return status.BadNotWritable
        if wv.index_range:
            return status.BadIndexRangeInvalid
        v = wv.value.value
        if v is None or v.vtype != VariantType.Double or v.is_array:
            return status.BadTypeMismatch
        self.space.set_value(node, v.value, wv.value.source_timestamp)
        return status.Good


_KNOWN_REF_TYPES = {NodeId(0, i) for i in (31, 32, 33, 34, 35, 40, 44, 45, 46, 47)}


def _variant_value(v: Variant | None):
    if v is None:
        return None
    return v.value if v.vtype != VariantType.Null else None


def _attribute(node, attr: int) -> Variant | None:
    """Non-value attributes of ``node`` as Variants; ``None`` if not applicable."""
    if attr == AttributeId.NodeId:
        return Variant(VariantType.NodeId, node.node_id)
    if attr == AttributeId.NodeClass:
        return Variant(VariantType.Int32, int(node.node_class))
    if attr == AttributeId.BrowseName:
        return Variant(VariantType.QualifiedName, node.browse_name)
    if attr == AttributeId.DisplayName:
        return Variant(VariantType.LocalizedText, node.display_name)
    if attr == AttributeId.Description:
        return Variant(VariantType.LocalizedText, LocalizedText(node.description))
    if attr in (AttributeId.WriteMask, AttributeId.UserWriteMask):
        return Variant(VariantType.UInt32, 0)
    if node.node_class == NodeClass.Object and attr == AttributeId.EventNotifier:
        return Variant(VariantType.Byte, 0)
    if node.node_class == NodeClass.ObjectType and attr == AttributeId.IsAbstract:
        return Variant(VariantType.Boolean, False)
    if node.node_class == NodeClass.Variable:
        if attr == AttributeId.DataType:
            return Variant(VariantType.NodeId, node.data_type)
        if attr == AttributeId.ValueRank:
            return Variant(VariantType.Int32, -1)
        if attr in (AttributeId.AccessLevel, AttributeId.UserAccessLevel):
            return Variant(VariantType.Byte, node.access_level)
        if attr == AttributeId.MinimumSamplingInterval:
            return Variant(VariantType.Double, 2.0)
        if attr == AttributeId.Historizing:
            return Variant(VariantType.Boolean, False)
    return None
