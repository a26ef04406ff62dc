"""Small synchronous OPC UA client, enough to exercise the server."""
from __future__ import annotations

import socket
import threading
import time
from dataclasses import dataclass

from . import status
from .addrspace import HIERARCHICAL, AttributeId
from .codec import DataValue, NodeId, Variant, now_ticks
from .messages import (
    DEFAULT_BUFFER,
    HEADER_SIZE,
    SECURITY_POLICY_NONE,
    ActivateSessionRequest,
    AnonymousIdentityToken,
    AsymmetricSecurityHeader,
    BrowseDescription,
    BrowseDirection,
    BrowseRequest,
    CloseSecureChannelRequest,
    CloseSessionRequest,
    CreateSessionRequest,
    ErrorMessage,
    GetEndpointsRequest,
    Hello,
    MessageSecurityMode,
    OpenSecureChannelRequest,
    ReadRequest,
    ReadValueId,
    RequestHeader,
    SecureMessage,
    SecurityTokenRequestType,
    ServiceFault,
    TimestampsToReturn,
    WriteRequest,
    WriteValue,
    decode_message,
    encode_message,
    parse_header,
    to_extension,
)


class ClientError(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(f"{status.name(code)} {message}".strip())
        self.code = code


@dataclass
class Negotiated:
    receive_buffer_size: int
    send_buffer_size: int
    max_message_size: int


class Client:
    """Blocking client; one outstanding request at a time."""

    def __init__(self, host: str = "127.0.0.1", port: int = 4840, timeout: float = 5.0):
        self.endpoint_url = f"opc.tcp://{host}:{port}"
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.channel_id = 0
        self.token_id = 0
        self.auth_token = NodeId()
        self.session_id = None
        self._seq = 0
        self._req = 0
        self._handle = 0
        self._lock = threading.Lock()

    # -- raw io

    def send_raw(self, data: bytes) -> None:
        self.sock.sendall(data)

    def _recv_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("connection closed by server")
            buf += chunk
        return bytes(buf)

    def receive(self):
        head = self._recv_exact(HEADER_SIZE)
        _, size = parse_header(head, 1 << 24)
        return decode_message(head + self._recv_exact(size - HEADER_SIZE), 1 << 24)

    def is_closed(self, wait: float = 1.0) -> bool:
        """True if the server closed the connection within ``wait`` seconds."""
        self.sock.settimeout(wait)
        try:
            return self.sock.recv(1) == b""
        except socket.timeout:
            return False
        except OSError:
            return True

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.disconnect()

    # -- handshake and channel

    def hello(self, buffer_size: int = DEFAULT_BUFFER, endpoint_url: str | None = None) -> Negotiated:
        url = endpoint_url if endpoint_url is not None else self.endpoint_url
        self.send_raw(encode_message(Hello(0, buffer_size, buffer_size, 0, 0, url)))
        ack = self.receive()
        if isinstance(ack, ErrorMessage):
            raise ClientError(ack.error, ack.reason or "")
        return Negotiated(ack.receive_buffer_size, ack.send_buffer_size, ack.max_message_size)

    def _header(self) -> RequestHeader:
        self._handle += 1
        return RequestHeader(self.auth_token, now_ticks(), self._handle, 0, None, 10000)

    def _secure(self, msg_type: bytes, security, body):
        with self._lock:
            self._seq += 1
            self._req += 1
            msg = SecureMessage(msg_type, self.channel_id, security, self._seq, self._req, body)
            self.send_raw(encode_message(msg))
            if msg_type == b"CLO":
                return None
            resp = self.receive()
        if isinstance(resp, ErrorMessage):
            raise ClientError(resp.error, resp.reason or "")
        if resp.request_id != msg.request_id:
            raise ClientError(status.BadUnexpectedError, "response to a different request")
        return resp

    def open_channel(self, policy: str = SECURITY_POLICY_NONE, renew: bool = False, lifetime: int = 3_600_000):
        req = OpenSecureChannelRequest(
            self._header(),
            0,
            SecurityTokenRequestType.Renew if renew else SecurityTokenRequestType.Issue,
            MessageSecurityMode.None_,
            b"",
            lifetime,
        )
        resp = self._secure(b"OPN", AsymmetricSecurityHeader(policy, None, None), req).body
        if isinstance(resp, ServiceFault):
            raise ClientError(resp.response_header.service_result)
        self.channel_id = resp.security_token.channel_id
        self.token_id = resp.security_token.token_id
        return resp.security_token

    def request(self, body):
        """Send a service request on the channel; raise on a ServiceFault."""
        resp = self._secure(b"MSG", self.token_id, body).body
        if isinstance(resp, ServiceFault):
            raise ClientError(resp.response_header.service_result)
        return resp

    def close_channel(self) -> None:
        self._secure(b"CLO", self.token_id, CloseSecureChannelRequest(self._header()))

    # -- session

    def get_endpoints(self):
        return self.request(GetEndpointsRequest(self._header(), self.endpoint_url)).endpoints

    def create_session(self, name: str = "client"):
        resp = self.request(CreateSessionRequest(self._header(), endpoint_url=self.endpoint_url, session_name=name, requested_session_timeout=60000.0))
        self.session_id = resp.session_id
        self.auth_token = resp.authentication_token
        return resp

    def activate_session(self, identity=None):
        token = identity if identity is not None else AnonymousIdentityToken("anonymous")
        return self.request(ActivateSessionRequest(self._header(), user_identity_token=to_extension(token)))

    def close_session(self):
        resp = self.request(CloseSessionRequest(self._header(), True))
        self.auth_token = NodeId()
        return resp

    def connect(self, name: str = "client") -> "Client":
        self.hello()
        self.open_channel()
        self.create_session(name)
        self.activate_session()
        return self

    def disconnect(self) -> None:
        try:
            if not self.auth_token.is_null():
                self.close_session()
            if self.channel_id:
                self.close_channel()
        except (OSError, ClientError, ConnectionError):
            pass
        finally:
            self.close()

    # -- services

    def browse(self, node: NodeId, direction=BrowseDirection.Forward, ref_type: NodeId = HIERARCHICAL):
        """Browse one node; returns its BrowseResult."""
        desc = BrowseDescription(node, direction, ref_type, True, 0, 0x3F)
        return self.request(BrowseRequest(self._header(), nodes_to_browse=[desc])).results[0]

    def browse_names(self, node: NodeId) -> list[str]:
        result = self.browse(node)
        if result.status_code != status.Good:
            raise ClientError(result.status_code)
        return [r.browse_name.name for r in result.references]

    def read(self, nodes, attribute: int = AttributeId.Value, timestamps=TimestampsToReturn.Both) -> list[DataValue]:
        todo = [ReadValueId(n, attribute) for n in nodes]
        return self.request(ReadRequest(self._header(), 0.0, timestamps, todo)).results

    def read_value(self, node: NodeId):
        dv = self.read([node])[0]
        if dv.status not in (None, status.Good):
            raise ClientError(dv.status)
        return dv.value.value

    def write(self, node: NodeId, value, attribute: int = AttributeId.Value) -> int:
        variant = value if isinstance(value, Variant) else Variant.double(value)
        wv = WriteValue(node, attribute, None, DataValue(variant))
        return self.request(WriteRequest(self._header(), [wv])).results[0]


def poll(client: Client, node: NodeId, rate_hz: float, duration: float, clock=time.monotonic, sleep=time.sleep):
    """Read ``node`` at ``rate_hz`` for ``duration`` seconds; returns DataValues."""
    out = []
    t0 = clock()
    k = 0
    while True:
        deadline = t0 + k / rate_hz
        if deadline - t0 >= duration:
            break
        delay = deadline - clock()
        if delay > 0:
            sleep(delay)
        out.append(client.read([node])[0])
        k += 1
    return out
