"""Request/response transport for the two-message update protocol.

One QUERY carries the client's epoch; the node answers with one PROOF or
one ERROR. Connections are reusable; a malformed frame closes the
connection. The server is untrusted by design — nothing here affects
what the light client accepts.
"""

from __future__ import annotations

import socket
import socketserver
import threading

from . import wire
from .fullnode import SignatureStore, UnknownEpochError, UpdateProof


class ProtocolError(Exception):
    """Transport-level failure (bad frame, unexpected kind, EOF)."""


class ServerErrorResponse(Exception):
    """The node answered with an ERROR frame."""

    def __init__(self, code: int, message: str):
        super().__init__(f"server error {code}: {message}")
        self.code = code
        self.message = message


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return bytes(buf)


def read_frame(sock: socket.socket) -> tuple[int, bytes] | None:
    """One frame off the socket, or None on clean EOF."""
    header = _recv_exact(sock, 4)
    if header is None:
        return None
    length = wire.decode_frame_length(header)
    body = _recv_exact(sock, length)
    if body is None:
        raise wire.CorruptError("connection closed mid-frame")
    return wire.split_frame(body)


def send_frame(sock: socket.socket, kind: int, payload: bytes) -> None:
    sock.sendall(wire.encode_frame(kind, payload))


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        server: FullNodeServer = self.server.owner  # type: ignore[attr-defined]
        sock = self.request
        while True:
            try:
                frame = read_frame(sock)
            except wire.CorruptError:
                return  # malformed framing closes the connection
            if frame is None:
                return
            kind, payload = frame
            if kind != wire.KIND_QUERY:
                return
            try:
                epoch = wire.decode_query(payload)
            except wire.CorruptError:
                return
            try:
                send_frame(sock, *server.answer(epoch))
            except (BrokenPipeError, ConnectionResetError):
                return


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class FullNodeServer:
    """Serves proofs from a signature store until shut down."""

    def __init__(self, store: SignatureStore, host: str = "127.0.0.1", port: int = 0):
        self.store = store
        self._server = _TCPServer((host, port), _Handler)
        self._server.owner = self
        self._thread: threading.Thread | None = None
        self._count_lock = threading.Lock()
        self.proofs_served = 0

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address

    def answer(self, epoch: int) -> tuple[int, bytes]:
        """Response frame for one query epoch."""
        tip = self.store.tip_epoch
        try:
            if epoch == tip and tip >= 2:
                # Client is already current: answer with the latest-period
                # proof so it takes its stale path instead of an error.
                proof = self.store.build_proof(tip - 1)
            else:
                proof = self.store.build_proof(epoch)
        except UnknownEpochError as exc:
            return wire.KIND_ERROR, wire.encode_error(wire.ERR_UNKNOWN_EPOCH, str(exc))
        except Exception as exc:  # noqa: BLE001 - reported to the peer
            return wire.KIND_ERROR, wire.encode_error(wire.ERR_INTERNAL, str(exc))
        with self._count_lock:
            self.proofs_served += 1
        return wire.KIND_PROOF, wire.encode_proof(proof)

    def start(self) -> "FullNodeServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, kwargs={"poll_interval": 0.05}
        )
        self._thread.daemon = True
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever(poll_interval=0.2)

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "FullNodeServer":
        return self.start()

    def __exit__(self, *exc):
        self.shutdown()


class LightClientTransport:
    """Blocking request/response connection to one full node."""

    def __init__(self, address: tuple[str, int], timeout: float = 30.0):
        self._sock = socket.create_connection(address, timeout=timeout)

    def request(self, epoch: int) -> UpdateProof:
        send_frame(self._sock, wire.KIND_QUERY, wire.encode_query(epoch))
        frame = read_frame(self._sock)
        if frame is None:
            raise ProtocolError("connection closed before response")
        kind, payload = frame
        if kind == wire.KIND_ERROR:
            raise ServerErrorResponse(*wire.decode_error(payload))
        if kind != wire.KIND_PROOF:
            raise ProtocolError(f"unexpected frame kind {kind}")
        return wire.decode_proof(payload)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "LightClientTransport":
        return self

    def __exit__(self, *exc):
        self.close()


def request_update(
    address: tuple[str, int], epoch: int, timeout: float = 30.0
) -> UpdateProof:
    """One-shot query against a node."""
    with LightClientTransport(address, timeout=timeout) as conn:
        return conn.request(epoch)
