"""Edge-to-cloud frame shipping over TCP.

Each frame travels as a 32-bit little-endian length prefix followed by the
frame bytes. The server validates and replies per frame with one status
byte; an accepted frame's status is followed by a 4-byte little-endian echo
of its object count. Rejected frames never reach the sink.
"""

from __future__ import annotations

import enum
import logging
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

from symscene.codec import PrivacyTier, SceneEncoding
from symscene.errors import FrameError, InvalidInputError, TransportError
from symscene.wire import decode_frame, encode_frame

log = logging.getLogger(__name__)

# magic + version + tier + flags + empty scene_id length + count + dim
MIN_FRAME_BYTES = 4 + 1 + 1 + 2 + 4 + 4 + 4


class FrameStatus(enum.IntEnum):
    ACCEPTED = 0
    TIER_REJECTED = 1
    MALFORMED = 2
    TOO_LARGE = 3


@dataclass(frozen=True)
class ServerPolicy:
    """What the receiving side is willing to accept."""

    minimum_tier: PrivacyTier = PrivacyTier.PRIVATE
    max_objects: int = 100
    max_frame_bytes: int = 16 * 1024 * 1024

    def __post_init__(self):
        if self.max_objects < 1:
            raise InvalidInputError("max_objects must be positive")
        if self.max_frame_bytes < MIN_FRAME_BYTES:
            raise InvalidInputError(
                f"max_frame_bytes must be at least {MIN_FRAME_BYTES}"
            )


class _FrameHandler(socketserver.StreamRequestHandler):
    def handle(self):
        try:
            self._frame_loop()
        except (ConnectionError, BrokenPipeError, OSError) as exc:
            log.warning("connection %s dropped: %s", self.client_address, exc)
        except Exception:
            log.exception("unexpected error on connection %s", self.client_address)

    def _reply(self, status: FrameStatus, num_objects: int | None = None):
        payload = bytes([status])
        if num_objects is not None:
            payload += struct.pack("<I", num_objects)
        self.wfile.write(payload)
        self.wfile.flush()

    def _frame_loop(self):
        policy = self.server.policy
        while True:
            prefix = self.rfile.read(4)
            if not prefix:
                return
            if len(prefix) < 4:
                self._reply(FrameStatus.MALFORMED)
                return
            (length,) = struct.unpack("<I", prefix)
            if length > policy.max_frame_bytes:
                # The body is never read, so the stream position is lost;
                # the connection cannot be reused after this reply.
                self._reply(FrameStatus.TOO_LARGE)
                return
            data = self.rfile.read(length)
            if len(data) < length:
                self._reply(FrameStatus.MALFORMED)
                return
            try:
                enc = decode_frame(data)
            except FrameError as exc:
                log.info("malformed frame from %s: %s", self.client_address, exc)
                self._reply(FrameStatus.MALFORMED)
                continue
            if enc.tier < policy.minimum_tier:
                self._reply(FrameStatus.TIER_REJECTED)
                continue
            if enc.num_objects > policy.max_objects:
                self._reply(FrameStatus.TOO_LARGE)
                continue
            self.server.deliver(data, enc)
            self._reply(FrameStatus.ACCEPTED, enc.num_objects)


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, policy, sink, record_dir):
        self.policy = policy
        self.sink = sink
        self.record_dir = Path(record_dir) if record_dir is not None else None
        self._record_lock = threading.Lock()
        self._record_seq = 0
        if self.record_dir is not None:
            self.record_dir.mkdir(parents=True, exist_ok=True)
        super().__init__(address, _FrameHandler)

    def deliver(self, frame_bytes: bytes, enc: SceneEncoding):
        if self.record_dir is not None:
            with self._record_lock:
                seq = self._record_seq
                self._record_seq += 1
            (self.record_dir / f"frame-{seq:05d}.symv").write_bytes(frame_bytes)
        if self.sink is not None:
            self.sink(enc)


class FrameServer:
    """Threaded listener enforcing a ServerPolicy.

    ``sink`` is called with each accepted SceneEncoding and must tolerate
    concurrent invocation; ``record_dir`` stores accepted frames verbatim
    as sequentially numbered .symv files.
    """

    def __init__(self, host: str, port: int, policy: ServerPolicy, sink=None, record_dir=None):
        self._server = _TCPServer((host, port), policy, sink, record_dir)
        self._thread = None

    @property
    def address(self) -> tuple[str, int]:
        addr = self._server.server_address
        return (addr[0], addr[1])

    def start(self) -> "FrameServer":
        # Short poll interval so stop() does not stall for the default 0.5s.
        self._thread = threading.Thread(
            target=self._server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True
        )
        self._thread.start()
        return self

    def serve_forever(self):
        self._server.serve_forever()

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()


def _read_exact(stream, n: int, frame_index: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) < n:
        raise TransportError(
            f"connection closed while reading {what}", frame_index=frame_index
        )
    return data


def send_bytes(address: tuple[str, int], blobs: list[bytes]) -> list[FrameStatus]:
    """Ship pre-encoded frames over one connection; statuses come back in order."""
    statuses: list[FrameStatus] = []
    try:
        conn = socket.create_connection(address)
    except OSError as exc:
        raise TransportError(f"cannot connect to {address[0]}:{address[1]}: {exc}",
                             frame_index=0) from exc
    with conn:
        stream = conn.makefile("rb")
        for i, blob in enumerate(blobs):
            try:
                conn.sendall(struct.pack("<I", len(blob)) + blob)
            except OSError as exc:
                raise TransportError(f"send failed: {exc}", frame_index=i) from exc
            status_byte = _read_exact(stream, 1, i, "status")[0]
            try:
                status = FrameStatus(status_byte)
            except ValueError:
                raise TransportError(
                    f"unknown status byte {status_byte}", frame_index=i
                ) from None
            if status == FrameStatus.ACCEPTED:
                (echo,) = struct.unpack("<I", _read_exact(stream, 4, i, "object-count echo"))
                expected = decode_frame(blob).num_objects
                if echo != expected:
                    raise TransportError(
                        f"server echoed {echo} objects, frame has {expected}",
                        frame_index=i,
                    )
            statuses.append(status)
    return statuses


def send(address: tuple[str, int], frames: list[SceneEncoding]) -> list[FrameStatus]:
    """Encode and ship scene encodings in order over a single connection."""
    return send_bytes(address, [encode_frame(f) for f in frames])
