"""Framed wire protocol: tag-emulator service and interrogator client.

Frame layout: 1 byte message type, 2 bytes big-endian payload length,
payload.  Message flow per connection (one session per connection):

    client -> START          (empty)
    tag    -> TAG_PUBKEY     (n*n matrix bytes, n permutation bytes)
    client -> CHALLENGE      (interrogator public key, 2-byte s, 1-byte l)
    tag    -> TOKEN          (packed token bits)

Anything malformed gets an ERROR frame (1-byte reason code) and the
connection is dropped.  The tag deliberately performs no validation of the
interrogator public key beyond its shape; answering arbitrary keys is the
attack surface the rest of the package exercises.
"""

import socket
import threading
from dataclasses import dataclass, field
from random import Random

from .emul import MatPerm
from .errors import BadChallenge, NeedMoreBytes, ProtocolError
from .params import SystemParams
from .protocol import (
    Challenge,
    KeyPair,
    Token,
    assemble_secret,
    compute_shared,
    decode_pubkey,
    encode_pubkey,
    extract_token,
    full_secret_challenges,
    keygen_interrogator,
    serialize_shared,
    transcript_line,
    verify_token,
)

MSG_START = 0x01
MSG_TAG_PUBKEY = 0x02
MSG_CHALLENGE = 0x03
MSG_TOKEN = 0x04
MSG_ERROR = 0x05

MSG_NAMES = {
    MSG_START: "START",
    MSG_TAG_PUBKEY: "TAG_PUBKEY",
    MSG_CHALLENGE: "CHALLENGE",
    MSG_TOKEN: "TOKEN",
    MSG_ERROR: "ERROR",
}

ERR_BAD_FRAME = 0x01
ERR_BAD_STATE = 0x02
ERR_BAD_CHALLENGE = 0x03
ERR_BAD_PAYLOAD = 0x04


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes


def encode_frame(frame: Frame) -> bytes:
    if len(frame.payload) > 0xFFFF:
        raise ValueError("payload too long for a frame")
    return bytes((frame.msg_type,)) + len(frame.payload).to_bytes(2, "big") + frame.payload


def decode_frame(buf: bytes) -> tuple[Frame, int]:
    """Decode one frame from the head of ``buf``; returns (frame, consumed)."""
    if len(buf) < 3:
        raise NeedMoreBytes(f"need 3 header bytes, have {len(buf)}")
    msg_type = buf[0]
    if msg_type not in MSG_NAMES:
        raise ProtocolError(f"unknown message type {msg_type:#04x}")
    length = int.from_bytes(buf[1:3], "big")
    if len(buf) < 3 + length:
        raise NeedMoreBytes(f"need {3 + length} bytes, have {len(buf)}")
    return Frame(msg_type, bytes(buf[3 : 3 + length])), 3 + length


def _recv_exact(conn: socket.socket, count: int) -> bytes:
    out = bytearray()
    while len(out) < count:
        chunk = conn.recv(count - len(out))
        if not chunk:
            raise NeedMoreBytes(f"connection closed after {len(out)}/{count} bytes")
        out.extend(chunk)
    return bytes(out)


def read_frame(conn: socket.socket) -> Frame:
    header = _recv_exact(conn, 3)
    msg_type = header[0]
    if msg_type not in MSG_NAMES:
        raise ProtocolError(f"unknown message type {msg_type:#04x}")
    length = int.from_bytes(header[1:3], "big")
    return Frame(msg_type, _recv_exact(conn, length))


def send_frame(conn: socket.socket, frame: Frame) -> None:
    conn.sendall(encode_frame(frame))


class TagServer:
    """Single-session-at-a-time tag emulator.

    Real tags are single-session devices, so connections are handled one
    after another; each connection carries exactly one authentication run.
    """

    def __init__(
        self,
        params: SystemParams,
        keypair: KeyPair,
        host: str = "127.0.0.1",
        port: int = 0,
        *,
        session_timeout: float = 10.0,
    ):
        self.params = params
        self.keypair = keypair
        self.session_timeout = session_timeout
        self.sessions = 0
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._sock = socket.create_server((host, port))
        self._sock.settimeout(0.2)
        self.host, self.port = self._sock.getsockname()[:2]

    def serve_forever(self) -> None:
        try:
            while not self._stop.is_set():
                try:
                    conn, _addr = self._sock.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                with conn:
                    self._handle(conn)
        finally:
            self._sock.close()

    def start(self) -> "TagServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def shutdown(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def _handle(self, conn: socket.socket) -> None:
        conn.settimeout(self.session_timeout)
        try:
            frame = read_frame(conn)
            if frame.msg_type != MSG_START:
                self._bail(conn, ERR_BAD_STATE)
                return
            send_frame(conn, Frame(MSG_TAG_PUBKEY, encode_pubkey(self.keypair.pub)))

            frame = read_frame(conn)
            if frame.msg_type != MSG_CHALLENGE:
                self._bail(conn, ERR_BAD_STATE)
                return
            n = self.params.n
            keylen = n * n + n
            if len(frame.payload) != keylen + 3:
                self._bail(conn, ERR_BAD_PAYLOAD)
                return
            try:
                int_pub = decode_pubkey(frame.payload[:keylen], n)
            except ValueError:
                self._bail(conn, ERR_BAD_PAYLOAD)
                return
            ch = Challenge(
                int.from_bytes(frame.payload[keylen : keylen + 2], "big"),
                frame.payload[keylen + 2],
            )
            try:
                ch.check(8 * n * (n - 1))
            except BadChallenge:
                self._bail(conn, ERR_BAD_CHALLENGE)
                return
            shared = compute_shared(self.keypair, int_pub, self.params)
            token = extract_token(serialize_shared(shared.m), ch)
            send_frame(conn, Frame(MSG_TOKEN, token.data))
            self.sessions += 1
        except (NeedMoreBytes, ProtocolError, socket.timeout):
            self._bail(conn, ERR_BAD_FRAME)
        except OSError:
            pass

    @staticmethod
    def _bail(conn: socket.socket, code: int) -> None:
        try:
            send_frame(conn, Frame(MSG_ERROR, bytes((code,))))
        except OSError:
            pass


def request_public_key(host: str, port: int, n: int, *, timeout: float = 10.0) -> MatPerm:
    """Fetch the tag public key only (START, read TAG_PUBKEY, hang up)."""
    with socket.create_connection((host, port), timeout=timeout) as conn:
        send_frame(conn, Frame(MSG_START, b""))
        frame = read_frame(conn)
        if frame.msg_type != MSG_TAG_PUBKEY:
            raise ProtocolError(f"expected TAG_PUBKEY, got {MSG_NAMES.get(frame.msg_type)}")
        return decode_pubkey(frame.payload, n)


@dataclass
class SessionLog:
    """Raw frames and transcript lines from one client-side session."""

    lines: list[str] = field(default_factory=list)
    raw: list[tuple[str, bytes]] = field(default_factory=list)

    def add(self, direction: str, frame: Frame) -> None:
        self.lines.append(transcript_line(direction, MSG_NAMES[frame.msg_type], frame.payload))
        self.raw.append((direction, encode_frame(frame)))


def run_tag_query(
    host: str,
    port: int,
    n: int,
    int_pub_bytes: bytes,
    ch: Challenge,
    *,
    timeout: float = 10.0,
    log: SessionLog | None = None,
) -> tuple[MatPerm, Token]:
    """One full authentication run; returns the tag public key and token."""
    with socket.create_connection((host, port), timeout=timeout) as conn:
        def talk(frame: Frame) -> None:
            if log is not None:
                log.add(">", frame)
            send_frame(conn, frame)

        def hear() -> Frame:
            frame = read_frame(conn)
            if log is not None:
                log.add("<", frame)
            if frame.msg_type == MSG_ERROR:
                raise ProtocolError(f"tag reported error {frame.payload.hex()}")
            return frame

        talk(Frame(MSG_START, b""))
        frame = hear()
        if frame.msg_type != MSG_TAG_PUBKEY:
            raise ProtocolError(f"expected TAG_PUBKEY, got {MSG_NAMES[frame.msg_type]}")
        tag_pub = decode_pubkey(frame.payload, n)

        payload = int_pub_bytes + ch.s.to_bytes(2, "big") + bytes((ch.l,))
        talk(Frame(MSG_CHALLENGE, payload))
        frame = hear()
        if frame.msg_type != MSG_TOKEN:
            raise ProtocolError(f"expected TOKEN, got {MSG_NAMES[frame.msg_type]}")
        return tag_pub, Token(ch.l, frame.payload)


@dataclass
class InterrogationReport:
    accepted: bool
    challenge: Challenge
    token: Token
    vacuous: bool
    tag_pub: MatPerm
    transcript: list[str]


def interrogate(
    host: str,
    port: int,
    params: SystemParams,
    rng: Random,
    challenge: Challenge | None = None,
    conj_count: int = 16,
) -> InterrogationReport:
    """Run one honest authentication with a fresh ephemeral keypair."""
    n = params.n
    if challenge is None:
        total = 8 * n * (n - 1)
        s = rng.randrange(n * (n - 1))
        challenge = Challenge(s, rng.randrange(0, min(256, total - 8 * s + 1)))
    keypair = keygen_interrogator(params, rng, conj_count)
    log = SessionLog()
    tag_pub, token = run_tag_query(
        host, port, n, encode_pubkey(keypair.pub), challenge, log=log
    )
    expected = compute_shared(keypair, tag_pub, params)
    accepted = verify_token(expected, challenge, token)
    return InterrogationReport(
        accepted=accepted,
        challenge=challenge,
        token=token,
        vacuous=challenge.l == 0,
        tag_pub=tag_pub,
        transcript=log.lines,
    )


def interrogate_full_secret(
    host: str, port: int, params: SystemParams, rng: Random
) -> tuple[bytes, bytes, MatPerm]:
    """Read the whole shared secret with one ephemeral key and the minimal
    window set; returns (assembled, expected, tag_pub)."""
    n = params.n
    keypair = keygen_interrogator(params, rng)
    pub_bytes = encode_pubkey(keypair.pub)
    pairs = []
    tag_pub = None
    for ch in full_secret_challenges(n):
        tag_pub, token = run_tag_query(host, port, n, pub_bytes, ch)
        pairs.append((ch, token))
    assembled = assemble_secret(pairs, n)
    expected = serialize_shared(compute_shared(keypair, tag_pub, params).m)
    return assembled, expected, tag_pub
