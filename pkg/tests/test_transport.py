import socket
import struct
import threading

import numpy as np
import pytest

from symscene.codec import VECTOR_DIM, PrivacyTier, SceneEncoding
from symscene.errors import InvalidInputError, TransportError
from symscene.transport import (
    MIN_FRAME_BYTES,
    FrameServer,
    FrameStatus,
    ServerPolicy,
    send,
    send_bytes,
)
from symscene.wire import encode_frame


def enc(scene_id="s", n=1, tier=PrivacyTier.PRIVATE):
    return SceneEncoding(scene_id, tier, np.zeros((n, VECTOR_DIM), dtype=np.float32))


def private_server(**kw):
    policy = ServerPolicy(minimum_tier=PrivacyTier.PRIVATE, **kw)
    return FrameServer("127.0.0.1", 0, policy, sink=kw.pop("sink", None))


class TestPolicy:
    def test_defaults(self):
        p = ServerPolicy()
        assert p.minimum_tier == PrivacyTier.PRIVATE
        assert p.max_objects == 100

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            ServerPolicy(max_objects=0)
        with pytest.raises(InvalidInputError):
            ServerPolicy(max_frame_bytes=MIN_FRAME_BYTES - 1)


class TestServer:
    def test_accept_and_echo(self):
        got = []
        policy = ServerPolicy(minimum_tier=PrivacyTier.PRIVATE)
        with FrameServer("127.0.0.1", 0, policy, sink=got.append) as srv:
            statuses = send(srv.address, [enc(n=3)])
        assert statuses == [FrameStatus.ACCEPTED]
        assert len(got) == 1 and got[0].num_objects == 3

    def test_tier_rejected_frames_never_reach_sink(self):
        got = []
        policy = ServerPolicy(minimum_tier=PrivacyTier.PRIVATE)
        with FrameServer("127.0.0.1", 0, policy, sink=got.append) as srv:
            statuses = send(
                srv.address,
                [enc("a"), enc("b", tier=PrivacyTier.AT_RISK), enc("c")],
            )
        assert statuses == [
            FrameStatus.ACCEPTED,
            FrameStatus.TIER_REJECTED,
            FrameStatus.ACCEPTED,
        ]
        assert [e.scene_id for e in got] == ["a", "c"]

    def test_at_risk_policy_accepts_both_upper_tiers(self):
        policy = ServerPolicy(minimum_tier=PrivacyTier.AT_RISK)
        with FrameServer("127.0.0.1", 0, policy) as srv:
            statuses = send(srv.address, [enc(tier=PrivacyTier.AT_RISK), enc()])
        assert statuses == [FrameStatus.ACCEPTED, FrameStatus.ACCEPTED]

    def test_malformed_frame_keeps_connection_usable(self):
        policy = ServerPolicy()
        with FrameServer("127.0.0.1", 0, policy) as srv:
            statuses = send_bytes(srv.address, [b"garbage bytes", encode_frame(enc())])
        assert statuses == [FrameStatus.MALFORMED, FrameStatus.ACCEPTED]

    def test_object_budget_enforced(self):
        policy = ServerPolicy(max_objects=2)
        with FrameServer("127.0.0.1", 0, policy) as srv:
            statuses = send(srv.address, [enc(n=3), enc(n=2)])
        assert statuses == [FrameStatus.TOO_LARGE, FrameStatus.ACCEPTED]

    def test_oversized_frame_rejected_and_connection_closed(self):
        policy = ServerPolicy(max_frame_bytes=1000)
        big = enc(n=1)  # frame is ~8k bytes, over the 1000 limit
        with FrameServer("127.0.0.1", 0, policy) as srv:
            with pytest.raises(TransportError) as err:
                send(srv.address, [big, big])
            # first frame is answered with status 3, then the server hangs up
            assert err.value.frame_index == 1

    def test_oversized_alone_reports_status(self):
        policy = ServerPolicy(max_frame_bytes=1000)
        with FrameServer("127.0.0.1", 0, policy) as srv:
            statuses = send(srv.address, [enc(n=1)])
        assert statuses == [FrameStatus.TOO_LARGE]

    def test_server_absent(self):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            free_port = probe.getsockname()[1]
        with pytest.raises(TransportError) as err:
            send(("127.0.0.1", free_port), [enc()])
        assert err.value.frame_index == 0

    def test_record_dir_stores_frames_verbatim(self, tmp_path):
        record = tmp_path / "frames"
        policy = ServerPolicy()
        srv = FrameServer("127.0.0.1", 0, policy, record_dir=record)
        with srv:
            payloads = [encode_frame(enc(f"s{i}", n=i)) for i in range(3)]
            send_bytes(srv.address, payloads)
        files = sorted(record.iterdir())
        assert [f.name for f in files] == [f"frame-{i:05d}.symv" for i in range(3)]
        assert sorted(f.read_bytes() for f in files) == sorted(payloads)

    def test_bad_client_does_not_kill_listener(self):
        policy = ServerPolicy()
        with FrameServer("127.0.0.1", 0, policy) as srv:
            with socket.create_connection(srv.address) as raw:
                raw.sendall(struct.pack("<I", 50))  # promise 50 bytes
                raw.sendall(b"short")  # ...deliver 5, then hang up
            statuses = send(srv.address, [enc()])
        assert statuses == [FrameStatus.ACCEPTED]

    def test_concurrent_clients_all_delivered(self):
        got = []
        lock = threading.Lock()

        def sink(e):
            with lock:
                got.append(e.scene_id)

        policy = ServerPolicy()
        with FrameServer("127.0.0.1", 0, policy, sink=sink) as srv:
            errors = []

            def client(cid):
                try:
                    frames = [enc(f"c{cid}-f{j}") for j in range(8)]
                    statuses = send(srv.address, frames)
                    assert statuses == [FrameStatus.ACCEPTED] * 8
                except Exception as exc:  # pragma: no cover - surfaced below
                    errors.append(exc)

            threads = [threading.Thread(target=client, args=(i,)) for i in range(6)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        assert not errors
        assert len(got) == 48
        assert set(got) == {f"c{i}-f{j}" for i in range(6) for j in range(8)}


class TestStatuses:
    def test_wire_values(self):
        assert [int(s) for s in FrameStatus] == [0, 1, 2, 3]
