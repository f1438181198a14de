import json
import threading
import time

import pytest

from harp.cli import main
from harp.model import HandState, Vec3
from harp.service import SessionService
from harp.transport import TcpServiceClient, ThreadedServer


def run_cli(capsys, *argv) -> dict:
    code = main(list(argv))
    assert code == 0
    return json.loads(capsys.readouterr().out)


class TestInspectCommand:
    def test_single_figure_report(self, capsys):
        report = run_cli(capsys, "inspect", "--figures", "cube",
                         "--strategy", "volume_based", "--grid", "6x6x6")
        assert report["figures"][0]["figure"] == "cube"
        assert report["figures"][0]["occupied_cells"] > 0

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["inspect", "--figures", "cone", "--strategy", "feature_based",
                     "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["figures"][0]["static_points"] == 1

    def test_custom_script(self, tmp_path, capsys):
        script = {"waypoints": [
            {"t": 0.0, "position": [0.0, 0.0, 0.05], "valid": True},
            {"t": 0.5, "position": [0.0, 0.0, 0.35], "valid": True},
        ]}
        path = tmp_path / "script.json"
        path.write_text(json.dumps(script))
        report = run_cli(capsys, "inspect", "--figures", "cube",
                         "--script", str(path), "--grid", "4x4x4")
        assert report["figures"][0]["ticks"] == 51


class TestSimonCommand:
    def test_headless_round(self, capsys):
        report = run_cli(capsys, "simon", "--duration", "15", "--seed", "3")
        assert report["fails"] == 0
        assert report["correct_sequences"] > 0

    def test_always_red(self, capsys):
        report = run_cli(capsys, "simon", "--duration", "15", "--seed", "0",
                         "--policy", "always-red", "--start-length", "3")
        assert report["correct_sequences"] == 0
        assert report["fails"] >= 1


class TestResizeCommand:
    def test_default_report(self, capsys):
        report = run_cli(capsys, "resize")
        assert report["columns"][-2:] == ["avg", "std"]
        assert report["rows"][0]["avg"] == pytest.approx(0.0, abs=1e-12)

    def test_biased(self, capsys):
        report = run_cli(capsys, "resize", "--bias-cm", "2")
        assert report["rows"][1]["avg"] == pytest.approx(2.0)


class TestAlignCommand:
    def test_anchors(self, capsys):
        report = run_cli(capsys, "align", "--anchors", "0,0,0,1,0,0,0,1,0")
        assert report["origin"] == [0.0, 0.0, 0.0]
        assert report["rotation"][3] == pytest.approx(1.0)

    def test_marker_pose_inline(self, capsys):
        pose = {"pose": {"origin": [0, 0, 0], "rotation": [0, 0, 0, 1]},
                "device_offset": {"origin": [0.1, 0, 0], "rotation": [0, 0, 0, 1]}}
        report = run_cli(capsys, "align", "--marker-pose", json.dumps(pose))
        assert report["origin"] == [0.1, 0.0, 0.0]

    def test_missing_arguments(self, capsys):
        assert main(["align"]) == 2


class TestSimonLive:
    def test_live_round_against_served_session(self, capsys):
        with ThreadedServer(SessionService(), heartbeat=False) as srv:
            result = {}

            def host():
                result["code"] = main([
                    "simon", "--connect", f"{srv.host}:{srv.tcp_port}",
                    "--session", "live-demo", "--duration", "6", "--seed", "1"])

            setup = TcpServiceClient(srv.host, srv.tcp_port, "setup")
            setup.create_session("live-demo")
            setup.close()

            thread = threading.Thread(target=host)
            thread.start()
            time.sleep(0.5)  # engine creates buttons

            player = TcpServiceClient(srv.host, srv.tcp_port, "human", kind="haptic")
            try:
                player.join("live-demo")
                # walk the hand down onto whatever the first color is
                status = player.state.status
                hud_seq = status.nodes[status.root].metadata.get("simon_sequence", "")
                deadline = time.time() + 3.0
                while not hud_seq and time.time() < deadline:
                    time.sleep(0.05)
                    status = player.state.status
                    hud_seq = status.nodes[status.root].metadata.get("simon_sequence", "")
                color = hud_seq.split(",")[0]
                node = status.nodes[f"btn-{color}"]
                x, y = node.transform.position.x, node.transform.position.y
                t0 = time.time()
                for z in (0.25, 0.17, 0.135, 0.135, 0.25):
                    player.publish_hand(HandState(palm_position=Vec3(x, y, z),
                                                  timestamp=time.time() - t0))
                    time.sleep(0.15)
                deadline = time.time() + 4.0
                scored = False
                while time.time() < deadline and not scored:
                    status = player.state.status
                    scored = status.nodes[status.root].metadata.get("simon_correct") == "1"
                    time.sleep(0.05)
                assert scored, "press over the wire never scored"
            finally:
                player.close()
                thread.join(timeout=15.0)
        assert result["code"] == 0