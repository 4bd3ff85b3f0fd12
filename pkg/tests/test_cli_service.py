import json
import threading
import urllib.error
import urllib.request

import pytest

from codeswitch.audio import from_wav_bytes, read_wav
from codeswitch.cli import main
from codeswitch.config import RunConfig, Runtime
from codeswitch.planner import UserPrefs
from codeswitch.service import make_server

from .conftest import CASE_1, CASE_2


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_smoke(tmp_path, capsys):
    out = tmp_path / "o.wav"
    code, stdout, _ = run_cli(capsys, "synth", "--text", "Hola world", "--engine", "mock", "--out", str(out))
    assert code == 0 and out.exists()
    data = out.read_bytes()
    assert data[:4] == b"RIFF" and data[22:24] == b"\x01\x00" and data[24:28] == (16000).to_bytes(4, "little")
    assert json.loads(stdout)["duration_s"] == pytest.approx(0.8)


def test_plan_case_one(capsys):
    code, stdout, _ = run_cli(capsys, "plan", "--text", CASE_1, "--mode", "multi_voice")
    doc = json.loads(stdout)
    assert code == 0 and doc["schema_version"] == 1
    assert [e["lang"] for e in doc["entries"]] == ["en", "es"]
    assert set(doc["entries"][0]) == {"text", "lang", "locale", "voice_id", "lang_span", "pause_before_ms", "prosody"}


def test_empty_input_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "synth", "--text", "", "--out", str(tmp_path / "x.wav"))
    assert code == 1 and json.loads(err)["code"] == "EmptyInput"


def test_engine_failure_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "synth", "--text", "hi", "--engine", "http",
                           "--endpoint", "http://127.0.0.1:9/", "--out", str(tmp_path / "x.wav"))
    assert code == 2 and json.loads(err)["stage"] == "synthesize"


def test_ssml_and_segments(tmp_path, capsys):
    src = tmp_path / "in.txt"
    src.write_text(CASE_2, encoding="utf-8")
    code, stdout, _ = run_cli(capsys, "ssml", "--file", str(src), "--dialect", "azure")
    assert code == 0 and stdout.startswith("<speak version=") and "cmn-CN-Wavenet-B" in stdout
    code, stdout, _ = run_cli(capsys, "segments", "--text", CASE_2)
    assert [s["script"] for s in json.loads(stdout)["segments"]] == ["Latin", "Han"]


def test_flags_reach_prefs(capsys):
    _, stdout, _ = run_cli(capsys, "plan", "--text", CASE_1, "--pause-ms", "189", "--mode", "single_voice")
    entries = json.loads(stdout)["entries"]
    assert entries[1]["pause_before_ms"] == 189 and entries[1]["lang_span"]
    _, stdout, _ = run_cli(capsys, "plan", "--text", CASE_1, "--hint", "es")
    assert [e["lang"] for e in json.loads(stdout)["entries"]] == ["es"]


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"prefs": {"boundary_pause_ms": 703}, "dialect_name": "polly"}))
    _, stdout, _ = run_cli(capsys, "plan", "--text", CASE_1, "--config", str(cfg))
    assert json.loads(stdout)["entries"][1]["pause_before_ms"] == 703
    assert RunConfig.from_json(cfg).dialect_name == "polly"
    with pytest.raises(ValueError):
        RunConfig(engine_name="http")
    with pytest.raises(FileNotFoundError):
        RunConfig(catalog_path=str(tmp_path / "missing.json"))


def test_plan_round_trips_through_segments(capsys):
    _, stdout, _ = run_cli(capsys, "plan", "--text", CASE_1)
    entries = json.loads(stdout)["entries"]
    for e in entries:
        _, seg_out, _ = run_cli(capsys, "segments", "--text", e["text"])
        assert [s["lang"] for s in json.loads(seg_out)["segments"]] == [e["lang"]]


@pytest.fixture
def service():
    server = make_server(RunConfig(), "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}", server
    server.shutdown()
    server.server_close()


def call(url, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, resp.headers.get("Content-Type"), resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.headers.get("Content-Type"), err.read()


def test_health(service):
    base, _ = service
    status, _, body = call(base + "/health")
    assert status == 200 and json.loads(body) == {"status": "ok"}
    assert call(base + "/nope")[0] == 404


def test_plan_case_two_zh_cn(service):
    base, _ = service
    status, _, body = call(base + "/plan", {"text": CASE_2})
    doc = json.loads(body)
    assert status == 200 and [e["locale"] for e in doc["entries"]] == ["en-US", "zh-CN"]
    assert doc["segments"][1]["script"] == "Han"


@pytest.mark.parametrize("body", [{"text": ""}, {"text": "   "}, {}, {"text": "hi", "pause_ms": "x"},
                                  {"text": "hi", "dialect": "klingon"}])
def test_bad_requests(service, body):
    base, _ = service
    status, ctype, raw = call(base + "/synthesize", body)
    err = json.loads(raw)
    assert status == 400 and ctype == "application/json" and set(err) >= {"code", "message", "stage"}


def test_engine_failure_is_502(tmp_path):
    server = make_server(RunConfig(engine_name="http", http_endpoint="http://127.0.0.1:9/"), "127.0.0.1", 0)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        status, _, raw = call(f"http://127.0.0.1:{server.server_address[1]}/synthesize", {"text": "hi"})
        assert status == 502 and json.loads(raw)["retryable"] is True
    finally:
        server.shutdown()
        server.server_close()


def test_service_and_cli_bytes_identical(service, tmp_path, capsys):
    base, _ = service
    status, ctype, wav = call(base + "/synthesize", {"text": CASE_1, "pause_ms": 189})
    assert status == 200 and ctype == "audio/wav"
    out = tmp_path / "cli.wav"
    assert main(["synth", "--text", CASE_1, "--pause-ms", "189", "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_bytes() == wav
    assert from_wav_bytes(wav) == read_wav(out)


def test_concurrent_service_requests(service):
    base, server = service
    results = []

    def hit():
        results.append(call(base + "/synthesize", {"text": CASE_1})[2])

    threads = [threading.Thread(target=hit) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    # simultaneous misses may each render (last writer wins), never more than once per request
    assert len(set(results)) == 1 and 2 <= server.runtime.engine.calls <= 12
    before = server.runtime.engine.calls
    call(base + "/synthesize", {"text": CASE_1})
    assert server.runtime.engine.calls == before


def test_runtime_prefs_default():
    assert Runtime.load(RunConfig()).config.prefs == UserPrefs()
