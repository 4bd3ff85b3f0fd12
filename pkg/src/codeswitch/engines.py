"""Synthesis-engine boundary: the request type, a mock engine and an HTTP adapter."""

from __future__ import annotations

import hashlib
import json
import re
import socket
import threading
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Mapping, Protocol

import numpy as np

from .audio import CANONICAL_RATE, FULL_SCALE, AudioClip, from_wav_bytes, ms_to_samples
from .errors import EngineFailure, InvalidAudio
from .planner import Voice
from .prosody import ZERO_PROSODY, Prosody
from .ssml import SsmlDialect, escape_text, get_dialect

MOCK_MS_PER_CHAR = 80
MOCK_AMPLITUDE = 0.5
_PCT_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?)%\s*$")
_TIME_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(ms|s)\s*$")


@dataclass(frozen=True)
class EngineRequest:
    voice: Voice
    text: str | None = None
    ssml: str | None = None
    prosody: Prosody = ZERO_PROSODY
    dialect: SsmlDialect = field(default_factory=lambda: get_dialect("generic"))

    def __post_init__(self) -> None:
        if (self.text is None) == (self.ssml is None):
            raise ValueError("exactly one of text or ssml must be given")
        if not self.payload:
            raise ValueError("request payload is empty")

    @property
    def payload(self) -> str:
        return self.ssml if self.ssml is not None else self.text  # type: ignore[return-value]


class Engine(Protocol):
    name: str

    def render(self, req: EngineRequest) -> AudioClip: ...


def voice_frequency(voice_id: str) -> float:
    """Mock base frequency: 200 + 10 * (stable hash of the id mod 40) Hz."""
    digest = hashlib.sha256(voice_id.encode("utf-8")).digest()
    return 200.0 + 10.0 * (int.from_bytes(digest[:8], "big") % 40)


def mock_samples(text: str, voice_id: str, rate_pct: float = 0, pitch_pct: float = 0) -> np.ndarray:
    # quarter-cycle phase offset: every clip starts at a crest, so silence
    # measured next to a clip boundary is not lengthened by a zero sample
    n = int(round(CANONICAL_RATE * MOCK_MS_PER_CHAR / 1000 * len(text) / (1 + rate_pct / 100)))
    freq = voice_frequency(voice_id) * (1 + pitch_pct / 100)
    t = np.arange(n) / CANONICAL_RATE
    x = MOCK_AMPLITUDE * np.sin(2 * np.pi * freq * t + np.pi / 2)
    return np.rint(x * FULL_SCALE).astype(np.int16)


def mock_render(req: EngineRequest) -> AudioClip:
    """Deterministic tone rendering of a text or SSML request at 16 kHz mono."""
    if req.text is not None:
        pcm = mock_samples(req.text, req.voice.id, req.prosody.rate_pct, req.prosody.pitch_pct)
        return AudioClip(CANONICAL_RATE, 1, pcm)
    return AudioClip(CANONICAL_RATE, 1, _render_ssml(req))


def _pct(value: str | None) -> float:
    if not value:
        return 0.0
    m = _PCT_RE.match(value)
    return float(m.group(1)) if m else 0.0


def _render_ssml(req: EngineRequest) -> np.ndarray:
    try:
        root = ET.fromstring(req.ssml)  # type: ignore[arg-type]
    except ET.ParseError as err:
        raise EngineFailure("bad_request", f"malformed SSML: {err}") from err
    parts: list[np.ndarray] = []

    def emit(text: str | None, voice_id: str, rate: float, pitch: float) -> None:
        if text:
            parts.append(mock_samples(text, voice_id, rate, pitch))

    def walk(el: ET.Element, voice_id: str, rate: float, pitch: float) -> None:
        name = el.tag.rsplit("}", 1)[-1]
        if name == "voice":
            voice_id = el.get("name", voice_id)
        elif name == "prosody":
            rate, pitch = _pct(el.get("rate")) or rate, _pct(el.get("pitch")) or pitch
        elif name == "break":
            m = _TIME_RE.match(el.get("time", "0ms"))
            if m:
                ms = float(m.group(1)) * (1000 if m.group(2) == "s" else 1)
                parts.append(np.zeros(ms_to_samples(ms), dtype=np.int16))
        emit(el.text, voice_id, rate, pitch)
        for child in el:
            walk(child, voice_id, rate, pitch)
            emit(child.tail, voice_id, rate, pitch)

    walk(root, req.voice.id, req.prosody.rate_pct, req.prosody.pitch_pct)
    if not parts:
        return np.zeros(0, dtype=np.int16)
    return np.concatenate(parts)


class MockEngine:
    """Offline engine; counts calls so tests can observe cache behavior."""

    name = "mock"

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls = 0
        self.requests: list[EngineRequest] = []

    def render(self, req: EngineRequest) -> AudioClip:
        with self._lock:
            self.calls += 1
            self.requests.append(req)
        return mock_render(req)


def _as_ssml(req: EngineRequest) -> str:
    p = req.prosody
    inner = escape_text(req.text or "")
    attrs = []
    if p.rate_pct:
        attrs.append(f'rate="{p.rate_pct:+d}%"')
    if p.pitch_pct:
        attrs.append(f'pitch="{p.pitch_pct:+d}%"')
    if attrs:
        inner = f"<prosody {' '.join(attrs)}>{inner}</prosody>"
    return f"<speak>{inner}</speak>"


class HttpEngine:
    """POSTs ``{ssml|text, voice_id, sample_rate_hint}`` as JSON and decodes a WAV reply.

    Plain-text requests with non-zero prosody are sent as a minimal SSML
    document so the prosody is not lost.
    """

    name = "http"

    def __init__(self, endpoint: str, headers: Mapping[str, str] | None = None, timeout: float = 10.0) -> None:
        self.endpoint = endpoint
        self.headers = dict(headers or {})
        self.timeout = timeout

    def request_body(self, req: EngineRequest) -> dict:
        body: dict = {"voice_id": req.voice.id, "sample_rate_hint": CANONICAL_RATE}
        if req.ssml is not None:
            body["ssml"] = req.ssml
        elif not req.prosody.is_zero and (req.prosody.rate_pct or req.prosody.pitch_pct):
            body["ssml"] = _as_ssml(req)
        else:
            body["text"] = req.text
        return body

    def render(self, req: EngineRequest) -> AudioClip:
        data = json.dumps(self.request_body(req), ensure_ascii=False).encode("utf-8")
        headers = {"Content-Type": "application/json", "Accept": "audio/wav", **self.headers}
        http_req = urllib.request.Request(self.endpoint, data=data, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(http_req, timeout=self.timeout) as resp:
                ctype = resp.headers.get("Content-Type", "")
                payload = resp.read()
        except urllib.error.HTTPError as err:
            retryable = err.code >= 500 or err.code == 429
            raise EngineFailure(f"http_{err.code}", f"engine answered HTTP {err.code}", retryable=retryable) from err
        except (urllib.error.URLError, socket.timeout, ConnectionError, OSError) as err:
            raise EngineFailure("transport", f"cannot reach {self.endpoint}: {err}", retryable=True) from err
        if ctype and "wav" not in ctype.lower():
            raise EngineFailure("bad_response", f"expected audio/wav, got {ctype!r}")
        try:
            return from_wav_bytes(payload)
        except InvalidAudio as err:
            raise EngineFailure("bad_audio", str(err)) from err
