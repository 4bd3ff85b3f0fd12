"""Minimal HTTP/1.1 front end.

    POST /synthesize  {text, hint?, mode?, dialect?, pause_ms?}  -> audio/wav
    POST /plan        same body                                  -> plan JSON
    GET  /health                                                 -> {"status": "ok"}

Errors come back as JSON ``{code, message, stage}`` with status 400 for bad
input and 502 for engine failures.
"""

from __future__ import annotations

import json
import logging
from dataclasses import replace
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .audio import to_wav_bytes
from .cli import plan_json, segments_json
from .config import RunConfig, Runtime
from .errors import CodeSwitchError, EngineFailure
from .pipeline import make_detector, plan_text, run
from .planner import UserPrefs
from .ssml import SsmlDialect, get_dialect

log = logging.getLogger(__name__)

MAX_BODY_BYTES = 1 << 20


class RequestError(ValueError):
    pass


def request_prefs(base: UserPrefs, body: dict[str, Any]) -> UserPrefs:
    changes: dict[str, Any] = {}
    if body.get("hint"):
        changes["latin_lang_hint"] = body["hint"]
    if body.get("mode"):
        changes["mode"] = body["mode"]
    if body.get("pause_ms") is not None:
        if not isinstance(body["pause_ms"], int) or isinstance(body["pause_ms"], bool):
            raise RequestError("pause_ms must be an integer")
        changes["boundary_pause_ms"] = body["pause_ms"]
    return replace(base, **changes) if changes else base


def request_dialect(rt: Runtime, body: dict[str, Any]) -> SsmlDialect:
    return get_dialect(body["dialect"]) if body.get("dialect") else rt.dialect


class Handler(BaseHTTPRequestHandler):
    server: CodeSwitchServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args: Any) -> None:
        log.info("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _json(self, status: int, obj: Any) -> None:
        self._send(status, json.dumps(obj, ensure_ascii=False).encode("utf-8"), "application/json")

    def _error(self, status: int, code: str, message: str, stage: str | None) -> None:
        self._json(status, {"code": code, "message": message, "stage": stage})

    def _body(self) -> dict[str, Any]:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            raise RequestError("request body too large")
        raw = self.rfile.read(length) if length else b""
        try:
            body = json.loads(raw or b"{}")
        except json.JSONDecodeError as err:
            raise RequestError(f"body is not JSON: {err}") from err
        if not isinstance(body, dict):
            raise RequestError("body must be a JSON object")
        if not isinstance(body.get("text"), str):
            raise RequestError("field 'text' (string) is required")
        return body

    def do_GET(self) -> None:
        if self.path == "/health":
            self._json(HTTPStatus.OK, {"status": "ok"})
        else:
            self._error(HTTPStatus.NOT_FOUND, "not_found", f"no route for GET {self.path}", None)

    def do_POST(self) -> None:
        rt = self.server.runtime
        try:
            body = self._body()
            prefs = request_prefs(rt.config.prefs, body)
            detector = make_detector(prefs, rt.lexicons)
            if self.path == "/plan":
                segments, plan = plan_text(body["text"], prefs, rt.catalog, detector=detector)
                doc = plan_json(plan)
                doc["segments"] = segments_json(segments)["segments"]
                self._json(HTTPStatus.OK, doc)
            elif self.path == "/synthesize":
                result = run(
                    body["text"], prefs, rt.catalog, request_dialect(rt, body), rt.engine,
                    cache=rt.cache, single_request=rt.config.single_request, detector=detector,
                )
                self._send(HTTPStatus.OK, to_wav_bytes(result.audio), "audio/wav")
            else:
                self._error(HTTPStatus.NOT_FOUND, "not_found", f"no route for POST {self.path}", None)
        except EngineFailure as err:
            self._json(HTTPStatus.BAD_GATEWAY, err.to_dict())
        except CodeSwitchError as err:
            self._json(HTTPStatus.BAD_REQUEST, err.to_dict())
        except (RequestError, ValueError) as err:
            self._error(HTTPStatus.BAD_REQUEST, "invalid_input", str(err), "request")


class CodeSwitchServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], runtime: Runtime) -> None:
        super().__init__(address, Handler)
        self.runtime = runtime


def make_server(config: RunConfig, host: str = "127.0.0.1", port: int = 8080) -> CodeSwitchServer:
    return CodeSwitchServer((host, port), Runtime.load(config))


def serve(config: RunConfig, host: str = "127.0.0.1", port: int = 8080) -> None:
    server = make_server(config, host, port)
    log.info("listening on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
