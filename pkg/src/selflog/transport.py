"""Request/response plumbing shared by operators, guards and attackers.

The canonical transport is an in-memory dispatch: anything exposing
``handle(Request) -> OperatorResponse`` is an endpoint. A small loopback HTTP
server wraps the same dispatch for integration runs; it adds nothing beyond
carrying the request fields over JSON.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Protocol


class Status(str, Enum):
    OK = "ok"
    DENIED = "denied"
    REDIRECT = "redirect"
    NOT_FOUND = "not_found"


@dataclass(frozen=True)
class Request:
    route: str
    method: str = "GET"
    headers: dict[str, str] = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    connection_id: str | None = None
    session: str | None = None
    cookie: str | None = None
    otp: str | None = None
    captcha_token: str | None = None
    credentials: tuple[str, str] | None = None
    signature: str | None = None

    def with_proof(self, **kwargs) -> "Request":
        """Copy of the request carrying extra challenge proof."""
        return replace(self, **kwargs)


@dataclass(frozen=True)
class OperatorResponse:
    status: Status
    body: dict = field(default_factory=dict)
    notifications_emitted: int = 0

    def __post_init__(self) -> None:
        if self.status is not Status.OK:
            data_keys = set(self.body) - {"error", "challenge", "location"}
            if data_keys:
                raise ValueError(f"non-ok response must not carry data fields: {data_keys}")


def ok(body: dict, notifications: int = 0) -> OperatorResponse:
    return OperatorResponse(Status.OK, body, notifications)


def denied(error: str = "denied", challenge: dict | None = None) -> OperatorResponse:
    body: dict = {"error": error}
    if challenge is not None:
        body["challenge"] = challenge
    return OperatorResponse(Status.DENIED, body)


def redirect(location: str) -> OperatorResponse:
    return OperatorResponse(Status.REDIRECT, {"location": location})


def not_found(error: str = "no such route") -> OperatorResponse:
    return OperatorResponse(Status.NOT_FOUND, {"error": error})


class Endpoint(Protocol):
    def handle(self, request: Request) -> OperatorResponse: ...


# --- loopback HTTP server -------------------------------------------------

_REQUEST_KEYS = ("params", "connection_id", "session", "cookie", "otp",
                 "captcha_token", "signature")


class LoopbackServer:
    """Serve named endpoints over plain HTTP on 127.0.0.1.

    Routes map as ``/<endpoint-name>/<route...>``; request fields beyond the
    method, path and headers travel in a JSON body. Responses are JSON with
    ``status``, ``body`` and ``notifications_emitted``.
    """

    def __init__(self, endpoints: dict[str, Endpoint], port: int = 0):
        self._endpoints = endpoints
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def _dispatch(self, method: str) -> None:
                length = int(self.headers.get("content-length") or 0)
                payload = json.loads(self.rfile.read(length) or b"{}")
                name, _, route = self.path.lstrip("/").partition("/")
                endpoint = outer._endpoints.get(name)
                if endpoint is None:
                    self._reply(404, {"status": "not_found",
                                      "body": {"error": f"no endpoint {name!r}"},
                                      "notifications_emitted": 0})
                    return
                credentials = payload.get("credentials")
                request = Request(
                    route=route,
                    method=method,
                    headers={k.lower(): v for k, v in self.headers.items()},
                    params=payload.get("params", {}),
                    connection_id=payload.get("connection_id"),
                    session=payload.get("session"),
                    cookie=payload.get("cookie"),
                    otp=payload.get("otp"),
                    captcha_token=payload.get("captcha_token"),
                    credentials=tuple(credentials) if credentials else None,
                    signature=payload.get("signature"),
                )
                response = endpoint.handle(request)
                self._reply(200, {"status": response.status.value,
                                  "body": response.body,
                                  "notifications_emitted": response.notifications_emitted})

            def _reply(self, code: int, payload: dict) -> None:
                raw = json.dumps(payload).encode("utf-8")
                self.send_response(code)
                self.send_header("content-type", "application/json")
                self.send_header("content-length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)

            def do_GET(self) -> None:
                self._dispatch("GET")

            def do_POST(self) -> None:
                self._dispatch("POST")

            def log_message(self, *args) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "LoopbackServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()
