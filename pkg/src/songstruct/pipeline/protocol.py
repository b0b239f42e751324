"""Wire protocol for model backends.

Requests and responses are single JSON objects. Subprocess workers speak
newline-delimited JSON over stdin/stdout, answering one line per request
in order; HTTP backends take the same object as a POST body. Transport
failures never raise into the pipeline: they surface as ok=false
responses attributed to the failed call.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass

from ..errors import ConfigError
from ..formats import canonical_json
from .config import BackendEndpoint
from .mocks import handle_request


@dataclass(frozen=True)
class BackendRequest:
    """One stage invocation for one song.

    span (start_s, end_s) crops the audio for section-level ops; text
    carries the transcript for alignment.
    """

    op: str
    song_id: str
    audio_path: str
    span: tuple[float, float] | None = None
    text: str | None = None

    def to_dict(self) -> dict:
        obj: dict = {"op": self.op, "song_id": self.song_id, "audio_path": self.audio_path}
        if self.span is not None:
            obj["span"] = [self.span[0], self.span[1]]
        if self.text is not None:
            obj["text"] = self.text
        return obj

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


@dataclass(frozen=True)
class BackendResponse:
    """A backend's answer: payload when ok, error string when not."""

    song_id: str
    ok: bool
    payload: dict | None = None
    error: str | None = None

    @classmethod
    def failure(cls, song_id: str, error: str) -> "BackendResponse":
        return cls(song_id=song_id, ok=False, payload=None, error=error)

    @classmethod
    def from_dict(cls, obj: dict) -> "BackendResponse":
        if not isinstance(obj, dict):
            raise ValueError("response is not an object")
        song_id = obj.get("song_id")
        ok = obj.get("ok")
        if not isinstance(song_id, str) or not isinstance(ok, bool):
            raise ValueError("response missing song_id or ok")
        if ok:
            payload = obj.get("payload")
            if not isinstance(payload, dict) or "error" in obj:
                raise ValueError("ok response must carry exactly a payload")
            return cls(song_id=song_id, ok=True, payload=payload)
        error = obj.get("error")
        if not isinstance(error, str) or "payload" in obj:
            raise ValueError("error response must carry exactly an error")
        return cls(song_id=song_id, ok=False, error=error)

    def to_dict(self) -> dict:
        if self.ok:
            return {"song_id": self.song_id, "ok": True, "payload": self.payload}
        return {"song_id": self.song_id, "ok": False, "error": self.error}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


class MockTransport:
    """In-process deterministic backend; see mocks for the tables."""

    def __init__(self, endpoint: BackendEndpoint):
        self._seed = endpoint.seed
        self._fail = {song: None for song in endpoint.fail_songs}

    def request(self, req: BackendRequest) -> BackendResponse:
        obj = handle_request(req.to_dict(), self._seed, self._fail)
        return BackendResponse.from_dict(obj)

    def close(self) -> None:
        pass


class SubprocessTransport:
    """A worker subprocess speaking newline-delimited JSON.

    The worker starts lazily on first request and is shared by callers;
    a lock keeps one request in flight at a time so responses pair with
    requests by order. A dead or silent worker turns into ok=false
    responses, never exceptions.
    """

    def __init__(self, endpoint: BackendEndpoint):
        self._argv = list(endpoint.command)
        self._timeout_s = endpoint.timeout_s
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()

    def _ensure_started(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        self._proc = subprocess.Popen(
            self._argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines = queue.Queue()
        thread = threading.Thread(
            target=self._pump, args=(self._proc, self._lines), daemon=True
        )
        thread.start()

    @staticmethod
    def _pump(proc: subprocess.Popen, lines: queue.Queue) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)

    def request(self, req: BackendRequest) -> BackendResponse:
        with self._lock:
            try:
                self._ensure_started()
            except OSError as e:
                return BackendResponse.failure(req.song_id, f"cannot start worker: {e}")
            assert self._proc is not None and self._proc.stdin is not None
            try:
                self._proc.stdin.write(req.to_json() + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                return BackendResponse.failure(req.song_id, "worker terminated")
            try:
                line = self._lines.get(timeout=self._timeout_s)
            except queue.Empty:
                return BackendResponse.failure(
                    req.song_id, f"timeout after {self._timeout_s}s"
                )
            if line is None:
                return BackendResponse.failure(req.song_id, "worker terminated")
        return _decode_response(line, req)

    def close(self) -> None:
        with self._lock:
            proc = self._proc
            self._proc = None
        if proc is None or proc.poll() is not None:
            return
        try:
            if proc.stdin is not None:
                proc.stdin.close()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()


class HttpTransport:
    """POSTs each request to a base URL and reads the response body."""

    def __init__(self, endpoint: BackendEndpoint):
        self._url = endpoint.url
        self._timeout_s = endpoint.timeout_s

    def request(self, req: BackendRequest) -> BackendResponse:
        data = req.to_json().encode("utf-8")
        http_req = urllib.request.Request(
            self._url, data=data, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(http_req, timeout=self._timeout_s) as resp:
                body = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError, TimeoutError) as e:
            reason = getattr(e, "reason", None) or e
            return BackendResponse.failure(req.song_id, f"http request failed: {reason}")
        return _decode_response(body, req)

    def close(self) -> None:
        pass


def _decode_response(raw: str, req: BackendRequest) -> BackendResponse:
    try:
        obj = json.loads(raw)
        resp = BackendResponse.from_dict(obj)
    except (ValueError, TypeError) as e:
        return BackendResponse.failure(req.song_id, f"malformed response: {e}")
    if resp.song_id != req.song_id:
        return BackendResponse.failure(
            req.song_id,
            f"response song_id mismatch: sent {req.song_id!r}, got {resp.song_id!r}",
        )
    return resp


def open_transport(endpoint: BackendEndpoint):
    """Build the transport for an endpoint; callers own close()."""
    if endpoint.kind == "mock":
        return MockTransport(endpoint)
    if endpoint.kind == "command":
        return SubprocessTransport(endpoint)
    if endpoint.kind == "http":
        return HttpTransport(endpoint)
    raise ConfigError(f"unknown backend kind {endpoint.kind!r}")


def backend_call(endpoint, request: BackendRequest, timeout_s: float | None = None):
    """One-shot call against an endpoint or an open transport.

    Accepts either a BackendEndpoint (a transport is opened and closed
    around the call; timeout_s overrides the endpoint's) or an existing
    transport object (timeout_s is ignored, the transport's own applies).
    """
    if hasattr(endpoint, "request"):
        return endpoint.request(request)
    if timeout_s is not None:
        endpoint = BackendEndpoint(
            kind=endpoint.kind,
            command=endpoint.command,
            url=endpoint.url,
            seed=endpoint.seed,
            fail_songs=endpoint.fail_songs,
            timeout_s=timeout_s,
        )
    transport = open_transport(endpoint)
    try:
        return transport.request(request)
    finally:
        transport.close()
