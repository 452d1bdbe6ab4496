"""HTTP wire protocol for delegating QUBO solves to a remote annealer.

Request body (single POST)::

    {"model": {"num_vars": N, "linear": [[i, c], ...],
               "quadratic": [[i, j, c], ...], "offset": c},
     "timeout_ms": int, "seed": int}

Response body (HTTP 200)::

    {"bits": "0101...", "energy": float, "elapsed_ms": int}

``bits`` may instead be base64 of the bits packed most-significant first.
Malformed models get a 4xx reply; 5xx replies and transport failures are
retried.  :class:`StubServer` implements the server side on top of the
local solvers.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import threading
import time
import urllib.error
import urllib.request
from collections.abc import Callable
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .qubo import QuboModel
from .solvers import SolveRequest, SolveResult, solve_exhaustive

__all__ = [
    "RemoteError",
    "RemoteUnavailable",
    "ProtocolViolation",
    "solve_remote",
    "encode_request",
    "parse_bits",
    "StubServer",
]

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 3
ENERGY_TOLERANCE = 1e-6


class RemoteError(RuntimeError):
    pass


class RemoteUnavailable(RemoteError):
    """Transport kept failing after all retries."""


class ProtocolViolation(RemoteError):
    """The server replied with something that breaks the protocol."""


def encode_request(req: SolveRequest) -> dict:
    return {
        "model": req.model.to_dict(),
        "timeout_ms": max(1, int(round(req.timeout * 1000))),
        "seed": int(req.seed),
    }


def parse_bits(raw, num_vars: int) -> np.ndarray:
    """Decode the ``bits`` field: a 0/1 string or base64 packed bits."""
    if not isinstance(raw, str):
        raise ProtocolViolation("bits must be a string")
    if len(raw) == num_vars and not set(raw) - {"0", "1"}:
        return np.frombuffer(raw.encode(), dtype=np.uint8).astype(np.int8) - ord("0")
    try:
        packed = base64.b64decode(raw, validate=True)
    except (binascii.Error, ValueError):
        raise ProtocolViolation("bits is neither a 0/1 string nor base64") from None
    if len(packed) != (num_vars + 7) // 8:
        raise ProtocolViolation(f"base64 bits have wrong length for {num_vars} variables")
    return np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:num_vars].astype(np.int8)


def _post(endpoint: str, payload: bytes, timeout: float) -> bytes:
    request = urllib.request.Request(
        endpoint, data=payload, method="POST", headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(request, timeout=timeout) as resp:
        return resp.read()


def solve_remote(req: SolveRequest, endpoint: str, backoff: float = 0.05) -> SolveResult:
    """Solve ``req.model`` on a remote server speaking the wire protocol.

    The reported energy is checked against a local evaluation of the
    returned bits.

    Raises:
        RemoteUnavailable: after ``MAX_ATTEMPTS`` transport failures or 5xx replies.
        ProtocolViolation: on 4xx replies, malformed bodies or energy mismatch.
    """
    q = req.model
    payload = json.dumps(encode_request(req)).encode()
    # allow the solver its full budget plus transport slack
    http_timeout = req.timeout + 10.0
    last_exc: Exception | None = None
    t0 = time.perf_counter()
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            body = _post(endpoint, payload, http_timeout)
            break
        except urllib.error.HTTPError as exc:
            if 400 <= exc.code < 500:
                raise ProtocolViolation(f"server rejected model: HTTP {exc.code}") from exc
            last_exc = exc
        except (urllib.error.URLError, OSError) as exc:
            last_exc = exc
        log.warning("remote solve attempt %d/%d failed: %s", attempt, MAX_ATTEMPTS, last_exc)
        if attempt < MAX_ATTEMPTS:
            time.sleep(backoff * attempt)
    else:
        raise RemoteUnavailable(f"{endpoint} unavailable after {MAX_ATTEMPTS} attempts: {last_exc}")

    try:
        reply = json.loads(body)
        bits = parse_bits(reply["bits"], q.num_vars)
        reported = float(reply["energy"])
        elapsed_ms = reply.get("elapsed_ms")
    except ProtocolViolation:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolViolation(f"malformed response: {exc}") from exc
    local = q.energy(bits)
    if abs(local - reported) > ENERGY_TOLERANCE:
        raise ProtocolViolation(f"reported energy {reported} differs from recomputed {local}")
    elapsed = elapsed_ms / 1000.0 if isinstance(elapsed_ms, (int, float)) else time.perf_counter() - t0
    return SolveResult(bits, local, 0, elapsed, "remote", {"endpoint": endpoint, "attempts": attempt})


class _Handler(BaseHTTPRequestHandler):
    server: _Server

    def log_message(self, format, *args):  # noqa: A002
        log.debug("stub: " + format, *args)

    def _reply(self, code: int, obj: dict) -> None:
        body = json.dumps(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:  # noqa: N802
        srv = self.server
        srv.requests += 1
        if srv.fail_first > 0:
            srv.fail_first -= 1
            self._reply(503, {"error": "busy"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            data = json.loads(self.rfile.read(length))
            model = QuboModel.from_dict(data["model"])
            timeout = int(data.get("timeout_ms", 10_000)) / 1000.0
            seed = int(data.get("seed", 0))
            req = SolveRequest(model, timeout=timeout, seed=seed, target="exhaustive")
        except (ValueError, KeyError, TypeError) as exc:
            self._reply(400, {"error": str(exc)})
            return
        t0 = time.perf_counter()
        result = srv.solver(req)
        energy = result.energy + srv.energy_error
        self._reply(200, {
            "bits": "".join("1" if b else "0" for b in result.bits),
            "energy": energy,
            "elapsed_ms": int((time.perf_counter() - t0) * 1000),
        })


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    solver: Callable[[SolveRequest], SolveResult]
    energy_error: float
    fail_first: int
    requests: int


class StubServer:
    """In-process server implementing the remote protocol.

    Args:
        solver: Local backend used to answer requests.
        energy_error: Added to every reported energy; nonzero values make
            the server violate the protocol on purpose.
        fail_first: Number of initial requests answered with HTTP 503.

    Use as a context manager; ``url`` is the endpoint to POST to.
    """

    def __init__(
        self,
        solver: Callable[[SolveRequest], SolveResult] = solve_exhaustive,
        energy_error: float = 0.0,
        fail_first: int = 0,
        host: str = "127.0.0.1",
        port: int = 0,
    ) -> None:
        self._httpd = _Server((host, port), _Handler)
        self._httpd.solver = solver
        self._httpd.energy_error = energy_error
        self._httpd.fail_first = fail_first
        self._httpd.requests = 0
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/solve"

    @property
    def requests(self) -> int:
        return self._httpd.requests

    def start(self) -> StubServer:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> StubServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
