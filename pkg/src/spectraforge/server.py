"""HTTP inference service over a loaded decoder checkpoint.

Endpoints:
  GET  /health       -> 200 {"status": "ok"}
  GET  /meta         -> layout, per-dimension min/max, counts, faces, model id
  POST /reconstruct  -> {"vertices": [[x, y, z], ...]} for {"values": [...]}

Floats are formatted with Python's shortest round-trip repr so identical
requests produce byte-identical bodies. The model is loaded once and never
mutated while serving.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .decoder import DecoderModel, forward, load_checkpoint_file


class ServiceError(RuntimeError):
    pass


def _fmt(value: float) -> str:
    # repr is the shortest decimal that parses back to the exact same double,
    # so responses are both byte-stable and lossless for clients
    return repr(float(value))


def _format_vertices(vertices: np.ndarray) -> str:
    rows = ",".join(
        "[" + ",".join(_fmt(c) for c in row) + "]" for row in vertices
    )
    return "[" + rows + "]"


@dataclass(frozen=True)
class ServiceState:
    model: DecoderModel
    meta_body: bytes

    @classmethod
    def from_model(cls, model: DecoderModel) -> "ServiceState":
        if model.input_layout is None:
            raise ServiceError("checkpoint has no encoding layout; cannot serve")
        stats = model.training_meta.get("stats")
        if not stats:
            raise ServiceError("checkpoint has no training-set encoding stats")
        meta = {
            "layout": [[s.label, s.offset, s.length] for s in model.input_layout],
            "min": [float(v) for v in stats["min"]],
            "max": [float(v) for v in stats["max"]],
            "n_vertices": model.n_vertices,
            "n_faces": 0 if model.faces is None else int(model.faces.shape[0]),
            "faces": [] if model.faces is None else [[int(a), int(b), int(c)] for a, b, c in model.faces],
            "model_id": model.fingerprint(),
        }
        body = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
        return cls(model=model, meta_body=body)


def reconstruct_body(state: ServiceState, payload: bytes) -> tuple[int, bytes]:
    """Validate a /reconstruct payload and build the deterministic response."""
    try:
        doc = json.loads(payload.decode())
        values = doc["values"]
    except (ValueError, KeyError, UnicodeDecodeError):
        return 400, b'{"error":"body must be JSON with a \\"values\\" array"}'
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError):
        return 400, b'{"error":"values must be numeric"}'
    if arr.ndim != 1 or arr.size != state.model.input_len:
        msg = f'{{"error":"expected {state.model.input_len} values, got {arr.size}"}}'
        return 400, msg.encode()
    if not np.isfinite(arr).all():
        return 400, b'{"error":"values must be finite"}'
    if (arr < -1e-9).any():
        return 422, b'{"error":"encoding values must be nonnegative"}'
    clipped = np.maximum(arr, 0.0)
    out = forward(state.model, clipped[None, :], mode="eval")[0]
    body = '{"vertices":' + _format_vertices(out) + "}"
    return 200, body.encode()


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # set by make_server

    def _send(self, code: int, body: bytes, content_type="application/json"):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/health":
            self._send(200, b'{"status":"ok"}')
        elif self.path == "/meta":
            self._send(200, self.state.meta_body)
        else:
            self._send(404, b'{"error":"not found"}')

    def do_POST(self):
        if self.path != "/reconstruct":
            self._send(404, b'{"error":"not found"}')
            return
        length = int(self.headers.get("Content-Length", "0"))
        payload = self.rfile.read(length)
        code, body = reconstruct_body(self.state, payload)
        self._send(code, body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def log_message(self, fmt, *args):  # quiet by default
        pass


def make_server(model: DecoderModel, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    state = ServiceState.from_model(model)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve_checkpoint(path: str, host: str = "127.0.0.1", port: int = 8000) -> None:
    model = load_checkpoint_file(path)
    server = make_server(model, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
