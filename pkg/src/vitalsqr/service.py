"""HTTP prediction service for the clinician console.

POST /predict with JSON {current_hr, current_bt, age_months} returns the
percentile predictions and the in-range verdict for the loaded bundle;
GET /health reports liveness and the model's training bounds; GET /model
returns the bundle header line. The bundle is loaded once and never
mutated, so any number of concurrent readers is safe.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .models import DomainStatus, QuantileModelBundle, predict_band
from .models.persist import load_model

# Exclusive plausibility window for temperature inputs; readings at or
# beyond 44 C are treated as sensor error rather than a model query.
BT_SANITY = (25.0, 44.0)
AGE_MAX_MONTHS = 216.0


@dataclass
class ServiceState:
    bundle: QuantileModelBundle | None = None
    model_id: str = ""
    header_line: str = ""
    started_at: float = 0.0


def load_service_state(model_path: str) -> ServiceState:
    with open(model_path, "rb") as fh:
        raw = fh.read()
    bundle = load_model(model_path)
    header_line = raw.split(b"\n", 1)[0].decode("utf-8")
    return ServiceState(
        bundle=bundle,
        model_id=hashlib.sha256(raw).hexdigest()[:16],
        header_line=header_line,
        started_at=time.time(),
    )


def _invalid(reason: str, model_id: str) -> dict:
    return {
        "status": "InvalidInput",
        "reason": reason,
        "model_id": model_id,
    }


def handle_predict(request: dict, state: ServiceState) -> dict:
    """Pure request handler; the HTTP layer only moves bytes."""
    model_id = state.model_id
    if state.bundle is None:
        return _invalid("model not loaded", model_id)
    required = ("current_hr", "current_bt", "age_months")
    values = {}
    for key in required:
        if key not in request:
            return _invalid(f"missing field {key}", model_id)
        try:
            values[key] = float(request[key])
        except (TypeError, ValueError):
            return _invalid(f"field {key} is not a number", model_id)
    hr = values["current_hr"]
    bt = values["current_bt"]
    age = values["age_months"]
    if not hr == hr or not bt == bt or not age == age:  # NaN guard
        return _invalid("non-finite input", model_id)
    if hr <= 0.0:
        return _invalid("current_hr must be positive", model_id)
    if not BT_SANITY[0] < bt < BT_SANITY[1]:
        return _invalid("current_bt outside sanity window", model_id)
    if not 0.0 <= age <= AGE_MAX_MONTHS:
        return _invalid("age_months outside [0, 216]", model_id)

    band = predict_band(state.bundle, age, bt, observed_hr=hr)
    if band.domain_status is DomainStatus.OUT_OF_DOMAIN:
        return {"status": "OutOfDomain", "model_id": model_id}
    quantiles = {
        f"{level:g}": value
        for level, value in zip(band.levels, band.quantiles_bpm)
    }
    return {
        "status": "Ok",
        "quantiles": quantiles,
        "in_range": band.in_range,
        "model_id": model_id,
    }


def handle_health(state: ServiceState) -> dict:
    if state.bundle is None:
        return {"status": "loading", "model_id": state.model_id}
    return {
        "status": "ok",
        "model_id": state.model_id,
        "levels": list(state.bundle.levels),
        "bounds": {
            "age_months": list(state.bundle.age_bounds),
            "bt_celsius": list(state.bundle.bt_bounds),
        },
        "uptime_s": time.time() - state.started_at,
    }


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState = ServiceState()

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.end_headers()

    def do_GET(self) -> None:
        if self.path == "/health":
            self._send_json(handle_health(self.state))
        elif self.path == "/model":
            body = (self.state.header_line + "\n").encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self._cors()
            self.end_headers()
            self.wfile.write(body)
        else:
            self._send_json({"error": "not found"}, status=404)

    def do_POST(self) -> None:
        if self.path != "/predict":
            self._send_json({"error": "not found"}, status=404)
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            request = json.loads(raw.decode("utf-8"))
            if not isinstance(request, dict):
                raise ValueError("body must be a JSON object")
        except (ValueError, UnicodeDecodeError) as exc:
            self._send_json({"error": f"malformed request body: {exc}"}, 400)
            return
        self._send_json(handle_predict(request, self.state))


def make_server(state: ServiceState, bind: str = "127.0.0.1:8099") -> ThreadingHTTPServer:
    host, _, port_s = bind.rpartition(":")
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer((host or "127.0.0.1", int(port_s)), handler)


def serve_forever(model_path: str, bind: str) -> None:
    state = load_service_state(model_path)
    server = make_server(state, bind)
    host, port = server.server_address[:2]
    print(f"serving model {state.model_id} on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def start_background(state: ServiceState, bind: str = "127.0.0.1:0"):
    """Start a server on a background thread; returns (server, thread).
    Used by tests and by the console UI's dev loop."""
    server = make_server(state, bind)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
