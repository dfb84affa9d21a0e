"""Line-delimited JSON reward service.

Each input line is ``{"id": ..., "candidate": ..., "oracle": ...}``; each
output line is the matching score record, written in request order and
flushed immediately. Bad lines produce ``{"id": ..., "error": ...}`` and the
stream carries on.
"""

from __future__ import annotations

import io
import json
import logging
import socketserver
from typing import IO

from .jsonl import dumps
from .metrics import DEFAULT_CONFIG, EmptyOracleError, MetricConfig, score_pair

log = logging.getLogger(__name__)


def handle_request(line: str, cfg: MetricConfig = DEFAULT_CONFIG) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": None, "error": f"malformed JSON: {exc.msg}"}
    if not isinstance(request, dict):
        return {"id": None, "error": "request must be a JSON object"}
    rid = request.get("id")
    candidate, oracle = request.get("candidate"), request.get("oracle")
    if not isinstance(candidate, str) or not isinstance(oracle, str):
        return {"id": rid, "error": "request needs string fields 'candidate' and 'oracle'"}
    try:
        report = score_pair(candidate, oracle, cfg)
    except EmptyOracleError as exc:
        return {"id": rid, "error": str(exc)}
    return {"id": rid, **report.to_dict()}


def serve_stream(reader: IO[str], writer: IO[str], cfg: MetricConfig = DEFAULT_CONFIG) -> int:
    """Answer requests until end of input; returns the number of lines answered."""
    answered = 0
    for line in reader:
        if not line.strip():
            continue
        try:
            response = handle_request(line, cfg)
        except Exception as exc:  # per-line isolation: never take the service down
            log.exception("request failed")
            response = {"id": None, "error": f"internal error: {exc}"}
        writer.write(dumps(response) + "\n")
        writer.flush()
        answered += 1
    return answered


def serve_tcp(host: str, port: int, cfg: MetricConfig = DEFAULT_CONFIG) -> socketserver.BaseServer:
    """Build (not start) a threaded TCP server speaking the same protocol per connection."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            reader = io.TextIOWrapper(self.rfile, encoding="utf-8")
            writer = io.TextIOWrapper(self.wfile, encoding="utf-8", write_through=True)
            serve_stream(reader, writer, cfg)

    server = socketserver.ThreadingTCPServer((host, port), Handler)
    server.daemon_threads = True
    return server
