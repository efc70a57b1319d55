"""The stdin/stdout evaluation loop.

First line out is the handshake; afterwards every request line gets
exactly one response line, matched by id.  Training runs one job at a
time, so responses come back in request order, but clients must not rely
on that.
"""

from __future__ import annotations

import json
import sys

from .train import TrainerConfig, train_and_score

HANDSHAKE = {"protocol": "esrn-eval", "version": 1}


def handle_request_line(line: str, config: TrainerConfig) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": "", "status": "error", "message": f"bad request line: {exc}"}
    request_id = str(request.get("id", ""))
    genome = request.get("genome")
    if not isinstance(genome, dict):
        return {"id": request_id, "status": "error",
                "message": "request carries no genome object"}
    budget = int(request.get("budget", 0))
    seed = int(request.get("seed", 0))
    response = train_and_score(genome, budget, seed, config)
    response["id"] = request_id
    return response


def serve(config: TrainerConfig, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    print(json.dumps(HANDSHAKE), file=stdout, flush=True)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = handle_request_line(line, config)
        print(json.dumps(response), file=stdout, flush=True)
