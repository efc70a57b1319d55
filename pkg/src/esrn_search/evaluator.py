"""Fitness evaluation: wire records, the deterministic surrogate backend,
the external-process client and a persistent cache.

The wire protocol is line-delimited JSON over the evaluator process's
stdin/stdout.  The evaluator prints ``{"protocol": "esrn-eval",
"version": 1}`` as its first line, then answers one response line per
request line; ids pair responses to requests, so arrival order is free.
"""

from __future__ import annotations

import json
import logging
import math
import queue
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .genome import (BlockType, Genome, encode_text, genome_to_json,
                     validate)

log = logging.getLogger(__name__)

PROTOCOL_NAME = "esrn-eval"
PROTOCOL_VERSION = 1
FLOOR_FITNESS = _kernels.FLOOR_FITNESS

_TYPE_CODE = {BlockType.SHRINK: 0, BlockType.GROUP: 1, BlockType.CONTEXTUAL: 2}


class EvaluationError(RuntimeError):
    pass


class ProtocolError(EvaluationError):
    pass


@dataclass(frozen=True)
class EvalRequest:
    id: str
    genome: Genome
    scale: int
    budget: int
    seed: int

    def to_json_line(self) -> str:
        return json.dumps({
            "id": self.id,
            "genome": genome_to_json(self.genome),
            "scale": self.scale,
            "budget": self.budget,
            "seed": self.seed,
        }, sort_keys=True)


@dataclass(frozen=True)
class EvalResponse:
    id: str
    status: str                      # "ok" | "error"
    fitness: float = math.nan
    prefix_fitness: tuple[float, ...] = ()
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        out = {"id": self.id, "status": self.status, "fitness": self.fitness,
               "prefix_fitness": list(self.prefix_fitness)}
        if self.message:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "EvalResponse":
        return cls(
            id=str(obj["id"]),
            status=str(obj["status"]),
            fitness=float(obj.get("fitness", math.nan)),
            prefix_fitness=tuple(float(x) for x in obj.get("prefix_fitness", [])),
            message=str(obj.get("message", "")),
        )

    def check_contract(self, active_blocks: int) -> str | None:
        """Contract violation message, or None when the response is usable."""
        if not self.ok:
            return self.message or "evaluator reported error"
        if len(self.prefix_fitness) != active_blocks + 1:
            return (f"prefix length {len(self.prefix_fitness)} != "
                    f"active blocks + 1 ({active_blocks + 1})")
        if not all(math.isfinite(x) for x in self.prefix_fitness):
            return "non-finite prefix fitness"
        if not math.isfinite(self.fitness):
            return "non-finite fitness"
        if self.fitness != self.prefix_fitness[-1]:
            return "fitness != last prefix entry"
        return None


def surrogate_evaluate(genome: Genome, seed: int, request_id: str = "",
                       zero_noise: bool = False) -> EvalResponse:
    """Deterministic closed-form stand-in for trained-model fitness.

    Per-gene quality grows with conv layers, growth rate and recursion,
    favors the contextual block type, decays with chromosome depth, and
    carries a small seeded pseudo-noise term; prefix entries apply a
    diminishing-returns weight per active rank.  All constants live in
    ``_kernels`` and are shared with the compiled backend.
    """
    violations = validate(genome)
    if violations:
        return EvalResponse(request_id, "error",
                            message="invalid genome: " + "; ".join(violations))
    blocks = genome.blocks
    n = len(blocks)
    state = np.fromiter((1 if g.state else 0 for g in blocks), np.int64, n)
    tcode = np.fromiter((_TYPE_CODE[g.btype] for g in blocks), np.int64, n)
    layers = np.fromiter((g.conv_layers for g in blocks), np.int64, n)
    growth = np.fromiter((g.growth for g in blocks), np.int64, n)
    recursion = np.fromiter((g.recursion for g in blocks), np.int64, n)
    text_hash = _kernels.fnv1a64(encode_text(genome).encode("utf-8"))

    out = np.empty(genome.active_count + 1, dtype=np.float64)
    _kernels.surrogate_prefix(state, tcode, layers, growth, recursion,
                              text_hash, seed, zero_noise, out)
    prefix = tuple(float(x) for x in out)
    return EvalResponse(request_id, "ok", fitness=prefix[-1],
                        prefix_fitness=prefix)


class SurrogateEvaluator:
    """In-process deterministic backend."""

    floor_fitness = FLOOR_FITNESS

    def __init__(self, zero_noise: bool = False):
        self.zero_noise = zero_noise

    def evaluate_batch(self, requests: Sequence[EvalRequest]) -> dict[str, EvalResponse]:
        return {r.id: surrogate_evaluate(r.genome, r.seed, r.id, self.zero_noise)
                for r in requests}

    def close(self) -> None:
        pass


class ExternalEvaluator:
    """Client for an evaluator subprocess speaking the line protocol.

    Requests are pipelined: a whole batch is written up front and responses
    are collected by id.  A request that times out is retried once and then
    degraded to an error response; if the process dies it is restarted once
    before the remaining ids are failed.
    """

    floor_fitness = FLOOR_FITNESS

    def __init__(self, command: Sequence[str], timeout: float = 600.0):
        if not command:
            raise EvaluationError("empty evaluator command")
        self.command = list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._responses: queue.Queue = queue.Queue()
        self._reader: threading.Thread | None = None
        self._restarts = 0
        self._spawn()

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as exc:
            raise EvaluationError(f"cannot spawn evaluator {self.command}: {exc}") from exc
        self._responses = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop,
                                        args=(self._proc,), daemon=True)
        self._reader.start()
        self._handshake()

    def _read_loop(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        try:
            for line in proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    self._responses.put(json.loads(line))
                except json.JSONDecodeError:
                    log.error("malformed response line: %r", line)
        except (ValueError, OSError):
            pass  # stream closed mid-read during shutdown
        finally:
            self._responses.put(None)  # EOF sentinel

    def _handshake(self) -> None:
        try:
            first = self._responses.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise ProtocolError("no handshake from evaluator") from None
        if (not isinstance(first, dict)
                or first.get("protocol") != PROTOCOL_NAME
                or first.get("version") != PROTOCOL_VERSION):
            self.close()
            raise ProtocolError(f"bad handshake: {first!r}")

    def _send(self, request: EvalRequest) -> bool:
        proc = self._proc
        if proc is None or proc.poll() is not None or proc.stdin is None:
            return False
        try:
            proc.stdin.write(request.to_json_line() + "\n")
            proc.stdin.flush()
            return True
        except (BrokenPipeError, OSError):
            return False

    def _restart(self) -> bool:
        if self._restarts >= 1:
            return False
        self._restarts += 1
        log.warning("evaluator process died; restarting once")
        self.close()
        try:
            self._spawn()
        except EvaluationError:
            return False
        return True

    def evaluate_batch(self, requests: Sequence[EvalRequest]) -> dict[str, EvalResponse]:
        pending = {r.id: r for r in requests}
        retried: set[str] = set()
        results: dict[str, EvalResponse] = {}
        for r in requests:
            if not self._send(r):
                if not self._restart() or not self._send(r):
                    return self._fail_remaining(pending, results, "evaluator unavailable")
        deadline = time.monotonic() + self.timeout
        while pending:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                # one retry round for everything still pending, then degrade
                stale = [rid for rid in pending if rid not in retried]
                if stale:
                    retried.update(stale)
                    for rid in stale:
                        self._send(pending[rid])
                    deadline = time.monotonic() + self.timeout
                    continue
                return self._fail_remaining(pending, results, "evaluator timeout")
            try:
                item = self._responses.get(timeout=remaining)
            except queue.Empty:
                continue
            if item is None:  # process exited
                if self._restart():
                    for rid in pending:
                        self._send(pending[rid])
                    deadline = time.monotonic() + self.timeout
                    continue
                return self._fail_remaining(pending, results, "evaluator exited")
            try:
                response = EvalResponse.from_dict(item)
            except (KeyError, TypeError, ValueError):
                log.error("unusable response object: %r", item)
                continue
            if response.id in pending:
                del pending[response.id]
                results[response.id] = response
        return results

    @staticmethod
    def _fail_remaining(pending: dict, results: dict, reason: str) -> dict:
        log.error("%s; degrading %d request(s) to floor fitness", reason, len(pending))
        for rid in list(pending):
            results[rid] = EvalResponse(rid, "error", message=reason)
            del pending[rid]
        return results

    def close(self) -> None:
        proc = self._proc
        self._proc = None
        if proc is None:
            return
        for stream in (proc.stdin, proc.stdout):
            try:
                if stream:
                    stream.close()
            except OSError:
                pass
        proc.terminate()
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()


class CachedEvaluator:
    """Memoizes responses by (genome text, scale, budget, seed).

    Only successful responses are cached; the cache content round-trips
    through checkpoints.
    """

    def __init__(self, backend):
        self.backend = backend
        self.cache: dict[str, EvalResponse] = {}
        self.hits = 0
        self.misses = 0

    @property
    def floor_fitness(self) -> float:
        return self.backend.floor_fitness

    @staticmethod
    def cache_key(request: EvalRequest) -> str:
        return "|".join((encode_text(request.genome), str(request.scale),
                         str(request.budget), str(request.seed)))

    def evaluate_batch(self, requests: Sequence[EvalRequest]) -> dict[str, EvalResponse]:
        results: dict[str, EvalResponse] = {}
        missing: list[EvalRequest] = []
        for r in requests:
            key = self.cache_key(r)
            hit = self.cache.get(key)
            if hit is not None:
                self.hits += 1
                results[r.id] = EvalResponse(r.id, hit.status, hit.fitness,
                                             hit.prefix_fitness, hit.message)
            else:
                self.misses += 1
                missing.append(r)
        if missing:
            fresh = self.backend.evaluate_batch(missing)
            for r in missing:
                response = fresh[r.id]
                results[r.id] = response
                if response.ok:
                    self.cache[self.cache_key(r)] = response
        return results

    def cache_to_dict(self) -> dict:
        return {key: resp.to_dict() for key, resp in self.cache.items()}

    def cache_from_dict(self, obj: dict) -> None:
        self.cache = {key: EvalResponse.from_dict(val) for key, val in obj.items()}

    def close(self) -> None:
        self.backend.close()

