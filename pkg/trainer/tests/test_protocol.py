import json
import subprocess
import sys

from tiny_trainer.protocol import HANDSHAKE, handle_request_line
from tiny_trainer.train import TrainerConfig

from genome_fixtures import random_genome_dict, small_genome

FAST = TrainerConfig(train_tiles=32, val_tiles=4)


def make_request(genome, rid="r1", budget=0, seed=0, **extra):
    payload = {"id": rid, "genome": genome, "scale": genome.get("scale", 2),
               "budget": budget, "seed": seed}
    payload.update(extra)
    return json.dumps(payload)


def test_handshake_is_exact():
    assert HANDSHAKE == {"protocol": "esrn-eval", "version": 1}


def test_request_response_id_echo():
    response = handle_request_line(make_request(small_genome(), rid="g3-i7"),
                                   FAST)
    assert response["id"] == "g3-i7"
    assert response["status"] == "ok"


def test_prefix_length_contract():
    genome = small_genome(blocks=6)
    response = handle_request_line(make_request(genome), FAST)
    assert len(response["prefix_fitness"]) == 6 + 1
    assert response["fitness"] == response["prefix_fitness"][-1]


def test_unknown_request_keys_ignored():
    response = handle_request_line(
        make_request(small_genome(), rid="u1", flavor="extra-key"), FAST)
    assert response["status"] == "ok"
    assert response["id"] == "u1"


def test_zero_active_genome_errors():
    genome = {"scale": 2, "blocks": [
        {"state": False, "type": "S", "layers": 4, "growth": 16, "out": 16,
         "rec": 1}] * 20}
    response = handle_request_line(make_request(genome, rid="z"), FAST)
    assert response["status"] == "error"
    assert response["id"] == "z"


def test_malformed_request_line_gets_error_response():
    response = handle_request_line("{broken json", FAST)
    assert response["status"] == "error"
    assert response["id"] == ""


def test_missing_genome_errors():
    response = handle_request_line(json.dumps({"id": "m1"}), FAST)
    assert response["status"] == "error"
    assert response["id"] == "m1"


def test_subprocess_serving_end_to_end():
    requests = "\n".join(
        make_request(random_genome_dict(seed), rid=f"q{seed}")
        for seed in range(2)) + "\n"
    result = subprocess.run(
        [sys.executable, "-m", "tiny_trainer", "--synthetic"],
        input=requests, capture_output=True, text=True, timeout=300)
    lines = [json.loads(l) for l in result.stdout.splitlines() if l.strip()]
    assert lines[0] == HANDSHAKE
    responses = {r["id"]: r for r in lines[1:]}
    assert set(responses) == {"q0", "q1"}
    for seed in range(2):
        genome = random_genome_dict(seed)
        active = sum(b["state"] for b in genome["blocks"])
        assert len(responses[f"q{seed}"]["prefix_fitness"]) == active + 1
