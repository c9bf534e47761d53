"""Run-log serialization: canonical bytes, round trips, located rejects."""

from __future__ import annotations

import json
import random

import pytest

from fluidity import (
    IntegrityError,
    InvalidInput,
    load_scenario,
    run_episode,
    run_log_from_text,
    serialize_run_log,
)
from fluidity.runlog import FORMAT_NAME, FORMAT_VERSION, config_to_dict
from conftest import make_config, make_schedule


class TestRoundTrip:
    def test_log_survives_a_round_trip(self):
        rng = random.Random(212)
        for _ in range(10):
            config = make_config(
                agent_kind=rng.choice(["static", "proportional", "lagged", "noisy"]),
                seed=rng.randrange(100_000),
                initial_tokens=rng.randrange(0, 30),
                initial_funding=rng.uniform(0, 30),
                payout_scale=rng.uniform(0, 2),
                auto_repurchase=rng.random() < 0.5,
                schedule=make_schedule(epochs=rng.randint(1, 3)),
            )
            log = run_episode(config)
            assert run_log_from_text(serialize_run_log(log)) == log

    def test_truncated_log_survives_a_round_trip(self):
        log = run_episode(make_config(agent_kind="static", initial_tokens=3))
        assert log.truncated
        parsed = run_log_from_text(serialize_run_log(log))
        assert parsed == log
        assert parsed.truncated_reason == log.truncated_reason

    def test_serialization_is_canonical(self):
        log = run_episode(make_config(seed=9))
        text = serialize_run_log(log)
        assert text.endswith("\n")
        assert text == json.dumps(json.loads(text), sort_keys=True, separators=(",", ":")) + "\n"

    def test_scenario_round_trip(self, tmp_path):
        config = make_config(
            agent_kind="lagged",
            parameters={"lag": 2, "initial": 1.5},
            schedule=make_schedule(kind="uniform_int", low=-3, high=3),
        )
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(config_to_dict(config)), encoding="utf-8")
        assert load_scenario(path) == config


class TestRejection:
    def log_doc(self) -> dict:
        return json.loads(serialize_run_log(run_episode(make_config(seed=4))))

    def reject(self, doc, location: str):
        with pytest.raises(IntegrityError) as excinfo:
            run_log_from_text(json.dumps(doc))
        assert excinfo.value.location == location
        return excinfo.value

    def test_foreign_document_rejected(self):
        doc = self.log_doc()
        doc["format"] = "someone-elses-log"
        self.reject(doc, "run log")

    def test_unknown_version_rejected(self):
        doc = self.log_doc()
        doc["version"] = FORMAT_VERSION + 1
        self.reject(doc, "run log")

    def test_not_json_rejected(self):
        with pytest.raises(IntegrityError):
            run_log_from_text("{nope")

    def test_missing_sample_field_is_located(self):
        doc = self.log_doc()
        del doc["samples"][1]["env_delta"]
        self.reject(doc, "samples[1]")

    def test_unbalanced_ledger_is_located(self):
        doc = self.log_doc()
        doc["snapshots"][0]["ledger"]["reserve"] += 1
        self.reject(doc, "snapshots[0]")

    def test_tampered_score_is_located(self):
        doc = self.log_doc()
        doc["samples"][0]["aa_value"] += 0.25
        self.reject(doc, "samples[0]")

    def test_bad_config_is_located(self):
        doc = self.log_doc()
        doc["config"]["inference_cost_rate"] = 0.0
        self.reject(doc, "config")

    def test_unknown_order_rejected(self):
        doc = self.log_doc()
        doc["order"] = "fourth"
        self.reject(doc, "order")

    def test_format_name_is_stable(self):
        assert FORMAT_NAME == "fluidity-run-log"
        assert FORMAT_VERSION == 1

    def test_unreadable_scenario_is_invalid_input(self, tmp_path):
        with pytest.raises(InvalidInput):
            load_scenario(tmp_path / "absent.json")
