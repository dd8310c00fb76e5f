import json

import pytest

from screening_incentives import (
    ConfigError,
    config_hash,
    default_config,
    from_dict,
    load_config,
    to_dict,
)


class TestLoadConfig:
    def test_defaults_when_no_file(self):
        cfg = load_config(None)
        assert cfg == default_config()

    def test_minimal_config_gets_defaults(self):
        cfg = from_dict({"engine": {"k": 17}})
        defaults = default_config()
        assert cfg.engine.k == 17
        assert cfg.engine.n_runs == defaults.engine.n_runs
        assert cfg.economic == defaults.economic
        assert cfg.policy == defaults.policy

    def test_empty_object_equals_defaults(self):
        assert from_dict({}) == default_config()

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"policy": {"th1": 0.05, "th2": 0.01}}))
        cfg = load_config(path)
        assert cfg.policy.th1 == 0.05
        assert cfg.policy.th2 == 0.01

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="config file"):
            load_config("/nonexistent/nowhere.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(path)


class TestValidation:
    def test_threshold_order_names_field(self):
        with pytest.raises(ConfigError, match="policy.th1/th2"):
            from_dict({"policy": {"th1": 0.001, "th2": 0.01}})

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            from_dict({"economics": {}})

    def test_unknown_section_key(self):
        with pytest.raises(ConfigError, match="economic: unknown key"):
            from_dict({"economic": {"gdp": 30000}})

    def test_type_errors_name_field(self):
        with pytest.raises(ConfigError, match="economic.gdp_per_capita"):
            from_dict({"economic": {"gdp_per_capita": "lots"}})
        with pytest.raises(ConfigError, match="engine.k"):
            from_dict({"engine": {"k": 2.5}})

    def test_infeasible_beta_surfaced_at_load_with_band(self):
        with pytest.raises(ConfigError, match=r"band \[18, 100\]"):
            from_dict({
                "age_marginal_table": [[18, 100, 0.4]],
                "citizen": {"misconception": [0.01, 0.01], "perceived_sd_factor": 2.0},
            })

    def test_profile_validation(self):
        with pytest.raises(ConfigError, match="profiles.bad.sex"):
            from_dict({"profiles": {"bad": {
                "age": 50, "sex": "other", "smoker": False, "alcohol": False,
                "diabetes": False, "hypertension": False, "ses_level": 3,
            }}})
        with pytest.raises(ConfigError, match="profiles.bad.age: required"):
            from_dict({"profiles": {"bad": {
                "sex": "male", "smoker": False, "alcohol": False,
                "diabetes": False, "hypertension": False, "ses_level": 3,
            }}})

    def test_profile_eq5d_defaults_from_table(self):
        cfg = from_dict({
            "eq5d_table": [[18, 59, 0.9, 0.92], [60, 100, 0.8, 0.82]],
            "profiles": {"p": {
                "age": 65, "sex": "female", "smoker": False, "alcohol": False,
                "diabetes": False, "hypertension": False, "ses_level": 3,
            }},
        })
        assert cfg.profiles["p"].eq5d_index == 0.82

    def test_budget_validation(self):
        with pytest.raises(ConfigError, match="budget"):
            from_dict({"budget": -10})
        assert from_dict({"budget": 5000}).budget == 5000.0
        assert from_dict({"budget": None}).budget is None

    def test_quantiles_validation(self):
        cfg = from_dict({"threshold_quantiles": None})
        assert cfg.threshold_quantiles is None
        with pytest.raises(ConfigError, match="threshold_quantiles"):
            from_dict({"threshold_quantiles": {"sdna": 0.02}})


class TestSerialization:
    def test_round_trip_identity(self):
        cfg = default_config()
        assert from_dict(to_dict(cfg)) == cfg

    def test_round_trip_through_json_text(self):
        cfg = from_dict({
            "policy": {"th1": 0.037, "th2": 0.0041},
            "engine": {"k": 73, "n_runs": 11, "master_seed": 5},
            "citizen": {"misconception": [0.31, 0.39]},
        })
        text = json.dumps(to_dict(cfg))
        again = from_dict(json.loads(text))
        assert again == cfg
        assert config_hash(again) == config_hash(cfg)

    def test_hash_changes_with_content(self):
        a = config_hash(default_config())
        b = config_hash(from_dict({"engine": {"k": 5}}))
        assert a != b
        assert len(a) == 64

    def test_example_file_matches_defaults(self):
        cfg = load_config("configs/example_config.json")
        assert cfg == default_config()
