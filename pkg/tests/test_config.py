import pytest

from docgat.config import ConfigError, PipelineConfig, load_config, parse_config_text


class TestParse:
    def test_defaults(self):
        config = parse_config_text("")
        assert config == PipelineConfig()

    def test_values_and_comments(self):
        text = """
        # training
        learning_rate = 0.01
        epochs = 20          # short run
        ngram_mode = unigram+bigram
        hidden_width = 32
        """
        config = parse_config_text(text)
        assert config.learning_rate == 0.01
        assert config.epochs == 20
        assert config.ngram_mode == "unigram+bigram"
        assert config.hidden_width == 32

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="unknown config key 'learn_rate'"):
            parse_config_text("learn_rate = 0.1")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("epochs = 5\nepochs = 6")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="epochs"):
            parse_config_text("epochs = many")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_text("epochs 5")

    def test_out_of_range_value(self):
        with pytest.raises(ConfigError, match="dropout_keep"):
            parse_config_text("dropout_keep = 1.5")

    def test_bad_choice(self):
        with pytest.raises(ConfigError, match="class_weighting"):
            parse_config_text("class_weighting = balanced")


class TestLoad:
    def test_none_gives_defaults(self):
        assert load_config(None) == PipelineConfig()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.cfg")

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("epochs = 3\nsim_threshold = 0.5\n")
        config = load_config(path)
        assert config.epochs == 3
        assert config.sim_threshold == 0.5
        assert config.to_dict()["epochs"] == 3
