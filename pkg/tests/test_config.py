import pytest

from sentpair import config as cfg


class TestParse:
    def test_defaults(self):
        c = cfg.parse_config("")
        assert c.task == "relatedness"
        assert c.topology == "I"
        assert c.d == 100
        assert c.layers == 2
        assert c.word_dim == 300
        assert c.char_l0 == 16
        assert c.learning_rate == 0.05
        assert c.batch_size == 25
        assert c.l2 == 1e-4
        assert c.max_len == 37
        assert c.bidirectional is True

    def test_overrides_and_comments(self):
        text = """
        # run settings
        task = entailment
        topology = II
        d = 40
        learning_rate = 0.1
        bidirectional = false
        stage1_per_plane = true
        """
        c = cfg.parse_config(text)
        assert c.task == "entailment"
        assert c.topology == "II"
        assert c.d == 40
        assert c.learning_rate == 0.1
        assert c.bidirectional is False
        assert c.stage1_per_plane is True

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            cfg.parse_config("learning_rat = 0.1")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            cfg.parse_config("d = 10\nd = 20")

    def test_bad_value_type_rejected(self):
        with pytest.raises(ValueError, match="integer"):
            cfg.parse_config("d = ten")
        with pytest.raises(ValueError, match="boolean"):
            cfg.parse_config("bidirectional = maybe")

    def test_missing_equals_rejected(self):
        with pytest.raises(ValueError, match="key = value"):
            cfg.parse_config("just some text")


class TestValidate:
    def test_bad_task(self):
        with pytest.raises(ValueError, match="task"):
            cfg.parse_config("task = similarity")

    def test_bad_topology(self):
        with pytest.raises(ValueError, match="topology"):
            cfg.parse_config("topology = III")

    def test_nonpositive_dim(self):
        with pytest.raises(ValueError, match="d must be"):
            cfg.parse_config("d = 0")

    def test_l0_vs_width(self):
        with pytest.raises(ValueError, match="char_l0"):
            cfg.parse_config("char_l0 = 2\nchar_width = 3")

    def test_negative_rate(self):
        with pytest.raises(ValueError, match="learning_rate"):
            cfg.parse_config("learning_rate = -0.1")


class TestRoundTrip:
    def test_serialize_then_parse(self):
        c = cfg.parse_config("task = entailment\nd = 12\nl2 = 0.001\nbidirectional = false")
        again = cfg.parse_config(cfg.serialize_config(c))
        assert again == c

    def test_serialization_stable(self):
        c = cfg.Config()
        assert cfg.serialize_config(c) == cfg.serialize_config(cfg.Config())

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 9\n", encoding="utf-8")
        assert cfg.load_config(str(path)).seed == 9

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="cannot read"):
            cfg.load_config(str(tmp_path / "none.cfg"))
