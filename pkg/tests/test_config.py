import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windtsd.config import PipelineConfig


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.interval_s == 600 and cfg.n_interior == 18 and cfg.inner_product == 0
    assert cfg.bd_energy_threshold == cfg.kle_energy_threshold == 0.9
    assert cfg.bandwidth_rule == "approx"
    assert cfg.welch.nperseg == 256 and cfg.welch.noverlap == 128 and cfg.welch.window == "hann"


def test_text_round_trip():
    cfg = PipelineConfig(interval_s=1200.0, bd_modes=3, kle_terms=None, bandwidth_rule="exact",
                         store_covariance=False, input_paths=["a.csv", "b.csv"])
    back = PipelineConfig.from_text(cfg.to_text(include_paths=True))
    assert back == cfg


def test_every_default_is_echoed():
    text = PipelineConfig().to_text()
    keys = {line.split("=")[0].strip() for line in text.splitlines()}
    assert "bd_modes" in keys and "welch_window" in keys and "synth_seed" in keys
    assert "input_paths" not in keys


def test_comments_and_blank_lines(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# run\n\ninterval_s = 900  # 15 min\nkle_terms = 3\n")
    cfg = PipelineConfig.from_file(p)
    assert cfg.interval_s == 900.0 and cfg.kle_terms == 3


@pytest.mark.parametrize("text,match", [
    ("nonsense = 1", "unknown key"),
    ("interval_s", "key = value"),
    ("interval_s = 700", "does not divide"),
    ("bd_energy_threshold = 0", r"\(0, 1\]"),
    ("kle_energy_threshold = 1.01", r"\(0, 1\]"),
    ("inner_product = 3", "0, 1 or 2"),
    ("bandwidth_rule = scott", "approx or exact"),
    ("store_covariance = maybe", "boolean"),
])
def test_invalid(text, match):
    with pytest.raises(ValueError, match=match):
        PipelineConfig.from_text(text)


@given(st.sampled_from([d for d in range(1, 86401) if 86400 % d == 0]))
@settings(max_examples=30)
def test_any_divisor_interval_is_valid(d):
    assert PipelineConfig(interval_s=float(d)).interval_s == d
