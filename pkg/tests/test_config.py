import pytest
from hypothesis import given, strategies as st

from sdmm import config
from sdmm.config import ConfigError, SimConfig


def test_defaults_validate():
    cfg = SimConfig()
    assert cfg.n_epochs == cfg.W == 100
    assert cfg.model_params().zeta_hat == 35.0


@pytest.mark.parametrize(
    "bad",
    [dict(N=1), dict(eta=0.0), dict(eta=1.5), dict(W=3), dict(k=10), dict(k=0), dict(norm="L3"),
     dict(C=0), dict(drop_prob=1.0), dict(cluster_method="random"), dict(synopsis="x")],
)
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        SimConfig(**bad)


def test_parse_text_and_grid():
    text = """
    # comment
    W = 10, 100
    eta = 0.5, 1.0
    mkm_literal = false
    norm = L2   # trailing comment
    """
    values = config.parse_text(text)
    assert values["W"] == [10, 100] and values["mkm_literal"] == [False]
    grid = config.grid(values)
    assert [(c.W, c.eta) for c in grid] == [(10, 0.5), (10, 1.0), (100, 0.5), (100, 1.0)]
    assert all(c.norm == "L2" for c in grid)


def test_empty_value_gives_empty_grid():
    assert config.grid(config.parse_text("W =")) == []


def test_unknown_key_and_bad_value():
    with pytest.raises(ConfigError):
        config.parse_text("Wx = 3")
    with pytest.raises(ConfigError):
        config.parse_text("W = ten")
    with pytest.raises(ConfigError):
        config.parse_text("mkm_literal = maybe")
    with pytest.raises(ConfigError):
        config.parse_text("just words")


def test_overrides_win(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("W = 10\nseed = 4\n")
    cfg = config.single(config.load(p, ["seed=9"]))
    assert (cfg.W, cfg.seed) == (10, 9)


def test_single_rejects_axes():
    with pytest.raises(ConfigError):
        config.single({"W": [10, 100]})


def test_missing_file():
    with pytest.raises(ConfigError):
        config.load("/nonexistent/x.cfg")


@given(
    st.integers(2, 50).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))),
    st.integers(4, 2000),
    st.floats(0.01, 1.0),
    st.booleans(),
    st.floats(0.1, 100),
)
def test_echo_round_trip(nk, W, eta, literal, xi):
    N, k = nk
    cfg = SimConfig(N=N, k=k, W=W, eta=eta, mkm_literal=literal, xi=xi)
    again = config.single(config.parse_text(cfg.to_text()))
    assert again == cfg
