import pytest

from scb_dyn.config import SCHEMAS, ConfigError, loads, parse_axis

QUBIT = """\
# minimal qubit run
kind = qubit-oscillation
charge.E_C = 10
charge.E_J = 1
charge.n_g = 0.5
time.t_end = 100
time.n_samples = 2001
"""


def test_minimal_qubit_config_fills_defaults():
    cfg = loads(QUBIT)
    assert cfg.kind == "qubit-oscillation"
    assert cfg.values["time.t_start"] == 0.0
    assert cfg.tol == 1e-10
    assert cfg.values["initial.phi0"] == (1, 0)
    assert cfg.charge.E_J == 1.0
    assert cfg.grid.n_samples == 2001


def test_cp_violation_is_a_load_error():
    text = """\
kind = decay-compare
model.N = 10
decay.n_bar1 = 3
noise.gamma = 1
noise.delta = 0
noise.beta_re = 0.1
noise.beta_im = 0
"""
    with pytest.raises(ConfigError, match=r"complete positivity violated \(margin -0.01\)"):
        loads(text)


def test_duplicate_key_names_both_lines():
    with pytest.raises(ConfigError, match="lines 2 and 4"):
        loads("kind = decay-compare\nmodel.N = 4\n\nmodel.N = 5\n")


def test_unknown_key_names_line():
    with pytest.raises(ConfigError) as info:
        loads(QUBIT + "charge.E_X = 3\n")
    assert info.value.line == 8
    assert info.value.key == "charge.E_X"


def test_parse_error_has_line_and_column():
    with pytest.raises(ConfigError) as info:
        loads("kind = decay-compare\n   no equals sign\n")
    assert (info.value.line, info.value.column) == (2, 4)


def test_bad_value_and_missing_key():
    with pytest.raises(ConfigError, match="charge.E_J"):
        loads(QUBIT.replace("charge.E_J = 1", "charge.E_J = one"))
    with pytest.raises(ConfigError, match="missing required key; key 'charge.n_g'|key 'charge.n_g'"):
        loads(QUBIT.replace("charge.n_g = 0.5\n", ""))
    with pytest.raises(ConfigError, match="kind"):
        loads("model.N = 3\n")


def test_range_violations():
    with pytest.raises(ConfigError, match="time.n_samples"):
        loads(QUBIT.replace("2001", "1"))
    with pytest.raises(ConfigError, match="tol"):
        loads(QUBIT + "tol = 0.5\n")
    with pytest.raises(ConfigError, match="decay.n_bar1"):
        loads("kind = decay-compare\nmodel.N = 4\ndecay.n_bar1 = 4\nnoise.gamma = 1\nnoise.delta = 1\n")
    with pytest.raises(ConfigError, match="charge-qubit regime"):
        loads(QUBIT.replace("charge.E_C = 10", "charge.E_C = 2") + "charge.check_regime = true\n")


def test_fill_ratio_sets_N():
    cfg = loads("kind = decay-compare\ndecay.n_bar1 = 100\ndecay.fill_ratio = 0.01\nnoise.gamma = 1\nnoise.delta = 1\n")
    assert cfg.values["model.N"] == 10_000


def test_axis_parsing():
    schema = SCHEMAS["decay-compare"]
    ax = parse_axis("decay.n_bar1=10:10000:4:log", schema)
    assert ax.values == [10, 100, 1000, 10000]
    ax = parse_axis("noise.gamma=0:1:3", schema)
    assert ax.values == [0.0, 0.5, 1.0]
    with pytest.raises(ConfigError, match="invalid axis key"):
        parse_axis("kind=0:1:2", schema)
    with pytest.raises(ConfigError, match="invalid axis key"):
        parse_axis("noise.nope=0:1:2", schema)
    with pytest.raises(ConfigError, match="non-integer"):
        parse_axis("decay.n_bar1=1:2:3", schema)
    with pytest.raises(ConfigError):
        parse_axis("noise.gamma=0:1", schema)
