import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abcpiq.errors import ConfigError, ParseError, RangeError, UnknownKeyError
from abcpiq.io import (
    format_number,
    load_config,
    parse_cases,
    parse_config,
    render_config,
    scenario_path,
    write_csv,
)
from abcpiq.model import TABLE2, TABLE2_INIT, TABLE3

TABLE2_TEXT = """\
lambda = 0.003
gamma = 0.009
d0 = 0.009
eta = 0.004
mu = 0.004
sigma = 0.003
h = 0.007
P0 = 10
I0 = 0.01
Q0 = 0.0011
"""


def test_parse_table2():
    cfg = parse_config(TABLE2_TEXT)
    assert cfg.params == TABLE2 and cfg.init == TABLE2_INIT
    assert cfg.params.lam == 0.003
    assert (cfg.theta, cfg.b_norm, cfg.order, cfg.source_every_term) == (1.0, 1.0, 15, False)


def test_shipped_scenarios():
    assert load_config("table2.cfg").params == TABLE2
    assert load_config("table3.cfg").params == TABLE3
    assert load_config("table2_density.cfg").init.total == pytest.approx(1.0)
    assert scenario_path("table3.cfg").is_file()


def test_comments_and_blanks():
    cfg = parse_config("# header\n\n" + TABLE2_TEXT.replace("h = 0.007", "h = 0.007   # trailing"))
    assert cfg.params.h == 0.007


@pytest.mark.parametrize(
    "extra, exc",
    [
        ("theta = 1.5", RangeError),
        ("theta = 0", RangeError),
        ("steps = 0", RangeError),
        ("b_norm = -1", RangeError),
        ("colour = red", UnknownKeyError),
        ("theta 0.5", ParseError),
        ("theta = abc", ParseError),
        ("steps = 1.5", ParseError),
        ("source_every_term = maybe", ParseError),
        ("lambda = 1", ParseError),
    ],
)
def test_bad_lines(extra, exc):
    with pytest.raises(exc):
        parse_config(TABLE2_TEXT + extra + "\n")


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as info:
        parse_config(TABLE2_TEXT + "gamma = 1\n")
    assert info.value.line == 11


def test_negative_rate_and_missing_keys():
    with pytest.raises(RangeError):
        parse_config(TABLE2_TEXT.replace("mu = 0.004", "mu = -0.004"))
    with pytest.raises(ConfigError) as info:
        parse_config("")
    for key in ("lambda", "gamma", "P0", "Q0"):
        assert key in str(info.value)


def test_render_round_trip():
    cfg = parse_config(TABLE2_TEXT).replace(theta=0.1 + 0.2, t_end=1 / 3)
    back = parse_config(render_config(cfg, header="fitted\nsecond line"))
    assert back == cfg
    assert render_config(cfg, "x").startswith("# x\n")


@settings(max_examples=300, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_number_round_trips(x):
    assert float(format_number(x)) == x


def test_write_csv_bytes():
    buf = io.StringIO()
    write_csv(buf, ["t", "v"], [(0.0, 0.1), (1, 1e-20), ("a", 2.5)])
    assert buf.getvalue() == "t,v\n0.0,0.1\n1.0,1e-20\na,2.5\n"


def test_parse_cases():
    s = parse_cases("t,cases\n0,1\n2,3\n1,2\n3,4\n\n", label="x")
    assert s.times.tolist() == [0, 1, 2, 3] and s.label == "x"
    with pytest.raises(ParseError):
        parse_cases("")
    with pytest.raises(ParseError):
        parse_cases("time,cases\n0,1\n")
    with pytest.raises(ParseError):
        parse_cases("t,cases\n0,1\n1,x\n")
    with pytest.raises(ParseError):
        parse_cases("t,cases\n0,1,2\n")
