import json

import pytest
from hypothesis import given

from dereserve import (
    MarketError,
    da_bt,
    dump_market,
    dump_run,
    fixture_path,
    load_assignment,
    load_market,
    multi_run_da,
    parse_market,
)
from dereserve.io import parse_assignment

from strategies import markets


def test_fixtures_load(example1, example2, example3, example4):
    assert [a.id for a in example1.applicants] == [f"i{k}" for k in range(1, 8)]
    assert example1.institutions[0].capacities.counts == (3, 1, 0, 2)
    assert example2.institutions[0].capacities.counts == (3, 1, 1, 3)
    assert example3.preferences("i2") == ("a",)
    assert example4.preferences("i2") == ("a", "b")


def test_round_trip_fixture(example4):
    assert parse_market(dump_market(example4)) == example4
    assert dump_market(parse_market(dump_market(example4))) == dump_market(example4)


@given(markets())
def test_round_trip_random(market):
    assert parse_market(dump_market(market)) == market


def test_fractional_scores_and_flags():
    text = """market 1
tie-break applicant-id
institution s open=1 OBC=1 cutoff=1/2 merit=i2,i1
applicant i1 score=3/4 category=OBC reported=no prefs=s
applicant i2 score=3/4 prefs=s
"""
    m = parse_market(text)
    assert not m.applicant("i1").reported
    assert m.institutions[0].order == ("i2", "i1")
    assert "score=3/4" in dump_market(m)
    assert parse_market(dump_market(m)) == m


def test_custom_scheme():
    text = """market 1
scheme open=gen reserved=EWS,PWD dereservable=PWD
institution s gen=1 EWS=1 PWD=1
applicant i1 score=5 category=PWD prefs=s
"""
    m = parse_market(text)
    assert m.scheme.categories == ("gen", "EWS", "PWD")
    assert da_bt(m).outcome["i1"] == ("s", "gen")


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("", None, "empty"),
        ("institution s open=1\n", 1, "market <version>"),
        ("market 2\n", 1, "version"),
        ("market 1\ninstitution s open=x\n", 2, "field open"),
        ("market 1\ninstitution s open=1 bogus=1\n", 2, "'bogus'"),
        ("market 1\napplicant i1 category=GC\n", 2, "field score"),
        ("market 1\napplicant i1 score=abc\n", 2, "field score"),
        ("market 1\napplicant i1 score=1 category=XYZ\n", 2, "field category"),
        ("market 1\napplicant i1 score=1 category=SC reported=maybe\n", 2, "field reported"),
        ("market 1\napplicant i1 score=1 prefs=z\n", 2, "unknown institution 'z'"),
        ("market 1\napplicant i1 score=1\napplicant i1 score=2\n", 3, "duplicate applicant"),
        ("market 1\ninstitution s open=1\ninstitution s open=1\n", 3, "duplicate institution"),
        ("market 1\nfrobnicate\n", 2, "unknown record"),
        ("market 1\napplicant i1 score=1\nscheme reserved=SC\n", 3, "scheme must come before"),
    ],
)
def test_parse_errors_carry_line_and_field(text, line, fragment):
    with pytest.raises(MarketError) as err:
        parse_market(text)
    assert fragment in str(err.value)
    if line is not None:
        assert f"line {line}" in str(err.value)


def test_tie_error_names_both_applicants():
    text = "market 1\ninstitution s open=1\napplicant i1 score=98 prefs=s\napplicant i2 score=98 prefs=s\n"
    with pytest.raises(MarketError) as err:
        parse_market(text)
    message = str(err.value)
    assert "i1" in message and "i2" in message and "line 2" in message


def test_load_market_missing_file(tmp_path):
    with pytest.raises(MarketError, match="cannot read"):
        load_market(tmp_path / "nope.market")


def test_assignment_round_trip(tmp_path, example4):
    run = multi_run_da(example4)
    path = tmp_path / "out.json"
    path.write_text(dump_run(run, example4))
    assignment, record = load_assignment(path, example4)
    assert assignment == run.outcome
    assert record["mechanism"] == "multi-run-da"
    assert record["outer_iterations"] == 1


def test_assignment_rejects_infeasible(example4):
    record = {"format": "dereserve-assignment", "version": 1, "assignment": {"i1": ["a", "OBC"]}}
    with pytest.raises(MarketError, match="infeasible"):
        parse_assignment(json.dumps(record), example4)
    with pytest.raises(MarketError):
        parse_assignment("{", example4)
    with pytest.raises(MarketError):
        parse_assignment(json.dumps({"format": "other"}), example4)
    with pytest.raises(MarketError):
        parse_assignment(json.dumps({"format": "dereserve-assignment", "assignment": {"ghost": None}}), example4)


def test_fixture_path_resolves():
    assert fixture_path("example1").endswith("example1.market")
    assert fixture_path("golden/example1.da-bt.json").endswith(".json")
