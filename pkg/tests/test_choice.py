import pytest
from hypothesis import given, settings

from dereserve import (
    Applicant,
    CapacityVector,
    DomainError,
    Institution,
    bt_termination_check,
    check_choice_axioms,
    choose_backward_transfers,
    choose_india,
    choose_open,
    choose_thakur_literal,
    restricted_merit_order,
)
from dereserve.choice import ChoiceResult
from dereserve.oracle import bt_termination_index

from conftest import ids
from strategies import single_institution


def only(market):
    (s,) = market.institutions
    return list(market.applicants), s.capacities, s


# -- oracle-backed examples ------------------------------------------------


def test_india_rule_example1(example1):
    pool, q, s = only(example1)
    r = choose_india(pool, q, s)
    assert set(r.holders("open")) == {"i1", "i2", "i3"}
    assert r.holders("SC") == ["i5"]
    assert r.holders("OBC") == ["i4"]
    assert r.holders("ST") == []
    (it,) = r.iterations
    assert it.vacant("OBC") == 1
    assert it.vacant("SC") == 0
    assert r.final_capacities == q


def test_backward_transfers_example1(example1):
    pool, q, s = only(example1)
    r = choose_backward_transfers(pool, q, s)
    assert r.final_capacities.counts == (5, 1, 0, 0)
    assert r.last_iteration == 3
    assert [it.capacities.counts for it in r.iterations] == [(3, 1, 0, 2), (4, 1, 0, 1), (5, 1, 0, 0)]
    assert ids(r) == {"i1", "i2", "i3", "i4", "i5", "i6"}
    assert r.tag("i6") == "SC"
    assert r.tag("i5") == "open"


def test_backward_transfers_example2(example2):
    pool, q, s = only(example2)
    r = choose_backward_transfers(pool, q, s)
    assert r.final_capacities.counts == (6, 1, 1, 0)
    assert r.last_iteration == 3
    assert ids(r) == {f"i{k}" for k in range(1, 7)}
    assert r.holders("SC") == [] and r.holders("ST") == []
    assert r.iterations[0].transferable == 2


def test_thakur_literal_example1(example1):
    pool, q, s = only(example1)
    declared = choose_thakur_literal(pool, q, s)
    assert "i7" in declared.ids and "i6" not in declared.ids
    assert declared.tag("i7") == "open"
    hidden = [a.hidden() if a.id == "i6" else a for a in pool]
    assert "i6" in choose_thakur_literal(hidden, q, s).ids


def test_restricted_merit_order(example2):
    pool, q, s = only(example2)
    assert restricted_merit_order(s, "OBC", pool) == ["i4"]
    assert restricted_merit_order(s, "SC", pool) == ["i5"]
    with pytest.raises(DomainError):
        restricted_merit_order(s, "open", pool)
    with pytest.raises(DomainError):
        restricted_merit_order(s, "GC", pool)


def test_choose_open_is_responsive(example1):
    pool, q, s = only(example1)
    assert [a.id for a in choose_open(pool, 2, s)] == ["i1", "i2"]
    assert choose_open(pool, 0, s) == []
    with pytest.raises(DomainError):
        choose_open(pool, -1, s)


def test_hidden_member_competes_as_general(example1):
    pool, q, s = only(example1)
    hidden = [a.hidden() if a.id == "i4" else a for a in pool]
    r = choose_india(hidden, q, s)
    assert "i4" not in r.ids
    assert r.iterations[0].vacant("OBC") == 2


def test_unacceptable_applicants_ignored():
    pool = [Applicant("i1", 90), Applicant("i2", 50, "OBC")]
    q = CapacityVector.of(open=1, OBC=1)
    s = Institution.from_applicants("s", q, pool, cutoff=60)
    r = choose_backward_transfers(pool, q, s)
    assert r.ids == {"i1"}
    assert r.final_capacities.counts == (2, 0, 0, 0)


def test_empty_pool():
    q = CapacityVector.of(open=1, OBC=2)
    s = Institution.from_applicants("s", q, [])
    r = choose_backward_transfers([], q, s)
    assert r.chosen == ()
    assert r.final_capacities.counts == (3, 0, 0, 0)
    assert r.last_iteration == 2


def test_termination_check_example1(example1):
    pool, q, s = only(example1)
    tau = choose_india(pool, q, s).iterations[0].transferable
    assert not bt_termination_check(pool, q, q, tau, s)
    assert not bt_termination_check(pool, q, q.transfer_to_open({"OBC": 1}), tau, s)
    assert bt_termination_check(pool, q, q.transfer_to_open({"OBC": 2}), tau, s)
    assert bt_termination_index(pool, q, s) == 5


def test_choice_axioms_pass_for_backward_transfers(example2):
    pool, q, s = only(example2)
    assert all(r.passed for r in check_choice_axioms(choose_backward_transfers, pool, q, s))


def test_choice_axioms_catch_a_rule_that_skips_the_top_scorer(example1):
    pool, q, s = only(example1)

    def skip_top(applicants, capacities, inst):
        ranked = sorted(applicants, key=lambda a: inst.rank[a.id])
        return choose_india(ranked[1:], capacities, inst)

    over, fair, quota = check_choice_axioms(skip_top, pool, q, s)
    assert not over.passed
    assert over.witnesses[0].applicant == "i1"
    assert not fair.passed
    assert {w.applicant for w in fair.witnesses} == {"i1"}
    assert quota.passed


def test_choice_axioms_quota_filling_against_initial(example1):
    # India Reserves leaves an OBC seat empty only when no OBC member is left out.
    pool, q, s = only(example1)
    assert check_choice_axioms(choose_india, pool, q, s, against="initial")[2].passed

    def drop_obc(applicants, capacities, inst):
        r = choose_india(applicants, capacities, inst)
        return ChoiceResult(tuple(x for x in r.chosen if x[1] != "OBC"), r.final_capacities, r.iterations)

    quota = check_choice_axioms(drop_obc, pool, q, s)[2]
    assert [(w.applicant, w.category) for w in quota.witnesses] == [("i4", "OBC")]


# -- properties ------------------------------------------------------------


@given(single_institution())
def test_backward_transfers_iterations_bounded(case):
    pool, q, s = case
    r = choose_backward_transfers(pool, q, s)
    assert 1 <= r.last_iteration <= q["OBC"] + 1
    assert r.final_capacities.total == q.total
    assert r.iterations[-1].transferable == 0
    assert len(r.chosen) <= q.total


@given(single_institution())
def test_closed_form_termination_matches_iteration(case):
    pool, q, s = case
    assert choose_backward_transfers(pool, q, s).final_capacities.open == bt_termination_index(pool, q, s)


@given(single_institution())
def test_no_dereservable_seats_means_india_rule(case):
    pool, q, s = case
    q0 = CapacityVector.of(open=q.open, SC=q["SC"], ST=q["ST"], OBC=0)
    assert choose_backward_transfers(pool, q0, s).chosen == choose_india(pool, q0, s).chosen


@given(single_institution())
def test_backward_transfers_path_independent(case):
    pool, q, s = case
    first = choose_backward_transfers(pool, q, s)
    again = choose_backward_transfers([a for a in pool if a.id in first.ids], q, s)
    assert again.ids == first.ids


@given(single_institution())
def test_backward_transfers_choice_axioms(case):
    pool, q, s = case
    for report in check_choice_axioms(choose_backward_transfers, pool, q, s):
        assert report.passed, report.render()


@settings(max_examples=50)
@given(single_institution())
def test_backward_transfers_keeps_india_selection(case):
    # Transfers only add open seats; a reserve member may move from a
    # reserved seat to open but is never dropped.
    pool, q, s = case
    base = choose_india(pool, q, s).ids
    assert base <= choose_backward_transfers(pool, q, s).ids
