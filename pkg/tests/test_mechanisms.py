from itertools import product

from hypothesis import given, settings

from dereserve import (
    Applicant,
    Assignment,
    Comparison,
    Market,
    check_stability,
    choose_backward_transfers,
    da_bt,
    da_india,
    deferred_acceptance,
    multi_run_da,
    pareto_compare,
)

from conftest import by_institution
from strategies import markets


# -- brute-force oracle ----------------------------------------------------


def stable_matchings(market):
    """Every matching stable with respect to Backward Transfers, by enumeration."""
    options = [(None,) + a.preferences for a in market.applicants]
    found = []
    for pick in product(*options):
        holders = {}
        for a, s in zip(market.applicants, pick):
            if s is not None:
                holders.setdefault(s, []).append(a)
        slots = {a.id: None for a in market.applicants}
        feasible = True
        for sid, members in holders.items():
            inst = market.institution(sid)
            r = choose_backward_transfers(members, inst.capacities, inst)
            if r.ids != {a.id for a in members}:
                feasible = False
                break
            for i, c in r.chosen:
                slots[i] = (sid, c)
        if feasible and check_stability(Assignment(slots), market).passed:
            found.append(dict(zip((a.id for a in market.applicants), pick)))
    return found


@settings(max_examples=60, deadline=None)
@given(markets(max_applicants=4, max_institutions=3, max_seats=2))
def test_da_bt_is_the_applicant_optimal_stable_matching(market):
    outcome = da_bt(market).outcome
    stable = stable_matchings(market)
    mine = {a.id: outcome.institution_of(a.id) for a in market.applicants}
    assert mine in stable
    for other in stable:
        for a in market.applicants:
            assert not market.prefers(a.id, other[a.id], mine[a.id])


# -- examples --------------------------------------------------------------


def test_multi_run_example2(example2):
    run = multi_run_da(example2)
    assert run.L == 3
    assert run.final_capacities()["s"].counts == (6, 1, 1, 0)
    assert by_institution(run.outcome) == {"s": {f"i{k}" for k in range(1, 7)}}
    assert run.outcome.count("s", "SC", "ST") == 0
    bt = da_bt(example2)
    assert bt.choices["s"].last_iteration == 3
    assert bt.outcome == run.outcome


def test_multi_run_example3(example3):
    run = multi_run_da(example3)
    assert run.L == 2
    assert by_institution(run.outcome) == {"a": {"i1", "i2"}, "b": {"i3", "i4"}}


def test_example4_both_mechanisms(example4):
    multi = multi_run_da(example4)
    assert multi.L == 1
    assert by_institution(multi.outcome) == {"a": {"i1", "i4"}, "b": {"i2", "i3"}}
    bt = da_bt(example4)
    assert by_institution(bt.outcome) == {"a": {"i1", "i2"}, "b": {"i3", "i4"}}
    assert pareto_compare(bt.outcome, multi.outcome, example4) is Comparison.DOMINATES


def test_example4_tags(example4):
    bt = da_bt(example4).outcome
    assert bt["i1"] == ("a", "open")
    assert bt["i2"] == ("a", "open")
    assert bt["i3"][0] == "b" and bt["i4"][0] == "b"
    multi = multi_run_da(example4).outcome
    assert multi["i4"] == ("a", "OBC")


def test_hiding_membership_in_example4_moves_i4(example4):
    hidden = example4.with_applicant(example4.applicant("i4").hidden())
    run = multi_run_da(hidden)
    assert run.L == 3
    assert run.outcome.institution_of("i4") == "b"


def test_empty_preferences_stay_unmatched():
    pool = [Applicant("i1", 90), Applicant("i2", 80, preferences=("a",))]
    m = Market.build(pool, [("a", {"open": 1})])
    for mech in (da_bt, multi_run_da, da_india):
        run = mech(m)
        assert run.outcome["i1"] is None
        assert run.outcome["i2"] == ("a", "open")


def test_steps_and_trace(example4):
    run = da_bt(example4)
    assert run.da_steps == len(run.steps[0])
    assert run.steps[0][-1]["a"] == ("i1", "i2")


# -- properties ------------------------------------------------------------


def _without_obc(market):
    insts = []
    for s in market.institutions:
        d = s.capacities.as_dict()
        d["OBC"] = 0
        insts.append((s.id, d))
    return Market.build(list(market.applicants), insts)


@given(markets())
def test_no_dereservable_seats_reduces_to_single_da(market):
    m = _without_obc(market)
    base = da_india(m).outcome
    assert da_bt(m).outcome == base
    assert multi_run_da(m).outcome == base
    assert multi_run_da(m).L == 1


@given(markets())
def test_outer_iterations_bounded(market):
    run = multi_run_da(market)
    assert 1 <= run.L <= 1 + sum(s.capacities["OBC"] for s in market.institutions)


@given(markets())
def test_deterministic(market):
    for mech in (da_bt, multi_run_da, da_india):
        assert mech(market) == mech(market)


@given(markets())
def test_da_bt_weakly_pareto_dominates_multi_run(market):
    verdict = pareto_compare(da_bt(market).outcome, multi_run_da(market).outcome, market)
    assert verdict in (Comparison.DOMINATES, Comparison.EQUAL)


@given(markets())
def test_outcomes_stable_wrt_backward_transfers(market):
    for mech in (da_bt, multi_run_da):
        report = check_stability(mech(market).outcome, market)
        assert report.passed, report.render()


@given(markets())
def test_generic_da_with_india_rule_matches_named_wrapper(market):
    assert deferred_acceptance(market).outcome == da_india(market).outcome
