"""Clearinghouse mechanisms built on applicant-proposing deferred acceptance."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .choice import ChoiceResult, ChoiceRule, choose_backward_transfers, choose_india
from .market import Assignment, CapacityVector, Market

CapacityProfile = Mapping[str, CapacityVector]


@dataclass(frozen=True)
class MechanismRun:
    """Outcome of a mechanism plus the bookkeeping needed to audit it.

    ``outer_iterations`` is the capacity profile used by each full DA run
    (a single entry except for multi-run DA). ``choices`` holds each
    institution's terminal choice, whose tags make up the outcome.
    ``steps`` records, per DA run, the held sets after every step.
    """

    mechanism: str
    outcome: Assignment
    da_steps: int
    outer_iterations: Tuple[Dict[str, CapacityVector], ...]
    choices: Dict[str, ChoiceResult]
    steps: Tuple[Tuple[Dict[str, Tuple[str, ...]], ...], ...] = field(default=(), compare=False)

    @property
    def L(self) -> int:
        return len(self.outer_iterations)

    def final_capacities(self) -> Dict[str, CapacityVector]:
        return {s: c.final_capacities for s, c in self.choices.items()}


def _run_da(
    market: Market, rule: ChoiceRule, capacities: CapacityProfile
) -> Tuple[Dict[str, ChoiceResult], int, Tuple[Dict[str, Tuple[str, ...]], ...]]:
    applicants = {a.id: a for a in market.applicants}
    insts = {s.id: s for s in market.institutions}
    held: Dict[str, frozenset] = {s: frozenset() for s in insts}
    choices: Dict[str, ChoiceResult] = {}
    nxt = {i: 0 for i in applicants}
    proposers = [a.id for a in market.applicants if a.preferences]
    steps = 0
    trace = []
    while proposers:
        steps += 1
        offers: Dict[str, List[str]] = {}
        for i in proposers:
            offers.setdefault(applicants[i].preferences[nxt[i]], []).append(i)
        rejected = set()
        for s in insts:
            if s not in offers:
                continue
            pool = held[s].union(offers[s])
            result = rule([applicants[i] for i in pool], capacities[s], insts[s])
            choices[s] = result
            held[s] = result.ids
            rejected |= pool - result.ids
        trace.append({s: tuple(sorted(h)) for s, h in held.items()})
        proposers = []
        for a in market.applicants:
            if a.id in rejected:
                nxt[a.id] += 1
                if nxt[a.id] < len(a.preferences):
                    proposers.append(a.id)
    for s in insts:
        if s not in choices:
            choices[s] = rule([], capacities[s], insts[s])
    return choices, steps, tuple(trace)


def _outcome(market: Market, choices: Mapping[str, ChoiceResult]) -> Assignment:
    return Assignment.from_holders(
        {s.id: choices[s.id].chosen for s in market.institutions},
        [a.id for a in market.applicants],
    )


def deferred_acceptance(
    market: Market,
    rule: ChoiceRule = choose_india,
    capacities: Optional[CapacityProfile] = None,
    name: str = "da",
) -> MechanismRun:
    """Applicant-proposing DA where each institution holds ``rule(held + proposers)``.

    Proposals within a step are simultaneous. Category tags come from the
    last choice made at each institution.
    """
    caps = dict(capacities) if capacities is not None else market.capacities()
    choices, steps, trace = _run_da(market, rule, caps)
    return MechanismRun(name, _outcome(market, choices), steps, (caps,), choices, (trace,))


def da_india(market: Market) -> MechanismRun:
    """Single DA run with the India Reserves rule at the initial capacities."""
    return deferred_acceptance(market, choose_india, name="da-in")


def multi_run_da(market: Market) -> MechanismRun:
    """Repeat the whole DA, reverting vacant de-reservable seats between runs.

    Vacancies at every institution are reverted together, and reverted
    seats stay open in all later runs.
    """
    caps = market.capacities()
    profiles = []
    traces = []
    total_steps = 0
    while True:
        profiles.append(dict(caps))
        choices, steps, trace = _run_da(market, choose_india, caps)
        total_steps += steps
        traces.append(trace)
        moved = False
        for s in market.institutions:
            it = choices[s.id].iterations[-1]
            moves = {r: it.vacant(r) for r in market.scheme.dereservable_order if it.vacant(r)}
            if moves:
                caps[s.id] = caps[s.id].transfer_to_open(moves)
                moved = True
        if not moved:
            return MechanismRun(
                "multi-run-da", _outcome(market, choices), total_steps, tuple(profiles), choices, tuple(traces)
            )


def da_bt(market: Market) -> MechanismRun:
    """One DA pass where institutions choose with Backward Transfers."""
    return deferred_acceptance(market, choose_backward_transfers, name="da-bt")


MECHANISMS: Dict[str, Callable[[Market], MechanismRun]] = {
    "da-bt": da_bt,
    "multi-run-da": multi_run_da,
    "da-in": da_india,
}
