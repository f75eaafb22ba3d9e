"""Axiom checkers for choice rules and assignments, plus stability.

Each checker returns an :class:`AuditReport`; a report fails exactly when it
carries witnesses, and each witness names the applicant, institution,
category and (where relevant) competing applicant that exhibit the failure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .choice import ChoiceResult, ChoiceRule, choose_backward_transfers
from .market import Applicant, Assignment, CapacityVector, Institution, Market, Slot, induce_matching


@dataclass(frozen=True)
class Witness:
    applicant: Optional[str] = None
    institution: Optional[str] = None
    category: Optional[str] = None
    competitor: Optional[str] = None
    clause: str = ""
    detail: str = ""

    def render(self) -> str:
        parts = [f"{k}={v}" for k, v in self.to_dict().items() if v not in (None, "") and k != "detail"]
        text = " ".join(parts)
        return f"{text}: {self.detail}" if self.detail else text

    def to_dict(self) -> Dict[str, Optional[str]]:
        return {
            "clause": self.clause,
            "applicant": self.applicant,
            "institution": self.institution,
            "category": self.category,
            "competitor": self.competitor,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class AuditReport:
    axiom: str
    witnesses: Tuple[Witness, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def __bool__(self):
        return self.passed

    def render(self) -> str:
        lines = [f"{self.axiom}: {'pass' if self.passed else 'FAIL'}"]
        lines.extend("  " + w.render() for w in self.witnesses)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "verdict": "pass" if self.passed else "fail",
            "witnesses": [w.to_dict() for w in self.witnesses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _envied(assignment: Assignment, market: Market):
    """Yield ``(applicant, institution)`` for every institution ranked above the match."""
    for a in market.applicants:
        current = assignment.institution_of(a.id)
        for s in a.preferences:
            if s == current:
                break
            yield a, market.institution(s)


def check_individual_rationality(assignment: Assignment, market: Market) -> AuditReport:
    witnesses = []
    for i, slot in assignment.slots.items():
        if slot is not None and slot[0] not in market.preferences(i):
            witnesses.append(
                Witness(i, slot[0], slot[1], clause="individual-rationality", detail="institution not on the list")
            )
    return AuditReport("individual-rationality", tuple(witnesses))


def check_meritocracy(assignment: Assignment, market: Market) -> AuditReport:
    """Everyone on an open seat, or on a seat of the envier's own reserved
    category, at an envied institution must have higher merit there."""
    scheme = market.scheme
    witnesses = []
    for a, s in _envied(assignment, market):
        relevant = {scheme.open_id}
        if scheme.is_reserved(a.category):
            relevant.add(a.category)
        for j, c in assignment.holders(s.id):
            if c in relevant and not s.prefers(j, a.id):
                witnesses.append(
                    Witness(a.id, s.id, c, j, "meritocracy", f"{j} holds {c} at {s.id} with lower merit than {a.id}")
                )
    return AuditReport("meritocracy", tuple(witnesses))


def check_non_wastefulness(assignment: Assignment, market: Market) -> AuditReport:
    """At an envied institution, every seat the envier could take is used.

    Open plus de-reservable seats must be exhausted for every envier; the
    envier's own reserved category must be exhausted as well. Enviers the
    institution finds unacceptable are not eligible for anything there.
    """
    scheme = market.scheme
    flexible = (scheme.open_id,) + scheme.dereservable_order
    witnesses = []
    for a, s in _envied(assignment, market):
        if not s.acceptable(a.id):
            continue
        q = s.capacities
        if scheme.is_reserved(a.category):
            n = assignment.count(s.id, a.category)
            if n != q[a.category]:
                witnesses.append(
                    Witness(a.id, s.id, a.category, clause="own-category",
                            detail=f"{n} of {q[a.category]} {a.category} seats used")
                )
        n = assignment.count(s.id, *flexible)
        limit = sum(q[c] for c in flexible)
        if n != limit:
            witnesses.append(
                Witness(a.id, s.id, scheme.open_id, clause="open-and-dereservable",
                        detail=f"{n} of {limit} open/de-reservable seats used")
            )
    return AuditReport("non-wastefulness", tuple(witnesses))


def _open_first_clauses(holders: Sequence[Slot], s: Institution, market: Market) -> List[Witness]:
    scheme = market.scheme
    q = s.capacities
    flexible = {scheme.open_id} | scheme.dereservable
    limit = sum(q[c] for c in flexible)
    n = sum(1 for _, c in holders if c in flexible)
    out = []
    if n != min(len(holders), limit):
        out.append(Witness(institution=s.id, clause="i",
                           detail=f"{n} open/de-reservable holders, expected {min(len(holders), limit)}"))
    opens = [i for i, c in holders if c == scheme.open_id]
    reserved = [(j, c) for j, c in holders if scheme.is_reserved(c)]
    for i in opens:
        for j, c in reserved:
            if not s.prefers(i, j):
                out.append(Witness(i, s.id, scheme.open_id, j, "ii", f"open holder {i} below {c} holder {j}"))
    return out


def check_open_first(assignment: Assignment, market: Market) -> AuditReport:
    """Open seats (including reverted ones) go out before reserved seats.

    Clause (iii) asks that no reserve holder could be retagged to open while
    keeping (i) and (ii) intact. De-reservable seats left vacant count as
    reverted to open, so such a retag is available whenever an open or
    reverted seat is free. Retagging an open holder into their own category
    always lowers the open count below what (i) demands, so that direction
    never yields a witness.
    """
    scheme = market.scheme
    witnesses: List[Witness] = []
    flexible = {scheme.open_id} | scheme.dereservable
    for s in market.institutions:
        holders = assignment.holders(s.id)
        witnesses.extend(_open_first_clauses(holders, s, market))
        limit = sum(s.capacities[c] for c in flexible)
        n_flex = sum(1 for _, c in holders if c in flexible)
        if n_flex >= limit:
            continue
        for k, (i, c) in enumerate(holders):
            if not scheme.is_reserved(c):
                continue
            moved = list(holders)
            moved[k] = (i, scheme.open_id)
            if not _open_first_clauses(moved, s, market):
                witnesses.append(Witness(i, s.id, c, clause="iii", detail=f"{i} holds {c} while an open seat is free"))
    return AuditReport("open-first", tuple(witnesses))


def find_blocking_pairs(
    assignment: Assignment, market: Market, rule: ChoiceRule = choose_backward_transfers
) -> List[Tuple[str, str]]:
    """Pairs ``(i, s)`` with ``s`` preferred to the match and ``i`` chosen
    from the current holders of ``s`` plus ``i``."""
    matching = induce_matching(assignment)
    pairs = []
    for a, s in _envied(assignment, market):
        pool = [market.applicant(j) for j in matching.members(s.id)] + [a]
        if a.id in rule(pool, s.capacities, s).ids:
            pairs.append((a.id, s.id))
    return pairs


def check_stability(
    assignment: Assignment, market: Market, rule: ChoiceRule = choose_backward_transfers
) -> AuditReport:
    """Individual rationality, institutions re-choosing their holders, no blocking pair."""
    matching = induce_matching(assignment)
    witnesses = list(check_individual_rationality(assignment, market).witnesses)
    for s in market.institutions:
        members = matching.members(s.id)
        chosen = rule([market.applicant(j) for j in members], s.capacities, s).ids
        for j in sorted(members - chosen):
            witnesses.append(Witness(j, s.id, clause="rechosen", detail=f"{s.id} would not re-choose {j}"))
    for i, s in find_blocking_pairs(assignment, market, rule):
        witnesses.append(Witness(i, s, clause="blocking-pair", detail=f"{i} prefers {s} and would be chosen"))
    return AuditReport("stability", tuple(witnesses))


def check_choice_axioms(
    rule: ChoiceRule,
    applicants: Iterable[Applicant],
    capacities: CapacityVector,
    inst: Institution,
    against: str = "final",
) -> Tuple[AuditReport, AuditReport, AuditReport]:
    """Over-and-above, within-category fairness and quota-filling for one choice.

    ``against="final"`` measures seats against the capacities the rule ended
    with (identical to the initial ones for rules that never transfer);
    ``against="initial"`` uses ``capacities``.
    """
    applicants = [a for a in applicants if inst.acceptable(a.id)]
    result: ChoiceResult = rule(applicants, capacities, inst)
    q = result.final_capacities if against == "final" else capacities
    scheme = q.scheme
    tags = dict(result.chosen)
    ranked = sorted(applicants, key=lambda a: inst.rank[a.id])

    over = []
    for a in ranked[: q.open]:
        if tags.get(a.id) != scheme.open_id:
            over.append(Witness(a.id, inst.id, tags.get(a.id), clause="over-and-above",
                                detail=f"rank {inst.rank[a.id] + 1} within top {q.open} but not on an open seat"))

    fair = []
    for hi_k, hi in enumerate(ranked):
        if hi.id in tags:
            continue
        for lo in ranked[hi_k + 1 :]:
            if lo.category == hi.category and lo.id in tags:
                fair.append(Witness(hi.id, inst.id, hi.category, lo.id, "within-category-fairness",
                                    f"{lo.id} chosen over higher-merit {hi.id}"))

    quota = []
    for r in scheme.reserved:
        left_out = [a.id for a in ranked if a.category == r and a.id not in tags]
        n = sum(1 for c in tags.values() if c == r)
        if left_out and n != q[r]:
            quota.append(Witness(left_out[0], inst.id, r, clause="quota-filling",
                                 detail=f"{n} of {q[r]} {r} seats used while {left_out[0]} is unchosen"))

    return (
        AuditReport("over-and-above", tuple(over)),
        AuditReport("within-category-fairness", tuple(fair)),
        AuditReport("quota-filling", tuple(quota)),
    )


AXIOMS: Dict[str, Callable[[Assignment, Market], AuditReport]] = {
    "individual-rationality": check_individual_rationality,
    "meritocracy": check_meritocracy,
    "non-wastefulness": check_non_wastefulness,
    "open-first": check_open_first,
    "stability": check_stability,
}
