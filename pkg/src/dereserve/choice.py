"""Single-institution choice rules.

Every rule has the signature ``rule(applicants, capacities, institution)``
and returns a :class:`ChoiceResult`. Applicants the institution finds
unacceptable are ignored, as if they had not applied.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Sequence, Tuple

from .market import GC, Applicant, CapacityVector, DomainError, Institution, Slot


@dataclass(frozen=True)
class Iteration:
    """One pass of the India Reserves rule inside an iterative rule."""

    capacities: CapacityVector
    vacancies: Tuple[Tuple[str, int], ...]

    def vacant(self, category: str) -> int:
        return dict(self.vacancies).get(category, 0)

    @property
    def transferable(self) -> int:
        """Vacant seats in de-reservable categories."""
        return sum(self.vacant(r) for r in self.capacities.scheme.dereservable)


@dataclass(frozen=True)
class ChoiceResult:
    chosen: Tuple[Slot, ...]
    final_capacities: CapacityVector
    iterations: Tuple[Iteration, ...]

    @property
    def ids(self) -> FrozenSet[str]:
        return frozenset(i for i, _ in self.chosen)

    @property
    def last_iteration(self) -> int:
        return len(self.iterations)

    def tag(self, applicant_id: str):
        for i, c in self.chosen:
            if i == applicant_id:
                return c
        return None

    def holders(self, category: str) -> List[str]:
        return [i for i, c in self.chosen if c == category]


ChoiceRule = Callable[[Iterable[Applicant], CapacityVector, Institution], ChoiceResult]


def _ranked(applicants: Iterable[Applicant], inst: Institution) -> List[Applicant]:
    rank = inst.rank
    pool = [a for a in applicants if a.id in rank]
    pool.sort(key=lambda a: rank[a.id])
    return pool


def restricted_merit_order(inst: Institution, category: str, applicants: Iterable[Applicant]) -> List[str]:
    """Merit order for one reserved category: its members, best first.

    Non-members are unacceptable for the category and do not appear.
    """
    if not inst.capacities.scheme.is_reserved(category):
        raise DomainError(f"{category!r} is not a reserved category")
    return [a.id for a in _ranked(applicants, inst) if a.category == category]


def choose_open(applicants: Iterable[Applicant], k: int, inst: Institution) -> List[Applicant]:
    """Top ``k`` acceptable applicants by merit (q-responsive choice)."""
    if k < 0:
        raise DomainError("capacity must be non-negative")
    return _ranked(applicants, inst)[:k]


def _india(ranked: Sequence[Applicant], q: CapacityVector) -> Tuple[List[Slot], Iteration]:
    scheme = q.scheme
    chosen: List[Slot] = [(a.id, scheme.open_id) for a in ranked[: q.open]]
    rest = ranked[q.open :]
    vacancies = []
    for r in scheme.reserved:
        members = [a for a in rest if a.category == r][: q[r]]
        chosen.extend((a.id, r) for a in members)
        vacancies.append((r, q[r] - len(members)))
    return chosen, Iteration(q, tuple(vacancies))


def choose_india(applicants: Iterable[Applicant], capacities: CapacityVector, inst: Institution) -> ChoiceResult:
    """Open seats by merit first, then each reserved category among the rest."""
    chosen, it = _india(_ranked(applicants, inst), capacities)
    return ChoiceResult(tuple(chosen), capacities, (it,))


def choose_backward_transfers(
    applicants: Iterable[Applicant], capacities: CapacityVector, inst: Institution
) -> ChoiceResult:
    """Re-run the India Reserves rule, moving vacant de-reservable seats to open.

    All vacancies found in a pass move at once; the rule stops at the first
    pass with no de-reservable vacancy and returns that pass's selection.
    """
    ranked = _ranked(applicants, inst)
    dereservable = capacities.scheme.dereservable_order
    q = capacities
    iterations = []
    while True:
        chosen, it = _india(ranked, q)
        iterations.append(it)
        moves = {r: it.vacant(r) for r in dereservable if it.vacant(r)}
        if not moves:
            return ChoiceResult(tuple(chosen), q, tuple(iterations))
        q = q.transfer_to_open(moves)


def bt_termination_check(
    applicants: Iterable[Applicant],
    initial: CapacityVector,
    candidate: CapacityVector,
    first_vacancies: int,
    inst: Institution,
) -> bool:
    """Closed-form test of whether ``candidate`` is the last iteration's capacity.

    Holds when the applicants newly admitted to open seats (relative to the
    initial open capacity) who are not de-reservable members number exactly
    ``first_vacancies``, or when every de-reservable seat has moved to open.
    """
    scheme = initial.scheme
    ranked = _ranked(applicants, inst)
    deres = set(scheme.dereservable)
    if candidate.open == initial.open + sum(initial[r] for r in deres):
        return True
    before = {a.id for a in ranked[: initial.open]}
    newly = [a for a in ranked[: candidate.open] if a.id not in before and a.category not in deres]
    return len(newly) == first_vacancies


def choose_thakur_literal(
    applicants: Iterable[Applicant], capacities: CapacityVector, inst: Institution
) -> ChoiceResult:
    """Give vacant de-reservable seats to the best remaining general applicants.

    Only a counterexample fixture: it hurts reserve members who declare.
    The awarded seats are tagged open and moved to open in the final
    capacities so the result stays a feasible assignment.
    """
    ranked = _ranked(applicants, inst)
    chosen, it = _india(ranked, capacities)
    taken = {i for i, _ in chosen}
    general = [a for a in ranked if a.id not in taken and a.category == GC]
    moves: Dict[str, int] = {}
    open_id = capacities.scheme.open_id
    for r in capacities.scheme.dereservable_order:
        n = min(it.vacant(r), len(general))
        if n:
            chosen.extend((a.id, open_id) for a in general[:n])
            general = general[n:]
            moves[r] = n
    final = capacities.transfer_to_open(moves) if moves else capacities
    return ChoiceResult(tuple(chosen), final, (it,))


RULES: Dict[str, ChoiceRule] = {
    "india": choose_india,
    "backward-transfers": choose_backward_transfers,
    "thakur-literal": choose_thakur_literal,
}
