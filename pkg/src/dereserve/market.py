"""Domain types shared by every part of the package.

Markets, institutions, applicants, category schemes, capacity vectors,
assignments (institution plus category tag per applicant) and the
matchings they induce. Everything here is an immutable value.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

GC = "GC"
"""Effective type of any applicant who does not claim a reserve category."""

Slot = Tuple[str, str]


class MarketError(ValueError):
    """Malformed or inconsistent market input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(ValueError):
    """An operation was asked for something outside its domain."""


@dataclass(frozen=True)
class CategoryScheme:
    """Position categories: one open category plus reserved ones.

    ``dereservable`` categories revert their vacancies to open; the other
    reserved categories keep vacancies unfilled.
    """

    open_id: str
    reserved: Tuple[str, ...]
    dereservable: frozenset = frozenset()

    def __post_init__(self):
        if self.open_id in self.reserved:
            raise MarketError(f"open category {self.open_id!r} cannot also be reserved")
        if len(set(self.reserved)) != len(self.reserved):
            raise MarketError("duplicate reserved category")
        if GC in self.reserved or self.open_id == GC:
            raise MarketError(f"{GC!r} is reserved for the general applicant type")
        object.__setattr__(self, "dereservable", frozenset(self.dereservable))
        extra = self.dereservable - set(self.reserved)
        if extra:
            raise MarketError(f"dereservable categories not reserved: {sorted(extra)}")

    @property
    def categories(self) -> Tuple[str, ...]:
        return (self.open_id,) + self.reserved

    @property
    def dereservable_order(self) -> Tuple[str, ...]:
        return tuple(r for r in self.reserved if r in self.dereservable)

    def is_reserved(self, category: str) -> bool:
        return category in self.reserved


INDIA = CategoryScheme(open_id="open", reserved=("SC", "ST", "OBC"), dereservable=frozenset({"OBC"}))


@dataclass(frozen=True)
class CapacityVector:
    """Seat counts per category, aligned with ``scheme.categories``."""

    scheme: CategoryScheme
    counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != len(self.scheme.categories):
            raise MarketError(
                f"capacity vector needs {len(self.scheme.categories)} entries, got {len(counts)}"
            )
        if any(c < 0 for c in counts):
            raise MarketError(f"negative capacity in {counts}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def of(cls, scheme: CategoryScheme = INDIA, **counts: int) -> "CapacityVector":
        return cls.from_mapping(counts, scheme)

    @classmethod
    def from_mapping(cls, counts: Mapping[str, int], scheme: CategoryScheme = INDIA) -> "CapacityVector":
        unknown = set(counts) - set(scheme.categories)
        if unknown:
            raise MarketError(f"unknown categories {sorted(unknown)}")
        return cls(scheme, tuple(counts.get(c, 0) for c in scheme.categories))

    def __getitem__(self, category: str) -> int:
        return self.counts[self.scheme.categories.index(category)]

    @property
    def open(self) -> int:
        return self.counts[0]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.scheme.categories, self.counts))

    def transfer_to_open(self, amounts: Mapping[str, int]) -> "CapacityVector":
        """Move ``amounts[r]`` seats from each dereservable ``r`` to open."""
        counts = self.as_dict()
        for category, n in amounts.items():
            if category not in self.scheme.dereservable:
                raise DomainError(f"category {category!r} cannot be de-reserved")
            if not 0 <= n <= counts[category]:
                raise DomainError(f"cannot transfer {n} seats out of {category}={counts[category]}")
            counts[category] -= n
            counts[self.scheme.open_id] += n
        return CapacityVector.from_mapping(counts, self.scheme)

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.counts) + ")"


@dataclass(frozen=True)
class Applicant:
    """An applicant with a merit score and (possibly undeclared) membership.

    ``preferences`` lists acceptable institutions, best first.
    """

    id: str
    score: Fraction
    true_category: str = GC
    reported: Optional[bool] = None
    preferences: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "score", Fraction(self.score))
        object.__setattr__(self, "preferences", tuple(self.preferences))
        reported = self.reported
        if reported is None:
            reported = self.true_category != GC
        if reported and self.true_category == GC:
            raise MarketError(f"applicant {self.id}: a general applicant cannot report membership")
        object.__setattr__(self, "reported", bool(reported))

    @property
    def category(self) -> str:
        """Effective type: the true category if declared, else GC."""
        return self.true_category if self.reported else GC

    def hidden(self) -> "Applicant":
        return replace(self, reported=False)

    def declared(self) -> "Applicant":
        return replace(self, reported=True)

    def with_preferences(self, preferences: Sequence[str]) -> "Applicant":
        return replace(self, preferences=tuple(preferences))


@dataclass(frozen=True)
class Institution:
    """An institution with its initial seat distribution and merit order.

    ``order`` holds the acceptable applicants, highest merit first; anyone
    missing from it ranks below "unmatched" for this institution.
    """

    id: str
    capacities: CapacityVector
    order: Tuple[str, ...]
    cutoff: Optional[Fraction] = None
    merit: Optional[Tuple[str, ...]] = None
    rank: Mapping[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise MarketError(f"institution {self.id}: merit order repeats an applicant")
        object.__setattr__(self, "rank", {a: k for k, a in enumerate(self.order)})

    @classmethod
    def from_applicants(
        cls,
        id: str,
        capacities: CapacityVector,
        applicants: Iterable[Applicant],
        cutoff=None,
        merit: Optional[Sequence[str]] = None,
        tie_break: bool = False,
    ) -> "Institution":
        """Derive the merit order from scores, or from an explicit override."""
        applicants = list(applicants)
        cutoff = None if cutoff is None else Fraction(cutoff)
        if merit is not None:
            known = {a.id for a in applicants}
            missing = [a for a in merit if a not in known]
            if missing:
                raise MarketError(f"institution {id}: merit order names unknown applicants {missing}")
            order = tuple(merit)
        else:
            eligible = [a for a in applicants if cutoff is None or a.score >= cutoff]
            eligible.sort(key=lambda a: (-a.score, a.id))
            if not tie_break:
                for hi, lo in zip(eligible, eligible[1:]):
                    if hi.score == lo.score:
                        raise MarketError(
                            f"institution {id}: applicants {hi.id} and {lo.id} tie at score {hi.score}"
                        )
            order = tuple(a.id for a in eligible)
        return cls(id, capacities, order, cutoff, None if merit is None else tuple(merit))

    def acceptable(self, applicant_id: str) -> bool:
        return applicant_id in self.rank

    def prefers(self, i: str, j: str) -> bool:
        """True iff ``i`` has strictly higher merit than ``j`` here."""
        inf = len(self.order)
        return self.rank.get(i, inf) < self.rank.get(j, inf)


@dataclass(frozen=True)
class Market:
    scheme: CategoryScheme
    institutions: Tuple[Institution, ...]
    applicants: Tuple[Applicant, ...]
    tie_break: bool = False

    def __post_init__(self):
        object.__setattr__(self, "institutions", tuple(self.institutions))
        object.__setattr__(self, "applicants", tuple(self.applicants))
        _check_unique([s.id for s in self.institutions], "institution")
        _check_unique([a.id for a in self.applicants], "applicant")
        inst_ids = {s.id for s in self.institutions}
        app_ids = {a.id for a in self.applicants}
        if inst_ids & app_ids:
            raise MarketError(f"ids used for both applicants and institutions: {sorted(inst_ids & app_ids)}")
        for s in self.institutions:
            if s.capacities.scheme != self.scheme:
                raise MarketError(f"institution {s.id}: capacities use a different category scheme")
            dangling = [a for a in s.order if a not in app_ids]
            if dangling:
                raise MarketError(f"institution {s.id}: merit order names unknown applicants {dangling}")
        for a in self.applicants:
            if a.true_category != GC and a.true_category not in self.scheme.reserved:
                raise MarketError(f"applicant {a.id}: unknown category {a.true_category!r}")
            unknown = [s for s in a.preferences if s not in inst_ids]
            if unknown:
                raise MarketError(f"applicant {a.id}: preference names unknown institution {unknown[0]!r}")
            if len(set(a.preferences)) != len(a.preferences):
                raise MarketError(f"applicant {a.id}: preference list repeats an institution")

    @classmethod
    def build(
        cls,
        applicants: Iterable[Applicant],
        institutions: Iterable[Tuple[str, Mapping[str, int]]],
        scheme: CategoryScheme = INDIA,
        tie_break: bool = False,
        cutoffs: Optional[Mapping[str, object]] = None,
        merit: Optional[Mapping[str, Sequence[str]]] = None,
    ) -> "Market":
        """Assemble a market from applicants and ``(id, capacities)`` pairs."""
        applicants = tuple(applicants)
        cutoffs = cutoffs or {}
        merit = merit or {}
        insts = tuple(
            Institution.from_applicants(
                sid,
                caps if isinstance(caps, CapacityVector) else CapacityVector.from_mapping(caps, scheme),
                applicants,
                cutoff=cutoffs.get(sid),
                merit=merit.get(sid),
                tie_break=tie_break,
            )
            for sid, caps in institutions
        )
        return cls(scheme, insts, applicants, tie_break)

    @cached_property
    def _applicant_index(self) -> Dict[str, Applicant]:
        return {a.id: a for a in self.applicants}

    @cached_property
    def _institution_index(self) -> Dict[str, Institution]:
        return {s.id: s for s in self.institutions}

    def applicant(self, applicant_id: str) -> Applicant:
        try:
            return self._applicant_index[applicant_id]
        except KeyError:
            raise MarketError(f"unknown applicant {applicant_id!r}") from None

    def institution(self, institution_id: str) -> Institution:
        try:
            return self._institution_index[institution_id]
        except KeyError:
            raise MarketError(f"unknown institution {institution_id!r}") from None

    def preferences(self, applicant_id: str) -> Tuple[str, ...]:
        return self.applicant(applicant_id).preferences

    def capacities(self) -> Dict[str, CapacityVector]:
        return {s.id: s.capacities for s in self.institutions}

    def with_applicant(self, applicant: Applicant) -> "Market":
        """Swap in a modified copy of one applicant (same id, same score)."""
        old = self.applicant(applicant.id)
        if old.score != applicant.score:
            raise DomainError("changing a score would invalidate the institutions' merit orders")
        return replace(
            self, applicants=tuple(applicant if a.id == applicant.id else a for a in self.applicants)
        )

    def prefers(self, applicant_id: str, s: Optional[str], t: Optional[str]) -> bool:
        """True iff the applicant strictly prefers ``s`` to ``t`` (None = unmatched)."""
        prefs = self.preferences(applicant_id)
        inf = len(prefs)
        rs = prefs.index(s) if s in prefs else inf
        rt = prefs.index(t) if t in prefs else inf
        return rs < rt


def _check_unique(ids: List[str], kind: str) -> None:
    seen = set()
    for x in ids:
        if x in seen:
            raise MarketError(f"duplicate {kind} id {x!r}")
        seen.add(x)


@dataclass(frozen=True)
class Matching:
    """Applicant to institution (or None), category tags dropped."""

    partner: Mapping[str, Optional[str]]

    def members(self, institution_id: str) -> frozenset:
        return frozenset(i for i, s in self.partner.items() if s == institution_id)

    def __getitem__(self, applicant_id: str) -> Optional[str]:
        return self.partner.get(applicant_id)

    def as_dict(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {}
        for i, s in self.partner.items():
            if s is not None:
                out.setdefault(s, []).append(i)
        return {s: sorted(v) for s, v in sorted(out.items())}


@dataclass(frozen=True)
class Assignment:
    """Applicant to ``(institution, category)`` or None.

    The per-institution view (the set of applicant/category pairs held
    there) is derived, so the two directions cannot disagree.
    """

    slots: Mapping[str, Optional[Slot]]

    @classmethod
    def from_holders(cls, holders: Mapping[str, Iterable[Slot]], applicants: Iterable[str] = ()) -> "Assignment":
        """Build from ``{institution: [(applicant, category), ...]}``."""
        slots: Dict[str, Optional[Slot]] = {i: None for i in applicants}
        for s, pairs in holders.items():
            for i, c in pairs:
                if slots.get(i) is not None:
                    raise MarketError(f"applicant {i} assigned twice")
                slots[i] = (s, c)
        return cls(slots)

    def __getitem__(self, applicant_id: str) -> Optional[Slot]:
        return self.slots.get(applicant_id)

    def institution_of(self, applicant_id: str) -> Optional[str]:
        slot = self.slots.get(applicant_id)
        return None if slot is None else slot[0]

    def holders(self, institution_id: str) -> List[Slot]:
        return [(i, slot[1]) for i, slot in self.slots.items() if slot is not None and slot[0] == institution_id]

    def count(self, institution_id: str, *categories: str) -> int:
        return sum(1 for _, c in self.holders(institution_id) if c in categories)


def induce_matching(assignment: Assignment) -> Matching:
    return Matching({i: (None if slot is None else slot[0]) for i, slot in assignment.slots.items()})


@dataclass(frozen=True)
class Violation:
    clause: str
    detail: str

    def __str__(self):
        return f"{self.clause}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_assignment(assignment: Assignment, market: Market) -> ValidationReport:
    """Check eligibility, per-category capacity and consistency of an assignment.

    Unknown applicant or institution ids raise :class:`MarketError`.
    """
    scheme = market.scheme
    violations: List[Violation] = []
    for i, slot in assignment.slots.items():
        applicant = market.applicant(i)
        if slot is None:
            continue
        s, c = slot
        market.institution(s)
        if c not in scheme.categories:
            violations.append(Violation("eligibility", f"{i} holds unknown category {c!r} at {s}"))
        elif c != scheme.open_id and c != applicant.category:
            violations.append(
                Violation("eligibility", f"{i} (type {applicant.category}) holds a {c} position at {s}")
            )
    for s in market.institutions:
        holders = assignment.holders(s.id)
        q = s.capacities
        if len(holders) > q.total:
            violations.append(Violation("capacity", f"{s.id} holds {len(holders)} > {q.total} applicants"))
        for r in scheme.reserved:
            n = sum(1 for _, c in holders if c == r)
            if n > q[r]:
                violations.append(Violation("capacity", f"{s.id} has {n} {r} holders > {q[r]}"))
        flexible = (scheme.open_id,) + scheme.dereservable_order
        n = sum(1 for _, c in holders if c in flexible)
        limit = sum(q[c] for c in flexible)
        if n > limit:
            violations.append(
                Violation("capacity", f"{s.id} has {n} open/de-reservable holders > {limit}")
            )
    return ValidationReport(tuple(violations))
