"""Brute-force oracles and the seeded fuzz harness.

Nothing in here looks inside a mechanism or a choice rule: mechanisms are
called on whole markets and choice rules on applicant sets, and the
results are compared by enumeration.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .audit import (
    AuditReport,
    Witness,
    check_individual_rationality,
    check_meritocracy,
    check_non_wastefulness,
    check_open_first,
    check_stability,
)
from .choice import ChoiceRule, bt_termination_check, choose_backward_transfers, choose_india
from .io import dump_market
from .market import (
    GC,
    INDIA,
    Applicant,
    Assignment,
    CapacityVector,
    DomainError,
    Institution,
    Market,
    validate_assignment,
)
from .mechanisms import MECHANISMS, MechanismRun, da_bt, multi_run_da

Mechanism = Callable[[Market], MechanismRun]

PREFERENCE_MISREPORT = "preference-misreport"
MEMBERSHIP_HIDE = "membership-hide"
JOINT = "joint"


class SearchTruncated(RuntimeError):
    """The report space exceeds the exhaustive bound and no witness was found."""


@dataclass(frozen=True)
class ManipulationWitness:
    applicant: str
    kind: str
    preferences: Tuple[str, ...]
    reported: Optional[bool]
    truthful: Optional[str]
    deviant: Optional[str]

    def render(self) -> str:
        report = ",".join(self.preferences) or "(empty list)"
        membership = {True: " membership=declared", False: " membership=hidden", None: ""}[self.reported]
        return (
            f"{self.applicant} {self.kind}: report prefs={report}{membership}; "
            f"{self.truthful or 'unmatched'} -> {self.deviant or 'unmatched'}"
        )

    def to_dict(self) -> dict:
        return {
            "applicant": self.applicant,
            "kind": self.kind,
            "preferences": list(self.preferences),
            "reported": self.reported,
            "truthful": self.truthful,
            "deviant": self.deviant,
        }


def _mechanism(mechanism: Union[str, Mechanism]) -> Mechanism:
    if isinstance(mechanism, str):
        try:
            return MECHANISMS[mechanism]
        except KeyError:
            raise DomainError(f"unknown mechanism {mechanism!r}") from None
    return mechanism


def preference_reports(institutions: Sequence[str]) -> List[Tuple[str, ...]]:
    """Every strict order over every subset, in lexicographic order."""
    reports = [p for k in range(len(institutions) + 1) for p in permutations(sorted(institutions), k)]
    return sorted(reports)


def _reports(market: Market, max_institutions: int, samples: Optional[int], seed: int):
    ids = [s.id for s in market.institutions]
    if len(ids) <= max_institutions:
        return preference_reports(ids), False
    if samples is None:
        raise SearchTruncated(
            f"{len(ids)} institutions exceed the exhaustive bound of {max_institutions}; pass samples= to sample"
        )
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        k = rng.randint(0, len(ids))
        out.append(tuple(rng.sample(ids, k)))
    return out, True


def _search(
    mechanism: Mechanism,
    market: Market,
    applicant_id: str,
    options: Iterable[Tuple[Tuple[str, ...], bool]],
    kind: Callable[[Tuple[str, ...], bool], str],
) -> Optional[ManipulationWitness]:
    truth = market.applicant(applicant_id)
    if truth.true_category != GC:
        truth = truth.declared()
    base = market.with_applicant(truth)
    truthful = mechanism(base).outcome.institution_of(applicant_id)
    for prefs, reported in options:
        if prefs == truth.preferences and reported == truth.reported:
            continue
        deviant_market = base.with_applicant(
            Applicant(truth.id, truth.score, truth.true_category, reported, prefs)
        )
        got = mechanism(deviant_market).outcome.institution_of(applicant_id)
        if base.prefers(applicant_id, got, truthful):
            membership = reported if truth.true_category != GC else None
            return ManipulationWitness(applicant_id, kind(prefs, reported), prefs, membership, truthful, got)
    return None


def find_preference_manipulation(
    mechanism: Union[str, Mechanism],
    market: Market,
    applicant_id: str,
    max_institutions: int = 4,
    samples: Optional[int] = None,
    seed: int = 0,
) -> Optional[ManipulationWitness]:
    """First profitable preference misreport, membership held at the truth.

    Beyond ``max_institutions`` the search only samples reports; a sampled
    search that finds nothing raises :class:`SearchTruncated` rather than
    claiming that no manipulation exists.
    """
    mech = _mechanism(mechanism)
    reports, truncated = _reports(market, max_institutions, samples, seed)
    truth = market.applicant(applicant_id)
    reported = truth.true_category != GC
    found = _search(mech, market, applicant_id, ((p, reported) for p in reports), lambda p, r: PREFERENCE_MISREPORT)
    if found is None and truncated:
        raise SearchTruncated(f"sampled {len(reports)} reports for {applicant_id} without a witness")
    return found


def find_membership_manipulation(
    mechanism: Union[str, Mechanism], market: Market, applicant_id: str
) -> Optional[ManipulationWitness]:
    """Does hiding reserve membership (true preferences kept) help?"""
    a = market.applicant(applicant_id)
    if a.true_category == GC:
        raise DomainError(f"{applicant_id} has no reserve membership to hide")
    if not a.reported:
        raise DomainError(f"{applicant_id} already hides membership in this market")
    return _search(
        _mechanism(mechanism), market, applicant_id, [(a.preferences, False)], lambda p, r: MEMBERSHIP_HIDE
    )


def find_joint_manipulation(
    mechanism: Union[str, Mechanism],
    market: Market,
    applicant_id: str,
    max_institutions: int = 4,
    samples: Optional[int] = None,
    seed: int = 0,
) -> Optional[ManipulationWitness]:
    """Search preference reports crossed with declaring or hiding membership."""
    mech = _mechanism(mechanism)
    reports, truncated = _reports(market, max_institutions, samples, seed)
    truth = market.applicant(applicant_id)
    memberships = (True, False) if truth.true_category != GC else (False,)
    truth_prefs = truth.preferences

    def kind(prefs, reported):
        if reported or truth.true_category == GC:
            return PREFERENCE_MISREPORT
        return MEMBERSHIP_HIDE if prefs == truth_prefs else JOINT

    options = ((p, r) for p in reports for r in memberships)
    found = _search(mech, market, applicant_id, options, kind)
    if found is None and truncated:
        raise SearchTruncated(f"sampled {len(reports)} reports for {applicant_id} without a witness")
    return found


class Comparison(str, enum.Enum):
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def pareto_compare(first: Assignment, second: Assignment, market: Market) -> Comparison:
    """Compare two outcomes by every applicant's (true) preferences."""
    better = worse = False
    for a in market.applicants:
        s1, s2 = first.institution_of(a.id), second.institution_of(a.id)
        if market.prefers(a.id, s1, s2):
            better = True
        elif market.prefers(a.id, s2, s1):
            worse = True
    if better and worse:
        return Comparison.INCOMPARABLE
    if better:
        return Comparison.DOMINATES
    if worse:
        return Comparison.DOMINATED
    return Comparison.EQUAL


def _subsets(universe: Sequence[Applicant], bound: int, samples: int, seed: int) -> Iterator[Tuple[Applicant, ...]]:
    if len(universe) <= bound:
        for k in range(len(universe) + 1):
            yield from combinations(universe, k)
    else:
        rng = random.Random(seed)
        for _ in range(samples):
            yield tuple(a for a in universe if rng.random() < 0.5)


def _single(market: Market, institution: Optional[str]) -> Institution:
    if institution is not None:
        return market.institution(institution)
    if len(market.institutions) != 1:
        raise DomainError("market has several institutions; name one")
    return market.institutions[0]


def check_spirit_of_aa(
    rule: ChoiceRule,
    market: Market,
    institution: Optional[str] = None,
    bound: int = 12,
    samples: int = 4096,
    seed: int = 0,
) -> AuditReport:
    """Declaring membership never turns acceptance into rejection.

    For every applicant set and every reserve member in it: if the member is
    rejected while declaring, they must also be rejected while hiding.
    """
    inst = _single(market, institution)
    q = inst.capacities
    witnesses = []
    for subset in _subsets(market.applicants, bound, samples, seed):
        for k, a in enumerate(subset):
            if a.true_category == GC:
                continue
            declared = list(subset)
            declared[k] = a.declared()
            hidden = list(subset)
            hidden[k] = a.hidden()
            if a.id not in rule(declared, q, inst).ids and a.id in rule(hidden, q, inst).ids:
                others = ",".join(x.id for x in subset if x.id != a.id)
                witnesses.append(
                    Witness(a.id, inst.id, a.true_category, clause="spirit-of-affirmative-action",
                            detail=f"rejected when declaring, chosen when hiding, with {{{others}}}")
                )
    return AuditReport("spirit-of-affirmative-action", tuple(witnesses))


def _choice_table(rule, universe, q, inst):
    n = len(universe)
    table = []
    for mask in range(1 << n):
        pool = [universe[k] for k in range(n) if mask >> k & 1]
        chosen = rule(pool, q, inst).ids
        table.append(sum(1 << k for k in range(n) if universe[k].id in chosen))
    return table


def _names(universe, mask):
    return ",".join(universe[k].id for k in range(len(universe)) if mask >> k & 1)


def check_substitutability(
    rule: ChoiceRule, universe: Sequence[Applicant], capacities: CapacityVector, inst: Institution, bound: int = 10
) -> AuditReport:
    """Rejected from A+i implies rejected from A+i+j, for all A, i, j."""
    universe = list(universe)
    n = len(universe)
    if n > bound:
        raise SearchTruncated(f"universe of {n} exceeds the exhaustive bound {bound}")
    table = _choice_table(rule, universe, capacities, inst)
    witnesses = []
    for mask in range(1 << n):
        for i in range(n):
            bi = 1 << i
            if mask & bi or table[mask | bi] & bi:
                continue
            for j in range(n):
                bj = 1 << j
                if j == i or mask & bj:
                    continue
                if table[mask | bi | bj] & bi:
                    witnesses.append(
                        Witness(universe[i].id, inst.id, competitor=universe[j].id, clause="substitutability",
                                detail=f"rejected from {{{_names(universe, mask | bi)}}} but chosen once "
                                       f"{universe[j].id} joins")
                    )
                    return AuditReport("substitutability", tuple(witnesses))
    return AuditReport("substitutability", ())


def check_size_monotonicity(
    rule: ChoiceRule, universe: Sequence[Applicant], capacities: CapacityVector, inst: Institution, bound: int = 10
) -> AuditReport:
    """Adding an applicant never shrinks the chosen set."""
    universe = list(universe)
    n = len(universe)
    if n > bound:
        raise SearchTruncated(f"universe of {n} exceeds the exhaustive bound {bound}")
    table = _choice_table(rule, universe, capacities, inst)
    for mask in range(1 << n):
        for i in range(n):
            bi = 1 << i
            if mask & bi:
                continue
            before, after = bin(table[mask]).count("1"), bin(table[mask | bi]).count("1")
            if after < before:
                w = Witness(universe[i].id, inst.id, clause="size-monotonicity",
                            detail=f"{{{_names(universe, mask)}}} chooses {before}, adding "
                                   f"{universe[i].id} chooses {after}")
                return AuditReport("size-monotonicity", (w,))
    return AuditReport("size-monotonicity", ())


def check_improvement(
    rule: ChoiceRule,
    individual: str,
    universe: Sequence[Applicant],
    capacities: CapacityVector,
    inst: Institution,
    bound: int = 12,
    samples: int = 4096,
    seed: int = 0,
) -> AuditReport:
    """Is the rule with ``individual`` declared an improvement over it with them hidden?

    For every applicant set A containing the individual: chosen while hidden
    implies chosen while declared, and if rejected both ways the rest of the
    choice is unchanged.
    """
    others = [a for a in universe if a.id != individual]
    me = next(a for a in universe if a.id == individual)
    if me.true_category == GC:
        raise DomainError(f"{individual} has no reserve membership")
    witnesses = []
    for subset in _subsets(others, bound, samples, seed):
        hidden = rule(list(subset) + [me.hidden()], capacities, inst).ids
        declared = rule(list(subset) + [me.declared()], capacities, inst).ids
        with_ = ",".join(a.id for a in subset)
        if individual in hidden and individual not in declared:
            witnesses.append(Witness(individual, inst.id, me.true_category, clause="i",
                                     detail=f"chosen only when hiding, with {{{with_}}}"))
        elif individual not in hidden and individual not in declared and hidden != declared:
            witnesses.append(Witness(individual, inst.id, me.true_category, clause="ii",
                                     detail=f"rejected both ways but others' choice differs, with {{{with_}}}"))
    return AuditReport("improvement", tuple(witnesses))


def bt_termination_index(applicants: Sequence[Applicant], capacities: CapacityVector, inst: Institution) -> int:
    """Smallest open capacity satisfying the closed-form termination test.

    Candidates run from the initial open capacity up to open plus every
    de-reservable seat, one transferred seat at a time.
    """
    scheme = capacities.scheme
    first = choose_india(applicants, capacities, inst).iterations[0]
    tau = first.transferable
    budget = sum(capacities[r] for r in scheme.dereservable)
    remaining = {r: capacities[r] for r in scheme.dereservable_order}
    candidate = capacities
    for step in range(budget + 1):
        if bt_termination_check(applicants, capacities, candidate, tau, inst):
            return candidate.open
        for r in scheme.dereservable_order:
            if remaining[r]:
                candidate = candidate.transfer_to_open({r: 1})
                remaining[r] -= 1
                break
    raise AssertionError("no candidate satisfied the termination test")


# ---------------------------------------------------------------------------
# fuzzing

CATEGORY_WEIGHTS = {GC: 0.505, "OBC": 0.27, "SC": 0.15, "ST": 0.075}

PROPERTIES = (
    "feasibility",
    "pareto-dominance",
    "stability",
    "axioms",
    "da-bt-strategy-proof",
    "strategy-proof",
    "bt-termination",
    "choice-properties",
)


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    markets: int = 1000
    max_applicants: int = 5
    max_institutions: int = 3
    max_seats: int = 3
    category_weights: Tuple[Tuple[str, float], ...] = tuple(CATEGORY_WEIGHTS.items())
    properties: Tuple[str, ...] = ("pareto-dominance",)
    mechanism: str = "da-bt"
    hide_probability: float = 0.0

    def __post_init__(self):
        unknown = set(self.properties) - set(PROPERTIES)
        if unknown:
            raise DomainError(f"unknown properties {sorted(unknown)}")
        if self.mechanism not in MECHANISMS:
            raise DomainError(f"unknown mechanism {self.mechanism!r}")
        if self.max_applicants < 1 or self.max_institutions < 1 or self.max_seats < 1 or self.markets < 0:
            raise DomainError("fuzz bounds must be positive")


def random_market(rng: random.Random, config: FuzzConfig) -> Market:
    """Draw one small India-preset market.

    Scores are distinct integers; applicant types follow the category
    weights, and seats are drawn with the same weights (open taking the
    general share) before open is clamped to at least one seat. Every
    applicant ranks at least one institution.
    """
    weights = dict(config.category_weights)
    n_inst = rng.randint(1, config.max_institutions)
    n_app = rng.randint(1, config.max_applicants)
    inst_ids = [chr(ord("a") + k) for k in range(n_inst)]
    seat_cats = [INDIA.open_id if c == GC else c for c in weights]
    insts = []
    for sid in inst_ids:
        counts = {c: 0 for c in INDIA.categories}
        for _ in range(rng.randint(1, config.max_seats)):
            counts[rng.choices(seat_cats, weights=list(weights.values()))[0]] += 1
        counts[INDIA.open_id] = max(counts[INDIA.open_id], 1)
        insts.append((sid, counts))
    scores = rng.sample(range(1, 1000), n_app)
    applicants = []
    for k in range(n_app):
        category = rng.choices(list(weights), weights=list(weights.values()))[0]
        reported = category != GC and rng.random() >= config.hide_probability
        prefs = rng.sample(inst_ids, rng.randint(1, n_inst))
        applicants.append(Applicant(f"i{k + 1}", scores[k], category, reported, prefs))
    return Market.build(applicants, insts)


def market_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"dereserve:{seed}:{index}")


@dataclass(frozen=True)
class Counterexample:
    property: str
    index: int
    seed: int
    detail: str
    market: str

    def render(self) -> str:
        return f"# property {self.property} failed on market {self.index} (seed {self.seed}): {self.detail}\n" + self.market


@dataclass
class FuzzSummary:
    config: FuzzConfig
    passed: Dict[str, int] = field(default_factory=dict)
    failed: Dict[str, int] = field(default_factory=dict)
    counterexamples: List[Counterexample] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(self.failed.values())

    def render(self) -> str:
        lines = [f"fuzz seed={self.config.seed} markets={self.config.markets}"]
        for p in self.config.properties:
            lines.append(f"{p}: {self.passed.get(p, 0)} pass, {self.failed.get(p, 0)} fail")
        return "\n".join(lines)


def _check_property(name: str, market: Market, config: FuzzConfig) -> Optional[str]:
    """Return a description of the first failure, or None."""
    if name == "feasibility":
        for mech in MECHANISMS.values():
            run = mech(market)
            report = validate_assignment(run.outcome, market)
            if not report.ok:
                return f"{run.mechanism}: {report.violations[0]}"
    elif name == "pareto-dominance":
        verdict = pareto_compare(da_bt(market).outcome, multi_run_da(market).outcome, market)
        if verdict not in (Comparison.DOMINATES, Comparison.EQUAL):
            return f"DA-BT vs multi-run DA: {verdict.value}"
    elif name == "stability":
        for mech in (da_bt, multi_run_da):
            run = mech(market)
            report = check_stability(run.outcome, market)
            if not report.passed:
                return f"{run.mechanism}: {report.witnesses[0].render()}"
    elif name == "axioms":
        outcome = da_bt(market).outcome
        for check in (check_individual_rationality, check_meritocracy, check_non_wastefulness, check_open_first):
            report = check(outcome, market)
            if not report.passed:
                return f"{report.axiom}: {report.witnesses[0].render()}"
    elif name in ("da-bt-strategy-proof", "strategy-proof"):
        mech = "da-bt" if name == "da-bt-strategy-proof" else config.mechanism
        for a in market.applicants:
            w = find_joint_manipulation(mech, market, a.id)
            if w is not None:
                return w.render()
    elif name == "bt-termination":
        for s in market.institutions:
            pool = list(market.applicants)
            iterative = choose_backward_transfers(pool, s.capacities, s).final_capacities.open
            closed = bt_termination_index(pool, s.capacities, s)
            if iterative != closed:
                return f"{s.id}: iterative open capacity {iterative}, closed form {closed}"
    elif name == "choice-properties":
        for s in market.institutions:
            for check in (check_substitutability, check_size_monotonicity):
                report = check(choose_backward_transfers, market.applicants, s.capacities, s)
                if not report.passed:
                    return report.witnesses[0].render()
            report = check_spirit_of_aa(choose_backward_transfers, market, s.id)
            if not report.passed:
                return report.witnesses[0].render()
    return None


def fuzz_market(config: FuzzConfig, index: int) -> Tuple[Market, Dict[str, Optional[str]]]:
    market = random_market(market_rng(config.seed, index), config)
    return market, {p: _check_property(p, market, config) for p in config.properties}


def fuzz(config: FuzzConfig, workers: int = 1) -> FuzzSummary:
    """Run every selected property on ``config.markets`` seeded markets.

    Market ``k`` depends only on ``(config.seed, k)``, so any counterexample
    can be regenerated on its own. Results are aggregated in market order
    whatever the number of workers.
    """
    summary = FuzzSummary(config, {p: 0 for p in config.properties}, {p: 0 for p in config.properties})
    indices = range(config.markets)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_fuzz_one, [(config, k) for k in indices], chunksize=32))
    else:
        results = [fuzz_market(config, k) for k in indices]
    first = set()
    for k, (market, verdicts) in zip(indices, results):
        for p, failure in verdicts.items():
            if failure is None:
                summary.passed[p] += 1
                continue
            summary.failed[p] += 1
            if p not in first:
                first.add(p)
                summary.counterexamples.append(
                    Counterexample(p, k, config.seed, failure,
                                   dump_market(market, [f"fuzz seed {config.seed} market {k}", f"{p}: {failure}"]))
                )
    return summary


def _fuzz_one(args):
    return fuzz_market(*args)
