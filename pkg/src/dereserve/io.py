"""Market and assignment files.

Market files are line oriented; see ``docs/formats.md`` for the grammar.
Assignment files are JSON. Both serializers are deterministic so that
run -> dump -> load -> run is byte-stable.
"""
from __future__ import annotations

import json
import os
import shlex
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional, Tuple, Union

from .market import (
    GC,
    INDIA,
    Applicant,
    Assignment,
    CapacityVector,
    CategoryScheme,
    Institution,
    Market,
    MarketError,
    validate_assignment,
)
from .mechanisms import MechanismRun

MARKET_VERSION = "1"
ASSIGNMENT_FORMAT = "dereserve-assignment"

_TRUE = {"yes", "true", "1"}
_FALSE = {"no", "false", "0"}


def _fields(tokens: List[str], lineno: int, allowed) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise MarketError(f"expected key=value, got {tok!r}", lineno)
        if key not in allowed:
            raise MarketError(f"unknown field {key!r}", lineno)
        if key in out:
            raise MarketError(f"field {key!r} given twice", lineno)
        out[key] = value
    return out


def _ids(value: str) -> List[str]:
    return [x for x in value.split(",") if x]


def _score(value: str, lineno: int, what: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise MarketError(f"field {what}: not a number: {value!r}", lineno) from None


def parse_market(text: str) -> Market:
    """Parse market-file text into a validated :class:`Market`."""
    scheme = INDIA
    tie_break = False
    seen_header = False
    insts: List[Tuple[int, str, Dict[str, str]]] = []
    applicants: List[Applicant] = []
    app_lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            words = shlex.split(line)
        except ValueError as exc:
            raise MarketError(str(exc), lineno) from None
        kind, rest = words[0], words[1:]
        if not seen_header:
            if kind != "market":
                raise MarketError("file must start with 'market <version>'", lineno)
            if rest != [MARKET_VERSION]:
                raise MarketError(f"unsupported market version {' '.join(rest)!r}", lineno)
            seen_header = True
            continue
        if kind == "scheme":
            if insts or applicants:
                raise MarketError("scheme must come before institutions and applicants", lineno)
            f = _fields(rest, lineno, {"open", "reserved", "dereservable"})
            scheme = CategoryScheme(
                open_id=f.get("open", "open"),
                reserved=tuple(_ids(f.get("reserved", ""))),
                dereservable=frozenset(_ids(f.get("dereservable", ""))),
            )
        elif kind == "tie-break":
            if rest != ["applicant-id"]:
                raise MarketError("only 'tie-break applicant-id' is supported", lineno)
            tie_break = True
        elif kind == "institution":
            if not rest:
                raise MarketError("institution needs an id", lineno)
            f = _fields(rest[1:], lineno, set(scheme.categories) | {"cutoff", "merit"})
            insts.append((lineno, rest[0], f))
        elif kind == "applicant":
            if not rest:
                raise MarketError("applicant needs an id", lineno)
            f = _fields(rest[1:], lineno, {"score", "category", "reported", "prefs"})
            if "score" not in f:
                raise MarketError("field score: missing", lineno)
            category = f.get("category", GC)
            if category != GC and category not in scheme.reserved:
                raise MarketError(f"field category: unknown category {category!r}", lineno)
            reported = None
            if "reported" in f:
                flag = f["reported"].lower()
                if flag not in _TRUE | _FALSE:
                    raise MarketError(f"field reported: expected yes/no, got {f['reported']!r}", lineno)
                reported = flag in _TRUE
            if rest[0] in app_lines:
                raise MarketError(f"duplicate applicant id {rest[0]!r} (first on line {app_lines[rest[0]]})", lineno)
            app_lines[rest[0]] = lineno
            try:
                applicants.append(
                    Applicant(rest[0], _score(f["score"], lineno, "score"), category, reported, _ids(f.get("prefs", "")))
                )
            except MarketError as exc:
                raise MarketError(str(exc), lineno) from None
        else:
            raise MarketError(f"unknown record {kind!r}", lineno)
    if not seen_header:
        raise MarketError("empty market file")

    inst_ids = set()
    for lineno, sid, _ in insts:
        if sid in inst_ids:
            raise MarketError(f"duplicate institution id {sid!r}", lineno)
        inst_ids.add(sid)
    for a in applicants:
        for s in a.preferences:
            if s not in inst_ids:
                raise MarketError(
                    f"field prefs: applicant {a.id} ranks unknown institution {s!r}", app_lines[a.id]
                )

    built = []
    for lineno, sid, f in insts:
        try:
            counts = {}
            for c in scheme.categories:
                v = f.get(c, "0")
                if not v.lstrip("-").isdigit():
                    raise MarketError(f"field {c}: not an integer: {v!r}")
                counts[c] = int(v)
            caps = CapacityVector.from_mapping(counts, scheme)
            cutoff = _score(f["cutoff"], lineno, "cutoff") if "cutoff" in f else None
            merit = _ids(f["merit"]) if "merit" in f else None
            built.append(Institution.from_applicants(sid, caps, applicants, cutoff, merit, tie_break))
        except MarketError as exc:
            raise MarketError(str(exc), lineno) from None
    return Market(scheme, tuple(built), tuple(applicants), tie_break)


def load_market(path: Union[str, os.PathLike]) -> Market:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MarketError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_market(text)
    except MarketError as exc:
        raise MarketError(f"{path}: {exc}") from None


def _fmt_score(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dump_market(market: Market, comments: Optional[List[str]] = None) -> str:
    s = market.scheme
    lines = [f"# {c}" for c in comments or []]
    lines.append(f"market {MARKET_VERSION}")
    lines.append(
        f"scheme open={s.open_id} reserved={','.join(s.reserved)} dereservable={','.join(s.dereservable_order)}"
    )
    if market.tie_break:
        lines.append("tie-break applicant-id")
    for inst in market.institutions:
        parts = [f"institution {inst.id}"]
        parts += [f"{c}={n}" for c, n in inst.capacities.as_dict().items()]
        if inst.cutoff is not None:
            parts.append(f"cutoff={_fmt_score(inst.cutoff)}")
        if inst.merit is not None:
            parts.append(f"merit={','.join(inst.merit)}")
        lines.append(" ".join(parts))
    for a in market.applicants:
        parts = [f"applicant {a.id}", f"score={_fmt_score(a.score)}", f"category={a.true_category}"]
        if a.true_category != GC and not a.reported:
            parts.append("reported=no")
        parts.append(f"prefs={','.join(a.preferences)}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def fixture_path(name: str) -> str:
    """Path of a bundled market, e.g. ``fixture_path("example4")``."""
    filename = name if "." in name else f"{name}.market"
    return str(resources.files("dereserve").joinpath("data", filename))


def load_fixture(name: str) -> Market:
    return load_market(fixture_path(name))


def run_record(run: MechanismRun, market: Market, trace: bool = False) -> dict:
    """The JSON-ready assignment file for a mechanism run."""
    record = {
        "format": ASSIGNMENT_FORMAT,
        "version": 1,
        "mechanism": run.mechanism,
        "da_steps": run.da_steps,
        "outer_iterations": run.L,
        "choice_iterations": {s.id: run.choices[s.id].last_iteration for s in market.institutions},
        "assignment": {
            a.id: (list(run.outcome[a.id]) if run.outcome[a.id] is not None else None) for a in market.applicants
        },
        "capacities": {s.id: run.choices[s.id].final_capacities.as_dict() for s in market.institutions},
    }
    if trace:
        record["trace"] = {
            "outer": [
                {
                    "capacities": {s: q.as_dict() for s, q in profile.items()},
                    "steps": [{s: list(h) for s, h in step.items()} for step in steps],
                }
                for profile, steps in zip(run.outer_iterations, run.steps)
            ],
            "choices": {
                s.id: [
                    {"capacities": it.capacities.as_dict(), "vacancies": dict(it.vacancies)}
                    for it in run.choices[s.id].iterations
                ]
                for s in market.institutions
            },
        }
    return record


def dump_run(run: MechanismRun, market: Market, trace: bool = False) -> str:
    return json.dumps(run_record(run, market, trace), indent=2) + "\n"


def parse_assignment(text: str, market: Market) -> Tuple[Assignment, dict]:
    """Read an assignment file; returns the assignment and the raw record.

    The assignment is checked for feasibility against ``market``.
    """
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MarketError(f"assignment file is not JSON: {exc}") from None
    if not isinstance(record, dict) or record.get("format") != ASSIGNMENT_FORMAT:
        raise MarketError(f"not a {ASSIGNMENT_FORMAT} file")
    raw = record.get("assignment")
    if not isinstance(raw, dict):
        raise MarketError("field assignment: missing or not an object")
    slots = {a.id: None for a in market.applicants}
    for i, slot in raw.items():
        market.applicant(i)
        if slot is None:
            continue
        if not (isinstance(slot, list) and len(slot) == 2 and all(isinstance(x, str) for x in slot)):
            raise MarketError(f"field assignment.{i}: expected [institution, category] or null")
        market.institution(slot[0])
        slots[i] = (slot[0], slot[1])
    assignment = Assignment(slots)
    report = validate_assignment(assignment, market)
    if not report.ok:
        raise MarketError("infeasible assignment: " + "; ".join(str(v) for v in report.violations))
    return assignment, record


def load_assignment(path: Union[str, os.PathLike], market: Market) -> Tuple[Assignment, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MarketError(f"cannot read {path}: {exc.strerror}") from None
    return parse_assignment(text, market)
