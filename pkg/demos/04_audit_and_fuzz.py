"""Auditing outcomes and fuzzing small random markets.

Run: python demos/04_audit_and_fuzz.py
"""
from dereserve import Assignment, FuzzConfig, check_stability, da_bt, fuzz, load_fixture
from dereserve.audit import AXIOMS

market = load_fixture("example4")
outcome = da_bt(market).outcome
for check in AXIOMS.values():
    print(check(outcome, market).render())

# swap i3 and i4: i3 now envies b, where it beats i4 for the OBC seat
swapped = Assignment.from_holders({"a": [("i1", "open"), ("i3", "OBC")], "b": [("i2", "open"), ("i4", "OBC")]})
print("\n" + check_stability(swapped, market).render())

config = FuzzConfig(seed=0, markets=300, properties=("pareto-dominance", "stability", "axioms"))
print("\n" + fuzz(config).render())

config = FuzzConfig(seed=0, markets=1000, properties=("strategy-proof",), mechanism="multi-run-da")
summary = fuzz(config)
print("\n" + summary.render())
for c in summary.counterexamples:
    print(c.render())
