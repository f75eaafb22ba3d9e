"""Reverting vacancies by re-running the whole clearinghouse.

Run: python demos/02_multi_run_da.py
"""
from dereserve import da_bt, load_fixture, multi_run_da, pareto_compare

market = load_fixture("example2")
run = multi_run_da(market)
print("example2: multi-run DA needed", run.L, "full runs")
for k, profile in enumerate(run.outer_iterations, 1):
    print(f"  run {k}: capacities {profile['s']}")
print("  matched:", sorted(i for i, slot in run.outcome.slots.items() if slot))

# Two institutions: one run of DA with backward transfers does better for everyone
market = load_fixture("example4")
multi, bt = multi_run_da(market), da_bt(market)
for name, r in (("multi-run DA", multi), ("DA-BT", bt)):
    print(f"\n{name}:")
    for i, slot in sorted(r.outcome.slots.items()):
        print(f"  {i} -> {slot}")
print("\nDA-BT vs multi-run DA:", pareto_compare(bt.outcome, multi.outcome, market).value)
