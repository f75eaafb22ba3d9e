"""One institution, seven applicants: what happens to an unfilled OBC seat.

Run: python demos/01_india_reserves.py
"""
from dereserve import choose_backward_transfers, choose_india, choose_thakur_literal, load_fixture

market = load_fixture("example1")
(inst,) = market.institutions
pool = list(market.applicants)
q = inst.capacities
print("capacities (open, SC, ST, OBC):", q)
for a in pool:
    print(f"  {a.id}  score={a.score}  {a.category}")

# India Reserves: open seats by merit, then each reserve among the rest
r = choose_india(pool, q, inst)
print("\nIndia Reserves:", r.chosen)
print("vacant OBC seats:", r.iterations[0].vacant("OBC"))

# Backward transfers keep moving vacant OBC seats to open until none is left
r = choose_backward_transfers(pool, q, inst)
for k, it in enumerate(r.iterations, 1):
    print(f"iteration {k}: capacities {it.capacities}, vacancies {dict(it.vacancies)}")
print("Backward Transfers:", r.chosen)

# Handing the vacancy straight to the next general applicant punishes i6 for declaring SC
declared = choose_thakur_literal(pool, q, inst)
hidden = choose_thakur_literal([a.hidden() if a.id == "i6" else a for a in pool], q, inst)
print("\nliteral reading, i6 declares SC:", sorted(declared.ids))
print("literal reading, i6 hides SC:   ", sorted(hidden.ids))
