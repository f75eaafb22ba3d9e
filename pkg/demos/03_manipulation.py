"""Searching every misreport an applicant could make.

Run: python demos/03_manipulation.py
"""
from dereserve import find_joint_manipulation, find_membership_manipulation, find_preference_manipulation
from dereserve import load_fixture

market = load_fixture("example4")

# i2 ends up at b. Dropping b from the list gets i2 into a.
w = find_preference_manipulation("multi-run-da", market, "i2")
print("multi-run DA, i2:", w.render() if w else "none")

# i4 is OBC and ends up at a, its second choice. Hiding OBC status gets it b.
w = find_membership_manipulation("multi-run-da", market, "i4")
print("multi-run DA, i4:", w.render() if w else "none")

# Same search against DA-BT, over every list and both membership reports
for a in market.applicants:
    w = find_joint_manipulation("da-bt", market, a.id)
    print(f"DA-BT, {a.id}:", w.render() if w else "none")
