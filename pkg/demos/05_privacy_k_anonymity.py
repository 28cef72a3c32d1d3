"""Measure k-anonymity of a released table under growing quasi-identifier
sets.

k is the smallest number of rows sharing any quasi-identifier value
combination that occurs in the release: an adversary matching someone
on those columns still faces at least k candidates. Adding columns can
only split groups further, so k never increases as the set grows.
"""

from riskforest import hart_synthetic, k_anonymity

table = hart_synthetic(n=2000, signal_strength=0.5, seed=29)

quasi_sets = [
    ["Gender"],
    ["Gender", "InstantViolenceOffenceBinary"],
    ["Gender", "InstantViolenceOffenceBinary", "CustodyPostcodeOutwardTop24"],
    ["Gender", "InstantViolenceOffenceBinary", "CustodyPostcodeOutwardTop24",
     "CustodyMosaicCodeTop28"],
]

print(f"{len(table)} released rows")
for quasi in quasi_sets:
    k = k_anonymity(table, quasi)
    print(f"  k = {k:>4}  under {{{', '.join(quasi)}}}")

print()
print("age is nearly identifying on its own:")
print(f"  k = {k_anonymity(table, ['CustodyAge']):>4}  under {{CustodyAge}}")
