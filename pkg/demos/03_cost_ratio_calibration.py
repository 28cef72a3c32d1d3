"""Sweep the high-risk class weight to hit a cautious:dangerous target.

A dangerous error puts a highest-risk individual in a lower band; a
cautious error puts a lowest-risk individual in a higher one. Raising
the high-risk class weight makes trees prefer the high band wherever a
leaf holds any high-risk mass, so dangerous errors fall monotonically
while cautious errors rise. The calibrator picks the grid point whose
realized ratio lands nearest the requested policy target of two
cautious errors per dangerous one.
"""

from riskforest import ForestConfig, calibrate_cost_ratio, hart_synthetic

data = hart_synthetic(n=6000, signal_strength=0.8, seed=7)
config = ForestConfig(n_trees=51, min_leaf=50, max_depth=8, master_seed=5)

result = calibrate_cost_ratio(data, config, target_ratio=2.0)

print("multiplier  dangerous  cautious  realized ratio")
for point in result.sweep:
    ratio = "undefined" if point.ratio is None else f"{point.ratio:.3f}"
    print(f"  x{point.multiplier:<8} {point.dangerous:>9} {point.cautious:>9}"
          f"   {ratio}")
print()
print(f"chosen class weights: {result.weights}")
print(f"realized cautious:dangerous ratio {result.realized_ratio:.2f}"
      f" (target {result.target_ratio})")
