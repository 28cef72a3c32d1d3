"""Audit a trained model for group fairness, then demonstrate on data
why the criteria cannot all hold at once.

Part 1 plants a 0.2 high-risk base-rate gap between two groups, trains
a model, and runs the four checks: statistical parity, calibration
(equal precision), equalized odds, and error-rate balance. An accurate
model inherits the planted gap, so parity fails while the
accuracy-conditioned criteria come out close.

Part 2 runs the exhaustive threshold search on the bundled two-group
instance (base rates 0.30 vs 0.60): each criterion alone can be matched
across groups by some threshold pair, but no pair satisfies
calibration, FPR balance, and FNR balance together at epsilon 0.01.
"""

import numpy as np

from riskforest import (
    ForestConfig,
    GroupedOutcomes,
    VALIDATION_MARGINALS,
    check_calibration,
    check_equalized_odds,
    check_error_rate_balance,
    check_statistical_parity,
    generate_two_group,
    hart_schema,
    impossibility_recipe,
    impossibility_search,
    predict_dataset,
    split_holdout,
    train_forest,
)

# -- part 1: audit a model on planted-disparity data ----------------------

schema = hart_schema(group_attribute="Group")
data = generate_two_group(schema, n=4000, marginals=VALIDATION_MARGINALS,
                          gap=0.2, signal_strength=0.8, seed=13)
train, hold = split_holdout(data, fraction=0.4, seed=3)
forest = train_forest(train, ForestConfig(n_trees=51, master_seed=9))
pred, _ = predict_dataset(forest, hold)

names = np.array(forest.labels, dtype=object)
per_group = {
    g: (names[pred[hold.groups == g]], names[hold.y[hold.groups == g]])
    for g in ("A", "B")
}
grouped = GroupedOutcomes.from_predictions(per_group, positive_label="High")

print("audit at epsilon 0.05 (positive label: High)")
for check in (check_statistical_parity, check_calibration,
              check_equalized_odds, check_error_rate_balance):
    verdict = check(grouped, 0.05)
    gap = "undefined" if verdict.gap is None else f"{verdict.gap:.4f}"
    print(f"  {verdict.criterion:<22} gap {gap:<10}"
          f" {'pass' if verdict.passed else 'FAIL'}")

# -- part 2: the joint-infeasibility demonstration -------------------------

print()
recipe = impossibility_recipe(seed=20)
report = impossibility_search(recipe, epsilon=0.01)
print(f"exhaustive search over {report.pairs_scanned} threshold pairs,"
      f" base rates {report.base_rates}")
for criterion, gap in report.best_gaps.items():
    print(f"  best achievable {criterion} gap alone: {gap:.4f}")
print(f"  any pair satisfying all three at eps=0.01: {report.jointly_feasible}")
