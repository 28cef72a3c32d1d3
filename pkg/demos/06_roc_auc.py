"""ROC curves and AUC from first principles on forest vote shares.

A forest's high-risk vote share is a score; sweeping a threshold over it
trades false positives against true positives. The curve's area equals
the probability that a random high-risk row outscores a random other
row (ties counted one half), so 1.0 is perfect ranking and 0.5 is
chance.
"""

import numpy as np

from riskforest import (
    ForestConfig,
    auc,
    hart_synthetic,
    predict_dataset,
    roc_points,
    split_holdout,
    train_forest,
)

data = hart_synthetic(n=3000, signal_strength=0.8, seed=7)
train, hold = split_holdout(data, fraction=0.5, seed=11)
forest = train_forest(train, ForestConfig(n_trees=101, master_seed=5))

_, tally = predict_dataset(forest, hold)
scores = tally[:, 0] / forest.config.n_trees  # high-risk vote share
actual = (hold.y == 0).astype(int)  # one-vs-rest on the High label

points = roc_points(scores, actual)
print(f"{len(points)} ROC points from {len(set(scores))} distinct vote shares")
for fpr, tpr in points[:: max(1, len(points) // 10)]:
    bar = "#" * int(tpr * 40)
    print(f"  fpr {fpr:.3f}  tpr {tpr:.3f}  {bar}")

print(f"\nAUC for the High label (one-vs-rest): {auc(scores, actual):.4f}")

rng = np.random.default_rng(0)
noise = rng.random(actual.size)
print(f"AUC of a random score on the same labels: {auc(noise, actual):.4f}"
      " (chance is 0.5)")
