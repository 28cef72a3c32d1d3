"""Recompute every performance figure from the bundled confusion-matrix
fixtures and line them up against the published values.

The fixtures store the two 3x3 percentage matrices (out-of-bag
construction data and the 2013 validation year) exactly as printed, so
all the arithmetic here runs on rounded percentages; agreement within
0.0015 absolute is the expected outcome.
"""

from riskforest import ConfusionMatrix, derive_metrics, fixture_path, random_baseline
from riskforest.reference import PUBLISHED, TABLE_TOLERANCE

for key, published in PUBLISHED.items():
    cm = ConfusionMatrix.from_csv(fixture_path(published["fixture"]))
    report = derive_metrics(cm, high_label="High", low_label="Low")

    print(f"== {key} ({published['fixture']}) ==")
    rows = [("overall accuracy", report.overall_accuracy,
             published["overall_accuracy"])]
    for label in report.labels:
        rows.append((f"sensitivity {label}", report.per_label[label].sensitivity,
                     published["sensitivity"][label]))
    for label in report.labels:
        rows.append((f"precision {label}", report.per_label[label].precision,
                     published["precision"][label]))
    rows.append(("very dangerous", report.very_dangerous,
                 published["very_dangerous"]))
    rows.append(("very cautious", report.very_cautious,
                 published["very_cautious"]))
    for name, computed, target in rows:
        delta = abs(computed - target)
        flag = "ok" if delta <= TABLE_TOLERANCE else "DRIFT"
        print(f"  {name:<22} computed {computed:.4f}  published {target:.4f}"
              f"  delta {delta:.5f}  {flag}")
    print()

marginals = (0.1186, 0.4835, 0.3979)
print(f"random-guesser baseline over {marginals}: "
      f"{random_baseline(marginals):.4f}  (quoted as 0.406 = 41%)")
