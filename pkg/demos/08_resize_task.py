"""Resize-to-height task with a haptic anchor at the target.

A single focal point marks ground + target height; controllers with
different systematic biases stand in for participants. The report mirrors
the per-figure offset table (F1..F5, average, standard deviation).
"""

from harp.apps.resize import biased_controller, ideal_controller, resize_report

report = resize_report({
    "ideal": ideal_controller,
    "+1cm": biased_controller(0.01),
    "-0.5cm": biased_controller(-0.005),
})

header = ["controller"] + report["columns"]
print(f"figures: {report['figures']}  targets: {report['targets_m']} m")
print("  ".join(f"{h:>10s}" for h in header))
for row in report["rows"]:
    cells = [row["label"]] + [f"{row[c]:.2f}" for c in report["columns"]]
    print("  ".join(f"{c:>10s}" for c in cells))
