#!/usr/bin/env python3
"""Regenerates tests/fixtures/synthetic_compas.csv (committed; run only to rebuild).

A small two-group recidivism-style table with a known generative story:
the outcome depends on the features alone, the groups differ in their
feature distributions, so the audit sees genuine output disparity.
"""
import csv
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def sigmoid(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z))


def main() -> None:
    rng = random.Random(42)
    rows = []
    for i in range(200):
        group0 = rng.random() < 0.6
        race = "AA" if group0 else "C"
        age = rng.randint(18, 70)
        priors = rng.choices(
            [0, 1, 2, 3, 4, 5, 6, 8, 10],
            weights=[30, 20, 12, 10, 8, 6, 5, 4, 3],
        )[0]
        if group0 and rng.random() < 0.35:
            priors += 2  # shifts the group-0 prior-count distribution upward
        charge = "F" if rng.random() < (0.65 if group0 else 0.55) else "M"
        z = -0.8 + 0.35 * priors - 0.03 * (age - 35) + 0.5 * (charge == "F")
        recid = 1 if rng.random() < sigmoid(z) else 0
        rows.append([i + 1, race, age, priors, charge, recid])

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "synthetic_compas.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["person_id", "race", "Age", "PriorCounts", "ChargeDegree",
                    "two_year_recid"])
        w.writerows(rows)
    print(f"wrote {OUT / 'synthetic_compas.csv'} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
