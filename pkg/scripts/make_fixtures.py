"""Regenerate the committed German-lending and heart-disease stand-in CSVs.

Only the group sizes and per-group base rates are matched to the published
statistics; the other columns are random but plausible.
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "regprop" / "fixtures"


def _labels(rng, n, positives):
    y = np.zeros(n, dtype=int)
    y[:positives] = 1
    rng.shuffle(y)
    return y


def german(rng):
    # 809 applicants aged >= 25 (589 good), 191 aged < 25 (110 good)
    old = rng.integers(25, 76, size=809)
    young = rng.integers(19, 25, size=191)
    age = np.r_[old, young]
    credit = np.r_[_labels(rng, 809, 589), _labels(rng, 191, 110)]
    order = rng.permutation(age.size)
    rows = []
    for i in order:
        rows.append([int(rng.integers(4, 73)), int(rng.integers(250, 18425)),
                     int(rng.integers(1, 5)), int(age[i]), int(credit[i])])
    return ["duration", "amount", "installment_rate", "age", "credit"], rows


def heart(rng):
    # 444 with sex=0 (333 positive), 756 with sex=1 (339 positive)
    sex = np.r_[np.zeros(444, dtype=int), np.ones(756, dtype=int)]
    target = np.r_[_labels(rng, 444, 333), _labels(rng, 756, 339)]
    order = rng.permutation(sex.size)
    first = np.flatnonzero(sex[order] == 0)[0]
    order[[0, first]] = order[[first, 0]]  # first row has sex=0 so it maps to group a
    rows = []
    for i in order:
        rows.append([int(rng.integers(29, 78)), int(rng.integers(94, 201)), int(rng.integers(126, 565)),
                     int(rng.integers(71, 203)), int(sex[i]), int(target[i])])
    return ["age", "trestbps", "chol", "thalach", "sex", "target"], rows


def main():
    rng = np.random.default_rng(2024)
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in (("german_fixture.csv", german), ("heart_fixture.csv", heart)):
        header, rows = build(rng)
        with (OUT / name).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        print(f"wrote {OUT / name} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
