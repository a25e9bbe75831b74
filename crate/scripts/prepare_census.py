#!/usr/bin/env python3
"""Merge the UCI Adult files (adult.data, adult.test) into one CSV with a header.

Usage: prepare_census.py ADULT_DATA ADULT_TEST OUT_DIR

Values are stripped of surrounding whitespace, the trailing '.' on test-set
labels is removed, and '?' is kept as the missing-value marker.
"""
import csv
import os
import sys

COLUMNS = [
    ("age", "numeric"),
    ("workclass", "categorical"),
    ("fnlwgt", "numeric"),
    ("education", "categorical"),
    ("education_num", "numeric"),
    ("marital_status", "categorical"),
    ("occupation", "categorical"),
    ("relationship", "categorical"),
    ("race", "categorical"),
    ("sex", "categorical"),
    ("capital_gain", "numeric"),
    ("capital_loss", "numeric"),
    ("hours_per_week", "numeric"),
    ("native_country", "categorical"),
    ("income", "label"),
]


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("|"):
                continue
            fields = [t.strip() for t in line.split(",")]
            if len(fields) != len(COLUMNS):
                raise ValueError(f"{path}: unexpected field count in {line!r}")
            fields[-1] = fields[-1].rstrip(".")
            yield fields


def main():
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    data, test, out_dir = sys.argv[1:]
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "census_income.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([name for name, _ in COLUMNS])
        for path in (data, test):
            w.writerows(read_rows(path))
    with open(os.path.join(out_dir, "census_income.schema"), "w") as fh:
        for name, kind in COLUMNS:
            fh.write(f"{name},{kind}\n")


if __name__ == "__main__":
    main()
