#!/usr/bin/env python3
"""Write the UCI forest cover type data as a headed CSV plus schema.

Usage: prepare_covtype.py OUT_DIR [covtype.data(.gz)]

Without an input file the data is fetched with scikit-learn's
``fetch_covtype`` (needs network access). The 44 binary wilderness/soil
indicator columns are kept as numeric 0/1 columns, as in the raw file.
"""
import csv
import gzip
import os
import sys

NUMERIC = [
    "elevation", "aspect", "slope",
    "horizontal_distance_to_hydrology", "vertical_distance_to_hydrology",
    "horizontal_distance_to_roadways", "hillshade_9am", "hillshade_noon",
    "hillshade_3pm", "horizontal_distance_to_fire_points",
]
NAMES = (
    NUMERIC
    + [f"wilderness_area_{i}" for i in range(1, 5)]
    + [f"soil_type_{i}" for i in range(1, 41)]
)


def rows_from_file(path):
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield line.split(",")


def rows_from_sklearn():
    from sklearn.datasets import fetch_covtype

    bunch = fetch_covtype()
    for x, y in zip(bunch.data, bunch.target):
        yield [str(int(v)) for v in x] + [str(int(y))]


def main():
    if len(sys.argv) not in (2, 3):
        sys.exit(__doc__)
    out_dir = sys.argv[1]
    rows = rows_from_file(sys.argv[2]) if len(sys.argv) == 3 else rows_from_sklearn()
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "covtype.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(NAMES + ["cover_type"])
        w.writerows(rows)
    with open(os.path.join(out_dir, "covtype.schema"), "w") as fh:
        for name in NAMES:
            fh.write(f"{name},numeric\n")
        fh.write("cover_type,label\n")


if __name__ == "__main__":
    main()
