#!/usr/bin/env python3
"""Provision the benchmark datasets under data/.

Three monks problems are exact enumerations of their defining formulas over
the full 432-instance attribute grid, so they are regenerated offline.  wdbc
is exported from scikit-learn's bundled copy.  bcw and transfusion are pulled
from the UCI repository and need network access; without it this script
reports which files are still missing and leaves everything else in place.

Usage: python3 tools/fetch_datasets.py [--data-dir data]
"""

import argparse
import itertools
import os
import sys
import urllib.request

MONKS_DOMAINS = [(1, 2, 3), (1, 2, 3), (1, 2), (1, 2, 3), (1, 2, 3, 4), (1, 2)]


def monks_label(problem, a):
    a1, a2, a3, a4, a5, a6 = a
    if problem == 1:
        return int(a1 == a2 or a5 == 1)
    if problem == 2:
        return int(sum(1 for v in a if v == 1) == 2)
    # problem 3, noiseless target concept
    return int((a5 == 3 and a4 == 1) or (a5 != 4 and a2 != 3))


def write_monks(data_dir, problem):
    path = os.path.join(data_dir, f"monks-{problem}.data")
    with open(path, "w") as out:
        for i, a in enumerate(itertools.product(*MONKS_DOMAINS), start=1):
            label = monks_label(problem, a)
            fields = " ".join(str(v) for v in a)
            out.write(f"{label} {fields} data_{i}\n")
    schema = os.path.join(data_dir, f"monks-{problem}.schema")
    with open(schema, "w") as out:
        out.write(
            "# monks columns: class a1 a2 a3 a4 a5 a6 id\n"
            "label_column = 0\n"
            "positive_label = 1\n"
            "negative_label = 0\n"
            "delimiter = whitespace\n"
            "default = categorical\n"
            "column.7 = ignore\n"
        )
    print(f"wrote {path}")


def write_wdbc(data_dir):
    path = os.path.join(data_dir, "wdbc.data")
    try:
        from sklearn.datasets import load_breast_cancer
    except ImportError:
        print("wdbc: scikit-learn unavailable, skipping", file=sys.stderr)
        return False
    bunch = load_breast_cancer()
    with open(path, "w") as out:
        for i, (row, target) in enumerate(zip(bunch.data, bunch.target), start=1):
            # sklearn target 0 is malignant; UCI diagnosis column uses M/B.
            diagnosis = "M" if target == 0 else "B"
            values = ",".join(repr(float(v)) for v in row)
            out.write(f"{842000 + i},{diagnosis},{values}\n")
    with open(os.path.join(data_dir, "wdbc.schema"), "w") as out:
        out.write(
            "# wdbc columns: id diagnosis f1..f30\n"
            "label_column = 1\n"
            "positive_label = M\n"
            "negative_label = B\n"
            "delimiter = comma\n"
            "column.0 = ignore\n"
        )
    print(f"wrote {path}")
    return True


UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

DOWNLOADS = {
    "bcw": (
        f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
        "# bcw columns: id f1..f9 class(2=benign 4=malignant)\n"
        "label_column = 10\n"
        "positive_label = 4\n"
        "negative_label = 2\n"
        "delimiter = comma\n"
        "column.0 = ignore\n",
    ),
    "transfusion": (
        f"{UCI}/blood-transfusion/transfusion.data",
        "# transfusion columns: recency frequency monetary time donated\n"
        "label_column = 4\n"
        "positive_label = 1\n"
        "negative_label = 0\n"
        "delimiter = comma\n"
        "header = 1\n",
    ),
}


def download(data_dir, name):
    url, schema = DOWNLOADS[name]
    path = os.path.join(data_dir, f"{name}.data")
    if os.path.exists(path):
        print(f"{path} already present")
        return True
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            body = resp.read()
    except Exception as err:
        print(f"{name}: download failed ({err})", file=sys.stderr)
        return False
    with open(path, "wb") as out:
        out.write(body)
    with open(os.path.join(data_dir, f"{name}.schema"), "w") as out:
        out.write(schema)
    print(f"wrote {path}")
    return True


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    data_dir = os.path.abspath(args.data_dir)
    os.makedirs(data_dir, exist_ok=True)

    for problem in (1, 2, 3):
        write_monks(data_dir, problem)
    write_wdbc(data_dir)

    missing = [name for name in DOWNLOADS if not download(data_dir, name)]
    if missing:
        print(
            "\nstill missing (need network access to archive.ics.uci.edu): "
            + ", ".join(sorted(missing)),
            file=sys.stderr,
        )
        print("experiments referencing these datasets will report the gap", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
