#!/usr/bin/env python3
"""Fetch the UCI Census Income ("Adult") dataset and write data/adult.csv.

The library itself never downloads anything; run this once before the
census experiments or the data-dependent acceptance tests:

    python3 scripts/fetch_data.py [--out data/adult.csv]

Both the train and test partitions are downloaded and concatenated (the
experiment harness re-splits 10% off as a test set itself). Label tokens in
the test partition carry a trailing period that is stripped here, and the
original files have no header row, so one is added.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import urllib.request

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult"
FILES = ("adult.data", "adult.test")

HEADER = (
    "age,workclass,fnlwgt,education,education-num,marital-status,occupation,"
    "relationship,race,sex,capital-gain,capital-loss,hours-per-week,"
    "native-country,income"
)
N_COLUMNS = len(HEADER.split(","))


def clean_lines(text: str) -> list[str]:
    """Normalize raw census lines: strip whitespace, drop comment/blank lines,
    remove the trailing period on test-partition labels."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != N_COLUMNS:
            continue
        fields[-1] = fields[-1].rstrip(".")
        out.append(",".join(fields))
    return out


def fetch(url: str) -> str:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return io.TextIOWrapper(resp, encoding="utf-8", errors="replace").read()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/adult.csv")
    args = parser.parse_args(argv)

    rows: list[str] = []
    for name in FILES:
        url = f"{BASE}/{name}"
        print(f"downloading {url} ...")
        try:
            rows.extend(clean_lines(fetch(url)))
        except OSError as exc:
            print(f"error: could not download {url}: {exc}", file=sys.stderr)
            return 1

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
