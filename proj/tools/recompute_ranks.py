#!/usr/bin/env python3
"""Recompute the technique rank table from boxplot.csv and compare it with
what `xplain evaluate` wrote to ranks.json and printed to stdout.

Standard library only, and no code shared with the C++ implementation.
Exit status 0 when everything agrees, 1 otherwise.
"""

import argparse
import csv
import json
import re
import statistics
import sys
from collections import defaultdict

MODEL_TITLES = {"lr": "Logistic Regression", "gnb": "Naive Bayes"}


def average_ranks_descending(values):
    """Rank 1 for the largest value; tied values share the mean position."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def recompute(csv_path):
    scores = defaultdict(list)
    techniques = {}
    for row in csv.DictReader(open(csv_path, newline="")):
        scores[(row["model"], row["dataset"], row["technique"])].append(float(row["r"]))
        techniques.setdefault(row["model"], [])
        if row["technique"] not in techniques[row["model"]]:
            techniques[row["model"]].append(row["technique"])

    tables = {}
    for model, techs in techniques.items():
        datasets = sorted({d for (m, d, _) in scores if m == model})
        rows = {}
        for d in datasets:
            # Medians are compared at 12 decimals so summation noise cannot split a tie.
            medians = [round(statistics.median(scores[(model, d, t)]), 12) for t in techs]
            rows[d] = dict(zip(techs, average_ranks_descending(medians)))
        average = {t: statistics.fmean(rows[d][t] for d in datasets) for t in techs}
        spread = {t: statistics.pstdev([rows[d][t] for d in datasets]) for t in techs}
        tables[model] = {"techniques": techs, "rows": rows, "average": average, "stddev": spread}
    return tables


def compare_json(tables, ranks_path, problems):
    doc = json.load(open(ranks_path))
    for model, table in tables.items():
        emitted = doc["models"].get(model)
        if emitted is None:
            problems.append(f"{model}: missing from ranks.json")
            continue
        for row in emitted["datasets"]:
            mine = table["rows"].get(row["dataset"])
            if mine is None:
                problems.append(f"{model}/{row['dataset']}: not in boxplot.csv")
                continue
            for t, rank in row["ranks"].items():
                if abs(rank - mine[t]) > 1e-12:
                    problems.append(f"{model}/{row['dataset']}/{t}: json {rank} vs csv {mine[t]}")
        for t, value in emitted["average_ranks"].items():
            if abs(value - table["average"][t]) > 1e-12:
                problems.append(f"{model} average {t}: json {value} vs csv {table['average'][t]}")


def compare_stdout(tables, stdout_path, problems):
    lines = open(stdout_path).read().splitlines()
    models = [m for m in ("lr", "gnb") if m in tables and any(MODEL_TITLES[m] in l for l in lines)]
    printed = {}
    for line in lines:
        match = re.match(r"^(\S.*?)\s+((?:-?\d+\.\d+|-)(?:\s+(?:-?\d+\.\d+|-))*)\s*$", line)
        if match:
            printed[match.group(1).strip()] = match.group(2).split()

    def check(label, expected_by_model):
        cells = printed.get(label)
        if cells is None:
            problems.append(f"stdout: no row '{label}'")
            return
        expected = []
        for m in models:
            expected += expected_by_model(m)
        if cells != expected:
            problems.append(f"stdout row '{label}': printed {cells} vs csv {expected}")

    datasets = sorted({d for t in tables.values() for d in t["rows"]})
    for d in datasets:
        check(d, lambda m: [f"{tables[m]['rows'][d][t]:.2f}" if d in tables[m]["rows"] else "-"
                            for t in tables[m]["techniques"]])
    check("Average Rank", lambda m: [f"{tables[m]['average'][t]:.2f}" for t in tables[m]["techniques"]])
    check("Standard Deviation", lambda m: [f"{tables[m]['stddev'][t]:.2f}" for t in tables[m]["techniques"]])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", help="output directory of an evaluate run")
    parser.add_argument("--stdout", help="captured stdout of the same run")
    args = parser.parse_args()

    tables = recompute(f"{args.out_dir}/boxplot.csv")
    problems = []
    compare_json(tables, f"{args.out_dir}/ranks.json", problems)
    if args.stdout:
        compare_stdout(tables, args.stdout, problems)
    for p in problems:
        print(p)
    summary = ", ".join(f"{m}: {len(t['rows'])} datasets" for m, t in sorted(tables.items()))
    print(("rank table matches" if not problems else "rank table MISMATCH") + f" ({summary})")
    return 0 if not problems else 1


if __name__ == "__main__":
    sys.exit(main())
