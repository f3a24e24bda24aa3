#!/usr/bin/env python3
"""Export the benchmark datasets used by the acceptance suite to data/*.csv.

iris, wine and wdbc come from scikit-learn's bundled copies of the UCI files
(raw, unscaled, original sample order). sonar comes from the KEEL copy shipped
inside the keel_ds wheel (values rounded to three decimals by KEEL).

Output format: header row "label,f1,...,fp", label first, one sample per row.

usage: export_datasets.py [--keel-wheel PATH] [--out DIR]
"""
import argparse
import csv
import pathlib
import zipfile

from sklearn import datasets


def write_csv(path, labels, rows):
    p = len(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + [f"f{i + 1}" for i in range(p)])
        for y, x in zip(labels, rows):
            w.writerow([y] + [repr(float(v)) for v in x])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--keel-wheel", help="path to keel_ds-*.whl (for sonar)")
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, loader in (("iris", datasets.load_iris),
                         ("wine", datasets.load_wine),
                         ("wdbc", datasets.load_breast_cancer)):
        d = loader()
        labels = [int(v) + 1 for v in d.target]
        if name == "wdbc":
            # UCI coding: M (malignant) / B (benign); sklearn uses 0 = malignant.
            labels = ["M" if v == 0 else "B" for v in d.target]
        write_csv(out / f"{name}.csv", labels, d.data.tolist())

    if args.keel_wheel:
        z = zipfile.ZipFile(args.keel_wheel)
        text = z.read("keel_ds/data/balanced/raw/sonar.dat").decode()
        labels, rows = [], []
        for line in text.splitlines():
            parts = [s.strip() for s in line.split(",") if s.strip()]
            if not parts:
                continue
            labels.append(parts[-1])
            rows.append([float(v) for v in parts[:-1]])
        write_csv(out / "sonar.csv", labels, rows)


if __name__ == "__main__":
    main()
