#!/usr/bin/env python3
"""Write the small benchmark datasets in LIBSVM format.

Sources are the UCI files bundled in the `keel_ds` wheel (fetched with pip):
  diabetes  <- pima.dat   (768 x 8, tested_positive -> +1)
  german    <- german.dat (1000 x 20 raw Statlog attributes; categorical codes
                           are one-hot encoded, good credit (1) -> +1)
fourclass has no redistributable copy on the package index; drop the LIBSVM
file at data/fourclass to enable that benchmark.
"""
import argparse
import glob
import os
import subprocess
import sys
import tempfile
import zipfile


def fetch_wheel(workdir):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                    "-d", workdir, "keel_ds==0.2.5"], check=True)
    return glob.glob(os.path.join(workdir, "keel_ds-*.whl"))[0]


def write_libsvm(path, rows):
    with open(path, "w") as f:
        for label, feats in rows:
            parts = ["+1" if label > 0 else "-1"]
            parts += [f"{i}:{v:g}" for i, v in feats]
            f.write(" ".join(parts) + "\n")


def convert_pima(text):
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        cols = [c.strip() for c in line.split(",")]
        label = 1 if cols[-1] == "tested_positive" else -1
        rows.append((label, [(i + 1, float(v)) for i, v in enumerate(cols[:-1])]))
    return rows


def convert_german(text):
    records = [[c.strip() for c in line.split(",")]
               for line in text.splitlines() if line.strip()]
    n_attr = len(records[0]) - 1
    # Column layout: numeric columns keep one slot, categorical columns get
    # one slot per observed code (sorted).
    layout = []
    next_index = 1
    for j in range(n_attr):
        values = sorted({r[j] for r in records})
        if all(v.startswith("A") for v in values):
            slots = {v: next_index + k for k, v in enumerate(values)}
            next_index += len(values)
            layout.append(("cat", slots))
        else:
            layout.append(("num", next_index))
            next_index += 1
    rows = []
    for r in records:
        feats = []
        for j, (kind, info) in enumerate(layout):
            if kind == "num":
                feats.append((info, float(r[j])))
            else:
                # only the active indicator is stored
                feats.append((info[r[j]], 1.0))
        label = 1 if r[-1] == "1" else -1
        rows.append((label, feats))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--wheel", help="path to an already downloaded keel_ds wheel")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        z = zipfile.ZipFile(wheel)
        pima = z.read("keel_ds/data/balanced/raw/pima.dat").decode()
        german = z.read("keel_ds/data/balanced/raw/german.dat").decode()
    write_libsvm(os.path.join(args.out, "diabetes"), convert_pima(pima))
    write_libsvm(os.path.join(args.out, "german"), convert_german(german))


if __name__ == "__main__":
    main()
