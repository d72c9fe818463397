#!/usr/bin/env python3
"""Convert the USPS digit data to the CSV layout read by `maxprob`.

Output: a header row `label,p0,...,p255`, then one row per image with the digit
(0-9) in column 0 and the 256 pixel values after it.

Accepted inputs (any number, concatenated in the order given):
  * LIBSVM files `usps` / `usps.t`, optionally `.bz2`; labels 1..10 map to 0..9.
  * An HDF5 file with `train/data`, `train/target`, `test/data`, `test/target`
    (needs h5py).

Example:
  python3 scripts/usps_to_csv.py usps.bz2 usps.t.bz2 -o usps.csv
  maxprob experiment --input usps.csv --has-header --label-col 0 \
      --positive-label 0 --train-size 3100 --records rec.csv --aggregate agg.csv
"""

import argparse
import bz2
import csv
import sys

PIXELS = 256


def read_libsvm(path):
    opener = bz2.open if path.endswith(".bz2") else open
    with opener(path, "rt") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            label = int(float(parts[0])) - 1
            row = [0.0] * PIXELS
            for item in parts[1:]:
                idx, val = item.split(":")
                row[int(idx) - 1] = float(val)
            yield label, row


def read_h5(path):
    import h5py

    with h5py.File(path, "r") as fh:
        for part in ("train", "test"):
            data = fh[part]["data"][:]
            target = fh[part]["target"][:]
            for x, y in zip(data, target):
                yield int(y), [float(v) for v in x.reshape(-1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args()

    count = 0
    with open(args.output, "w", newline="") as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["label"] + [f"p{k}" for k in range(PIXELS)])
        for path in args.inputs:
            rows = read_h5(path) if path.endswith((".h5", ".hdf5")) else read_libsvm(path)
            for label, pixels in rows:
                if len(pixels) != PIXELS or not 0 <= label <= 9:
                    sys.exit(f"{path}: unexpected record (label {label}, {len(pixels)} pixels)")
                w.writerow([label] + [repr(v) for v in pixels])
                count += 1
    print(f"wrote {count} rows to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
