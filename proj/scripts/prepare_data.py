#!/usr/bin/env python3
"""One-time preparation of the benchmark inputs under data/.

Every output is a plain CSV (header row, label column last) or a standard
IDX pair, which is what the C++ loaders read.  Sources:

  iris     scikit-learn's bundled iris.csv (150 x 4, 3 classes)
  bcw      scikit-learn's bundled Wisconsin diagnostic breast-cancer table;
           the ten "mean" cell-nucleus measurements are kept (10 inputs,
           2 classes)
  mnist    a directory of per-digit JSON arrays (the `mnist` npm package,
           10,000 28x28 digits scaled to [0,1] with three decimals) or a
           pair of standard IDX files; written back out as IDX
  mhealth  the mHealth_subject*.log files of the MHEALTH release: 23 raw
           sensor channels per row plus the activity label (0 = null class,
           1..12 = activities), i.e. 23 features and 13 classes.  Rows are
           taken as-is, one sample per row; --mhealth-stride subsamples.

Usage:
  scripts/prepare_data.py --out data --iris --bcw \
      --mnist-json /path/to/mnist/package/src/digits
  scripts/prepare_data.py --out data --mhealth /path/to/MHEALTHDATASET
"""

import argparse
import csv
import glob
import json
import os
import struct
import sys


def sklearn_data_dir():
    import sklearn.datasets
    return os.path.join(os.path.dirname(sklearn.datasets.__file__), "data")


def prepare_iris(out_dir):
    src = os.path.join(sklearn_data_dir(), "iris.csv")
    names = ["setosa", "versicolor", "virginica"]
    with open(src) as f:
        rows = list(csv.reader(f))[1:]
    dst = os.path.join(out_dir, "iris.csv")
    with open(dst, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sepal_length", "sepal_width", "petal_length", "petal_width", "species"])
        for r in rows:
            w.writerow(r[:4] + [names[int(r[4])]])
    print(f"iris: {len(rows)} rows -> {dst}")


BCW_MEAN_FEATURES = [
    "radius", "texture", "perimeter", "area", "smoothness",
    "compactness", "concavity", "concave_points", "symmetry", "fractal_dimension",
]


def prepare_bcw(out_dir):
    src = os.path.join(sklearn_data_dir(), "breast_cancer.csv")
    with open(src) as f:
        rows = list(csv.reader(f))[1:]
    labels = ["malignant", "benign"]
    dst = os.path.join(out_dir, "bcw.csv")
    with open(dst, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BCW_MEAN_FEATURES + ["diagnosis"])
        for r in rows:
            w.writerow(r[:10] + [labels[int(r[30])]])
    print(f"bcw: {len(rows)} rows -> {dst}")


def write_idx(out_dir, images, labels):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(os.path.join(out_dir, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))
    print(f"mnist: {len(images)} images -> {out_dir}")


def prepare_mnist_json(out_dir, digits_dir):
    images, labels = [], []
    for digit in range(10):
        with open(os.path.join(digits_dir, f"{digit}.json")) as f:
            flat = json.load(f)["data"]
        if len(flat) % 784:
            sys.exit(f"{digit}.json: length {len(flat)} is not a multiple of 784")
        for k in range(len(flat) // 784):
            px = [min(255, max(0, round(v * 255))) for v in flat[k * 784:(k + 1) * 784]]
            images.append(px)
            labels.append(digit)
    write_idx(os.path.join(out_dir, "mnist"), images, labels)


def prepare_mhealth(out_dir, src_dir, stride):
    channels = [
        "chest_acc_x", "chest_acc_y", "chest_acc_z", "ecg_1", "ecg_2",
        "ankle_acc_x", "ankle_acc_y", "ankle_acc_z",
        "ankle_gyro_x", "ankle_gyro_y", "ankle_gyro_z",
        "ankle_mag_x", "ankle_mag_y", "ankle_mag_z",
        "arm_acc_x", "arm_acc_y", "arm_acc_z",
        "arm_gyro_x", "arm_gyro_y", "arm_gyro_z",
        "arm_mag_x", "arm_mag_y", "arm_mag_z",
    ]
    files = sorted(glob.glob(os.path.join(src_dir, "mHealth_subject*.log")))
    if not files:
        sys.exit(f"no mHealth_subject*.log files under {src_dir}")
    dst = os.path.join(out_dir, "mhealth.csv")
    n = 0
    with open(dst, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(channels + ["activity"])
        for path in files:
            with open(path) as src:
                for k, line in enumerate(src):
                    if k % stride:
                        continue
                    fields = line.split()
                    if len(fields) != 24:
                        continue
                    w.writerow(fields)
                    n += 1
    print(f"mhealth: {n} rows from {len(files)} files -> {dst}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="data")
    ap.add_argument("--iris", action="store_true")
    ap.add_argument("--bcw", action="store_true")
    ap.add_argument("--mnist-json", metavar="DIR")
    ap.add_argument("--mhealth", metavar="DIR")
    ap.add_argument("--mhealth-stride", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    if args.iris:
        prepare_iris(args.out)
    if args.bcw:
        prepare_bcw(args.out)
    if args.mnist_json:
        prepare_mnist_json(args.out, args.mnist_json)
    if args.mhealth:
        prepare_mhealth(args.out, args.mhealth, args.mhealth_stride)


if __name__ == "__main__":
    main()
