#!/usr/bin/env python3
"""Write a 5000-image MNIST subset as IDX files.

The subset comes from the mnist_5k.csv.gz file bundled in the mlxtend wheel
(500 images per class, drawn from the original MNIST training set). Images are
shuffled with a fixed seed and split into 4000 train / 1000 test images.

    python3 tools/make_mnist_subset.py --out data/mnist
"""

import argparse
import glob
import gzip
import io
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np


def fetch_csv(wheel_dir):
    wheels = glob.glob(os.path.join(wheel_dir, "mlxtend-*.whl"))
    if not wheels:
        subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                               "-d", wheel_dir, "mlxtend==0.24.0"])
        wheels = glob.glob(os.path.join(wheel_dir, "mlxtend-*.whl"))
    with zipfile.ZipFile(wheels[0]) as z:
        return gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, images.shape[0], 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, labels.shape[0]))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/mnist")
    ap.add_argument("--wheel-dir", default=None)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--test", type=int, default=1000)
    args = ap.parse_args()

    wheel_dir = args.wheel_dir or tempfile.mkdtemp()
    table = np.loadtxt(io.BytesIO(fetch_csv(wheel_dir)), delimiter=",")
    pixels = table[:, :-1]
    labels = table[:, -1].astype(np.int64)
    assert pixels.shape == (5000, 784) and pixels.min() >= 0 and pixels.max() <= 255

    order = np.random.default_rng(args.seed).permutation(len(labels))
    pixels, labels = pixels[order], labels[order]
    n_test = args.test

    os.makedirs(args.out, exist_ok=True)
    write_idx_images(os.path.join(args.out, "train-images-idx3-ubyte"), pixels[n_test:])
    write_idx_labels(os.path.join(args.out, "train-labels-idx1-ubyte"), labels[n_test:])
    write_idx_images(os.path.join(args.out, "t10k-images-idx3-ubyte"), pixels[:n_test])
    write_idx_labels(os.path.join(args.out, "t10k-labels-idx1-ubyte"), labels[:n_test])
    print(f"wrote {len(labels) - n_test} train / {n_test} test images to {args.out}")


if __name__ == "__main__":
    main()
