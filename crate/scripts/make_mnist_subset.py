#!/usr/bin/env python3
"""Build a small MNIST subset in the standard gzipped IDX layout.

The 5000-image MNIST sample bundled with the `mlxtend` wheel (500 images per
class) is shuffled with a fixed seed and split 400/100 per class into
train-*/t10k-* files. Usage:

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 scripts/make_mnist_subset.py /tmp/mlx/mlxtend-*.whl data/mnist
"""
import gzip
import io
import struct
import sys
import zipfile

import numpy as np


def write_idx_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    wheel, out = sys.argv[1], sys.argv[2]
    with zipfile.ZipFile(wheel) as z:
        raw = z.read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(io.TextIOWrapper(gzip.open(io.BytesIO(raw))), delimiter=",")
    images, labels = table[:, :-1], table[:, -1].astype(int)

    rng = np.random.default_rng(0)
    train_idx, test_idx = [], []
    for k in range(10):
        idx = np.flatnonzero(labels == k)
        rng.shuffle(idx)
        train_idx.extend(idx[:400])
        test_idx.extend(idx[400:])
    train_idx = rng.permutation(train_idx)
    test_idx = rng.permutation(test_idx)

    for prefix, idx in (("train", train_idx), ("t10k", test_idx)):
        write_idx_images(f"{out}/{prefix}-images-idx3-ubyte.gz", images[idx])
        write_idx_labels(f"{out}/{prefix}-labels-idx1-ubyte.gz", labels[idx])
        print(prefix, len(idx))


if __name__ == "__main__":
    main()
