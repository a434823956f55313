"""Convert the digits bundled with the npm `mnist` package (v1.1.0) into IDX files.

The package stores 10,000 MNIST digits as pixel/255 rounded to three decimals,
which is enough precision to recover every original byte. The samples are
shuffled with a fixed seed and split 8000/2000 into train/test.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/mnist_from_npm.py package/src/digits data/mnist-10k
"""
import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np

TRAIN = 8000
SEED = 20190625


def write_images(path, images):
    n = images.shape[0]
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main(src, dst):
    src, dst = Path(src), Path(dst)
    images, labels = [], []
    for digit in range(10):
        data = np.array(json.loads((src / f"{digit}.json").read_text())["data"])
        pixels = np.round(data * 255.0).reshape(-1, 784)
        assert np.abs(data * 255.0 - np.round(data * 255.0)).max() < 0.5
        images.append(pixels)
        labels.append(np.full(len(pixels), digit))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(SEED).permutation(len(labels))
    images, labels = images[order], labels[order]

    dst.mkdir(parents=True, exist_ok=True)
    write_images(dst / "train-images-idx3-ubyte.gz", images[:TRAIN])
    write_labels(dst / "train-labels-idx1-ubyte.gz", labels[:TRAIN])
    write_images(dst / "t10k-images-idx3-ubyte.gz", images[TRAIN:])
    write_labels(dst / "t10k-labels-idx1-ubyte.gz", labels[TRAIN:])
    print(f"wrote {TRAIN} train / {len(labels) - TRAIN} test samples to {dst}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
