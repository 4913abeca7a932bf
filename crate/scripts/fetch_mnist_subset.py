#!/usr/bin/env python3
"""Build the bundled 2000-image MNIST subset used by the test suite.

The 5000-sample MNIST extract shipped inside the `mlxtend` wheel is used as
the source (500 images per digit, sorted by label). The first 200 images of
each digit, in file order, are written as 28x28 binary PGM (P5, maxval 255)
files together with an index file `index.csv` (`images/<file>.pgm,<label>`).

Usage: python3 scripts/fetch_mnist_subset.py [OUT_DIR] [PER_CLASS]
"""
import glob
import gzip
import os
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_csv():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "mlxtend==0.24.0",
             "--no-deps", "-d", tmp, "-q"],
            check=True,
        )
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            return gzip.decompress(z.read(MEMBER)).decode()


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "data", "mnist-2k")
    per_class = int(sys.argv[2]) if len(sys.argv) > 2 else 200
    os.makedirs(os.path.join(out, "images"), exist_ok=True)
    taken = [0] * 10
    lines = ["# MNIST subset: first %d images per digit of the mlxtend mnist_5k extract" % per_class]
    for row in fetch_csv().splitlines():
        vals = [int(float(v)) for v in row.split(",")]
        pixels, label = vals[:-1], vals[-1]
        if taken[label] >= per_class:
            continue
        name = "images/d%d_%03d.pgm" % (label, taken[label])
        taken[label] += 1
        with open(os.path.join(out, name), "wb") as f:
            f.write(b"P5\n28 28\n255\n" + bytes(pixels))
        lines.append("%s,%d" % (name, label))
    with open(os.path.join(out, "index.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote %d images to %s" % (sum(taken), out))


if __name__ == "__main__":
    main()
