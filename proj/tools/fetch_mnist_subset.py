#!/usr/bin/env python3
# Copyright 2026 The sarahnc Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the 5000-example MNIST training subset shipped with mlxtend as IDX files.

The subset holds 500 images per digit, raw 0-255 pixels, label in the last
CSV column. Without --wheel the mlxtend wheel is fetched with pip.
"""

import argparse
import gzip
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

WHEEL_VERSION = "0.24.0"
MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
ROWS = COLS = 28


def fetch_wheel(dest: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-d", str(dest),
         f"mlxtend=={WHEEL_VERSION}"],
        check=True)
    return next(dest.glob("mlxtend-*.whl"))


def read_rows(wheel: pathlib.Path):
    with zipfile.ZipFile(wheel) as z:
        text = gzip.decompress(z.read(MEMBER)).decode("ascii")
    images, labels = [], []
    for line in text.strip().splitlines():
        values = [int(v) for v in line.split(",")]
        if len(values) != ROWS * COLS + 1:
            raise ValueError(f"unexpected row width {len(values)}")
        images.append(bytes(values[:-1]))
        labels.append(values[-1])
    return images, labels


def write_idx(out: pathlib.Path, images, labels) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), ROWS, COLS))
        for img in images:
            f.write(img)
    with open(out / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wheel", type=pathlib.Path, help="local mlxtend wheel")
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist5k"))
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(pathlib.Path(tmp))
        images, labels = read_rows(wheel)
    write_idx(args.out, images, labels)
    print(f"wrote {len(images)} examples to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
