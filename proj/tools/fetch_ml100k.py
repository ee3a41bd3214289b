#!/usr/bin/env python3
"""Materialize MovieLens-100K as data/ml-100k/u.data (tab-separated).

grouplens.org is the canonical source. When it is unreachable, the ratings
table bundled in the pytorch-widedeep wheel is used instead; it is the same
100,000-row u.data table stored as parquet.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS, timeout=15) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def read_wheel(wheel):
    import pandas as pd

    blob = zipfile.ZipFile(wheel).read(WHEEL_MEMBER)
    df = pd.read_parquet(io.BytesIO(blob))
    lines = (f"{u}\t{i}\t{r}\t{t}\n" for u, i, r, t in
             df[["user_id", "movie_id", "rating", "timestamp"]].itertuples(index=False))
    return "".join(lines).encode()


def from_wheel():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "pytorch-widedeep==1.7.0", "-d", tmp],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("pytorch_widedeep-*.whl"))
        return read_wheel(wheel)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent
                                         / "data" / "ml-100k" / "u.data"))
    ap.add_argument("--wheel", help="already-downloaded pytorch-widedeep wheel")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    if out.exists():
        print(f"{out} already present")
        return
    if args.wheel:
        data = read_wheel(args.wheel)
    else:
        try:
            data = from_grouplens()
        except Exception as err:  # network unavailable
            print(f"grouplens download failed ({err}); using wheel copy", file=sys.stderr)
            data = from_wheel()
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    count = data.count(b"\n")
    print(f"wrote {out} ({count} ratings)")


if __name__ == "__main__":
    main()
