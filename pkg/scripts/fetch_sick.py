#!/usr/bin/env python3
"""Download the SICK corpus and place SICK.txt under data/.

The committed files under tests/data/ are small synthetic stand-ins so the
test suite runs offline; full-corpus experiments need the real file, which
this script fetches (network required). It verifies the expected split sizes
and prints the file's sha256 so runs are comparable across machines.
"""

import hashlib
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

SICK_ZIP_URL = "https://zenodo.org/record/2787612/files/SICK.zip"
EXPECTED_SPLITS = {"TRAIN": 4500, "TRIAL": 500, "TEST": 4927}


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "SICK.txt"

    print(f"downloading {SICK_ZIP_URL} ...")
    with urllib.request.urlopen(SICK_ZIP_URL) as resp:
        blob = resp.read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        names = [n for n in zf.namelist() if n.endswith("SICK.txt")]
        if not names:
            print(f"error: no SICK.txt inside the archive ({zf.namelist()})", file=sys.stderr)
            return 1
        text = zf.read(names[0])
    out_path.write_bytes(text)

    counts = {}
    lines = text.decode("utf-8").splitlines()
    header = lines[0].split("\t")
    split_col = header.index("SemEval_set")
    for line in lines[1:]:
        if not line.strip():
            continue
        split = line.split("\t")[split_col].strip().upper()
        counts[split] = counts.get(split, 0) + 1
    print(f"wrote {out_path} ({len(lines) - 1} rows)")
    print(f"sha256 {hashlib.sha256(text).hexdigest()}")
    for split, expected in EXPECTED_SPLITS.items():
        got = counts.get(split, 0)
        flag = "ok" if got == expected else f"EXPECTED {expected}"
        print(f"  {split:6s} {got:5d}  {flag}")
    if counts != EXPECTED_SPLITS:
        print("warning: split sizes differ from the published corpus", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
