#!/usr/bin/env python3
"""Regenerate the committed operator-module fixtures.

Everything here is deterministic, so rerunning the script must reproduce
the committed files byte for byte (the test suite checks that).
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from hklab.module_io import (
    corrupt_module,
    dump_canonical,
    export_module,
    make_ladder_module,
    make_shifted_module,
    make_spin_module,
)
from hklab.quadforms import make_standard_space
from hklab.verbitsky import build_verbitsky

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    FIXTURE_DIR.mkdir(exist_ok=True)
    space = make_standard_space(4, [])
    alg = build_verbitsky(space, 1, seed=1)
    exported = export_module(alg, label="exported instance n=1 b2=4 seed=1")
    files = {
        "sh_module.json": exported,
        "corrupted_module.json": corrupt_module(exported),
        "ladder_module.json": make_ladder_module(),
        "shifted_module.json": make_shifted_module(alg),
        "spin_module.json": make_spin_module(2),
    }
    for name, obj in files.items():
        path = FIXTURE_DIR / name
        path.write_text(dump_canonical(obj), encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
