#!/usr/bin/env python3
"""Regenerate the golden trace files under tests/golden/.

Run this only after a deliberate model change, and review the diff.
"""
from pathlib import Path

from semsim import Kernel
from semsim.cli import standard_rules
from semsim.models import build_cardio

GOLDEN_DIR = Path(__file__).parent.parent / "tests" / "golden"


def main():
    world = build_cardio()
    kernel = Kernel(world, seed=0)
    standard_rules(kernel)
    kernel.run(50)
    path = GOLDEN_DIR / "cardio_seed0_50ticks.txt"
    path.write_text(
        "".join(f"{e.step:4d}  {e.line}\n" for e in kernel.trace), encoding="utf-8"
    )
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
