"""Regenerate the golden CLI outputs: ``python tests/regen_goldens.py``.

Only run this after an intentional change to the output; commit the diff.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import CONFIGS, GOLDEN, GOLDEN_CASES, golden_path  # noqa: E402

from effaction.cli import main  # noqa: E402


def regenerate() -> int:
    GOLDEN.mkdir(exist_ok=True)
    for stem, command in GOLDEN_CASES:
        target = golden_path(stem, command)
        code = main([command, "--config", str(CONFIGS / f"{stem}.ini"), "--out", str(target)])
        print(f"{target.name}: exit {code}")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(regenerate())
