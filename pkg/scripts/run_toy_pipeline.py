"""Run the bundled toy experiment end to end and print the score gap
between the augmented pipeline (strategy 4) and the bare linker.

Usage:  python3 scripts/run_toy_pipeline.py [OUT_DIR]

Everything is offline (mock provider, overlap linker) and bit-reproducible;
rerunning into the same directory changes no artifact bytes.
"""

from __future__ import annotations

import sys
from pathlib import Path

from llmael import cli
from llmael.evaluation import accuracy, fmt2
from llmael.io import load_dataset, load_predictions

REPO = Path(__file__).resolve().parent.parent
CONFIG = REPO / "data" / "toy" / "config.yaml"


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else REPO / "out" / "toy"
    for argv in (
        ["run", "--config", str(CONFIG), "--out", str(out)],
        ["link", "--config", str(CONFIG), "--out", str(out), "--raw"],
        ["eval", "--config", str(CONFIG), "--out", str(out),
         "--pred", f"toy={out / 'toy.pred-baseline-raw.jsonl'}"],
        ["buckets", "--config", str(CONFIG), "--out", str(out),
         "--pred", f"toy={out / 'toy.pred-baseline-s4.jsonl'}"],
    ):
        status = cli.main(argv)
        if status != 0:
            return status

    corpus = load_dataset(CONFIG.parent / "corpus.jsonl", name="toy")
    augmented = accuracy(load_predictions(out / "toy.pred-baseline-s4.jsonl"), corpus)
    bare = accuracy(load_predictions(out / "toy.pred-baseline-raw.jsonl"), corpus)
    print()
    print(f"augmented (strategy 4): {fmt2(augmented)}")
    print(f"no augmentation:        {fmt2(bare)}")
    print(f"gap:                    +{fmt2(augmented - bare)}")
    print(f"artifacts in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
