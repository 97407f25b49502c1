"""Plot entity-frequency bucket accuracies from one or more buckets.jsonl
files (as written by the `llmael buckets` command).

Usage:  python3 scripts/plot_buckets.py out/buckets.jsonl [more.jsonl ...] -o buckets.png
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load_rows(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("files", nargs="+", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=Path("buckets.png"))
    args = parser.parse_args()

    figure, axis = plt.subplots(figsize=(7, 4))
    for path in args.files:
        rows = sorted(load_rows(path), key=lambda r: r["exponent"])
        axis.plot(
            [r["exponent"] for r in rows],
            [r["accuracy"] for r in rows],
            marker="o",
            label=path.stem,
        )
        for row in rows:
            axis.annotate(
                f"{row['n_entities']}e/{row['n_mentions']}m",
                (row["exponent"], row["accuracy"]),
                textcoords="offset points",
                xytext=(0, 6),
                fontsize=7,
            )
    axis.set_xlabel("entity frequency bucket (log10 pagerank decade)")
    axis.set_ylabel("accuracy (%)")
    axis.set_ylim(-5, 105)
    axis.grid(True, alpha=0.3)
    axis.legend()
    figure.tight_layout()
    figure.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
