"""Validate fused training files (produced by `llmael make-train`) and write
a fine-tuning manifest for the wrapped model's own training tooling.

This is a documented utility, not part of the serving path: each wrapped
model ships its own trainer, and this script only checks that the fused
dataset files are structurally sound and summarizes them.

Usage:
  python3 scripts/prepare_finetune.py OUT_MANIFEST train.fused.jsonl [dev.fused.jsonl ...]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REQUIRED = ("doc_id", "context", "start", "length", "surface", "gold_entity_id")


def check_file(path: Path) -> dict:
    mentions = 0
    fallbacks = 0
    strategies: set[int] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            for key in REQUIRED:
                if key not in record:
                    raise SystemExit(f"{path}:{line_no}: missing field {key!r}")
            span = record["context"][record["start"] : record["start"] + record["length"]]
            if span.lower() != record["surface"].lower():
                raise SystemExit(f"{path}:{line_no}: span does not match surface")
            mentions += 1
            fallbacks += bool(record.get("fallback_applied"))
            if "strategy_id" in record:
                strategies.add(int(record["strategy_id"]))
    if mentions == 0:
        raise SystemExit(f"{path}: no records")
    return {
        "path": str(path),
        "mentions": mentions,
        "fallback_applied": fallbacks,
        "strategy_ids": sorted(strategies),
    }


def main() -> int:
    if len(sys.argv) < 3:
        print(__doc__)
        return 2
    manifest_path = Path(sys.argv[1])
    files = [check_file(Path(p)) for p in sys.argv[2:]]
    manifest = {"splits": files, "total_mentions": sum(f["mentions"] for f in files)}
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {manifest_path} covering {manifest['total_mentions']} mentions")
    return 0


if __name__ == "__main__":
    sys.exit(main())
