"""Serve a wrapped linking model: python -m el_adapter --config demo/config.yaml"""

from __future__ import annotations

import argparse

import uvicorn

from .config import load_adapter_config
from .service import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="el-adapter")
    parser.add_argument("--config", required=True, help="adapter config (YAML)")
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)
    config = load_adapter_config(args.config)
    app = create_app(config, preload=False)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
