"""Command line entry: kgshim --config shim.json."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from kgshim.app import create_app
from kgshim.config import load_shim_config
from kgshim.errors import ShimError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kgshim", description="embedding + NLI inference shim")
    parser.add_argument("--config", required=True, help="path to the shim JSON config")
    args = parser.parse_args(argv)
    try:
        config = load_shim_config(args.config)
        app = create_app(config)
    except ShimError as exc:
        print(f"refusing to start: {exc}", file=sys.stderr)
        return 2
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
