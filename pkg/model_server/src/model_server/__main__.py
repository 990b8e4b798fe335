"""Serve a sentiment checkpoint: python -m model_server --model PATH."""

import argparse
import sys

import uvicorn

from .app import create_app
from .config import ServerConfig
from .inference import SentimentModel


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="model-server")
    ap.add_argument("--model", required=True,
                    help="hub identifier or local checkpoint directory")
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8300)
    ap.add_argument("--max-body-bytes", type=int, default=65536)
    args = ap.parse_args(argv)

    config = ServerConfig(model=args.model, device=args.device,
                          host=args.host, port=args.port,
                          max_body_bytes=args.max_body_bytes)
    try:
        model = SentimentModel(config.model, config.device)
    except Exception as e:  # fail fast, before the port binds
        print(f"fatal: could not load model {config.model!r}: {e}",
              file=sys.stderr)
        return 1
    print(f"serving {model.model_id} (labels: {', '.join(model.labels)}) "
          f"on {config.host}:{config.port}")
    uvicorn.run(create_app(config, model), host=config.host,
                port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
