"""Entry point: build the engine eagerly so bad checkpoints fail at startup."""

import sys

import uvicorn

from nli_service.app import create_app
from nli_service.config import ServiceConfig
from nli_service.engine import EngineError


def main() -> None:
    config = ServiceConfig.from_env()
    try:
        app = create_app(config)
    except EngineError as exc:
        print(f"nli-service startup failed: {exc}", file=sys.stderr)
        sys.exit(1)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
