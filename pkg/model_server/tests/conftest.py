import pathlib
import subprocess
import sys
import threading
import time
from importlib import resources

import pytest
import uvicorn
from fastapi.testclient import TestClient

from model_server import ServerConfig, SentimentModel, create_app

SCRIPTS = pathlib.Path(__file__).resolve().parents[1] / "scripts"


def engine_data(name: str) -> str:
    """Path of a data file shipped with the attack engine (file interface)."""
    return str(resources.files("advemoji.data").joinpath(name))


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    """Build the tiny local sentiment checkpoint once per session."""
    out = tmp_path_factory.mktemp("ckpt") / "tiny-sentiment"
    subprocess.run(
        [sys.executable, str(SCRIPTS / "build_tiny_checkpoint.py"),
         "--corpus", engine_data("fixture_train.jsonl"),
         "--lexicon", engine_data("default_lexicon.jsonl"),
         "--out", str(out), "--seed", "0"],
        check=True, capture_output=True, text=True)
    return out


@pytest.fixture(scope="session")
def model(checkpoint):
    return SentimentModel(str(checkpoint))


@pytest.fixture(scope="session")
def config(checkpoint):
    return ServerConfig(model=str(checkpoint), max_body_bytes=4096)


@pytest.fixture(scope="session")
def client(config, model):
    return TestClient(create_app(config, model))


class LiveServer:
    def __init__(self, app):
        cfg = uvicorn.Config(app, host="127.0.0.1", port=0,
                             log_level="warning")
        self.server = uvicorn.Server(cfg)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.thread.start()
        deadline = time.time() + 15
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.05)
        sock = self.server.servers[0].sockets[0]
        self.url = "http://127.0.0.1:%d" % sock.getsockname()[1]

    def stop(self):
        self.server.should_exit = True
        self.thread.join(timeout=10)


@pytest.fixture(scope="session")
def live_server(config, model):
    srv = LiveServer(create_app(config, model))
    yield srv
    srv.stop()
