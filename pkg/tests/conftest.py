import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from advemoji.bench import Example
from advemoji.fixtures import (build_pretrain_corpus, fixture_dataset,
                               fixture_train_corpus)
from advemoji.lexicon import (SequenceSpaceConfig, default_lexicon,
                              load_lexicon)
from advemoji.oracles import Oracle, Prediction, train_baseline
from advemoji.policy import Policy, TrainConfig, rl_train, supervised_pretrain

TOY_LEXICON_JSONL = "\n".join([
    '{"surface": "😀", "kind": "unicode_emoji", "sentiment": "positive"}',
    '{"surface": "😢", "kind": "unicode_emoji", "sentiment": "negative"}',
    '{"surface": ":)", "kind": "ascii_emoticon", "sentiment": "positive"}',
    '{"surface": "😐", "kind": "unicode_emoji", "sentiment": "neutral"}',
])


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def toy_lexicon():
    return load_lexicon(TOY_LEXICON_JSONL)


@pytest.fixture(scope="session")
def baseline(lexicon):
    return train_baseline(fixture_train_corpus(), lexicon=lexicon)


@pytest.fixture(scope="session")
def dataset():
    return fixture_dataset()


@pytest.fixture(scope="session")
def examples(dataset):
    return [Example(id=r["id"], text=r["text"], label=r["label"])
            for r in dataset]


@pytest.fixture(scope="session")
def space():
    return SequenceSpaceConfig(1, 4)


def train_fixture_policy(lexicon, dataset, baseline, space, seed,
                         rl_epochs=30):
    policy = Policy(lexicon, space)
    corpus = build_pretrain_corpus(
        lexicon, dataset, space, seed=seed,
        usage_texts=[t for t, _ in fixture_train_corpus()])
    supervised_pretrain(policy, corpus,
                        TrainConfig(epochs=15, learning_rate=2.0, seed=seed))
    rl_train(policy, [(r["text"], r["label"]) for r in dataset], baseline,
             TrainConfig(epochs=rl_epochs, learning_rate=10.0, seed=seed,
                         alpha_reward=1.0, beta_reward=0.02, smooth_k=5))
    return policy


@pytest.fixture(scope="session")
def trained_policy(lexicon, dataset, baseline, space):
    return train_fixture_policy(lexicon, dataset, baseline, space, seed=7)


class ToyOracle(Oracle):
    """Deterministic classifier with ironic emoji associations.

    Words carry the base sentiment; ":)" pushes the score negative and the
    neutral face pushes it positive, so sentiment-consistent affixes can
    flip it. Token ids follow the toy lexicon (😀, 😢, :), 😐).
    """

    name = "toy"
    labels = ("negative", "positive")

    def _predict(self, text):
        score = (2.0 * text.count("good") + 1.0 * text.count("fine")
                 - 2.0 * text.count("bad"))
        score += (0.6 * text.count("😀") - 0.6 * text.count("😢")
                  + 0.9 * text.count("😐") - 1.1 * text.count(":)"))
        p_pos = 1.0 / (1.0 + math.exp(-score))
        probs = {"positive": p_pos, "negative": 1.0 - p_pos}
        label = min(self.labels, key=lambda c: (-probs[c], c))
        return Prediction(label=label, probs=probs).validate()


DROP_CONNECTION = object()


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        n = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(n)) if n else {}
        self.server.last_headers = dict(self.headers)
        result = self.server.respond(self.path, body)
        if result is DROP_CONNECTION:
            self.connection.close()
            return
        status, payload = result
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class FixtureServer:
    """In-process HTTP server with a programmable per-request responder."""

    def __init__(self, respond):
        self._srv = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._srv.respond = respond
        self._srv.last_headers = {}
        self._thread = threading.Thread(target=self._srv.serve_forever,
                                        daemon=True)
        self._thread.start()
        self.url = f"http://127.0.0.1:{self._srv.server_address[1]}"

    @property
    def last_headers(self):
        return self._srv.last_headers

    def close(self):
        self._srv.shutdown()
        self._srv.server_close()


@pytest.fixture
def fixture_server():
    servers = []

    def start(respond):
        srv = FixtureServer(respond)
        servers.append(srv)
        return srv

    yield start
    for srv in servers:
        srv.close()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
