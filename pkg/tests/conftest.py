"""Shared fixtures and the acceptance-criteria summary lines."""

from __future__ import annotations

import pytest

from reminderbot.corpus.pipeline import run_pipeline, split
from reminderbot.corpus.synthetic import make_synthetic_raw
from reminderbot.entities.recognizer import EntityRecognizer
from reminderbot.graph.engine import build_matcher
from reminderbot.graph.loader import load_default_graph
from reminderbot.nn.buckets import BucketConfig
from reminderbot.nn.model import ModelConfig, build_model
from reminderbot.nn.train import TrainConfig, train
from reminderbot.nn.vocab import build_vocab

_ACCEPTANCE: dict[str, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(tag, title): tracked pass/fail criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker:
        tag, title = marker.args
        # a criterion backed by several tests passes only if all of them do
        _, so_far = _ACCEPTANCE.get(tag, (title, True))
        _ACCEPTANCE[tag] = (title, so_far and report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[tag]
        terminalreporter.write_line(f"{tag} {title}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def graph():
    return load_default_graph()


@pytest.fixture(scope="session")
def index(graph):
    return build_matcher(graph)


@pytest.fixture(scope="session")
def recognizer():
    return EntityRecognizer()


@pytest.fixture(scope="session")
def trained_model():
    """Fallback model fit on a pipeline-processed synthetic corpus.

    Shared by the simulation and service tests; training takes ~25s once
    per session.
    """
    raw = make_synthetic_raw(400, seed=11)
    _, pairs, _ = run_pipeline(raw)
    train_pairs, _ = split(pairs, 0.8, seed=1)
    token_pairs = [(p.context, p.target) for p in train_pairs]
    vocab = build_vocab(
        (toks for pair in token_pairs for toks in pair),
        min_freq=2,
        buffer_capacity=64,
    )
    model = build_model(ModelConfig(layers=1, hidden=64, emb_dim=32, seed=5), vocab)
    train(model, token_pairs, BucketConfig(), TrainConfig(epochs=10, seed=5))
    return model
