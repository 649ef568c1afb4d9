"""Python bindings for the agentosi simulator and its offline verifier."""

import json

from . import _agentosi
from ._agentosi import Error, identity

__all__ = [
    "Error",
    "bench",
    "canonicalize",
    "check_vectors",
    "default_config",
    "identity",
    "run_session",
    "sha256",
    "verify",
]


def _overlay(config):
    return "" if config is None else json.dumps(config)


def default_config():
    return json.loads(_agentosi.default_config())


def run_session(workload="light", mode="agentosi", seed=42, config=None):
    return json.loads(_agentosi.run_session(_overlay(config), workload, mode, seed))


def bench(sections=("cost", "latency", "throughput"), config=None, out_dir=None):
    return json.loads(_agentosi.bench(_overlay(config), list(sections), "" if out_dir is None else str(out_dir)))


def verify(root):
    return _agentosi.verify(str(root))


def sha256(data):
    if isinstance(data, str):
        data = data.encode()
    return _agentosi.sha256(bytes(data))


def canonicalize(value):
    return _agentosi.canonicalize(json.dumps(value, allow_nan=False))


def check_vectors(doc):
    return _agentosi.check_vectors(json.dumps(doc))
