"""Shared fixtures: small graphs and JSON helpers used across the suite."""

import json

import numpy as np
import pytest

from sinhgordon.graph import Graph


@pytest.fixture
def unit_pair():
    """Two vertices, unit measure, one unit edge."""
    return Graph.from_edges(np.array([1.0, 1.0]), [(0, 1, 1.0)])


@pytest.fixture
def path3():
    """Three-vertex path, unit measure and weights."""
    return Graph.from_edges(np.ones(3), [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def weighted_path3():
    """Three-vertex path with mu = (1, 2, 1), weights (1, 3)."""
    return Graph.from_edges(np.array([1.0, 2.0, 1.0]),
                            [(0, 1, 1.0), (1, 2, 3.0)])


@pytest.fixture
def write_json(tmp_path):
    """Write a dict as JSON under tmp_path, return the path as a string."""

    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload, indent=1))
        return str(path)

    return _write


def pair_problem_dict(h_plus, h_minus, c, **extra):
    """Problem document on the two-vertex unit graph, flat JSON form."""
    doc = {
        "vertices": [{"id": "x1", "mu": 1.0}, {"id": "x2", "mu": 1.0}],
        "edges": [{"u": "x1", "v": "x2", "w": 1.0}],
        "c": c,
    }
    if h_plus is not None:
        doc["h_plus"] = {"x1": h_plus[0], "x2": h_plus[1]}
    if h_minus is not None:
        doc["h_minus"] = {"x1": h_minus[0], "x2": h_minus[1]}
    doc.update(extra)
    return doc


def threshold_problem_dict(c):
    """Three-vertex path instance with a solvability threshold in c < 0.

    h_plus changes sign with negative total mass and h_minus vanishes,
    so solutions exist only for c above an instance-specific cutoff
    near -0.61.
    """
    return {
        "vertices": [{"id": "a", "mu": 1.0}, {"id": "b", "mu": 1.0},
                     {"id": "c", "mu": 1.0}],
        "edges": [{"u": "a", "v": "b", "w": 1.0}, {"u": "b", "v": "c", "w": 1.0}],
        "h_plus": {"a": 0.5, "b": -4.0, "c": -4.0},
        "h_minus": {"a": 0.0, "b": 0.0, "c": 0.0},
        "c": c,
    }
