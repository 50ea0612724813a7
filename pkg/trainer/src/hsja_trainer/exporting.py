"""Conversion of fitted scikit-learn models into the portable JSON
model format, plus reference predictors for the exported documents.

The exported artifact is the contract: trees become explicit node
arrays (node 0 is the root, traversal goes left when the possibly
binarized feature value is <= threshold), MLPs become logit-producing
dense layers. Fixture labels and the accuracy gate are computed with
the reference predictors below, i.e. the semantics of the document
rather than of the scikit-learn estimator, so a loader on the other
side must agree with them bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def mlp_document(clf, input_dim: int, n_classes: int) -> dict:
    """Export an MLPClassifier as logit layers.

    scikit-learn's binary MLP ends in a single logistic unit; that
    column is widened to two logits (0, z) so argmax reproduces the
    0.5-probability decision.
    """
    if clf.activation != "relu":
        raise ValueError(f"only relu hidden activations export, got {clf.activation!r}")
    layers = []
    n_layers = len(clf.coefs_)
    for i, (weights, bias) in enumerate(zip(clf.coefs_, clf.intercepts_)):
        weights = np.asarray(weights.T, dtype=np.float64)  # (out, in)
        bias = np.asarray(bias, dtype=np.float64)
        last = i == n_layers - 1
        if last and n_classes == 2 and weights.shape[0] == 1:
            weights = np.vstack([np.zeros_like(weights), weights])
            bias = np.concatenate([[0.0], bias])
        layers.append(
            {
                "weights": [[float(v) for v in row] for row in weights],
                "bias": [float(v) for v in bias],
                "activation": "identity" if last else "relu",
            }
        )
    return {
        "type": "mlp",
        "input_dim": int(input_dim),
        "n_classes": int(n_classes),
        "layers": layers,
    }


def forest_document(clf, input_dim: int, n_classes: int, binarize_threshold) -> dict:
    """Export a RandomForestClassifier as explicit node arrays."""
    trees = []
    for estimator in clf.estimators_:
        tree = estimator.tree_
        nodes = []
        for i in range(tree.node_count):
            if tree.children_left[i] == -1:
                label = int(np.argmax(tree.value[i][0]))
                nodes.append({"leaf": int(clf.classes_[label])})
            else:
                nodes.append(
                    {
                        "feature": int(tree.feature[i]),
                        "threshold": float(tree.threshold[i]),
                        "left": int(tree.children_left[i]),
                        "right": int(tree.children_right[i]),
                    }
                )
        trees.append({"nodes": nodes})
    return {
        "type": "tree_ensemble",
        "input_dim": int(input_dim),
        "n_classes": int(n_classes),
        "binarize_threshold": None if binarize_threshold is None else float(binarize_threshold),
        "trees": trees,
    }


# ---------------------------------------------------------------------------
# Reference predictors (document semantics)
# ---------------------------------------------------------------------------


def mlp_predict(doc: dict, xs) -> np.ndarray:
    h = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    for layer in doc["layers"]:
        h = h @ np.asarray(layer["weights"], dtype=np.float64).T + np.asarray(
            layer["bias"], dtype=np.float64
        )
        if layer["activation"] == "relu":
            h = np.maximum(h, 0.0)
    return np.argmax(h, axis=1).astype(np.int64)


def _traverse(nodes, x) -> int:
    node = nodes[0]
    while "leaf" not in node:
        node = nodes[node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]]
    return node["leaf"]


def forest_predict(doc: dict, xs) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    threshold = doc["binarize_threshold"]
    if threshold is not None:
        xs = (xs > threshold).astype(np.float64)
    out = np.empty(xs.shape[0], dtype=np.int64)
    for row, x in enumerate(xs):
        votes = np.zeros(doc["n_classes"], dtype=np.int64)
        for tree in doc["trees"]:
            votes[_traverse(tree["nodes"], x)] += 1
        out[row] = int(np.argmax(votes))  # ties break toward the smaller label
    return out


def predict(doc: dict, xs) -> np.ndarray:
    return mlp_predict(doc, xs) if doc["type"] == "mlp" else forest_predict(doc, xs)


def fixtures_document(doc: dict, xs) -> dict:
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    return {
        "inputs": [[float(v) for v in row] for row in xs],
        "labels": [int(v) for v in predict(doc, xs)],
    }


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
