"""Training jobs: fit, gate on exported-model accuracy, export."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.neural_network import MLPClassifier

from .datasets import load_dataset
from .exporting import (
    fixtures_document,
    forest_document,
    mlp_document,
    predict,
    write_json,
)

N_FIXTURES = 100
MIN_ACCURACY = 0.9


class TrainingFailed(RuntimeError):
    """The exported model missed the accuracy gate."""


@dataclass
class TrainingJob:
    dataset: str = "moons"  # moons | digits
    model_kind: str = "mlp"  # mlp | tree_ensemble
    hidden: tuple = (48, 24)
    n_trees: int = 60
    binarize_threshold: float | None = None
    seed: int = 0
    output_dir: str = "models"
    name: str | None = None

    def resolved_name(self) -> str:
        if self.name:
            return self.name
        parts = [self.dataset, self.model_kind]
        if self.binarize_threshold is not None:
            parts.append(f"b{self.binarize_threshold:g}".replace(".", ""))
        return "_".join(parts)


def _fit(job: TrainingJob, x_train, y_train):
    if job.model_kind == "mlp":
        clf = MLPClassifier(
            hidden_layer_sizes=job.hidden,
            activation="relu",
            learning_rate_init=0.01,
            max_iter=2000,
            random_state=job.seed,
        )
        clf.fit(x_train, y_train)
        return clf
    if job.model_kind == "tree_ensemble":
        features = x_train
        if job.binarize_threshold is not None:
            features = (x_train > job.binarize_threshold).astype(np.float64)
        clf = RandomForestClassifier(
            n_estimators=job.n_trees,
            criterion="gini",
            max_features="sqrt",
            random_state=job.seed,
            n_jobs=1,
        )
        clf.fit(features, y_train)
        return clf
    raise ValueError(f"unknown model kind {job.model_kind!r}; use mlp|tree_ensemble")


def train_and_export(job: TrainingJob):
    """Train, evaluate the exported document, and write model plus
    fixtures files.

    Returns (model_path, fixtures_path, test_accuracy). Accuracy is
    measured with the exported document's own semantics; a job whose
    artifact scores below 0.9 fails loudly instead of shipping.
    """
    x_train, x_test, y_train, y_test, input_dim, n_classes = load_dataset(job.dataset, job.seed)
    clf = _fit(job, x_train, y_train)
    if job.model_kind == "mlp":
        doc = mlp_document(clf, input_dim, n_classes)
    else:
        doc = forest_document(clf, input_dim, n_classes, job.binarize_threshold)

    accuracy = float(np.mean(predict(doc, x_test) == y_test))
    if accuracy < MIN_ACCURACY:
        raise TrainingFailed(
            f"{job.resolved_name()}: exported accuracy {accuracy:.3f} is below "
            f"{MIN_ACCURACY} on {job.dataset} "
            f"(n_test={len(y_test)}, kind={job.model_kind}, seed={job.seed})"
        )

    name = job.resolved_name()
    outdir = Path(job.output_dir)
    model_path = write_json(outdir / f"{name}.model.json", doc)
    fixtures = fixtures_document(doc, x_test[:N_FIXTURES])
    fixtures_path = write_json(outdir / f"{name}.fixtures.json", fixtures)
    return model_path, fixtures_path, accuracy
