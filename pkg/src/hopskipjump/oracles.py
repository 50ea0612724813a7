"""Classifiers, decision objectives, and the query-counted oracle.

Three classifier families are provided: analytic binary classifiers
with closed-form scores and gradients (used to verify the estimator
and convergence properties against ground truth), serialized models
(small MLPs and binarize+tree ensembles loaded from JSON), and a
region-based majority-vote wrapper that randomizes the effective
decision boundary.

The ``QueryingOracle`` is the only channel between an attack and a
model: every decision evaluation increments its counter by exactly
one, and a configured cap turns further evaluations into a typed
budget-exhausted signal.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError, ModelLoadError, QueryBudgetExceededError
from .geometry import as_sample, clip_to_domain
from .rng import RngStream

MODEL_SCHEMA_VERSION = 1


class Classifier:
    """Base class: maps a sample in R^d to a label in {0..n_classes-1}."""

    input_dim: int
    n_classes: int

    def classify(self, x) -> int:
        raise NotImplementedError

    def classify_batch(self, xs: np.ndarray) -> np.ndarray:
        """Default row-by-row batch path; subclasses vectorize."""
        return np.array([self.classify(row) for row in np.atleast_2d(xs)], dtype=np.int64)

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = as_sample(x)
        if x.shape[0] != self.input_dim:
            raise InvalidInputError(
                f"input has dimension {x.shape[0]}, model expects {self.input_dim}"
            )
        return x


# ---------------------------------------------------------------------------
# Analytic binary classifiers
# ---------------------------------------------------------------------------


class AnalyticModel(Classifier):
    """Binary classifier defined by a smooth score s(x).

    Label is 1 where s(x) > 0 and 0 otherwise (exact zeros fall on the
    non-positive side so ties are deterministic). Subclasses expose the
    exact gradient of s and a Lipschitz constant for that gradient on
    the unit cube; the attack itself never touches either, but the
    estimator verification does.
    """

    n_classes = 2
    lipschitz: float

    def score(self, x) -> float:
        return float(self.score_batch(np.atleast_2d(self._check_dim(x)))[0])

    def score_batch(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def classify(self, x) -> int:
        return int(self.score(x) > 0.0)

    def classify_batch(self, xs: np.ndarray) -> np.ndarray:
        return (self.score_batch(np.atleast_2d(np.asarray(xs, dtype=np.float64))) > 0.0).astype(
            np.int64
        )


class Hyperplane(AnalyticModel):
    """s(x) = <w, x> + b. Gradient w everywhere, Lipschitz constant 0."""

    def __init__(self, w, b: float):
        self.w = as_sample(w)
        self.b = float(b)
        self.input_dim = self.w.shape[0]
        self.lipschitz = 0.0

    def score_batch(self, xs):
        return np.asarray(xs, dtype=np.float64) @ self.w + self.b

    def gradient(self, x):
        self._check_dim(x)
        return self.w.copy()


class SphereBoundary(AnalyticModel):
    """s(x) = r^2 - ||x - center||^2: positive inside the sphere."""

    def __init__(self, center, radius: float):
        self.center = as_sample(center)
        if radius <= 0:
            raise InvalidInputError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        self.input_dim = self.center.shape[0]
        self.lipschitz = 2.0

    def score_batch(self, xs):
        diff = np.asarray(xs, dtype=np.float64) - self.center
        return self.radius**2 - np.sum(diff * diff, axis=1)

    def gradient(self, x):
        x = self._check_dim(x)
        return -2.0 * (x - self.center)


class QuadraticBoundary(AnalyticModel):
    """s(x) = x' A x + <w, x> + b with symmetric A.

    Gradient 2Ax + w; its Lipschitz constant is twice the largest
    absolute eigenvalue of A.
    """

    def __init__(self, a, w, b: float):
        self.a = np.asarray(a, dtype=np.float64)
        self.w = as_sample(w)
        self.b = float(b)
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise InvalidInputError(f"A must be square, got shape {self.a.shape}")
        if self.a.shape[0] != self.w.shape[0]:
            raise InvalidInputError("A and w dimensions disagree")
        if not np.allclose(self.a, self.a.T, atol=1e-12):
            raise InvalidInputError("A must be symmetric")
        self.input_dim = self.w.shape[0]
        self.lipschitz = 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(self.a))))

    def score_batch(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        return np.einsum("ni,ij,nj->n", xs, self.a, xs) + xs @ self.w + self.b

    def gradient(self, x):
        x = self._check_dim(x)
        return 2.0 * (self.a @ x) + self.w


# ---------------------------------------------------------------------------
# Serialized models
# ---------------------------------------------------------------------------

_ACTIVATIONS = ("relu", "identity")


@dataclass
class MlpLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str


class MlpModel(Classifier):
    """Dense feed-forward net; final-layer outputs are logits (argmax)."""

    def __init__(self, layers: list[MlpLayer], input_dim: int, n_classes: int):
        self.layers = layers
        self.input_dim = int(input_dim)
        self.n_classes = int(n_classes)

    def forward(self, xs: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        for layer in self.layers:
            h = h @ layer.weights.T + layer.bias
            if layer.activation == "relu":
                h = np.maximum(h, 0.0)
        return h

    def classify(self, x) -> int:
        return int(np.argmax(self.forward(self._check_dim(x))[0]))

    def classify_batch(self, xs):
        return np.argmax(self.forward(xs), axis=1).astype(np.int64)


class TreeEnsembleModel(Classifier):
    """Optional input binarization followed by a majority vote of trees.

    Nodes are (feature, threshold, left, right) tuples or leaf labels;
    traversal goes left when the (possibly binarized) feature value is
    <= threshold. Vote ties break toward the smaller label index.
    """

    def __init__(self, trees, input_dim: int, n_classes: int, binarize_threshold: float | None):
        self.trees = trees  # list of node lists; node = ("leaf", label) | ("split", f, thr, l, r)
        self.input_dim = int(input_dim)
        self.n_classes = int(n_classes)
        self.binarize_threshold = binarize_threshold

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        if self.binarize_threshold is None:
            return x
        return (x > self.binarize_threshold).astype(np.float64)

    def _traverse(self, nodes, x: np.ndarray) -> int:
        index = 0
        for _ in range(len(nodes) + 1):
            node = nodes[index]
            if node[0] == "leaf":
                return node[1]
            _, feature, threshold, left, right = node
            index = left if x[feature] <= threshold else right
        raise ModelLoadError("tree traversal did not reach a leaf (cycle in nodes)")

    def classify(self, x) -> int:
        x = self._prepare(self._check_dim(x))
        votes = np.zeros(self.n_classes, dtype=np.int64)
        for nodes in self.trees:
            votes[self._traverse(nodes, x)] += 1
        return int(np.argmax(votes))  # argmax returns the first max: smaller label wins ties


# ---------------------------------------------------------------------------
# Region-based (majority vote over noisy copies) wrapper
# ---------------------------------------------------------------------------


class RegionBasedWrapper(Classifier):
    """Classify by majority vote over uniformly perturbed copies.

    Each evaluation draws ``n_votes`` offsets uniform in
    [-noise_radius, +noise_radius]^d, adds them to the input, clips to
    the unit cube, and returns the modal base label (ties toward the
    smaller label). Holds its own random stream; confine one instance
    to one worker.
    """

    def __init__(self, base: Classifier, noise_radius: float, n_votes: int, rng: RngStream):
        if noise_radius <= 0:
            raise InvalidInputError(f"noise_radius must be positive, got {noise_radius}")
        if n_votes < 1:
            raise InvalidInputError(f"n_votes must be >= 1, got {n_votes}")
        self.base = base
        self.noise_radius = float(noise_radius)
        self.n_votes = int(n_votes)
        self.input_dim = base.input_dim
        self.n_classes = base.n_classes
        self._gen = rng.generator()

    def _vote(self, labels: np.ndarray) -> np.ndarray:
        counts = np.zeros((labels.shape[0], self.n_classes), dtype=np.int64)
        for row, lab in enumerate(labels):
            counts[row] = np.bincount(lab, minlength=self.n_classes)
        return np.argmax(counts, axis=1).astype(np.int64)

    def classify(self, x) -> int:
        return int(self.classify_batch(np.atleast_2d(self._check_dim(x)))[0])

    def classify_batch(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        n, d = xs.shape
        noise = self._gen.uniform(-self.noise_radius, self.noise_radius, size=(n, self.n_votes, d))
        probes = clip_to_domain(xs[:, None, :] + noise).reshape(n * self.n_votes, d)
        labels = self.base.classify_batch(probes).reshape(n, self.n_votes)
        return self._vote(labels)


def region_based_classify(wrapper: RegionBasedWrapper, x) -> int:
    """Majority-vote label of ``x`` under the wrapper's noise model."""
    return wrapper.classify(x)


# ---------------------------------------------------------------------------
# Objective and query accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttackObjective:
    """Success predicate over perturbed samples.

    Untargeted: success iff the classifier's label differs from the
    original label. Targeted: success iff the label equals the target.
    """

    classifier: Classifier
    original_label: int
    target_label: int | None = None

    def __post_init__(self):
        if self.target_label is not None and self.target_label == self.original_label:
            raise InvalidInputError("target label must differ from the original label")

    @property
    def targeted(self) -> bool:
        return self.target_label is not None

    @classmethod
    def untargeted(cls, classifier: Classifier, x_star) -> "AttackObjective":
        """Objective for flipping the model's own label at ``x_star``."""
        return cls(classifier, classifier.classify(x_star))

    @classmethod
    def targeted_to(cls, classifier: Classifier, x_star, target_label: int) -> "AttackObjective":
        return cls(classifier, classifier.classify(x_star), int(target_label))

    def success(self, x) -> bool:
        label = self.classifier.classify(x)
        if self.targeted:
            return label == self.target_label
        return label != self.original_label

    def success_batch(self, xs: np.ndarray) -> np.ndarray:
        labels = self.classifier.classify_batch(xs)
        if self.targeted:
            return labels == self.target_label
        return labels != self.original_label


class QueryingOracle:
    """Decision oracle with exact query accounting.

    Every decision evaluation (probe, binary-search midpoint, step
    trial, initialization check) costs exactly one query. Once the
    counter reaches the cap, further evaluations raise
    ``QueryBudgetExceededError`` without consuming anything. The
    check-and-increment is atomic, so batched probe evaluations may be
    dispatched to concurrent workers.
    """

    def __init__(self, objective: AttackObjective, query_cap: int | None = None):
        if query_cap is not None and query_cap < 0:
            raise InvalidInputError(f"query_cap must be >= 0, got {query_cap}")
        self.objective = objective
        self.query_cap = query_cap
        self._count = 0
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._count

    def remaining(self) -> int | None:
        """Queries left under the cap, or None when unlimited."""
        if self.query_cap is None:
            return None
        with self._lock:
            return self.query_cap - self._count

    def _reserve(self, n: int) -> None:
        with self._lock:
            if self.query_cap is not None and self._count + n > self.query_cap:
                raise QueryBudgetExceededError(
                    f"query budget exhausted ({self._count}/{self.query_cap} used, {n} requested)"
                )
            self._count += n

    def decision(self, x) -> bool:
        """phi(x) as a Boolean; consumes one query."""
        self._reserve(1)
        return self.objective.success(x)

    def decision_batch(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized decisions; consumes one query per row, atomically."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        self._reserve(xs.shape[0])
        return self.objective.success_batch(xs)


class BudgetedOracleView:
    """A per-run budget laid over an oracle's (optional) hard cap.

    Attacks wrap the caller's oracle in this view so ``max_queries``
    from the run configuration truncates at exactly the same points a
    hard oracle cap would, while sharing the underlying counter. The
    budget is measured from the moment the view is created.
    """

    def __init__(self, oracle: QueryingOracle, budget: int | None):
        self._oracle = oracle
        self._budget = budget
        self._start = oracle.query_count

    @property
    def objective(self) -> AttackObjective:
        return self._oracle.objective

    @property
    def query_count(self) -> int:
        return self._oracle.query_count

    def spent(self) -> int:
        return self._oracle.query_count - self._start

    def remaining(self) -> int | None:
        left = self._oracle.remaining()
        if self._budget is not None:
            budget_left = self._budget - self.spent()
            left = budget_left if left is None else min(left, budget_left)
        return left

    def _check(self, n: int) -> None:
        if self._budget is not None and self.spent() + n > self._budget:
            raise QueryBudgetExceededError(
                f"attack budget exhausted ({self.spent()}/{self._budget} used, {n} requested)"
            )

    def decision(self, x) -> bool:
        self._check(1)
        return self._oracle.decision(x)

    def decision_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        self._check(xs.shape[0])
        return self._oracle.decision_batch(xs)


def decision(oracle: QueryingOracle, x) -> bool:
    """Module-level alias for ``oracle.decision``."""
    return oracle.decision(x)


def classify(model: Classifier, x) -> int:
    """Label of ``x`` under ``model``; no query accounting."""
    return model.classify(x)


def tree_ensemble_predict(model: TreeEnsembleModel, x) -> int:
    """Binarize (if configured), traverse every tree, majority-vote."""
    return model.classify(x)


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ModelLoadError(f"missing field {where}.{key}")
    return mapping[key]


def _load_mlp(doc: dict) -> MlpModel:
    input_dim = _require(doc, "input_dim", "model")
    n_classes = _require(doc, "n_classes", "model")
    raw_layers = _require(doc, "layers", "model")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelLoadError("model.layers must be a non-empty list")
    layers = []
    width = int(input_dim)
    for i, raw in enumerate(raw_layers):
        where = f"layers[{i}]"
        weights = np.asarray(_require(raw, "weights", where), dtype=np.float64)
        bias = np.asarray(_require(raw, "bias", where), dtype=np.float64)
        activation = _require(raw, "activation", where)
        if weights.ndim != 2:
            raise ModelLoadError(f"{where}.weights must be a 2-D matrix")
        if weights.shape[1] != width:
            raise ModelLoadError(
                f"{where}.weights has {weights.shape[1]} inputs, expected {width}"
            )
        if bias.ndim != 1 or bias.shape[0] != weights.shape[0]:
            raise ModelLoadError(
                f"{where}.bias has length {bias.shape[0] if bias.ndim == 1 else bias.shape},"
                f" expected {weights.shape[0]}"
            )
        if activation not in _ACTIVATIONS:
            raise ModelLoadError(f"{where}.activation {activation!r} unknown; use relu|identity")
        layers.append(MlpLayer(weights, bias, activation))
        width = weights.shape[0]
    if width != int(n_classes):
        raise ModelLoadError(f"final layer width {width} != n_classes {n_classes}")
    return MlpModel(layers, int(input_dim), int(n_classes))


def _load_tree(raw_nodes, input_dim: int, n_classes: int, where: str):
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ModelLoadError(f"{where}.nodes must be a non-empty list")
    nodes = []
    for j, raw in enumerate(raw_nodes):
        node_where = f"{where}.nodes[{j}]"
        if "leaf" in raw:
            label = int(raw["leaf"])
            if not 0 <= label < n_classes:
                raise ModelLoadError(f"{node_where}.leaf label {label} out of range")
            nodes.append(("leaf", label))
            continue
        feature = int(_require(raw, "feature", node_where))
        threshold = float(_require(raw, "threshold", node_where))
        left = int(_require(raw, "left", node_where))
        right = int(_require(raw, "right", node_where))
        if not 0 <= feature < input_dim:
            raise ModelLoadError(f"{node_where}.feature {feature} out of range")
        for side, child in (("left", left), ("right", right)):
            if not 0 <= child < len(raw_nodes):
                raise ModelLoadError(f"{node_where}.{side} child {child} is dangling")
            if child == j:
                raise ModelLoadError(f"{node_where}.{side} child points at itself")
        nodes.append(("split", feature, threshold, left, right))
    return nodes


def _load_tree_ensemble(doc: dict) -> TreeEnsembleModel:
    input_dim = int(_require(doc, "input_dim", "model"))
    n_classes = int(_require(doc, "n_classes", "model"))
    threshold = doc.get("binarize_threshold")
    if threshold is not None:
        threshold = float(threshold)
        if not 0.0 < threshold < 1.0:
            raise ModelLoadError(f"binarize_threshold {threshold} must lie in (0, 1)")
    raw_trees = _require(doc, "trees", "model")
    if not isinstance(raw_trees, list) or not raw_trees:
        raise ModelLoadError("model.trees must be a non-empty list")
    trees = [
        _load_tree(_require(raw, "nodes", f"trees[{i}]"), input_dim, n_classes, f"trees[{i}]")
        for i, raw in enumerate(raw_trees)
    ]
    return TreeEnsembleModel(trees, input_dim, n_classes, threshold)


def load_model_dict(doc: dict) -> Classifier:
    """Build a classifier from an already-parsed model document."""
    kind = _require(doc, "type", "model")
    if kind == "mlp":
        return _load_mlp(doc)
    if kind == "tree_ensemble":
        return _load_tree_ensemble(doc)
    raise ModelLoadError(f"model.type {kind!r} unknown; use mlp|tree_ensemble")


def load_model(path) -> Classifier:
    """Load an MLP or tree-ensemble model file (JSON, UTF-8)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ModelLoadError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"model file is not valid JSON: {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelLoadError("model file must contain a JSON object")
    return load_model_dict(doc)


def check_fixtures(model: Classifier, fixtures: dict) -> tuple[int, int]:
    """Compare model predictions against a fixtures document.

    Returns (matches, total). The fixtures file carries the trainer's
    own predicted labels for held-out inputs and is the cross-package
    load-verification contract.
    """
    inputs = _require(fixtures, "inputs", "fixtures")
    labels = _require(fixtures, "labels", "fixtures")
    if len(inputs) != len(labels):
        raise ModelLoadError("fixtures.inputs and fixtures.labels lengths differ")
    predicted = model.classify_batch(np.asarray(inputs, dtype=np.float64))
    matches = int(np.sum(predicted == np.asarray(labels, dtype=np.int64)))
    return matches, len(labels)
