"""Synchronous two-level FedAvg pipeline over pluggable learners.

One global round runs ``local_rounds`` cycles of client training plus
sample-weighted local aggregation inside every cluster, then one
sample-weighted global aggregation across clusters, then an evaluation of
the new global model. Two learners share this engine:

* ``SyntheticCurveLearner`` leaves model weights untouched and produces
  accuracy from a deterministic parametric curve over the active clients'
  data. It makes orchestration scenarios fast and fully controllable.
* ``LinearClassifierLearner`` trains a multinomial logistic model with
  mini-batch gradient descent on seeded Gaussian-blob data realized from
  each client's class counts, giving a genuine end-to-end aggregation path.

Everything is deterministic given the seeds: client order is fixed by
sorting ids and all randomness is derived from stable per-node, per-round
seed material.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import HflConfiguration
from .errors import (
    DimensionMismatch,
    EmptyCluster,
    EmptyInput,
    LearnerFailure,
)
from .topology import DataProfile, NodeId, Topology


@dataclass(frozen=True)
class ModelVector:
    """Dense, finite, read-only weight vector."""

    weights: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise DimensionMismatch("model vector must have dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise LearnerFailure("model vector contains non-finite weights")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def dimension(self) -> int:
        return int(self.weights.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModelVector) and np.array_equal(
            self.weights, other.weights
        )


@dataclass(frozen=True)
class TrainingParams:
    """Hyperparameters for local training; the seed feeds batch shuffling."""

    local_epochs: int
    local_rounds: int
    learning_rate: float
    batch_size: int
    seed: int

    def __post_init__(self):
        if self.local_epochs < 1:
            raise ValueError("local_epochs must be >= 1")
        if self.local_rounds < 1:
            raise ValueError("local_rounds must be >= 1")
        # A zero rate is allowed: it turns local training into a null update.
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def fedavg(models: Sequence[tuple[ModelVector, int]]) -> ModelVector:
    """Sample-count-weighted mean of model vectors."""
    if not models:
        raise EmptyInput("fedavg needs at least one model")
    dimension = models[0][0].dimension
    total = 0
    for model, count in models:
        if model.dimension != dimension:
            raise DimensionMismatch(
                f"model dimensions differ: {model.dimension} != {dimension}"
            )
        total += count
    if total < 1:
        raise EmptyInput("fedavg needs a positive total sample count")
    stacked = np.stack([m.weights for m, _ in models])
    weights = np.array([count for _, count in models], dtype=np.float64)
    return ModelVector(np.average(stacked, axis=0, weights=weights))


# --- synthetic curve learner ----------------------------------------------------


@dataclass(frozen=True)
class SyntheticCurveParams:
    """Parameters of the closed-form accuracy curve.

    accuracy(r) = base_offset + log_gain * ln(r)
                  + data_volume_gain * ln(total active samples)
                  + coverage_gain * (covered classes / num_classes)
                  + noise,
    clamped to [0, 1]. Noise is Gaussian, drawn from a generator seeded by
    (seed, round), so the curve is reproducible and independent of call order.
    """

    base_offset: float
    log_gain: float
    data_volume_gain: float = 0.0
    coverage_gain: float = 0.0
    noise_std: float = 0.0
    seed: int = 0
    num_classes: int = 10

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")


def synthetic_accuracy(
    params: SyntheticCurveParams,
    round_index: int,
    active_profiles: Iterable[DataProfile],
) -> float:
    if round_index < 1:
        raise ValueError("round_index must be >= 1")
    profiles = list(active_profiles)
    total_samples = sum(p.total_samples for p in profiles)
    covered: set[int] = set()
    for profile in profiles:
        covered.update(profile.classes)
    value = params.base_offset + params.log_gain * np.log(round_index)
    if total_samples > 0:
        value += params.data_volume_gain * np.log(total_samples)
    value += params.coverage_gain * (len(covered) / params.num_classes)
    if params.noise_std > 0:
        rng = np.random.default_rng([params.seed, round_index])
        value += rng.normal(0.0, params.noise_std)
    return float(min(1.0, max(0.0, value)))


class SyntheticCurveLearner:
    """Curve-driven learner; weights pass through training untouched.

    When any trigger node is among the active clients, the shifted parameter
    set replaces the base one. Scenarios use this to encode how a set of
    joining nodes changes the learning behavior, and a revert that removes
    those nodes restores the base curve.
    """

    def __init__(
        self,
        params: SyntheticCurveParams,
        shifted: Optional[SyntheticCurveParams] = None,
        shift_triggers: Iterable[NodeId] = (),
    ):
        self.params = params
        self.shifted = shifted
        self.shift_triggers = frozenset(shift_triggers)

    def initial_model(self) -> ModelVector:
        return ModelVector(np.zeros(4))

    def active_params(self, active_clients: Iterable[NodeId]) -> SyntheticCurveParams:
        if self.shifted is not None and self.shift_triggers.intersection(active_clients):
            return self.shifted
        return self.params

    def train_local(
        self,
        model: ModelVector,
        node_id: NodeId,
        profile: DataProfile,
        training: TrainingParams,
        *,
        round_index: int = 1,
        local_round: int = 1,
    ) -> ModelVector:
        return model

    def evaluate(
        self,
        model: ModelVector,
        round_index: int,
        active_clients: Sequence[NodeId],
        profiles: Sequence[DataProfile],
    ) -> float:
        params = self.active_params(active_clients)
        return synthetic_accuracy(params, round_index, profiles)


# --- multinomial logistic learner ------------------------------------------------


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), int class indices

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2:
            raise DimensionMismatch("features must be a 2-D array")
        if features.shape[0] != labels.shape[0]:
            raise DimensionMismatch("features and labels disagree on sample count")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])


def _split_model(model: ModelVector, num_features: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat vector -> (class weight matrix, class bias vector)."""
    per_class = num_features + 1
    if model.dimension % per_class != 0:
        raise DimensionMismatch(
            f"model dimension {model.dimension} incompatible with "
            f"{num_features} features"
        )
    num_classes = model.dimension // per_class
    flat = model.weights
    matrix = flat[: num_classes * num_features].reshape(num_classes, num_features)
    bias = flat[num_classes * num_features :]
    return matrix, bias


def _logits(model: ModelVector, features: np.ndarray) -> np.ndarray:
    matrix, bias = _split_model(model, features.shape[1])
    return features @ matrix.T + bias


def softmax_loss_and_grad(
    model: ModelVector, dataset: LabeledDataset
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of the softmax classifier and its flat gradient."""
    if dataset.size == 0:
        raise EmptyInput("dataset is empty")
    logits = _logits(model, dataset.features)
    logits = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = dataset.size
    loss = float(-np.mean(np.log(probs[np.arange(n), dataset.labels] + 1e-300)))
    delta = probs
    delta[np.arange(n), dataset.labels] -= 1.0
    delta /= n
    grad_matrix = delta.T @ dataset.features
    grad_bias = delta.sum(axis=0)
    return loss, np.concatenate([grad_matrix.ravel(), grad_bias])


def evaluate_global(model: ModelVector, dataset: LabeledDataset) -> float:
    """Classification accuracy of the model on a held-out labeled set."""
    if dataset.size == 0:
        raise EmptyInput("evaluation set is empty")
    predictions = np.argmax(_logits(model, dataset.features), axis=1)
    return float(np.mean(predictions == dataset.labels))


def _node_entropy(node_id: NodeId) -> int:
    # Stable across runs and platforms, unlike hash().
    return zlib.crc32(node_id.encode("utf-8"))


class LinearClassifierLearner:
    """Multinomial logistic regression over seeded Gaussian-blob data.

    Class means are drawn once from the learner seed; each client's local
    dataset is realized from its data profile with a seed derived from the
    node id, so the same node always sees the same samples. Evaluation uses
    one global held-out set balanced across all classes.
    """

    def __init__(
        self,
        num_features: int,
        num_classes: int,
        class_separation: float = 4.0,
        within_class_std: float = 1.0,
        eval_samples_per_class: int = 40,
        seed: int = 0,
    ):
        if num_features < 1 or num_classes < 2:
            raise ValueError("need num_features >= 1 and num_classes >= 2")
        self.num_features = num_features
        self.num_classes = num_classes
        self.within_class_std = float(within_class_std)
        self.seed = seed
        rng = np.random.default_rng([seed, 0x5EED])
        self.class_means = (
            rng.normal(0.0, 1.0, size=(num_classes, num_features)) * class_separation
        )
        self._eval_set = self._sample(
            {c: eval_samples_per_class for c in range(num_classes)},
            np.random.default_rng([seed, 0xE7A1]),
        )
        self._client_cache: dict[NodeId, LabeledDataset] = {}

    def _sample(self, class_counts, rng: np.random.Generator) -> LabeledDataset:
        features = []
        labels = []
        for cls in sorted(class_counts):
            count = class_counts[cls]
            if count <= 0:
                continue
            if cls >= self.num_classes:
                raise DimensionMismatch(
                    f"class {cls} outside the {self.num_classes}-class universe"
                )
            features.append(
                self.class_means[cls]
                + rng.normal(0.0, self.within_class_std, size=(count, self.num_features))
            )
            labels.append(np.full(count, cls, dtype=np.int64))
        return LabeledDataset(np.concatenate(features), np.concatenate(labels))

    @property
    def eval_set(self) -> LabeledDataset:
        return self._eval_set

    def client_dataset(self, node_id: NodeId, profile: DataProfile) -> LabeledDataset:
        if node_id not in self._client_cache:
            rng = np.random.default_rng([self.seed, _node_entropy(node_id)])
            self._client_cache[node_id] = self._sample(profile.class_counts, rng)
        return self._client_cache[node_id]

    def initial_model(self) -> ModelVector:
        return ModelVector(np.zeros(self.num_classes * (self.num_features + 1)))

    def train_local(
        self,
        model: ModelVector,
        node_id: NodeId,
        profile: DataProfile,
        training: TrainingParams,
        *,
        round_index: int = 1,
        local_round: int = 1,
    ) -> ModelVector:
        """Mini-batch gradient descent for ``local_epochs`` passes."""
        dataset = self.client_dataset(node_id, profile)
        rng = np.random.default_rng(
            [training.seed, _node_entropy(node_id), round_index, local_round]
        )
        weights = model.weights.copy()
        n = dataset.size
        for _ in range(training.local_epochs):
            order = rng.permutation(n)
            for start in range(0, n, training.batch_size):
                batch = order[start : start + training.batch_size]
                _, grad = softmax_loss_and_grad(
                    ModelVector(weights),
                    LabeledDataset(dataset.features[batch], dataset.labels[batch]),
                )
                if not np.all(np.isfinite(grad)):
                    raise LearnerFailure(
                        f"non-finite gradient while training {node_id!r}"
                    )
                weights = weights - training.learning_rate * grad
                if not np.all(np.isfinite(weights)):
                    raise LearnerFailure(
                        f"non-finite weights while training {node_id!r}"
                    )
        return ModelVector(weights)

    def evaluate(
        self,
        model: ModelVector,
        round_index: int,
        active_clients: Sequence[NodeId],
        profiles: Sequence[DataProfile],
    ) -> float:
        return evaluate_global(model, self._eval_set)


# --- global round ----------------------------------------------------------------


def run_global_round(
    model: ModelVector,
    config: HflConfiguration,
    topology: Topology,
    training: TrainingParams,
    learner,
    round_index: int,
) -> tuple[ModelVector, float]:
    """Execute one global round and return (new global model, accuracy).

    Within each cluster, every local round trains all clients from the
    cluster model and aggregates them sample-weighted; afterwards the GA
    aggregates cluster models weighted by their clients' total samples.
    Clients are visited in sorted id order, which pins the floating-point
    summation order and keeps runs reproducible.
    """
    if not config.clusters:
        raise EmptyCluster("configuration has no clusters")
    cluster_models: list[tuple[ModelVector, int]] = []
    for la in sorted(config.clusters):
        members = sorted(config.clusters[la])
        if not members:
            raise EmptyCluster(f"cluster of {la!r} has no clients")
        cluster_model = model
        cluster_samples = 0
        for local_round in range(1, training.local_rounds + 1):
            updates = []
            for client in members:
                profile = topology.profile(client)
                trained = learner.train_local(
                    cluster_model,
                    client,
                    profile,
                    training,
                    round_index=round_index,
                    local_round=local_round,
                )
                updates.append((trained, profile.total_samples))
            cluster_model = fedavg(updates)
            cluster_samples = sum(count for _, count in updates)
        cluster_models.append((cluster_model, cluster_samples))
    new_global = fedavg(cluster_models)
    active_clients = sorted(config.clients())
    profiles = [topology.profile(client) for client in active_clients]
    accuracy = learner.evaluate(new_global, round_index, active_clients, profiles)
    return new_global, float(accuracy)
