"""Evaluation aggregates: accuracy, top-K cumulative reliability, buckets.

`tcr_k` sums a view's K largest class-similarity scores (raw logits, not
probabilities) — a proxy for how reliably the true label sits in the
candidate set. `bucket_report` groups classes by prior rank (rank 0 =
heaviest head) into contiguous buckets and summarizes accuracy, confidence
(max probability of the aggregated marginal) and Shannon entropy per
bucket, which is how head/tail effects are read off a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .entropy import EntropyMeasure, entropy_of, softmax
from .errors import InvalidInputError

if TYPE_CHECKING:
    from .pipeline import AdaptConfig, InstanceRecord


def tcr_k(similarities, k: int) -> float | np.ndarray:
    """Sum of the k largest entries over the last axis."""
    arr = np.asarray(similarities, dtype=np.float64)
    if arr.ndim == 0:
        raise InvalidInputError("similarities must be a vector")
    n = arr.shape[-1]
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must be in [1, {n}], got {k}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("similarities must be finite")
    out = np.partition(arr, n - k, axis=-1)[..., n - k:].sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def mean_tcr_selected(records, measure: EntropyMeasure, tau: float,
                      k: int) -> float:
    """Mean tcr_k over the views a measure would select, with no bias state.

    Each record's views are softmaxed raw, scored with `measure`, and the
    lowest-entropy max(1, floor(tau*N)) views keep their raw logit rows;
    the result is the grand mean of tcr_k over every selected view of every
    record.
    """
    from .pipeline import select_count, select_views

    if not 0.0 < tau <= 1.0:
        raise InvalidInputError("tau must lie in (0, 1]")
    values = []
    for record in records:
        probs = softmax(record.logits)
        ent = np.atleast_1d(entropy_of(measure, probs))
        chosen = select_views(ent, select_count(tau, len(ent)))
        values.append(np.atleast_1d(tcr_k(record.logits[chosen], k)))
    if not values:
        raise InvalidInputError("need at least one record")
    return float(np.concatenate(values).mean())


@dataclass(eq=False)
class BucketStats:
    """Aggregates over one contiguous prior-rank group of classes."""
    rank_lo: int
    rank_hi: int                      # inclusive
    count: int                        # instances grouped into the bucket
    accuracy: float | None            # over labeled instances, else None
    mean_confidence: float | None
    mean_entropy: float | None


@dataclass(eq=False)
class Report:
    """Aggregated outcome of one streamed run."""
    instances: int
    accuracy: float | None
    per_class_count: np.ndarray = field(repr=False)
    per_class_correct: np.ndarray = field(repr=False)
    per_class_mean_confidence: np.ndarray = field(repr=False)  # nan if empty
    per_class_mean_entropy: np.ndarray = field(repr=False)     # nan if empty
    bucket_summary: list[BucketStats] = field(repr=False)
    mean_tcr: dict[int, float] = field(repr=False)
    config_echo: "AdaptConfig | None" = field(repr=False, default=None)
    predictions: np.ndarray = field(repr=False, default=None)
    labels: np.ndarray = field(repr=False, default=None)  # -1 = unlabeled

    @property
    def num_classes(self) -> int:
        return len(self.per_class_count)


def _group_key(labels: np.ndarray, predictions: np.ndarray) -> np.ndarray:
    """Class an instance reports under: its label, else its prediction."""
    return np.where(labels >= 0, labels, predictions)


def bucket_report(labels, predictions, confidences, entropies, prior_rank,
                  n_buckets: int) -> list[BucketStats]:
    """Partition classes into contiguous rank groups and summarize each.

    `prior_rank[c]` is class c's rank (0 = largest prior). Buckets split the
    rank range as evenly as possible, earlier buckets taking the remainder.
    """
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    confidences = np.asarray(confidences, dtype=np.float64)
    entropies = np.asarray(entropies, dtype=np.float64)
    rank = np.asarray(prior_rank, dtype=np.int64)
    n_classes = rank.shape[0]
    if sorted(rank.tolist()) != list(range(n_classes)):
        raise InvalidInputError("prior_rank must be a permutation of [0, L)")
    if not 1 <= n_buckets <= n_classes:
        raise InvalidInputError("n_buckets must be in [1, L]")

    group = _group_key(labels, predictions)
    instance_rank = rank[group]
    rank_chunks = np.array_split(np.arange(n_classes), n_buckets)
    out = []
    for chunk in rank_chunks:
        lo, hi = int(chunk[0]), int(chunk[-1])
        in_bucket = (instance_rank >= lo) & (instance_rank <= hi)
        labeled = in_bucket & (labels >= 0)
        count = int(in_bucket.sum())
        accuracy = (float((predictions[labeled] == labels[labeled]).mean())
                    if labeled.any() else None)
        out.append(BucketStats(
            rank_lo=lo,
            rank_hi=hi,
            count=count,
            accuracy=accuracy,
            mean_confidence=float(confidences[in_bucket].mean()) if count else None,
            mean_entropy=float(entropies[in_bucket].mean()) if count else None,
        ))
    return out


def build_report(labels, predictions, confidences, entropies, num_classes,
                 prior_rank=None, n_buckets: int = 10, mean_tcr=None,
                 config=None) -> Report:
    """Assemble a Report from per-instance arrays.

    Instances are grouped by true label when present, else by predicted
    class; `correct` and accuracy count labeled instances only, so
    accuracy is exactly sum(correct) / sum(labeled).
    """
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    confidences = np.asarray(confidences, dtype=np.float64)
    entropies = np.asarray(entropies, dtype=np.float64)
    n = len(predictions)

    if num_classes == 0:
        return Report(
            instances=0, accuracy=None,
            per_class_count=np.zeros(0, np.int64),
            per_class_correct=np.zeros(0, np.int64),
            per_class_mean_confidence=np.zeros(0),
            per_class_mean_entropy=np.zeros(0),
            bucket_summary=[], mean_tcr=dict(mean_tcr or {}),
            config_echo=config,
            predictions=predictions, labels=labels)

    group = _group_key(labels, predictions)
    count = np.bincount(group, minlength=num_classes)
    labeled = labels >= 0
    correct = np.bincount(group[labeled & (predictions == labels)],
                          minlength=num_classes)
    conf_sum = np.bincount(group, weights=confidences, minlength=num_classes)
    ent_sum = np.bincount(group, weights=entropies, minlength=num_classes)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_conf = np.where(count > 0, conf_sum / np.maximum(count, 1), np.nan)
        mean_ent = np.where(count > 0, ent_sum / np.maximum(count, 1), np.nan)

    accuracy = (float(correct.sum() / labeled.sum()) if labeled.any() else None)
    if prior_rank is None:
        prior_rank = np.arange(num_classes)
    buckets = bucket_report(labels, predictions, confidences, entropies,
                            prior_rank, min(n_buckets, num_classes)) if n else []
    return Report(
        instances=n, accuracy=accuracy,
        per_class_count=count, per_class_correct=correct,
        per_class_mean_confidence=mean_conf, per_class_mean_entropy=mean_ent,
        bucket_summary=buckets, mean_tcr=dict(mean_tcr or {}),
        config_echo=config, predictions=predictions, labels=labels)
