"""The online adaptation loop.

One instance = one id plus an (N, L) matrix of per-view logits. For each
instance the engine softmaxes every view, optionally divides by the
current estimated class prior (logit adjustment), scores views with the
configured entropy measure, keeps the lowest-entropy fraction tau,
averages the survivors into a marginal, predicts its argmax, and files
the marginal into the memory bank that drives the next bias estimate.

Processing is strictly online: the state consulted for instance i was
built from instances 0..i-1 only; instance i's own marginal enters the
bank after its prediction is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .bias import (
    BiasVector,
    MemoryBank,
    QProfile,
    estimate_confusion,
    jacobi_prior,
    logit_adjust,
    q_profile_from_bias,
)
from .entropy import (
    AdaptiveTsallis,
    EntropyMeasure,
    Shannon,
    Tsallis,
    entropy_of,
    shannon_entropy,
    softmax,
)
from .errors import InvalidConfigError, InvalidInputError, StreamFormatError

MEASURE_NAMES = ("shannon", "tsallis", "adaptive")


@dataclass(frozen=True, eq=False)
class InstanceRecord:
    """One test instance: N augmented-view logit rows over L classes."""
    id: str
    logits: np.ndarray = field(repr=False)
    label: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.logits, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
            raise InvalidInputError(
                f"record {self.id!r}: logits must be (N >= 1, L >= 2)")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError(f"record {self.id!r}: non-finite logits")
        object.__setattr__(self, "logits", arr)
        if self.label is not None:
            label = int(self.label)
            if not 0 <= label < arr.shape[1]:
                raise InvalidInputError(
                    f"record {self.id!r}: label {label} outside [0, {arr.shape[1]})")
            object.__setattr__(self, "label", label)

    @property
    def n_views(self) -> int:
        return self.logits.shape[0]

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class AdaptConfig:
    """Knobs of the adaptation loop (defaults match the reference setup)."""
    n_views: int = 64
    filter_ratio: float = 0.1
    bank_capacity: int = 10
    jacobi_max_iter: int = 100
    jacobi_eps: float = 1e-6
    q_alpha: float = 0.01
    q_beta: float = 0.9
    measure: str = "adaptive"
    tsallis_q: float = 0.5
    use_logit_adjustment: bool = True
    invert_q_mapping: bool = False
    bias_refresh_period: int = 1

    def __post_init__(self):
        def bad(key, why):
            raise InvalidConfigError(f"{key}: {why}")

        if not (isinstance(self.n_views, int) and self.n_views >= 1):
            bad("n_views", "must be a positive integer")
        if not (np.isfinite(self.filter_ratio) and 0 < self.filter_ratio <= 1):
            bad("filter_ratio", "must lie in (0, 1]")
        if not (isinstance(self.bank_capacity, int) and self.bank_capacity >= 1):
            bad("bank_capacity", "must be a positive integer")
        if not (isinstance(self.jacobi_max_iter, int) and self.jacobi_max_iter >= 1):
            bad("jacobi_max_iter", "must be a positive integer")
        if not (np.isfinite(self.jacobi_eps) and self.jacobi_eps > 0):
            bad("jacobi_eps", "must be > 0")
        if not (np.isfinite(self.q_alpha) and np.isfinite(self.q_beta)
                and 0 < self.q_alpha < self.q_beta < 1):
            bad("q_alpha/q_beta", "need 0 < q_alpha < q_beta < 1")
        if self.measure not in MEASURE_NAMES:
            bad("measure", f"must be one of {MEASURE_NAMES}")
        if not np.isfinite(self.tsallis_q):
            bad("tsallis_q", "must be finite")
        if not (isinstance(self.bias_refresh_period, int)
                and self.bias_refresh_period >= 1):
            bad("bias_refresh_period", "must be a positive integer")


@dataclass(eq=False)
class Prediction:
    """Outcome of adapting one instance."""
    class_index: int
    marginal: np.ndarray = field(repr=False)
    selected_views: np.ndarray = field(repr=False)   # sorted ascending
    per_view_entropy: np.ndarray = field(repr=False)


@dataclass(eq=False)
class AdapterState:
    """Mutable per-stream state; serialize writers externally."""
    bank: MemoryBank
    bias: BiasVector
    profile: QProfile
    instances_seen: int = 0

    @classmethod
    def fresh(cls, num_classes: int, config: AdaptConfig) -> "AdapterState":
        return cls(
            bank=MemoryBank(num_classes, config.bank_capacity),
            bias=BiasVector.uniform(num_classes),
            profile=q_profile_from_bias(
                BiasVector.uniform(num_classes), config.q_alpha,
                config.q_beta, config.invert_q_mapping),
        )


def select_count(tau: float, n_views: int) -> int:
    """Views kept by the confidence filter: max(1, floor(tau * N))."""
    return max(1, math.floor(tau * n_views))


def select_views(entropies, n_select: int) -> np.ndarray:
    """Indices of the n_select smallest entropies, ascending.

    Ties break toward the lower view index (stable sort).
    """
    ent = np.asarray(entropies, dtype=np.float64)
    if ent.ndim != 1:
        raise InvalidInputError("entropies must be a vector")
    if not np.all(np.isfinite(ent)):
        raise InvalidInputError("entropies must be finite")
    if not 1 <= n_select <= ent.shape[0]:
        raise InvalidInputError(
            f"n_select must be in [1, {ent.shape[0]}], got {n_select}")
    return np.sort(np.argsort(ent, kind="stable")[:n_select])


def aggregate(probs) -> np.ndarray:
    """Elementwise mean of distributions, renormalized to sum to 1."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidInputError("need a non-empty list of distributions")
    mean = arr.mean(axis=0)
    return mean / mean.sum()


def measure_for(config: AdaptConfig, profile: QProfile) -> EntropyMeasure:
    """The scoring measure a config selects, given the current q profile."""
    if config.measure == "shannon":
        return Shannon()
    if config.measure == "tsallis":
        return Tsallis(config.tsallis_q)
    return AdaptiveTsallis(profile.q)


def adapt_one(state: AdapterState, record: InstanceRecord,
              config: AdaptConfig) -> Prediction:
    """Adapt and predict a single instance, updating the state in place.

    Order of operations: softmax views; logit-adjust with the bias as of
    the previous instance; refresh bias and q profile from the bank when
    instances_seen is a multiple of the refresh period; score views; keep
    the max(1, floor(tau*N)) lowest-entropy views; aggregate; predict the
    argmax; bank the raw (pre-adjustment) aggregate of the same selected
    views; bump the instance counter.

    Banking the raw aggregate keeps the bias estimator observing the
    model's own prediction skew. Feeding it the adjusted marginal instead
    closes a feedback loop (the estimate rewrites the evidence it is
    estimated from) that stalls the correction on strongly biased streams.
    """
    if record.num_classes != state.bank.num_classes:
        raise InvalidInputError(
            f"record {record.id!r} has {record.num_classes} classes, "
            f"state has {state.bank.num_classes}")
    raw = softmax(record.logits)
    probs = logit_adjust(raw, state.bias) if config.use_logit_adjustment \
        else raw
    if state.instances_seen % config.bias_refresh_period == 0:
        state.bias = jacobi_prior(estimate_confusion(state.bank),
                                  config.jacobi_max_iter, config.jacobi_eps)
        state.profile = q_profile_from_bias(
            state.bias, config.q_alpha, config.q_beta,
            config.invert_q_mapping)
    ent = np.atleast_1d(entropy_of(measure_for(config, state.profile), probs))
    chosen = select_views(ent, select_count(config.filter_ratio,
                                            record.n_views))
    marginal = aggregate(probs[chosen])
    prediction = Prediction(
        class_index=int(np.argmax(marginal)),
        marginal=marginal,
        selected_views=chosen,
        per_view_entropy=ent,
    )
    state.bank.update(marginal if probs is raw else aggregate(raw[chosen]))
    state.instances_seen += 1
    return prediction


def run_stream(records, config: AdaptConfig, *, state: AdapterState | None = None,
               prior_rank=None, n_buckets: int = 10,
               tcr_ks=()) -> metrics.Report:
    """Adapt a whole stream in order and aggregate a Report.

    Parameters
    ----------
    records : iterable of InstanceRecord, consistent L throughout.
    config : AdaptConfig.
    state : optional pre-built AdapterState (inspected by callers after the
        run); a fresh one is created from the first record otherwise.
    prior_rank : optional class-rank permutation for bucket summaries
        (rank 0 = heaviest prior). Defaults to ranking classes by the final
        estimated prior, descending.
    n_buckets : bucket count for the head/tail summary.
    tcr_ks : iterable of K values; the report then carries the mean tcr_K
        over every selected view's raw logits.
    """
    tcr_ks = tuple(int(k) for k in tcr_ks)
    labels, preds, confs, ents = [], [], [], []
    tcr_pool: dict[int, list[np.ndarray]] = {k: [] for k in tcr_ks}
    for record in records:
        if state is None:
            state = AdapterState.fresh(record.num_classes, config)
        elif record.num_classes != state.bank.num_classes:
            raise StreamFormatError(
                f"record {record.id!r} has {record.num_classes} classes, "
                f"stream started with {state.bank.num_classes}")
        prediction = adapt_one(state, record, config)
        labels.append(-1 if record.label is None else record.label)
        preds.append(prediction.class_index)
        confs.append(float(prediction.marginal.max()))
        ents.append(float(shannon_entropy(prediction.marginal)))
        for k in tcr_ks:
            tcr_pool[k].append(np.atleast_1d(
                metrics.tcr_k(record.logits[prediction.selected_views], k)))

    num_classes = state.bank.num_classes if state is not None else 0
    if prior_rank is None and state is not None:
        order = np.argsort(-state.bias.prior, kind="stable")
        prior_rank = np.empty(num_classes, dtype=np.int64)
        prior_rank[order] = np.arange(num_classes)
    mean_tcr = {k: float(np.concatenate(v).mean())
                for k, v in tcr_pool.items() if v}
    return metrics.build_report(
        labels, preds, confs, ents, num_classes, prior_rank=prior_rank,
        n_buckets=n_buckets, mean_tcr=mean_tcr, config=config)
