"""Streaming class-bias estimation.

The engine watches its own (unlabeled) predictions to estimate which
classes the underlying model over- or under-predicts:

1. a per-pseudo-label FIFO `MemoryBank` keeps the last M prediction
   distributions filed under their argmax class;
2. `estimate_confusion` turns the bank into a column-stochastic matrix
   a[l, l'] = mean predicted mass on l among entries pseudo-labeled l';
3. `jacobi_prior` finds that matrix's stationary distribution by fixed-point
   iteration, giving an estimated class prior and its negative log (the
   bias vector);
4. `q_profile_from_bias` min-max normalizes the bias vector into a
   per-class Tsallis exponent profile;
5. `logit_adjust` divides probabilities by the estimated prior and
   renormalizes, i.e. adds the bias in logit space.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .entropy import _as_prob
from .errors import InvalidConfigError, InvalidInputError

# Estimated priors are clamped here before the log so a numerically
# extinct class yields a large finite bias instead of infinity.
PRIOR_FLOOR = 1e-12

_COLUMN_TOL = 1e-6


class MemoryBank:
    """Per-class FIFO of recent prediction distributions.

    Each stored vector is filed under its argmax class (ties to the lowest
    index); a class FIFO beyond `capacity_per_class` drops its oldest entry.
    Single-writer: callers must not interleave updates with reads.
    """

    def __init__(self, num_classes: int, capacity_per_class: int):
        if num_classes < 2:
            raise InvalidInputError("need at least 2 classes")
        if capacity_per_class < 1:
            raise InvalidInputError("capacity must be a positive integer")
        self.num_classes = int(num_classes)
        self.capacity_per_class = int(capacity_per_class)
        self.slots: list[deque[np.ndarray]] = [
            deque() for _ in range(num_classes)]

    @property
    def total_count(self) -> int:
        return sum(len(s) for s in self.slots)

    def update(self, p) -> None:
        """File a prediction distribution under its pseudo-label."""
        arr = _as_prob(p)
        if arr.ndim != 1 or arr.shape[0] != self.num_classes:
            raise InvalidInputError(
                f"expected a length-{self.num_classes} distribution")
        slot = self.slots[int(np.argmax(arr))]
        slot.append(arr.copy())
        if len(slot) > self.capacity_per_class:
            slot.popleft()


@dataclass(frozen=True, eq=False)
class ConfusionEstimate:
    """Column-stochastic confusion statistic and per-class sample counts."""
    a: np.ndarray = field(repr=False)   # (L, L); column l' averages slot l'
    counts: np.ndarray = field(repr=False)  # (L,) entries per pseudo-label


@dataclass(frozen=True, eq=False)
class BiasVector:
    """Estimated class prior and its negative log."""
    prior: np.ndarray = field(repr=False)
    log_bias: np.ndarray = field(repr=False)

    @classmethod
    def uniform(cls, num_classes: int) -> "BiasVector":
        prior = np.full(num_classes, 1.0 / num_classes)
        return cls(prior=prior, log_bias=-np.log(prior))


@dataclass(frozen=True, eq=False)
class QProfile:
    """Per-class Tsallis exponents inside [alpha, beta] ⊂ (0, 1)."""
    q: np.ndarray = field(repr=False)
    alpha: float
    beta: float


def estimate_confusion(bank: MemoryBank) -> ConfusionEstimate:
    """Average each pseudo-label's stored vectors into a matrix column.

    Classes absent from the bank contribute a uniform column: with no
    evidence, their pseudo-label redistributes indifferently, keeping the
    matrix column-stochastic and the chain irreducible. A one-hot
    (self-loop) fallback would instead make every unseen class an
    absorbing state of the fixed-point iteration — any leaked mass parks
    there permanently, so the stationary prior of the *seen* classes
    collapses toward the clamp floor and the bias estimate explodes long
    before the bank fills.
    """
    n = bank.num_classes
    a = np.zeros((n, n))
    counts = np.zeros(n, dtype=np.int64)
    for label, slot in enumerate(bank.slots):
        counts[label] = len(slot)
        if slot:
            a[:, label] = np.mean(slot, axis=0)
        else:
            a[:, label] = 1.0 / n
    return ConfusionEstimate(a=a, counts=counts)


def jacobi_prior(conf: ConfusionEstimate | np.ndarray, max_iter: int = 100,
                 eps: float = 1e-6) -> BiasVector:
    """Stationary distribution of the confusion matrix, by fixed-point iteration.

    Starting from the uniform vector, repeats p <- A p followed by L1
    normalization until the L1 step change is at most `eps` or `max_iter`
    iterations have run. The result is clamped away from zero, renormalized,
    and returned together with its negative log.
    """
    a = conf.a if isinstance(conf, ConfusionEstimate) else np.asarray(
        conf, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise InvalidInputError("confusion matrix must be square, L >= 2")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise InvalidInputError("confusion entries must be finite and >= 0")
    if np.any(np.abs(a.sum(axis=0) - 1.0) > _COLUMN_TOL):
        raise InvalidInputError("matrix is not column-stochastic within 1e-6")
    if max_iter < 1:
        raise InvalidInputError("max_iter must be >= 1")
    if not eps > 0:
        raise InvalidInputError("eps must be > 0")

    p = np.full(a.shape[0], 1.0 / a.shape[0])
    for _ in range(max_iter):
        nxt = a @ p
        nxt /= nxt.sum()
        delta = np.abs(nxt - p).sum()
        p = nxt
        if delta <= eps:
            break
    p = np.maximum(p, PRIOR_FLOOR)
    p /= p.sum()
    p = np.maximum(p, PRIOR_FLOOR)
    return BiasVector(prior=p, log_bias=-np.log(p))


def q_profile_from_bias(bias: BiasVector, alpha: float = 0.01,
                        beta: float = 0.9, invert: bool = False) -> QProfile:
    """Min-max normalize the bias vector into per-class exponents.

    With `invert` false the most biased-against class (largest b) receives
    beta and the least receives alpha; `invert` reflects the mapping. A
    degenerate bias spread (< 1e-12) maps every class to the midpoint.
    """
    if not (0.0 < alpha < beta < 1.0):
        raise InvalidConfigError(
            f"need 0 < alpha < beta < 1, got [{alpha}, {beta}]")
    b = bias.log_bias
    spread = b.max() - b.min()
    if spread < 1e-12:
        q = np.full(b.shape[0], (alpha + beta) / 2.0)
    else:
        unit = (b - b.min()) / spread
        q = beta - (beta - alpha) * unit if invert else \
            alpha + (beta - alpha) * unit
    return QProfile(q=q, alpha=alpha, beta=beta)


def logit_adjust(p, bias: BiasVector) -> np.ndarray:
    """Divide probabilities by the estimated prior and renormalize.

    Equivalent to adding the bias vector to the logits before softmax.
    Accepts a trailing class axis, so an (N, L) batch adjusts in one call.
    """
    arr = _as_prob(p)
    if arr.shape[-1] != bias.prior.shape[0]:
        raise InvalidInputError("distribution/bias dimension mismatch")
    out = arr / bias.prior
    out /= out.sum(axis=-1, keepdims=True)
    return out
