"""Entropy measures for scoring augmented-view predictions.

Three measures over probability vectors, all accepting a trailing class
axis so an (N, L) batch of view distributions is scored in one call:

* Shannon entropy        SE(p)      = -sum_l p_l * log(p_l)
* Tsallis entropy        TE(p, q)   = (sum_l p_l^q - 1) / (1 - q)
* Adaptive Tsallis       ATE(p, q.) = sum_l p_l^{q_l} / (1 - q_l)

The adaptive form drops the class-independent -1/(1-q) offset of TE, so
with a constant per-class profile it equals TE(p, q) + 1/(1-q) and induces
exactly the same ranking over views.

`gap` exposes the analysis primitive F(p, q) = p^q/(1-q) + p*log(p),
the per-class difference between the Tsallis and Shannon contributions of
a single probability; it is not used by the pipeline but characterises
when q < 1 inflates under-estimated tail entropies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidProfileError, UndefinedTermError

# |q - 1| below this evaluates Tsallis entropy as its Shannon limit, which
# is the analytic value and avoids the 0/0 form.
Q_SHANNON_WINDOW = 1e-9

# Probabilities are clamped to this floor before log; denormal-safe and
# inert at test tolerances (0 * log(floor) is exactly 0).
_LOG_FLOOR = 1e-300

_SUM_TOL = 1e-9


def _as_prob(p) -> np.ndarray:
    """Validate array-like probabilities over a trailing class axis."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] < 2:
        raise InvalidInputError("need at least 2 classes on the last axis")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("probabilities must be finite")
    if np.any(arr < 0):
        raise InvalidInputError("probabilities must be non-negative")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > _SUM_TOL):
        raise InvalidInputError("probabilities must sum to 1 within 1e-9")
    return arr


def softmax(logits) -> np.ndarray:
    """Exp-normalize logits over the last axis (max-shifted, no temperature)."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] < 2:
        raise InvalidInputError("need at least 2 classes on the last axis")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("logits must be finite")
    shifted = arr - arr.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def shannon_entropy(p) -> float | np.ndarray:
    """SE(p) = -sum_l p_l log p_l, with 0 * log 0 := 0."""
    arr = _as_prob(p)
    out = -np.sum(arr * np.log(np.maximum(arr, _LOG_FLOOR)), axis=-1)
    return out[()] if out.ndim == 0 else out


def tsallis_entropy(p, q: float) -> float | np.ndarray:
    """TE(p, q) = (sum_l p_l^q - 1) / (1 - q), with 0^q := 0 for q > 0.

    q within 1e-9 of 1 dispatches to the Shannon limit. q <= 0 is undefined
    whenever any entry is zero (0^q diverges), and an error is raised.
    """
    if not np.isfinite(q):
        raise InvalidInputError("q must be finite")
    if abs(q - 1.0) < Q_SHANNON_WINDOW:
        return shannon_entropy(p)
    arr = _as_prob(p)
    if q <= 0 and np.any(arr == 0.0):
        raise UndefinedTermError(
            f"tsallis entropy with q={q} <= 0 is undefined for zero entries")
    out = (np.sum(arr ** q, axis=-1) - 1.0) / (1.0 - q)
    return out[()] if out.ndim == 0 else out


def _as_q_profile(q_profile, n_classes: int) -> np.ndarray:
    qs = np.asarray(q_profile, dtype=np.float64)
    if qs.shape != (n_classes,):
        raise InvalidProfileError(
            f"profile shape {qs.shape} does not match {n_classes} classes")
    if not np.all(np.isfinite(qs)) or np.any(qs <= 0.0) or np.any(qs >= 1.0):
        raise InvalidProfileError("per-class q values must lie in (0, 1)")
    return qs


def adte_entropy(p, q_profile) -> float | np.ndarray:
    """Per-class-q Tsallis score: sum_l p_l^{q_l} / (1 - q_l).

    `q_profile` holds one exponent per class, each strictly inside (0, 1).
    The class-independent constant of TE is omitted; rankings are unchanged.
    """
    arr = _as_prob(p)
    qs = _as_q_profile(q_profile, arr.shape[-1])
    out = np.sum(arr ** qs / (1.0 - qs), axis=-1)
    return out[()] if out.ndim == 0 else out


def gap(p, q) -> float | np.ndarray:
    """F(p, q) = p^q / (1 - q) + p * log p for a single probability p.

    Positive for q in (0, 1) (the Tsallis term dominates the negative
    Shannon term), negative for q > 1. Broadcasts over array p and q.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if not np.all(np.isfinite(p_arr)) or np.any(p_arr <= 0) or np.any(p_arr >= 1):
        raise InvalidInputError("p must lie strictly inside (0, 1)")
    if not np.all(np.isfinite(q_arr)):
        raise InvalidInputError("q must be finite")
    if np.any(q_arr == 1.0):
        raise UndefinedTermError("the gap is undefined at q = 1")
    out = p_arr ** q_arr / (1.0 - q_arr) + p_arr * np.log(p_arr)
    return out[()] if out.ndim == 0 else out


def gap_critical_q(p) -> float | np.ndarray:
    """The q below which F(p, .) decreases: q*(p) = 1 - 1/|log p|.

    For q in (0, q*) the gap shrinks as q grows; for q in (q*, 1) it grows
    again (and diverges toward q -> 1-). Meaningful for p < 1/e, where the
    critical point is positive.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    if not np.all(np.isfinite(p_arr)) or np.any(p_arr <= 0) or np.any(p_arr >= 1):
        raise InvalidInputError("p must lie strictly inside (0, 1)")
    out = 1.0 - 1.0 / np.abs(np.log(p_arr))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Shannon:
    """Score views by Shannon entropy."""


@dataclass(frozen=True)
class Tsallis:
    """Score views by Tsallis entropy with a single exponent q."""
    q: float


@dataclass(frozen=True, eq=False)
class AdaptiveTsallis:
    """Score views with one Tsallis exponent per class."""
    q_profile: np.ndarray = field(repr=False)


EntropyMeasure = Shannon | Tsallis | AdaptiveTsallis


def entropy_of(measure: EntropyMeasure, p) -> float | np.ndarray:
    """Dispatch to the entropy implementation selected by `measure`."""
    if isinstance(measure, Shannon):
        return shannon_entropy(p)
    if isinstance(measure, Tsallis):
        return tsallis_entropy(p, measure.q)
    if isinstance(measure, AdaptiveTsallis):
        return adte_entropy(p, measure.q_profile)
    raise InvalidInputError(f"unknown entropy measure: {measure!r}")
