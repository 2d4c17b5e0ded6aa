"""Entropy-based online test-time adaptation over logit streams.

Per instance, the engine softmaxes N augmented views' logits, optionally
divides out an estimated class prior (logit adjustment), scores each view
with Shannon, Tsallis, or adaptive per-class Tsallis entropy, keeps the
most confident fraction, aggregates them into a marginal prediction, and
files the raw aggregate in a per-class memory bank from which the class
prior is re-estimated as the stationary point of a confusion-statistic
matrix. A seeded synthetic generator of long-tail-biased streams, stream
file formats, report tooling, and a CLI make every step checkable at desk
scale.
"""

from .bias import (
    BiasVector,
    ConfusionEstimate,
    MemoryBank,
    QProfile,
    estimate_confusion,
    jacobi_prior,
    logit_adjust,
    q_profile_from_bias,
)
from .entropy import (
    AdaptiveTsallis,
    Shannon,
    Tsallis,
    adte_entropy,
    entropy_of,
    gap,
    gap_critical_q,
    shannon_entropy,
    softmax,
    tsallis_entropy,
)
from .errors import (
    AdteError,
    InvalidConfigError,
    InvalidInputError,
    InvalidProfileError,
    StreamFormatError,
    UndefinedTermError,
    UnsupportedFormatError,
)
from .io import (
    StreamHeader,
    load_config,
    read_report_csv,
    read_stream,
    read_stream_binary,
    read_stream_jsonl,
    write_report_csv,
    write_stream,
    write_stream_binary,
    write_stream_jsonl,
)
from .metrics import (
    BucketStats,
    Report,
    bucket_report,
    build_report,
    mean_tcr_selected,
    tcr_k,
)
from .pipeline import (
    AdaptConfig,
    AdapterState,
    InstanceRecord,
    Prediction,
    adapt_one,
    aggregate,
    run_stream,
    select_count,
    select_views,
)
from .synth import StreamSpec, SynthWorld, gen_stream, make_world

__version__ = "0.1.0"

__all__ = [
    "AdaptConfig",
    "AdapterState",
    "AdaptiveTsallis",
    "AdteError",
    "BiasVector",
    "BucketStats",
    "ConfusionEstimate",
    "InstanceRecord",
    "InvalidConfigError",
    "InvalidInputError",
    "InvalidProfileError",
    "MemoryBank",
    "Prediction",
    "QProfile",
    "Report",
    "Shannon",
    "StreamFormatError",
    "StreamHeader",
    "StreamSpec",
    "SynthWorld",
    "Tsallis",
    "UndefinedTermError",
    "UnsupportedFormatError",
    "adapt_one",
    "adte_entropy",
    "aggregate",
    "bucket_report",
    "build_report",
    "entropy_of",
    "estimate_confusion",
    "gap",
    "gap_critical_q",
    "gen_stream",
    "jacobi_prior",
    "load_config",
    "logit_adjust",
    "make_world",
    "mean_tcr_selected",
    "q_profile_from_bias",
    "read_report_csv",
    "read_stream",
    "read_stream_binary",
    "read_stream_jsonl",
    "run_stream",
    "select_count",
    "select_views",
    "shannon_entropy",
    "softmax",
    "tcr_k",
    "tsallis_entropy",
    "write_report_csv",
    "write_stream",
    "write_stream_binary",
    "write_stream_jsonl",
    "__version__",
]
