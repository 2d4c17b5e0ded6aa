"""
Debiasing a long-tailed synthetic stream
========================================

Builds a Zipf-imbalanced synthetic world whose per-class logit offsets
push predictions toward head classes, then adapts to the same stream with
three measures: a Shannon baseline with no adjustment, plain Tsallis with
logit adjustment, and the adaptive per-class measure with logit
adjustment. Accuracy is reported overall and on the rarest decile.

Run with:  python3 demos/synthetic_debiasing_comparison.py
"""

import numpy as np

from adte import (AdaptConfig, StreamSpec, gen_stream, make_world,
                  run_stream)

world = make_world(50, zipf_s=1.0, bias_strength=2.0, margin=3.0, seed=11)
spec = StreamSpec(count=600, n_views=16, noise_sigma=1.0, corrupt_prob=0.3)
records = gen_stream(world, spec)

print(f"World: {world.num_classes} classes, Zipf prior "
      f"(head {world.class_prior[0]:.3f}, tail {world.class_prior[-1]:.5f})")
print(f"Offset range: [{world.bias_offset.min():.2f}, "
      f"{world.bias_offset.max():.2f}] "
      "- head classes start ahead before any evidence arrives.\n")

# Labels are drawn uniformly, so tail classes appear as often as head
# classes and the offsets alone are what drags accuracy down.
arms = [
    ("shannon, no adjustment",
     AdaptConfig(n_views=16, measure="shannon", use_logit_adjustment=False)),
    ("tsallis q=0.5 + adjustment",
     AdaptConfig(n_views=16, measure="tsallis", tsallis_q=0.5)),
    ("adaptive + adjustment",
     AdaptConfig(n_views=16, measure="adaptive")),
]

# The rarest decile by the generating prior; with uniform labels this is
# simply the highest class indices.
tail = np.arange(45, 50)

print(f"{'arm':<28s} {'accuracy':>8s} {'tail acc':>8s}")
for name, config in arms:
    report = run_stream(records, config, prior_rank=np.arange(50))
    labels = np.array([r.label for r in records])
    preds = np.array(report.predictions)
    in_tail = np.isin(labels, tail)
    tail_acc = float(np.mean(preds[in_tail] == labels[in_tail]))
    print(f"{name:<28s} {report.accuracy:>8.4f} {tail_acc:>8.4f}")

print("\nLogit adjustment carries the improvement: it learns the "
      "head-class skew from\nthe model's own banked outputs and cancels "
      "it. The entropy exponent then\ndecides which views feed that bank.")
