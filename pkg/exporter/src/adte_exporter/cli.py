"""adte-export: turn an image folder into an adte logit stream.

Usage errors exit 2 (argparse); job failures print `error: ...` to
stderr and exit 1; success prints a one-line summary and exits 0.
"""

from __future__ import annotations

import argparse
import sys

from .encoder import MODELS
from .job import FORMATS, PROMPT_SOURCES, ExportError, ExportJob


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adte-export",
        description="Augment each image N times, score class prompts with "
                    "a deterministic encoder, and write a logit stream.")
    parser.add_argument("--dataset", required=True,
                        help="image folder with one subdirectory per class")
    parser.add_argument("--out", required=True, help="output stream path")
    parser.add_argument("--model", default="hash-64",
                        help=f"encoder identifier "
                             f"({', '.join(sorted(MODELS))})")
    parser.add_argument("--prompts", default="templates",
                        choices=PROMPT_SOURCES,
                        help="class prompt source")
    parser.add_argument("--descriptions", default=None,
                        help="JSON file {class: [descriptions]} for "
                             "--prompts descriptions")
    parser.add_argument("--views", type=int, default=16,
                        help="augmented views per image (>= 1)")
    parser.add_argument("--format", default="jsonl", choices=FORMATS,
                        help="stream encoding")
    parser.add_argument("--seed", type=int, default=0,
                        help="augmentation seed")
    parser.add_argument("--batch-size", type=int, default=32,
                        help="images per inference batch")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.views < 1:
        parser.error(f"--views must be >= 1, got {args.views}")
    if args.batch_size < 1:
        parser.error(f"--batch-size must be >= 1, got {args.batch_size}")
    if args.prompts == "descriptions" and not args.descriptions:
        parser.error("--prompts descriptions needs --descriptions FILE")
    try:
        job = ExportJob(dataset=args.dataset, out=args.out, model=args.model,
                        prompt_source=args.prompts,
                        descriptions=args.descriptions, n_views=args.views,
                        format=args.format, seed=args.seed,
                        batch_size=args.batch_size)
        from .export import export_stream
        count = export_stream(job)
    except ExportError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {count} records ({args.views} views each) to {args.out} "
          f"[{args.format}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
