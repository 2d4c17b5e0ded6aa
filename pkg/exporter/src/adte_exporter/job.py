"""Export job description and the exporter's error type."""

from __future__ import annotations

from dataclasses import dataclass

FORMATS = ("jsonl", "bin")
PROMPT_SOURCES = ("templates", "descriptions")


class ExportError(Exception):
    """A job cannot run: bad parameters, unknown model, unreadable data."""


@dataclass(frozen=True)
class ExportJob:
    """Everything needed to turn an image folder into a logit stream.

    `dataset` points at a folder whose subdirectories are the classes
    (sorted subdirectory names define the class order); images directly
    in the folder root are exported unlabeled. `prompt_source` selects
    between built-in hand-crafted templates and a JSON file of generated
    per-class descriptions (`descriptions` gives its path).
    """

    dataset: str
    out: str
    model: str = "hash-64"
    prompt_source: str = "templates"
    descriptions: str | None = None
    n_views: int = 16
    format: str = "jsonl"
    seed: int = 0
    batch_size: int = 32

    def __post_init__(self):
        if self.n_views < 1:
            raise ExportError(f"n_views must be >= 1, got {self.n_views}")
        if self.batch_size < 1:
            raise ExportError(
                f"batch_size must be >= 1, got {self.batch_size}")
        if self.format not in FORMATS:
            raise ExportError(
                f"format must be one of {FORMATS}, got {self.format!r}")
        if self.prompt_source not in PROMPT_SOURCES:
            raise ExportError(f"prompt_source must be one of "
                              f"{PROMPT_SOURCES}, got {self.prompt_source!r}")
        if self.prompt_source == "descriptions" and not self.descriptions:
            raise ExportError(
                "prompt_source 'descriptions' needs a descriptions file")
