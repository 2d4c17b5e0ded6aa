"""The export pipeline: images -> augmented views -> logit records."""

from __future__ import annotations

from PIL import Image, UnidentifiedImageError

from .augment import augment_views, build_augmenter, seed_augmentation
from .dataset import scan_image_folder
from .encoder import class_prompts, resolve_model
from .job import ExportError, ExportJob
from .streams import open_writer


def _load(entry) -> Image.Image:
    try:
        with Image.open(entry.path) as img:
            return img.convert("RGB")
    except (OSError, UnidentifiedImageError) as err:
        raise ExportError(
            f"unreadable image {entry.relpath!r}: {err}") from err


def export_stream(job: ExportJob) -> int:
    """Run a job end to end; returns the number of records written.

    Inference runs in `job.batch_size`-image batches but records are
    emitted strictly in dataset iteration order, one flush per record.
    Seeds torch's global RNG from `job.seed` before the first view.
    """
    encoder = resolve_model(job.model)
    index = scan_image_folder(job.dataset)
    prompt_sets = class_prompts(job.prompt_source, index.class_names,
                                job.descriptions)
    class_emb = encoder.class_embeddings(prompt_sets)

    seed_augmentation(job.seed)
    augmenter = build_augmenter()
    with open_writer(job.format, job.out, len(index.class_names),
                     index.class_names) as writer:
        for start in range(0, len(index.entries), job.batch_size):
            batch = index.entries[start:start + job.batch_size]
            views = [augment_views(_load(entry), job.n_views, augmenter)
                     for entry in batch]
            flat = [v for image_views in views for v in image_views]
            rows = encoder.logit_rows(flat, class_emb)
            for i, entry in enumerate(batch):
                writer.emit(entry.relpath, entry.label,
                            rows[i * job.n_views:(i + 1) * job.n_views])
        return writer.records_written
