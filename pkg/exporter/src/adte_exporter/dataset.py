"""Image-folder datasets: class subdirectories plus optional root images.

Iteration order is fixed and platform-independent: entries sort by their
relative POSIX path, labels come from the containing class subdirectory
(sorted subdirectory names define class indices), and images sitting
directly in the dataset root carry no label.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .job import ExportError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp")


@dataclass(frozen=True)
class ImageEntry:
    relpath: str        # record id: relative POSIX path inside the dataset
    path: str           # absolute path for loading
    label: int | None   # class index, or None for root-level images


@dataclass(frozen=True)
class DatasetIndex:
    class_names: tuple[str, ...]
    entries: tuple[ImageEntry, ...]


def _is_image(name: str) -> bool:
    return name.lower().endswith(IMAGE_EXTENSIONS)


def scan_image_folder(root: str) -> DatasetIndex:
    """Index a class-per-subdirectory image folder.

    Needs at least two class subdirectories (a one-class stream has no
    meaningful logit row) and at least one image somewhere.
    """
    if not os.path.isdir(root):
        raise ExportError(f"unreadable dataset: {root!r} is not a directory")
    names = sorted(e for e in os.listdir(root)
                   if not e.startswith(".")
                   and os.path.isdir(os.path.join(root, e)))
    if len(names) < 2:
        raise ExportError(
            f"dataset needs at least 2 class subdirectories, found "
            f"{len(names)} in {root!r}")
    label_of = {name: i for i, name in enumerate(names)}

    entries = []
    for name in sorted(e for e in os.listdir(root) if _is_image(e)):
        entries.append(ImageEntry(relpath=name,
                                  path=os.path.join(root, name), label=None))
    for class_name in names:
        class_dir = os.path.join(root, class_name)
        for name in sorted(e for e in os.listdir(class_dir) if _is_image(e)):
            entries.append(ImageEntry(
                relpath=f"{class_name}/{name}",
                path=os.path.join(class_dir, name),
                label=label_of[class_name]))
    if not entries:
        raise ExportError(f"dataset {root!r} contains no images "
                          f"({', '.join(IMAGE_EXTENSIONS)})")
    entries.sort(key=lambda e: e.relpath)
    return DatasetIndex(class_names=tuple(names), entries=tuple(entries))
