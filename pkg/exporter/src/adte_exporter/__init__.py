"""Bridge from image folders to adte logit streams.

Augments each image N times (random resized crop + horizontal flip),
encodes views and class prompts with a deterministic hash-keyed encoder,
and writes the scaled image-text similarities as JSONL or binary stream
records that the adte engine consumes unchanged.
"""

from .augment import augment_views, build_augmenter, seed_augmentation
from .dataset import DatasetIndex, ImageEntry, scan_image_folder
from .encoder import (MODELS, TEMPLATES, HashProjectionEncoder,
                      class_prompts, resolve_model)
from .export import export_stream
from .job import FORMATS, PROMPT_SOURCES, ExportError, ExportJob
from .streams import BinaryStreamWriter, JsonlStreamWriter, open_writer

__version__ = "0.1.0"

__all__ = [
    "BinaryStreamWriter",
    "DatasetIndex",
    "ExportError",
    "ExportJob",
    "FORMATS",
    "HashProjectionEncoder",
    "ImageEntry",
    "JsonlStreamWriter",
    "MODELS",
    "PROMPT_SOURCES",
    "TEMPLATES",
    "__version__",
    "augment_views",
    "build_augmenter",
    "class_prompts",
    "export_stream",
    "open_writer",
    "resolve_model",
    "scan_image_folder",
    "seed_augmentation",
]
