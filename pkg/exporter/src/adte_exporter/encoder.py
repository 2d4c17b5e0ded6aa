"""Deterministic stand-in encoders and class-prompt embeddings.

Real checkpoint weights are deliberately out of scope: the registry
holds hash-keyed projection encoders that behave like a contrastive
image/text model from the stream's point of view — every view maps to a
unit feature vector, every class to a unit text embedding (the mean of
its prompt embeddings, renormalized), and a logit row is the scaled
cosine similarity `logit_scale * f_img @ f_textᵀ`. `logit_scale` plays
the role of the model's learned temperature, so the emitted rows are on
the model's native scale and the engine-side softmax needs none.

Everything is keyed by SHA-256 of the model name (and, for text, the
prompt string), so features are reproducible across runs and platforms
without any stored weights.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .job import ExportError

THUMB_SIZE = 8  # views are pooled to THUMB_SIZE^2 RGB pixels before projecting

TEMPLATES = (
    "a photo of a {}.",
    "a blurry photo of a {}.",
    "a photo of many {}.",
    "a low resolution photo of a {}.",
    "a cropped photo of a {}.",
)


def _seed_from(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, axis=-1, keepdims=True)


@dataclass(frozen=True)
class HashProjectionEncoder:
    name: str
    dim: int
    logit_scale: float = 100.0

    def _projection(self) -> np.ndarray:
        rng = np.random.default_rng(_seed_from(f"{self.name}:image"))
        return rng.standard_normal((3 * THUMB_SIZE * THUMB_SIZE, self.dim))

    def encode_images(self, views) -> np.ndarray:
        """(n_views, dim) unit features from a list of PIL images."""
        pooled = [np.asarray(v.convert("RGB").resize(
                      (THUMB_SIZE, THUMB_SIZE), Image.BILINEAR),
                      dtype=np.float64).ravel() / 255.0
                  for v in views]
        return _unit_rows(np.stack(pooled) @ self._projection())

    def encode_texts(self, prompts) -> np.ndarray:
        """(n_prompts, dim) unit embeddings, one per prompt string."""
        rows = [np.random.default_rng(
                    _seed_from(f"{self.name}:text:{p}")).standard_normal(
                    self.dim)
                for p in prompts]
        return _unit_rows(np.stack(rows))

    def class_embeddings(self, prompt_sets) -> np.ndarray:
        """(n_classes, dim): mean prompt embedding per class, renormalized."""
        return _unit_rows(np.stack(
            [self.encode_texts(prompts).mean(axis=0)
             for prompts in prompt_sets]))

    def logit_rows(self, views, class_emb: np.ndarray) -> np.ndarray:
        return self.logit_scale * (self.encode_images(views) @ class_emb.T)


MODELS = {
    "hash-64": HashProjectionEncoder("hash-64", 64),
    "hash-256": HashProjectionEncoder("hash-256", 256),
}


def resolve_model(identifier: str) -> HashProjectionEncoder:
    if identifier not in MODELS:
        raise ExportError(
            f"cannot load model {identifier!r}; available: "
            f"{', '.join(sorted(MODELS))}")
    return MODELS[identifier]


def class_prompts(source: str, class_names,
                  descriptions_path: str | None = None) -> list[list[str]]:
    """One prompt list per class, covering every class or failing.

    `templates` formats each class name into the built-in hand-crafted
    templates; `descriptions` reads a JSON object mapping class name to
    a non-empty list of description strings.
    """
    if source == "templates":
        return [[t.format(name) for t in TEMPLATES] for name in class_names]
    try:
        with open(descriptions_path, encoding="utf-8") as fh:
            table = json.load(fh)
    except OSError as err:
        raise ExportError(f"cannot read descriptions file: {err}") from err
    except json.JSONDecodeError as err:
        raise ExportError(f"descriptions file is not valid JSON: {err}") \
            from err
    if not isinstance(table, dict):
        raise ExportError("descriptions file must be a JSON object "
                          "mapping class name to a list of strings")
    prompt_sets = []
    for name in class_names:
        prompts = table.get(name)
        if not (isinstance(prompts, list) and prompts
                and all(isinstance(p, str) for p in prompts)):
            raise ExportError(f"descriptions file has no usable entry for "
                              f"class {name!r}")
        prompt_sets.append(prompts)
    return prompt_sets
