"""Random view augmentation: the random-resized-crop + flip convention.

Views are produced by torchvision's RandomResizedCrop (default scale
(0.08, 1), ratio (3/4, 4/3)) followed by a 0.5-probability horizontal
flip, the standard recipe of augmentation-based test-time adaptation.
The transforms draw from torch's process-global RNG; seed it once per
job (export_stream does) for reproducible view sequences.
"""

from __future__ import annotations

import torch
import torchvision.transforms as transforms
from PIL import Image

VIEW_SIZE = 224


def build_augmenter(size: int = VIEW_SIZE):
    return transforms.Compose([
        transforms.RandomResizedCrop(size, scale=(0.08, 1.0),
                                     ratio=(3 / 4, 4 / 3)),
        transforms.RandomHorizontalFlip(0.5),
    ])


def seed_augmentation(seed: int) -> None:
    torch.manual_seed(seed)


def augment_views(image: Image.Image, n_views: int, augmenter) -> list:
    """n_views independently transformed copies of one image."""
    return [augmenter(image) for _ in range(n_views)]
