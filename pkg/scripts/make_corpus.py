"""Regenerate the bundled 256x256 grayscale test corpus from scikit-image samples.

Run once by a maintainer (scikit-image is not a runtime dependency):

    python scripts/make_corpus.py
"""
import os

import numpy as np
from skimage import data
from skimage.color import rgb2gray
from skimage.transform import resize

from hcie.io import corpus_dir, pgm_write
from hcie.model import Image

# the last image is the attack target; the first five are the "known" ones
SOURCES = ["astronaut", "coffee", "chelsea", "rocket", "coins", "camera"]


def to_square_gray(a: np.ndarray, side: int = 256) -> np.ndarray:
    if a.ndim == 3:
        a = rgb2gray(a[..., :3])
    h, w = a.shape
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    a = resize(a[top:top + s, left:left + s], (side, side), anti_aliasing=True,
               preserve_range=True)
    if a.max() <= 1.0:
        a = a * 255.0
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def main():
    out = corpus_dir()
    os.makedirs(out, exist_ok=True)
    for k, name in enumerate(SOURCES, start=1):
        img = to_square_gray(getattr(data, name)())
        path = os.path.join(out, f"{k}_{name}.pgm")
        pgm_write(path, Image(img, 256))
        print(path, img.shape, int(img.min()), int(img.max()))


if __name__ == "__main__":
    main()
