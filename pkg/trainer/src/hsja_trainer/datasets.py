"""Desk-scale datasets, rescaled into the unit hypercube.

Two tasks: interleaved half-moons (d=2, binary) and the 8x8 digits
(d=64, ten classes). Both are mapped into [0, 1]^d with fixed affine
transforms so the attack-side domain clipping stays meaningful.
"""

from __future__ import annotations

import numpy as np
from sklearn.datasets import load_digits, make_moons
from sklearn.model_selection import train_test_split

# make_moons with noise 0.2 stays inside these boxes; the map below
# sends them into the unit square.
_MOONS_OFFSET = np.array([1.5, 1.0])
_MOONS_SCALE = np.array([4.0, 2.5])


def moons(seed: int, n_samples: int = 600):
    """Interleaved half-moons in [0, 1]^2."""
    x, y = make_moons(n_samples=n_samples, noise=0.2, random_state=seed)
    x = np.clip((x + _MOONS_OFFSET) / _MOONS_SCALE, 0.0, 1.0)
    return x, y.astype(np.int64)


def digits():
    """The 8x8 digits with pixel intensities scaled to [0, 1]."""
    bunch = load_digits()
    return bunch.data / 16.0, bunch.target.astype(np.int64)


def load_dataset(name: str, seed: int):
    """(x_train, x_test, y_train, y_test, input_dim, n_classes)."""
    if name == "moons":
        x, y = moons(seed)
    elif name == "digits":
        x, y = digits()
    else:
        raise ValueError(f"unknown dataset {name!r}; use moons|digits")
    x_train, x_test, y_train, y_test = train_test_split(
        x, y, test_size=0.25, random_state=seed, stratify=y
    )
    return x_train, x_test, y_train, y_test, x.shape[1], int(y.max()) + 1
