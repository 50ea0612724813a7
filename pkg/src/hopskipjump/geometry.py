"""Norm-aware vector primitives used by the attacks.

Samples are 1-D float64 arrays over the unit cube [0, 1]^d. All
operations here are pure; nothing touches an oracle or a counter.

Both projection operators share one parametrization: ``alpha`` is the
pull strength toward the reference point ``x_star`` (alpha=0 leaves
``x`` unchanged, alpha=1 collapses onto ``x_star``). For the max-norm
variant that means the clip half-width is ``(1-alpha) * ||x-x*||_inf``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .exceptions import InvalidInputError
from .rng import RngStream, as_generator


class Norm(Enum):
    """Distance metric the attack optimizes."""

    L2 = "l2"
    LINF = "linf"

    @property
    def dual_exponent(self) -> float:
        """q = 1 - 1/p: exactly 1/2 for L2 and 1 for the max norm."""
        return 0.5 if self is Norm.L2 else 1.0

    @classmethod
    def parse(cls, text: str) -> "Norm":
        try:
            return cls(text.lower())
        except ValueError:
            raise InvalidInputError(f"unknown norm {text!r}; expected 'l2' or 'linf'") from None


def as_sample(values) -> np.ndarray:
    """Coerce to a 1-D float64 vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInputError(f"sample must be a 1-D vector, got shape {arr.shape}")
    return arr


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")


def distance(a, b, norm: Norm) -> float:
    """||a - b|| under the chosen norm."""
    a = as_sample(a)
    b = as_sample(b)
    check_same_dim(a, b)
    diff = a - b
    if norm is Norm.L2:
        return float(np.linalg.norm(diff))
    return float(np.max(np.abs(diff)))


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    return float(alpha)


def project_l2(x_star, x, alpha: float) -> np.ndarray:
    """Blend toward the reference: alpha*x_star + (1-alpha)*x."""
    x_star = as_sample(x_star)
    x = as_sample(x)
    check_same_dim(x_star, x)
    alpha = _check_alpha(alpha)
    return alpha * x_star + (1.0 - alpha) * x


def project_linf(x_star, x, alpha: float) -> np.ndarray:
    """Per-coordinate clip of ``x`` into a box around ``x_star``.

    The half-width is c = (1-alpha) * ||x - x_star||_inf, so alpha=0
    returns ``x`` (vacuous clip) and alpha=1 returns ``x_star``.
    """
    x_star = as_sample(x_star)
    x = as_sample(x)
    check_same_dim(x_star, x)
    alpha = _check_alpha(alpha)
    c = (1.0 - alpha) * float(np.max(np.abs(x - x_star)))
    return np.clip(x, x_star - c, x_star + c)


def project_toward(x_star, x, alpha: float, norm: Norm) -> np.ndarray:
    """Norm-dispatched projection used by the boundary binary search."""
    if norm is Norm.L2:
        return project_l2(x_star, x, alpha)
    return project_linf(x_star, x, alpha)


def sample_unit_sphere(d: int, rng: "RngStream | np.random.Generator") -> np.ndarray:
    """One uniform draw from the unit sphere in R^d.

    A d-vector of independent standard normals normalized to unit
    length; exactly uniform in every dimension.
    """
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    return sample_unit_sphere_batch(1, d, as_generator(rng))[0]


def sample_unit_sphere_batch(n: int, d: int, gen: np.random.Generator) -> np.ndarray:
    """(n, d) array of independent uniform sphere draws, fixed order."""
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    draws = gen.standard_normal((n, d))
    norms = np.linalg.norm(draws, axis=1, keepdims=True)
    # A zero draw has probability zero; keep the division defined anyway.
    degenerate = norms[:, 0] < 1e-300
    if np.any(degenerate):
        draws[degenerate, 0] = 1.0
        norms = np.linalg.norm(draws, axis=1, keepdims=True)
    return draws / norms


def clip_to_domain(x) -> np.ndarray:
    """Clamp every coordinate into [0, 1]. Idempotent."""
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
