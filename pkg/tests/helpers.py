"""Shared fixtures: analytic setups with known geometry."""

from __future__ import annotations

import numpy as np

from hopskipjump import AttackObjective, Hyperplane, QuadraticBoundary, QueryingOracle
from hopskipjump.rng import RngStream


def random_hyperplane_setup(seed: int, d: int = 20, cap: int | None = 25000):
    """A random hyperplane with an interior original point.

    Returns (oracle, x_star, optimum) where optimum is the
    point-to-plane distance |<w, x*> + b| / ||w||_2.
    """
    gen = RngStream(777, seed).generator()
    w = gen.standard_normal(d)
    w /= np.linalg.norm(w)
    x_star = gen.uniform(0.25, 0.75, size=d)
    margin = gen.uniform(0.1, 0.3)
    b = margin - w @ x_star  # score(x*) = margin, so the attack must flip to score <= 0
    model = Hyperplane(w, b)
    oracle = QueryingOracle(AttackObjective.untargeted(model, x_star), query_cap=cap)
    optimum = margin / np.linalg.norm(w)
    return oracle, x_star, optimum


def sign_objective(model) -> AttackObjective:
    """Success exactly where the analytic score is positive."""
    return AttackObjective(model, original_label=0, target_label=1)


def tilted_quadratic(d: int) -> tuple[QuadraticBoundary, np.ndarray]:
    """A curved boundary through the cube center, with known gradient.

    Returns (model, boundary_point); the score vanishes exactly at the
    returned point and the gradient Lipschitz constant is 1.
    """
    a = 0.5 * np.diag(np.linspace(-1.0, 1.0, d))
    w = np.linspace(0.8, 1.2, d) / np.sqrt(d)
    x_boundary = np.full(d, 0.5)
    b = -(x_boundary @ a @ x_boundary + w @ x_boundary)
    return QuadraticBoundary(a, w, b), x_boundary
