"""The decision-based attack: boundary binary search, Monte Carlo
gradient-direction estimation, geometric step search, and the schedules
tying them together.

Each iteration pushes the current adversarial iterate onto the decision
boundary with a binary search, estimates the gradient direction there
from batched sphere probes, then walks along that direction with a
halving step search until the perturbed point is adversarial again.
Every candidate point is clipped into the unit cube before it is
queried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import (
    DegenerateSuccessError,
    InitializationFailedError,
    InvalidInitializationError,
    InvalidInputError,
    QueryBudgetExceededError,
    StepSearchFailedError,
)
from .geometry import (
    Norm,
    as_sample,
    clip_to_domain,
    distance,
    project_toward,
    sample_unit_sphere_batch,
)
from .oracles import BudgetedOracleView, QueryingOracle
from .rng import RngStream, as_generator

DecisionOracle = QueryingOracle | BudgetedOracleView

TRACE_SCHEMA_VERSION = 1

# Step-size rules selectable for the sensitivity experiments. The
# default halves-on-failure search applies on top of all of them.
STEP_SCHEMES = (
    "sqrt-decay",
    "linear-decay",
    "no-decay",
    "grid-search",
    "constant:0.01",
    "constant:0.1",
    "constant:1.0",
)

_STEP_UNDERFLOW = 1e-12
_INIT_BLEND_WEIGHTS = tuple(k / 10 for k in range(1, 11))
_INIT_MAX_DRAWS = 100
_GRID_EXPONENTS = range(-10, 3)


# ---------------------------------------------------------------------------
# Configuration and trace
# ---------------------------------------------------------------------------


@dataclass
class AttackConfig:
    """Run parameters for the main attack."""

    norm: Norm = Norm.L2
    targeted: bool = False
    target_label: int | None = None
    iterations: int = 64
    initial_batch: int = 100
    max_queries: int | None = 25000
    theta_override: float | None = None
    q_exponent: float = 0.5
    seed: int = 0
    use_baseline: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidInputError(f"iterations must be >= 1, got {self.iterations}")
        if self.initial_batch < 2:
            raise InvalidInputError(f"initial_batch must be >= 2, got {self.initial_batch}")
        if not 0.5 <= self.q_exponent < 1.0:
            raise InvalidInputError(f"q_exponent must lie in [1/2, 1), got {self.q_exponent}")
        if self.targeted and self.target_label is None:
            raise InvalidInputError("targeted attack needs a target_label")
        if self.theta_override is not None and not 0.0 < self.theta_override < 1.0:
            raise InvalidInputError("theta_override must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "norm": self.norm.value,
            "targeted": self.targeted,
            "target_label": self.target_label,
            "iterations": self.iterations,
            "initial_batch": self.initial_batch,
            "max_queries": self.max_queries,
            "theta_override": self.theta_override,
            "q_exponent": self.q_exponent,
            "seed": self.seed,
            "use_baseline": self.use_baseline,
        }


@dataclass
class IterationRecord:
    """One certified iterate: queries spent so far and its distance.

    The serialized schema carries the seven public fields; the
    remaining attributes are in-memory diagnostics (post-binary-search
    distance and the per-site query split) used by property tests and
    the harness.
    """

    t: int
    queries: int
    distance: float
    xi: float
    delta: float
    batch: int
    fallback_used: bool
    boundary_distance: float | None = None
    binsearch_queries: int = 0
    estimate_queries: int = 0
    step_queries: int = 0

    def to_record_dict(self) -> dict:
        return {
            "t": self.t,
            "queries": self.queries,
            "distance": self.distance,
            "xi": self.xi,
            "delta": self.delta,
            "batch": self.batch,
            "fallback_used": self.fallback_used,
        }


@dataclass
class AttackTrace:
    """Per-iteration record of an attack run plus its final sample."""

    config: dict
    records: list[IterationRecord] = field(default_factory=list)
    final_sample: np.ndarray | None = None
    success: bool = False
    queries_used: int = 0

    def best_distance_at(self, checkpoint: int) -> float:
        """Smallest certified distance using at most ``checkpoint`` queries."""
        best = math.inf
        for record in self.records:
            if record.queries <= checkpoint:
                best = min(best, record.distance)
        return best

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "records": [r.to_record_dict() for r in self.records],
            "final_sample": None if self.final_sample is None else list(self.final_sample),
            "success": self.success,
            "queries_used": self.queries_used,
        }


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


def schedule_theta(d: int, norm: Norm) -> float:
    """Binary-search threshold d^(-q-1): d^(-3/2) for L2, d^(-2) for Linf."""
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    return float(d) ** -(norm.dual_exponent + 1.0)


def schedule_delta(d: int, dist_prev: float, norm: Norm = Norm.L2) -> float:
    """Probe radius dist_prev / d, using the pre-projection distance."""
    if dist_prev < 0:
        raise InvalidInputError(f"dist_prev must be nonnegative, got {dist_prev}")
    if dist_prev == 0:
        raise DegenerateSuccessError("adversarial iterate coincides with the original sample")
    return dist_prev / float(d)


def schedule_batch(b0: int, t: int, remaining: int | None = None) -> int:
    """Probe count floor(b0 * sqrt(t)), capped by the remaining budget."""
    if b0 < 2:
        raise InvalidInputError(f"b0 must be >= 2, got {b0}")
    if t < 1:
        raise InvalidInputError(f"iteration index must be >= 1, got {t}")
    batch = int(math.floor(b0 * math.sqrt(t)))
    if remaining is not None:
        batch = min(batch, max(remaining, 0))
    return batch


def schedule_initial_step(dist: float, t: int, q: float = 0.5) -> float:
    """Initial step size dist * t^(-q); q = 1/2 is the default rule."""
    if dist <= 0:
        raise InvalidInputError(f"dist must be positive, got {dist}")
    if t < 1:
        raise InvalidInputError(f"iteration index must be >= 1, got {t}")
    return dist * float(t) ** (-q)


# ---------------------------------------------------------------------------
# Boundary binary search
# ---------------------------------------------------------------------------


@dataclass
class BinSearchResult:
    sample: np.ndarray
    alpha: float  # blend weight of the adversarial endpoint at the returned point
    queries: int


def bin_search(oracle: DecisionOracle, x_adv, x_star, theta: float, norm: Norm) -> BinSearchResult:
    """Bisect along the projection path to a just-adversarial point.

    The search variable is the blend weight of the adversarial endpoint
    (1 keeps ``x_adv``, 0 collapses onto ``x_star``); the adversarial
    upper end of the bracket is returned once the bracket is narrower
    than ``theta``. Endpoints are assumed, not re-queried, so exactly
    ceil(log2(1/theta)) decisions are spent.
    """
    x_adv = as_sample(x_adv)
    x_star = as_sample(x_star)
    if x_adv.shape != x_star.shape:
        raise InvalidInputError(f"dimension mismatch: {x_adv.shape} vs {x_star.shape}")
    if not 0.0 < theta < 1.0:
        raise InvalidInputError(f"theta must lie in (0, 1), got {theta}")

    def position(weight: float) -> np.ndarray:
        return project_toward(x_star, x_adv, 1.0 - weight, norm)

    low, high = 0.0, 1.0
    queries = 0
    while high - low > theta:
        mid = (low + high) / 2.0
        if oracle.decision(position(mid)):
            high = mid
        else:
            low = mid
        queries += 1
    return BinSearchResult(position(high), high, queries)


# ---------------------------------------------------------------------------
# Gradient-direction estimation
# ---------------------------------------------------------------------------


@dataclass
class GradientDirectionEstimate:
    raw: np.ndarray
    direction: np.ndarray
    probes_used: int
    fallback_used: bool


def combine_probe_outcomes(
    directions: np.ndarray, phis: np.ndarray, use_baseline: bool
) -> tuple[np.ndarray, bool]:
    """Fold probe outcomes (+1/-1) and their directions into a raw estimate.

    With the baseline, each outcome is centered by the probe mean
    before averaging, which cancels the common-offset noise when the
    center point sits off the boundary. If every probe agrees, both
    forms are degenerate (the centered one identically zero), so the
    mean probe direction signed by the common outcome is used instead
    and the fallback is flagged.
    """
    phis = np.asarray(phis, dtype=np.float64)
    b = phis.shape[0]
    if np.all(phis == phis[0]):
        return phis[0] * directions.mean(axis=0), True
    if use_baseline:
        raw = ((phis - phis.mean())[:, None] * directions).sum(axis=0) / (b - 1)
    else:
        raw = (phis[:, None] * directions).mean(axis=0)
    if not np.any(raw):  # mixed outcomes cancelling exactly: sign the mean direction
        return float(np.sign(phis.sum()) or 1.0) * directions.mean(axis=0), True
    return raw, False


def _unit(vector: np.ndarray) -> np.ndarray:
    norm_ = float(np.linalg.norm(vector))
    if norm_ < 1e-300:
        out = np.zeros_like(vector)
        out[0] = 1.0
        return out
    return vector / norm_


def estimate_gradient_direction(
    oracle: DecisionOracle,
    x_t,
    delta: float,
    batch: int,
    rng: "RngStream | np.random.Generator",
    use_baseline: bool = True,
    norm: Norm = Norm.L2,
) -> GradientDirectionEstimate:
    """Monte Carlo estimate of the gradient direction at ``x_t``.

    Draws ``batch`` uniform sphere directions (all generated up front,
    in a fixed order), queries the clipped probes ``x_t + delta*u``,
    and maps success to +1 / failure to -1. The returned direction is
    unit-L2 for the L2 norm and entrywise sign for the max norm.
    Consumes exactly ``batch`` queries.
    """
    x_t = as_sample(x_t)
    if delta <= 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    if batch < 2:
        raise InvalidInputError(f"batch must be >= 2, got {batch}")
    gen = as_generator(rng)
    directions = sample_unit_sphere_batch(batch, x_t.shape[0], gen)
    probes = clip_to_domain(x_t[None, :] + delta * directions)
    outcomes = oracle.decision_batch(probes)
    phis = np.where(outcomes, 1.0, -1.0)
    raw, fallback = combine_probe_outcomes(directions, phis, use_baseline)
    direction = _unit(raw) if norm is Norm.L2 else np.sign(raw)
    return GradientDirectionEstimate(raw, direction, batch, fallback)


# ---------------------------------------------------------------------------
# Step-size search
# ---------------------------------------------------------------------------


@dataclass
class StepSearchResult:
    xi: float
    sample: np.ndarray
    queries: int


def step_size_search(
    oracle: DecisionOracle, x_t, direction, xi_init: float
) -> StepSearchResult:
    """Halve the step until the perturbed point is adversarial again.

    Tries xi_init, xi_init/2, ... (one query each) and returns the
    first success. Underflow below 1e-12 * xi_init without a success
    raises ``StepSearchFailedError``; the attack then falls back to a
    pure re-projection iteration.
    """
    x_t = as_sample(x_t)
    direction = as_sample(direction)
    if xi_init <= 0:
        raise InvalidInputError(f"xi_init must be positive, got {xi_init}")
    xi = float(xi_init)
    floor_xi = xi_init * _STEP_UNDERFLOW
    queries = 0
    while xi >= floor_xi:
        candidate = clip_to_domain(x_t + xi * direction)
        queries += 1
        if oracle.decision(candidate):
            return StepSearchResult(xi, candidate, queries)
        xi /= 2.0
    raise StepSearchFailedError(
        f"step search underflowed below {floor_xi:.3e} after {queries} trials", queries=queries
    )


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------


def init_untargeted(
    oracle: DecisionOracle, x_star, rng: "RngStream | np.random.Generator"
) -> np.ndarray:
    """Blend toward uniform noise until the mix is misclassified.

    Draws eta uniform on the cube and scans blend weights 0.1..1.0;
    the first adversarial blend wins. Redraws eta up to 100 times
    before reporting failure.
    """
    x_star = as_sample(x_star)
    gen = as_generator(rng)
    for _ in range(_INIT_MAX_DRAWS):
        eta = gen.uniform(0.0, 1.0, size=x_star.shape[0])
        for weight in _INIT_BLEND_WEIGHTS:
            candidate = clip_to_domain((1.0 - weight) * x_star + weight * eta)
            if oracle.decision(candidate):
                return candidate
    raise InitializationFailedError(
        f"no adversarial blend found after {_INIT_MAX_DRAWS} noise draws"
    )


def init_targeted(x_init, oracle: DecisionOracle) -> np.ndarray:
    """Verify a caller-supplied target-class exemplar (one query)."""
    x_init = as_sample(x_init)
    if not oracle.decision(x_init):
        raise InvalidInitializationError("provided initialization is not adversarial")
    return x_init


# ---------------------------------------------------------------------------
# Step-size schemes (sensitivity experiments)
# ---------------------------------------------------------------------------


def _initial_step_for_scheme(scheme: str, dist: float, t: int, q: float) -> float:
    if scheme == "sqrt-decay":
        return schedule_initial_step(dist, t, q)
    if scheme == "linear-decay":
        return dist / t
    if scheme == "no-decay":
        return dist
    if scheme.startswith("constant:"):
        return float(scheme.split(":", 1)[1])
    raise InvalidInputError(f"unknown step scheme {scheme!r}; valid: {', '.join(STEP_SCHEMES)}")


def validate_step_scheme(scheme: str) -> str:
    if scheme not in STEP_SCHEMES:
        raise InvalidInputError(
            f"unknown step scheme {scheme!r}; valid: {', '.join(STEP_SCHEMES)}"
        )
    return scheme


def _grid_search_step(
    oracle: DecisionOracle, x_t, x_star, direction, dist: float, theta: float, norm: Norm
) -> tuple[float | None, int]:
    """Pick the step from a log grid by post-binary-search distance.

    Every candidate costs one decision plus, when adversarial, a full
    binary search; the query cost is paid through the oracle like any
    other probe.
    """
    best_xi = None
    best_dist = math.inf
    queries = 0
    for k in _GRID_EXPONENTS:
        xi = (2.0**k) * dist
        candidate = clip_to_domain(x_t + xi * direction)
        queries += 1
        if not oracle.decision(candidate):
            continue
        result = bin_search(oracle, candidate, x_star, theta, norm)
        queries += result.queries
        candidate_dist = distance(result.sample, x_star, norm)
        if candidate_dist < best_dist:
            best_dist = candidate_dist
            best_xi = xi
    return best_xi, queries


# ---------------------------------------------------------------------------
# The full attack
# ---------------------------------------------------------------------------


def hsja_attack(
    oracle: QueryingOracle,
    x_star,
    config: AttackConfig,
    x_init=None,
    *,
    step_scheme: str = "sqrt-decay",
    iterate_hook: Callable[[int, np.ndarray, float], None] | None = None,
) -> AttackTrace:
    """Run the full attack and return its trace.

    Iteration t: binary-search the previous iterate onto the boundary,
    estimate the gradient direction there with a batch of
    floor(b0*sqrt(t)) probes at radius dist/d, then step along it with
    the halving search. The final output is one more binary search.

    ``config.max_queries`` budgets the optimization machinery (the
    untargeted initialization scan included); the one-query targeted
    verification is a precondition check performed regardless. Budget
    exhaustion at any query site truncates the run and returns the
    best certified iterate found so far; ``iterate_hook`` (if any)
    sees each post-binary-search iterate.
    """
    x_star = as_sample(x_star)
    d = x_star.shape[0]
    classifier = oracle.objective.classifier
    if d != classifier.input_dim:
        raise InvalidInputError(f"sample dimension {d} != model dimension {classifier.input_dim}")
    if config.targeted != oracle.objective.targeted:
        raise InvalidInputError("config and objective disagree on targeted mode")
    if config.targeted and x_init is None:
        raise InvalidInputError("targeted attack requires a target-class exemplar as x_init")
    validate_step_scheme(step_scheme)

    norm = config.norm
    theta = config.theta_override if config.theta_override is not None else schedule_theta(d, norm)
    gen = RngStream(config.seed, stream_id=0).generator()
    trace = AttackTrace(config=dict(config.to_dict(), attack="hsja"))

    best_sample: np.ndarray | None = None
    best_dist = math.inf

    def observe(sample: np.ndarray, dist: float) -> None:
        nonlocal best_sample, best_dist
        if dist < best_dist:
            best_sample = sample
            best_dist = dist

    def bail() -> AttackTrace:
        trace.final_sample = best_sample
        trace.queries_used = oracle.query_count
        return trace

    # Initialization: a certified adversarial starting point. Targeted
    # verification runs against the raw oracle (precondition check);
    # the untargeted scan is part of the budgeted search.
    budgeted = BudgetedOracleView(oracle, config.max_queries)
    try:
        if config.targeted:
            x_tilde = init_targeted(x_init, oracle)
        else:
            x_tilde = init_untargeted(budgeted, x_star, gen)
    except QueryBudgetExceededError:
        # The oracle's own hard cap blocked even the verification (or
        # the scan): return what the caller asserted, success flag down.
        if config.targeted:
            x0 = as_sample(x_init)
            trace.records.append(
                IterationRecord(0, oracle.query_count, distance(x0, x_star, norm), 0.0, 0.0, 0, False)
            )
            trace.final_sample = x0
            trace.queries_used = oracle.query_count
            return trace
        return bail()

    d_prev = distance(x_tilde, x_star, norm)
    observe(x_tilde, d_prev)
    trace.records.append(IterationRecord(0, oracle.query_count, d_prev, 0.0, 0.0, 0, False))
    trace.success = True

    skip_final = False
    try:
        for t in range(1, config.iterations):
            boundary = bin_search(budgeted, x_tilde, x_star, theta, norm)
            x_t = boundary.sample
            boundary_dist = distance(x_t, x_star, norm)
            observe(x_t, boundary_dist)
            if iterate_hook is not None:
                iterate_hook(t, x_t, d_prev)
            if d_prev == 0.0 or boundary_dist == 0.0:
                skip_final = True  # perturbation vanished; nothing left to optimize
                break

            batch = schedule_batch(config.initial_batch, t, budgeted.remaining())
            if batch < 2:
                skip_final = True
                break
            delta = schedule_delta(d, d_prev, norm)
            estimate = estimate_gradient_direction(
                budgeted, x_t, delta, batch, gen, config.use_baseline, norm
            )

            if step_scheme == "grid-search":
                grid_xi, grid_queries = _grid_search_step(
                    budgeted, x_t, x_star, estimate.direction, boundary_dist, theta, norm
                )
                xi_init = grid_xi if grid_xi is not None else schedule_initial_step(
                    boundary_dist, t, config.q_exponent
                )
                step_queries_before = grid_queries
            else:
                xi_init = _initial_step_for_scheme(
                    step_scheme, boundary_dist, t, config.q_exponent
                )
                step_queries_before = 0

            try:
                step = step_size_search(budgeted, x_t, estimate.direction, xi_init)
                xi, x_tilde = step.xi, step.sample
                step_queries = step.queries
            except StepSearchFailedError as err:
                # Pure re-projection iteration: keep the boundary point.
                xi, x_tilde = 0.0, x_t
                step_queries = err.queries

            d_t = distance(x_tilde, x_star, norm)
            observe(x_tilde, d_t)
            trace.records.append(
                IterationRecord(
                    t,
                    oracle.query_count,
                    d_t,
                    xi,
                    delta,
                    batch,
                    estimate.fallback_used,
                    boundary_distance=boundary_dist,
                    binsearch_queries=boundary.queries,
                    estimate_queries=batch,
                    step_queries=step_queries_before + step_queries,
                )
            )
            d_prev = d_t

        if not skip_final:
            final = bin_search(budgeted, x_tilde, x_star, theta, norm)
            final_dist = distance(final.sample, x_star, norm)
            observe(final.sample, final_dist)
            trace.records.append(
                IterationRecord(
                    config.iterations,
                    oracle.query_count,
                    final_dist,
                    0.0,
                    0.0,
                    0,
                    False,
                    boundary_distance=final_dist,
                    binsearch_queries=final.queries,
                )
            )
    except QueryBudgetExceededError:
        pass  # truncated: fall through with the best iterate so far

    return bail()


# ---------------------------------------------------------------------------
# Idealized gradient-access update (convergence-rate verification)
# ---------------------------------------------------------------------------


def gradient_access_descent(
    score_fn: Callable[[np.ndarray], float],
    gradient_fn: Callable[[np.ndarray], np.ndarray],
    x_star,
    x0,
    iterations: int,
    q: float = 0.75,
) -> np.ndarray:
    """L2 update with exact gradients and an exact boundary line search.

    From a boundary iterate, steps by ||x_t - x*|| * t^(-q) along the
    unit gradient, then bisects the blend back onto the boundary (dense
    bisection, no queries). Returns the cosine between x_t - x* and the
    gradient at each boundary iterate; the decay of 1 - cosine is the
    convergence-rate diagnostic.
    """
    x_star = as_sample(x_star)
    x = as_sample(x0)
    if score_fn(x) <= 0:
        raise InvalidInputError("x0 must start on the positive-score side")

    def to_boundary(point: np.ndarray) -> np.ndarray:
        lo, hi = 0.0, 1.0  # blend weight of x_star; score(lo side) > 0
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if score_fn(mid * x_star + (1.0 - mid) * point) > 0:
                lo = mid
            else:
                hi = mid
        return lo * x_star + (1.0 - lo) * point

    x = to_boundary(x)
    cosines = np.empty(iterations)
    for t in range(1, iterations + 1):
        grad = gradient_fn(x)
        grad_norm = float(np.linalg.norm(grad))
        diff = x - x_star
        dist = float(np.linalg.norm(diff))
        cosines[t - 1] = float(diff @ grad) / (dist * grad_norm)
        xi = dist * float(t) ** (-q)
        while score_fn(x + xi * grad / grad_norm) <= 0 and xi > 1e-300:
            xi /= 2.0
        x = to_boundary(x + xi * grad / grad_norm)
    return cosines
