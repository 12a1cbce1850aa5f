"""Multi-start projected gradient descent over the conductance cube.

Finding a global minimizer is not guaranteed; the runs record what happened
and classify the rounded result against the target set.
"""

from __future__ import annotations

import enum
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InfeasibleConstraint, NonSmoothPoint, SolverFailure, TooManyArcs
from .graph import AugmentedGraph, HamiltonianPath, decode_target, target_paths, encode_hp
from .network import DEFAULT_TOL, Tolerances
from .penalty import PenaltyWeights, objective_value, value_and_gradient


class InitScheme(enum.Enum):
    UNIFORM_RANDOM = "uniform-random"
    CONSTANT_HALF = "constant-half"
    HYPERPLANE_PROJECTED = "hyperplane-projected"


class Classification(enum.Enum):
    HAMILTONIAN_PATH_FOUND = "HamiltonianPathFound"
    LOCAL_MINIMUM_NON_TARGET = "LocalMinimumNonTarget"
    MAX_ITERS_EXCEEDED = "MaxItersExceeded"


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 32
    max_iters: int = 5000
    step_size: float = 0.1
    max_step: float = 10.0
    max_move: float = 0.05  # cap on the max-norm of one raw step
    armijo: float = 1e-4
    shrink: float = 0.5
    tol_obj: float = 1e-10
    tol_step: float = 1e-12
    rng_seed: int = 0
    init_scheme: InitScheme = InitScheme.UNIFORM_RANDOM
    init_low: float = 0.25
    init_high: float = 0.75
    weights: PenaltyWeights = PenaltyWeights()
    perturb_scale: float = 1e-8
    max_perturb_retries: int = 3
    round_threshold: float = 0.5

    def __post_init__(self):
        if self.starts < 1 or self.max_iters < 0:
            raise ValueError("starts must be >= 1 and max_iters >= 0")
        if not (self.step_size > 0 and self.tol_obj > 0 and self.tol_step > 0):
            raise ValueError("step size and tolerances must be positive")
        if self.weights.exponent != 2:
            raise ValueError("projected descent needs the smooth objective (exponent 2)")


def project_box(v, ag: AugmentedGraph | None = None) -> np.ndarray:
    """Clamp to [0, 1]; forced-zero arcs of ``ag`` are set to 0."""
    g = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    if ag is not None:
        g[ag.forced_zero_mask] = 0.0
    return g


def hyperplane_target(ag: AugmentedGraph) -> float:
    """Required sum of the free conductances so that all arcs sum to N-1."""
    return float(ag.n_total - 1 - len(ag.added_arcs))


def project_hyperplane_box(v, ag: AugmentedGraph, tol: float = 1e-14) -> np.ndarray:
    """Euclidean projection onto the box intersected with the hyperplane sum = N-1.

    The projection is ``clip(v - lam, 0, 1)`` for the multiplier ``lam`` making
    the sum hit the target; ``lam`` is bracketed and bisected, then fixed
    exactly from the set of unclamped coordinates.
    """
    v = np.asarray(v, dtype=float)
    free = ~ag.forced_zero_mask
    target = hyperplane_target(ag)
    n_free = int(free.sum())
    if not 0.0 <= target <= n_free:
        raise InfeasibleConstraint(
            f"sum of {n_free} free conductances in [0,1] cannot equal {target:g}"
        )
    x = v[free]
    out = np.zeros_like(v)
    if n_free == 0:
        return out

    def total(lam):
        return np.clip(x - lam, 0.0, 1.0).sum()

    lo, hi = float(x.min()) - 1.0, float(x.max())  # total(lo) = n_free, total(hi) = 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    lam = 0.5 * (lo + hi)
    y = np.clip(x - lam, 0.0, 1.0)
    inner = (y > 0.0) & (y < 1.0)
    if inner.any():
        lam = (x[inner].sum() - (target - (y >= 1.0).sum())) / inner.sum()
        y = np.clip(x - lam, 0.0, 1.0)
    out[free] = y
    return out


@dataclass
class StartRecord:
    start: int
    initial: list[float]
    final: list[float]
    value: float
    iterations: int
    status: str  # converged | stalled | max_iters | nonsmooth
    perturbations: int
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    hit_target: bool = False


@dataclass
class OptimizerRun:
    best_config: list[float]
    best_value: float
    best_start: int
    trajectory: list[tuple[int, float]]
    rounded: list[float]
    classification: Classification
    path: HamiltonianPath | None
    success_rate: float
    starts: list[StartRecord]

    def to_dict(self) -> dict:
        return {
            "best_config": self.best_config,
            "best_value": self.best_value,
            "best_start": self.best_start,
            "trajectory": [list(t) for t in self.trajectory],
            "rounded": self.rounded,
            "classification": self.classification.value,
            "path": None if self.path is None else list(self.path.nodes),
            "success_rate": self.success_rate,
            "starts": [
                {k: (list(map(list, v)) if k == "trajectory" else v) for k, v in asdict(s).items()}
                for s in self.starts
            ],
        }


def round_config(g, threshold: float = 0.5) -> np.ndarray:
    """Binary rounding; values equal to the threshold round down."""
    return (np.asarray(g) > threshold).astype(float)


def initial_point(ag: AugmentedGraph, cfg: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    m = ag.n_base_arcs
    if cfg.init_scheme is InitScheme.CONSTANT_HALF:
        g = np.full(m, 0.5)
    else:
        g = rng.uniform(cfg.init_low, cfg.init_high, m)
    if cfg.init_scheme is InitScheme.HYPERPLANE_PROJECTED:
        return project_hyperplane_box(g, ag)
    return project_box(g, ag)


def _projector(ag: AugmentedGraph, cfg: OptimizerConfig):
    if cfg.init_scheme is InitScheme.HYPERPLANE_PROJECTED:
        return lambda v: project_hyperplane_box(v, ag)
    return lambda v: project_box(v, ag)


def descend(ag: AugmentedGraph, cfg: OptimizerConfig, g0, tol: Tolerances = DEFAULT_TOL,
            start: int = 0, rng: np.random.Generator | None = None) -> StartRecord:
    """Projected gradient descent with Armijo backtracking from ``g0``."""
    rng = rng if rng is not None else np.random.default_rng([cfg.rng_seed, start])
    project = _projector(ag, cfg)
    w = cfg.weights
    x = project(g0)
    initial = x.tolist()
    f = objective_value(ag, x, w, tol)
    traj = [(0, f)]
    eta = cfg.step_size
    status = "max_iters"
    perturbations = 0
    it = 0
    while True:
        if f < cfg.tol_obj:
            status = "converged"
            break
        if it >= cfg.max_iters:
            break
        grad = None
        for attempt in range(cfg.max_perturb_retries + 1):
            try:
                _, grad = value_and_gradient(ag, x, w, tol)
                break
            except NonSmoothPoint:
                if attempt == cfg.max_perturb_retries:
                    break
                perturbations += 1
                trial = project(x + rng.uniform(-cfg.perturb_scale, cfg.perturb_scale, x.shape))
                f_trial = objective_value(ag, trial, w, tol)
                if f_trial <= f:  # keep the trajectory monotone
                    x, f = trial, f_trial
        if grad is None:
            status = "nonsmooth"
            break

        eta = min(2.0 * eta, cfg.max_step)
        gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gmax > 0.0:
            eta = min(eta, cfg.max_move / gmax)
        accepted = False
        while eta > 1e-16:
            x_new = project(x - eta * grad)
            d = x_new - x
            if np.max(np.abs(d)) < cfg.tol_step:
                break
            try:
                f_new = objective_value(ag, x_new, w, tol)
            except SolverFailure:
                eta *= cfg.shrink
                continue
            if f_new <= f + cfg.armijo * float(grad @ d):
                accepted = True
                break
            eta *= cfg.shrink
        if not accepted:
            status = "stalled"
            break
        x, f = x_new, f_new
        it += 1
        traj.append((it, f))

    hit = decode_target(ag, round_config(x, cfg.round_threshold)) is not None
    return StartRecord(start, initial, x.tolist(), f, it, status, perturbations, traj, hit)


def _run_start(args) -> StartRecord:
    ag, cfg, tol, k = args
    rng = np.random.default_rng([cfg.rng_seed, k])
    g0 = initial_point(ag, cfg, rng)
    return descend(ag, cfg, g0, tol, start=k, rng=rng)


def default_jobs() -> int:
    return max(1, int(os.environ.get("OHMPATH_JOBS", "1")))


def optimize(ag: AugmentedGraph, cfg: OptimizerConfig = OptimizerConfig(),
             tol: Tolerances = DEFAULT_TOL, jobs: int | None = None,
             initial: np.ndarray | None = None) -> OptimizerRun:
    """Run ``cfg.starts`` independent descents and keep the best one.

    Each start draws from its own generator seeded by ``(rng_seed, start)``, so
    results do not depend on ``jobs``. ``initial`` replaces the first start's
    initial point.
    """
    jobs = default_jobs() if jobs is None else jobs
    tasks = [(ag, cfg, tol, k) for k in range(cfg.starts)]
    records: list[StartRecord]
    if initial is not None:
        first = descend(ag, cfg, initial, tol, start=0)
        tasks = tasks[1:]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_run_start, tasks))
    else:
        records = [_run_start(t) for t in tasks]
    if initial is not None:
        records.insert(0, first)

    best = min(records, key=lambda r: (r.value, r.start))
    rounded = round_config(best.final, cfg.round_threshold)
    path = decode_target(ag, rounded)
    if path is not None:
        cls = Classification.HAMILTONIAN_PATH_FOUND
    elif best.status == "max_iters":
        cls = Classification.MAX_ITERS_EXCEEDED
    else:
        cls = Classification.LOCAL_MINIMUM_NON_TARGET
    return OptimizerRun(
        best_config=best.final,
        best_value=best.value,
        best_start=best.start,
        trajectory=best.trajectory,
        rounded=rounded.tolist(),
        classification=cls,
        path=path,
        success_rate=sum(r.hit_target for r in records) / len(records),
        starts=records,
    )


@dataclass(frozen=True)
class BinaryEvaluation:
    config: tuple[int, ...]
    objective: float
    in_target: bool


def enumerate_binary(ag: AugmentedGraph, weights: PenaltyWeights = PenaltyWeights(),
                     max_arcs: int = 20, tol: Tolerances = DEFAULT_TOL) -> list[BinaryEvaluation]:
    """Objective at every vertex of the cube, sorted by (objective, config).

    Forced-zero coordinates stay at 0, so only the free ones are enumerated.
    """
    m = ag.n_base_arcs
    if m > max_arcs:
        raise TooManyArcs(f"{m} arcs exceeds the enumeration limit of {max_arcs}")
    free = np.flatnonzero(~ag.forced_zero_mask)
    out = []
    g = np.zeros(m)
    for bits in itertools.product((0.0, 1.0), repeat=len(free)):
        g[free] = bits
        val = objective_value(ag, g, weights, tol)
        out.append(BinaryEvaluation(tuple(int(b) for b in g), val, decode_target(ag, g) is not None))
    out.sort(key=lambda e: (e.objective, e.config))
    return out


@dataclass
class VertexVerification:
    verified: bool
    n_paths: int
    zero_configs: list[tuple[int, ...]]
    expected_configs: list[tuple[int, ...]]
    margin: float | None  # smallest objective above the zero threshold
    counterexamples: list[tuple[int, ...]]
    zero_tol: float

    def to_dict(self) -> dict:
        return {
            "verified": self.verified,
            "n_paths": self.n_paths,
            "zero_configs": [list(c) for c in self.zero_configs],
            "expected_configs": [list(c) for c in self.expected_configs],
            "margin": self.margin,
            "counterexamples": [list(c) for c in self.counterexamples],
            "zero_tol": self.zero_tol,
        }


def verify_vertices(ag: AugmentedGraph, weights: PenaltyWeights = PenaltyWeights(),
                    max_arcs: int = 16, zero_tol: float = 1e-10,
                    tol: Tolerances = DEFAULT_TOL) -> VertexVerification:
    """Check that the zero-objective cube vertices are exactly the encoded oracle paths."""
    table = enumerate_binary(ag, weights, max_arcs, tol)
    paths = target_paths(ag)
    expected = sorted(tuple(int(x) for x in encode_hp(ag, hp)) for hp in paths)
    zeros = sorted(e.config for e in table if e.objective < zero_tol)
    positive = [e.objective for e in table if e.objective >= zero_tol]
    diff = sorted(set(zeros) ^ set(expected))
    return VertexVerification(
        verified=not diff,
        n_paths=len(paths),
        zero_configs=zeros,
        expected_configs=expected,
        margin=min(positive) if positive else None,
        counterexamples=diff,
        zero_tol=zero_tol,
    )
