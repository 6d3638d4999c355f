"""Locate inscribed pegs: grid scan, damped Newton refinement, orbit deduplication."""

from __future__ import annotations

import itertools
import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Sequence, Union

import numpy as np

from pegs.configspace import (
    DEFAULT_STRATUM_THRESHOLD,
    TWO_PI,
    CyclicConfiguration,
    classify_stratum,
    eta_many,
    is_cyclically_ordered,
)
from pegs.cyclohedron import StratumLabel
from pegs.curves import Curve, check_embedding, ensure_counterclockwise
from pegs.testmaps import (
    DEFAULT_FD_STEP,
    HexagonShape,
    TestMapKind,
    hexagon_degeneracy,
    invariant_norms,
    jacobian,
    rescale,
    rescaled_values,
)

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 8
MAX_CONDITION = 1e12
MIN_DAMPING = 1.0 / 2**14
ETA_FLOOR = 0.1
COLLINEAR_TOL = 1e-8
SCAN_CHUNK = 65536
MEDIAN_SAMPLE = 1 << 20

NEAR_DEGENERATE = "near-degenerate"
ORDER_VIOLATION = "order-violation"
PSEUDO_SOLUTION = "pseudo-solution"
DEGENERATE_HEXAGON = "degenerate-hexagon"
STALLED = "stalled"
MAX_ITER = "max-iter"


class SolverError(Exception):
    """Raised when a curve or request cannot be searched for pegs."""


@dataclass(frozen=True)
class Candidate:
    """A grid configuration whose rescaled residual is a local minimum."""

    params: tuple[float, ...]
    residual: float


@dataclass
class ZeroCertificate:
    """A refined zero with its transversality witness."""

    config: CyclicConfiguration
    points: np.ndarray
    residual: float
    jacobian: np.ndarray
    det_sign: int
    condition_estimate: float
    stratum: StratumLabel
    iterations: int = 0

    @property
    def params(self) -> tuple[float, ...]:
        return self.config.params

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": list(self.params),
            "points": [[float(c) for c in p] for p in self.points],
            "residual": self.residual,
            "det_sign": self.det_sign,
            "condition": self.condition_estimate,
            "iterations": self.iterations,
        }


@dataclass
class RefineFailure:
    """A candidate that did not refine to an interior zero."""

    reason: str
    params: tuple[float, ...]
    residual: float
    iterations: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "reason": self.reason,
            "params": list(self.params),
            "residual": self.residual,
            "iterations": self.iterations,
        }


RefineResult = Union[ZeroCertificate, RefineFailure]


@dataclass
class SolveOptions:
    """Knobs for ``solve``; every field has the command-line default."""

    grid: int = 32
    tol: float = 1e-10
    max_iter: int = 50
    fd_step: float = DEFAULT_FD_STEP
    stratum_threshold: float = DEFAULT_STRATUM_THRESHOLD
    scan_ratio: float = 0.5
    max_candidates: int = 256
    dedup_tol: float = 1e-6
    threads: int | None = None
    pin_first: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SolveReport:
    """Deduplicated zeros of one test map on one curve."""

    kind: TestMapKind
    curve: str
    orbits: list[ZeroCertificate]
    candidates: int = 0
    failures: dict[str, int] = field(default_factory=dict)
    pseudo_solutions: list[RefineFailure] = field(default_factory=list)
    degenerate_hexagons: list[RefineFailure] = field(default_factory=list)

    @property
    def mod2_count(self) -> int:
        return len(self.orbits) % 2

    @property
    def signed_count(self) -> int:
        return sum(z.det_sign for z in self.orbits)

    @property
    def rejected_pseudo(self) -> int:
        return len(self.pseudo_solutions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "curve": self.curve,
            "orbits": [z.to_dict() for z in self.orbits],
            "mod2_count": self.mod2_count,
            "signed_count": self.signed_count,
            "rejected_pseudo": self.rejected_pseudo,
            "candidates": self.candidates,
            "failures": dict(sorted(self.failures.items())),
            "degenerate_hexagons": [f.to_dict() for f in self.degenerate_hexagons],
        }


def _check_kind(curve: Curve, kind: TestMapKind) -> None:
    if curve.dim != kind.dim:
        raise SolverError(f"{kind.value} pegs need a curve in R^{kind.dim}, {curve.name} lives in R^{curve.dim}")


def _scan_residuals(kind: TestMapKind, grid: np.ndarray, grid_points: np.ndarray, block: np.ndarray) -> np.ndarray:
    return invariant_norms(kind, rescale(kind, grid_points[block], grid[block]))


def _combination_chunks(m: int, n: int) -> Iterator[np.ndarray]:
    """Strictly increasing index tuples in lexicographic order, SCAN_CHUNK at a time."""
    combos = itertools.combinations(range(m), n)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, SCAN_CHUNK)), dtype=np.int64)
        if not flat.size:
            return
        yield flat.reshape(-1, n)


def grid_scan(
    curve: Curve,
    kind: TestMapKind,
    resolution: int = 32,
    scan_ratio: float = 0.5,
    max_candidates: int = 256,
) -> list[Candidate]:
    """Find grid configurations where the rescaled residual is locally minimal.

    Only strictly increasing index tuples are scanned, one per cyclic
    relabelling class; the residual is the relabelling-invariant norm.
    Neighbours differ by one grid step in one index. Minima at or below
    ``scan_ratio`` times the median residual are returned, best first.

    Tuples are streamed in chunks and never held all at once. The median
    is taken over an evenly strided sample of at most ``MEDIAN_SAMPLE``
    residuals, which is every residual on grids of that size or less.

    Raises:
        SolverError: If the resolution is below 8 or the curve has the wrong dimension
    """
    _check_kind(curve, kind)
    n, m = kind.n, resolution
    if m < MIN_RESOLUTION:
        raise SolverError(f"Grid resolution must be at least {MIN_RESOLUTION}, got {m}")
    grid = np.arange(m) * (TWO_PI / m)
    grid_points = curve.eval_many(grid)

    total = math.comb(m, n)
    stride = -(-total // MEDIAN_SAMPLE)
    sample = []
    offset = 0
    for block in _combination_chunks(m, n):
        residuals = _scan_residuals(kind, grid, grid_points, block)
        sample.append(residuals[(-offset) % stride :: stride])
        offset += len(block)
    threshold = scan_ratio * float(np.median(np.concatenate(sample)))

    kept_combos, kept_residuals = [], []
    for block in _combination_chunks(m, n):
        residuals = _scan_residuals(kind, grid, grid_points, block)
        below = residuals <= threshold
        block, residuals = block[below], residuals[below]
        for i in range(n):
            for step in (-1, 1):
                moved = block[:, i] + step
                valid = (moved >= 0) & (moved < m)
                if i > 0:
                    valid &= moved > block[:, i - 1]
                if i < n - 1:
                    valid &= moved < block[:, i + 1]
                if not valid.any():
                    continue
                neighbours = block[valid]
                neighbours[:, i] += step
                beaten = np.zeros(len(block), dtype=bool)
                beaten[valid] = _scan_residuals(kind, grid, grid_points, neighbours) < residuals[valid]
                block, residuals = block[~beaten], residuals[~beaten]
        kept_combos.append(block)
        kept_residuals.append(residuals)

    combos = np.concatenate(kept_combos)
    residuals = np.concatenate(kept_residuals)
    selected = np.argsort(residuals, kind="stable")[:max_candidates]
    logger.info(
        "grid %d: %d configurations, %d local minima below %.3g, %d candidates",
        m,
        total,
        len(residuals),
        threshold,
        len(selected),
    )
    return [Candidate(tuple(float(v) for v in grid[combos[i]]), float(residuals[i])) for i in selected]


def _collapsing(params: np.ndarray, threshold: float) -> bool:
    if eta_many(params) >= ETA_FLOOR:
        return False
    return not classify_stratum(CyclicConfiguration(tuple(params)), threshold).is_interior


def newton_refine(
    curve: Curve,
    kind: TestMapKind,
    candidate: Candidate | Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 50,
    fd_step: float = DEFAULT_FD_STEP,
    stratum_threshold: float = DEFAULT_STRATUM_THRESHOLD,
    pin_first: bool = False,
) -> RefineResult:
    """Refine a candidate by damped Newton on the rescaled test map.

    Each step solves the finite-difference linearisation in the least-squares
    sense and is halved until the residual decreases with the points still
    in cyclic order. Iterates that collapse (eta below 0.1 with a non-empty
    stratum) are rejected as pseudo-solutions. A converged zero is relabelled
    so that its smallest parameter comes first before the Jacobian is taken.

    Args:
        curve: Curve to inscribe in
        kind: Peg shape
        candidate: Starting parameters
        tol: Residual below which the iteration stops
        max_iter: Newton step limit
        fd_step: Finite-difference step for the Jacobian
        stratum_threshold: Gap ratio used by stratum classification
        pin_first: Keep the first parameter fixed (rotation-symmetric curves)

    Returns:
        A ZeroCertificate, or a RefineFailure naming the reason
    """
    start = candidate.params if isinstance(candidate, Candidate) else candidate
    params = np.asarray(start, dtype=float) % TWO_PI
    residual = math.inf
    iterations = 0

    def fail(reason: str) -> RefineFailure:
        logger.debug("candidate %s rejected after %d steps: %s", tuple(start), iterations, reason)
        return RefineFailure(reason, tuple(float(p) for p in params % TWO_PI), float(residual), iterations)

    if not is_cyclically_ordered(params):
        return fail(ORDER_VIOLATION)
    values = rescaled_values(curve, params, kind)
    residual = float(np.linalg.norm(values))

    while True:
        if _collapsing(params, stratum_threshold):
            return fail(PSEUDO_SOLUTION)
        if residual < tol:
            break
        if iterations >= max_iter:
            return fail(MAX_ITER)
        iterations += 1

        jac = jacobian(curve, params, kind, fd_step)
        active = jac[:, 1:] if pin_first else jac
        if np.linalg.cond(active) > MAX_CONDITION:
            return fail(NEAR_DEGENERATE)
        step = np.linalg.lstsq(active, -values, rcond=None)[0]
        if pin_first:
            step = np.concatenate(([0.0], step))

        damping = 1.0
        ordered_trial = False
        while damping >= MIN_DAMPING:
            trial = params + damping * step
            if is_cyclically_ordered(trial):
                ordered_trial = True
                trial_values = rescaled_values(curve, trial, kind)
                trial_residual = float(np.linalg.norm(trial_values))
                if trial_residual < residual:
                    params, values, residual = trial % TWO_PI, trial_values, trial_residual
                    break
            damping *= 0.5
        else:
            return fail(STALLED if ordered_trial else ORDER_VIOLATION)

    config = CyclicConfiguration(tuple(params)).canonical()
    stratum = classify_stratum(config, stratum_threshold)
    if not stratum.is_interior:
        return fail(PSEUDO_SOLUTION)
    points = curve.eval_many(config.array())
    if kind is TestMapKind.HEXAGON and hexagon_degeneracy(points, COLLINEAR_TOL) is not HexagonShape.AFFINE_REGULAR:
        return fail(DEGENERATE_HEXAGON)

    jac = jacobian(curve, config, kind, fd_step)
    condition = float(np.linalg.cond(jac[:, 1:] if pin_first else jac))
    det_sign = 0 if pin_first else int(np.sign(np.linalg.det(jac)))
    final = float(np.linalg.norm(rescaled_values(curve, config.array(), kind)))
    logger.debug("zero at %s after %d steps, residual %.3g", config.params, iterations, final)
    return ZeroCertificate(
        config=config,
        points=points,
        residual=final,
        jacobian=jac,
        det_sign=det_sign,
        condition_estimate=condition,
        stratum=stratum,
        iterations=iterations,
    )


def orbit_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Largest angular difference after the best cyclic relabelling of b."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    best = math.inf
    for k in range(len(b_arr)):
        diff = (a_arr - np.roll(b_arr, -k) + math.pi) % TWO_PI - math.pi
        best = min(best, float(np.abs(diff).max()))
    return best


def dedup_orbits(zeros: Sequence[ZeroCertificate], tol: float = 1e-6) -> list[ZeroCertificate]:
    """Keep one zero per cyclic-relabelling orbit.

    Zeros are visited in order of their canonical parameter tuples, so the
    kept representative is the lexicographically smallest and the result
    does not depend on the order the zeros were found in.
    """
    representatives: list[ZeroCertificate] = []
    for zero in sorted(zeros, key=lambda z: z.config.canonical().params):
        if all(orbit_distance(zero.params, rep.params) > tol for rep in representatives):
            representatives.append(zero)
    return representatives


def solve(curve: Curve, kind: TestMapKind, options: SolveOptions | None = None) -> SolveReport:
    """Find every inscribed peg the grid scan can reach.

    A clockwise planar curve is reversed first. Candidates are refined on a
    thread pool; results are merged in candidate order, so the report is
    identical for any thread count.

    Raises:
        SolverError: If the curve fails the embedding check or has the wrong dimension
    """
    options = options or SolveOptions()
    _check_kind(curve, kind)
    curve = ensure_counterclockwise(curve)
    embedding = check_embedding(curve)
    if not embedding.ok:
        raise SolverError(f"Curve {curve.name} is not a counterclockwise embedding: {'; '.join(embedding.problems)}")

    candidates = grid_scan(curve, kind, options.grid, options.scan_ratio, options.max_candidates)

    def refine(candidate: Candidate) -> RefineResult:
        return newton_refine(
            curve,
            kind,
            candidate,
            tol=options.tol,
            max_iter=options.max_iter,
            fd_step=options.fd_step,
            stratum_threshold=options.stratum_threshold,
            pin_first=options.pin_first,
        )

    with ThreadPoolExecutor(max_workers=options.threads or os.cpu_count()) as pool:
        results = list(pool.map(refine, candidates))

    zeros = [r for r in results if isinstance(r, ZeroCertificate)]
    failures = [r for r in results if isinstance(r, RefineFailure)]
    orbits = dedup_orbits(zeros, options.dedup_tol)
    report = SolveReport(
        kind=kind,
        curve=curve.name,
        orbits=orbits,
        candidates=len(candidates),
        failures=dict(Counter(f.reason for f in failures)),
        pseudo_solutions=[f for f in failures if f.reason == PSEUDO_SOLUTION],
        degenerate_hexagons=[f for f in failures if f.reason == DEGENERATE_HEXAGON],
    )
    logger.info(
        "%s on %s: %d candidates, %d zeros, %d orbits, %d pseudo-solutions",
        kind.value,
        curve.name,
        len(candidates),
        len(zeros),
        len(orbits),
        report.rejected_pseudo,
    )
    return report
