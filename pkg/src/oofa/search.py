"""Greedy point-exchange search for good N-run order-of-addition designs.

The candidate pool is the explicit full factorial of all w = m! orders
(tractable because component counts are capped at 8).  One pass proposes,
for each run slot in turn, every candidate replacement, keeps the strictly
best one, and repeats until a full pass makes no change.  Multiple random
restarts run independently (child seeds spawned from one root seed) and the
best final design wins; ties go to the earlier restart.

Inestimable designs never enter: candidate batches are screened with a
batched SVD rank check and scored +inf when any compound member's moment
matrix is singular.  Batches are evaluated in fixed-size chunks so the
per-slot sweep stays in a few dozen megabytes even at m = 8.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    CompoundSpec,
    CriterionKind,
    criterion_value,
    factorial_moments,
    orthogonal_coding,
)
from .design import Design
from .errors import SearchFailureError, ValidationError
from .fitting import RANK_RTOL
from .models import full_factorial_matrix
from .perms import check_capacity, enumerate_permutations

_CHUNK_ROWS = 1024
_START_ATTEMPTS = 200


@dataclass(frozen=True)
class SearchConfig:
    """Inputs of one search: problem size, objective, and restart schedule."""

    m: int
    n_runs: int
    objective: CompoundSpec
    restarts: int = 10
    seed: int = 0
    max_passes: int = 50

    def __post_init__(self) -> None:
        check_capacity(self.m)
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_passes < 1:
            raise ValidationError(f"max_passes must be >= 1, got {self.max_passes}")
        p_max = self.objective.max_param_count(self.m)
        if self.n_runs < p_max:
            raise ValidationError(
                f"{self.n_runs} runs cannot estimate a model with {p_max} "
                f"parameters; increase n_runs"
            )


@dataclass(frozen=True)
class SearchResult:
    design: Design
    objective: float
    member_values: tuple[float, ...]
    objective_trace: tuple[float, ...]
    restart: int
    config: SearchConfig = field(repr=False)

    @property
    def seed(self) -> int:
        return self.config.seed


class _Evaluator:
    """Scores batches of designs (as index arrays into the m! pool) at once."""

    def __init__(self, objective: CompoundSpec, m: int):
        self.objective = objective
        self.m = m
        self._members = []
        for member in objective.members:
            xf = full_factorial_matrix(member.model, m).values
            plain, centered, w = factorial_moments(member.model, m)
            if member.criterion.orthogonal_coding:
                xf = orthogonal_coding(member.model, m).apply(xf)
                plain = xf.T @ xf
                rows_centered = xf - xf.mean(axis=0)
                centered = rows_centered.T @ rows_centered
            kind = member.criterion.kind
            sigma2 = member.criterion.sigma2
            if kind is CriterionKind.APV:
                moment, scale = centered, 2.0 * sigma2 / (w - 1)
            elif kind is CriterionKind.AV:
                moment, scale = plain, sigma2 / w
            else:
                moment, scale = None, sigma2
            self._members.append((xf, moment, scale, kind, member.weight))

    def evaluate(self, batch: np.ndarray) -> np.ndarray:
        """Compound objective for each row of ``batch`` (+inf if inestimable)."""
        batch = np.asarray(batch)
        out = np.zeros(batch.shape[0])
        for start in range(0, batch.shape[0], _CHUNK_ROWS):
            chunk = batch[start : start + _CHUNK_ROWS]
            out[start : start + _CHUNK_ROWS] = self._evaluate_chunk(chunk)
        return out

    def _evaluate_chunk(self, chunk: np.ndarray) -> np.ndarray:
        total = np.zeros(chunk.shape[0])
        for xf, moment, scale, kind, weight in self._members:
            x = xf[chunk]  # (B, N, p)
            p = x.shape[2]
            svals = np.linalg.svd(x, compute_uv=False)
            estimable = (x.shape[1] >= p) & (svals[:, -1] > RANK_RTOL * svals[:, 0])
            gram = np.einsum("bij,bik->bjk", x, x)
            # swap singular grams for the identity so batched solves never throw
            gram_safe = np.where(estimable[:, None, None], gram, np.eye(p))
            if kind in (CriterionKind.APV, CriterionKind.AV):
                solved = np.linalg.solve(gram_safe, np.broadcast_to(moment, gram.shape))
                values = scale * np.trace(solved, axis1=1, axis2=2)
            elif kind is CriterionKind.A_OPT:
                eigvals = np.linalg.eigvalsh(gram_safe)
                values = scale / p * np.sum(1.0 / eigvals, axis=1)
            else:  # D_OPT, oriented as its reciprocal
                sign, logdet = np.linalg.slogdet(gram_safe)
                estimable &= sign > 0
                with np.errstate(over="ignore"):
                    values = 1.0 / (scale * np.exp(logdet / p))
            total += weight * np.where(estimable, values, np.inf)
        return total


def random_design(m: int, n_runs: int, seed: int | np.random.Generator) -> Design:
    """A design of ``n_runs`` orders drawn uniformly from all m! candidates."""
    check_capacity(m)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pool = enumerate_permutations(m)
    idx = rng.integers(0, len(pool), size=n_runs)
    return Design(tuple(pool[i] for i in idx))


def _random_start(
    evaluator: _Evaluator, n_runs: int, w: int, rng: np.random.Generator
) -> tuple[np.ndarray, float] | None:
    """First estimable random design among a fixed number of attempts."""
    candidates = rng.integers(0, w, size=(_START_ATTEMPTS, n_runs))
    values = evaluator.evaluate(candidates)
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0:
        return None
    first = int(finite[0])
    return candidates[first].copy(), float(values[first])


def _exchange_pass(
    idx: np.ndarray, current: float, evaluator: _Evaluator, w: int
) -> tuple[float, bool]:
    """One sweep over all slots, mutating ``idx`` in place."""
    improved = False
    for slot in range(idx.shape[0]):
        batch = np.tile(idx, (w, 1))
        batch[:, slot] = np.arange(w)
        values = evaluator.evaluate(batch)
        best = int(np.argmin(values))
        if values[best] < current:  # strict: ties keep the incumbent
            idx[slot] = best
            current = float(values[best])
            improved = True
    return current, improved


def exchange_search(config: SearchConfig) -> SearchResult:
    """Best design over all restarts of the greedy point-exchange heuristic."""
    evaluator = _Evaluator(config.objective, config.m)
    pool = enumerate_permutations(config.m)
    w = len(pool)
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)

    best: tuple[float, int, np.ndarray, tuple[float, ...]] | None = None
    for restart, child in enumerate(children):
        rng = np.random.default_rng(child)
        start = _random_start(evaluator, config.n_runs, w, rng)
        if start is None:
            continue
        idx, current = start
        trace = [current]
        for _ in range(config.max_passes):
            current, improved = _exchange_pass(idx, current, evaluator, w)
            if improved:
                trace.append(current)
            else:
                break
        if best is None or current < best[0]:
            best = (current, restart, idx, tuple(trace))

    if best is None:
        raise SearchFailureError(
            f"no estimable {config.n_runs}-run starting design found in "
            f"{config.restarts} x {_START_ATTEMPTS} attempts; increase n_runs"
        )
    objective, restart, idx, trace = best
    design = Design(tuple(pool[i] for i in idx))
    member_values = tuple(
        criterion_value(mem.model, mem.criterion, design)
        for mem in config.objective.members
    )
    return SearchResult(design, objective, member_values, trace, restart, config)
