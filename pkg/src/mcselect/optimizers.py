"""Greedy-family search procedures with deterministic tie-breaking.

Tie-breaking is everywhere "smallest element index", or lexicographically
smallest (slot, element) for partitions: candidate scans go in ascending
order and only a strictly larger score displaces the incumbent.

Cardinality semantics: problems posed with an exact constraint ("eq") force
an acceptance every iteration, because their objectives are non-increasing
and the distorted score test would otherwise never fire; the strict "> 0"
acceptance test applies to budget ("le") constraints.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .chain_core import GuardError, SubsetMask, ValidationError
from .objectives import ObjectiveDecomposition, Partition, Parts

BRUTE_FORCE_CAP = 1 << 24
CERT_SLACK = 1e-9


@dataclass(frozen=True)
class TrajectoryStep:
    iteration: int
    element: int
    slot: int | None
    score: float
    accepted: bool


@dataclass(frozen=True)
class Certificate:
    """Record of the theoretical lower bound against a brute-force optimum."""

    opt: object
    g_opt: float
    c_opt: float
    lower_bound: float
    achieved: float
    satisfied: bool


@dataclass(frozen=True)
class RunResult:
    chosen: object  # SubsetMask or Partition
    objective_value: float
    trajectory: tuple[TrajectoryStep, ...]
    certificate: Certificate | None = None

    def with_certificate(self, certificate: Certificate) -> "RunResult":
        return dataclasses.replace(self, certificate=certificate)


def _check_budget(m: int, ground: SubsetMask, constraint: str) -> None:
    if m < 0:
        raise ValidationError("cardinality budget must be non-negative")
    if m > ground.size:
        raise ValidationError(f"budget m={m} exceeds the ground set of size {ground.size}")
    if constraint not in ("le", "eq"):
        raise ValidationError(f"unknown constraint {constraint!r}")


def greedy(
    f: Callable[[SubsetMask], float],
    ground: SubsetMask,
    m: int,
    constraint: str = "le",
) -> RunResult:
    """Plain greedy maximization of a set function under |S| <= m or = m.

    Under "eq" the best remaining element is always added; under "le" an
    element is added only if its marginal gain is strictly positive (and the
    run stops early once it is not, since nothing changes afterwards).
    """
    _check_budget(m, ground, constraint)
    S = SubsetMask.empty(ground.d)
    current = f(S)
    steps: list[TrajectoryStep] = []
    for i in range(m):
        best_e, best_gain = -1, -math.inf
        for e in ground - S:
            gain = f(S.add(e)) - current
            if gain > best_gain:
                best_e, best_gain = e, gain
        if best_e < 0:
            break
        accept = constraint == "eq" or best_gain > 0.0
        steps.append(TrajectoryStep(i, best_e, None, best_gain, accept))
        if not accept:
            break
        S = S.add(best_e)
        current += best_gain
    return RunResult(S, f(S), tuple(steps))


def distorted_greedy(dec: ObjectiveDecomposition, m: int) -> RunResult:
    """Distorted greedy for f = g - c: at step i pick the element maximizing
    (1 - 1/m)^(m-(i+1)) (g(S + e) - g(S)) - c({e})."""
    if dec.kind != "subset":
        raise ValidationError("distorted_greedy expects a subset decomposition")
    ground = dec.ground
    _check_budget(m, ground, dec.constraint)
    S = SubsetMask.empty(ground.d)
    steps: list[TrajectoryStep] = []
    if m > 0:
        g_current = dec.g(S)
        for i in range(m):
            kappa = (1.0 - 1.0 / m) ** (m - (i + 1))
            best_e, best_score = -1, -math.inf
            for e in ground - S:
                score = kappa * (dec.g(S.add(e)) - g_current) - dec.penalty(e)
                if score > best_score:
                    best_e, best_score = e, score
            if best_e < 0:
                continue
            accept = best_score > 0.0 or dec.constraint == "eq"
            steps.append(TrajectoryStep(i, best_e, None, best_score, accept))
            if accept:
                S = S.add(best_e)
                g_current = dec.g(S)
    return RunResult(S, dec.f(S), tuple(steps))


def generalized_distorted_greedy(dec: ObjectiveDecomposition, m: int) -> RunResult:
    """Distorted greedy over partitions below the ceiling V: the argmax runs
    over pairs (slot j, element e in V_j minus S_j)."""
    if dec.kind != "partition":
        raise ValidationError("generalized_distorted_greedy expects a partition decomposition")
    caps = dec.ceiling
    _check_budget(m, dec.ground, dec.constraint)
    parts: Parts = dec.empty_solution()
    steps: list[TrajectoryStep] = []
    if m > 0:
        g_current = dec.g(parts)
        for i in range(m):
            kappa = (1.0 - 1.0 / m) ** (m - (i + 1))
            best: tuple[int, int] | None = None
            best_score = -math.inf
            for j, cap in enumerate(caps):
                for e in cap - parts[j]:
                    grown = parts[:j] + (parts[j].add(e),) + parts[j + 1 :]
                    score = kappa * (dec.g(grown) - g_current) - dec.penalty((j, e))
                    if score > best_score:
                        best, best_score = (j, e), score
            if best is None:
                continue  # every ceiling group exhausted: remaining iterations no-op
            j, e = best
            accept = best_score > 0.0 or dec.constraint == "eq"
            steps.append(TrajectoryStep(i, e, j, best_score, accept))
            if accept:
                parts = parts[:j] + (parts[j].add(e),) + parts[j + 1 :]
                g_current = dec.g(parts)
    return RunResult(Partition(parts, caps), dec.f(parts), tuple(steps))


def local_search(
    f: Callable[[SubsetMask], float],
    ground: SubsetMask,
    epsilon: float,
    max_steps: int = 10_000_000,
) -> RunResult:
    """Local add/drop search for non-negative submodular maximization.

    Starts from the best singleton, adds any element improving f by the
    factor (1 + epsilon/d^2), then deletes under the same rule and repeats.
    Returns the better of the final S and its complement in the ground set.
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    d = ground.size
    if d == 0:
        empty = SubsetMask.empty(ground.d)
        return RunResult(empty, f(empty), ())
    factor = 1.0 + epsilon / d**2
    steps: list[TrajectoryStep] = []
    budget = max_steps

    best_e, best_val = -1, -math.inf
    for e in ground:
        val = f(SubsetMask.of(ground.d, (e,)))
        if val > best_val:
            best_e, best_val = e, val
    S = SubsetMask.of(ground.d, (best_e,))
    current = best_val
    steps.append(TrajectoryStep(0, best_e, None, best_val, True))

    changed = True
    while changed:
        changed = True
        while changed:
            changed = False
            for a in ground - S:
                budget -= 1
                if budget < 0:
                    raise GuardError("local search exceeded its iteration cap")
                val = f(S.add(a))
                if val >= factor * current:
                    S, current = S.add(a), val
                    steps.append(TrajectoryStep(len(steps), a, None, val, True))
                    changed = True
                    break
        changed = False
        for a in S:
            budget -= 1
            if budget < 0:
                raise GuardError("local search exceeded its iteration cap")
            val = f(S.remove(a))
            if val >= factor * current:
                S, current = S.remove(a), val
                steps.append(TrajectoryStep(len(steps), a, None, val, False))
                changed = True
                break

    inside, outside = f(S), f(ground - S)
    if inside >= outside:
        return RunResult(S, inside, tuple(steps))
    return RunResult(ground - S, outside, tuple(steps))


def batch_greedy(
    f: Callable[[SubsetMask], float],
    ground: SubsetMask,
    m: int,
    batch_sizes: Sequence[int],
) -> RunResult:
    """Batch greedy for a monotone set function with f(empty) = 0: each step
    adds the batch of elements with the top singleton incremental gains."""
    sizes = [int(q) for q in batch_sizes]
    if sum(sizes) != m:
        raise ValidationError(f"batch sizes {sizes} sum to {sum(sizes)}, expected m={m}")
    if any(q <= 0 for q in sizes):
        raise ValidationError("batch sizes must be positive")
    _check_budget(m, ground, "eq")
    S = SubsetMask.empty(ground.d)
    base = f(S)
    if abs(base) > 1e-9:
        raise ValidationError(f"batch greedy requires f(empty) = 0, got {base!r}")
    steps: list[TrajectoryStep] = []
    for step_idx, q in enumerate(sizes):
        current = f(S)
        gains = [(-(f(S.add(e)) - current), e) for e in ground - S]
        gains.sort()
        for neg_gain, e in gains[:q]:
            steps.append(TrajectoryStep(step_idx, e, None, -neg_gain, True))
            S = S.add(e)
    return RunResult(S, f(S), tuple(steps))


def _subset_candidates(ground: SubsetMask, order: str) -> Iterable[SubsetMask]:
    positions = ground.indices()
    n = len(positions)
    codes: Iterable[int] = range(1 << n)
    if order == "size":
        codes = sorted(codes, key=lambda c: (c.bit_count(), c))
    elif order != "index":
        raise ValidationError(f"unknown enumeration order {order!r}")
    for code in codes:
        bits = 0
        for t in range(n):
            if code >> t & 1:
                bits |= 1 << positions[t]
        yield SubsetMask(bits, ground.d)


def brute_force_opt(
    fn: Callable,
    domain: SubsetMask | Partition | Sequence[SubsetMask],
    m: int,
    constraint: str = "le",
    order: str = "index",
):
    """Exhaustive maximization over subsets of a ground set, or over
    partitions below a ceiling, under |S| <= m or = m.

    Deterministic first-found tie-break in the enumeration order.  Guarded:
    the candidate count may not exceed 2^24.
    """
    if isinstance(domain, SubsetMask):
        ground = domain
        caps: Parts | None = None
    else:
        caps = tuple(domain.parts if isinstance(domain, Partition) else domain)
        ground = Partition(caps).support()
    if ground.size > 24:
        raise GuardError(f"brute force over 2^{ground.size} candidates exceeds the 2^24 cap")
    if constraint not in ("le", "eq"):
        raise ValidationError(f"unknown constraint {constraint!r}")

    slot_of: dict[int, int] = {}
    if caps is not None:
        for j, cap in enumerate(caps):
            for e in cap:
                slot_of[e] = j

    best = None
    best_value = -math.inf
    for subset in _subset_candidates(ground, order):
        size = subset.size
        if size > m or (constraint == "eq" and size != m):
            continue
        if caps is None:
            value = fn(subset)
            candidate: object = subset
        else:
            parts = tuple(cap & subset for cap in caps)
            value = fn(parts)
            candidate = parts
        if value > best_value:
            best, best_value = candidate, value
    if best is None:
        raise ValidationError("constraint admits no feasible candidate")
    return best, best_value


def certify(dec: ObjectiveDecomposition, m: int, result: RunResult) -> Certificate:
    """Attach the distorted-greedy bound (1 - 1/e) g(OPT) - c(OPT) with OPT
    found by brute force over the decomposition's feasible domain."""
    domain: SubsetMask | Parts = dec.ground if dec.kind == "subset" else dec.ceiling
    opt, _ = brute_force_opt(dec.gc, domain, m, dec.constraint)
    g_opt, c_opt = dec.g(opt), dec.c(opt)
    lower = (1.0 - math.exp(-1.0)) * g_opt - c_opt
    chosen = result.chosen.parts if isinstance(result.chosen, Partition) else result.chosen
    achieved = dec.gc(chosen)
    return Certificate(opt, g_opt, c_opt, lower, achieved, achieved >= lower - CERT_SLACK)


def batch_certificate(
    f: Callable[[SubsetMask], float],
    ground: SubsetMask,
    m: int,
    batch_sizes: Sequence[int],
    eta_by_batch: dict[int, float],
    gamma: float,
    result: RunResult,
) -> Certificate:
    """Bound for batch greedy: f(S) >= (1 - prod_i (1 - q_i eta_{q_i} gamma / m)) OPT."""
    opt, opt_value = brute_force_opt(f, ground, m, "eq")
    product = 1.0
    for q in batch_sizes:
        product *= 1.0 - q * eta_by_batch[q] * gamma / m
    lower = (1.0 - product) * opt_value
    achieved = f(result.chosen)
    return Certificate(opt, opt_value, 0.0, lower, achieved, achieved >= lower - CERT_SLACK)
