"""Catalog of (g, c) decompositions for the subset- and partition-selection
problems: a monotone (k-)submodular g and a modular c with objective
f = g - c, built around cached projected-entropy evaluations.

Each catalog entry records

* ``g`` and the modular ``c`` (element weights plus the constant -beta),
* ``shift``: the constant with g - c = f + shift (non-zero only for the
  complement objectives, whose g is translated so that g(empty) = 0),
* ``report_sign``: +1/-1 mapping the maximised f back to the non-negative
  distance that experiment tables report,
* admissibility bounds on the cardinality constraint, where the problem
  has them.

The beta constant shifts g and c equally, so it never affects optimizer
trajectories; it only enters the reported bound certificates.  Defaults take
the admissibility bound with equality, the tightest choice that keeps c
non-negative.  Optimizers consume c through its per-element weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import functionals
from .chain_core import (
    Distribution,
    SubsetMask,
    TransitionMatrix,
    ValidationError,
    marginalize,
    project_keep_in,
    reorder_coordinates,
    tensor,
    tensor_dist,
)
from .functionals import TERM_FLOOR, assert_stationary, kl_rate

PRODUCT_FORM_TOL = 1e-10

SUBSET_PROBLEMS = (
    "entropy",
    "entropy-product",
    "dist2fact",
    "dist2indp",
    "dist2indp-complement",
    "dist2stat",
    "dist2stat-product",
    "dist2stat-complement",
    "dist2fact-fixed",
)

PARTITION_PROBLEMS = (
    "k-entropy",
    "k-entropy-product",
    "k-dist2fact",
    "k-dist2indp",
    "k-dist2indp-complement",
    "k-dist2stat",
    "k-dist2stat-complement",
)

Parts = tuple[SubsetMask, ...]


@dataclass(frozen=True)
class Partition:
    """k pairwise-disjoint coordinate groups, optionally below a ceiling V."""

    parts: Parts
    ceiling: Parts | None = None

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValidationError("a partition needs at least one group")
        d = self.parts[0].d
        seen = 0
        for part in self.parts:
            if part.d != d:
                raise ValidationError("partition groups live in different universes")
            if seen & part.bits:
                raise ValidationError("partition groups overlap")
            seen |= part.bits
        if self.ceiling is not None:
            if len(self.ceiling) != len(self.parts):
                raise ValidationError("ceiling must have one group per part")
            for part, cap in zip(self.parts, self.ceiling):
                if not part.issubset(cap):
                    raise ValidationError("partition exceeds its ceiling")

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def d(self) -> int:
        return self.parts[0].d

    def support(self) -> SubsetMask:
        bits = 0
        for part in self.parts:
            bits |= part.bits
        return SubsetMask(bits, self.d)

    @classmethod
    def empty_like(cls, ceiling: Sequence[SubsetMask]) -> "Partition":
        caps = tuple(ceiling)
        d = caps[0].d
        return cls(tuple(SubsetMask.empty(d) for _ in caps), caps)


def is_product_form(pi: Distribution, tol: float = PRODUCT_FORM_TOL) -> bool:
    d = pi.space.d
    factors = [marginalize(pi, SubsetMask.of(d, (i,))) for i in range(d)]
    product = tensor_dist(factors)
    return float(np.abs(product.probs - pi.probs).sum()) <= tol


class Workspace:
    """Cached projected-entropy evaluations for one stationary chain.

    All catalog functions reduce to entropies of projected edge measures
    H(pi_S x P_S) and of marginals H(pi_S); both are cached per coordinate
    mask, which makes repeated marginal-gain queries cheap.
    """

    def __init__(self, P: TransitionMatrix, pi: Distribution, stationarity_tol: float = 1e-8):
        pi.require_full_support()
        assert_stationary(P, pi, stationarity_tol)
        self.P = P
        self.pi = pi
        self.space = P.space
        self.d = P.space.d
        dims = P.space.dims
        self._edge_cube = (pi.probs[:, None] * P.rows).reshape(dims + dims)
        self._pi_cube = pi.probs.reshape(dims)
        self._H_edge: dict[int, float] = {0: 0.0}
        self._H_pi: dict[int, float] = {0: 0.0}

    def full(self) -> SubsetMask:
        return SubsetMask.full(self.d)

    @staticmethod
    def _entropy(values: np.ndarray) -> float:
        w = values.reshape(-1)
        w = w[w > TERM_FLOOR]
        return float(-(w * np.log(w)).sum())

    def _edge_entropy(self, mask: SubsetMask) -> float:
        cached = self._H_edge.get(mask.bits)
        if cached is not None:
            return cached
        keep = set(mask.indices())
        drop = tuple(i for i in range(self.d) if i not in keep)
        axes = drop + tuple(self.d + i for i in drop)
        value = self._entropy(self._edge_cube.sum(axis=axes) if axes else self._edge_cube)
        self._H_edge[mask.bits] = value
        return value

    def entropy_pi(self, mask: SubsetMask) -> float:
        """H(pi_S)."""
        cached = self._H_pi.get(mask.bits)
        if cached is not None:
            return cached
        keep = set(mask.indices())
        drop = tuple(i for i in range(self.d) if i not in keep)
        value = self._entropy(self._pi_cube.sum(axis=drop) if drop else self._pi_cube)
        self._H_pi[mask.bits] = value
        return value

    def entropy_rate(self, mask: SubsetMask) -> float:
        """H(P_S) = H(pi_S x P_S) - H(pi_S)."""
        return self._edge_entropy(mask) - self.entropy_pi(mask)

    def dist_to_independence(self, mask: SubsetMask) -> float:
        if mask.size <= 1:
            return 0.0
        singles = sum(self.entropy_rate(SubsetMask.of(self.d, (i,))) for i in mask)
        return singles - self.entropy_rate(mask)

    def dist_to_stationarity(self, mask: SubsetMask) -> float:
        return self.entropy_pi(mask) - self.entropy_rate(mask)

    def dist_to_factorizability(self, mask: SubsetMask) -> float:
        return (
            self.entropy_rate(mask)
            + self.entropy_rate(mask.complement())
            - self.entropy_rate(self.full())
        )

    def dist_to_factorizability_fixed(self, W: SubsetMask, S: SubsetMask) -> float:
        return self.entropy_rate(W) + self.entropy_rate(S) - self.entropy_rate(W | S)

    def split_divergence(self, block: SubsetMask, e: int) -> float:
        """D(P_A || P_{A - e} x P_e) for e in the block A."""
        single = SubsetMask.of(self.d, (e,))
        return (
            self.entropy_rate(block.remove(e))
            + self.entropy_rate(single)
            - self.entropy_rate(block)
        )


@dataclass(frozen=True)
class ObjectiveDecomposition:
    """A problem instance f = g - c with reporting metadata.

    ``g`` is monotone non-decreasing and (k-)submodular by construction,
    ``c`` is modular with per-element ``c_weights`` and constant ``c_const``
    (= -beta).  For subset problems the callables take a SubsetMask; for
    partition problems a tuple of SubsetMask groups.
    """

    problem_id: str
    kind: str  # "subset" | "partition"
    constraint: str  # "le" | "eq"
    ground: SubsetMask
    g: Callable
    c_weights: Mapping
    c_const: float
    beta: float
    shift: float
    report_sign: float
    f_direct: Callable
    ceiling: Parts | None = None
    min_support: int | None = None
    max_support: int | None = None
    notes: tuple[str, ...] = ()
    workspace: Workspace | None = field(default=None, repr=False, compare=False)

    def penalty(self, key) -> float:
        """Modular weight of one element (slot-element pair for partitions)."""
        return self.c_weights.get(key, 0.0)

    def c(self, S) -> float:
        if self.kind == "subset":
            return self.c_const + sum(self.c_weights.get(e, 0.0) for e in S)
        return self.c_const + sum(
            self.c_weights.get((j, e), 0.0) for j, part in enumerate(S) for e in part
        )

    def gc(self, S) -> float:
        return self.g(S) - self.c(S)

    def f(self, S) -> float:
        """The unshifted objective of the source problem."""
        return self.gc(S) - self.shift

    def report_value(self, S) -> float:
        """The non-negative quantity the experiment tables report."""
        return self.report_sign * self.f(S)

    def empty_solution(self):
        if self.kind == "subset":
            return SubsetMask.empty(self.ground.d)
        return tuple(SubsetMask.empty(self.ground.d) for _ in self.ceiling)

    def validate_m(self, m: int) -> None:
        if m < 0:
            raise ValidationError("cardinality constraint must be non-negative")
        if self.min_support is not None and m < self.min_support:
            raise ValidationError(
                f"{self.problem_id} requires m >= {self.min_support}, got {m}"
            )
        if self.max_support is not None and m > self.max_support:
            raise ValidationError(
                f"{self.problem_id} requires m <= {self.max_support}, got {m}"
            )


def _require_product_form(pi: Distribution, problem_id: str, heuristic: bool) -> tuple[str, ...]:
    if is_product_form(pi):
        return ()
    if not heuristic:
        raise ValidationError(
            f"{problem_id} requires a product-form stationary distribution; "
            "pass heuristic=True to run without the approximation guarantee"
        )
    return ("pi is not of product form; run is heuristic, no bound applies",)


def _weighted_kl(M_rows: np.ndarray, L_rows: np.ndarray, weights: np.ndarray) -> float:
    joint = weights[:, None] * M_rows
    support = joint > TERM_FLOOR
    return float(
        (joint[support] * (np.log(M_rows[support]) - np.log(L_rows[support]))).sum()
    )


def _block_order_kl(
    P: TransitionMatrix, pi: Distribution, blocks: Sequence[SubsetMask]
) -> float:
    """KL rate from the tensor of keep-in blocks to P, with the reference
    kernel indexed in block order rather than realigned to P's coordinate
    order.

    Here the selected block(s) come first and the remainder last, and the
    tensor is compared entrywise against P without the coordinate
    permutation.  It differs from
    :func:`functionals.distance_to_factorizability` (the permutation-aligned
    quantity) whenever the concatenated block order is not the ascending
    coordinate order; the block-order variant is what the reference
    experiment values for the factorizability problems were computed with.
    """
    rows = np.ones((1, 1))
    for block in blocks:
        rows = np.kron(rows, project_keep_in(P, pi, block).rows)
    return _weighted_kl(P.rows, rows, pi.probs)


def _direct_entropy_rate(P: TransitionMatrix, pi: Distribution, mask: SubsetMask) -> float:
    if mask.size == 0:
        return 0.0
    return functionals.entropy_rate(project_keep_in(P, pi, mask), marginalize(pi, mask))


def _union_bits(parts: Parts) -> int:
    bits = 0
    for part in parts:
        bits |= part.bits
    return bits


def _direct_k_dist2fact(P: TransitionMatrix, pi: Distribution, parts: Parts) -> float:
    d = P.space.d
    remainder = SubsetMask(_union_bits(parts), d).complement()
    if remainder.size == d:
        return 0.0
    blocks = [project_keep_in(P, pi, part) for part in parts]
    blocks.append(project_keep_in(P, pi, remainder))
    labels: tuple[int, ...] = ()
    for part in parts:
        labels += part.indices()
    labels += remainder.indices()
    L = reorder_coordinates(tensor(blocks), labels)
    return kl_rate(P, L, pi).value


def build_subset_objective(
    problem_id: str,
    P: TransitionMatrix,
    pi: Distribution,
    *,
    beta: float | None = None,
    W: SubsetMask | None = None,
    heuristic: bool = False,
    block_order: bool = False,
    m: int | None = None,
    stationarity_tol: float = 1e-8,
    workspace: Workspace | None = None,
) -> ObjectiveDecomposition:
    if problem_id not in SUBSET_PROBLEMS:
        raise ValidationError(f"unknown subset problem id {problem_id!r}")
    if block_order and problem_id != "dist2fact":
        raise ValidationError("block_order applies only to dist2fact")
    ws = workspace if workspace is not None else Workspace(P, pi, stationarity_tol)
    d = ws.d
    full = ws.full()
    ground = full
    notes: tuple[str, ...] = ()
    min_support: int | None = None
    max_support: int | None = None
    shift = 0.0
    report_sign = 1.0
    constraint = "le"

    if problem_id == "entropy":
        beta_max = -sum(math.log(n) for n in ws.space.dims)
        beta = beta_max if beta is None else beta
        if beta > beta_max + 1e-12:
            raise ValidationError(f"beta must be <= {beta_max} to keep c non-negative")
        h_full = ws.entropy_rate(full)
        weights = {e: ws.entropy_rate(full.remove(e)) - h_full for e in range(d)}
        c_const = -beta

        def g(S: SubsetMask) -> float:
            return ws.entropy_rate(S) + c_const + sum(weights[e] for e in S)

        f_direct = lambda S: _direct_entropy_rate(P, pi, S)

    elif problem_id == "entropy-product":
        if not is_product_form(pi):
            raise ValidationError(
                "entropy-product requires a product-form stationary distribution"
            )
        beta = 0.0
        c_const = 0.0
        weights = {
            e: functionals.shannon_entropy(marginalize(pi, SubsetMask.of(d, (e,))))
            for e in range(d)
        }

        def g(S: SubsetMask) -> float:
            # H(pi_S x P_S), the edge-measure entropy of the projected chain
            return ws.entropy_rate(S) + ws.entropy_pi(S)

        f_direct = lambda S: _direct_entropy_rate(P, pi, S)

    elif problem_id == "dist2fact":
        beta = 0.0 if beta is None else beta
        if beta > 1e-12:
            raise ValidationError("beta must be <= 0 for dist2fact")
        c_const = -beta
        if block_order:
            notes = ("block-order indexing of the factorized reference kernel "
                     "(selected blocks first, not realigned)",)
            cache: dict[int, float] = {}

            def f_fact(S: SubsetMask) -> float:
                value = cache.get(S.bits)
                if value is None:
                    value = _block_order_kl(P, pi, (S, S.complement()))
                    cache[S.bits] = value
                return value

            weights = {}
            for e in range(d):
                single = SubsetMask.of(d, (e,))
                # per-element penalty D(P || P_-e x P_e), complement block first
                weights[e] = _block_order_kl(P, pi, (single.complement(), single))
        else:
            f_fact = lambda S: ws.dist_to_factorizability(S)
            weights = {e: ws.dist_to_factorizability(SubsetMask.of(d, (e,))) for e in range(d)}

        def g(S: SubsetMask) -> float:
            return f_fact(S) + c_const + sum(weights[e] for e in S)

        if block_order:
            f_direct = lambda S: _block_order_kl(P, pi, (S, S.complement()))
        else:
            f_direct = lambda S: functionals.distance_to_factorizability(P, pi, S)

    elif problem_id == "dist2indp":
        beta = 0.0 if beta is None else beta
        if beta > 1e-12:
            raise ValidationError("beta must be <= 0 for dist2indp")
        c_const = -beta
        constraint = "eq"
        min_support = 2
        report_sign = -1.0
        weights = {e: ws.dist_to_factorizability(SubsetMask.of(d, (e,))) for e in range(d)}

        def g(S: SubsetMask) -> float:
            return -ws.dist_to_independence(S) + c_const + sum(weights[e] for e in S)

        f_direct = lambda S: -functionals.distance_to_independence(P, pi, S)

    elif problem_id == "dist2indp-complement":
        beta = 0.0
        c_const = 0.0
        weights = {}
        max_support = d - 2
        report_sign = -1.0
        shift = ws.dist_to_independence(full)

        def g(S: SubsetMask) -> float:
            return shift - ws.dist_to_independence(S.complement())

        f_direct = lambda S: -functionals.distance_to_independence(P, pi, S.complement())

    elif problem_id == "dist2stat":
        # Raw monotone target for the batch greedy algorithm; no decomposition.
        beta = 0.0
        c_const = 0.0
        weights = {}
        constraint = "eq"

        def g(S: SubsetMask) -> float:
            return ws.dist_to_stationarity(S)

        f_direct = lambda S: functionals.distance_to_stationarity(P, pi, S)

    elif problem_id == "dist2stat-product":
        notes = _require_product_form(pi, problem_id, heuristic)
        beta = 0.0 if beta is None else beta
        if beta > 1e-12:
            raise ValidationError("beta must be <= 0 for dist2stat-product")
        c_const = -beta
        constraint = "eq"
        report_sign = -1.0
        weights = {
            e: ws.dist_to_factorizability(SubsetMask.of(d, (e,)))
            + ws.dist_to_stationarity(SubsetMask.of(d, (e,)))
            for e in range(d)
        }

        def g(S: SubsetMask) -> float:
            return -ws.dist_to_stationarity(S) + c_const + sum(weights[e] for e in S)

        f_direct = lambda S: -functionals.distance_to_stationarity(P, pi, S)

    elif problem_id == "dist2stat-complement":
        notes = _require_product_form(pi, problem_id, heuristic)
        beta = 0.0
        c_const = 0.0
        weights = {}
        report_sign = -1.0
        shift = ws.dist_to_stationarity(full)

        def g(S: SubsetMask) -> float:
            return shift - ws.dist_to_stationarity(S.complement())

        f_direct = lambda S: -functionals.distance_to_stationarity(P, pi, S.complement())

    elif problem_id == "dist2fact-fixed":
        if W is None:
            raise ValidationError("dist2fact-fixed needs the fixed coordinate set W")
        if W.d != d:
            raise ValidationError("W lives in the wrong universe")
        beta = 0.0
        c_const = 0.0
        weights = {}
        ground = W.complement()
        constraint = "eq"
        fixed = W

        def g(S: SubsetMask) -> float:
            if not S.issubset(ground):
                raise ValidationError("S overlaps the fixed set W")
            return ws.dist_to_factorizability_fixed(fixed, S)

        f_direct = lambda S: functionals.distance_to_factorizability_fixed(P, pi, fixed, S)

    dec = ObjectiveDecomposition(
        problem_id=problem_id,
        kind="subset",
        constraint=constraint,
        ground=ground,
        g=g,
        c_weights=weights,
        c_const=c_const,
        beta=beta,
        shift=shift,
        report_sign=report_sign,
        f_direct=f_direct,
        min_support=min_support,
        max_support=max_support,
        notes=notes,
        workspace=ws,
    )
    if m is not None:
        dec.validate_m(m)
    return dec


def build_partition_objective(
    problem_id: str,
    P: TransitionMatrix,
    pi: Distribution,
    V: Sequence[SubsetMask] | Partition,
    *,
    beta: float | None = None,
    heuristic: bool = False,
    block_order: bool = False,
    m: int | None = None,
    stationarity_tol: float = 1e-8,
    workspace: Workspace | None = None,
) -> ObjectiveDecomposition:
    if problem_id not in PARTITION_PROBLEMS:
        raise ValidationError(f"unknown partition problem id {problem_id!r}")
    if block_order and problem_id != "k-dist2fact":
        raise ValidationError("block_order applies only to k-dist2fact")
    caps: Parts = tuple(V.parts if isinstance(V, Partition) else V)
    Partition(caps)  # checks pairwise disjointness
    ws = workspace if workspace is not None else Workspace(P, pi, stationarity_tol)
    d = ws.d
    if caps[0].d != d:
        raise ValidationError("ceiling lives in the wrong universe")
    k = len(caps)
    support_v = Partition(caps).support()
    notes: tuple[str, ...] = ()
    min_support: int | None = None
    max_support: int | None = None
    shift = 0.0
    report_sign = 1.0
    constraint = "le"
    single = lambda e: SubsetMask.of(d, (e,))

    if problem_id == "k-entropy":
        beta_max = -sum(math.log(ws.space.dims[e]) for cap in caps for e in cap)
        beta = beta_max if beta is None else beta
        if beta > beta_max + 1e-12:
            raise ValidationError(f"beta must be <= {beta_max} to keep c non-negative")
        c_const = -beta
        weights = {
            (j, e): ws.entropy_rate(cap.remove(e)) - ws.entropy_rate(cap)
            for j, cap in enumerate(caps)
            for e in cap
        }

        def g(parts: Parts) -> float:
            base = sum(ws.entropy_rate(part) for part in parts)
            return base + c_const + sum(
                weights[(j, e)] for j, part in enumerate(parts) for e in part
            )

        f_direct = lambda parts: sum(_direct_entropy_rate(P, pi, part) for part in parts)

    elif problem_id == "k-entropy-product":
        if not is_product_form(pi):
            raise ValidationError(
                "k-entropy-product requires a product-form stationary distribution"
            )
        beta = 0.0
        c_const = 0.0
        weights = {
            (j, e): functionals.shannon_entropy(marginalize(pi, single(e)))
            for j, cap in enumerate(caps)
            for e in cap
        }

        def g(parts: Parts) -> float:
            return sum(ws.entropy_rate(part) + ws.entropy_pi(part) for part in parts)

        f_direct = lambda parts: sum(_direct_entropy_rate(P, pi, part) for part in parts)

    elif problem_id == "k-dist2fact":
        rest = support_v.complement()
        h_rest = ws.entropy_rate(rest)
        beta_max = -sum(
            h_rest + ws.entropy_rate(single(e)) for cap in caps for e in cap
        )
        beta = beta_max if beta is None else beta
        if beta > beta_max + 1e-12:
            raise ValidationError(f"beta must be <= {beta_max} to keep c non-negative")
        c_const = -beta

        if block_order:
            notes = ("block-order indexing of the factorized reference kernel "
                     "(selected blocks first, not realigned)",)
            cache: dict[tuple[int, ...], float] = {}

            def f_fast(parts: Parts) -> float:
                key = tuple(p.bits for p in parts)
                value = cache.get(key)
                if value is None:
                    remainder = SubsetMask(_union_bits(parts), d).complement()
                    value = _block_order_kl(P, pi, tuple(parts) + (remainder,))
                    cache[key] = value
                return value

            def f_direct(parts: Parts) -> float:
                remainder = SubsetMask(_union_bits(parts), d).complement()
                return _block_order_kl(P, pi, tuple(parts) + (remainder,))

        else:

            def f_fast(parts: Parts) -> float:
                total = sum(ws.entropy_rate(part) for part in parts)
                remainder = SubsetMask(_union_bits(parts), d).complement()
                return total + ws.entropy_rate(remainder) - ws.entropy_rate(ws.full())

            f_direct = lambda parts: _direct_k_dist2fact(P, pi, parts)

        f_at_v = f_fast(caps)
        weights = {
            (j, e): f_fast(caps[:j] + (caps[j].remove(e),) + caps[j + 1:]) - f_at_v
            for j, cap in enumerate(caps)
            for e in cap
        }

        def g(parts: Parts) -> float:
            return f_fast(parts) + c_const + sum(
                weights[(j, e)] for j, part in enumerate(parts) for e in part
            )

    elif problem_id == "k-dist2indp":
        beta = 0.0 if beta is None else beta
        if beta > 1e-12:
            raise ValidationError("beta must be <= 0 for k-dist2indp")
        c_const = -beta
        constraint = "eq"
        min_support = k + 1
        report_sign = -1.0
        weights = {
            (j, e): ws.split_divergence(cap, e) for j, cap in enumerate(caps) for e in cap
        }

        def g(parts: Parts) -> float:
            base = -sum(ws.dist_to_independence(part) for part in parts)
            return base + c_const + sum(
                weights[(j, e)] for j, part in enumerate(parts) for e in part
            )

        f_direct = lambda parts: -sum(
            functionals.distance_to_independence(P, pi, part) for part in parts
        )

    elif problem_id == "k-dist2indp-complement":
        beta = 0.0
        c_const = 0.0
        weights = {}
        max_support = d - k - 1
        report_sign = -1.0
        shift = sum(ws.dist_to_independence(cap) for cap in caps)

        def g(parts: Parts) -> float:
            return shift - sum(
                ws.dist_to_independence(cap - part) for cap, part in zip(caps, parts)
            )

        f_direct = lambda parts: -sum(
            functionals.distance_to_independence(P, pi, cap - part)
            for cap, part in zip(caps, parts)
        )

    elif problem_id == "k-dist2stat":
        notes = _require_product_form(pi, problem_id, heuristic)
        beta = 0.0 if beta is None else beta
        if beta > 1e-12:
            raise ValidationError("beta must be <= 0 for k-dist2stat")
        c_const = -beta
        constraint = "eq"
        report_sign = -1.0
        weights = {
            (j, e): ws.split_divergence(cap, e) + ws.dist_to_stationarity(single(e))
            for j, cap in enumerate(caps)
            for e in cap
        }

        def g(parts: Parts) -> float:
            base = -sum(ws.dist_to_stationarity(part) for part in parts)
            return base + c_const + sum(
                weights[(j, e)] for j, part in enumerate(parts) for e in part
            )

        f_direct = lambda parts: -sum(
            functionals.distance_to_stationarity(P, pi, part) for part in parts
        )

    elif problem_id == "k-dist2stat-complement":
        notes = _require_product_form(pi, problem_id, heuristic)
        beta = 0.0
        c_const = 0.0
        weights = {}
        report_sign = -1.0
        shift = sum(ws.dist_to_stationarity(cap) for cap in caps)

        def g(parts: Parts) -> float:
            return shift - sum(
                ws.dist_to_stationarity(cap - part) for cap, part in zip(caps, parts)
            )

        f_direct = lambda parts: -sum(
            functionals.distance_to_stationarity(P, pi, cap - part)
            for cap, part in zip(caps, parts)
        )

    dec = ObjectiveDecomposition(
        problem_id=problem_id,
        kind="partition",
        constraint=constraint,
        ground=support_v,
        g=g,
        c_weights=weights,
        c_const=c_const,
        beta=beta,
        shift=shift,
        report_sign=report_sign,
        f_direct=f_direct,
        ceiling=caps,
        min_support=min_support,
        max_support=max_support,
        notes=notes,
        workspace=ws,
    )
    if m is not None:
        dec.validate_m(m)
    return dec
