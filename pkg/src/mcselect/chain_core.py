"""Product state spaces, dense stochastic matrices, and projection machinery
for finite multivariate Markov chains.

Conventions used throughout the library:

* Coordinates are 0-based (the command line prints 1-based labels).
* State indices use mixed-radix encoding with coordinate 0 most significant
  and the last coordinate varying fastest.  This is exactly numpy C-order
  over the per-coordinate digits, so ``array.reshape(dims)`` lines up with
  the state indexing.
* Projected spaces re-index compactly, keeping the retained coordinates in
  ascending original order.
* All wrapper objects are immutable; their arrays are defensively copied and
  marked read-only, so they can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

STOCHASTIC_TOL = 1e-10
POWER_STOCHASTIC_TOL = 1e-9
DISTRIBUTION_TOL = 1e-12
STATIONARY_SOLVE_TOL = 1e-12
STATIONARY_MAX_ITERS = 200_000

# Dense storage cap: total**2 matrix entries.
DENSE_ENTRY_CAP = 1 << 26


class ValidationError(ValueError):
    """A matrix or distribution violates its structural invariants."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""


class GuardError(RuntimeError):
    """An exhaustive computation would exceed its hard size guard."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProductStateSpace:
    """Cartesian product of finite coordinate spaces.

    ``dims=()`` is the empty product: a single-state space, used for the
    projection onto no coordinates.
    """

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        for i, n in enumerate(self.dims):
            if n < 2:
                raise ValidationError(f"coordinate {i} has cardinality {n} < 2")
        if self.total**2 > DENSE_ENTRY_CAP:
            raise GuardError(
                f"state space of size {self.total} exceeds the dense cap "
                f"({self.total}^2 > 2^26 matrix entries)"
            )

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def index_of(self, state: Sequence[int]) -> int:
        if len(state) != self.d:
            raise ValidationError(f"state has {len(state)} digits, expected {self.d}")
        idx = 0
        for digit, n in zip(state, self.dims):
            if not 0 <= digit < n:
                raise ValidationError(f"digit {digit} out of range [0, {n})")
            idx = idx * n + digit
        return idx

    def state_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total:
            raise ValidationError(f"index {index} out of range [0, {self.total})")
        digits = []
        for n in reversed(self.dims):
            index, r = divmod(index, n)
            digits.append(r)
        return tuple(reversed(digits))

    def states(self) -> Iterator[tuple[int, ...]]:
        for idx in range(self.total):
            yield self.state_of(idx)

    def subspace(self, mask: "SubsetMask") -> "ProductStateSpace":
        if mask.d != self.d:
            raise ValidationError("mask universe does not match space dimension")
        return ProductStateSpace(tuple(self.dims[i] for i in mask))


@dataclass(frozen=True)
class SubsetMask:
    """A subset of the coordinate set {0, ..., d-1} as a bitmask."""

    bits: int
    d: int

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValidationError("universe size must be non-negative")
        if self.bits < 0 or self.bits >> self.d:
            raise ValidationError(f"mask {self.bits:#x} has bits outside universe of size {self.d}")

    @classmethod
    def empty(cls, d: int) -> "SubsetMask":
        return cls(0, d)

    @classmethod
    def full(cls, d: int) -> "SubsetMask":
        return cls((1 << d) - 1, d)

    @classmethod
    def of(cls, d: int, indices: Iterable[int]) -> "SubsetMask":
        bits = 0
        for i in indices:
            if not 0 <= i < d:
                raise ValidationError(f"coordinate {i} outside universe of size {d}")
            bits |= 1 << i
        return cls(bits, d)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if self.bits >> i & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.d and bool(self.bits >> i & 1)

    def __len__(self) -> int:
        return self.size

    def _check(self, other: "SubsetMask") -> None:
        if other.d != self.d:
            raise ValidationError("masks live in different universes")

    def complement(self) -> "SubsetMask":
        return SubsetMask(self.bits ^ ((1 << self.d) - 1), self.d)

    def union(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.bits | other.bits, self.d)

    def intersection(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.bits & other.bits, self.d)

    def minus(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.bits & ~other.bits, self.d)

    __or__ = union
    __and__ = intersection
    __sub__ = minus

    def add(self, i: int) -> "SubsetMask":
        if not 0 <= i < self.d:
            raise ValidationError(f"coordinate {i} outside universe of size {self.d}")
        return SubsetMask(self.bits | 1 << i, self.d)

    def remove(self, i: int) -> "SubsetMask":
        return SubsetMask(self.bits & ~(1 << i), self.d)

    def issubset(self, other: "SubsetMask") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def isdisjoint(self, other: "SubsetMask") -> bool:
        self._check(other)
        return self.bits & other.bits == 0

    def relabel_within(self, outer: "SubsetMask") -> "SubsetMask":
        """Re-express this subset of ``outer`` in the compact indexing of the
        projected space on ``outer`` (ascending original order)."""
        if not self.issubset(outer):
            raise ValidationError("mask is not contained in the outer mask")
        positions = {coord: pos for pos, coord in enumerate(outer.indices())}
        return SubsetMask.of(outer.size, (positions[i] for i in self))

    def __repr__(self) -> str:
        return f"SubsetMask({set(self.indices()) or '{}'}, d={self.d})"


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a (possibly projected) product state space."""

    space: ProductStateSpace
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = _frozen(self.probs).reshape(-1)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.space.total,):
            raise ValidationError(
                f"distribution has {probs.shape[0]} entries for a space of size {self.space.total}"
            )
        if np.any(probs < 0):
            raise ValidationError(f"negative probability at index {int(np.argmin(probs))}")
        if abs(float(probs.sum()) - 1.0) > DISTRIBUTION_TOL:
            raise ValidationError(f"probabilities sum to {probs.sum()!r}, not 1")

    @property
    def min_prob(self) -> float:
        return float(self.probs.min())

    def require_full_support(self) -> "Distribution":
        if self.min_prob <= 0.0:
            raise ValidationError("distribution must have full support")
        return self


@dataclass(frozen=True)
class TransitionMatrix:
    """Dense row-stochastic matrix over a product state space.

    Construction only checks the shape; use :func:`validate` for the
    stochasticity check.
    """

    space: ProductStateSpace
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = _frozen(self.rows)
        object.__setattr__(self, "rows", rows)
        n = self.space.total
        if rows.shape != (n, n):
            raise ValidationError(f"matrix shape {rows.shape} does not match space size {n}")


@dataclass(frozen=True)
class EdgeMeasure:
    """The joint law pi(x) P(x, y) on the doubled space X x X."""

    space: ProductStateSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _frozen(self.matrix)
        object.__setattr__(self, "matrix", mat)
        n = self.space.total
        if mat.shape != (n, n):
            raise ValidationError(f"edge measure shape {mat.shape} does not match space size {n}")
        if abs(float(mat.sum()) - 1.0) > DISTRIBUTION_TOL:
            raise ValidationError(f"edge measure sums to {mat.sum()!r}, not 1")

    @property
    def doubled_space(self) -> ProductStateSpace:
        return ProductStateSpace(self.space.dims + self.space.dims)

    def as_distribution(self) -> Distribution:
        return Distribution(self.doubled_space, self.matrix.reshape(-1))

    def source_marginal(self) -> Distribution:
        return Distribution(self.space, self.matrix.sum(axis=1))

    def target_marginal(self) -> Distribution:
        return Distribution(self.space, self.matrix.sum(axis=0))


def validate(P: TransitionMatrix, tol: float = STOCHASTIC_TOL) -> None:
    """Raise :class:`ValidationError` naming the first offending row/entry."""
    rows = P.rows
    bad = np.argwhere((rows < 0) | (rows > 1))
    if bad.size:
        x, y = (int(v) for v in bad[0])
        raise ValidationError(f"entry ({x}, {y}) = {rows[x, y]!r} outside [0, 1]")
    sums = rows.sum(axis=1)
    off = np.abs(sums - 1.0)
    worst = int(np.argmax(off))
    if off[worst] > tol:
        raise ValidationError(f"row {worst} sums to {sums[worst]!r} (|1 - sum| = {off[worst]:.3e})")


def _require_irreducible(rows: np.ndarray) -> None:
    """Ergodicity detection: every state must be reachable from state 0 and
    reach state 0 (mutual reachability of all states)."""
    support = rows > 0.0
    n = rows.shape[0]
    for adjacency, direction in ((support, "unreachable from"), (support.T, "cannot reach")):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = seen.copy()
        while frontier.any():
            frontier = adjacency[frontier].any(axis=0) & ~seen
            seen |= frontier
        if not seen.all():
            state = int(np.argmin(seen))
            raise ValidationError(
                f"chain is not irreducible: state {state} {direction} state 0"
            )


def stationary_distribution(
    P: TransitionMatrix,
    tol: float = STATIONARY_SOLVE_TOL,
    max_iters: int = STATIONARY_MAX_ITERS,
) -> Distribution:
    """Stationary distribution by power iteration on the lazy chain (P + I)/2.

    The lazy chain shares the stationary distribution and is aperiodic, so
    power iteration converges for any irreducible P.  The residual is
    measured on the original chain: ||pi P - pi||_1 <= tol.
    """
    validate(P)
    n = P.space.total
    rows = P.rows
    _require_irreducible(rows)
    v = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        w = v @ rows
        residual = float(np.abs(w - v).sum())
        if residual <= tol:
            v = w / w.sum()
            break
        v = 0.5 * (w + v)
        v /= v.sum()
    else:
        raise ConvergenceError(
            f"power iteration did not reach ||pi P - pi||_1 <= {tol} after "
            f"{max_iters} iterations (residual {residual:.3e})"
        )
    if v.min() <= 0.0:
        raise ValidationError(
            f"stationary distribution has zero mass at state {int(np.argmin(v))}; "
            "full support is required"
        )
    return Distribution(P.space, v)


def _sum_axes(d: int, keep: tuple[int, ...]) -> tuple[int, ...]:
    keep_set = set(keep)
    return tuple(i for i in range(d) if i not in keep_set)


def marginalize(dist: Distribution, mask: SubsetMask) -> Distribution:
    """Marginal of ``dist`` on the coordinates in ``mask``."""
    space = dist.space
    if mask.d != space.d:
        raise ValidationError("mask universe does not match space dimension")
    if mask.size == space.d:
        return dist
    keep = mask.indices()
    cube = dist.probs.reshape(space.dims)
    out = cube.sum(axis=_sum_axes(space.d, keep))
    return Distribution(space.subspace(mask), out.reshape(-1))


def project_edge(
    P: TransitionMatrix, pi: Distribution, mask: SubsetMask
) -> tuple[np.ndarray, np.ndarray]:
    """Project the edge measure pi(x)P(x,y) onto ``mask`` for both endpoints.

    Returns ``(E_S, pi_S)`` as plain arrays; ``E_S`` has shape
    ``(total_S, total_S)`` and row sums ``pi_S``.
    """
    space = P.space
    if mask.d != space.d:
        raise ValidationError("mask universe does not match space dimension")
    d = space.d
    keep = mask.indices()
    edge = pi.probs[:, None] * P.rows
    if mask.size == d:
        return edge, pi.probs.copy()
    cube = edge.reshape(space.dims + space.dims)
    drop = _sum_axes(d, keep)
    axes = drop + tuple(d + i for i in drop)
    reduced = cube.sum(axis=axes)
    total_s = math.prod(space.dims[i] for i in keep)
    e_s = reduced.reshape(total_s, total_s)
    return e_s, e_s.sum(axis=1)


def project_keep_in(P: TransitionMatrix, pi: Distribution, mask: SubsetMask) -> TransitionMatrix:
    """Keep-``mask``-in transition matrix of P with respect to pi.

    Averages the hidden coordinates under pi:
    ``P_S(x_S, y_S) = sum_{x_-S, y_-S} pi(x) P(x, y) / pi_S(x_S)``.
    """
    pi.require_full_support()
    if mask.size == P.space.d:
        return P
    e_s, pi_s = project_edge(P, pi, mask)
    return TransitionMatrix(P.space.subspace(mask), e_s / pi_s[:, None])


def project_leave_out(P: TransitionMatrix, pi: Distribution, mask: SubsetMask) -> TransitionMatrix:
    """Leave-``mask``-out matrix: the keep-in matrix of the complement."""
    return project_keep_in(P, pi, mask.complement())


def tensor(matrices: Sequence[TransitionMatrix]) -> TransitionMatrix:
    """Tensor product of transition matrices; factor coordinates concatenate."""
    dims: tuple[int, ...] = ()
    rows = np.ones((1, 1))
    for M in matrices:
        rows = np.kron(rows, M.rows)
        dims = dims + M.space.dims
    return TransitionMatrix(ProductStateSpace(dims), rows)


def tensor_dist(dists: Sequence[Distribution]) -> Distribution:
    dims: tuple[int, ...] = ()
    probs = np.ones(1)
    for mu in dists:
        probs = np.kron(probs, mu.probs)
        dims = dims + mu.space.dims
    return Distribution(ProductStateSpace(dims), probs)


def reorder_coordinates(P: TransitionMatrix, labels: Sequence[int]) -> TransitionMatrix:
    """Sort the coordinates of ``P`` by their ``labels``.

    ``labels[i]`` is the sort key attached to coordinate ``i`` of ``P``;
    the output matrix indexes the same chain with coordinates in ascending
    label order.  Used to align tensor products (whose coordinates come out
    in block order) with the canonical ascending-coordinate indexing.
    """
    space = P.space
    if len(labels) != space.d:
        raise ValidationError("one label per coordinate required")
    perm = tuple(int(i) for i in np.argsort(np.asarray(labels, dtype=int), kind="stable"))
    if perm == tuple(range(space.d)):
        return P
    d = space.d
    cube = P.rows.reshape(space.dims + space.dims)
    cube = cube.transpose(perm + tuple(d + i for i in perm))
    new_dims = tuple(space.dims[i] for i in perm)
    n = space.total
    return TransitionMatrix(ProductStateSpace(new_dims), cube.reshape(n, n))


def edge_measure(pi: Distribution, P: TransitionMatrix) -> EdgeMeasure:
    if pi.space.dims != P.space.dims:
        raise ValidationError("distribution and matrix live on different spaces")
    return EdgeMeasure(P.space, pi.probs[:, None] * P.rows)


def matrix_power(P: TransitionMatrix, n: int) -> TransitionMatrix:
    """P**n by repeated squaring; asserts stochasticity within 1e-9 after."""
    if n < 0:
        raise ValidationError("matrix power requires n >= 0")
    size = P.space.total
    result = np.eye(size)
    base = P.rows.copy()
    k = n
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    out = TransitionMatrix(P.space, result)
    validate(out, tol=POWER_STOCHASTIC_TOL)
    return out


def worst_case_tv(
    P: TransitionMatrix, ref: Distribution | TransitionMatrix | np.ndarray, n: int
) -> float:
    """max over rows x of the total variation distance between P^n(x, .) and
    the reference (a single distribution, or one distribution per row)."""
    rows_n = matrix_power(P, n).rows
    if isinstance(ref, Distribution):
        target = ref.probs[None, :]
    elif isinstance(ref, TransitionMatrix):
        target = ref.rows
    else:
        target = np.asarray(ref, dtype=float)
        if target.ndim == 1:
            target = target[None, :]
    if target.shape[-1] != rows_n.shape[1]:
        raise ValidationError("reference size does not match the state space")
    return float(np.abs(rows_n - target).sum(axis=1).max() / 2.0)
