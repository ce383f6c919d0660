"""Shannon entropy, entropy rate, KL divergence rate, and the distance
functionals (to independence, factorizability, and stationarity).

Everything is in nats.  The conventions 0 ln 0 = 0 and 0 ln(0/a) = 0 are
realised by skipping terms whose probability weight falls below 1e-300,
which is numerically equivalent and avoids log underflow.

The distance functionals here evaluate their defining KL divergences
directly (building the reference tensor-product kernels explicitly); the
entropy identities they satisfy for stationary chains are exercised by the
test suite, and the fast entropy-based evaluation paths live with the
objective constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain_core import (
    Distribution,
    SubsetMask,
    TransitionMatrix,
    ValidationError,
    marginalize,
    project_keep_in,
    reorder_coordinates,
    tensor,
)

TERM_FLOOR = 1e-300
STATIONARITY_TOL = 1e-8


@dataclass(frozen=True)
class KLResult:
    """Value of a KL divergence rate, with an absolute-continuity witness.

    ``value`` is ``math.inf`` exactly when ``infinite_support_pair`` is set;
    the pair (x, y) then witnesses M(x, y) > 0 while L(x, y) = 0 on a row
    with positive reference weight.
    """

    value: float
    infinite_support_pair: tuple[int, int] | None = None

    @property
    def finite(self) -> bool:
        return self.infinite_support_pair is None


def _entropy(weights: np.ndarray) -> float:
    w = weights.reshape(-1)
    w = w[w > TERM_FLOOR]
    return float(-(w * np.log(w)).sum())


def shannon_entropy(mu: Distribution | np.ndarray) -> float:
    probs = mu.probs if isinstance(mu, Distribution) else np.asarray(mu, dtype=float)
    return _entropy(probs)


def assert_stationary(
    P: TransitionMatrix, pi: Distribution, tol: float = STATIONARITY_TOL
) -> None:
    residual = float(np.abs(pi.probs @ P.rows - pi.probs).sum())
    if residual > tol:
        raise ValidationError(
            f"pi is not stationary for P: ||pi P - pi||_1 = {residual:.3e} > {tol}"
        )


def entropy_rate(
    P: TransitionMatrix, pi: Distribution, stationarity_tol: float = STATIONARITY_TOL
) -> float:
    """Entropy rate -sum_x sum_y pi(x) P(x,y) ln P(x,y) of a stationary chain."""
    assert_stationary(P, pi, stationarity_tol)
    weights = pi.probs[:, None] * P.rows
    mask = weights > TERM_FLOOR
    return float(-(weights[mask] * np.log(P.rows[mask])).sum())


def kl_rate(M: TransitionMatrix, L: TransitionMatrix, pi: Distribution) -> KLResult:
    """KL divergence rate sum_x pi(x) sum_y M(x,y) ln(M(x,y)/L(x,y)).

    ``pi`` need not be stationary for either kernel.  Returns the +inf flag
    with a witnessing pair when absolute continuity fails.
    """
    if M.space.dims != L.space.dims or M.space.dims != pi.space.dims:
        raise ValidationError("M, L, pi must live on the same space")
    weights = pi.probs[:, None] * M.rows
    support = weights > TERM_FLOOR
    bad = support & (L.rows <= TERM_FLOOR)
    if np.any(bad):
        x, y = (int(v) for v in np.argwhere(bad)[0])
        return KLResult(math.inf, (x, y))
    m = M.rows[support]
    value = float((weights[support] * (np.log(m) - np.log(L.rows[support]))).sum())
    return KLResult(value)


def _single_coordinate_factors(
    P: TransitionMatrix, pi: Distribution, coords: tuple[int, ...]
) -> list[TransitionMatrix]:
    d = P.space.d
    return [project_keep_in(P, pi, SubsetMask.of(d, (i,))) for i in coords]


def distance_to_independence(P: TransitionMatrix, pi: Distribution, S: SubsetMask) -> float:
    """KL rate from the tensor product of single-coordinate projections to
    the keep-S-in chain: D(P_S || tensor_{i in S} P_i) weighted by pi_S.

    Zero whenever |S| <= 1.
    """
    if S.size <= 1:
        return 0.0
    coords = S.indices()
    P_S = project_keep_in(P, pi, S)
    pi_S = marginalize(pi, S)
    # Ascending coordinate order means the tensor of the singleton factors
    # already matches the compact indexing of the projected space.
    L = tensor(_single_coordinate_factors(P, pi, coords))
    return kl_rate(P_S, L, pi_S).value


def distance_to_factorizability(
    P: TransitionMatrix,
    pi: Distribution,
    S: SubsetMask,
    stationarity_tol: float = STATIONARITY_TOL,
) -> float:
    """D(P || P_S tensor P_-S): the information lost by splitting the
    coordinates into the two independent blocks S and its complement."""
    assert_stationary(P, pi, stationarity_tol)
    if S.size == 0 or S.size == S.d:
        return 0.0
    comp = S.complement()
    blocks = tensor([project_keep_in(P, pi, S), project_keep_in(P, pi, comp)])
    L = reorder_coordinates(blocks, S.indices() + comp.indices())
    return kl_rate(P, L, pi).value


def stationary_kernel(pi: Distribution) -> TransitionMatrix:
    """The rank-one kernel whose every row is pi."""
    n = pi.space.total
    return TransitionMatrix(pi.space, np.tile(pi.probs, (n, 1)))


def distance_to_stationarity(
    P: TransitionMatrix,
    pi: Distribution,
    S: SubsetMask,
    stationarity_tol: float = STATIONARITY_TOL,
) -> float:
    """D(P_S || Pi_S) where Pi_S has every row equal to pi_S."""
    assert_stationary(P, pi, stationarity_tol)
    if S.size == 0:
        return 0.0
    P_S = project_keep_in(P, pi, S)
    pi_S = marginalize(pi, S)
    return kl_rate(P_S, stationary_kernel(pi_S), pi_S).value


def distance_to_factorizability_fixed(
    P: TransitionMatrix,
    pi: Distribution,
    W: SubsetMask,
    S: SubsetMask,
    stationarity_tol: float = STATIONARITY_TOL,
) -> float:
    """D(P_{W u S} || P_W tensor P_S) for disjoint W and S."""
    if not W.isdisjoint(S):
        raise ValidationError("W and S must be disjoint")
    assert_stationary(P, pi, stationarity_tol)
    if S.size == 0 or W.size == 0:
        return 0.0
    union = W | S
    P_U = project_keep_in(P, pi, union)
    pi_U = marginalize(pi, union)
    blocks = tensor([project_keep_in(P, pi, W), project_keep_in(P, pi, S)])
    L = reorder_coordinates(blocks, W.indices() + S.indices())
    return kl_rate(P_U, L, pi_U).value
