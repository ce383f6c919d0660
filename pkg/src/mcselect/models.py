"""Curie-Weiss Glauber chain construction and chain file ingestion.

The chain file format is a single JSON document

    {"d": int, "dims": [int, ...], "transition": [[float, ...], ...],
     "stationary": [float, ...]}        # "stationary" optional

with rows listed in the library's mixed-radix state order and floats written
with full round-trip precision, so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain_core import (
    Distribution,
    ProductStateSpace,
    TransitionMatrix,
    ValidationError,
    validate,
)

STATIONARY_FILE_TOL = 1e-6


class StationaryMismatchWarning(UserWarning):
    """The stationary vector stored in a chain file does not match P."""


@dataclass(frozen=True)
class CurieWeissParams:
    """Spin count, temperature, and external field of the Curie-Weiss chain."""

    d: int
    T: float
    h: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValidationError("d must be >= 1")
        if not self.T > 0:
            raise ValidationError("temperature must be positive")


def _interactions(d: int) -> np.ndarray:
    idx = np.arange(d)
    return 0.5 ** np.abs(idx[:, None] - idx[None, :])


def hamiltonian(x, params: CurieWeissParams) -> float:
    """Energy -sum_{i,j} 2^{-|j-i|} x_i x_j - h sum_i x_i of a spin vector.

    The double sum runs over all pairs including i = j; the resulting
    constant -d cancels in the dynamics and the Gibbs weights but is part
    of the energy as written.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (params.d,):
        raise ValidationError(f"spin vector has shape {x.shape}, expected ({params.d},)")
    if not np.all(np.abs(x) == 1.0):
        raise ValidationError("spins must be +1 or -1")
    J = _interactions(params.d)
    return float(-x @ J @ x - params.h * x.sum())


def _all_energies(params: CurieWeissParams) -> np.ndarray:
    d = params.d
    n = 1 << d
    # bit 1 -> spin +1, bit 0 -> spin -1; coordinate 0 most significant
    bits = (np.arange(n)[:, None] >> (d - 1 - np.arange(d))[None, :]) & 1
    spins = 2.0 * bits - 1.0
    J = _interactions(d)
    return -np.einsum("si,ij,sj->s", spins, J, spins) - params.h * spins.sum(axis=1)


def curie_weiss_chain(params: CurieWeissParams) -> tuple[TransitionMatrix, Distribution]:
    """Single-flip Glauber dynamics targeting the Gibbs distribution.

    Off-diagonal entries are (1/d) exp(-(H(y) - H(x))_+ / T) for the d
    single-spin flips of x; the diagonal is the complement, which keeps row
    sums exact to the last ulp sum.
    """
    d, T = params.d, params.T
    n = 1 << d
    energies = _all_energies(params)

    shifted = -(energies - energies.min()) / T
    weights = np.exp(shifted)
    z = math.fsum(weights.tolist())
    pi = Distribution(ProductStateSpace((2,) * d), weights / z)

    rows = np.zeros((n, n))
    states = np.arange(n)
    for coord in range(d):
        flipped = states ^ (1 << (d - 1 - coord))
        delta = energies[flipped] - energies
        rows[states, flipped] = np.exp(-np.maximum(delta, 0.0) / T) / d
    diag = 1.0 - rows.sum(axis=1)
    if diag.min() < -1e-15:
        raise ValidationError(f"negative holding probability {diag.min()!r}")
    np.clip(diag, 0.0, None, out=diag)
    rows[states, states] = diag

    P = TransitionMatrix(pi.space, rows)
    validate(P)
    return P, pi


def save_chain(path: str | Path, P: TransitionMatrix, pi: Distribution | None = None) -> None:
    space = P.space
    parts = [
        "{",
        f'"d": {space.d},',
        f'"dims": {json.dumps(list(space.dims))},',
        '"transition": [',
    ]
    body = ",\n".join("[" + ", ".join(repr(v) for v in row) + "]" for row in P.rows.tolist())
    parts.append(body)
    if pi is not None:
        parts.append("],")
        parts.append('"stationary": [' + ", ".join(repr(v) for v in pi.probs.tolist()) + "]")
    else:
        parts.append("]")
    parts.append("}")
    Path(path).write_text("\n".join(parts) + "\n")


def load_chain(path: str | Path) -> tuple[TransitionMatrix, Distribution | None]:
    """Parse, validate, and return a chain file.

    A stored stationary vector is checked against P; if its residual exceeds
    1e-6 a :class:`StationaryMismatchWarning` is emitted and the vector is
    recomputed by power iteration instead.
    """
    from .chain_core import stationary_distribution

    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ValidationError(f"malformed chain file {path}: {err}") from err
    try:
        d = int(doc["d"])
        dims = tuple(int(v) for v in doc["dims"])
        transition = np.asarray(doc["transition"], dtype=float)
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"chain file {path} is missing or corrupts a field: {err}") from err
    if len(dims) != d:
        raise ValidationError(f"chain file declares d={d} but has {len(dims)} dims")
    space = ProductStateSpace(dims)
    if transition.shape != (space.total, space.total):
        raise ValidationError(
            f"transition shape {transition.shape} does not match dims (total {space.total})"
        )
    P = TransitionMatrix(space, transition)
    validate(P)

    pi: Distribution | None = None
    if "stationary" in doc:
        probs = np.asarray(doc["stationary"], dtype=float)
        if probs.shape != (space.total,):
            raise ValidationError("stationary vector length does not match the state space")
        pi = Distribution(space, probs)
        residual = float(np.abs(pi.probs @ P.rows - pi.probs).sum())
        if residual > STATIONARY_FILE_TOL:
            warnings.warn(
                f"stored stationary vector has residual {residual:.3e} > {STATIONARY_FILE_TOL}; "
                "recomputing",
                StationaryMismatchWarning,
                stacklevel=2,
            )
            pi = stationary_distribution(P)
    return P, pi
