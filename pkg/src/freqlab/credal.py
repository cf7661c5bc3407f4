"""Finite credal sets: envelopes, coherence checks and conditioning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NoBracket, ZeroLowerProbability
from .simplex import as_point

COHERENCE_TOL = 1e-10
GBR_THRESHOLD = 1e-6

UpperFunctional = Callable[[np.ndarray], float]


class CredalSet:
    """A nonempty finite set of probability vectors over ``k`` symbols.

    Upper previsions only depend on the convex hull of the points, so no
    hull is ever computed.

    >>> C = CredalSet([[0.2, 0.8], [0.6, 0.4]])
    >>> upper_prevision(C, [1, 0]).value, lower_prevision(C, [1, 0])
    (0.6, 0.2)
    """

    def __init__(self, points: Iterable[Sequence[float]]):
        pts = [as_point(p) for p in points]
        if not pts:
            raise ValueError("a credal set needs at least one point")
        k = pts[0].size
        if any(p.size != k for p in pts):
            raise DimensionMismatch("points of different dimension")
        self.points = np.array(pts)
        self.points.setflags(write=False)
        self.k = k

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"CredalSet(k={self.k}, points={len(self)})"

    @classmethod
    def from_json(cls, obj: dict) -> "CredalSet":
        C = cls(obj["points"])
        if "k" in obj and int(obj["k"]) != C.k:
            raise DimensionMismatch(f"declared k={obj['k']}, points have k={C.k}")
        return C

    def to_json(self) -> dict:
        return {"k": self.k, "points": self.points.tolist()}

    def functional(self) -> UpperFunctional:
        return lambda X: upper_prevision(self, X).value


def _gamble(X, k: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (k,):
        raise DimensionMismatch(f"gamble of shape {X.shape} for k={k}")
    return X


def natural_extension(p: Sequence[float], X: Sequence[float]) -> float:
    """Expectation of ``X`` under the probability vector ``p``."""
    p = np.asarray(p, dtype=float)
    return float(p @ _gamble(X, p.size))


@dataclass(frozen=True)
class UpperPrevisionReport:
    value: float
    argmax: int
    expectations: np.ndarray


def upper_prevision(C: CredalSet, X: Sequence[float]) -> UpperPrevisionReport:
    e = C.points @ _gamble(X, C.k)
    i = int(np.argmax(e))
    return UpperPrevisionReport(float(e[i]), i, e)


def lower_prevision(C: CredalSet, X: Sequence[float]) -> float:
    return -upper_prevision(C, -np.asarray(X, dtype=float)).value


def upper_probability(C: CredalSet, A: np.ndarray) -> float:
    return upper_prevision(C, np.asarray(A, dtype=float)).value


def lower_probability(C: CredalSet, A: np.ndarray) -> float:
    return lower_prevision(C, np.asarray(A, dtype=float))


# ----------------------------------------------------------- coherence


@dataclass(frozen=True)
class CoherenceReport:
    ok: bool
    axiom: str | None = None
    witness: tuple | None = None
    detail: str = ""


def coherence_check(
    R: UpperFunctional,
    samples: Iterable[tuple[Sequence[float], Sequence[float], float, float]],
    tol: float = COHERENCE_TOL,
) -> CoherenceReport:
    """Test the axioms of a coherent upper prevision on given samples.

    Each sample ``(X, Y, lam, c)`` is used for: ``R(X) <= max X`` (UP1),
    ``R(lam X) = lam R(X)`` (UP2), ``R(X + Y) <= R(X) + R(Y)`` (UP3),
    ``R(X + c) = R(X) + c`` (UP4) and monotonicity (UP5), checked on the
    pair ``min(X, Y) <= X`` and on ``(X, Y)`` itself when ``X <= Y``.
    The first failure is returned with its witness.
    """
    for X, Y, lam, c in samples:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        rx = R(X)
        if rx > X.max() + tol:
            return CoherenceReport(False, "UP1", (X,), f"R(X)={rx} > max X={X.max()}")
        rl = R(lam * X)
        if abs(rl - lam * rx) > tol * max(1.0, abs(lam)):
            return CoherenceReport(False, "UP2", (X, lam), f"R(lam X)={rl}, lam R(X)={lam * rx}")
        ry = R(Y)
        rxy = R(X + Y)
        if rxy > rx + ry + tol:
            return CoherenceReport(False, "UP3", (X, Y), f"R(X+Y)={rxy} > {rx + ry}")
        rc = R(X + c)
        if abs(rc - (rx + c)) > tol * max(1.0, abs(c)):
            return CoherenceReport(False, "UP4", (X, c), f"R(X+c)={rc}, R(X)+c={rx + c}")
        lo = np.minimum(X, Y)
        if R(lo) > rx + tol:
            return CoherenceReport(False, "UP5", (lo, X), "monotonicity fails")
        if np.all(X <= Y) and rx > ry + tol:
            return CoherenceReport(False, "UP5", (X, Y), "monotonicity fails")
    return CoherenceReport(True)


# ------------------------------------------------- generalized Bayes rule


def gbr_credal(
    C: CredalSet,
    X: Sequence[float],
    B: np.ndarray,
    threshold: float = GBR_THRESHOLD,
) -> float:
    """Largest conditional expectation of ``X`` given ``B`` over the points."""
    X = _gamble(X, C.k)
    chi = np.asarray(B, dtype=float)
    if chi.shape != (C.k,):
        raise DimensionMismatch("event mask has the wrong length")
    mass = C.points @ chi
    if mass.min() <= threshold:
        raise ZeroLowerProbability(f"min p(B) = {mass.min()} <= {threshold}")
    return float(((C.points @ (chi * X)) / mass).max())


def gbr_root(
    R: UpperFunctional,
    X: Sequence[float],
    B: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> float:
    """Root of ``g(a) = R(chi_B (X - a))`` by bisection.

    The bracket is the range of ``X`` on ``B``, which lies inside the range
    of ``X``; a constant ``X`` on ``B`` is returned as is. ``g`` is
    nonincreasing, and the returned value approximates
    ``inf {a : g(a) <= 0}`` to within ``tol``.
    """
    X = np.asarray(X, dtype=float)
    chi = np.asarray(B, dtype=float)
    if chi.shape != X.shape:
        raise DimensionMismatch("event mask has the wrong length")
    on_b = X[chi > 0]
    if on_b.size == 0:
        raise NoBracket("empty conditioning event")
    lo, hi = float(on_b.min()), float(on_b.max())
    if lo == hi:
        return lo

    def g(a: float) -> float:
        return R(chi * (X - a))

    g_lo, g_hi = g(lo), g(hi)
    if g_lo <= 0:
        # B carries no upper mass where X exceeds its minimum on B
        raise NoBracket(f"g({lo}) = {g_lo} is not positive")
    if g_hi > tol:
        raise NoBracket(f"g({hi}) = {g_hi} > 0")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
