"""Estimators over finite sequence prefixes.

Limits superior and inferior of frequency and average sequences are
approximated by the maximum and minimum over a tail window ``[start, N]``
of the prefix. All indices are 1-based, matching ``r(n)`` for the first
``n`` symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySelection,
    EmptyWindow,
    NeverOccurred,
)
from .sequence import SymbolSequence

EventLike = Iterable[int] | np.ndarray


def event_mask(event: EventLike, k: int) -> np.ndarray:
    """Boolean membership over ``[k]``; accepts a mask or 1-based symbols."""
    arr = np.asarray(list(event) if not isinstance(event, np.ndarray) else event)
    if arr.dtype == bool:
        if arr.shape != (k,):
            raise DimensionMismatch(f"mask of length {arr.size} for k={k}")
        return arr.copy()
    mask = np.zeros(k, dtype=bool)
    if arr.size:
        if arr.min() < 1 or arr.max() > k:
            raise ValueError(f"event symbols must lie in 1..{k}")
        mask[arr.astype(int) - 1] = True
    return mask


def indicator(event: EventLike, k: int) -> np.ndarray:
    return event_mask(event, k).astype(float)


def as_gamble(X: Sequence[float], k: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (k,):
        raise DimensionMismatch(f"gamble of shape {X.shape} for k={k}")
    if not np.all(np.isfinite(X)):
        raise ValueError("gamble values must be finite")
    return X


@dataclass(frozen=True)
class TailPolicy:
    """Which indices count as the tail of a prefix of length ``N``.

    ``fraction`` starts at ``max(1, floor(beta * N))``; ``fixed_start``
    starts at ``n0``.
    """

    mode: str = "fraction"
    beta: float = 0.5
    n0: int = 1

    def __post_init__(self):
        if self.mode not in ("fraction", "fixed_start"):
            raise ValueError(f"unknown tail mode {self.mode!r}")
        if self.mode == "fraction" and not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if self.mode == "fixed_start" and self.n0 < 1:
            raise ValueError("n0 must be positive")

    @classmethod
    def fixed(cls, n0: int) -> "TailPolicy":
        return cls(mode="fixed_start", n0=n0)

    def start(self, N: int) -> int:
        if self.mode == "fraction":
            s = max(1, int(self.beta * N))
        else:
            s = self.n0
        if N < 1 or s > N:
            raise EmptyWindow(f"tail start {s} beyond length {N}")
        return s

    def to_json(self) -> dict:
        if self.mode == "fraction":
            return {"mode": "fraction", "beta": self.beta}
        return {"mode": "fixed_start", "n0": self.n0}


@dataclass(frozen=True)
class WindowEstimate:
    lower: float
    upper: float
    start: int
    N: int

    @property
    def width(self) -> float:
        return self.upper - self.lower


def relative_frequency(seq: SymbolSequence, n: int) -> np.ndarray:
    return seq.relative_frequency(n)


def running_average(seq: SymbolSequence, X: Sequence[float]) -> np.ndarray:
    """``Sigma X(n) = <X, r(n)>`` for ``n = 1..N`` (array index ``n - 1``)."""
    X = as_gamble(X, seq.k)
    n = np.arange(1, len(seq) + 1)
    return (seq.prefix_counts[1:] @ X) / n


def _window(series: np.ndarray, policy: TailPolicy) -> tuple[np.ndarray, int]:
    series = np.asarray(series)
    start = policy.start(len(series))
    return series[start - 1 :], start


def limsup_estimate(series: np.ndarray, policy: TailPolicy = TailPolicy()) -> float:
    return float(_window(series, policy)[0].max())


def liminf_estimate(series: np.ndarray, policy: TailPolicy = TailPolicy()) -> float:
    return float(_window(series, policy)[0].min())


def window_estimate(series: np.ndarray, policy: TailPolicy = TailPolicy()) -> WindowEstimate:
    tail, start = _window(series, policy)
    return WindowEstimate(float(tail.min()), float(tail.max()), start, len(series))


def upper_prevision_estimate(
    seq: SymbolSequence, X: Sequence[float], policy: TailPolicy = TailPolicy()
) -> float:
    return limsup_estimate(running_average(seq, X), policy)


def lower_prevision_estimate(
    seq: SymbolSequence, X: Sequence[float], policy: TailPolicy = TailPolicy()
) -> float:
    return -upper_prevision_estimate(seq, -np.asarray(X, dtype=float), policy)


# --------------------------------------------------- exact event windows


def event_counts(seq: SymbolSequence, event: EventLike) -> np.ndarray:
    """Occurrence counts of ``event`` in ``x(1..n)`` for ``n = 0..N``."""
    mask = event_mask(event, seq.k)
    return seq.prefix_counts[:, mask].sum(axis=1, dtype=np.int64)


def _exact_extreme(c: np.ndarray, n: np.ndarray, largest: bool) -> Fraction:
    """Exact max (or min) of ``c / n`` over integer arrays."""
    f = c / n
    i = int(np.argmax(f) if largest else np.argmin(f))
    while True:
        # any candidate strictly better than i, decided by cross-multiplication
        lhs = c * n[i]
        rhs = c[i] * n
        better = lhs > rhs if largest else lhs < rhs
        if not better.any():
            return Fraction(int(c[i]), int(n[i]))
        cand = np.flatnonzero(better)
        i = int(cand[np.argmax(f[cand])] if largest else cand[np.argmin(f[cand])])


@dataclass(frozen=True)
class EventWindow:
    """Exact extreme frequencies of an event over a tail window."""

    lower: Fraction
    upper: Fraction
    start: int
    N: int

    @property
    def width(self) -> float:
        return float(self.upper - self.lower)


def event_window(
    seq: SymbolSequence, event: EventLike, policy: TailPolicy = TailPolicy()
) -> EventWindow:
    """Tail-window extremes of the frequency of ``event``, as exact fractions.

    Exactness makes the width of an event and of its complement identical.
    """
    N = len(seq)
    start = policy.start(N)
    c = event_counts(seq, event)[start:]
    n = np.arange(start, N + 1, dtype=np.int64)
    return EventWindow(
        _exact_extreme(c, n, largest=False), _exact_extreme(c, n, largest=True), start, N
    )


def upper_probability_estimate(
    seq: SymbolSequence, event: EventLike, policy: TailPolicy = TailPolicy()
) -> float:
    return float(event_window(seq, event, policy).upper)


def lower_probability_estimate(
    seq: SymbolSequence, event: EventLike, policy: TailPolicy = TailPolicy()
) -> float:
    return float(event_window(seq, event, policy).lower)


# -------------------------------------------------------- conditioning


@dataclass
class ConditionalFrequency:
    """Frequencies of symbols among the occurrences of ``B`` so far.

    Before ``B`` first occurs (index ``n_B``) the prior ``P0`` stands in.
    """

    seq: SymbolSequence
    B: np.ndarray
    n_B: int
    prior: np.ndarray
    counts_B: np.ndarray = field(repr=False)

    def probabilities(self) -> np.ndarray:
        """``P(.|B)(n)`` for ``n = 1..N`` as an ``(N, k)`` array."""
        pc = self.seq.prefix_counts[1:].astype(float) * self.B
        out = np.empty_like(pc)
        cb = self.counts_B[1:]
        seen = cb > 0
        out[seen] = pc[seen] / cb[seen, None]
        out[~seen] = self.prior
        return out

    def prob(self, A: EventLike) -> np.ndarray:
        """``P(A|B)(n)`` for ``n = 1..N``."""
        mask = event_mask(A, self.seq.k)
        joint = self.seq.prefix_counts[1:, mask & self.B].sum(axis=1)
        cb = self.counts_B[1:]
        prior = float(self.prior[mask].sum())
        return np.where(cb > 0, joint / np.maximum(cb, 1), prior)

    def average(self, X: Sequence[float]) -> np.ndarray:
        """``Sigma(X chi_B)(n) / Sigma chi_B(n)``, prior expectation before ``n_B``."""
        X = as_gamble(X, self.seq.k)
        joint = self.seq.prefix_counts[1:] @ (X * self.B)
        cb = self.counts_B[1:]
        return np.where(cb > 0, joint / np.maximum(cb, 1), float(self.prior @ X))


def conditional_frequency(
    seq: SymbolSequence, B: EventLike, prior: Sequence[float] | None = None
) -> ConditionalFrequency:
    """Conditional frequencies given ``B``.

    >>> s = SymbolSequence(3, [1, 2, 3, 2])
    >>> float(conditional_frequency(s, [2, 3]).prob([2])[-1])
    0.6666666666666666
    """
    k = seq.k
    mask = event_mask(B, k)
    P0 = np.full(k, 1.0 / k) if prior is None else np.asarray(prior, dtype=float)
    if P0.shape != (k,):
        raise DimensionMismatch("prior has the wrong length")
    cb = seq.prefix_counts[:, mask].sum(axis=1, dtype=np.int64)
    if len(seq) == 0 or cb[-1] == 0:
        raise NeverOccurred("conditioning event never occurs in the prefix")
    n_B = int(np.argmax(cb > 0))
    return ConditionalFrequency(seq, mask, n_B, P0, cb)


def _conditional_window(cf: ConditionalFrequency, series: np.ndarray, policy: TailPolicy):
    N = len(series)
    start = max(policy.start(N), cf.n_B)
    tail = series[start - 1 :]
    return tail, start


def conditional_upper_prevision_estimate(
    seq: SymbolSequence,
    X: Sequence[float],
    B: EventLike,
    policy: TailPolicy = TailPolicy(),
) -> float:
    cf = conditional_frequency(seq, B)
    tail, _ = _conditional_window(cf, cf.average(X), policy)
    return float(tail.max())


def conditional_lower_prevision_estimate(
    seq: SymbolSequence,
    X: Sequence[float],
    B: EventLike,
    policy: TailPolicy = TailPolicy(),
) -> float:
    return -conditional_upper_prevision_estimate(
        seq, -np.asarray(X, dtype=float), B, policy
    )


def conditional_upper_probability_estimate(
    seq: SymbolSequence, A: EventLike, B: EventLike, policy: TailPolicy = TailPolicy()
) -> float:
    cf = conditional_frequency(seq, B)
    tail, _ = _conditional_window(cf, cf.prob(A), policy)
    return float(tail.max())


def conditional_window(
    seq: SymbolSequence, A: EventLike, B: EventLike, policy: TailPolicy = TailPolicy()
) -> WindowEstimate:
    cf = conditional_frequency(seq, B)
    tail, start = _conditional_window(cf, cf.prob(A), policy)
    return WindowEstimate(float(tail.min()), float(tail.max()), start, len(seq))


# ------------------------------------------ irrelevance and independence


@dataclass(frozen=True)
class IrrelevanceReport:
    irrelevant: bool
    gap: float
    conditional_upper: float
    upper: float


def irrelevance_check(
    seq: SymbolSequence,
    A: EventLike,
    B: EventLike,
    policy: TailPolicy = TailPolicy(),
    tol: float = 0.02,
) -> IrrelevanceReport:
    """Compare the upper probability of ``A`` with and without conditioning on ``B``."""
    cond = conditional_upper_probability_estimate(seq, A, B, policy)
    plain = upper_probability_estimate(seq, A, policy)
    gap = abs(cond - plain)
    return IrrelevanceReport(gap <= tol, gap, cond, plain)


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    a_given_b: IrrelevanceReport
    b_given_a: IrrelevanceReport


def independence_check(
    seq: SymbolSequence,
    A: EventLike,
    B: EventLike,
    policy: TailPolicy = TailPolicy(),
    tol: float = 0.02,
) -> IndependenceReport:
    ab = irrelevance_check(seq, A, B, policy, tol)
    ba = irrelevance_check(seq, B, A, policy, tol)
    return IndependenceReport(ab.irrelevant and ba.irrelevant, ab, ba)


@dataclass
class GambleIrrelevanceReport:
    irrelevant: bool
    max_gap: float
    worst_pair: tuple[float, float] | None
    gaps: dict[tuple[float, float], float]


def gamble_irrelevance_check(
    seq: SymbolSequence,
    X: Sequence[float],
    Y: Sequence[float],
    policy: TailPolicy = TailPolicy(),
    tol: float = 0.02,
) -> GambleIrrelevanceReport:
    """Irrelevance of ``Y`` to ``X`` over all threshold events.

    For every attained value ``a`` of ``X`` and ``b`` of ``Y`` the event
    ``{X <= a}`` is tested against the condition ``{Y <= b}``; conditions
    that never occur in the prefix are skipped.
    """
    k = seq.k
    X = as_gamble(X, k)
    Y = as_gamble(Y, k)
    gaps: dict[tuple[float, float], float] = {}
    worst, worst_pair = 0.0, None
    for b in np.unique(Y):
        cond = Y <= b
        if event_counts(seq, cond)[-1] == 0:
            continue
        for a in np.unique(X):
            gap = irrelevance_check(seq, X <= a, cond, policy, tol).gap
            gaps[(float(a), float(b))] = gap
            if worst_pair is None or gap > worst:
                worst, worst_pair = gap, (float(a), float(b))
    return GambleIrrelevanceReport(worst <= tol, worst, worst_pair, gaps)


# --------------------------------------------------------- selections


@dataclass(frozen=True)
class Periodic:
    """Select 1-based positions ``i`` with ``(i - 1) % p == offset``."""

    p: int
    offset: int = 0

    def mask(self, seq: SymbolSequence) -> np.ndarray:
        return np.arange(len(seq)) % self.p == self.offset


@dataclass(frozen=True)
class AfterSymbol:
    """Select positions immediately following an occurrence of ``s``."""

    s: int

    def mask(self, seq: SymbolSequence) -> np.ndarray:
        out = np.zeros(len(seq), dtype=bool)
        out[1:] = seq.symbols[:-1] == self.s
        return out


@dataclass
class SelectionReport:
    subsequence: SymbolSequence
    gaps: list[float]
    admissible: bool


def selection_subsequence(
    seq: SymbolSequence,
    rule: np.ndarray | Periodic | AfterSymbol,
    events: Sequence[EventLike] = (),
    policy: TailPolicy = TailPolicy(),
    tol: float = 0.02,
) -> SelectionReport:
    """Apply a selection rule and compare event windows before and after.

    The gap for an event is the larger of the differences between the
    lower ends and between the upper ends of the two windows.
    """
    if isinstance(rule, (Periodic, AfterSymbol)):
        mask = rule.mask(seq)
    else:
        mask = np.asarray(rule, dtype=bool)
        if mask.shape != (len(seq),):
            raise DimensionMismatch("selection mask must match the sequence length")
    if not mask.any():
        raise EmptySelection("the rule selects no index")
    sub = SymbolSequence(seq.k, seq.symbols[mask])
    gaps = []
    for ev in events:
        full = event_window(seq, ev, policy)
        part = event_window(sub, ev, policy)
        gaps.append(
            float(max(abs(full.lower - part.lower), abs(full.upper - part.upper)))
        )
    return SelectionReport(sub, gaps, all(g <= tol for g in gaps))


# ------------------------------------------------------ cluster points


def cluster_point_estimate(
    seq: SymbolSequence, policy: TailPolicy = TailPolicy(), eps: float = 0.05
) -> np.ndarray:
    """Greedy ``eps``-net of the tail frequencies, scanned by increasing ``n``.

    Returns the centres as rows. Every tail point is within ``eps`` of one.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    N = len(seq)
    start = policy.start(N)
    idx = np.arange(start, N + 1)
    pts = seq.prefix_counts[idx] / idx[:, None]
    return greedy_net(pts, eps)


def greedy_net(points: np.ndarray, eps: float) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    nearest = np.full(len(points), np.inf)
    centres = []
    i = 0
    while True:
        c = points[i]
        centres.append(c)
        nearest = np.minimum(nearest, np.linalg.norm(points - c, axis=1))
        uncovered = nearest > eps
        if not uncovered.any():
            return np.array(centres)
        i = int(np.argmax(uncovered))


# ----------------------------------------------------------- precision


def precision_system(
    seq: SymbolSequence,
    family: Sequence[EventLike],
    policy: TailPolicy = TailPolicy(),
    tol: float = 0.02,
) -> list[int]:
    """Indices into ``family`` of the events whose window width is at most ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return [i for i, ev in enumerate(family) if event_window(seq, ev, policy).width <= tol]


def sequence_functional(
    seq: SymbolSequence, policy: TailPolicy = TailPolicy()
) -> Callable[[np.ndarray], float]:
    """The tail-window upper prevision ``X -> max_n <X, r(n)>`` as a function.

    It is the upper envelope of finitely many linear previsions, hence
    coherent, so it can be fed to ``credal.gbr_root``.
    """
    N = len(seq)
    start = policy.start(N)
    idx = np.arange(start, N + 1)
    pts = seq.prefix_counts[idx] / idx[:, None]

    def upper(X):
        return float((pts @ np.asarray(X, dtype=float)).max())

    return upper


def restricted_functional(
    seq: SymbolSequence, B: EventLike, policy: TailPolicy = TailPolicy()
) -> Callable[[np.ndarray], float]:
    """``X -> limsup Sigma(X chi_B)``, the unnormalized restriction to ``B``.

    It is not coherent unless ``B`` has lower probability one.
    """
    chi = indicator(B, seq.k)
    return lambda X: upper_prevision_estimate(seq, np.asarray(X) * chi, policy)

