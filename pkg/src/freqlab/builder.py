"""Constructions of sequences with prescribed cluster points of frequencies.

``construct_for_curve`` walks the relative frequencies around a closed curve
in the simplex, one polygon edge at a time. Each edge is realized by
repeating a short block whose symbol counts point at the place where the
ray through the edge leaves the simplex. The finite-prefix error bounds
that make the walk converge to the curve are checked on every segment
while it is built.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    BoundViolation,
    BudgetExceeded,
    DegeneratePair,
    Overflow,
)
from .sequence import SymbolSequence
from .simplex import (
    Curve,
    PolygonCurve,
    as_point,
    boundary_intercept,
    dense_sample,
    nearest_distances,
    polygonal_approximation,
    quantize_direction,
)

# slack for float rounding when comparing against proven bounds
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Schedules:
    """Polygon resolution ``V(g)`` and quantization ``T(n)``.

    ``v_kind`` is ``"const"`` (always ``v0``) or ``"linear"`` (``v0 * g``);
    ``t_kind`` is ``"const"`` (always ``t0``) or ``"sqrt"`` (``ceil(sqrt n)``).
    Both are nondecreasing by construction.
    """

    v_kind: str = "linear"
    v0: int = 30
    t_kind: str = "sqrt"
    t0: int = 12

    def __post_init__(self):
        if self.v_kind not in ("const", "linear"):
            raise ValueError(f"unknown V schedule {self.v_kind!r}")
        if self.t_kind not in ("const", "sqrt"):
            raise ValueError(f"unknown T schedule {self.t_kind!r}")
        if self.v0 < 2:
            raise ValueError("V must be at least 2")
        if self.t0 < 1:
            raise ValueError("T must be at least 1")

    def V(self, g: int) -> int:
        return self.v0 * g if self.v_kind == "linear" else self.v0

    def T(self, n: int) -> int:
        return math.isqrt(n - 1) + 1 if self.t_kind == "sqrt" else self.t0

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SegmentRecord:
    generation: int
    vertex: int
    n_start: int
    n_end: int
    T: int
    gamma: float
    p_star: list[float]
    iota: list[int]
    T_tilde: int
    ell: int
    p_old: list[float]
    p_new: list[float]
    p_hat_new: list[float]
    counts_end: list[int]
    endpoint_error: float
    bound: float
    within_deviation: float
    within_bound: float
    on_boundary: bool = False
    clipped: bool = False
    skipped: bool = False
    note: str = ""

    @property
    def violations(self) -> list[str]:
        if self.skipped:
            return []
        out = []
        if not self.clipped and not self.on_boundary:
            if self.endpoint_error > self.bound + BOUND_SLACK:
                out.append("endpoint")
            if self.ell < 1:
                out.append("ell")
        if self.within_deviation > self.within_bound + BOUND_SLACK:
            out.append("within")
        return out


@dataclass
class Construction:
    sequence: SymbolSequence
    trace: list[SegmentRecord]
    generations: list[tuple[int, int]] = field(default_factory=list)
    budget_exceeded: bool = False

    @property
    def violations(self) -> list[tuple[int, str]]:
        return [(i, v) for i, rec in enumerate(self.trace) for v in rec.violations]


def _distance_to_segment(r: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = float(d @ d)
    if dd == 0:
        return np.linalg.norm(r - a, axis=1)
    t = np.clip((r - a) @ d / dd, 0.0, 1.0)
    return np.linalg.norm(r - (a + t[:, None] * d), axis=1)


def construct_for_curve(
    curve: Curve,
    schedules: Schedules | None = None,
    *,
    generations: int | None = None,
    max_length: int | None = None,
    strict: bool = True,
) -> Construction:
    """Build a sequence whose relative frequencies trace ``curve``.

    Generation ``g`` visits the points ``c(v / V(g))`` for ``v = 1..V(g)``,
    starting from wherever the previous generation ended. A segment whose
    target equals the current frequency vector is skipped and noted.

    The run stops after ``generations`` full passes or as soon as the
    sequence reaches ``max_length`` symbols, whichever comes first. A
    target on the boundary of the simplex can only be approached in the
    limit, so such a segment consumes the rest of the length budget and is
    flagged ``clipped``.

    With ``strict`` a failed bound raises ``BoundViolation`` on the spot;
    otherwise it is only recorded in the trace.
    """
    schedules = schedules or Schedules()
    if generations is None and max_length is None:
        raise ValueError("give generations, max_length or both")
    if generations is not None and generations < 1:
        raise ValueError("generations must be positive")
    if max_length is not None and max_length < 1:
        raise ValueError("max_length must be positive")
    k = curve.k
    counts = np.zeros(k, dtype=np.int64)
    counts[0] = 1
    n = 1
    chunks: list[np.ndarray] = [np.array([1], dtype=np.uint16)]
    trace: list[SegmentRecord] = []
    spans: list[tuple[int, int]] = []
    budget_hit = max_length is not None and n >= max_length
    last_T = 0
    last_V = 0
    g = 0
    while not budget_hit and (generations is None or g < generations):
        g += 1
        V = schedules.V(g)
        if V < last_V:
            raise ValueError("V schedule must be nondecreasing")
        last_V = V
        targets = polygonal_approximation(curve, V)
        gen_start = n
        for v in range(1, V + 1):
            T = max(schedules.T(n), k)
            if T < last_T:
                raise ValueError("T schedule must be nondecreasing")
            last_T = T
            p_old = counts / n
            p_new = targets[v]
            try:
                bi = boundary_intercept(p_old, p_new)
            except DegeneratePair as exc:
                trace.append(_skipped(g, v, n, T, p_old, counts, str(exc)))
                continue
            q = quantize_direction(bi.p_star, T)
            clipped = False
            if bi.on_boundary:
                if max_length is None:
                    raise BudgetExceeded(
                        "boundary target needs a max_length budget to clip against"
                    )
                ell = -(-(max_length - n) // q.T_tilde)
                clipped = True
            else:
                ell = math.ceil(n / (T * (bi.gamma - 1)))
            block = np.repeat(np.arange(1, k + 1, dtype=np.uint16), q.iota)
            size = ell * q.T_tilde
            if max_length is not None and n + size >= max_length:
                size = max_length - n
                clipped = clipped or size < ell * q.T_tilde
                budget_hit = True
            piece = np.resize(block, size)
            # frequencies along the piece, for the within-piece bound
            onehot = np.zeros((size, k), dtype=np.int64)
            onehot[np.arange(size), piece.astype(np.int64) - 1] = 1
            steps = counts + np.cumsum(onehot, axis=0)
            idx = np.arange(n + 1, n + size + 1)
            r_path = steps / idx[:, None]
            new_counts = steps[-1]
            n_end = n + size
            p_hat_new = new_counts / n_end
            deviation = float(_distance_to_segment(r_path, p_old, p_hat_new).max())
            rec = SegmentRecord(
                generation=g,
                vertex=v,
                n_start=n,
                n_end=n_end,
                T=T,
                gamma=bi.gamma,
                p_star=bi.p_star.tolist(),
                iota=q.iota.tolist(),
                T_tilde=q.T_tilde,
                ell=ell,
                p_old=p_old.tolist(),
                p_new=p_new.tolist(),
                p_hat_new=p_hat_new.tolist(),
                counts_end=new_counts.tolist(),
                endpoint_error=float(np.linalg.norm(p_hat_new - p_new)),
                bound=4 * T / n + k / T,
                within_deviation=deviation,
                within_bound=(2 * T + k) / n,
                on_boundary=bi.on_boundary,
                clipped=clipped,
            )
            trace.append(rec)
            if strict and rec.violations:
                raise BoundViolation(
                    f"segment g={g} v={v}: {', '.join(rec.violations)} bound failed"
                )
            chunks.append(piece)
            counts = new_counts
            n = n_end
            if budget_hit:
                break
        spans.append((gen_start, n))
    seq = SymbolSequence(k, np.concatenate(chunks))
    return Construction(seq, trace, spans, budget_hit)


def _skipped(g, v, n, T, p_old, counts, note) -> SegmentRecord:
    p = p_old.tolist()
    return SegmentRecord(
        generation=g,
        vertex=v,
        n_start=n,
        n_end=n,
        T=T,
        gamma=float("nan"),
        p_star=p,
        iota=[0] * len(p),
        T_tilde=0,
        ell=0,
        p_old=p,
        p_new=p,
        p_hat_new=p,
        counts_end=counts.tolist(),
        endpoint_error=0.0,
        bound=float("inf"),
        within_deviation=0.0,
        within_bound=float("inf"),
        skipped=True,
        note=f"degenerate segment skipped: {note}",
    )


def construct_polytope_boundary(
    vertices: Sequence[Sequence[float]],
    schedules: Schedules | None = None,
    *,
    generations: int | None = None,
    max_length: int | None = None,
    shrink: float = 0.0,
    strict: bool = True,
) -> Construction:
    """Cycle the closed polygon through ``vertices`` in the given order.

    Only the convex hull of the cluster points matters for upper
    previsions, so the vertex order affects nothing downstream. With
    ``shrink > 0`` every vertex is pulled towards the barycentre of the
    vertices by that fraction, which moves boundary vertices into the
    interior where they can actually be reached.
    """
    pts = np.array([as_point(v) for v in vertices])
    if shrink:
        centre = pts.mean(axis=0)
        pts = pts + shrink * (centre - pts)
    return construct_for_curve(
        PolygonCurve(pts),
        schedules,
        generations=generations,
        max_length=max_length,
        strict=strict,
    )


def generation_points(construction: Construction, g: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``n`` and frequencies ``r(n)`` reached during generation ``g``."""
    lo, hi = construction.generations[g - 1]
    idx = np.arange(lo, hi + 1)
    pc = construction.sequence.prefix_counts
    return idx, pc[idx] / idx[:, None]


@dataclass(frozen=True)
class GlobalBoundReport:
    checked: int
    violations: int
    psi_bar: float
    worst_ratio: float


def global_bound_check(
    construction: Construction,
    curve: Curve,
    schedules: Schedules,
    *,
    dense: int = 200_000,
) -> GlobalBoundReport:
    """Check ``d(r(n), C) <= (8 + k) / sqrt(n) + psi`` on the last generation.

    ``psi`` is the one-sided distance from the last generation's polygon to
    a dense sample of the curve. Distances to the curve are measured to the
    dense sample, which can only overestimate them. Points with
    ``sqrt(n) <= k`` are outside the bound's scope and skipped.
    """
    k = curve.k
    g = len(construction.generations)
    poly = polygonal_approximation(curve, schedules.V(g))
    cloud = dense_sample(curve, dense)
    t = np.linspace(0, 1, 64)[:, None, None]
    edges = poly[:-1][None] + t * (poly[1:] - poly[:-1])[None]
    psi_bar = float(nearest_distances(edges.reshape(-1, k), cloud).max())
    idx, r = generation_points(construction, g)
    keep = np.sqrt(idx) > k
    idx, r = idx[keep], r[keep]
    dist = nearest_distances(r, cloud)
    bound = (8 + k) / np.sqrt(idx) + psi_bar
    ratio = dist / bound
    return GlobalBoundReport(
        int(idx.size),
        int(np.count_nonzero(dist > bound)),
        psi_bar,
        float(ratio.max()) if ratio.size else 0.0,
    )


# ------------------------------------------------------- extreme case


def extreme_phi(alpha: float, s: int) -> int:
    """``ceil(exp(s ** alpha))`` as an exact Python int."""
    try:
        value = math.exp(s**alpha)
    except OverflowError as exc:
        raise Overflow(f"exp({s}**{alpha}) overflows") from exc
    if not math.isfinite(value):
        raise Overflow(f"exp({s}**{alpha}) overflows")
    return math.ceil(value)


# longest sequence materialized in memory
MAX_EXTREME_LENGTH = 2**32


def construct_extreme(k: int, alpha: float, num_segments: int) -> SymbolSequence:
    """Runs of ever faster growing length, cycling through the symbols.

    The sequence starts as ``<1>``, which has length ``phi(0) = 1``.
    Segment ``s = 0..num_segments-1`` then appends ``phi(s+1) - phi(s)``
    copies of symbol ``(s mod k) + 1``, so after segment ``s`` the length is
    exactly ``phi(s+1)`` and the frequency vector is within
    ``2 phi(s) / phi(s+1)`` of the vertex for that symbol.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if num_segments < k:
        raise ValueError("need at least k segments")
    phis = [extreme_phi(alpha, s) for s in range(num_segments + 1)]
    if phis[-1] > MAX_EXTREME_LENGTH:
        raise Overflow(
            f"length {phis[-1]} exceeds {MAX_EXTREME_LENGTH}; use fewer segments"
        )
    runs = [(1, 1)] + [
        ((s % k) + 1, phis[s + 1] - phis[s]) for s in range(num_segments)
    ]
    return SymbolSequence.from_runs(k, runs)


def extreme_endpoints(k: int, alpha: float, num_segments: int) -> list[tuple[int, list[int]]]:
    """Length and exact symbol counts after each segment of ``construct_extreme``.

    Works from the run lengths alone, so it also covers schedules far too
    long to materialize.
    """
    counts = [0] * k
    counts[0] = 1
    out = []
    prev = extreme_phi(alpha, 0)
    for s in range(num_segments):
        nxt = extreme_phi(alpha, s + 1)
        counts[s % k] += nxt - prev
        out.append((nxt, list(counts)))
        prev = nxt
    return out


# ------------------------------------------------ named demonstrations


def von_mises_doubling(length: int) -> SymbolSequence:
    """Blocks of sizes 1, 1, 2, 2, 4, 4, ... alternating symbols 1 and 2.

    >>> von_mises_doubling(6).symbols.tolist()
    [1, 2, 1, 1, 2, 2]
    """
    if length < 1:
        raise ValueError("length must be positive")
    runs = []
    total, size = 0, 1
    while total < length:
        for sym in (1, 2):
            runs.append((sym, size))
            total += size
        size *= 2
    syms = np.repeat([s for s, _ in runs], [r for _, r in runs])[:length]
    return SymbolSequence(2, syms)


def pre_dynkin_block(i: int) -> int:
    """Run length of label ``i``: ``2 ** (ceil(i / 2) - 1)``."""
    return 2 ** ((i + 1) // 2 - 1)


def pre_dynkin_counterexample(length: int) -> SymbolSequence:
    """Labels ``1, 2, 3, ...`` with run lengths 1, 1, 2, 2, 4, 4, ...

    The alphabet size is the largest label present.

    >>> pre_dynkin_counterexample(6).symbols.tolist()
    [1, 2, 3, 3, 4, 4]
    """
    if length < 1:
        raise ValueError("length must be positive")
    labels, reps = [], []
    total, i = 0, 0
    while total < length:
        i += 1
        labels.append(i)
        reps.append(pre_dynkin_block(i))
        total += reps[-1]
    syms = np.repeat(labels, reps)[:length]
    return SymbolSequence(int(syms.max()), syms)
