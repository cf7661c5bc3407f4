"""Set systems on a finite set ``Omega = {1..m}`` encoded as bitmasks.

Element ``i`` corresponds to bit ``i - 1``, so ``{1, 3}`` is ``0b101``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ClosureBudgetExceeded, NotPiSystem
from .frequency import TailPolicy, event_window
from .sequence import SymbolSequence

MAX_OMEGA = 24
CLOSURE_BUDGET = 2**20


def to_mask(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        if e < 1:
            raise ValueError("elements are 1-based")
        mask |= 1 << (e - 1)
    return mask


def to_elements(mask: int) -> list[int]:
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


class SetSystem:
    """A collection of subsets of ``{1..omega}``, deduplicated and sorted.

    >>> S = SetSystem.from_elements(2, [[1], [2], [], [1, 2]])
    >>> is_field(S), len(S)
    (True, 4)
    """

    def __init__(self, omega: int, sets: Iterable[int]):
        if not 0 <= omega <= MAX_OMEGA:
            raise ValueError(f"omega must lie in 0..{MAX_OMEGA}")
        self.omega = omega
        self.full = (1 << omega) - 1
        masks = sorted(set(int(s) for s in sets))
        if masks and (masks[0] < 0 or masks[-1] > self.full):
            raise ValueError("set outside Omega")
        self.sets: tuple[int, ...] = tuple(masks)
        self._members = frozenset(masks)

    @classmethod
    def from_elements(cls, omega: int, sets: Iterable[Iterable[int]]) -> "SetSystem":
        return cls(omega, (to_mask(s) for s in sets))

    @classmethod
    def from_json(cls, obj: dict) -> "SetSystem":
        return cls.from_elements(int(obj["omega"]), obj["sets"])

    def to_json(self) -> dict:
        return {"omega": self.omega, "sets": [to_elements(s) for s in self.sets]}

    def __contains__(self, mask: int) -> bool:
        return mask in self._members

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SetSystem)
            and self.omega == other.omega
            and self.sets == other.sets
        )

    def __hash__(self) -> int:
        return hash((self.omega, self.sets))

    def __repr__(self) -> str:
        return f"SetSystem({self.omega}, {[to_elements(s) for s in self.sets]})"

    def issubset(self, other: "SetSystem") -> bool:
        return self._members <= other._members


def is_pi_system(S: SetSystem) -> bool:
    if not S.sets:
        return False
    return all(a & b in S for i, a in enumerate(S.sets) for b in S.sets[i + 1 :])


def _complement_closed(S: SetSystem) -> bool:
    return all(S.full ^ a in S for a in S.sets)


def is_pre_dynkin(S: SetSystem) -> bool:
    if S.full not in S or not _complement_closed(S):
        return False
    return all(
        a | b in S
        for i, a in enumerate(S.sets)
        for b in S.sets[i + 1 :]
        if a & b == 0
    )


def is_field(S: SetSystem) -> bool:
    if S.full not in S or not _complement_closed(S):
        return False
    return all(a | b in S for i, a in enumerate(S.sets) for b in S.sets[i + 1 :])


def _saturate(omega: int, H: Iterable[int], disjoint_only: bool, budget: int) -> SetSystem:
    full = (1 << omega) - 1
    members: set[int] = set()
    order: list[int] = []
    queue = [full, *H]
    while queue:
        a = queue.pop()
        if a in members:
            continue
        members.add(a)
        order.append(a)
        if len(members) > budget:
            raise ClosureBudgetExceeded(f"closure exceeds {budget} members")
        queue.append(full ^ a)
        for b in order:
            if not disjoint_only or a & b == 0:
                u = a | b
                if u not in members:
                    queue.append(u)
    return SetSystem(omega, members)


def generate_pre_dynkin(
    omega: int, H: Iterable[int] | SetSystem, budget: int = CLOSURE_BUDGET
) -> SetSystem:
    """Smallest pre-Dynkin system containing ``H``."""
    return _saturate(omega, list(H), True, budget)


def generate_field(
    omega: int, H: Iterable[int] | SetSystem, budget: int = CLOSURE_BUDGET
) -> SetSystem:
    """Smallest field containing ``H``."""
    return _saturate(omega, list(H), False, budget)


def atoms_of(omega: int, H: Iterable[int]) -> list[int]:
    """Blocks of the partition of ``Omega`` induced by membership in ``H``."""
    groups: dict[tuple, int] = {}
    H = list(H)
    for i in range(omega):
        key = tuple(bool(h >> i & 1) for h in H)
        groups[key] = groups.get(key, 0) | (1 << i)
    return sorted(groups.values())


def measure(masses: Sequence[float], mask: int) -> float:
    """``P(A)`` from the masses of the individual elements."""
    return float(sum(masses[i] for i in range(len(masses)) if mask >> i & 1))


def uniqueness_check(
    P: Sequence[float],
    Q: Sequence[float],
    H: SetSystem,
    tol: float = 1e-12,
) -> bool:
    """Agreement on a Pi-system propagates to the field it generates.

    If ``P`` and ``Q`` agree within ``tol`` on every set of ``H``, they must
    agree within ``|field(H)| * tol`` on the generated field. Returns
    whether that implication holds (vacuously true when they disagree on
    ``H``).
    """
    if not is_pi_system(H):
        raise NotPiSystem("H is not closed under intersection")
    if len(P) != H.omega or len(Q) != H.omega:
        raise ValueError("masses must have one entry per element")
    if max(abs(measure(P, a) - measure(Q, a)) for a in H) > tol:
        return True
    F = generate_field(H.omega, H)
    worst = max(abs(measure(P, a) - measure(Q, a)) for a in F)
    return worst <= len(F) * tol


def is_minimal(S: SetSystem, H: Iterable[int], predicate) -> bool:
    """No proper subsystem of ``S`` containing ``H`` satisfies ``predicate``.

    Exhaustive over subsets, so only meant for tiny systems.
    """
    required = set(H)
    optional = [s for s in S.sets if s not in required]
    if len(optional) > 20:
        raise ValueError("system too large for an exhaustive check")
    for bits in range((1 << len(optional)) - 1):
        chosen = [s for j, s in enumerate(optional) if bits >> j & 1]
        if predicate(SetSystem(S.omega, [*required, *chosen])):
            return False
    return True


# ----------------------------------------------- precision on sequences


@dataclass
class PreDynkinReport:
    ok: bool
    precise: list[int]
    widths: dict[int, float]
    failures: list[str] = field(default_factory=list)


def precision_pre_dynkin_check(
    seq: SymbolSequence,
    tol: float,
    family: Iterable[Iterable[int]] | SetSystem,
    policy: TailPolicy = TailPolicy(),
) -> PreDynkinReport:
    """Check the pre-Dynkin properties of the events that are precise on ``seq``.

    An event is precise when its frequency window is at most ``tol`` wide.
    Among those: the whole alphabet must be precise, complements of precise
    events must have the same width, and a disjoint union of two precise
    events must be no wider than the sum of their widths.
    """
    k = seq.k
    full = (1 << k) - 1
    if isinstance(family, SetSystem):
        masks = list(family.sets)
    else:
        masks = sorted({to_mask(ev) for ev in family})
    widths = {m: event_window(seq, _event_bool(m, k), policy).width for m in masks}
    precise = [m for m in masks if widths[m] <= tol]
    failures = []
    full_width = event_window(seq, _event_bool(full, k), policy).width
    if full_width != 0:
        failures.append(f"PD1: Omega has width {full_width}")
    for a in precise:
        c = full ^ a
        wc = widths.get(c)
        if wc is None:
            wc = event_window(seq, _event_bool(c, k), policy).width
        if wc != widths[a]:
            failures.append(f"PD2: {to_elements(a)} width {widths[a]} vs complement {wc}")
    for i, a in enumerate(precise):
        for b in precise[i + 1 :]:
            if a & b:
                continue
            u = a | b
            wu = widths.get(u)
            if wu is None:
                wu = event_window(seq, _event_bool(u, k), policy).width
            if wu > widths[a] + widths[b] + 1e-15 or wu > 2 * tol:
                failures.append(f"PD3: {to_elements(u)} width {wu}")
    return PreDynkinReport(not failures, precise, widths, failures)


def _event_bool(mask: int, k: int) -> np.ndarray:
    return np.array([bool(mask >> i & 1) for i in range(k)])


@dataclass(frozen=True)
class DynkinFailure:
    singleton_widths: dict[int, float]
    union_width: float
    N: int


def dynkin_failure(
    seq: SymbolSequence, labels: Sequence[int], policy: TailPolicy = TailPolicy()
) -> DynkinFailure:
    """Widths of the singletons ``{label}`` and of the union of all even labels.

    On the counterexample sequence the singletons become precise while the
    union of the even labels does not.
    """
    k = seq.k
    widths = {}
    for lab in labels:
        mask = np.zeros(k, dtype=bool)
        mask[lab - 1] = True
        widths[lab] = event_window(seq, mask, policy).width
    evens = np.arange(1, k + 1) % 2 == 0
    return DynkinFailure(widths, event_window(seq, evens, policy).width, len(seq))
