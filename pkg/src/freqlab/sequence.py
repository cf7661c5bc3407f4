"""Finite symbol sequences over ``[k] = {1..k}`` and their file formats."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import OutOfRange

MAGIC = b"FQSEQ1"
_HEADER = struct.Struct("<IQ")


class SymbolSequence:
    """An immutable prefix ``x(1..N)`` with cached cumulative counts.

    ``prefix_counts[n, j]`` is the number of occurrences of symbol ``j + 1``
    among the first ``n`` symbols, so row 0 is all zeros.

    >>> s = SymbolSequence(2, [1, 2, 1, 1])
    >>> s.counts(4).tolist(), s.relative_frequency(4).tolist()
    ([3, 1], [0.75, 0.25])
    """

    def __init__(self, k: int, symbols: Iterable[int], *, compact: bool = False):
        if k < 1 or k > 65535:
            raise ValueError("alphabet size must lie in 1..65535")
        if compact and k > 255:
            raise ValueError("compact storage needs k <= 255")
        arr = np.asarray(symbols if not isinstance(symbols, range) else list(symbols))
        if arr.size and (arr.min() < 1 or arr.max() > k):
            raise ValueError(f"symbols must lie in 1..{k}")
        self.k = int(k)
        self.symbols = arr.astype(np.uint8 if compact else np.uint16)
        self.symbols.setflags(write=False)
        self._prefix: np.ndarray | None = None

    @classmethod
    def from_runs(cls, k: int, runs: Iterable[tuple[int, int]]) -> "SymbolSequence":
        """Build from ``(symbol, repeat)`` pairs."""
        runs = list(runs)
        syms = np.array([s for s, _ in runs], dtype=np.uint16)
        reps = np.array([r for _, r in runs], dtype=np.int64)
        return cls(k, np.repeat(syms, reps))

    def __len__(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SymbolSequence)
            and self.k == other.k
            and np.array_equal(self.symbols, other.symbols)
        )

    def __repr__(self) -> str:
        return f"SymbolSequence(k={self.k}, n={len(self)})"

    @property
    def prefix_counts(self) -> np.ndarray:
        if self._prefix is None:
            n = len(self)
            dtype = np.int32 if n < 2**31 else np.int64
            onehot = np.zeros((n + 1, self.k), dtype=dtype)
            onehot[np.arange(1, n + 1), self.symbols.astype(np.int64) - 1] = 1
            self._prefix = np.cumsum(onehot, axis=0, dtype=dtype)
            self._prefix.setflags(write=False)
        return self._prefix

    def _check(self, n: int) -> None:
        if not 1 <= n <= len(self):
            raise OutOfRange(f"n={n} outside 1..{len(self)}")

    def counts(self, n: int) -> np.ndarray:
        self._check(n)
        return self.prefix_counts[n].astype(np.int64)

    def relative_frequency(self, n: int) -> np.ndarray:
        return self.counts(n) / n

    def frequencies(self) -> np.ndarray:
        """All relative frequencies ``r(1..N)`` as an ``(N, k)`` array."""
        n = np.arange(1, len(self) + 1)
        return self.prefix_counts[1:] / n[:, None]

    def slice(self, start: int, stop: int) -> "SymbolSequence":
        """The shifted block ``x(start+1..stop)`` as its own sequence."""
        return SymbolSequence(self.k, self.symbols[start:stop])


def write_sequence(path: str | Path, seq: SymbolSequence, binary: bool = False) -> None:
    path = Path(path)
    if binary:
        with path.open("wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(seq.k, len(seq)))
            fh.write(seq.symbols.astype("<u2").tobytes())
        return
    with path.open("w") as fh:
        fh.write(f"k={seq.k} n={len(seq)}\n")
        syms = seq.symbols.tolist()
        for lo in range(0, len(syms), 64):
            fh.write(" ".join(map(str, syms[lo : lo + 64])))
            fh.write("\n")


def read_sequence(path: str | Path) -> SymbolSequence:
    """Read either file format; binary files are detected by their magic."""
    raw = Path(path).read_bytes()
    if raw.startswith(MAGIC):
        off = len(MAGIC)
        k, n = _HEADER.unpack_from(raw, off)
        off += _HEADER.size
        body = np.frombuffer(raw, dtype="<u2", offset=off)
        if body.size != n:
            raise ValueError(f"header says n={n}, found {body.size} symbols")
        return SymbolSequence(k, body)
    text = raw.decode("ascii")
    header, _, body = text.partition("\n")
    fields = dict(item.split("=", 1) for item in header.split())
    try:
        k, n = int(fields["k"]), int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad header line {header!r}") from exc
    symbols = np.array(body.split(), dtype=np.int64)
    if symbols.size != n:
        raise ValueError(f"header says n={n}, found {symbols.size} symbols")
    return SymbolSequence(k, symbols)
