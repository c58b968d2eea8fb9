"""Word tokenisation and minimal-cost word alignment.

A "word" here is a whitespace-separated piece with leading and trailing
punctuation removed; comparison is on the lowercased form so that
``Clonidine.`` and ``clonidine`` align as a keep.
"""

from __future__ import annotations

import enum
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str = field(init=False, compare=False)

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        object.__setattr__(self, "normalized", normalize(self.surface))

    def __repr__(self):
        return f"Token({self.surface!r})"


def _strip_punct(piece: str) -> str:
    lo, hi = 0, len(piece)
    while lo < hi and _is_punct(piece[lo]):
        lo += 1
    while hi > lo and _is_punct(piece[hi - 1]):
        hi -= 1
    return piece[lo:hi]


def normalize(surface: str) -> str:
    return _strip_punct(surface).lower()


def tokenize(text: str) -> list[Token]:
    out = []
    for piece in text.split():
        stripped = _strip_punct(piece)
        if stripped:
            out.append(Token(stripped))
    return out


def tokens(words: Sequence[str]) -> list[Token]:
    """Build tokens from already-split words (test and synth helper)."""
    return [Token(w) for w in words]


class Op(enum.IntEnum):
    KEEP = _kernels.KEEP
    SUBSTITUTE = _kernels.SUB
    DELETE = _kernels.DEL
    INSERT = _kernels.INS


@dataclass(frozen=True)
class AlignmentOp:
    op: Op
    a_index: Optional[int] = None
    b_index: Optional[int] = None


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignmentOp, ...]
    cost: int

    def counts(self) -> Counter:
        return Counter(o.op for o in self.ops)


def encode(a: Sequence[Token], b: Sequence[Token]) -> tuple[np.ndarray, np.ndarray]:
    """Map both sequences onto a shared integer vocabulary of normalized forms."""
    vocab: dict[str, int] = {}
    ia = np.fromiter((vocab.setdefault(t.normalized, len(vocab)) for t in a), dtype=np.int64, count=len(a))
    ib = np.fromiter((vocab.setdefault(t.normalized, len(vocab)) for t in b), dtype=np.int64, count=len(b))
    return ia, ib


def align_codes(a: Sequence[Token], b: Sequence[Token], backend: Optional[str] = None):
    """Return ``(cost, op_codes)`` without materialising AlignmentOp objects."""
    ia, ib = encode(a, b)
    return _kernels.edit_ops(ia, ib, backend)


def align(a: Sequence[Token], b: Sequence[Token], backend: Optional[str] = None) -> Alignment:
    """Minimal unit-cost alignment of ``a`` onto ``b``.

    Ties in the traceback (walked from the end of both sequences) are broken
    Keep, then Substitute, then Delete, then Insert.
    """
    cost, codes = align_codes(a, b, backend)
    ops = []
    i = j = 0
    for c in codes.tolist():
        if c == _kernels.KEEP or c == _kernels.SUB:
            ops.append(AlignmentOp(Op(c), i, j))
            i += 1
            j += 1
        elif c == _kernels.DEL:
            ops.append(AlignmentOp(Op.DELETE, i, None))
            i += 1
        else:
            ops.append(AlignmentOp(Op.INSERT, None, j))
            j += 1
    return Alignment(tuple(ops), cost)
