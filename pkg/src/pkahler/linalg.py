"""Exact linear algebra over the rationals on sparse rows.

Matrices are lists of rows; a row is either a dense sequence or a
``{column: Fraction}`` dict.  Elimination is Gauss-Jordan with columns taken
in increasing order and, among candidate pivot rows, the sparsest one (ties
broken by row position), so results are deterministic.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = ["rref", "rank", "nullspace", "solve", "span_basis", "to_sparse", "mat_vec"]

SparseRow = dict


def to_sparse(row) -> SparseRow:
    if isinstance(row, dict):
        return {c: Fraction(v) for c, v in row.items() if v}
    return {c: Fraction(v) for c, v in enumerate(row) if v}


def rref(rows: Iterable, ncols: int) -> tuple[list[SparseRow], list[int]]:
    """Reduced row echelon form; returns nonzero rows and their pivot columns."""
    work = [to_sparse(r) for r in rows]
    work = [r for r in work if r]
    pivot_rows: list[SparseRow] = []
    pivot_cols: list[int] = []
    remaining = work
    for col in range(ncols):
        best = None
        for idx, r in enumerate(remaining):
            if col in r and (best is None or len(r) < len(remaining[best])):
                best = idx
        if best is None:
            continue
        prow = remaining.pop(best)
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        new_remaining = []
        for r in remaining:
            f = r.get(col)
            if f:
                r = _axpy(r, prow, -f)
            if r:
                new_remaining.append(r)
        remaining = new_remaining
        for k, r in enumerate(pivot_rows):
            f = r.get(col)
            if f:
                pivot_rows[k] = _axpy(r, prow, -f)
        pivot_rows.append(prow)
        pivot_cols.append(col)
        if not remaining:
            break
    return pivot_rows, pivot_cols


def _axpy(r: SparseRow, p: SparseRow, f: Fraction) -> SparseRow:
    out = dict(r)
    for c, v in p.items():
        nv = out.get(c, 0) + f * v
        if nv:
            out[c] = nv
        else:
            out.pop(c, None)
    return out


def rank(rows: Iterable, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Iterable, ncols: int) -> list[list[Fraction]]:
    """Basis of ``{x : A x = 0}``, one vector per free column."""
    R, piv = rref(rows, ncols)
    pivset = set(piv)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in zip(R, piv):
            v = r.get(f)
            if v:
                x[pc] = -v
        basis.append(x)
    return basis


def solve(rows: Sequence, rhs: Sequence, ncols: int) -> list[Fraction] | None:
    """A particular solution of ``A x = b`` (free variables zero), or None."""
    aug = []
    for r, b in zip(rows, rhs):
        sr = to_sparse(r)
        if b:
            sr[ncols] = Fraction(b)
        aug.append(sr)
    R, piv = rref(aug, ncols + 1)
    if piv and piv[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in zip(R, piv):
        x[pc] = r.get(ncols, Fraction(0))
    return x


def span_basis(vectors: Sequence, ncols: int) -> tuple[list[SparseRow], list[int]]:
    """RREF basis of the span of the given vectors (treated as rows)."""
    return rref(vectors, ncols)


def mat_vec(rows: Sequence, x: Sequence) -> list[Fraction]:
    out = []
    for r in rows:
        sr = r if isinstance(r, dict) else dict(enumerate(r))
        out.append(sum((v * x[c] for c, v in sr.items() if v), Fraction(0)))
    return out
