"""Dense exact linear algebra over the rationals."""

from __future__ import annotations

from typing import List, Sequence

from .core import Q, RepresentationError, StructureError


def exact_inverse(rows: Sequence[Sequence], labels: Sequence | None = None) -> List[list]:
    """Gauss-Jordan inverse of a square rational matrix.

    On failure raises RepresentationError whose ``degree`` attribute is the
    label of the first column without a pivot (when labels are given).
    """
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise StructureError("matrix must be square")
    A = [[Q(x) for x in r] + [Q(1) if i == j else Q(0) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            lab = labels[col] if labels is not None else col
            raise RepresentationError(f"truncated matrix is singular (no pivot at {lab})", lab)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        prow = [x * inv for x in A[col]]
        A[col] = prow
        nz = [j for j, x in enumerate(prow) if x]
        for r in range(n):
            if r == col:
                continue
            f = A[r][col]
            if f:
                row = A[r]
                for j in nz:
                    row[j] -= f * prow[j]
    return [r[n:] for r in A]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> List[list]:
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    out = [[Q(0)] * p for _ in range(n)]
    for i in range(n):
        for k in range(m):
            a = A[i][k]
            if a:
                bk = B[k]
                row = out[i]
                for j in range(p):
                    if bk[j]:
                        row[j] += a * bk[j]
    return out
