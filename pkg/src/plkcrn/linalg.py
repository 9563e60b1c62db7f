"""Exact rational linear algebra.

Everything here works on :class:`fractions.Fraction` so that ranks, kernels and
orthogonal complements are decided without rounding. Vectors are plain tuples
of Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[Fraction, ...]


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings or floats to an exact Fraction.

    Floats are converted by their exact binary value; pass strings such as
    ``"0.1"`` to get the decimal meaning.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"cannot convert {value!r} to a rational")
        return Fraction(value)
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, np.floating):
        return Fraction(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def vec(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


class RationalMatrix:
    """Dense matrix of exact rationals."""

    __slots__ = ("_rows", "rows", "cols")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        data = tuple(vec(row) for row in entries)
        if data:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise ValueError("ragged matrix rows")
        else:
            width = cols or 0
        if cols is not None and data and cols != width:
            raise ValueError("column count does not match entries")
        self._rows = data
        self.rows = len(data)
        self.cols = width

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "RationalMatrix":
        columns = [vec(c) for c in columns]
        if not columns:
            return cls([[] for _ in range(rows or 0)], cols=0)
        height = len(columns[0])
        return cls([[c[i] for c in columns] for i in range(height)], cols=len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self._rows[i][j]

    def row(self, i: int) -> Vector:
        return self._rows[i]

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self._rows)

    def row_list(self) -> list[Vector]:
        return list(self._rows)

    def columns(self) -> list[Vector]:
        return [self.col(j) for j in range(self.cols)]

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix([self.col(j) for j in range(self.cols)], cols=self.rows)

    def select_columns(self, idx: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([[r[j] for j in idx] for r in self._rows], cols=len(idx))

    def select_rows(self, idx: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([self._rows[i] for i in idx], cols=self.cols)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            other_cols = other.columns()
            return RationalMatrix(
                [[dot(r, c) for c in other_cols] for r in self._rows], cols=other.cols
            )
        v = vec(other)
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(dot(r, v) for r in self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._rows)
        return f"RationalMatrix({self.rows}x{self.cols}: [{body}])"

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self._rows], dtype=float).reshape(
            self.rows, self.cols
        )

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    def rref(self) -> tuple["RationalMatrix", list[int]]:
        """Reduced row echelon form and pivot columns."""
        m = [list(r) for r in self._rows]
        pivots: list[int] = []
        lead = 0
        for j in range(self.cols):
            if lead >= self.rows:
                break
            piv = next((i for i in range(lead, self.rows) if m[i][j] != 0), None)
            if piv is None:
                continue
            m[lead], m[piv] = m[piv], m[lead]
            p = m[lead][j]
            if p != 1:
                m[lead] = [x / p for x in m[lead]]
            for i in range(self.rows):
                if i != lead and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[lead])]
            pivots.append(j)
            lead += 1
        return RationalMatrix(m, cols=self.cols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[Vector]:
        """Basis of {x : Ax = 0}, reduced to row echelon form."""
        r, pivots = self.rref()
        free = [j for j in range(self.cols) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * self.cols
            v[f] = Fraction(1)
            for i, p in enumerate(pivots):
                v[p] = -r[i, f]
            basis.append(tuple(v))
        return reduced_basis(basis, self.cols)

    def left_nullspace(self) -> list[Vector]:
        """Basis of {w : w^T A = 0} in reduced row echelon form."""
        return self.T.nullspace()

    def column_space(self) -> list[Vector]:
        return reduced_basis(self.columns(), self.rows)

    def det(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        m = [list(r) for r in self._rows]
        n = self.rows
        sign = 1
        out = Fraction(1)
        for j in range(n):
            piv = next((i for i in range(j, n) if m[i][j] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != j:
                m[j], m[piv] = m[piv], m[j]
                sign = -sign
            out *= m[j][j]
            for i in range(j + 1, n):
                if m[i][j] != 0:
                    f = m[i][j] / m[j][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[j])]
        return sign * out


def reduced_basis(vectors: Sequence[Sequence], dim: int) -> list[Vector]:
    """Canonical basis of span(vectors): nonzero rows of the RREF, pivot order."""
    vectors = [vec(v) for v in vectors]
    if not vectors:
        return []
    r, pivots = RationalMatrix(vectors, cols=dim).rref()
    return [r.row(i) for i in range(len(pivots))]


def orthogonal_complement(vectors: Sequence[Sequence], dim: int) -> list[Vector]:
    """Reduced basis of the orthogonal complement of span(vectors) in Q^dim."""
    vectors = [vec(v) for v in vectors]
    if not vectors:
        return [tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)]
    return RationalMatrix(vectors, cols=dim).nullspace()


def in_span(v: Sequence, basis: Sequence[Sequence], dim: int) -> bool:
    base = [vec(b) for b in basis]
    r0 = RationalMatrix(base, cols=dim).rank() if base else 0
    return RationalMatrix(base + [vec(v)], cols=dim).rank() == r0


def same_span(a: Sequence[Sequence], b: Sequence[Sequence], dim: int) -> bool:
    return reduced_basis(a, dim) == reduced_basis(b, dim)


def coordinates(v: Sequence, basis: Sequence[Vector]) -> Vector:
    """Coordinates of v in a linearly independent basis (raises if v is outside the span)."""
    v = vec(v)
    k = len(basis)
    if k == 0:
        if any(v):
            raise ValueError("vector not in span of the empty basis")
        return ()
    dim = len(v)
    aug = RationalMatrix([[basis[j][i] for j in range(k)] + [v[i]] for i in range(dim)], cols=k + 1)
    r, pivots = aug.rref()
    if k in pivots:
        raise ValueError("vector not in span of basis")
    out = [Fraction(0)] * k
    for i, p in enumerate(pivots):
        out[p] = r[i, k]
    return tuple(out)
