"""Bit-packed GF(2) vectors, matrices, affine maps, and flats.

Coordinates live in Python ints: bit j holds coordinate j (0-based
internally, 1-based in all user-facing text, so bit 0 is "x1" and is the
first character of the string form). Matrices are row-major tuples of such
ints, which makes row elimination a single XOR.

All values are immutable after construction; mutation never escapes a
function, so everything here is safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InconsistentError, SingularMatrixError


def parity(x: int) -> int:
    return x.bit_count() & 1


def bit_indices(mask: int) -> list[int]:
    """0-based indices of the set bits of mask, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class BitVec:
    """A vector in F2^length packed into one int."""

    length: int
    bits: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise DimensionMismatchError("negative vector length")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionMismatchError(
                f"bits 0x{self.bits:x} do not fit in {self.length} coordinates"
            )

    @classmethod
    def from_string(cls, text: str) -> "BitVec":
        text = text.strip()
        if any(c not in "01" for c in text):
            raise InconsistentError(f"vector text must be '0'/'1' characters: {text!r}")
        bits = 0
        for j, c in enumerate(text):
            if c == "1":
                bits |= 1 << j
        return cls(len(text), bits)

    def to_string(self) -> str:
        return "".join("1" if (self.bits >> j) & 1 else "0" for j in range(self.length))

    def bit(self, j: int) -> int:
        return (self.bits >> j) & 1

    def weight(self) -> int:
        return self.bits.bit_count()

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise DimensionMismatchError("XOR of vectors of different lengths")
        return BitVec(self.length, self.bits ^ other.bits)

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class BitMatrix:
    """A rows x cols matrix over GF(2); each row is one packed int."""

    rows: int
    cols: int
    row_bits: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or len(self.row_bits) != self.rows:
            raise DimensionMismatchError("matrix shape does not match row data")
        for r in self.row_bits:
            if r < 0 or r >> self.cols:
                raise DimensionMismatchError("row does not fit in column count")

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def from_rows(cls, rows: Sequence[int], cols: int) -> "BitMatrix":
        return cls(len(rows), cols, tuple(rows))

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> "BitMatrix":
        vecs = [BitVec.from_string(line) for line in lines]
        if not vecs:
            return cls(0, 0, ())
        cols = vecs[0].length
        if any(v.length != cols for v in vecs):
            raise InconsistentError("matrix rows have different lengths")
        return cls(len(vecs), cols, tuple(v.bits for v in vecs))

    def to_strings(self) -> list[str]:
        return [BitVec(self.cols, r).to_string() for r in self.row_bits]

    def entry(self, i: int, j: int) -> int:
        return (self.row_bits[i] >> j) & 1

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.row_bits[i])

    def column_bits(self, j: int) -> int:
        acc = 0
        for i, r in enumerate(self.row_bits):
            acc |= ((r >> j) & 1) << i
        return acc

    def mul_vec(self, v: BitVec) -> BitVec:
        if v.length != self.cols:
            raise DimensionMismatchError("matrix/vector dimension mismatch")
        bits = 0
        for i, r in enumerate(self.row_bits):
            bits |= parity(r & v.bits) << i
        return BitVec(self.rows, bits)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError("matrix/matrix dimension mismatch")
        out = []
        for r in self.row_bits:
            acc = 0
            for j in bit_indices(r):
                acc ^= other.row_bits[j]
            out.append(acc)
        return BitMatrix(self.rows, other.cols, tuple(out))

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows, tuple(self.column_bits(j) for j in range(self.cols)))

    def drop_column(self, j: int) -> "BitMatrix":
        low = (1 << j) - 1
        new_rows = tuple((r & low) | ((r >> (j + 1)) << j) for r in self.row_bits)
        return BitMatrix(self.rows, self.cols - 1, new_rows)


def _rref(rows: list[int], cols: int) -> tuple[list[int], list[int]]:
    """In-place reduced row echelon form; returns (rows, pivot column list)."""
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(rows)):
            if (rows[i] >> c) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> c) & 1:
                rows[i] ^= rows[r]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(m: BitMatrix) -> int:
    _, pivots = _rref(list(m.row_bits), m.cols)
    return len(pivots)


def invert(m: BitMatrix) -> BitMatrix:
    """Inverse of a square matrix; raises SingularMatrixError otherwise."""
    if m.rows != m.cols:
        raise DimensionMismatchError("only square matrices can be inverted")
    n = m.rows
    work = [m.row_bits[i] | (1 << (n + i)) for i in range(n)]
    reduced, pivots = _rref(work, n)
    if len(pivots) != n:
        raise SingularMatrixError(f"matrix has rank {len(pivots)} < {n}")
    return BitMatrix(n, n, tuple(r >> n for r in reduced))


def kernel_basis(m: BitMatrix) -> list[BitVec]:
    """Independent vectors spanning the nullspace; count = cols - rank."""
    reduced, pivots = _rref(list(m.row_bits), m.cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        bits = 1 << free
        for r, pc in enumerate(pivots):
            if (reduced[r] >> free) & 1:
                bits |= 1 << pc
        basis.append(BitVec(m.cols, bits))
    return basis


def solve_affine(m: BitMatrix, rhs: BitVec) -> tuple[BitVec, list[BitVec]]:
    """Solution set of m x = rhs as (particular solution, kernel basis).

    Raises InconsistentError when no solution exists.
    """
    if rhs.length != m.rows:
        raise DimensionMismatchError("right-hand side has wrong length")
    n = m.cols
    work = [m.row_bits[i] | (((rhs.bits >> i) & 1) << n) for i in range(m.rows)]
    reduced, pivots = _rref(work, n)
    for r in range(len(pivots), m.rows):
        if reduced[r] >> n:
            raise InconsistentError("system has no solution")
    bits = 0
    for r, pc in enumerate(pivots):
        if reduced[r] >> n:
            bits |= 1 << pc
    x0 = BitVec(n, bits)
    kern = kernel_basis(m)
    return x0, kern


@dataclass(frozen=True)
class AffineMap:
    """An invertible affine bijection x -> matrix*x + offset on F2^n.

    Invertibility is checked eagerly at construction; the inverse matrix is
    cached so applying the inverse map costs one multiply.
    """

    matrix: BitMatrix
    offset: BitVec
    _inv_matrix: BitMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.matrix.rows != self.matrix.cols:
            raise DimensionMismatchError("affine map matrix must be square")
        if self.offset.length != self.matrix.rows:
            raise DimensionMismatchError("offset length must equal matrix dimension")
        object.__setattr__(self, "_inv_matrix", invert(self.matrix))

    @property
    def dimension(self) -> int:
        return self.matrix.rows

    def apply(self, x: BitVec) -> BitVec:
        return self.matrix.mul_vec(x) ^ self.offset

    def inverse(self) -> "AffineMap":
        # y = Mx + b  <=>  x = M^-1 y + M^-1 b
        return AffineMap(self._inv_matrix, self._inv_matrix.mul_vec(self.offset))

    def to_json_dict(self) -> dict:
        return {"matrix": self.matrix.to_strings(), "offset": self.offset.to_string()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AffineMap":
        return cls(BitMatrix.from_strings(obj["matrix"]), BitVec.from_string(obj["offset"]))


def identity_map(n: int) -> AffineMap:
    return AffineMap(BitMatrix.identity(n), BitVec(n))


def apply_affine(a: AffineMap, x: BitVec) -> BitVec:
    if x.length != a.dimension:
        raise DimensionMismatchError("point length does not match map dimension")
    return a.apply(x)


def compose(outer: AffineMap, inner: AffineMap) -> AffineMap:
    """The map x -> outer(inner(x))."""
    if outer.dimension != inner.dimension:
        raise DimensionMismatchError("composed maps must share a dimension")
    return AffineMap(
        outer.matrix.matmul(inner.matrix),
        outer.matrix.mul_vec(inner.offset) ^ outer.offset,
    )


@dataclass(frozen=True)
class Flat:
    """An affine subspace of F2^ambient: offset plus an independent basis."""

    ambient: int
    offset: BitVec
    basis: tuple[BitVec, ...]

    def __post_init__(self):
        if self.offset.length != self.ambient:
            raise DimensionMismatchError("flat offset has wrong length")
        for b in self.basis:
            if b.length != self.ambient:
                raise DimensionMismatchError("flat basis vector has wrong length")
        mat = BitMatrix.from_rows([b.bits for b in self.basis], self.ambient)
        if rank(mat) != len(self.basis):
            raise InconsistentError("flat basis vectors are not independent")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def points(self) -> list[BitVec]:
        """All 2^dimension points; intended for small flats only."""
        pts = [self.offset.bits]
        for b in self.basis:
            pts += [p ^ b.bits for p in pts]
        return [BitVec(self.ambient, p) for p in pts]

    def point_at(self, index: int) -> BitVec:
        """Point for a basis-combination index (bit j selects basis[j])."""
        bits = self.offset.bits
        for j in bit_indices(index):
            bits ^= self.basis[j].bits
        return BitVec(self.ambient, bits)

    def map_through(self, a: AffineMap) -> "Flat":
        """Image of the flat under an affine bijection."""
        if a.dimension != self.ambient:
            raise DimensionMismatchError("map dimension does not match flat ambient")
        return Flat(
            self.ambient,
            a.apply(self.offset),
            tuple(a.matrix.mul_vec(b) for b in self.basis),
        )

    def to_text(self) -> str:
        lines = [self.offset.to_string()] + [b.to_string() for b in self.basis]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Flat":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InconsistentError("empty flat text")
        offset = BitVec.from_string(lines[0])
        basis = tuple(BitVec.from_string(ln) for ln in lines[1:])
        return cls(offset.length, offset, basis)

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "offset": self.offset.to_string(),
            "basis": [b.to_string() for b in self.basis],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Flat":
        offset = BitVec.from_string(obj["offset"])
        basis = tuple(BitVec.from_string(s) for s in obj["basis"])
        return cls(offset.length, offset, basis)


def random_bits(n: int, rng: np.random.Generator) -> int:
    """n uniform bits as an int, drawn from rng's byte stream."""
    if n == 0:
        return 0
    raw = int.from_bytes(rng.bytes((n + 7) // 8), "little")
    return raw & ((1 << n) - 1)


def random_bitvec(n: int, rng: np.random.Generator) -> BitVec:
    return BitVec(n, random_bits(n, rng))


def random_invertible_matrix(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniform invertible matrix by rejection over uniform matrices.

    The acceptance probability prod_{i>=1}(1 - 2^-i) exceeds 0.288 for
    every n, so the expected number of draws is below 3.5.
    """
    while True:
        m = BitMatrix(n, n, tuple(random_bits(n, rng) for _ in range(n)))
        if rank(m) == n:
            return m


def random_affine_map(n: int, rng: np.random.Generator) -> AffineMap:
    return AffineMap(random_invertible_matrix(n, rng), random_bitvec(n, rng))
