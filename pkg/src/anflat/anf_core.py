"""Multilinear GF(2) polynomials: parsing, evaluation, transforms, composition.

An Anf stores its monomials as bitmasks (bit j corresponds to x_{j+1}), so
a term set is a frozenset of ints and substitution is mask arithmetic. The
empty mask is the constant term 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import (
    AnfSyntaxError,
    BlowupExceededError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    InconsistentError,
    TooLargeError,
)
from .f2_linalg import AffineMap, BitVec, Flat, bit_indices

DEFAULT_TABLE_CAP = 24
DEFAULT_TERM_CEILING = 1 << 22


@dataclass(frozen=True)
class Anf:
    """A multilinear polynomial over GF(2) on num_vars variables."""

    num_vars: int
    terms: frozenset[int]

    def __post_init__(self):
        if self.num_vars < 0:
            raise DimensionMismatchError("negative variable count")
        for m in self.terms:
            if m < 0 or m >> self.num_vars:
                raise IndexOutOfRangeError(
                    f"monomial 0x{m:x} uses variables beyond x{self.num_vars}"
                )

    @classmethod
    def zero(cls, num_vars: int) -> "Anf":
        return cls(num_vars, frozenset())

    @classmethod
    def from_masks(cls, num_vars: int, masks: Iterable[int]) -> "Anf":
        return cls(num_vars, frozenset(masks))

    @classmethod
    def from_index_terms(cls, num_vars: int, index_terms: Iterable[Iterable[int]]) -> "Anf":
        """Build from terms given as iterables of 1-based variable indices."""
        masks: set[int] = set()
        for t in index_terms:
            mask = 0
            for i in t:
                if not 1 <= i <= num_vars:
                    raise IndexOutOfRangeError(f"x{i} outside [1, {num_vars}]")
                mask |= 1 << (i - 1)
            masks.symmetric_difference_update({mask})
        return cls(num_vars, frozenset(masks))

    def sparsity(self) -> int:
        """Number of monomials."""
        return len(self.terms)

    def degree(self) -> int:
        """Largest monomial size; 0 for the zero polynomial."""
        return max((m.bit_count() for m in self.terms), default=0)

    def crucial_count(self) -> int:
        """Number of monomials of degree >= 3."""
        return sum(1 for m in self.terms if m.bit_count() >= 3)

    def evaluate(self, x: BitVec) -> int:
        if x.length != self.num_vars:
            raise DimensionMismatchError(
                f"point has {x.length} coordinates, function has {self.num_vars}"
            )
        acc = 0
        xb = x.bits
        for m in self.terms:
            if xb & m == m:
                acc ^= 1
        return acc

    def substitute_zero(self, i: int) -> "Anf":
        """Set x_i to 0: every monomial containing x_i is deleted.

        Variable i stays in the index space; callers record it as dead.
        """
        if not 1 <= i <= self.num_vars:
            raise IndexOutOfRangeError(f"x{i} outside [1, {self.num_vars}]")
        bit = 1 << (i - 1)
        return Anf(self.num_vars, frozenset(m for m in self.terms if not m & bit))

    def variables(self) -> set[int]:
        """1-based indices of variables that occur in some monomial."""
        used = 0
        for m in self.terms:
            used |= m
        return {j + 1 for j in bit_indices(used)}

    def __str__(self) -> str:
        return format_anf(self)


def _term_sort_key(mask: int) -> tuple:
    return (mask.bit_count(), tuple(bit_indices(mask)))


def format_anf(f: Anf) -> str:
    """Canonical text: terms sorted by (degree, index sequence)."""
    if not f.terms:
        return "0"
    parts = []
    for m in sorted(f.terms, key=_term_sort_key):
        if m == 0:
            parts.append("1")
        else:
            parts.append("*".join(f"x{j + 1}" for j in bit_indices(m)))
    return " + ".join(parts)


def parse_anf(text: str, num_vars: int) -> Anf:
    """Parse `term (+ term)* | 0` with term `1 | x<i>(*x<j>)*`.

    Whitespace is ignored anywhere. Repeated identical terms cancel in
    pairs and repeated variables inside a term collapse (x*x = x).
    """
    if num_vars < 0:
        raise DimensionMismatchError("negative variable count")
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_factor() -> Optional[int]:
        """Returns a mask for x<i>, or None for the literal 1."""
        nonlocal pos
        if pos < n and text[pos] == "1":
            pos += 1
            return None
        if pos >= n or text[pos] != "x":
            raise AnfSyntaxError("expected 'x<index>' or '1'", pos)
        start = pos
        pos += 1
        digits = ""
        while pos < n and text[pos].isdigit():
            digits += text[pos]
            pos += 1
        if not digits:
            raise AnfSyntaxError("expected digits after 'x'", pos)
        idx = int(digits)
        if not 1 <= idx <= num_vars:
            raise IndexOutOfRangeError(
                f"x{idx} outside [1, {num_vars}] (at position {start})"
            )
        return 1 << (idx - 1)

    def parse_term() -> int:
        nonlocal pos
        first = parse_factor()
        if first is None:
            return 0  # constant term; grammar forbids 1*x
        mask = first
        while True:
            skip_ws()
            if pos < n and text[pos] == "*":
                pos += 1
                skip_ws()
                nxt = parse_factor()
                if nxt is None:
                    raise AnfSyntaxError("'1' cannot appear as a product factor", pos - 1)
                mask |= nxt
            else:
                return mask

    skip_ws()
    if pos >= n:
        raise AnfSyntaxError("empty input", pos)
    if text[pos] == "0":
        pos += 1
        skip_ws()
        if pos < n:
            raise AnfSyntaxError("'0' must stand alone", pos)
        return Anf.zero(num_vars)

    masks: set[int] = set()
    while True:
        skip_ws()
        term = parse_term()
        masks.symmetric_difference_update({term})
        skip_ws()
        if pos >= n:
            break
        if text[pos] != "+":
            raise AnfSyntaxError("expected '+' between terms", pos)
        pos += 1
    return Anf(num_vars, frozenset(masks))


@dataclass(frozen=True)
class TruthTable:
    """All 2^num_vars values; entry i is f(x) with bit j of i = x_{j+1}."""

    num_vars: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.uint8)
        if v.shape != (1 << self.num_vars,):
            raise DimensionMismatchError(
                f"table needs {1 << self.num_vars} entries, got {v.shape}"
            )
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruthTable)
            and self.num_vars == other.num_vars
            and bool(np.array_equal(self.values, other.values))
        )

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.values)

    @classmethod
    def from_string(cls, text: str) -> "TruthTable":
        text = text.strip()
        size = len(text)
        if size == 0 or size & (size - 1):
            raise DimensionMismatchError("truth table length must be a power of two")
        if any(c not in "01" for c in text):
            raise AnfSyntaxError("truth table must be '0'/'1' characters", 0)
        n = size.bit_length() - 1
        return cls(n, np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))


def _xor_butterfly(values: np.ndarray, n: int) -> np.ndarray:
    """The subset-sum XOR transform; self-inverse over GF(2)."""
    out = values.copy()
    for i in range(n):
        step = 1 << i
        view = out.reshape(-1, 2 * step)
        view[:, step:] ^= view[:, :step]
    return out


def truth_table_to_anf(tt: TruthTable, max_vars: int = DEFAULT_TABLE_CAP) -> Anf:
    """Unique ANF agreeing with the table everywhere; O(n 2^n)."""
    if tt.num_vars > max_vars:
        raise TooLargeError(f"n = {tt.num_vars} exceeds table cap {max_vars}")
    coeffs = _xor_butterfly(tt.values, tt.num_vars)
    return Anf(tt.num_vars, frozenset(int(i) for i in np.nonzero(coeffs)[0]))


def anf_to_truth_table(f: Anf, max_vars: int = DEFAULT_TABLE_CAP) -> TruthTable:
    if f.num_vars > max_vars:
        raise TooLargeError(f"n = {f.num_vars} exceeds table cap {max_vars}")
    coeffs = np.zeros(1 << f.num_vars, dtype=np.uint8)
    for m in f.terms:
        coeffs[m] = 1
    return TruthTable(f.num_vars, _xor_butterfly(coeffs, f.num_vars))


def evaluate_packed_columns(f: Anf, packed: np.ndarray) -> np.ndarray:
    """Evaluate f on points bit-packed along the point axis.

    packed has shape (nbytes, num_vars); bit b of packed[r, j] (most
    significant first, as np.packbits produces) holds coordinate j of
    point 8r + 7 - ... in the usual big bit order. Returns the packed
    values, one bit per point, same layout.
    """
    if packed.ndim != 2 or packed.shape[1] != f.num_vars:
        raise DimensionMismatchError("packed points matrix has wrong shape")
    acc = np.zeros(packed.shape[0], dtype=np.uint8)
    for m in f.terms:
        if m == 0:
            acc ^= np.uint8(0xFF)
            continue
        idx = bit_indices(m)
        v = packed[:, idx[0]]
        for j in idx[1:]:
            v = v & packed[:, j]
        acc = acc ^ v
    return acc


def evaluate_on_points(f: Anf, points: np.ndarray) -> np.ndarray:
    """Evaluate f at every row of an (N, num_vars) 0/1 uint8 matrix.

    When N is a positive multiple of 8 the points are bit-packed along the
    point axis, so each monomial costs a few vector ops on N/8 bytes.
    """
    points = np.asarray(points, dtype=np.uint8)
    if points.ndim != 2 or points.shape[1] != f.num_vars:
        raise DimensionMismatchError("points matrix has wrong shape")
    count = points.shape[0]
    if count >= 8 and count % 8 == 0:
        packed = np.packbits(points, axis=0)
        return np.unpackbits(evaluate_packed_columns(f, packed))
    acc = np.zeros(count, dtype=np.uint8)
    for m in f.terms:
        if m == 0:
            acc ^= np.uint8(1)
            continue
        idx = bit_indices(m)
        v = points[:, idx[0]]
        for j in idx[1:]:
            v = v & points[:, j]
        acc = acc ^ v
    return acc


def bitvec_row(v: BitVec) -> np.ndarray:
    """BitVec as a (length,) uint8 coordinate row."""
    return np.array([(v.bits >> j) & 1 for j in range(v.length)], dtype=np.uint8)


def flat_points_matrix(flat: Flat) -> np.ndarray:
    """All 2^k flat points as a (2^k, n) matrix; row i is flat.point_at(i)."""
    k = flat.dimension
    out = np.empty((1 << k, flat.ambient), dtype=np.uint8)
    out[0] = bitvec_row(flat.offset)
    size = 1
    for b in flat.basis:
        out[size : 2 * size] = out[:size] ^ bitvec_row(b)
        size *= 2
    return out


def compose_affine(f: Anf, a: AffineMap, term_ceiling: int = DEFAULT_TERM_CEILING) -> Anf:
    """ANF of x -> f(a(x)), by expanding each monomial's product of forms.

    Every x_i inside a monomial becomes the affine form given by row i of
    the matrix plus the offset bit; products are expanded term by term with
    eager GF(2) cancellation. Worst-case growth is exponential and guarded
    by term_ceiling.
    """
    if a.dimension != f.num_vars:
        raise DimensionMismatchError("map dimension does not match variable count")
    n = f.num_vars
    forms = [(a.matrix.row_bits[i], a.offset.bit(i)) for i in range(n)]
    result: set[int] = set()
    for term in f.terms:
        partial: set[int] = {0}
        for i in bit_indices(term):
            row, const = forms[i]
            nxt: set[int] = set()
            for p in partial:
                if const:
                    _toggle(nxt, p)
                for j in bit_indices(row):
                    _toggle(nxt, p | (1 << j))
            if len(nxt) > term_ceiling:
                raise BlowupExceededError(
                    f"expansion exceeded {term_ceiling} terms"
                )
            partial = nxt
        for p in partial:
            _toggle(result, p)
        if len(result) > term_ceiling:
            raise BlowupExceededError(f"expansion exceeded {term_ceiling} terms")
    return Anf(n, frozenset(result))


def _toggle(s: set[int], m: int) -> None:
    if m in s:
        s.remove(m)
    else:
        s.add(m)


def reindex(f: Anf, alive: list[int]) -> Anf:
    """Rewrite f on the alive variables only; alive[j] becomes x_{j+1}.

    Every monomial of f must be supported on alive variables.
    """
    position = {var: j for j, var in enumerate(alive)}
    masks = []
    for m in f.terms:
        new = 0
        for j in bit_indices(m):
            var = j + 1
            if var not in position:
                raise IndexOutOfRangeError(f"monomial uses dead variable x{var}")
            new |= 1 << position[var]
        masks.append(new)
    return Anf(len(alive), frozenset(masks))


@dataclass(frozen=True)
class FunctionInput:
    """A function f given as g plus an optional affine bijection with g = f o A.

    All reports concern f. With the bijection present, f(x) = g(A^-1(x))
    and a flat on which g is constant maps to the flat A(E) for f.
    """

    g: Anf
    bijection: Optional[AffineMap] = None

    def __post_init__(self):
        if self.bijection is not None and self.bijection.dimension != self.g.num_vars:
            raise DimensionMismatchError("bijection dimension does not match g")

    @property
    def num_vars(self) -> int:
        return self.g.num_vars

    def evaluate(self, x: BitVec) -> int:
        """Value of the represented function f at x."""
        if self.bijection is None:
            return self.g.evaluate(x)
        return self.g.evaluate(self.bijection.inverse().apply(x))

    def to_json_dict(self, comment: str | None = None) -> dict:
        obj = {
            "n": self.g.num_vars,
            "anf": format_anf(self.g),
            "bijection": None if self.bijection is None else self.bijection.to_json_dict(),
        }
        if comment is not None:
            obj["comment"] = comment
        return obj

    @classmethod
    def from_json_dict(cls, obj: dict) -> "FunctionInput":
        n = obj["n"]
        if not isinstance(n, int) or n < 0:
            raise InconsistentError("container field 'n' must be a nonnegative integer")
        g = parse_anf(obj["anf"], n)
        bij = obj.get("bijection")
        bijection = None if bij is None else AffineMap.from_json_dict(bij)
        return cls(g, bijection)

    @classmethod
    def from_json_text(cls, text: str) -> "FunctionInput":
        return cls.from_json_dict(json.loads(text))
