"""Constructive canonical form for quadratic GF(2) functions.

Every function of degree at most 2 equals, after an invertible affine
change of variables y = Ax + b, either

    y1*y2 + y3*y4 + ... + y_{t-1}*y_t + c        (type I), or
    y1*y2 + y3*y4 + ... + y_{t-1}*y_t + y_{t+1}  (type II),

where t counts the paired variables (t is even; note that some authors
instead use t for the number of pairs). The construction:

1. Collect the degree-2 coefficients into the symmetric zero-diagonal
   matrix B of the associated bilinear form f(x+y)+f(x)+f(y)+f(0).
2. Symplectic elimination: take the first basis vector with a nonzero
   B-row, pair it with the first partner it hits, and project the rest of
   the basis onto the B-orthogonal complement of the pair. Vectors whose
   row dies become the radical basis.
3. In the new coordinates z (columns ordered pair after pair, radical
   last) the function is sum z_{2i-1} z_{2i} plus an affine part. Each
   pair absorbs its linear coefficients via
   z_u z_v + a z_u + b z_v = (z_u + b)(z_v + a) + a*b.
4. The leftover affine part lives on the radical. If it is nonconstant it
   becomes y_{t+1} (type II, constant absorbed by translating y_{t+1});
   otherwise the accumulated constant is c (type I).

Every step is GF(2) elimination, so the whole decomposition is O(n^3).
"""
from __future__ import annotations

from dataclasses import dataclass

from .anf_core import Anf, compose_affine
from .errors import DegreeTooHighError, InconsistentError, VerificationError
from .f2_linalg import (
    AffineMap,
    BitMatrix,
    BitVec,
    Flat,
    bit_indices,
    invert,
    parity,
    solve_affine,
)


@dataclass(frozen=True)
class DicksonForm:
    """Result of the decomposition: t, tail kind, constant, and y = Ax + b."""

    t: int
    form_type: str  # "I" or "II"
    c: int
    map: AffineMap

    def __post_init__(self):
        n = self.map.dimension
        if self.t % 2 or not 0 <= self.t <= n:
            raise InconsistentError(f"t = {self.t} must be even and within [0, {n}]")
        if self.form_type not in ("I", "II"):
            raise InconsistentError(f"unknown form type {self.form_type!r}")
        if self.form_type == "II" and self.t + 1 > n:
            raise InconsistentError("type II needs a free coordinate after the pairs")
        if self.c not in (0, 1):
            raise InconsistentError("constant must be a bit")

    @property
    def num_vars(self) -> int:
        return self.map.dimension

    def to_json_dict(self) -> dict:
        out = {"t": self.t, "type": self.form_type, "c": self.c}
        out.update(self.map.to_json_dict())
        return out


def _bilinear_rows(f: Anf) -> list[int]:
    """Row i holds the quadratic coefficients c_{i,j} (zero diagonal)."""
    n = f.num_vars
    rows = [0] * n
    for m in f.terms:
        if m.bit_count() == 2:
            i, j = bit_indices(m)
            rows[i] |= 1 << j
            rows[j] |= 1 << i
    return rows


def _bform(rows: list[int], u: int, v: int) -> int:
    """u^T B v over GF(2) for vectors packed as ints."""
    acc = 0
    for j in bit_indices(u):
        acc ^= parity(rows[j] & v)
    return acc


def dickson_decompose(f: Anf) -> DicksonForm:
    """Canonical form of a degree <= 2 function; raises DegreeTooHighError.

    The result is checked symbolically before returning: recomposing the
    canonical shape through the change of variables must reproduce f.
    """
    if f.degree() > 2:
        raise DegreeTooHighError(f"degree {f.degree()} > 2")
    n = f.num_vars
    rows = _bilinear_rows(f)
    c0 = 1 if 0 in f.terms else 0

    basis = [1 << i for i in range(n)]
    pairs: list[tuple[int, int]] = []
    radical: list[int] = []
    while basis:
        u = basis[0]
        partner = None
        for j in range(1, len(basis)):
            if _bform(rows, u, basis[j]):
                partner = j
                break
        if partner is None:
            radical.append(basis.pop(0))
            continue
        v = basis.pop(partner)
        basis.pop(0)
        for idx, w in enumerate(basis):
            coeff_u = _bform(rows, w, v)
            coeff_v = _bform(rows, w, u)
            if coeff_u:
                w ^= u
            if coeff_v:
                w ^= v
            basis[idx] = w
        pairs.append((u, v))

    t = 2 * len(pairs)
    columns = [vec for pair in pairs for vec in pair] + radical
    p_rows = [0] * n
    for m, col in enumerate(columns):
        for i in bit_indices(col):
            p_rows[i] |= 1 << m
    p_matrix = BitMatrix(n, n, tuple(p_rows))

    # linear coefficient of z_m in f(P z): value of f minus its constant at column m
    lam = [f.evaluate(BitVec(n, col)) ^ c0 for col in columns]

    offset_bits = 0
    const = c0
    for k in range(len(pairs)):
        a = lam[2 * k]      # coefficient of z_{2k+1}
        b = lam[2 * k + 1]  # coefficient of z_{2k+2}
        offset_bits |= b << (2 * k)
        offset_bits |= a << (2 * k + 1)
        const ^= a & b

    radical_lams = lam[t:]
    r_rows = [1 << i for i in range(n)]
    if any(radical_lams):
        form_type = "II"
        tail_row = 0
        for m, bit in enumerate(radical_lams):
            if bit:
                tail_row |= 1 << (t + m)
        star = t + radical_lams.index(1)
        r_rows[t] = tail_row
        # the residual constant is absorbed by translating y_{t+1}
        offset_bits |= const << t
        fill = [t + m for m, _ in enumerate(radical_lams) if t + m != star]
        for slot, src in zip(range(t + 1, n), fill):
            r_rows[slot] = 1 << src
    else:
        form_type = "I"

    r_matrix = BitMatrix(n, n, tuple(r_rows))
    a_matrix = r_matrix.matmul(invert(p_matrix))
    form = DicksonForm(
        t=t,
        form_type=form_type,
        c=const if form_type == "I" else 0,
        map=AffineMap(a_matrix, BitVec(n, offset_bits)),
    )

    recomposed = compose_affine(canonical_anf(form, n), form.map)
    if recomposed.terms != f.terms:
        raise VerificationError("recomposition failed; decomposition bug")
    return form


def canonical_anf(d: DicksonForm, n: int) -> Anf:
    """The ANF sum of y_{2i-1} y_{2i} plus the tail, on variables y_1..y_n."""
    if n != d.map.dimension:
        raise InconsistentError(f"form lives on {d.map.dimension} variables, not {n}")
    masks = []
    for k in range(d.t // 2):
        masks.append((1 << (2 * k)) | (1 << (2 * k + 1)))
    if d.form_type == "II":
        masks.append(1 << d.t)
    elif d.c:
        masks.append(0)
    return Anf(n, frozenset(masks))


def flat_from_dickson(d: DicksonForm) -> tuple[Flat, int]:
    """A flat of dimension >= floor(n/2) on which the decomposed f is constant.

    In y-coordinates fix y1 = y3 = ... = y_{t-1} = 0, plus y_{t+1} = 0 for
    type II; pulled back through the change of variables this is the
    solution set of a small linear system.
    """
    n = d.num_vars
    fixed = list(range(0, d.t, 2))
    if d.form_type == "II":
        fixed.append(d.t)
    constant = d.c if d.form_type == "I" else 0
    if not fixed:
        basis = tuple(BitVec(n, 1 << i) for i in range(n))
        return Flat(n, BitVec(n), basis), constant
    rows = [d.map.matrix.row_bits[i] for i in fixed]
    rhs_bits = 0
    for pos, i in enumerate(fixed):
        rhs_bits |= d.map.offset.bit(i) << pos
    system = BitMatrix(len(fixed), n, tuple(rows))
    x0, kern = solve_affine(system, BitVec(len(fixed), rhs_bits))
    return Flat(n, x0, tuple(kern)), constant


def quadratic_flat(f: Anf) -> tuple[Flat, int]:
    """Flat plus constant witnessing that a degree <= 2 function is normal."""
    return flat_from_dickson(dickson_decompose(f))
