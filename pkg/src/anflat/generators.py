"""Concrete function families used by tests, oracles, and experiments.

The randomized families draw from numpy's PCG64 so that a given seed
produces the same ANF on every platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .anf_core import Anf, TruthTable, truth_table_to_anf, DEFAULT_TABLE_CAP
from .errors import InconsistentError, TooLargeError


def majority(n: int, max_vars: int = DEFAULT_TABLE_CAP) -> Anf:
    """ANF of the threshold function: 1 iff at least half the inputs are 1.

    "At least half" is read as popcount >= n/2, so for even n the
    threshold is n/2 (some texts use the strict majority n/2 + 1 instead).
    """
    if n < 1:
        raise InconsistentError("majority needs at least one variable")
    if n > max_vars:
        raise TooLargeError(f"n = {n} exceeds table cap {max_vars}")
    threshold = (n + 1) // 2
    xs = np.arange(1 << n, dtype=np.uint64)
    values = (np.bitwise_count(xs) >= threshold).astype(np.uint8)
    return truth_table_to_anf(TruthTable(n, values), max_vars=max_vars)


def all_ones_indicator(n: int) -> Anf:
    """Expansion of the product of (1 + x_i): 1 iff every input is 0.

    The ANF contains every one of the 2^n monomials with coefficient 1.
    """
    if not 1 <= n <= 20:
        raise TooLargeError(f"n = {n} outside [1, 20]")
    return Anf(n, frozenset(range(1 << n)))


def prop6_base() -> Anf:
    """The 4-term cubic on 6 variables whose greedy restriction is optimal.

    Every variable occurs in exactly two terms, so two well-chosen zeroes
    kill the whole function and no single zero can do better.
    """
    return Anf.from_index_terms(6, [(1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 5, 6)])


def prop6_family(m: int) -> Anf:
    """Block sum of 5m disjoint copies of the base cubic: n = 30m, 20m terms.

    Block i occupies variables 6(i-1)+1 .. 6i.
    """
    if m < 1:
        raise InconsistentError("m must be at least 1")
    base = prop6_base()
    masks = []
    for block in range(5 * m):
        shift = 6 * block
        masks.extend(mask << shift for mask in base.terms)
    return Anf(30 * m, frozenset(masks))


def complete_degree3(n: int) -> Anf:
    """All C(n, 3) monomials of degree exactly 3."""
    if n < 3:
        raise InconsistentError("need at least 3 variables")
    masks = [
        (1 << i) | (1 << j) | (1 << k) for i, j, k in combinations(range(n), 3)
    ]
    return Anf(n, frozenset(masks))


def _sample_degree3(n: int, p: float, rng: np.random.Generator) -> Anf:
    """Each degree-3 monomial included independently with probability p."""
    combos = list(combinations(range(n), 3))
    draws = rng.random(len(combos))
    masks = [
        (1 << i) | (1 << j) | (1 << k)
        for (i, j, k), u in zip(combos, draws)
        if u < p
    ]
    return Anf(n, frozenset(masks))


def random_degree3_half(n: int, seed: int) -> Anf:
    """Each degree-3 monomial included with probability 1/2 (seeded PCG64)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return _sample_degree3(n, 0.5, rng)


@dataclass(frozen=True)
class Degree3SamplerConfig:
    """Sparse degree-3 sampler: inclusion probability scale / n^(3-s).

    The default scale 1/2 matches the flat-disperser construction; scale 1
    matches the 0-restriction variant. Reports must state which scale was
    in force. The boundary s = 2 (inclusion probability 1/(2n)) is allowed
    for thickness-n^2 inputs even though the disperser statements start
    above it.
    """

    n: int
    s: float
    seed: int
    inclusion_scale: float = 0.5
    p: float = field(init=False)

    def __post_init__(self):
        if not 2.0 <= self.s <= 3.0:
            raise InconsistentError(f"s = {self.s} outside [2, 3]")
        if self.n < 3:
            raise InconsistentError("need at least 3 variables")
        p = self.inclusion_scale / (self.n ** (3.0 - self.s))
        if not 0.0 < p <= 0.5:
            raise InconsistentError(f"inclusion probability {p} outside (0, 1/2]")
        object.__setattr__(self, "p", p)

    def expected_sparsity(self) -> float:
        return self.p * math.comb(self.n, 3)


def random_degree3_sparse(cfg: Degree3SamplerConfig) -> Anf:
    """Seeded draw from the sparse degree-3 distribution."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    return _sample_degree3(cfg.n, cfg.p, rng)


def sample_degree3_with_rng(n: int, p: float, rng: np.random.Generator) -> Anf:
    """Draw with a caller-owned generator; used by the experiment harness."""
    if not 0.0 < p <= 1.0:
        raise InconsistentError(f"inclusion probability {p} outside (0, 1]")
    return _sample_degree3(n, p, rng)
