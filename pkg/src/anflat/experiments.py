"""Seed-deterministic Monte Carlo harness for the random degree-3 families.

The dimension guarantees these experiments probe are asymptotic statements
about large n; desk-scale runs cannot reproduce them and every report says
so via an "asymptotic_claim": true field. What the harness does provide is
reproducible empirical evidence: trial i always uses the seed
stable_seed(master_seed, i), so reports are byte-identical across runs,
platforms, and any trial execution order. Wall-clock time is kept out of
the canonical JSON document for the same reason.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .anf_core import evaluate_on_points, flat_points_matrix
from .errors import InconsistentError, TooLargeError
from .f2_linalg import BitVec, Flat, random_bits
from .generators import sample_degree3_with_rng

Z95 = 1.959963984540054  # two-sided 95% normal quantile

KIND_FLATS = "disperser-flats"
KIND_RESTRICTIONS = "disperser-restrictions"
KIND_SAMPLER = "sampler-stats"
KINDS = (KIND_FLATS, KIND_RESTRICTIONS, KIND_SAMPLER)

FLAT_DIMENSION_CONSTANT = 6.12
RESTRICTION_DIMENSION_CONSTANT = 3.0
MAX_FLAT_DIMENSION = 20


def stable_seed(master_seed: int, index: int) -> int:
    """Order-independent per-trial seed derived via SHA-256."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def wilson_interval(successes: int, total: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        raise InconsistentError("interval needs at least one observation")
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def random_flat(n: int, k: int, rng: np.random.Generator) -> Flat:
    """Uniform flat of dimension exactly k.

    Draws uniform vectors until k independent ones arrive, then a uniform
    offset. The draw distribution is invariant under GL(n, 2), which maps
    executions spanning one subspace bijectively onto executions spanning
    any other, so every k-subspace is equally likely; the uniform offset
    then makes every coset equally likely.
    """
    if not 0 <= k <= n:
        raise InconsistentError(f"dimension {k} outside [0, {n}]")
    basis: list[int] = []
    pivots: dict[int, int] = {}
    while len(basis) < k:
        v = random_bits(n, rng)
        reduced = v
        while reduced:
            top = reduced.bit_length() - 1
            if top in pivots:
                reduced ^= pivots[top]
            else:
                pivots[top] = reduced
                basis.append(v)
                break
    offset = random_bits(n, rng)
    return Flat(n, BitVec(n, offset), tuple(BitVec(n, b) for b in basis))


@dataclass
class ExperimentConfig:
    """One experiment: what to run, at which sizes, under which master seed."""

    kind: str
    n: int
    trials: int
    master_seed: int
    s: Optional[float] = None
    k: Optional[int] = None
    flats_per_trial: int = 50
    restrictions_per_trial: int = 50
    family: str = "rand3-sparse"
    inclusion_scale: Optional[float] = None
    flat_dim_constant: float = FLAT_DIMENSION_CONSTANT
    restriction_dim_constant: float = RESTRICTION_DIMENSION_CONSTANT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InconsistentError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise InconsistentError("trials must be at least 1")
        if self.n < 3:
            raise InconsistentError("need at least 3 variables")
        needs_s = self.kind != KIND_SAMPLER or self.family == "rand3-sparse"
        if needs_s:
            if self.s is None:
                raise InconsistentError("this experiment needs the sparsity exponent s")
            if not 2.0 < self.s <= 3.0:
                raise InconsistentError(f"s = {self.s} outside (2, 3]")
        if self.kind == KIND_SAMPLER and self.family not in ("rand3-sparse", "rand3-half"):
            raise InconsistentError(f"unknown sampler family {self.family!r}")
        if self.inclusion_scale is None:
            # flat-disperser construction uses 1/(2 n^(3-s)); the
            # 0-restriction variant uses 1/n^(3-s)
            self.inclusion_scale = 1.0 if self.kind == KIND_RESTRICTIONS else 0.5
        if self.kind == KIND_FLATS and self.k is None:
            self.k = round(self.flat_dim_constant * self.n ** (2.0 - self.s / 2.0))
        if self.kind == KIND_RESTRICTIONS and self.k is None:
            self.k = round(
                self.restriction_dim_constant
                * math.sqrt(math.log(self.n))
                * self.n ** ((3.0 - self.s) / 2.0)
            )
        if self.kind != KIND_SAMPLER:
            if self.k is None or not 0 <= self.k <= self.n:
                raise InconsistentError(
                    f"dimension k = {self.k} outside [0, {self.n}]; pass k explicitly"
                )
        if self.kind == KIND_FLATS and self.k > MAX_FLAT_DIMENSION:
            raise TooLargeError(
                f"k = {self.k} exceeds the exhaustive flat cap {MAX_FLAT_DIMENSION}"
            )

    def inclusion_probability(self) -> float:
        p = self.inclusion_scale / (self.n ** (3.0 - self.s))
        if not 0.0 < p <= 0.5:
            raise InconsistentError(f"inclusion probability {p} outside (0, 1/2]")
        return p

    def echo(self) -> dict:
        out = {
            "kind": self.kind,
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
        }
        if self.kind == KIND_SAMPLER:
            out["family"] = self.family
            if self.family == "rand3-sparse":
                out["s"] = self.s
                out["inclusion_scale"] = self.inclusion_scale
        else:
            out["s"] = self.s
            out["k"] = self.k
            out["inclusion_scale"] = self.inclusion_scale
            if self.kind == KIND_FLATS:
                out["flats_per_trial"] = self.flats_per_trial
            else:
                out["restrictions_per_trial"] = self.restrictions_per_trial
        return out


@dataclass
class ExperimentReport:
    """Config echo, per-trial rows, and aggregate statistics."""

    config: dict
    outcomes: list[dict]
    aggregate: dict
    asymptotic_claim: bool = True
    wall_clock: float = 0.0

    def to_json_dict(self) -> dict:
        # wall_clock stays out so identical configs serialize identically
        return {
            "config": self.config,
            "outcomes": self.outcomes,
            "aggregate": self.aggregate,
            "asymptotic_claim": self.asymptotic_claim,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv_text(self) -> str:
        if not self.outcomes:
            return ""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.outcomes[0].keys()))
        writer.writeheader()
        for row in self.outcomes:
            writer.writerow(row)
        return buf.getvalue()


def _trial_rng(cfg: ExperimentConfig, index: int) -> tuple[int, np.random.Generator]:
    seed = stable_seed(cfg.master_seed, index)
    return seed, np.random.Generator(np.random.PCG64(seed))


def run_disperser_flats(cfg: ExperimentConfig) -> ExperimentReport:
    """Constancy rate of sparse degree-3 samples over uniform k-flats.

    Each trial draws one function and flats_per_trial uniform flats of
    dimension k, checking constancy exhaustively over each flat's points.
    """
    if cfg.kind != KIND_FLATS:
        raise InconsistentError(f"config kind is {cfg.kind!r}")
    start = time.perf_counter()
    p = cfg.inclusion_probability()
    outcomes = []
    constant_pairs = 0
    for i in range(cfg.trials):
        seed, rng = _trial_rng(cfg, i)
        f = sample_degree3_with_rng(cfg.n, p, rng)
        constant_here = 0
        for _ in range(cfg.flats_per_trial):
            flat = random_flat(cfg.n, cfg.k, rng)
            values = evaluate_on_points(f, flat_points_matrix(flat))
            if int(values.min()) == int(values.max()):
                constant_here += 1
        constant_pairs += constant_here
        outcomes.append(
            {
                "trial": i,
                "seed": seed,
                "sparsity": f.sparsity(),
                "flats": cfg.flats_per_trial,
                "constant_flats": constant_here,
            }
        )
    total = cfg.trials * cfg.flats_per_trial
    low, high = wilson_interval(constant_pairs, total)
    aggregate = {
        "pairs": total,
        "constant_pairs": constant_pairs,
        "constancy_rate": constant_pairs / total,
        "wilson_ci_95": [low, high],
    }
    return ExperimentReport(
        config=cfg.echo(),
        outcomes=outcomes,
        aggregate=aggregate,
        wall_clock=time.perf_counter() - start,
    )


def run_disperser_zero_restrictions(cfg: ExperimentConfig) -> ExperimentReport:
    """Rate at which zeroing all but k uniform variables kills degree 3."""
    if cfg.kind != KIND_RESTRICTIONS:
        raise InconsistentError(f"config kind is {cfg.kind!r}")
    start = time.perf_counter()
    p = cfg.inclusion_probability()
    outcomes = []
    degenerate_total = 0
    for i in range(cfg.trials):
        seed, rng = _trial_rng(cfg, i)
        f = sample_degree3_with_rng(cfg.n, p, rng)
        degenerate_here = 0
        for _ in range(cfg.restrictions_per_trial):
            keep = rng.permutation(cfg.n)[: cfg.k]
            keep_mask = 0
            for j in keep:
                keep_mask |= 1 << int(j)
            residual_degree = max(
                (m.bit_count() for m in f.terms if m & ~keep_mask == 0), default=0
            )
            if residual_degree < 3:
                degenerate_here += 1
        degenerate_total += degenerate_here
        outcomes.append(
            {
                "trial": i,
                "seed": seed,
                "sparsity": f.sparsity(),
                "restrictions": cfg.restrictions_per_trial,
                "degenerate": degenerate_here,
            }
        )
    total = cfg.trials * cfg.restrictions_per_trial
    low, high = wilson_interval(degenerate_total, total)
    aggregate = {
        "restrictions": total,
        "degenerate": degenerate_total,
        "degenerate_rate": degenerate_total / total,
        "wilson_ci_95": [low, high],
    }
    return ExperimentReport(
        config=cfg.echo(),
        outcomes=outcomes,
        aggregate=aggregate,
        wall_clock=time.perf_counter() - start,
    )


def run_sampler_stats(cfg: ExperimentConfig) -> ExperimentReport:
    """Empirical sparsity moments of a sampler against binomial predictions."""
    if cfg.kind != KIND_SAMPLER:
        raise InconsistentError(f"config kind is {cfg.kind!r}")
    start = time.perf_counter()
    if cfg.family == "rand3-half":
        p = 0.5
    else:
        p = cfg.inclusion_probability()
    total_terms = math.comb(cfg.n, 3)
    outcomes = []
    sparsities = []
    for i in range(cfg.trials):
        seed, rng = _trial_rng(cfg, i)
        f = sample_degree3_with_rng(cfg.n, p, rng)
        sparsities.append(f.sparsity())
        outcomes.append({"trial": i, "seed": seed, "sparsity": f.sparsity()})
    mean = sum(sparsities) / len(sparsities)
    if len(sparsities) > 1:
        variance = sum((x - mean) ** 2 for x in sparsities) / (len(sparsities) - 1)
    else:
        variance = 0.0
    expected_mean = p * total_terms
    expected_var = p * (1.0 - p) * total_terms
    sigma_of_mean = math.sqrt(expected_var / cfg.trials)
    deviation = abs(mean - expected_mean) / sigma_of_mean if sigma_of_mean else 0.0
    aggregate = {
        "inclusion_probability": p,
        "possible_terms": total_terms,
        "mean_sparsity": mean,
        "sample_variance": variance,
        "expected_mean": expected_mean,
        "expected_variance": expected_var,
        "sigma_of_mean": sigma_of_mean,
        "deviation_sigmas": deviation,
        "within_4_sigma": deviation <= 4.0,
    }
    return ExperimentReport(
        config=cfg.echo(),
        outcomes=outcomes,
        aggregate=aggregate,
        wall_clock=time.perf_counter() - start,
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.kind == KIND_FLATS:
        return run_disperser_flats(cfg)
    if cfg.kind == KIND_RESTRICTIONS:
        return run_disperser_zero_restrictions(cfg)
    return run_sampler_stats(cfg)
