"""How far the construction's parameters can be pushed.

Two questions: can the number of full-failure values grow (no: one more
value admits three sets that cover the universe), and how far can the
per-value partial budget grow for one belief before the pair loses its
resilience (answered numerically, exhaustively for two attributes).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, TextIO

from ._parallel import parallel_map
from .failprone import FailproneDescriptor, GridSystem, grid_params, materialize
from .resilience import (
    ADVERSARIAL,
    EXHAUSTIVE,
    _q3_cover_witness,
    adversarial_max_union,
    check_b3_bound,
    check_b3_exhaustive,
    check_q3_exhaustive,
)
from .universe import AttributeSchema


@dataclass(frozen=True)
class CoverageCounterexample:
    """Witness that one extra full-failure value breaks triple resilience."""

    belief: int
    inflated_f: int
    witness: dict

    def full_value_choices(self) -> list[tuple[int, ...]]:
        return [tuple(d["full"]) for d in self.witness["descriptors"]]


def full_failure_counterexample(schema: AttributeSchema, i: int) -> CoverageCounterexample:
    """Three failprone sets covering the universe once f grows by one.

    With f+1 >= k/3 full values per set, three sets can pick value chunks
    whose union is every value of the attribute, so their union is the
    whole universe regardless of partial choices.
    """
    base = grid_params(schema, i)
    system = GridSystem(schema).with_overrides(i, f=base.f + 1)
    witness = _q3_cover_witness(system, i)
    cover = 0
    for data in witness["descriptors"]:
        cover |= materialize(system, FailproneDescriptor.from_json(data)).mask
    if cover != system.universe.full_mask:
        raise AssertionError("counterexample construction failed to cover the universe")
    return CoverageCounterexample(belief=i, inflated_f=base.f + 1, witness=witness)


@dataclass(frozen=True)
class AlphaSearchResult:
    """Largest partial budget for one belief that keeps the pair resilient.

    EXHAUSTIVE results are ground truth.  ADVERSARIAL results mean "no
    violation found" up to the reported value: a lower bound on the true
    violation threshold, not a feasibility proof.
    """

    cardinalities: tuple[int, ...]
    belief: int
    paired_belief: int | None
    default_alpha: int
    max_feasible_alpha: int
    method: str
    increase_percent: Fraction
    candidates_checked: int

    def to_json(self) -> dict:
        return {
            "cardinalities": list(self.cardinalities),
            "belief": self.belief,
            "paired_belief": self.paired_belief,  # None means all other beliefs
            "default_alpha": self.default_alpha,
            "max_alpha": self.max_feasible_alpha,
            "method": self.method,
            "feasibility_proven": self.method == EXHAUSTIVE,
            "increase_percent": float(self.increase_percent),
            "candidates_checked": self.candidates_checked,
        }


def alpha_upper_cap(schema: AttributeSchema, i: int, j: int) -> int:
    """Exclusive cap on candidate budgets: a value's slice can never be consumed."""
    pi = grid_params(schema, i)
    pj = grid_params(schema, j)
    m = schema.n // (pi.k * pj.k)
    return pi.slice_size - pj.f * m


def is_alpha_feasible(schema: AttributeSchema, i: int, j: int | None, alpha: int,
                      mode: str = EXHAUSTIVE, effort: int = 16, seed: int = 0,
                      simultaneous: bool = False) -> bool:
    """Whether belief i's budget can be ``alpha`` without losing resilience.

    Every belief keeps its default except belief i (and, with
    ``simultaneous``, belief j in lockstep).  Resilience over a pair also
    covers the same-belief case, which degenerates to triple resilience of
    the overridden belief, so that is checked too.  ``j=None`` checks
    belief i against every other belief.
    """
    system = GridSystem(schema).with_overrides(i, alpha=alpha)
    partners = [j] if j is not None else [b for b in range(schema.d) if b != i]
    if simultaneous:
        if j is None:
            raise ValueError("simultaneous optimization needs an explicit paired belief")
        bump = alpha - grid_params(schema, i).alpha
        pj = grid_params(schema, j)
        system = system.with_overrides(j, alpha=min(pj.slice_size, pj.alpha + bump))
    if not check_q3_exhaustive(system, i, budget=None).holds:
        return False
    if simultaneous and not check_q3_exhaustive(system, j, budget=None).holds:
        return False
    for partner in partners:
        if mode == EXHAUSTIVE:
            if not check_b3_exhaustive(system, i, partner, budget=None).holds:
                return False
            continue
        if check_b3_bound(system, i, partner).holds:
            continue
        _, card = adversarial_max_union(system, i, partner, effort=effort, seed=seed)
        if card >= system.n:
            return False
    return True


def max_alpha(schema: AttributeSchema, i: int, j: int | None = None,
              mode: str = EXHAUSTIVE, effort: int = 16, seed: int = 0,
              simultaneous: bool = False) -> AlphaSearchResult:
    """Largest feasible partial budget for belief i against belief j.

    With two attributes ``j`` defaults to the other belief; otherwise
    ``j=None`` means belief i is tested against all other beliefs
    (ADVERSARIAL mode only).  Feasibility is monotone (larger budgets only
    grow every set), so the EXHAUSTIVE mode binary-searches; the
    ADVERSARIAL mode scans upward since a heuristic miss is not guaranteed
    monotone.
    """
    schema.check_analysis_ready()
    if j is None and schema.d == 2:
        j = 1 - i
    if mode == EXHAUSTIVE and (schema.d != 2 or j is None):
        raise ValueError("EXHAUSTIVE mode supports two-attribute universes only")
    if mode not in (EXHAUSTIVE, ADVERSARIAL):
        raise ValueError(f"unknown mode {mode!r}")
    base = grid_params(schema, i)
    partners = [j] if j is not None else [b for b in range(schema.d) if b != i]
    cap = min(alpha_upper_cap(schema, i, partner) for partner in partners)
    lo = base.alpha
    hi = cap - 1
    checked = 0
    if mode == EXHAUSTIVE:
        while lo < hi:
            mid = (lo + hi + 1) // 2
            checked += 1
            if is_alpha_feasible(schema, i, j, mid, mode=mode,
                                 simultaneous=simultaneous):
                lo = mid
            else:
                hi = mid - 1
    else:
        while lo < hi:
            checked += 1
            if is_alpha_feasible(schema, i, j, lo + 1, mode=mode, effort=effort,
                                 seed=seed, simultaneous=simultaneous):
                lo += 1
            else:
                break
    best_card = base.replace(alpha=lo).set_cardinality
    default_card = base.set_cardinality
    return AlphaSearchResult(
        cardinalities=schema.cardinalities, belief=i, paired_belief=j,
        default_alpha=base.alpha, max_feasible_alpha=lo, method=mode,
        increase_percent=Fraction(100) * (best_card - default_card) / default_card,
        candidates_checked=checked,
    )


ALPHA_CSV_HEADER = ["k1", "k2", "default_alpha", "max_alpha", "method",
                    "increase_percent"]


def _alpha_cell(args: tuple[int, int, str, int, int]) -> tuple[int, int, AlphaSearchResult]:
    k1, k2, mode, effort, seed = args
    schema = AttributeSchema.from_cardinalities([k1, k2])
    return k1, k2, max_alpha(schema, 0, 1, mode=mode, effort=effort, seed=seed)


def alpha_tightness_sweep(k1_range: Iterable[int], k2_range: Iterable[int],
                          mode: str = EXHAUSTIVE, effort: int = 16, seed: int = 0,
                          threads: int = 1) -> Iterator[tuple[int, int, AlphaSearchResult]]:
    """Per-(k1, k2) budget headroom of the first belief, for the heatmap CSV."""
    cells = [(k1, k2, mode, effort, seed)
             for k1 in sorted(k1_range) for k2 in sorted(k2_range)]
    yield from parallel_map(_alpha_cell, cells, threads)


def write_alpha_csv(rows: Sequence[tuple[int, int, AlphaSearchResult]], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ALPHA_CSV_HEADER)
    for k1, k2, res in rows:
        writer.writerow([str(k1), str(k2), str(res.default_alpha),
                         str(res.max_feasible_alpha), res.method,
                         f"{float(res.increase_percent):.6f}"])
