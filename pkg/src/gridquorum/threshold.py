"""Comparison against the one-third threshold failure assumption.

A grid failprone system is worth adopting only if its sets are larger than
the threshold baseline ``ceil(n/3) - 1``; such systems are called useful.
This module evaluates usefulness, sweeps the parameter space, and verifies
the closed-form inequalities backing the sweep verdicts.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, TextIO

from ._parallel import parallel_map
from .failprone import grid_params
from .universe import AttributeSchema


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def threshold_card(n: int) -> int:
    """Cardinality of a threshold failprone set: ceil(n/3) - 1.

    The two ceiling placements ceil(n/3 - 1) and ceil(n/3) - 1 coincide for
    every integer n; this is asserted once in the test suite rather than
    re-derived here.
    """
    if n < 4:
        raise ValueError(f"universe size {n} < 4 admits no faults")
    return _ceil_div(n, 3) - 1


@dataclass(frozen=True)
class ScanRecord:
    """One parameter-sweep row comparing a grid belief to the threshold baseline."""

    d: int
    cardinalities: tuple[int, ...]
    belief: int
    grid_card: int
    threshold_card: int
    ratio: Fraction
    useful: bool
    optimized_alpha: int | None = None
    useful_opt: bool | None = None

    @property
    def ratio_float(self) -> float:
        return float(self.ratio)

    def csv_row(self, k_width: int) -> list[str]:
        ks = [str(k) for k in self.cardinalities]
        ks += [""] * (k_width - len(ks))
        return [str(self.d), *ks, str(self.belief), str(self.grid_card),
                str(self.threshold_card), f"{self.ratio_float:.6f}",
                str(self.useful).lower(),
                "" if self.optimized_alpha is None else str(self.optimized_alpha),
                "" if self.useful_opt is None else str(self.useful_opt).lower()]


def usefulness(schema: AttributeSchema, i: int,
               optimized_alpha: int | None = None) -> ScanRecord:
    """Compare belief i's failprone-set cardinality to the threshold baseline."""
    schema.check_analysis_ready()
    par = grid_params(schema, i)
    if optimized_alpha is not None:
        par_opt = par.replace(alpha=optimized_alpha)
        opt_card = par_opt.set_cardinality
    baseline = threshold_card(schema.n)
    grid = par.set_cardinality
    return ScanRecord(
        d=schema.d, cardinalities=schema.cardinalities, belief=i,
        grid_card=grid, threshold_card=baseline,
        ratio=Fraction(grid, baseline), useful=grid > baseline,
        optimized_alpha=optimized_alpha,
        useful_opt=None if optimized_alpha is None else opt_card > baseline,
    )


def _equal_cell(args: tuple[int, int]) -> ScanRecord:
    d, k = args
    return usefulness(AttributeSchema.equal(d, k), 0)


def sweep_equal(d_range: Iterable[int], k_range: Iterable[int],
                threads: int = 1) -> Iterator[ScanRecord]:
    """One record per (d, k), all attributes sharing cardinality k."""
    cells = [(d, k) for d in sorted(d_range) for k in sorted(k_range)]
    yield from parallel_map(_equal_cell, cells, threads)


def _2d_cell(args: tuple[int, int]) -> ScanRecord:
    k1, k2 = args
    return usefulness(AttributeSchema.from_cardinalities([k1, k2]), 0)


def sweep_2d(k1_range: Iterable[int], k2_range: Iterable[int],
             threads: int = 1) -> Iterator[ScanRecord]:
    """Two-dimensional sweep for the first belief over (k1, k2)."""
    cells = [(k1, k2) for k1 in sorted(k1_range) for k2 in sorted(k2_range)]
    yield from parallel_map(_2d_cell, cells, threads)


SWEEP_CSV_HEADER = ["d", "belief", "grid_card", "threshold_card", "ratio",
                    "useful", "optimized_alpha", "useful_opt"]


def write_scan_csv(records: Sequence[ScanRecord], out: TextIO) -> None:
    """Deterministic CSV: lexicographic configuration order, 6-decimal ratios."""
    k_width = max((rec.d for rec in records), default=1)
    writer = csv.writer(out, lineterminator="\n")
    header = ["d"] + [f"k{t + 1}" for t in range(k_width)] + SWEEP_CSV_HEADER[1:]
    writer.writerow(header)
    for rec in records:
        writer.writerow(rec.csv_row(k_width))


# ---------------------------------------------------------------------------
# inequality verification behind the sweep verdicts


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    domain: str
    checked: int
    violations: tuple[str, ...]


@dataclass(frozen=True)
class InequalityReport:
    checks: tuple[InequalityCheck, ...]

    @property
    def total_checked(self) -> int:
        return sum(c.checked for c in self.checks)

    @property
    def violations(self) -> list[str]:
        return [v for c in self.checks for v in c.violations]

    def to_json(self) -> dict:
        return {
            "total_checked": self.total_checked,
            "violation_count": len(self.violations),
            "checks": [
                {"name": c.name, "domain": c.domain, "checked": c.checked,
                 "violations": list(c.violations)} for c in self.checks
            ],
        }


def _grid_card_formula(n: int, k: int) -> int:
    """Failprone-set cardinality for belief in an attribute of cardinality k."""
    f = _ceil_div(k, 3) - 1
    p = k - f
    alpha = _ceil_div(n, 6 * k) - 1
    return (n // k) * f + p * alpha


def verify_usefulness_inequalities(k_max: int = 64, d_max: int = 8,
                                   mixed_samples: int = 10**4, seed: int = 0) -> InequalityReport:
    """Evaluate each closed-form inequality backing the sweep verdicts.

    Every inequality compares the grid failprone-set cardinality (in the
    closed form used by the sweeps) to the threshold baseline; the report
    lists any violated instance, expected empty.
    """
    checks: list[InequalityCheck] = []

    def run(name: str, domain: str, instances: Iterable[tuple[str, int, int]]) -> None:
        violations = []
        count = 0
        for label, lhs, rhs in instances:
            count += 1
            if not lhs > rhs:
                violations.append(f"{label}: {lhs} <= {rhs}")
        checks.append(InequalityCheck(name=name, domain=domain, checked=count,
                                 violations=tuple(violations)))

    run("two_dim_k_ge_15", f"d=2, k in [15, {k_max}]",
        ((f"k={k}", _grid_card_formula(k * k, k), threshold_card(k * k))
         for k in range(15, k_max + 1)))
    run("d_dim_k_4", f"k=4, d in [3, {d_max}]",
        ((f"d={d}", _grid_card_formula(4 ** d, 4), threshold_card(4 ** d))
         for d in range(3, d_max + 1)))
    run("d_dim_k_789", f"k in {{7,8,9}}, d in [3, {d_max}]",
        ((f"d={d},k={k}", _grid_card_formula(k ** d, k), threshold_card(k ** d))
         for d in range(3, d_max + 1) for k in (7, 8, 9)))
    run("d_dim_k_ge_10", f"k in [10, {k_max}], d in [3, {d_max}]",
        ((f"d={d},k={k}", _grid_card_formula(k ** d, k), threshold_card(k ** d))
         for d in range(3, d_max + 1) for k in range(10, k_max + 1)))
    run("two_dim_k1_4_k2_ge_13", f"d=2, k1=4, k2 in [13, {k_max}]",
        ((f"k2={k2}", _grid_card_formula(4 * k2, 4), threshold_card(4 * k2))
         for k2 in range(13, k_max + 1)))
    run("two_dim_k1_7_k2_ge_7", f"d=2, k1=7, k2 in [7, {k_max}]",
        ((f"k2={k2}", _grid_card_formula(7 * k2, 7), threshold_card(7 * k2))
         for k2 in range(7, k_max + 1)))

    rng = random.Random(seed)
    per_k1 = max(4, mixed_samples // 3)

    def mixed_instances(k1: int) -> Iterator[tuple[str, int, int]]:
        # boundary combinations first, then seeded samples of the domain
        combos: list[tuple[int, ...]] = [(4, 4), (4, 5), (5, 4), (4, 4, 4)]
        while len(combos) < per_k1:
            d = rng.randint(3, d_max)
            combos.append(tuple(rng.randint(4, k_max) for _ in range(d - 1)))
        for rest in combos:
            n = k1
            for k in rest:
                n *= k
            yield (f"k1={k1},rest={rest}", _grid_card_formula(n, k1), threshold_card(n))

    for k1 in (4, 7, 8):
        run(f"d_dim_k1_{k1}", f"k1={k1}, d in [3, {d_max}], others in [4, {k_max}]",
            mixed_instances(k1))
    return InequalityReport(checks=tuple(checks))
