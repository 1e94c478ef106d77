"""Grid failprone systems: one subjective failure assumption per attribute.

A failprone set for believers in attribute ``A_i`` consists of *full
failures* (every process of a small set of values of ``A_i``) plus *partial
failures* (a small budget of processes for each remaining value).  The
collection of all maximal such sets is the failprone system for that
belief; one system per attribute forms the asymmetric system for the grid.

Failprone systems are kept symbolic (:class:`GridParams`) and expanded on
demand, since their size grows as ``C(k, f) * C(n/k, alpha)^p``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Mapping, Sequence

from .universe import (
    AttributeSchema,
    ProcessSet,
    Universe,
    UnsupportedCardinality,
    build_universe,
)


class InvalidDescriptor(ValueError):
    """A failprone descriptor violates its structural invariants."""


class BudgetExceeded(RuntimeError):
    """An enumeration space is larger than the caller-supplied budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration requires {required} units, budget is {budget}")
        self.required = required
        self.budget = budget


#: Default guard for full expansions of a failprone system.
DEFAULT_ENUM_BUDGET = 10**6


@dataclass(frozen=True)
class GridParams:
    """Derived parameters of one belief's failprone system.

    ``f`` is the number of full-failure values, ``p = k - f`` the number of
    partial-failure values, and ``alpha`` the per-value partial budget.
    ``eps`` and ``delta`` are the fractional slacks with ``f = k/3 - eps``
    and ``alpha = n/(6k) - delta``; both lie in (0, 1] for default
    parameters but may drop to zero or below under overrides.
    """

    attr: int
    k: int
    n: int
    slice_size: int
    f: int
    p: int
    alpha: int
    eps: Fraction
    delta: Fraction
    f_default: int
    alpha_default: int

    @property
    def overridden(self) -> bool:
        return self.f != self.f_default or self.alpha != self.alpha_default

    @property
    def set_cardinality(self) -> int:
        """Cardinality shared by every maximal failprone set of this belief."""
        return self.slice_size * self.f + self.p * self.alpha

    def replace(self, f: int | None = None, alpha: int | None = None) -> "GridParams":
        """Copy with inflated parameters, for tightness and mutation studies."""
        new_f = self.f if f is None else f
        new_alpha = self.alpha if alpha is None else alpha
        if not self.f_default <= new_f < self.k:
            raise ValueError(f"f override {new_f} outside [{self.f_default}, {self.k})")
        if not self.alpha_default <= new_alpha <= self.slice_size:
            raise ValueError(
                f"alpha override {new_alpha} outside [{self.alpha_default}, {self.slice_size}]")
        return GridParams(
            attr=self.attr, k=self.k, n=self.n, slice_size=self.slice_size,
            f=new_f, p=self.k - new_f, alpha=new_alpha,
            eps=Fraction(self.k, 3) - new_f,
            delta=Fraction(self.n, 6 * self.k) - new_alpha,
            f_default=self.f_default, alpha_default=self.alpha_default,
        )


def grid_params(schema: AttributeSchema, i: int) -> GridParams:
    """Default parameters for believers in attribute ``i``."""
    k = schema.k(i)
    if k < 4:
        raise UnsupportedCardinality(
            f"attribute {schema.attribute_name(i)!r} has cardinality {k} < 4")
    n = schema.n
    f = -(-k // 3) - 1            # ceil(k/3) - 1
    alpha = -(-n // (6 * k)) - 1  # ceil(n/(6k)) - 1
    return GridParams(
        attr=i, k=k, n=n, slice_size=n // k,
        f=f, p=k - f, alpha=alpha,
        eps=Fraction(k, 3) - f,
        delta=Fraction(n, 6 * k) - alpha,
        f_default=f, alpha_default=alpha,
    )


@dataclass(frozen=True)
class FailproneDescriptor:
    """Symbolic form of one maximal grid failprone set.

    ``partial`` maps each non-full value index to the exact process ids of
    its partial-failure choice; values with an empty budget may be omitted.
    """

    belief: int
    full_values: tuple[int, ...]
    partial: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def build(cls, belief: int, full_values: Sequence[int],
              partial: Mapping[int, Sequence[int]]) -> "FailproneDescriptor":
        return cls(
            belief=belief,
            full_values=tuple(sorted(full_values)),
            partial=tuple(sorted(
                (a, tuple(sorted(pids))) for a, pids in partial.items() if len(pids) > 0
            )),
        )

    def partial_map(self) -> dict[int, tuple[int, ...]]:
        return dict(self.partial)

    def to_json(self) -> dict:
        return {
            "belief": self.belief,
            "full": list(self.full_values),
            "partial": {str(a): list(pids) for a, pids in self.partial},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FailproneDescriptor":
        try:
            return cls.build(
                belief=int(data["belief"]),
                full_values=[int(v) for v in data["full"]],
                partial={int(a): [int(p) for p in pids]
                         for a, pids in data.get("partial", {}).items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidDescriptor(f"malformed descriptor object: {exc}") from exc


class GridSystem:
    """Asymmetric grid failprone system: one failprone system per attribute."""

    def __init__(self, schema: AttributeSchema, params: tuple[GridParams, ...] | None = None):
        schema.check_analysis_ready()
        self.schema = schema
        self.universe: Universe = build_universe(schema)
        if params is None:
            params = tuple(grid_params(schema, i) for i in range(schema.d))
        self._params = params

    @property
    def d(self) -> int:
        return self.schema.d

    @property
    def n(self) -> int:
        return self.universe.n

    def params(self, i: int) -> GridParams:
        return self._params[i]

    def with_overrides(self, i: int, f: int | None = None,
                       alpha: int | None = None) -> "GridSystem":
        # shares the universe so its mask caches survive the copy
        new = list(self._params)
        new[i] = new[i].replace(f=f, alpha=alpha)
        sys = GridSystem.__new__(GridSystem)
        sys.schema = self.schema
        sys.universe = self.universe
        sys._params = tuple(new)
        return sys

    def descriptor_count(self, i: int) -> int:
        """Number of maximal failprone sets of belief ``i``."""
        par = self.params(i)
        return comb(par.k, par.f) * comb(par.slice_size, par.alpha) ** par.p


def materialize(system: GridSystem, desc: FailproneDescriptor) -> ProcessSet:
    """Expand a descriptor into the explicit process set it denotes."""
    par = system.params(desc.belief)
    uni = system.universe
    if len(desc.full_values) != par.f or len(set(desc.full_values)) != par.f:
        raise InvalidDescriptor(
            f"expected {par.f} distinct full values, got {desc.full_values}")
    for a in desc.full_values:
        if not 0 <= a < par.k:
            raise InvalidDescriptor(f"full value {a} out of range")
    full_set = set(desc.full_values)
    partial = desc.partial_map()
    mask = 0
    for a in desc.full_values:
        mask |= uni.value_mask(desc.belief, a)
    seen_values = set()
    for a, pids in desc.partial:
        if a in full_set:
            raise InvalidDescriptor(f"value {a} is both full and partial")
        if not 0 <= a < par.k:
            raise InvalidDescriptor(f"partial value {a} out of range")
        if a in seen_values:
            raise InvalidDescriptor(f"value {a} listed twice")
        seen_values.add(a)
        if len(pids) != par.alpha or len(set(pids)) != par.alpha:
            raise InvalidDescriptor(
                f"value {a} needs exactly {par.alpha} distinct partial processes")
        for pid in pids:
            if not 0 <= pid < uni.n:
                raise InvalidDescriptor(f"process id {pid} out of range")
            if uni.coord(pid, desc.belief) != a:
                raise InvalidDescriptor(
                    f"process {pid} does not take value {a} for belief {desc.belief}")
            mask |= 1 << pid
    if par.alpha > 0:
        missing = set(range(par.k)) - full_set - seen_values
        if missing:
            raise InvalidDescriptor(
                f"values {sorted(missing)} lack their partial-failure choice")
    elif partial and any(len(pids) > 0 for pids in partial.values()):
        raise InvalidDescriptor("partial choices present but the budget is zero")
    result = ProcessSet(uni, mask)
    if len(result) != par.set_cardinality:
        raise AssertionError("materialized cardinality disagrees with the closed form")
    return result


def enumerate_failprone(system: GridSystem, i: int,
                        budget: int | None = None) -> Iterator[FailproneDescriptor]:
    """Stream every maximal failprone set of belief ``i`` exactly once.

    Order is lexicographic: full-value combinations outermost, then the
    per-value partial combinations with the last value varying fastest.
    ``budget`` (when given) bounds the total count up front.
    """
    par = system.params(i)
    if budget is not None and budget > 0:
        total = system.descriptor_count(i)
        if total > budget:
            raise BudgetExceeded(total, budget)
    uni = system.universe
    values = range(par.k)
    for full in itertools.combinations(values, par.f):
        remaining = [a for a in values if a not in full]
        if par.alpha == 0:
            yield FailproneDescriptor(belief=i, full_values=full, partial=())
            continue
        pools = [tuple(itertools.combinations(uni.slice_ids(i, a), par.alpha))
                 for a in remaining]
        for choice in itertools.product(*pools):
            yield FailproneDescriptor(
                belief=i, full_values=full,
                partial=tuple(zip(remaining, choice)),
            )


def sample_failprone(system: GridSystem, i: int, rng_seed: int) -> FailproneDescriptor:
    """One maximal failprone set drawn uniformly from the enumeration space."""
    par = system.params(i)
    uni = system.universe
    rng = random.Random(rng_seed)
    full = tuple(sorted(rng.sample(range(par.k), par.f)))
    partial = {}
    if par.alpha > 0:
        for a in range(par.k):
            if a in full:
                continue
            partial[a] = tuple(sorted(rng.sample(uni.slice_ids(i, a), par.alpha)))
    return FailproneDescriptor.build(i, full, partial)


def canonical_quorums(system: GridSystem, i: int,
                      budget: int | None = None) -> Iterator[ProcessSet]:
    """Complements of the failprone sets of belief ``i``."""
    for desc in enumerate_failprone(system, i, budget=budget):
        yield materialize(system, desc).complement()


def closure_contains(system: GridSystem, i: int, faults: ProcessSet) -> bool:
    """Whether ``faults`` is a subset of some maximal failprone set of belief i.

    A fault set is covered by a maximal set iff at most ``f`` values carry
    more than ``alpha`` of its processes: those values become the covering
    set's full-failure values, every other value's faults fit its partial
    budget.
    """
    par = system.params(i)
    uni = system.universe
    fmask = faults.mask
    overflow = 0
    for a in range(par.k):
        if (fmask & uni.value_mask(i, a)).bit_count() > par.alpha:
            overflow += 1
            if overflow > par.f:
                return False
    return True


def covering_descriptor(system: GridSystem, i: int,
                        faults: ProcessSet) -> FailproneDescriptor:
    """A maximal failprone set of belief i containing ``faults``.

    Full values are the overflowing ones, padded lexicographically;
    partial choices extend each value's faults to exactly ``alpha``
    processes.  Raises InvalidDescriptor when ``faults`` is not in the
    closure.
    """
    par = system.params(i)
    uni = system.universe
    fmask = faults.mask
    per_value = [(fmask & uni.value_mask(i, a)).bit_count() for a in range(par.k)]
    overflowing = [a for a in range(par.k) if per_value[a] > par.alpha]
    if len(overflowing) > par.f:
        raise InvalidDescriptor("fault set is not inside the closure for this belief")
    full = list(overflowing)
    for a in range(par.k):
        if len(full) == par.f:
            break
        if a not in overflowing:
            full.append(a)
    full_set = set(full)
    partial = {}
    if par.alpha > 0:
        for a in range(par.k):
            if a in full_set:
                continue
            chosen = [pid for pid in uni.slice_ids(i, a) if (fmask >> pid) & 1]
            for pid in uni.slice_ids(i, a):
                if len(chosen) == par.alpha:
                    break
                if not (fmask >> pid) & 1:
                    chosen.append(pid)
            partial[a] = chosen
    return FailproneDescriptor.build(i, full, partial)


def is_joint_fault(system: GridSystem, i: int, j: int, faults: ProcessSet) -> bool:
    """Membership in the intersection of the two beliefs' closures."""
    return closure_contains(system, i, faults) and closure_contains(system, j, faults)


#: Pair-enumeration cap below which maximal joint faults are computed exactly.
DEFAULT_JOINT_PAIR_CAP = 10**4


def max_joint_fault_cardinality(system: GridSystem, i: int, j: int) -> int:
    """Upper bound on |F_i' ∩ F_j'|, met with equality by a constructed pair."""
    pi, pj = system.params(i), system.params(j)
    m = system.n // (pi.k * pj.k)
    return m * pi.f * pj.f + pi.p * pi.alpha + pj.p * pj.alpha


def maximal_joint_faults(system: GridSystem, i: int, j: int,
                         pair_budget: int = DEFAULT_JOINT_PAIR_CAP) -> Iterator[ProcessSet]:
    """Inclusion-maximal common fault sets of beliefs ``i`` and ``j``.

    When the pair space fits ``pair_budget`` this streams exactly the
    maximal elements of the closure intersection (every common fault set is
    a subset of some yielded set).  Above the budget it streams the
    extremal maximum-cardinality family instead: full blocks of both
    beliefs plus each side's partial budgets spent inside the other side's
    full values.  Membership queries should use :func:`is_joint_fault`,
    which is exact at any scale.
    """
    if i == j:
        raise ValueError("joint faults need two distinct beliefs")
    if system.descriptor_count(i) * system.descriptor_count(j) <= pair_budget:
        sets_i = [materialize(system, d) for d in enumerate_failprone(system, i)]
        sets_j = [materialize(system, d) for d in enumerate_failprone(system, j)]
        masks = {(fi & fj).mask for fi in sets_i for fj in sets_j}
        ordered = sorted(masks, key=lambda mk: (-mk.bit_count(), mk))
        kept: list[int] = []
        for mk in ordered:
            if not any(mk & ~other == 0 for other in kept):
                kept.append(mk)
        for mk in sorted(kept):
            yield ProcessSet(system.universe, mk)
        return
    yield from _extremal_joint_faults(system, i, j)


def _extremal_joint_faults(system: GridSystem, i: int, j: int) -> Iterator[ProcessSet]:
    pi, pj = system.params(i), system.params(j)
    uni = system.universe
    target = max_joint_fault_cardinality(system, i, j)
    for full_i in itertools.combinations(range(pi.k), pi.f):
        mask_i = 0
        for a in full_i:
            mask_i |= uni.value_mask(i, a)
        for full_j in itertools.combinations(range(pj.k), pj.f):
            mask_j = 0
            for b in full_j:
                mask_j |= uni.value_mask(j, b)
            mask = mask_i & mask_j
            # spend each side's partial budget inside the other side's full block
            for a in range(pi.k):
                if a in full_i:
                    continue
                pool = uni.value_mask(i, a) & mask_j & ~mask
                took = 0
                while pool and took < pi.alpha:
                    low = pool & -pool
                    mask |= low
                    pool ^= low
                    took += 1
            for b in range(pj.k):
                if b in full_j:
                    continue
                pool = uni.value_mask(j, b) & mask_i & ~mask
                took = 0
                while pool and took < pj.alpha:
                    low = pool & -pool
                    mask |= low
                    pool ^= low
                    took += 1
            if mask.bit_count() == target:
                yield ProcessSet(uni, mask)
