"""Resilience and consistency checks for asymmetric grid systems.

Three routes are provided and kept deliberately independent:

* exhaustive verdicts over a symmetry quotient of the enumeration space,
  with exact per-class placement optimization (ground truth);
* the closed-form coverage bound, evaluated in exact rational arithmetic;
* adversarial worst-case construction (greedy, seeded restarts, swap
  search), a lower bound on the true maximum union.

Every reported witness is re-validated by a dumb recount before being
returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import _cells
from ._cells import Fill, PairGeometry, Skeleton
from .failprone import (
    BudgetExceeded,
    FailproneDescriptor,
    GridSystem,
    closure_contains,
    covering_descriptor,
    enumerate_failprone,
    materialize,
    max_joint_fault_cardinality,
    sample_failprone,
)
from .universe import ProcessSet

Q3_RESILIENCE = "Q3_RESILIENCE"
B3_RESILIENCE = "B3_RESILIENCE"
B3_CONSISTENCY = "B3_CONSISTENCY"
B3_AVAILABILITY = "B3_AVAILABILITY"

EXHAUSTIVE = "EXHAUSTIVE"
BOUND = "BOUND"
ADVERSARIAL = "ADVERSARIAL"
SAMPLED = "SAMPLED"

DEFAULT_CHECK_BUDGET = 10**4
#: Above this many quorum pairs the direct consistency check leaves the
#: literal route and argues through cardinalities / the quotient search.
LITERAL_PAIR_CAP = 10**6


@dataclass(frozen=True)
class ResilienceVerdict:
    """Outcome of one check, with a re-checkable witness on failure."""

    prop: str
    method: str
    holds: bool
    slack: int | None = None
    witness: dict | None = None
    checked: int | None = None

    def to_json(self) -> dict:
        return {
            "property": self.prop,
            "method": self.method,
            "holds": self.holds,
            "slack": self.slack,
            "witness": self.witness,
            "checked": self.checked,
        }


@dataclass(frozen=True)
class BoundBreakdown:
    """The three coverage summands and the exact slack separating them from n."""

    i: int
    j: int
    n: int
    full_union: int
    partial_union: int
    residual: int
    total: int
    slack_terms: tuple[tuple[str, Fraction], ...]

    @property
    def holds(self) -> bool:
        return self.total < self.n

    def slack_total(self) -> Fraction:
        return sum((term for _, term in self.slack_terms), Fraction(0))

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "n": self.n,
            "full_union": self.full_union,
            "partial_union": self.partial_union,
            "residual": self.residual,
            "total": self.total,
            "holds": self.holds,
            "slack_terms": {name: str(term) for name, term in self.slack_terms},
        }


def _budget_gate(required: int, budget: int | None) -> None:
    if budget is not None and budget > 0 and required > budget:
        raise BudgetExceeded(required, budget)


# ---------------------------------------------------------------------------
# realization of cell-level configurations into concrete descriptors


def _cell_pids(system: GridSystem, i: int, j: int, a: int, b: int) -> list[int]:
    uni = system.universe
    mask = uni.value_mask(i, a) & uni.value_mask(j, b)
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _pad_partials(system: GridSystem, axis: int, full: Sequence[int],
                  chosen: dict[int, list[int]], alpha: int,
                  prefer_other_axis_values: tuple[int, Sequence[int]] | None) -> dict[int, list[int]]:
    """Extend per-value picks to exactly ``alpha`` processes each.

    Padding prefers cells whose row/column (on the other axis) is listed in
    ``prefer_other_axis_values`` so that filler processes land in already
    covered territory and do not disturb planned unions.
    """
    uni = system.universe
    out: dict[int, list[int]] = {}
    for a in range(system.params(axis).k):
        if a in full:
            continue
        picks = list(chosen.get(a, []))
        if len(picks) > alpha:
            raise AssertionError("placement exceeded the per-value budget")
        if len(picks) < alpha:
            used = set(picks)
            pool = uni.slice_ids(axis, a)
            if prefer_other_axis_values is not None:
                other_axis, preferred = prefer_other_axis_values
                pref_set = set(preferred)
                pool = sorted(pool, key=lambda pid: (uni.coord(pid, other_axis) not in pref_set, pid))
            for pid in pool:
                if len(picks) == alpha:
                    break
                if pid not in used:
                    picks.append(pid)
        out[a] = picks
    return out


def realize_configuration(system: GridSystem, i: int, j: int, sk: Skeleton,
                          fill: Fill) -> tuple[FailproneDescriptor, FailproneDescriptor,
                                               FailproneDescriptor, FailproneDescriptor]:
    """Turn a skeleton plus per-cell counts into four concrete descriptors.

    Within each cell the planned union ``min(m, x + y + w)`` is realized by
    handing out consecutive (circular) index ranges to the three parts, and
    paired pieces are written into both primed descriptors so that they end
    up inside the intersection.
    """
    geom = PairGeometry.of(system, i, j)
    cells = {(a, b): cat for a, b, cat in _cells.uncovered_cells(geom, sk)}
    m = geom.m
    x_parts: dict[int, list[int]] = {}
    y_parts: dict[int, list[int]] = {}
    xp_parts: dict[int, list[int]] = {}
    yp_parts: dict[int, list[int]] = {}
    for (a, b), (x, y, w) in fill.items():
        pids = _cell_pids(system, i, j, a, b)
        if x:
            x_parts.setdefault(a, []).extend(pids[t] for t in range(x))
        if y:
            y_parts.setdefault(b, []).extend(pids[(x + t) % m] for t in range(y))
        if w:
            piece = [pids[(x + y + t) % m] for t in range(w)]
            cat = cells[(a, b)]
            if cat == _cells.CAT_DIRECT_COLSIDE:
                xp_parts.setdefault(a, []).extend(piece)
            elif cat == _cells.CAT_DIRECT_ROWSIDE:
                yp_parts.setdefault(b, []).extend(piece)
            else:
                xp_parts.setdefault(a, []).extend(piece)
                yp_parts.setdefault(b, []).extend(piece)
    a_i, a_j = geom.a_i, geom.a_j
    sj_rows = tuple(sk.sj)
    si_cols = tuple(sk.si)
    desc_i = FailproneDescriptor.build(i, sk.si, _pad_partials(
        system, i, sk.si, x_parts, a_i, (j, sj_rows)))
    desc_j = FailproneDescriptor.build(j, sk.sj, _pad_partials(
        system, j, sk.sj, y_parts, a_j, (i, si_cols)))
    pad_rows_for_xp = tuple(b for b in sk.sj if b not in sk.sj2) + tuple(
        b for b in sk.sj if b in sk.sj2)
    pad_cols_for_yp = tuple(a for a in sk.si if a not in sk.si2) + tuple(
        a for a in sk.si if a in sk.si2)
    desc_pi = FailproneDescriptor.build(i, sk.si2, _pad_partials(
        system, i, sk.si2, xp_parts, a_i, (j, pad_rows_for_xp)))
    desc_pj = FailproneDescriptor.build(j, sk.sj2, _pad_partials(
        system, j, sk.sj2, yp_parts, a_j, (i, pad_cols_for_yp)))
    return desc_i, desc_j, desc_pi, desc_pj


def _union_of_configuration(system: GridSystem,
                            descs: tuple[FailproneDescriptor, FailproneDescriptor,
                                         FailproneDescriptor, FailproneDescriptor]) -> ProcessSet:
    desc_i, desc_j, desc_pi, desc_pj = descs
    f_i = materialize(system, desc_i)
    f_j = materialize(system, desc_j)
    f_ij = materialize(system, desc_pi) & materialize(system, desc_pj)
    return f_i | f_j | f_ij


# ---------------------------------------------------------------------------
# Q3


def _q3_profiles(f: int, k: int):
    """Overlap profiles of three full-value choices, up to value permutation."""
    for r123 in range(f + 1):
        for r12 in range(f - r123 + 1):
            for r13 in range(f - r123 - r12 + 1):
                for r23 in range(f - r123 + 1):
                    e1 = f - r12 - r13 - r123
                    e2 = f - r12 - r23 - r123
                    e3 = f - r13 - r23 - r123
                    if min(e1, e2, e3) < 0:
                        continue
                    union = 3 * f - r12 - r13 - r23 - 2 * r123
                    if union > k:
                        continue
                    yield union


def check_q3_exhaustive(system: GridSystem, i: int,
                        budget: int | None = DEFAULT_CHECK_BUDGET) -> ResilienceVerdict:
    """Whether no three failprone sets of belief ``i`` cover the universe.

    Only the full-value choices and per-value partial counts of a triple
    influence its union cardinality, so triples are checked over the
    corresponding quotient.  ``budget`` gates the raw set count the verdict
    quantifies over (None or 0 disables the gate).
    """
    _budget_gate(system.descriptor_count(i), budget)
    par = system.params(i)
    n = system.n
    slice_size = par.slice_size
    partial_fill = min(3 * par.alpha, slice_size)
    best = -1
    checked = 0
    for union_values in _q3_profiles(par.f, par.k):
        checked += 1
        coverage = union_values * slice_size + (par.k - union_values) * partial_fill
        best = max(best, coverage)
    holds = best < n
    witness = None
    if not holds:
        witness = _q3_cover_witness(system, i)
        cover = ProcessSet(system.universe, 0)
        for desc in witness["descriptors"]:
            cover = cover | materialize(system, FailproneDescriptor.from_json(desc))
        if len(cover) != n:
            raise AssertionError("constructed cover witness failed its recount")
    return ResilienceVerdict(prop=Q3_RESILIENCE, method=EXHAUSTIVE, holds=holds,
                             slack=n - best, witness=witness, checked=checked)


def _q3_cover_witness(system: GridSystem, i: int) -> dict:
    """Three descriptors whose union covers the universe (violation case)."""
    par = system.params(i)
    uni = system.universe
    descriptors = []
    by_fulls = 3 * par.f >= par.k
    for t in range(3):
        if by_fulls:
            full = sorted({(t * par.f + s) % par.k for s in range(par.f)})
            while len(full) < par.f:  # wrapped chunks may collide on tiny k
                full.append(next(v for v in range(par.k) if v not in full))
        else:
            full = list(range(par.f))
        partial: dict[int, list[int]] = {}
        if par.alpha > 0:
            for a in range(par.k):
                if a in full:
                    continue
                pool = uni.slice_ids(i, a)
                partial[a] = sorted(pool[(t * par.alpha + s) % par.slice_size]
                                    for s in range(par.alpha))
        descriptors.append(FailproneDescriptor.build(i, full, partial))
    return {"kind": "q3_cover", "belief": i,
            "descriptors": [d.to_json() for d in descriptors]}


# ---------------------------------------------------------------------------
# B3 resilience


def check_b3_exhaustive(system: GridSystem, i: int, j: int,
                        budget: int | None = DEFAULT_CHECK_BUDGET) -> ResilienceVerdict:
    """Ground-truth B3 check for the belief pair (i, j).

    Quantifies over all F_i, F_j and all maximal joint faults (checking
    maximal ones suffices: the union is monotone in the joint fault).
    Internally reduces to overlap classes of the four full-value choices
    and solves each class's placement maximum exactly.
    """
    if i == j:
        raise ValueError("B3 pair check needs two distinct beliefs")
    _budget_gate(system.descriptor_count(i) + system.descriptor_count(j), budget)
    geom = PairGeometry.of(system, i, j)
    best, sk, fill, checked = _cells.exhaustive_max_union(geom)
    n = system.n
    holds = best < n
    witness = None
    if not holds:
        descs = realize_configuration(system, i, j, sk, fill)
        union = _union_of_configuration(system, descs)
        if len(union) != n:
            raise AssertionError("constructed cover witness failed its recount")
        desc_i, desc_j, desc_pi, desc_pj = descs
        witness = {
            "kind": "b3_cover", "i": i, "j": j,
            "f_i": desc_i.to_json(), "f_j": desc_j.to_json(),
            "f_ij_parents": [desc_pi.to_json(), desc_pj.to_json()],
        }
    return ResilienceVerdict(prop=B3_RESILIENCE, method=EXHAUSTIVE, holds=holds,
                             slack=n - best, witness=witness, checked=checked)


def check_b3_bound(system: GridSystem, i: int, j: int) -> BoundBreakdown:
    """Closed-form coverage bound for the pair (i, j), in exact arithmetic.

    The three summands bound the full-failure union, the partial-failure
    union, and the joint fault beyond both.  Their total equals
    ``n - sum(slack terms)`` identically; with default parameters every
    slack term is positive, forcing total < n.
    """
    pi, pj = system.params(i), system.params(j)
    n = system.n
    m = n // (pi.k * pj.k)
    full_union = pi.slice_size * pi.f + pj.slice_size * pj.f - m * pi.f * pj.f
    partial_union = pi.p * pi.alpha + pj.p * pj.alpha
    residual = m * pi.f * pj.f + (pi.p - pi.f) * pi.alpha + (pj.p - pj.f) * pj.alpha
    total = full_union + partial_union + residual
    slack_terms = (
        ("k_i*delta_i", pi.k * pi.delta),
        ("k_j*delta_j", pj.k * pj.delta),
        ("n/(2k_i)*eps_i", Fraction(n, 2 * pi.k) * pi.eps),
        ("n/(2k_j)*eps_j", Fraction(n, 2 * pj.k) * pj.eps),
        ("3*(eps_i*delta_i+eps_j*delta_j)", 3 * (pi.eps * pi.delta + pj.eps * pj.delta)),
    )
    breakdown = BoundBreakdown(i=i, j=j, n=n, full_union=full_union,
                               partial_union=partial_union, residual=residual,
                               total=total, slack_terms=slack_terms)
    if total != n - breakdown.slack_total():
        raise AssertionError("bound decomposition lost exactness")
    if not pi.overridden and not pj.overridden and not breakdown.holds:
        raise AssertionError("coverage bound reached n with default parameters")
    return breakdown


def adversarial_max_union(system: GridSystem, i: int, j: int,
                          effort: int = 64, seed: int = 0) -> tuple[ProcessSet, int]:
    """Best covering union found by guided search; a lower bound on the maximum.

    Always returns a legal configuration's union, so the cardinality never
    exceeds ``check_b3_bound(...).total``.
    """
    if i == j:
        raise ValueError("adversarial search needs two distinct beliefs")
    geom = PairGeometry.of(system, i, j)
    _, sk, fill = _cells.adversarial_search(geom, effort=effort, seed=seed)
    descs = realize_configuration(system, i, j, sk, fill)
    union = _union_of_configuration(system, descs)
    return union, len(union)


# ---------------------------------------------------------------------------
# B3 consistency (quorum side)


def _closure_contains_mask(system: GridSystem, i: int, mask: int) -> bool:
    par = system.params(i)
    uni = system.universe
    overflow = 0
    for a in range(par.k):
        if (mask & uni.value_mask(i, a)).bit_count() > par.alpha:
            overflow += 1
            if overflow > par.f:
                return False
    return True


def check_b3_consistency_direct(system: GridSystem, i: int, j: int,
                                budget: int | None = DEFAULT_CHECK_BUDGET) -> ResilienceVerdict:
    """Quorum-side check: no two canonical quorums intersect inside a joint fault.

    Small systems are checked literally over all quorum pairs (containment
    of the intersection in some maximal joint fault is a closure-membership
    test).  Larger systems are decided by the cardinality argument
    ``min |Q_i ∩ Q_j| > max |F_ij|`` when it applies, else by the quotient
    search through the complement framing.
    """
    if i == j:
        raise ValueError("consistency check needs two distinct beliefs")
    ci = system.descriptor_count(i)
    cj = system.descriptor_count(j)
    _budget_gate(ci + cj, budget)
    n = system.n
    full_mask = system.universe.full_mask
    if ci * cj <= LITERAL_PAIR_CAP:
        masks_j = [materialize(system, d).mask for d in enumerate_failprone(system, j)]
        checked = 0
        for desc_i in enumerate_failprone(system, i):
            mask_i = materialize(system, desc_i).mask
            for mask_j in masks_j:
                checked += 1
                inter = full_mask & ~(mask_i | mask_j)
                if (_closure_contains_mask(system, i, inter)
                        and _closure_contains_mask(system, j, inter)):
                    witness = _consistency_witness(system, i, j, mask_i, mask_j, inter)
                    return ResilienceVerdict(prop=B3_CONSISTENCY, method=EXHAUSTIVE,
                                             holds=False, witness=witness, checked=checked)
        return ResilienceVerdict(prop=B3_CONSISTENCY, method=EXHAUSTIVE, holds=True,
                                 checked=checked)
    geom = PairGeometry.of(system, i, j)
    min_quorum_overlap = n - _cells.pair_union_max(geom)
    if min_quorum_overlap > max_joint_fault_cardinality(system, i, j):
        return ResilienceVerdict(prop=B3_CONSISTENCY, method=BOUND, holds=True, checked=0)
    best, sk, fill, checked = _cells.exhaustive_max_union(geom)
    if best < n:
        return ResilienceVerdict(prop=B3_CONSISTENCY, method=EXHAUSTIVE, holds=True,
                                 slack=n - best, checked=checked)
    descs = realize_configuration(system, i, j, sk, fill)
    desc_i, desc_j, desc_pi, desc_pj = descs
    mask_i = materialize(system, desc_i).mask
    mask_j = materialize(system, desc_j).mask
    inter = full_mask & ~(mask_i | mask_j)
    f_ij = materialize(system, desc_pi).mask & materialize(system, desc_pj).mask
    if inter & ~f_ij:
        raise AssertionError("constructed containment witness failed its recount")
    witness = {
        "kind": "quorum_containment", "i": i, "j": j,
        "q_i_complement": desc_i.to_json(), "q_j_complement": desc_j.to_json(),
        "f_ij_parents": [desc_pi.to_json(), desc_pj.to_json()],
    }
    return ResilienceVerdict(prop=B3_CONSISTENCY, method=EXHAUSTIVE, holds=False,
                             witness=witness, checked=checked)


def _consistency_witness(system: GridSystem, i: int, j: int,
                         mask_i: int, mask_j: int, inter: int) -> dict:
    uni = system.universe
    inter_set = ProcessSet(uni, inter)
    parent_i = covering_descriptor(system, i, inter_set)
    parent_j = covering_descriptor(system, j, inter_set)
    f_ij = materialize(system, parent_i).mask & materialize(system, parent_j).mask
    if inter & ~f_ij:
        raise AssertionError("containment witness failed its recount")
    from_mask_i = _descriptor_from_mask(system, i, mask_i)
    from_mask_j = _descriptor_from_mask(system, j, mask_j)
    return {
        "kind": "quorum_containment", "i": i, "j": j,
        "q_i_complement": from_mask_i.to_json(), "q_j_complement": from_mask_j.to_json(),
        "f_ij_parents": [parent_i.to_json(), parent_j.to_json()],
    }


def _descriptor_from_mask(system: GridSystem, i: int, mask: int) -> FailproneDescriptor:
    """Recover the descriptor of a materialized maximal failprone set."""
    par = system.params(i)
    uni = system.universe
    full = []
    partial: dict[int, list[int]] = {}
    for a in range(par.k):
        picked = mask & uni.value_mask(i, a)
        count = picked.bit_count()
        if count == par.slice_size and len(full) < par.f and count > par.alpha:
            full.append(a)
        else:
            pids = []
            while picked:
                low = picked & -picked
                pids.append(low.bit_length() - 1)
                picked ^= low
            partial[a] = pids
    desc = FailproneDescriptor.build(i, full, partial)
    if materialize(system, desc).mask != mask:
        raise AssertionError("mask does not describe a maximal failprone set")
    return desc


# ---------------------------------------------------------------------------
# availability


def check_b3_availability(system: GridSystem, i: int,
                          budget: int | None = DEFAULT_CHECK_BUDGET,
                          samples: int = 1000, seed: int = 0,
                          quorums: Sequence[ProcessSet] | None = None) -> ResilienceVerdict:
    """For every failprone set of belief ``i``, some quorum avoids it.

    Canonical quorums satisfy this by construction; the checker verifies it
    anyway, over the full enumeration when it fits the budget and over a
    seeded sample otherwise.  A non-canonical quorum collection can be
    passed explicitly to exercise the contract.
    """
    count = system.descriptor_count(i)
    method = EXHAUSTIVE
    if budget is not None and budget > 0 and count > budget:
        method = SAMPLED
    if method == EXHAUSTIVE:
        descriptors = enumerate_failprone(system, i)
        checked_total = count
    else:
        descriptors = (sample_failprone(system, i, seed + t) for t in range(samples))
        checked_total = samples
    for desc in descriptors:
        fset = materialize(system, desc)
        if quorums is None:
            quorum = fset.complement()
            ok = quorum.isdisjoint(fset)
        else:
            ok = any(q.isdisjoint(fset) for q in quorums)
        if not ok:
            witness = {"kind": "availability_gap", "belief": i,
                       "descriptor": desc.to_json()}
            return ResilienceVerdict(prop=B3_AVAILABILITY, method=method, holds=False,
                                     witness=witness, checked=checked_total)
    return ResilienceVerdict(prop=B3_AVAILABILITY, method=method, holds=True,
                             checked=checked_total)


# ---------------------------------------------------------------------------
# witness re-validation


def verify_witness(system: GridSystem, witness: dict) -> bool:
    """Re-check a reported witness by direct recount."""
    kind = witness.get("kind")
    uni = system.universe
    if kind == "q3_cover":
        cover = 0
        for data in witness["descriptors"]:
            desc = FailproneDescriptor.from_json(data)
            if desc.belief != witness["belief"]:
                return False
            cover |= materialize(system, desc).mask
        return cover == uni.full_mask
    if kind == "b3_cover":
        descs = (FailproneDescriptor.from_json(witness["f_i"]),
                 FailproneDescriptor.from_json(witness["f_j"]),
                 FailproneDescriptor.from_json(witness["f_ij_parents"][0]),
                 FailproneDescriptor.from_json(witness["f_ij_parents"][1]))
        union = _union_of_configuration(system, descs)
        return len(union) == system.n
    if kind == "quorum_containment":
        desc_i = FailproneDescriptor.from_json(witness["q_i_complement"])
        desc_j = FailproneDescriptor.from_json(witness["q_j_complement"])
        parent_i = FailproneDescriptor.from_json(witness["f_ij_parents"][0])
        parent_j = FailproneDescriptor.from_json(witness["f_ij_parents"][1])
        q_i = materialize(system, desc_i).complement()
        q_j = materialize(system, desc_j).complement()
        f_ij = materialize(system, parent_i) & materialize(system, parent_j)
        i, j = witness["i"], witness["j"]
        if not (closure_contains(system, i, f_ij) and closure_contains(system, j, f_ij)):
            return False
        return (q_i & q_j).issubset(f_ij)
    if kind == "availability_gap":
        desc = FailproneDescriptor.from_json(witness["descriptor"])
        fset = materialize(system, desc)
        return bool(fset)
    raise ValueError(f"unknown witness kind {kind!r}")
