"""Shared brute-force oracles, kept independent of the code paths they check."""

from __future__ import annotations

import pytest

from gridquorum import AttributeSchema, GridSystem
from gridquorum.failprone import enumerate_failprone, materialize


def system_for(*ks: int, overrides: dict | None = None) -> GridSystem:
    system = GridSystem(AttributeSchema.from_cardinalities(ks))
    for belief, kv in (overrides or {}).items():
        system = system.with_overrides(belief, f=kv.get("f"), alpha=kv.get("alpha"))
    return system


def all_masks(system: GridSystem, i: int) -> list[int]:
    return [materialize(system, d).mask for d in enumerate_failprone(system, i)]


def maximal_joint_masks(system: GridSystem, i: int, j: int) -> list[int]:
    """Inclusion-maximal pairwise intersections, by raw enumeration."""
    inters = {mi & mj for mi in all_masks(system, i) for mj in all_masks(system, j)}
    ordered = sorted(inters, key=lambda m: (-m.bit_count(), m))
    kept: list[int] = []
    for m in ordered:
        if not any(m & ~o == 0 for o in kept):
            kept.append(m)
    return kept


def brute_b3_max_union(system: GridSystem, i: int, j: int) -> int:
    """Raw maximum of |F_i ∪ F_j ∪ F_ij| over descriptor quadruples."""
    joint = maximal_joint_masks(system, i, j)
    best = -1
    for mi in all_masks(system, i):
        for mj in all_masks(system, j):
            base = mi | mj
            for fij in joint:
                best = max(best, (base | fij).bit_count())
    return best


def brute_closure_member(system: GridSystem, i: int, mask: int) -> bool:
    """Subset-of-some-maximal-set test by raw enumeration."""
    return any(mask & ~m == 0 for m in all_masks(system, i))


@pytest.fixture(scope="session")
def sys44() -> GridSystem:
    return system_for(4, 4)


@pytest.fixture(scope="session")
def sys45() -> GridSystem:
    return system_for(4, 5)


@pytest.fixture(scope="session")
def sys55() -> GridSystem:
    return system_for(5, 5)


@pytest.fixture(scope="session")
def sys77() -> GridSystem:
    return system_for(7, 7)


@pytest.fixture(scope="session")
def sys444() -> GridSystem:
    return system_for(4, 4, 4)
