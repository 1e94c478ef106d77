"""Process universes spanned by qualitative attributes.

A universe is the full grid ``A_1 x ... x A_d`` of attribute-value
combinations with exactly one process per combination.  Processes are
identified by a mixed-radix encoding of their coordinate tuple (attribute
order as given by the schema, last attribute varying fastest), and subsets
of the universe are stored as bitmasks over those process ids.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Mapping

#: Attributes with fewer values than this add no expressiveness; analysis
#: operations reject them, construction merely warns.
MIN_ANALYSIS_CARDINALITY = 4


class CardinalityWarning(UserWarning):
    """A schema attribute has fewer than four values."""


class UnsupportedCardinality(ValueError):
    """An analysis operation requires every attribute cardinality to be >= 4."""


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attributes, each with an ordered tuple of value names."""

    attributes: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        if len(self.attributes) < 1:
            raise ValueError("schema needs at least one attribute")
        names = [name for name, _ in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be distinct")
        for name, values in self.attributes:
            if len(values) == 0:
                raise ValueError(f"attribute {name!r} has an empty value list")
            if len(set(values)) != len(values):
                raise ValueError(f"attribute {name!r} has duplicate values")
        small = [name for name, values in self.attributes
                 if len(values) < MIN_ANALYSIS_CARDINALITY]
        if small:
            warnings.warn(
                f"attributes {small} have cardinality < {MIN_ANALYSIS_CARDINALITY}; "
                "analysis operations will reject this schema",
                CardinalityWarning,
                stacklevel=2,
            )

    @property
    def d(self) -> int:
        return len(self.attributes)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(values) for _, values in self.attributes)

    @property
    def n(self) -> int:
        return prod(self.cardinalities)

    def k(self, j: int) -> int:
        return len(self.attributes[j][1])

    def attribute_name(self, j: int) -> str:
        return self.attributes[j][0]

    def value_name(self, j: int, v: int) -> str:
        return self.attributes[j][1][v]

    def check_analysis_ready(self) -> None:
        """Raise UnsupportedCardinality unless every k_j >= 4."""
        for j, k in enumerate(self.cardinalities):
            if k < MIN_ANALYSIS_CARDINALITY:
                raise UnsupportedCardinality(
                    f"attribute {self.attribute_name(j)!r} has cardinality {k} < "
                    f"{MIN_ANALYSIS_CARDINALITY}"
                )

    @classmethod
    def from_cardinalities(cls, ks: Iterable[int]) -> "AttributeSchema":
        """Anonymous schema with attributes A1.. and values v0..; handy for sweeps."""
        return cls(tuple(
            (f"A{j + 1}", tuple(f"v{v}" for v in range(k)))
            for j, k in enumerate(ks)
        ))

    @classmethod
    def equal(cls, d: int, k: int) -> "AttributeSchema":
        return cls.from_cardinalities([k] * d)

    def to_json(self) -> dict:
        return {"attributes": [{"name": name, "values": list(values)}
                               for name, values in self.attributes]}

    @classmethod
    def from_json(cls, data: Mapping) -> "AttributeSchema":
        try:
            attrs = tuple(
                (entry["name"], tuple(entry["values"]))
                for entry in data["attributes"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed schema object: {exc}") from exc
        return cls(attrs)

    @classmethod
    def load(cls, path) -> "AttributeSchema":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Predicate:
    """Conjunction of per-attribute membership constraints.

    ``constraints`` maps an attribute index to the set of allowed value
    indices for that attribute; unmentioned attributes are unconstrained.
    """

    constraints: tuple[tuple[int, frozenset[int]], ...]

    @classmethod
    def of(cls, mapping: Mapping[int, Iterable[int]]) -> "Predicate":
        return cls(tuple(sorted(
            (j, frozenset(values)) for j, values in mapping.items()
        )))

    @classmethod
    def empty(cls) -> "Predicate":
        return cls(())

    def validate(self, schema: AttributeSchema) -> None:
        seen = set()
        for j, values in self.constraints:
            if not 0 <= j < schema.d:
                raise IndexError(f"attribute index {j} out of range")
            if j in seen:
                raise ValueError(f"attribute {j} constrained twice")
            seen.add(j)
            k = schema.k(j)
            for v in values:
                if not 0 <= v < k:
                    raise IndexError(f"value index {v} out of range for attribute {j}")


class Universe:
    """The process grid for a schema, with id <-> coordinate conversion."""

    def __init__(self, schema: AttributeSchema):
        self.schema = schema
        self.n = schema.n
        ks = schema.cardinalities
        strides = [1] * schema.d
        for j in range(schema.d - 2, -1, -1):
            strides[j] = strides[j + 1] * ks[j + 1]
        self.strides = tuple(strides)
        self.full_mask = (1 << self.n) - 1
        self._value_masks: dict[tuple[int, int], int] = {}
        self._slice_ids: dict[tuple[int, int], tuple[int, ...]] = {}

    def coords_to_id(self, coords: Iterable[int]) -> int:
        pid = 0
        for j, c in enumerate(coords):
            if not 0 <= c < self.schema.k(j):
                raise IndexError(f"coordinate {c} out of range for attribute {j}")
            pid += c * self.strides[j]
        return pid

    def id_to_coords(self, pid: int) -> tuple[int, ...]:
        if not 0 <= pid < self.n:
            raise IndexError(f"process id {pid} out of range")
        return tuple((pid // self.strides[j]) % self.schema.k(j)
                     for j in range(self.schema.d))

    def coord(self, pid: int, j: int) -> int:
        return (pid // self.strides[j]) % self.schema.k(j)

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.n))

    def value_mask(self, j: int, v: int) -> int:
        """Bitmask of all processes taking value v for attribute j."""
        key = (j, v)
        mask = self._value_masks.get(key)
        if mask is None:
            inner = self.strides[j]
            period = inner * self.schema.k(j)
            run = ((1 << inner) - 1) << (v * inner)
            mask = 0
            for r in range(self.n // period):
                mask |= run << (r * period)
            self._value_masks[key] = mask
        return mask

    def slice_ids(self, j: int, v: int) -> tuple[int, ...]:
        """Sorted process ids of the subgrid with attribute j fixed to v."""
        key = (j, v)
        ids = self._slice_ids.get(key)
        if ids is None:
            ids = tuple(_iter_bits(self.value_mask(j, v)))
            self._slice_ids[key] = ids
        return ids

    def empty_set(self) -> "ProcessSet":
        return ProcessSet(self, 0)

    def full_set(self) -> "ProcessSet":
        return ProcessSet(self, self.full_mask)

    def process_set(self, ids: Iterable[int]) -> "ProcessSet":
        mask = 0
        for pid in ids:
            if not 0 <= pid < self.n:
                raise IndexError(f"process id {pid} out of range")
            mask |= 1 << pid
        return ProcessSet(self, mask)


def _iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class ProcessSet:
    """Immutable subset of a universe, stored as a bitmask."""

    universe: Universe
    mask: int

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __contains__(self, pid: int) -> bool:
        return bool((self.mask >> pid) & 1)

    def __iter__(self) -> Iterator[int]:
        return _iter_bits(self.mask)

    def ids(self) -> list[int]:
        return list(self)

    def _check(self, other: "ProcessSet") -> None:
        if self.universe.schema != other.universe.schema:
            raise ValueError("process sets belong to different universes")

    def __or__(self, other: "ProcessSet") -> "ProcessSet":
        self._check(other)
        return ProcessSet(self.universe, self.mask | other.mask)

    def __and__(self, other: "ProcessSet") -> "ProcessSet":
        self._check(other)
        return ProcessSet(self.universe, self.mask & other.mask)

    def __sub__(self, other: "ProcessSet") -> "ProcessSet":
        self._check(other)
        return ProcessSet(self.universe, self.mask & ~other.mask)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProcessSet):
            return NotImplemented
        return (self.universe.schema == other.universe.schema
                and self.mask == other.mask)

    def __hash__(self) -> int:
        return hash((self.universe.schema, self.mask))

    def issubset(self, other: "ProcessSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "ProcessSet") -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    def complement(self) -> "ProcessSet":
        return ProcessSet(self.universe, self.universe.full_mask & ~self.mask)

    def __repr__(self) -> str:
        return f"ProcessSet({len(self)}/{self.universe.n})"


def build_universe(schema: AttributeSchema) -> Universe:
    """The full process grid for a schema."""
    return Universe(schema)


def restrict(universe: Universe, pred: Predicate) -> ProcessSet:
    """All processes satisfying every constraint of the predicate."""
    pred.validate(universe.schema)
    mask = universe.full_mask
    for j, values in pred.constraints:
        attr_mask = 0
        for v in values:
            attr_mask |= universe.value_mask(j, v)
        mask &= attr_mask
    return ProcessSet(universe, mask)


def restricted_cardinality(schema: AttributeSchema, pred: Predicate) -> int:
    """Cardinality of a restricted universe, by the product formula.

    Computed exactly in integer arithmetic: n is divisible by the product of
    the constrained attributes' cardinalities because the constrained
    attributes are distinct factors of n.
    """
    pred.validate(schema)
    n = schema.n
    num = 1
    den = 1
    for j, values in pred.constraints:
        num *= len(values)
        den *= schema.k(j)
    total = n * num
    if total % den != 0:
        raise AssertionError("restricted cardinality is not an exact integer")
    return total // den
