"""Analysis of concrete fault scenarios against a grid system.

Given an actual fault set and each correct process's chosen belief, this
classifies processes as wise (their assumption anticipated the faults) or
naive, checks per-process availability, and looks for quorum pairs whose
intersection is swallowed by the fault set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from . import _cells
from ._cells import PairGeometry
from .failprone import (
    GridSystem,
    closure_contains,
    covering_descriptor,
    enumerate_failprone,
    materialize,
)
from .universe import AttributeSchema, ProcessSet

FAULTY = "FAULTY"
WISE = "WISE"
NAIVE = "NAIVE"


@dataclass(frozen=True)
class Scenario:
    """A fault set plus every process's chosen belief attribute."""

    system: GridSystem
    default_belief: int
    belief_overrides: tuple[tuple[int, int], ...]
    faults: ProcessSet

    @classmethod
    def build(cls, system: GridSystem, faults: ProcessSet,
              default_belief: int = 0,
              belief_overrides: Mapping[int, int] | None = None) -> "Scenario":
        n, d = system.n, system.d
        if faults.mask & ~system.universe.full_mask:
            raise ValueError("fault set contains out-of-range processes")
        if not 0 <= default_belief < d:
            raise ValueError(f"default belief {default_belief} out of range")
        overrides = tuple(sorted((belief_overrides or {}).items()))
        for pid, belief in overrides:
            if not 0 <= pid < n:
                raise ValueError(f"process id {pid} out of range")
            if not 0 <= belief < d:
                raise ValueError(f"belief {belief} out of range for process {pid}")
        return cls(system=system, default_belief=default_belief,
                   belief_overrides=overrides, faults=faults)

    def belief_of(self, pid: int) -> int:
        for p, belief in self.belief_overrides:
            if p == pid:
                return belief
        return self.default_belief

    @classmethod
    def from_json(cls, data: Mapping) -> "Scenario":
        schema = AttributeSchema.from_json(data["schema"])
        system = GridSystem(schema)
        beliefs = data.get("beliefs", {"default": 0})
        default = int(beliefs.get("default", 0))
        overrides = {int(pid): int(b) for pid, b in beliefs.items() if pid != "default"}
        faults = system.universe.process_set(int(p) for p in data.get("faults", []))
        return cls.build(system, faults, default_belief=default,
                         belief_overrides=overrides)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class ProcessVerdict:
    pid: int
    belief: int
    status: str
    availability_ok: bool | None = None
    quorum_witness: dict | None = None

    def to_json(self) -> dict:
        out = {"pid": self.pid, "belief": self.belief, "status": self.status}
        if self.availability_ok is not None:
            out["availability_ok"] = self.availability_ok
        if self.quorum_witness is not None:
            out["quorum_witness"] = self.quorum_witness
        return out


def classify(scenario: Scenario) -> list[ProcessVerdict]:
    """FAULTY / WISE / NAIVE verdict for every process.

    Wisdom of a correct process depends only on its belief: the fault set
    must fit inside some maximal failprone set of that belief.
    """
    system = scenario.system
    wise_by_belief = {b: closure_contains(system, b, scenario.faults)
                      for b in range(system.d)}
    out = []
    for pid in range(system.n):
        belief = scenario.belief_of(pid)
        if pid in scenario.faults:
            status = FAULTY
        elif wise_by_belief[belief]:
            status = WISE
        else:
            status = NAIVE
        out.append(ProcessVerdict(pid=pid, belief=belief, status=status))
    return out


def check_availability(scenario: Scenario) -> list[ProcessVerdict]:
    """Per-process availability of a fault-avoiding canonical quorum.

    A canonical quorum avoids the fault set exactly when its complement
    failprone set contains it, so wise processes get a constructive quorum
    witness and naive processes have none.
    """
    system = scenario.system
    witnesses: dict[int, dict | None] = {}
    for b in range(system.d):
        if closure_contains(system, b, scenario.faults):
            desc = covering_descriptor(system, b, scenario.faults)
            quorum = materialize(system, desc).complement()
            if not quorum.isdisjoint(scenario.faults):
                raise AssertionError("availability witness failed its recount")
            witnesses[b] = {"quorum_complement": desc.to_json()}
        else:
            witnesses[b] = None
    out = []
    for verdict in classify(scenario):
        if verdict.status == FAULTY:
            out.append(verdict)
            continue
        witness = witnesses[verdict.belief]
        out.append(ProcessVerdict(
            pid=verdict.pid, belief=verdict.belief, status=verdict.status,
            availability_ok=witness is not None, quorum_witness=witness,
        ))
    return out


@dataclass(frozen=True)
class SafetyReport:
    """Whether some canonical quorum pair intersects inside the fault set."""

    i: int
    j: int
    fault_count: int
    fault_in_joint_closure: bool
    violation_exists: bool
    method: str
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "i": self.i, "j": self.j,
            "fault_count": self.fault_count,
            "fault_in_joint_closure": self.fault_in_joint_closure,
            "violation_exists": self.violation_exists,
            "method": self.method,
            "witness": self.witness,
        }


#: Literal quorum-pair enumeration cap for pairwise safety.
SAFETY_PAIR_CAP = 10**6


def check_pairwise_safety(scenario: Scenario, i: int, j: int) -> SafetyReport:
    """Search for quorums Q_i, Q_j with Q_i ∩ Q_j inside the fault set.

    Equivalent to two failprone sets completing the fault set to a cover
    of the universe.  Violations can only exist when the fault set escapes
    the joint closure; reports for such fault sets are informational.
    """
    if i == j:
        raise ValueError("pairwise safety needs two distinct beliefs")
    system = scenario.system
    faults = scenario.faults
    in_closure = (closure_contains(system, i, faults)
                  and closure_contains(system, j, faults))
    ci, cj = system.descriptor_count(i), system.descriptor_count(j)
    full_mask = system.universe.full_mask
    if ci * cj <= SAFETY_PAIR_CAP:
        masks_j = [materialize(system, d).mask for d in enumerate_failprone(system, j)]
        fmask = faults.mask
        for desc_i in enumerate_failprone(system, i):
            mask_i = materialize(system, desc_i).mask
            for mask_j in masks_j:
                if mask_i | mask_j | fmask == full_mask:
                    witness = {"f_i_complement": desc_i.to_json(),
                               "faults": faults.ids()}
                    return SafetyReport(i=i, j=j, fault_count=len(faults),
                                        fault_in_joint_closure=in_closure,
                                        violation_exists=True, method="EXHAUSTIVE",
                                        witness=witness)
        return SafetyReport(i=i, j=j, fault_count=len(faults),
                            fault_in_joint_closure=in_closure,
                            violation_exists=False, method="EXHAUSTIVE")
    geom = PairGeometry.of(system, i, j)
    uni = system.universe
    fixed_counts = {}
    for a in range(geom.k_i):
        col = uni.value_mask(i, a)
        for b in range(geom.k_j):
            cnt = (faults.mask & col & uni.value_mask(j, b)).bit_count()
            if cnt:
                fixed_counts[(a, b)] = cnt
    feasible, _, _ = _cells.cover_feasible_with_fixed_faults(geom, fixed_counts)
    return SafetyReport(i=i, j=j, fault_count=len(faults),
                        fault_in_joint_closure=in_closure,
                        violation_exists=feasible, method="EXHAUSTIVE")
