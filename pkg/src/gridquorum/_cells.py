"""Cell-level projections for two-belief analyses.

For beliefs ``i != j`` the universe projects onto a ``k_i x k_j`` grid of
cells, each holding ``m = n/(k_i k_j)`` processes.  Everything relevant to
a worst-case union ``F_i ∪ F_j ∪ (F'_i ∩ F'_j)`` is determined by the four
chosen full-value sets (the *skeleton*) plus per-cell placement counts of
the partial budgets; concrete process identities never matter.  Value
permutations within each attribute leave the maximum invariant, so
skeletons reduce to overlap classes ``(|S_i ∩ S'_i|, |S_j ∩ S'_j|)``.

Per class, the exact placement maximum is a small integer program:
placements of the four partial budgets into uncovered cells, capped at the
cell size, with the primed budgets split between direct spending inside
the other belief's full values and paired spending (a unit of joint fault
in a free cell consumes one unit from each primed side).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace as dc_replace
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

CAT_DIRECT_ROWSIDE = 1   # a in CA, b in RF: piece comes from the row-side primed budget
CAT_DIRECT_COLSIDE = 2   # a in CF, b in RB: piece comes from the column-side primed budget
CAT_PAIRED = 3           # a in CF, b in RF: piece pairs both primed budgets


@dataclass(frozen=True)
class PairGeometry:
    """Numeric shape of a two-belief slice, independent of process ids."""

    i: int
    j: int
    k_i: int
    k_j: int
    m: int
    f_i: int
    f_j: int
    a_i: int
    a_j: int

    @classmethod
    def of(cls, system, i: int, j: int) -> "PairGeometry":
        pi, pj = system.params(i), system.params(j)
        return cls(i=i, j=j, k_i=pi.k, k_j=pj.k,
                   m=system.n // (pi.k * pj.k),
                   f_i=pi.f, f_j=pj.f, a_i=pi.alpha, a_j=pj.alpha)

    @property
    def n(self) -> int:
        return self.k_i * self.k_j * self.m

    def overlap_classes(self) -> Iterator[tuple[int, int]]:
        for gi in range(max(0, 2 * self.f_i - self.k_i), self.f_i + 1):
            for gj in range(max(0, 2 * self.f_j - self.k_j), self.f_j + 1):
                yield gi, gj


@dataclass(frozen=True)
class Skeleton:
    """Concrete full-value choices for (F_i, F_j, F'_i, F'_j)."""

    si: tuple[int, ...]
    sj: tuple[int, ...]
    si2: tuple[int, ...]
    sj2: tuple[int, ...]

    def regions(self, geom: PairGeometry):
        """Column/row partition: (CA, CF, RB, RF).

        CA are columns in S'_i only, CF columns in neither, and likewise
        RB/RF for rows.  Columns in S_i and rows in S_j are fully covered.
        """
        si, si2 = set(self.si), set(self.si2)
        sj, sj2 = set(self.sj), set(self.sj2)
        ca = tuple(a for a in range(geom.k_i) if a in si2 and a not in si)
        cf = tuple(a for a in range(geom.k_i) if a not in si and a not in si2)
        rb = tuple(b for b in range(geom.k_j) if b in sj2 and b not in sj)
        rf = tuple(b for b in range(geom.k_j) if b not in sj and b not in sj2)
        return ca, cf, rb, rf


def canonical_skeleton(geom: PairGeometry, gi: int, gj: int) -> Skeleton:
    si = tuple(range(geom.f_i))
    si2 = tuple(range(gi)) + tuple(range(geom.f_i, 2 * geom.f_i - gi))
    sj = tuple(range(geom.f_j))
    sj2 = tuple(range(gj)) + tuple(range(geom.f_j, 2 * geom.f_j - gj))
    return Skeleton(si=si, sj=sj, si2=si2, sj2=sj2)


def uncovered_cells(geom: PairGeometry, sk: Skeleton) -> list[tuple[int, int, int]]:
    """Uncovered cells as (column, row, category)."""
    ca, cf, rb, rf = sk.regions(geom)
    cells = []
    for a in ca:
        for b in rf:
            cells.append((a, b, CAT_DIRECT_ROWSIDE))
    for a in cf:
        for b in rb:
            cells.append((a, b, CAT_DIRECT_COLSIDE))
        for b in rf:
            cells.append((a, b, CAT_PAIRED))
    return cells


def covered_cell_count(geom: PairGeometry, sk: Skeleton) -> int:
    ca, cf, rb, rf = sk.regions(geom)
    uncovered = (len(ca) + len(cf)) * (len(rb) + len(rf)) - len(ca) * len(rb)
    return geom.k_i * geom.k_j - uncovered


Fill = dict[tuple[int, int], tuple[int, int, int]]  # (a, b) -> (x, y, piece)


def _recount_fill(geom: PairGeometry, sk: Skeleton, fill: Fill) -> int:
    """Dumb recount of a placement: budgets re-validated, value recomputed."""
    ca, cf, rb, rf = sk.regions(geom)
    cells = {(a, b): cat for a, b, cat in uncovered_cells(geom, sk)}
    x_spent: dict[int, int] = {a: 0 for a in ca + cf}
    y_spent: dict[int, int] = {b: 0 for b in rb + rf}
    tp_spent: dict[int, int] = {a: 0 for a in cf}
    sp_spent: dict[int, int] = {b: 0 for b in rf}
    total = 0
    for (a, b), (x, y, w) in fill.items():
        cat = cells[(a, b)]
        if min(x, y, w) < 0:
            raise AssertionError("negative placement")
        x_spent[a] += x
        y_spent[b] += y
        if cat == CAT_DIRECT_COLSIDE:
            tp_spent[a] += w
        elif cat == CAT_DIRECT_ROWSIDE:
            sp_spent[b] += w
        else:
            tp_spent[a] += w
            sp_spent[b] += w
        total += min(geom.m, x + y + w)
    if any(v > geom.a_i for v in x_spent.values()):
        raise AssertionError("column partial budget exceeded")
    if any(v > geom.a_j for v in y_spent.values()):
        raise AssertionError("row partial budget exceeded")
    if any(v > geom.a_i for v in tp_spent.values()):
        raise AssertionError("primed column budget exceeded")
    if any(v > geom.a_j for v in sp_spent.values()):
        raise AssertionError("primed row budget exceeded")
    return covered_cell_count(geom, sk) * geom.m + total


_CLASS_CACHE: dict[tuple, tuple[int, Fill]] = {}


def class_max_union(geom: PairGeometry, gi: int, gj: int) -> tuple[int, Fill]:
    """Exact maximum of |F_i ∪ F_j ∪ (F'_i ∩ F'_j)| over one overlap class."""
    key = (geom.k_i, geom.k_j, geom.m, geom.f_i, geom.f_j, geom.a_i, geom.a_j, gi, gj)
    hit = _CLASS_CACHE.get(key)
    if hit is not None:
        return hit
    sk = canonical_skeleton(geom, gi, gj)
    cells = uncovered_cells(geom, sk)
    base = covered_cell_count(geom, sk) * geom.m
    if geom.a_i == 0 and geom.a_j == 0 or not cells:
        result = (base, {})
        _CLASS_CACHE[key] = result
        return result
    fill = _solve_class_milp(geom, sk, cells)
    value = _recount_fill(geom, sk, fill)
    result = (value, fill)
    _CLASS_CACHE[key] = result
    return result


def _solve_class_milp(geom: PairGeometry, sk: Skeleton,
                      cells: list[tuple[int, int, int]]) -> Fill:
    ca, cf, rb, rf = sk.regions(geom)
    m, a_i, a_j = geom.m, geom.a_i, geom.a_j
    nc = len(cells)
    # variable layout: per cell [u, x, y, w]
    nv = 4 * nc
    cost = np.zeros(nv)
    ub = np.zeros(nv)
    for c, (a, b, cat) in enumerate(cells):
        cost[4 * c] = -1.0
        ub[4 * c] = m
        ub[4 * c + 1] = min(m, a_i)
        ub[4 * c + 2] = min(m, a_j)
        if cat == CAT_DIRECT_COLSIDE:
            ub[4 * c + 3] = min(m, a_i)
        elif cat == CAT_DIRECT_ROWSIDE:
            ub[4 * c + 3] = min(m, a_j)
        else:
            ub[4 * c + 3] = min(m, a_i, a_j)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    upper: list[float] = []
    row = 0

    def add_row(entries: list[tuple[int, float]], bound: float) -> None:
        nonlocal row
        for col, val in entries:
            rows.append(row)
            cols.append(col)
            vals.append(val)
        upper.append(bound)
        row += 1

    for c in range(nc):
        add_row([(4 * c, 1.0), (4 * c + 1, -1.0), (4 * c + 2, -1.0), (4 * c + 3, -1.0)], 0.0)
    for a in ca + cf:
        entries = [(4 * c + 1, 1.0) for c, (ca_, _, _) in enumerate(cells) if ca_ == a]
        add_row(entries, float(a_i))
    for b in rb + rf:
        entries = [(4 * c + 2, 1.0) for c, (_, cb, _) in enumerate(cells) if cb == b]
        add_row(entries, float(a_j))
    for a in cf:
        entries = [(4 * c + 3, 1.0) for c, (ca_, _, cat) in enumerate(cells)
                   if ca_ == a and cat in (CAT_DIRECT_COLSIDE, CAT_PAIRED)]
        add_row(entries, float(a_i))
    for b in rf:
        entries = [(4 * c + 3, 1.0) for c, (_, cb, cat) in enumerate(cells)
                   if cb == b and cat in (CAT_DIRECT_ROWSIDE, CAT_PAIRED)]
        add_row(entries, float(a_j))

    matrix = csr_matrix((vals, (rows, cols)), shape=(row, nv))
    res = milp(
        c=cost,
        constraints=LinearConstraint(matrix, -np.inf, np.array(upper)),
        integrality=np.ones(nv),
        bounds=Bounds(np.zeros(nv), ub),
        options={"mip_rel_gap": 0.0},
    )
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"placement optimization failed: {res.message}")
    x = np.rint(res.x).astype(int)
    fill: Fill = {}
    for c, (a, b, _) in enumerate(cells):
        fill[(a, b)] = (int(x[4 * c + 1]), int(x[4 * c + 2]), int(x[4 * c + 3]))
    return fill


def exhaustive_max_union(geom: PairGeometry) -> tuple[int, Skeleton, Fill, int]:
    """Exact maximum over every overlap class; returns (value, skeleton, fill, #classes)."""
    best = -1
    best_sk: Skeleton | None = None
    best_fill: Fill = {}
    checked = 0
    for gi, gj in geom.overlap_classes():
        value, fill = class_max_union(geom, gi, gj)
        checked += 1
        if value > best:
            best = value
            best_sk = canonical_skeleton(geom, gi, gj)
            best_fill = fill
    assert best_sk is not None
    return best, best_sk, best_fill, checked


def transport_max(col_budgets: Sequence[int], row_budgets: Sequence[int],
                  caps: Mapping[tuple[int, int], int]) -> tuple[int, dict[tuple[int, int], tuple[int, int]]]:
    """Maximum placement of line-restricted budgets into capped cells.

    Column budget units may go to any cell of their column index, row
    budgets likewise; cell (ci, ri) absorbs at most ``caps[ci, ri]`` units.
    Returns the optimum and the per-cell (from_column, from_row) split.
    """
    ncol, nrow = len(col_budgets), len(row_budgets)
    cell_list = [(ci, ri) for (ci, ri), cap in sorted(caps.items()) if cap > 0]
    if not cell_list or (not any(col_budgets) and not any(row_budgets)):
        return 0, {}
    src = 0
    col0 = 1
    row0 = col0 + ncol
    cell0 = row0 + nrow
    sink = cell0 + len(cell_list)
    size = sink + 1
    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []

    def edge(u: int, v: int, cap: int) -> None:
        rows.append(u)
        cols.append(v)
        vals.append(cap)

    for ci, budget in enumerate(col_budgets):
        if budget > 0:
            edge(src, col0 + ci, budget)
    for ri, budget in enumerate(row_budgets):
        if budget > 0:
            edge(src, row0 + ri, budget)
    for idx, (ci, ri) in enumerate(cell_list):
        cap = caps[(ci, ri)]
        edge(col0 + ci, cell0 + idx, cap)
        edge(row0 + ri, cell0 + idx, cap)
        edge(cell0 + idx, sink, cap)
    graph = csr_matrix((vals, (rows, cols)), shape=(size, size), dtype=np.int32)
    res = maximum_flow(graph, src, sink)
    flow = res.flow.tocoo()
    from_col = [0] * len(cell_list)
    from_row = [0] * len(cell_list)
    for u, v, f in zip(flow.row, flow.col, flow.data):
        if f <= 0 or not cell0 <= v < sink:
            continue
        if col0 <= u < row0:
            from_col[v - cell0] += int(f)
        elif row0 <= u < cell0:
            from_row[v - cell0] += int(f)
    split: dict[tuple[int, int], tuple[int, int]] = {}
    for idx, (ci, ri) in enumerate(cell_list):
        if from_col[idx] or from_row[idx]:
            split[(ci, ri)] = (from_col[idx], from_row[idx])
    return int(res.flow_value), split


def pair_union_max(geom: PairGeometry) -> int:
    """Exact maximum of |F_i ∪ F_j| (no joint fault involved).

    The full-failure union has constant cardinality; the partial budgets
    add at most a transport optimum over the uncovered block.
    """
    slice_i = geom.m * geom.k_j
    slice_j = geom.m * geom.k_i
    full_union = slice_i * geom.f_i + slice_j * geom.f_j - geom.m * geom.f_i * geom.f_j
    p_i = geom.k_i - geom.f_i
    p_j = geom.k_j - geom.f_j
    caps = {(ci, ri): geom.m for ci in range(p_i) for ri in range(p_j)}
    extra, _ = transport_max([geom.a_i] * p_i, [geom.a_j] * p_j, caps)
    return full_union + extra


def greedy_fill(geom: PairGeometry, sk: Skeleton,
                rng: random.Random | None = None) -> tuple[int, Fill]:
    """Greedy placement for one skeleton: confined budgets first, then an
    exact transport step for the unconfined ones."""
    ca, cf, rb, rf = sk.regions(geom)
    cells = uncovered_cells(geom, sk)
    cell_cat = {(a, b): cat for a, b, cat in cells}
    residual = {(a, b): geom.m for a, b, _ in cells}
    fill: Fill = {(a, b): [0, 0, 0] for a, b, _ in cells}  # type: ignore[misc]
    col_load = {a: 0 for a in ca + cf}
    row_load = {b: 0 for b in rb + rf}
    tp_left = {a: geom.a_i for a in cf}
    sp_left = {b: geom.a_j for b in rf}

    def place_piece(a: int, b: int) -> None:
        fill[(a, b)][2] += 1
        residual[(a, b)] -= 1
        col_load[a] += 1
        row_load[b] += 1

    def balanced_targets(options: list[tuple[int, int]]) -> list[tuple[int, int]]:
        out = [cell for cell in options if residual[cell] > 0]
        if rng is not None:
            rng.shuffle(out)
        out.sort(key=lambda cell: (-residual[cell], row_load[cell[1]], col_load[cell[0]], cell))
        return out

    # direct spending of the primed column budget inside the primed rows
    for _ in range(geom.a_i):
        for a in cf:
            if tp_left[a] == 0:
                continue
            targets = balanced_targets([(a, b) for b in rb])
            if targets:
                place_piece(*targets[0])
                tp_left[a] -= 1
    for _ in range(geom.a_j):
        for b in rf:
            if sp_left[b] == 0:
                continue
            targets = balanced_targets([(a, b) for a in ca])
            if targets:
                place_piece(*targets[0])
                sp_left[b] -= 1
    # paired spending in free cells consumes both primed budgets
    progress = True
    while progress:
        progress = False
        for a in cf:
            if tp_left[a] == 0:
                continue
            targets = balanced_targets([(a, b) for b in rf if sp_left[b] > 0])
            if targets:
                _, b = targets[0]
                place_piece(a, b)
                tp_left[a] -= 1
                sp_left[b] -= 1
                progress = True
    # unconfined budgets placed optimally on whatever capacity remains
    cols_idx = {a: ci for ci, a in enumerate(ca + cf)}
    rows_idx = {b: ri for ri, b in enumerate(rb + rf)}
    caps = {(cols_idx[a], rows_idx[b]): residual[(a, b)]
            for (a, b) in residual if residual[(a, b)] > 0}
    _, split = transport_max([geom.a_i] * len(cols_idx), [geom.a_j] * len(rows_idx), caps)
    inv_cols = {ci: a for a, ci in cols_idx.items()}
    inv_rows = {ri: b for b, ri in rows_idx.items()}
    for (ci, ri), (from_col, from_row) in split.items():
        a, b = inv_cols[ci], inv_rows[ri]
        fill[(a, b)][0] += from_col
        fill[(a, b)][1] += from_row
    final: Fill = {cell: tuple(counts) for cell, counts in fill.items()}  # type: ignore[assignment]
    value = _recount_fill(geom, sk, final)
    return value, final


def _random_skeleton(geom: PairGeometry, rng: random.Random) -> Skeleton:
    si = tuple(sorted(rng.sample(range(geom.k_i), geom.f_i)))
    sj = tuple(sorted(rng.sample(range(geom.k_j), geom.f_j)))
    si2 = tuple(sorted(rng.sample(range(geom.k_i), geom.f_i)))
    sj2 = tuple(sorted(rng.sample(range(geom.k_j), geom.f_j)))
    return Skeleton(si=si, sj=sj, si2=si2, sj2=sj2)


def _skeleton_neighbors(geom: PairGeometry, sk: Skeleton) -> Iterator[Skeleton]:
    """Single-value swaps on each of the four full-value choices."""
    fields = [("si", geom.k_i), ("sj", geom.k_j), ("si2", geom.k_i), ("sj2", geom.k_j)]
    for name, k in fields:
        current = getattr(sk, name)
        inside = set(current)
        for out_v in current:
            for in_v in range(k):
                if in_v in inside:
                    continue
                replacement = tuple(sorted([v for v in current if v != out_v] + [in_v]))
                yield dc_replace(sk, **{name: replacement})


#: Neighbor evaluations per local-search round; keeps large grids tractable.
_SWAP_SAMPLE = 48


def adversarial_search(geom: PairGeometry, effort: int = 64,
                       seed: int = 0) -> tuple[int, Skeleton, Fill]:
    """Greedy worst-case construction with seeded restarts and swap search.

    Results are legal configurations, hence lower bounds on the true
    maximum union.  ``effort`` counts random restarts beyond the
    deterministic proof-guided start (disjoint full-value choices);
    effort 0 runs that single greedy pass with no local search.
    """
    rng = random.Random(seed)
    starts = [canonical_skeleton(geom, 0, 0)]
    for _ in range(max(0, effort)):
        starts.append(_random_skeleton(geom, rng))
    best_value = -1
    best_sk = starts[0]
    best_fill: Fill = {}
    for start in starts:
        value, fill = greedy_fill(geom, start, None)
        sk = start
        if effort > 0:
            rounds = 0
            improved = True
            while improved and rounds < 6 and value < geom.n:
                improved = False
                rounds += 1
                neighbors = list(_skeleton_neighbors(geom, sk))
                rng.shuffle(neighbors)
                for cand in neighbors[:_SWAP_SAMPLE]:
                    cand_value, cand_fill = greedy_fill(geom, cand, None)
                    if cand_value > value:
                        value, fill, sk = cand_value, cand_fill, cand
                        improved = True
                        break
        if value > best_value:
            best_value, best_sk, best_fill = value, sk, fill
        if best_value >= geom.n:
            break
    return best_value, best_sk, best_fill


def cover_feasible_with_fixed_faults(geom: PairGeometry, fixed_counts: Mapping[tuple[int, int], int],
                                     ) -> tuple[bool, Skeleton | None, Fill | None]:
    """Whether some (F_i, F_j) completes a fixed fault pattern to cover P.

    ``fixed_counts[(a, b)]`` is the number of already-faulty processes in
    cell (a, b).  The fixed set breaks value symmetry, so all full-value
    choices are enumerated; deficits are then a transport feasibility
    problem.
    """
    for si in itertools.combinations(range(geom.k_i), geom.f_i):
        si_set = set(si)
        for sj in itertools.combinations(range(geom.k_j), geom.f_j):
            sj_set = set(sj)
            open_cols = [a for a in range(geom.k_i) if a not in si_set]
            open_rows = [b for b in range(geom.k_j) if b not in sj_set]
            caps: dict[tuple[int, int], int] = {}
            deficit_total = 0
            for ci, a in enumerate(open_cols):
                for ri, b in enumerate(open_rows):
                    deficit = geom.m - fixed_counts.get((a, b), 0)
                    if deficit > 0:
                        caps[(ci, ri)] = deficit
                        deficit_total += deficit
            if deficit_total == 0:
                return True, Skeleton(si=si, sj=sj, si2=si, sj2=sj), {}
            flow, split = transport_max([geom.a_i] * len(open_cols),
                                        [geom.a_j] * len(open_rows), caps)
            if flow == deficit_total:
                fill: Fill = {}
                for (ci, ri), (from_col, from_row) in split.items():
                    fill[(open_cols[ci], open_rows[ri])] = (from_col, from_row, 0)
                return True, Skeleton(si=si, sj=sj, si2=si, sj2=sj), fill
    return False, None, None
