"""Exact maximum-weight node-disjoint packing of enumerated candidates.

Both the branch-and-bound search and the exhaustive oracle optimize the same
total order: objective first, then number of transplants, then the
lexicographically smallest sorted tuple of candidate indices.  Objectives are
correctly-rounded sums (``math.fsum``), so a selection's score does not
depend on the order its candidates were examined in, and the two solvers
agree bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .model import CHAIN, CYCLE, Candidate, NdadNode, PairNode, Selection

DEFAULT_TIMEOUT = 60.0
BRUTE_FORCE_MAX_CANDIDATES = 25

_OBJ_EPS = 1e-9  # pruning margin; absorbs float rounding in additive bounds
_TIME_CHECK_MASK = 0xFFF
_LP_BOUND_MIN_CANDIDATES = 192  # below this, the search needs no LP help


class SolverTimeout(RuntimeError):
    """The search exceeded its deadline; no suboptimal answer is returned."""


class InstanceTooLarge(ValueError):
    """The exhaustive oracle refuses instances it cannot enumerate."""


@dataclass(frozen=True)
class PackingInstance:
    """Candidates plus the node universe they draw from."""

    pairs: tuple[PairNode, ...]
    ndads: tuple[NdadNode, ...]
    candidates: tuple[Candidate, ...]

    def __post_init__(self) -> None:
        universe = {n.id for n in self.pairs} | {n.id for n in self.ndads}
        if len(universe) != len(self.pairs) + len(self.ndads):
            raise ValueError("duplicate node ids in instance")
        for cand in self.candidates:
            for nid in cand.node_ids:
                if nid not in universe:
                    raise ValueError(f"candidate references unknown node {nid}")

    @classmethod
    def from_graph(cls, graph, candidates) -> "PackingInstance":
        pairs = tuple(graph.pairs[i] for i in sorted(graph.pairs))
        ndads = tuple(graph.ndads[i] for i in sorted(graph.ndads))
        return cls(pairs=pairs, ndads=ndads, candidates=tuple(candidates))

    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted([n.id for n in self.pairs] + [n.id for n in self.ndads]))


def _better(
    obj_a: float, trans_a: int, idx_a: tuple[int, ...],
    obj_b: float, trans_b: int, idx_b: tuple[int, ...],
) -> bool:
    """Shared tie-break: higher objective, then more transplants, then lex index."""
    if obj_a != obj_b:
        return obj_a > obj_b
    if trans_a != trans_b:
        return trans_a > trans_b
    return idx_a < idx_b


def _selection_from(inst: PackingInstance, chosen: tuple[int, ...]) -> Selection:
    cands = tuple(inst.candidates[i] for i in chosen)
    objective = math.fsum(inst.candidates[i].weight for i in chosen)
    return Selection(candidates=cands, objective=objective)


def _bitmaps(inst: PackingInstance):
    """Node-id -> bit position, candidate masks, patient counts."""
    bit_of = {nid: i for i, nid in enumerate(inst.node_ids())}
    masks = []
    pats = []
    for cand in inst.candidates:
        m = 0
        for nid in cand.node_ids:
            b = 1 << bit_of[nid]
            if m & b:
                raise ValueError(f"candidate repeats node {nid}")
            m |= b
        masks.append(m)
        pats.append(cand.n_patients)
    pair_mask = 0
    for p in inst.pairs:
        pair_mask |= 1 << bit_of[p.id]
    return masks, pats, pair_mask


def _components(indices: list[int], masks: list[int]) -> list[list[int]]:
    """Group candidates that share nodes; components ordered by first index."""
    parent = {i: i for i in indices}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}  # bit position -> representative candidate
    for i in indices:
        m = masks[i]
        while m:
            low = m & -m
            bit = low.bit_length() - 1
            m ^= low
            if bit in owner:
                ri, rj = find(i), find(owner[bit])
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            else:
                owner[bit] = i
    groups: dict[int, list[int]] = {}
    for i in indices:
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups)]


def _dual_prices(
    bits: list[int], masks: list[int], weights: list[float]
) -> dict[int, float] | None:
    """Dual-feasible node prices for the packing relaxation, or None.

    Solves min sum(lam) s.t. sum_{v in c} lam_v >= w_c, lam >= 0 and repairs
    any float slack upward, so sum of prices over free nodes always dominates
    the best packing of the remaining candidates.
    """
    try:
        from scipy.optimize import linprog
        from scipy.sparse import csr_matrix
    except ImportError:
        return None
    col_of = {bit: i for i, bit in enumerate(bits)}
    rows: list[int] = []
    cols: list[int] = []
    rhs: list[float] = []
    r = 0
    for m, wc in zip(masks, weights):
        if wc <= 0.0:
            continue
        mm = m
        while mm:
            low = mm & -mm
            rows.append(r)
            cols.append(col_of[low.bit_length() - 1])
            mm ^= low
        rhs.append(wc)
        r += 1
    if r == 0:
        return {bit: 0.0 for bit in bits}
    mat = csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(r, len(bits))
    )
    res = linprog(
        c=np.ones(len(bits)),
        A_ub=-mat,
        b_ub=-np.asarray(rhs),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        return None
    lam = np.maximum(res.x, 0.0)
    cover = mat @ lam
    viol = float(np.max(np.asarray(rhs) - cover, initial=0.0))
    # Every candidate spans >= 2 nodes, so a uniform bump of viol/2 restores
    # feasibility; the extra margin absorbs summation rounding at use sites.
    lam += max(viol, 0.0) / 2.0 + 1e-9
    return {bit: float(v) for bit, v in zip(bits, lam)}


class _Incumbent:
    __slots__ = ("obj", "trans", "idx")

    def __init__(self) -> None:
        self.obj = 0.0
        self.trans = 0
        self.idx: tuple[int, ...] = ()

    def offer(self, obj: float, trans: int, idx: tuple[int, ...]) -> None:
        if _better(obj, trans, idx, self.obj, self.trans, self.idx):
            self.obj, self.trans, self.idx = obj, trans, idx


class _ComponentSearch:
    """Three-phase exact search over one conflict component.

    Phase 1 finds the maximum objective, phase 2 the maximum transplant count
    at that objective, phase 3 the lexicographically smallest index set
    achieving both.  Splitting the tie-break this way lets every phase prune
    on equality, which collapses the huge tie plateaus of unit-weight
    instances.
    """

    def __init__(
        self,
        inst: PackingInstance,
        comp: list[int],
        masks: list[int],
        pats: list[int],
        pair_mask: int,
        deadline: float | None,
    ) -> None:
        self.comp = comp
        self.deadline = deadline
        n = len(comp)
        self.n = n
        self.w = [inst.candidates[i].weight for i in comp]
        self.cmask = [masks[i] for i in comp]
        self.cpats = [pats[i] for i in comp]
        comp_nodes = 0
        for m in self.cmask:
            comp_nodes |= m

        # A candidate's patients are its pair nodes; its weight spread over
        # them never beats each pair's best weight-per-patient, and a
        # packing's patients are disjoint.  Altruists contribute nothing,
        # which keeps chain-heavy instances tight.
        self.pat_masks = []
        for k in range(n):
            pm = self.cmask[k]
            if inst.candidates[comp[k]].kind == CHAIN:
                pm &= pair_mask
            self.pat_masks.append(pm)
        best_density: dict[int, float] = {}
        for k in range(n):
            if self.w[k] <= 0.0:
                continue
            d = self.w[k] / self.cpats[k]
            mm = self.pat_masks[k]
            while mm:
                low = mm & -mm
                bit = low.bit_length() - 1
                mm ^= low
                if d > best_density.get(bit, 0.0):
                    best_density[bit] = d

        # Large components get sharper prices from the LP dual; small ones
        # are cheap enough for the density bound alone.  Bound quality only
        # affects speed, never which selection wins.
        prices: dict[int, float] | None = None
        if n >= _LP_BOUND_MIN_CANDIDATES:
            all_bits = []
            m = comp_nodes
            while m:
                low = m & -m
                all_bits.append(low.bit_length() - 1)
                m ^= low
            prices = _dual_prices(all_bits, self.cmask, self.w)
        if prices is None:
            prices = best_density
        self.price_of = prices
        self.price_bits = [1 << bit for bit in sorted(prices) if prices[bit] > 0.0]
        self.price_val = [prices[bit] for bit in sorted(prices) if prices[bit] > 0.0]
        # Candidates in the avail list never overlap `used`, so the price
        # bound after including k is exactly the current bound minus this
        # static per-candidate price mass.
        self.lamsum = []
        for k in range(n):
            s = 0.0
            mm = self.cmask[k]
            while mm:
                low = mm & -mm
                s += prices.get(low.bit_length() - 1, 0.0)
                mm ^= low
            self.lamsum.append(s)

        self.visited = 0
        self.root = [k for k in range(n) if self.w[k] >= 0.0]
        self.root_sum = math.fsum(self.w[k] for k in self.root)
        self.root_cover = 0
        for k in self.root:
            self.root_cover |= self.pat_masks[k]

    def _tick(self) -> None:
        self.visited += 1
        if self.deadline is not None and self.visited & _TIME_CHECK_MASK == 0:
            if time.monotonic() > self.deadline:
                raise SolverTimeout(
                    f"packing search exceeded deadline after {self.visited} nodes"
                )

    def _price_bound(self, used: int) -> float:
        dens = 0.0
        for bmask, d in zip(self.price_bits, self.price_val):
            if not used & bmask:
                dens += d
        return dens

    def _children(self, avail: list[int], idx: int, next_used: int):
        """Compatible tail after including avail[idx]: list, weight, coverage."""
        child: list[int] = []
        child_sum = 0.0
        child_cover = 0
        cmask = self.cmask
        pat_masks = self.pat_masks
        w = self.w
        for j in avail[idx + 1:]:
            if not cmask[j] & next_used:
                child.append(j)
                child_sum += w[j]
                child_cover |= pat_masks[j]
        return child, child_sum, child_cover & ~next_used

    def greedy_seed(self) -> list[int]:
        order = sorted(
            (k for k in range(self.n) if self.w[k] > 0.0),
            key=lambda k: (-self.w[k] / self.cpats[k], k),
        )
        used = 0
        seed: list[int] = []
        for k in order:
            if not self.cmask[k] & used:
                used |= self.cmask[k]
                seed.append(k)
        seed.sort()
        return seed

    # Phases 1 and 2 have no lexicographic component, so they branch on the
    # lowest node still coverable: either one of its candidates is selected,
    # or the node goes unmatched and its price leaves the bound.  Every
    # packing is reached exactly once either way.

    def best_objective(self) -> tuple[float, list[int]]:
        """Phase 1: maximum objective.  Prunes on <=, so ties are not chased.

        Raw-sum pruning is exact for integer weights; a miss would need a
        distinct selection within one rounding ulp of the optimum.
        """
        w, cmask = self.w, self.cmask
        price_of, lamsum = self.price_of, self.lamsum
        seed = self.greedy_seed()
        best_obj = max(math.fsum(w[k] for k in seed), 0.0)
        best: list[int] = seed
        chosen: list[int] = []

        def rec(avail: list[int], pb: float, w_run: float) -> None:
            nonlocal best_obj, best
            self._tick()
            if w_run > best_obj - _OBJ_EPS:
                obj = math.fsum(w[k] for k in chosen)
                if obj > best_obj:
                    best_obj, best = obj, list(chosen)
            if not avail or w_run + pb <= best_obj:
                return
            cover = 0
            for k in avail:
                cover |= cmask[k]
            vbit = cover & -cover
            covering = []
            others = []
            for k in avail:
                (covering if cmask[k] & vbit else others).append(k)
            for k in covering:
                w_next = w_run + w[k]
                pb_next = pb - lamsum[k]
                if w_next + pb_next <= best_obj:
                    continue
                mask_k = cmask[k]
                child = [j for j in avail if not cmask[j] & mask_k]
                chosen.append(k)
                rec(child, pb_next, w_next)
                chosen.pop()
            pb_ex = pb - price_of.get(vbit.bit_length() - 1, 0.0)
            if w_run + pb_ex > best_obj:
                rec(others, pb_ex, w_run)

        rec(self.root, math.fsum(self.price_val), 0.0)
        return best_obj, best

    def best_transplants(self, obj_star: float, seed: list[int]) -> tuple[int, list[int]]:
        """Phase 2: maximum transplants among selections hitting obj exactly."""
        w, cmask, cpats = self.w, self.cmask, self.cpats
        pat_masks = self.pat_masks
        price_of, lamsum = self.price_of, self.lamsum
        best_trans = sum(cpats[k] for k in seed)
        best = seed
        chosen: list[int] = []

        def rec(avail: list[int], pb: float, w_run: float, t_run: int) -> None:
            nonlocal best_trans, best
            self._tick()
            if t_run > best_trans and w_run > obj_star - _OBJ_EPS:
                if math.fsum(w[k] for k in chosen) == obj_star:
                    best_trans, best = t_run, list(chosen)
            if not avail:
                return
            if (w_run + pb) * (1 + 1e-12) + 1e-15 < obj_star:
                return
            cover = 0
            pat_cover = 0
            for k in avail:
                cover |= cmask[k]
                pat_cover |= pat_masks[k]
            if t_run + pat_cover.bit_count() <= best_trans:
                return
            vbit = cover & -cover
            covering = []
            others = []
            for k in avail:
                (covering if cmask[k] & vbit else others).append(k)
            for k in covering:
                w_next = w_run + w[k]
                pb_next = pb - lamsum[k]
                if (w_next + pb_next) * (1 + 1e-12) + 1e-15 < obj_star:
                    continue
                mask_k = cmask[k]
                child = [j for j in avail if not cmask[j] & mask_k]
                chosen.append(k)
                rec(child, pb_next, w_next, t_run + cpats[k])
                chosen.pop()
            pb_ex = pb - price_of.get(vbit.bit_length() - 1, 0.0)
            if (w_run + pb_ex) * (1 + 1e-12) + 1e-15 >= obj_star:
                rec(others, pb_ex, w_run, t_run)

        rec(self.root, math.fsum(self.price_val), 0.0, 0)
        return best_trans, best

    # Phase 3: lexicographically smallest index set hitting both targets.
    # Index sets in a subtree extend the current prefix with larger indices,
    # so a prefix already above the incumbent kills the whole subtree.

    def lex_smallest(
        self, obj_star: float, trans_star: int, seed: list[int]
    ) -> tuple[int, ...]:
        w, cmask, cpats = self.w, self.cmask, self.cpats
        comp = self.comp
        best_idx = tuple(comp[k] for k in seed)
        chosen: list[int] = []
        gchosen: list[int] = []

        def rec(
            avail: list[int], pos_sum: float, cover: int,
            used: int, w_run: float, t_run: int,
        ) -> None:
            nonlocal best_idx
            self._tick()
            if t_run == trans_star and w_run > obj_star - _OBJ_EPS:
                idx = tuple(gchosen)
                if idx < best_idx and math.fsum(w[k] for k in chosen) == obj_star:
                    best_idx = idx
            if not avail or t_run > trans_star:
                return
            if tuple(gchosen) > best_idx[: len(gchosen)]:
                return
            if t_run + cover.bit_count() < trans_star:
                return
            pb = self._price_bound(used)
            if (w_run + pb) * (1 + 1e-12) + 1e-15 < obj_star:
                return
            depth = len(gchosen)
            pfx = tuple(gchosen)
            lamsum = self.lamsum
            tail = pos_sum
            for idx_pos, k in enumerate(avail):
                if (w_run + tail) * (1 + 1e-12) + 1e-15 < obj_star:
                    return
                # best_idx may shrink mid-loop, so compare fresh each pass:
                # once the prefix plus this index is lex-beyond it, later
                # (larger) indices are beyond it too.
                if pfx == best_idx[:depth] and (
                    depth >= len(best_idx) or comp[k] > best_idx[depth]
                ):
                    return
                w_next = w_run + w[k]
                t_next = t_run + cpats[k]
                if t_next > trans_star:
                    tail -= w[k]
                    continue
                if (w_next + pb - lamsum[k]) * (1 + 1e-12) + 1e-15 < obj_star:
                    tail -= w[k]
                    continue
                next_used = used | cmask[k]
                child, child_sum, child_cover = self._children(avail, idx_pos, next_used)
                if t_next + child_cover.bit_count() >= trans_star:
                    chosen.append(k)
                    gchosen.append(comp[k])
                    rec(child, child_sum, child_cover, next_used, w_next, t_next)
                    chosen.pop()
                    gchosen.pop()
                tail -= w[k]

        rec(self.root, self.root_sum, self.root_cover, 0, 0.0, 0)
        return best_idx


def _solve_component(
    inst: PackingInstance,
    comp: list[int],
    masks: list[int],
    pats: list[int],
    pair_mask: int,
    deadline: float | None,
) -> tuple[int, ...]:
    """Best selection (by the shared tie-break) among one component's candidates."""
    search = _ComponentSearch(inst, comp, masks, pats, pair_mask, deadline)
    obj_star, witness = search.best_objective()
    trans_star, witness = search.best_transplants(obj_star, witness)
    return search.lex_smallest(obj_star, trans_star, witness)


def solve(inst: PackingInstance, timeout: float | None = DEFAULT_TIMEOUT) -> Selection:
    """Optimal node-disjoint selection under the deterministic tie-break.

    Strictly negative candidates can never improve a selection (dropping one
    raises the objective), so they are pruned at the root; zero-weight
    candidates stay, because the tie-break can pull them in for the extra
    transplants.  Raises :class:`SolverTimeout` rather than ever returning a
    silently suboptimal answer.
    """
    for cand in inst.candidates:
        if not math.isfinite(cand.weight):
            raise ValueError("candidate weights must be finite")
    deadline = None if timeout is None else time.monotonic() + timeout
    masks, pats, pair_mask = _bitmaps(inst)
    active = [i for i, c in enumerate(inst.candidates) if c.weight >= 0.0]
    chosen: list[int] = []
    for comp in _components(active, masks):
        if deadline is not None and time.monotonic() > deadline:
            raise SolverTimeout("packing search exceeded deadline")
        chosen.extend(_solve_component(inst, comp, masks, pats, pair_mask, deadline))
    chosen.sort()
    return _selection_from(inst, tuple(chosen))


def brute_force(inst: PackingInstance) -> Selection:
    """Exhaustive oracle over all node-disjoint subsets; same tie-break as solve."""
    if len(inst.candidates) > BRUTE_FORCE_MAX_CANDIDATES:
        raise InstanceTooLarge(
            f"{len(inst.candidates)} candidates exceed the oracle cap of "
            f"{BRUTE_FORCE_MAX_CANDIDATES}"
        )
    masks, pats, _ = _bitmaps(inst)
    n = len(inst.candidates)
    w = [c.weight for c in inst.candidates]
    inc = _Incumbent()
    chosen: list[int] = []

    def rec(pos: int, used: int, t_run: int) -> None:
        inc.offer(math.fsum(w[k] for k in chosen), t_run, tuple(chosen))
        for k in range(pos, n):
            if masks[k] & used:
                continue
            chosen.append(k)
            rec(k + 1, used | masks[k], t_run + pats[k])
            chosen.pop()

    rec(0, 0, 0)
    return _selection_from(inst, inc.idx)


# ---------------------------------------------------------------------------
# Instance text format: header "N M K", one line per node, one per candidate.
# Floats are written with repr() so a round-trip is bit-exact.
# ---------------------------------------------------------------------------


def export_instance(inst: PackingInstance) -> str:
    lines = [f"{len(inst.pairs)} {len(inst.ndads)} {len(inst.candidates)}"]
    for p in inst.pairs:
        lines.append(f"{p.id} pair {p.donor_blood} {p.patient_blood} {p.cpra!r}")
    for d in inst.ndads:
        lines.append(f"{d.id} ndad {d.donor_blood} - -")
    for c in inst.candidates:
        ids = " ".join(str(i) for i in c.node_ids)
        lines.append(f"{c.kind} {c.weight!r} {ids}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> PackingInstance:
    from .model import BloodType  # local import keeps module load light

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty instance text")
    try:
        n_pairs, n_ndads, n_cands = (int(x) for x in lines[0].split())
    except ValueError:
        raise ValueError(f"malformed header {lines[0]!r}") from None
    if len(lines) != 1 + n_pairs + n_ndads + n_cands:
        raise ValueError(
            f"header promises {n_pairs}+{n_ndads}+{n_cands} lines, "
            f"got {len(lines) - 1}"
        )
    pairs = []
    for ln in lines[1 : 1 + n_pairs]:
        nid, kind, donor, patient, cpra = ln.split()
        if kind != "pair":
            raise ValueError(f"expected a pair line, got {ln!r}")
        pairs.append(
            PairNode(
                id=int(nid),
                donor_blood=BloodType.parse(donor),
                patient_blood=BloodType.parse(patient),
                cpra=float(cpra),
                arrival_period=0,
            )
        )
    ndads = []
    for ln in lines[1 + n_pairs : 1 + n_pairs + n_ndads]:
        nid, kind, donor, _patient, _cpra = ln.split()
        if kind != "ndad":
            raise ValueError(f"expected an ndad line, got {ln!r}")
        ndads.append(
            NdadNode(id=int(nid), donor_blood=BloodType.parse(donor), arrival_period=0)
        )
    cands = []
    for ln in lines[1 + n_pairs + n_ndads :]:
        parts = ln.split()
        kind, weight, ids = parts[0], float(parts[1]), tuple(int(x) for x in parts[2:])
        if kind not in (CYCLE, CHAIN):
            raise ValueError(f"unknown candidate kind in {ln!r}")
        cands.append(Candidate(kind, ids, weight))
    return PackingInstance(pairs=tuple(pairs), ndads=tuple(ndads), candidates=tuple(cands))


def save_instance(inst: PackingInstance, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(export_instance(inst))


def load_instance(path: str) -> PackingInstance:
    with open(path, "r", encoding="ascii") as fh:
        return parse_instance(fh.read())
