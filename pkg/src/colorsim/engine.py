"""Synchronous simulator: graphs, round loop, per-round validation, reports.

The round loop keeps strict barriers (every update reads the previous
round's snapshot) but only re-evaluates vertices whose own state or whose
neighborhood changed; the update rule is uniform and deterministic, so an
untouched vertex provably recomputes its old state.  A full-evaluation
mode exists for cross-checking, and tests assert the two produce
bit-identical reports.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .codec import decode
from .li_rules import NeighborView, RuleFault, init_color, update
from .params import Params
from .ss_rules import AdversarySchedule, Mutation, SSMessage, apply_adversary, ss_check, ss_init, ss_update

TRACE_CELL_LIMIT = 10**7
VIOLATION_DETAIL_CAP = 100


class GraphError(ValueError):
    """Infeasible generator parameters or a malformed graph file."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with stable neighbor ports.

    adjacency[v] is sorted; reverse_ports[v][i] gives v's port index in the
    list of its i-th neighbor, so per-edge state can be exchanged.
    delta is the true maximum degree.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    delta: int
    reverse_ports: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) outside vertex range [0, {n})")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            sets[u].add(v)
            sets[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in sets)
        port_of = [
            {u: i for i, u in enumerate(nbrs)} for nbrs in adjacency
        ]
        reverse_ports = tuple(
            tuple(port_of[u][v] for u in adjacency[v]) for v in range(n)
        )
        delta = max((len(a) for a in adjacency), default=0)
        return cls(n=n, adjacency=adjacency, delta=delta, reverse_ports=reverse_ports)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self):
        for v in range(self.n):
            for u in self.adjacency[v]:
                if u > v:
                    yield (v, u)


def load_edge_list(path: str) -> Graph:
    """Whitespace-separated "u v" pairs, 0-based ids, '#' comments."""
    edges = []
    max_id = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'u v', got {body!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: non-integer vertex id") from exc
            edges.append((u, v))
            max_id = max(max_id, u, v)
    if max_id < 0:
        raise GraphError(f"{path}: no edges")
    return Graph.from_edges(max_id + 1, edges)


GENERATOR_KINDS = ("gnp_capped", "cycle", "complete", "star", "random_tree", "d_regularish")


def gen_graph(kind: str, n: int, delta: int, seed: int = 0) -> Graph:
    """Deterministic graph generators; max degree never exceeds delta."""
    if n < 1:
        raise GraphError("n must be positive")
    if delta < 1 or delta > max(1, n - 1):
        raise GraphError(f"delta {delta} infeasible for n={n}")
    rng = random.Random(seed)
    if kind == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        if delta < 2:
            raise GraphError("cycle needs delta >= 2")
        return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])
    if kind == "complete":
        if delta != n - 1:
            raise GraphError(f"complete graph on {n} vertices has delta {n - 1}, not {delta}")
        return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])
    if kind == "star":
        leaves = min(delta, n - 1)
        return Graph.from_edges(n, [(0, v) for v in range(1, leaves + 1)])
    if kind == "random_tree":
        if n == 1:
            return Graph.from_edges(1, [])
        if delta < 2 and n > 2:
            raise GraphError("random_tree needs delta >= 2 for n > 2")
        deg = [0] * n
        eligible = [0]
        edges = []
        for v in range(1, n):
            while True:
                i = rng.randrange(len(eligible))
                parent = eligible[i]
                if deg[parent] < delta:
                    break
                eligible[i] = eligible[-1]
                eligible.pop()
            edges.append((parent, v))
            deg[parent] += 1
            deg[v] = 1
            if deg[v] < delta:
                eligible.append(v)
            if deg[parent] >= delta:
                eligible.remove(parent)
        return Graph.from_edges(n, edges)
    if kind == "gnp_capped":
        # expected degree ~= delta before capping; cap rejections keep it <= delta
        p = min(1.0, delta / max(1, n - 1))
        deg = [0] * n
        edges = []
        # geometric skip-sampling over the ordered pair list
        total_pairs = n * (n - 1) // 2
        idx = -1
        while True:
            r = rng.random()
            # jump to the next sampled pair
            if p >= 1.0:
                idx += 1
            else:
                idx += 1 + int(math.floor(math.log(1.0 - r) / math.log(1.0 - p)))
            if idx >= total_pairs:
                break
            u = int((1 + math.isqrt(1 + 8 * idx)) // 2)
            v = idx - u * (u - 1) // 2
            if deg[u] < delta and deg[v] < delta:
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
        return Graph.from_edges(n, edges)
    if kind == "d_regularish":
        # circulant with a seeded relabeling: every vertex gets 2*(delta//2)
        # neighbors (plus the antipode when delta is odd and n even)
        if n < 3:
            raise GraphError("d_regularish needs n >= 3")
        label = list(range(n))
        rng.shuffle(label)
        edges = []
        for off in range(1, delta // 2 + 1):
            for v in range(n):
                edges.append((label[v], label[(v + off) % n]))
        if delta % 2 == 1 and n % 2 == 0 and delta // 2 + 1 <= n // 2:
            for v in range(n // 2):
                edges.append((label[v], label[v + n // 2]))
        return Graph.from_edges(n, edges)
    raise GraphError(f"unknown generator kind {kind!r}; choices: {GENERATOR_KINDS}")


# ------------------------------------------------------------------ validation


def verify_proper(graph: Graph, coloring) -> list[tuple[int, int]]:
    """Exact list of monochromatic edges; empty iff the coloring is proper."""
    if len(coloring) != graph.n:
        raise ValueError("coloring must assign every vertex")
    bad = []
    for v in range(graph.n):
        cv = coloring[v]
        for u in graph.adjacency[v]:
            if u > v and coloring[u] == cv:
                bad.append((v, u))
    return bad


def measure_defect(params: Params, graph: Graph, colors, projector: str = "color") -> int:
    """Max over vertices of the number of neighbors sharing the projection.

    projector "color" uses the full color; "a" and "ab" project I2 colors
    onto a and <a, b> (vertices outside I2 are excluded for those).
    """
    if projector not in ("color", "a", "ab"):
        raise ValueError(f"unknown projector {projector!r}")

    def key(c):
        if projector == "color":
            return c
        if not params.ell3 <= c < params.i1_lo:
            return None
        q = decode(params, c)
        return q.a if projector == "a" else (q.a, q.b)

    keys = [key(colors[v]) for v in range(graph.n)]
    worst = 0
    for v in range(graph.n):
        if keys[v] is None:
            continue
        same = sum(1 for u in graph.adjacency[v] if keys[u] == keys[v])
        worst = max(worst, same)
    return worst


# ------------------------------------------------------------------ reports


@dataclass
class RoundRecord:
    round: int
    i1: int
    i2: int
    i3: int
    in_palette: int
    core_pending: int  # vertices still in I1 or in I2 with a >= lambda
    changed: int
    violations: int
    pair_violations: int
    max_c: Optional[int]
    defect_a: Optional[int]
    arbdefect: Optional[int]
    resets: int = 0
    mutations: int = 0

    CSV_FIELDS = (
        "round,i1,i2,i3,in_palette,core_pending,changed,violations,"
        "pair_violations,max_c,defect_a,arbdefect,resets,mutations"
    )

    def csv_row(self) -> str:
        cells = [
            self.round, self.i1, self.i2, self.i3, self.in_palette,
            self.core_pending, self.changed,
            self.violations, self.pair_violations,
            self.max_c if self.max_c is not None else "",
            self.defect_a if self.defect_a is not None else "",
            self.arbdefect if self.arbdefect is not None else "",
            self.resets, self.mutations,
        ]
        return ",".join(str(c) for c in cells)

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "i1": self.i1,
            "i2": self.i2,
            "i3": self.i3,
            "in_palette": self.in_palette,
            "core_pending": self.core_pending,
            "changed": self.changed,
            "violations": self.violations,
            "pair_violations": self.pair_violations,
            "max_c": self.max_c,
            "defect_a": self.defect_a,
            "arbdefect": self.arbdefect,
            "resets": self.resets,
            "mutations": self.mutations,
        }


@dataclass
class BoundCheck:
    name: str
    bound: Optional[int]
    observed: Optional[int]
    ok: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "bound": self.bound, "observed": self.observed, "ok": self.ok}


@dataclass
class RunReport:
    variant: str
    params: Params
    graph_info: dict
    config: dict
    rounds: list[RoundRecord]
    final_colors: list[int]
    completion_round: Optional[int]
    stabilization_round: Optional[int]
    t0: int
    horizon: Optional[int]
    simulated_rounds: int
    fast_forwarded_from: Optional[int]
    k_hat_max: Optional[int]
    k_hat_log: list[tuple[int, int, int]]
    d_resets_after_t0: dict
    violation_edges: list[tuple[int, int, int]]
    bound_checks: list[BoundCheck]
    hard_fault: Optional[dict]
    mutation_log: list[dict]
    trace: Optional[list[list[int]]]

    @property
    def ok(self) -> bool:
        return self.hard_fault is None and all(c.ok for c in self.bound_checks)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "ok": self.ok,
            "params": self.params.to_dict(),
            "graph": self.graph_info,
            "config": self.config,
            "completion_round": self.completion_round,
            "stabilization_round": self.stabilization_round,
            "t0": self.t0,
            "horizon": self.horizon,
            "simulated_rounds": self.simulated_rounds,
            "fast_forwarded_from": self.fast_forwarded_from,
            "k_hat_max": self.k_hat_max,
            "k_hat_log": [list(t) for t in self.k_hat_log[:1000]],
            "d_resets_after_t0": {str(k): v for k, v in self.d_resets_after_t0.items()},
            "violation_edges": [list(t) for t in self.violation_edges],
            "bound_checks": [c.to_dict() for c in self.bound_checks],
            "hard_fault": self.hard_fault,
            "mutations": self.mutation_log,
            "rounds": [r.to_dict() for r in self.rounds],
            "final_colors": self.final_colors,
            "trace": self.trace,
        }


class _Tracker:
    """Incremental per-round bookkeeping shared by both variants."""

    def __init__(self, params: Params, graph: Graph, colors: list[int]):
        self.params = params
        self.graph = graph
        self.colors = colors
        p = params
        self.i1 = self.i2 = self.i3 = self.palette = 0
        self.core_pending = 0  # vertices in I1, or I2 with a >= lam
        for c in colors:
            self._count_color(c, +1)
        self.bad_edges: set[tuple[int, int]] = set()
        self.bad_pairs: set[tuple[int, int]] = set()
        self.c_counts: dict[int, int] = {}
        self._c_of: dict[int, int] = {}
        self.quads: list = [
            decode(params, c) if self._is_i2(c) else None for c in colors
        ]
        self.defect: list[int] = [0] * graph.n
        self.arbdef: list[int] = [0] * graph.n
        self.defect_counts: dict[int, int] = {}
        self.arbdef_counts: dict[int, int] = {}
        for v in range(graph.n):
            self._refresh_vertex(v)
        for v in range(graph.n):
            self._refresh_edges(v)

    # -- phase counters

    def _is_i2(self, c: int) -> bool:
        return self.params.ell3 <= c < self.params.i1_lo

    def _count_color(self, c: int, sign: int):
        p = self.params
        if c < p.ell3:
            self.i3 += sign
            if c <= p.delta:
                self.palette += sign
        elif c < p.i1_lo:
            self.i2 += sign
            if decode(p, c).a >= p.lam:
                self.core_pending += sign
        else:
            self.i1 += sign
            self.core_pending += sign

    # -- per-vertex I2 measurements

    def _vertex_quad(self, v: int):
        return self.quads[v]

    def _bump(self, counter: dict[int, int], value: int, sign: int):
        counter[value] = counter.get(value, 0) + sign
        if counter[value] == 0:
            del counter[value]

    def _refresh_vertex(self, v: int):
        """Recompute v's c value and defect counts from current colors."""
        q = self._vertex_quad(v)
        if q is None and self.defect[v] == 0 and self.arbdef[v] == 0 and v not in self._c_of:
            return  # outside I2 with nothing booked: all measurements stay zero
        old_c = self._c_of.get(v)
        new_c = q.c if q is not None else None
        if old_c is not None:
            self._bump(self.c_counts, old_c, -1)
        if new_c is not None:
            self._bump(self.c_counts, new_c, +1)
        if new_c is None:
            self._c_of.pop(v, None)
        else:
            self._c_of[v] = new_c

        old_d, old_ad = self.defect[v], self.arbdef[v]
        new_d = new_ad = 0
        if q is not None:
            for u in self.graph.adjacency[v]:
                uq = self._vertex_quad(u)
                if uq is not None and uq.a == q.a:
                    new_d += 1
                    if uq.c <= q.c:
                        new_ad += 1
        if old_d:
            self._bump(self.defect_counts, old_d, -1)
        if old_ad:
            self._bump(self.arbdef_counts, old_ad, -1)
        if new_d:
            self._bump(self.defect_counts, new_d, +1)
        if new_ad:
            self._bump(self.arbdef_counts, new_ad, +1)
        self.defect[v] = new_d
        self.arbdef[v] = new_ad

    def _refresh_edges(self, v: int):
        cv = self.colors[v]
        qv = self._vertex_quad(v)
        for u in self.graph.adjacency[v]:
            e = (min(u, v), max(u, v))
            if self.colors[u] == cv:
                self.bad_edges.add(e)
            else:
                self.bad_edges.discard(e)
            qu = self._vertex_quad(u)
            if qv is not None and qu is not None and (qv.a, qv.b) == (qu.a, qu.b):
                self.bad_pairs.add(e)
            else:
                self.bad_pairs.discard(e)

    def apply_changes(self, changed: Iterable[int]):
        """Update all counters after `changed` vertices got new colors.

        Callers must have already swapped the new colors into self.colors
        and passed the old ones via note_color_change."""
        affected = set()
        for v in changed:
            affected.add(v)
            affected.update(self.graph.adjacency[v])
        for v in affected:
            self._refresh_vertex(v)
        for v in changed:
            self._refresh_edges(v)

    def note_color_change(self, v: int, old: int, new: int):
        self._count_color(old, -1)
        self._count_color(new, +1)
        self.quads[v] = decode(self.params, new) if self._is_i2(new) else None

    def snapshot(self, round_no: int, changed: int, resets: int = 0, mutations: int = 0) -> RoundRecord:
        non_fb = not self.params.fallback
        return RoundRecord(
            round=round_no,
            i1=self.i1,
            i2=self.i2,
            i3=self.i3,
            in_palette=self.palette,
            core_pending=self.core_pending,
            changed=changed,
            violations=len(self.bad_edges),
            pair_violations=len(self.bad_pairs),
            max_c=max(self.c_counts) if (non_fb and self.c_counts) else None,
            defect_a=max(self.defect_counts) if (non_fb and self.defect_counts) else (0 if non_fb else None),
            arbdefect=max(self.arbdef_counts) if (non_fb and self.arbdef_counts) else (0 if non_fb else None),
            resets=resets,
            mutations=mutations,
        )


def _holds_from(records: list[RoundRecord], start_round: int, pred) -> bool:
    """True iff pred holds for every record with round >= start_round; rounds
    past the last simulated one repeat the final record (fixpoint tail)."""
    if not records:
        return False
    hit = False
    for r in records:
        if r.round >= start_round:
            hit = True
            if not pred(r):
                return False
    if not hit:
        return pred(records[-1])
    return True


def _li_bound_checks(
    params: Params,
    records: list[RoundRecord],
    completion_round: Optional[int],
    k_hat_max: Optional[int],
    left_palette: bool,
) -> list[BoundCheck]:
    p = params
    checks = []
    total_viol = sum(r.violations for r in records)
    checks.append(BoundCheck("properness-every-round", 0, total_viol, total_viol == 0))
    comp_ok = completion_round is not None and completion_round <= p.li_round_bound
    checks.append(BoundCheck("completion-round", p.li_round_bound, completion_round, comp_ok))
    checks.append(BoundCheck("stays-in-palette", 0, int(left_palette), not left_palette))
    checks.append(
        BoundCheck(
            "core-milestone",
            p.li_core_bound,
            None,
            _holds_from(records, p.li_core_bound, lambda r: r.core_pending == 0),
        )
    )
    checks.append(
        BoundCheck(
            "i3-milestone",
            p.li_i3_bound,
            None,
            _holds_from(records, p.li_i3_bound, lambda r: r.i1 == 0 and r.i2 == 0),
        )
    )
    if not p.fallback:
        pair_viol = sum(r.pair_violations for r in records)
        checks.append(BoundCheck("pair-properness", 0, pair_viol, pair_viol == 0))
        ti_record = next((r for r in records if r.round == p.r_star + 1), None)
        ti_defect = ti_record.defect_a if ti_record else None
        checks.append(
            BoundCheck(
                "transition-in-defect",
                p.rho,
                ti_defect,
                ti_defect is not None and ti_defect <= p.rho,
            )
        )
        worst_arb = max((r.arbdefect or 0) for r in records)
        checks.append(BoundCheck("arbdefect", 2 * p.rho, worst_arb, worst_arb <= 2 * p.rho))
        worst_c = max((r.max_c if r.max_c is not None else 0) for r in records)
        checks.append(BoundCheck("max-c", p.lam + 1, worst_c, worst_c <= p.lam + 1))
        if k_hat_max is not None:
            checks.append(
                BoundCheck("k-hat", p.k_hat_bound, k_hat_max, k_hat_max <= p.k_hat_bound)
            )
    return checks


def _ss_bound_checks(
    params: Params,
    records: list[RoundRecord],
    t0: int,
    stabilization: Optional[int],
    k_hat_max: Optional[int],
    d_resets: dict,
) -> list[BoundCheck]:
    p = params
    checks = []
    late_resets = sum(r.resets for r in records if r.round >= t0 + 2)
    checks.append(BoundCheck("no-resets-after-settle", 0, late_resets, late_resets == 0))
    checks.append(
        BoundCheck(
            "i2i3-milestone",
            t0 + p.ss_i2i3_offset,
            None,
            _holds_from(records, t0 + p.ss_i2i3_offset, lambda r: r.i1 == 0),
        )
    )
    checks.append(
        BoundCheck(
            "core-milestone",
            t0 + p.ss_core_offset,
            None,
            _holds_from(records, t0 + p.ss_core_offset, lambda r: r.core_pending == 0),
        )
    )
    checks.append(
        BoundCheck(
            "i3-milestone",
            t0 + p.ss_i3_offset,
            None,
            _holds_from(records, t0 + p.ss_i3_offset, lambda r: r.i1 == 0 and r.i2 == 0),
        )
    )
    stab_ok = stabilization is not None and stabilization <= t0 + p.ss_stab_offset
    checks.append(
        BoundCheck("stabilization", t0 + p.ss_stab_offset, stabilization, stab_ok)
    )
    if not p.fallback and k_hat_max is not None:
        checks.append(
            BoundCheck("k-hat", p.k_hat_bound, k_hat_max, k_hat_max <= p.k_hat_bound)
        )
    worst_d = max(d_resets.values(), default=0)
    checks.append(BoundCheck("d-resets-per-vertex", 1, worst_d, worst_d <= 1))
    return checks


def _stabilization_round(
    records: list[RoundRecord], t0: int, n: int, horizon: int, last_simulated: int
) -> Optional[int]:
    """Smallest s > t0 with every round in [s, horizon] proper, in-palette,
    and color-unchanged.  Rounds past the last simulated one repeat the final
    record (the run only stops early at a mutation-free fixpoint)."""
    if not records:
        return None
    last_bad = t0
    for r in records:
        if r.round <= t0:
            continue
        if r.violations or r.in_palette < n or r.changed or r.mutations:
            last_bad = max(last_bad, r.round)
    tail = records[-1]
    if last_simulated < horizon and (tail.violations or tail.in_palette < n):
        return None
    s = last_bad + 1
    return s if s <= horizon else None


def run_li(
    params: Params,
    graph: Graph,
    *,
    max_rounds: Optional[int] = None,
    extra_rounds: int = 1,
    full_eval: bool = False,
    record_trace: bool = False,
    config: Optional[dict] = None,
) -> RunReport:
    """Run the locally-iterative pipeline to its fixpoint in [delta+1].

    Stops once all colors are in the palette and `extra_rounds` further
    rounds produce no change, or at max_rounds (default twice the proven
    completion bound, so bound violations fail loudly instead of hanging).
    """
    p = params
    n = graph.n
    if p.n != n or p.delta < graph.delta:
        raise ValueError(
            f"params derived for (n={p.n}, delta={p.delta}) but graph has "
            f"(n={n}, delta={graph.delta}); params.delta must dominate"
        )
    colors = [init_color(p, v) for v in range(n)]
    tracker = _Tracker(p, graph, colors)
    records: list[RoundRecord] = []
    viol_edges: list[tuple[int, int, int]] = []
    k_log: list[tuple[int, int, int]] = []
    k_hat_max: Optional[int] = None
    completion: Optional[int] = None
    left_palette = False
    hard_fault = None
    trace: Optional[list[list[int]]] = [list(colors)] if record_trace else None

    max_r = (max_rounds if max_rounds is not None else 2 * p.li_round_bound) + extra_rounds
    dirty = set(range(n))
    r = 0
    while r < max_r:
        r += 1
        eval_set = range(n) if full_eval else sorted(dirty)
        new_colors: dict[int, int] = {}
        try:
            for v in eval_set:
                view = NeighborView(p, [colors[u] for u in graph.adjacency[v]])
                nc = update(p, colors[v], view)
                if nc != colors[v]:
                    new_colors[v] = nc
        except RuleFault as exc:
            hard_fault = {"round": r, "vertex": v, "error": str(exc)}
            break
        changed = sorted(new_colors)
        for v in changed:
            old = colors[v]
            nc = new_colors[v]
            tracker.note_color_change(v, old, nc)
            colors[v] = nc
            if not p.fallback and p.ell3 <= old < p.i1_lo and nc < p.ell3:
                k = nc // p.mu
                k_log.append((r, v, k))
                k_hat_max = k if k_hat_max is None else max(k_hat_max, k)
        tracker.apply_changes(changed)
        records.append(tracker.snapshot(r, len(changed)))
        if tracker.bad_edges and len(viol_edges) < VIOLATION_DETAIL_CAP:
            for u, v in sorted(tracker.bad_edges):
                viol_edges.append((r, u, v))
                if len(viol_edges) >= VIOLATION_DETAIL_CAP:
                    break
        if trace is not None:
            if (len(trace) + 1) * n > TRACE_CELL_LIMIT:
                raise ValueError("full trace would exceed the 1e7-cell limit")
            trace.append(list(colors))
        if completion is None and tracker.palette == n:
            completion = r
        elif completion is not None and tracker.palette < n:
            left_palette = True
        if not changed and (completion is None or r >= completion + extra_rounds):
            break
        dirty = set()
        for v in changed:
            dirty.add(v)
            dirty.update(graph.adjacency[v])

    checks = _li_bound_checks(p, records, completion, k_hat_max, left_palette)
    return RunReport(
        variant="li",
        params=p,
        graph_info={"n": n, "delta": graph.delta, "edges": graph.edge_count()},
        config=config or {},
        rounds=records,
        final_colors=list(colors),
        completion_round=completion,
        stabilization_round=None,
        t0=0,
        horizon=None,
        simulated_rounds=r,
        fast_forwarded_from=None,
        k_hat_max=k_hat_max,
        k_hat_log=k_log,
        d_resets_after_t0={},
        violation_edges=viol_edges,
        bound_checks=checks,
        hard_fault=hard_fault,
        mutation_log=[],
        trace=trace,
    )


def run_ss(
    params: Params,
    graph: Graph,
    schedule: Optional[AdversarySchedule] = None,
    horizon: Optional[int] = None,
    *,
    full_eval: bool = False,
    record_trace: bool = False,
    config: Optional[dict] = None,
) -> RunReport:
    """Run the self-stabilizing variant under an adversary schedule.

    Mutations land after each round's updates commit; the stabilization
    round is the first round after the last mutation from which the
    coloring stays proper, inside [delta+1], and unchanged through the
    horizon.  Once the system hits a mutation-free fixpoint the remaining
    rounds are provably identical and the loop fast-forwards.
    """
    p = params
    n = graph.n
    if p.n != n or p.delta < graph.delta:
        raise ValueError(
            f"params derived for (n={p.n}, delta={p.delta}) but graph has "
            f"(n={n}, delta={graph.delta}); params.delta must dominate"
        )
    schedule = schedule or AdversarySchedule()
    mutations = schedule.materialize(p, graph)
    t0 = max((m.round for m in mutations), default=0)
    if horizon is None:
        horizon = t0 + p.ss_stab_offset + 50
    if horizon <= t0:
        raise ValueError(f"horizon {horizon} must exceed t0 {t0}")
    last_mutation_round = t0

    states = [ss_init(p, v, graph.degree(v)) for v in range(n)]
    colors = [s.color for s in states]
    tracker = _Tracker(p, graph, colors)
    records: list[RoundRecord] = []
    viol_edges: list[tuple[int, int, int]] = []
    k_log: list[tuple[int, int, int]] = []
    k_hat_max: Optional[int] = None
    d_resets: dict[int, int] = {}
    mutation_log: list[dict] = []
    hard_fault = None
    trace: Optional[list[list[int]]] = [list(colors)] if record_trace else None
    ff_from: Optional[int] = None

    def inbox_for(v: int) -> list[SSMessage]:
        return [
            SSMessage(states[u].color, states[u].t_bits[graph.reverse_ports[v][i]])
            for i, u in enumerate(graph.adjacency[v])
        ]

    dirty = set(range(n))
    r = 0
    while r < horizon:
        r += 1
        eval_set = range(n) if full_eval else sorted(dirty)
        results: dict[int, tuple] = {}
        resets = 0
        try:
            for v in eval_set:
                inbox = inbox_for(v)
                legit = ss_check(p, states[v], inbox)
                if not legit:
                    resets += 1
                new_state = ss_update(p, states[v], inbox)
                results[v] = (new_state, legit)
        except RuleFault as exc:
            hard_fault = {"round": r, "vertex": v, "error": str(exc)}
            break
        color_changed = []
        bits_changed = []
        for v, (new_state, _legit) in results.items():
            old = states[v]
            if new_state.color != old.color:
                color_changed.append(v)
                tracker.note_color_change(v, old.color, new_state.color)
                oc, nc = old.color, new_state.color
                if not p.fallback and p.ell3 <= oc < p.i1_lo:
                    if nc < p.ell3:
                        k = nc // p.mu
                        k_log.append((r, v, k))
                        k_hat_max = k if k_hat_max is None else max(k_hat_max, k)
                    elif r > t0 and p.ell3 <= nc < p.i1_lo:
                        oq, nq = decode(p, oc), decode(p, nc)
                        if oq.d != p.mu and nq.d == p.mu and (oq.a, oq.b) == (nq.a, nq.b):
                            d_resets[v] = d_resets.get(v, 0) + 1
            elif new_state.t_bits != old.t_bits:
                bits_changed.append(v)
            states[v] = new_state
            colors[v] = new_state.color
        # adversary strikes after the round's updates commit
        applied = apply_adversary(mutations, r, states, p)
        mutated = []
        for m in applied:
            mutation_log.append(m.to_dict())
            v = m.vertex
            if states[v].color != colors[v]:
                tracker.note_color_change(v, colors[v], states[v].color)
                colors[v] = states[v].color
            mutated.append(v)
        color_changed = sorted(set(color_changed))
        tracker.apply_changes(sorted(set(color_changed + mutated)))
        records.append(tracker.snapshot(r, len(color_changed), resets, len(applied)))
        if tracker.bad_edges and len(viol_edges) < VIOLATION_DETAIL_CAP:
            for u, v in sorted(tracker.bad_edges):
                viol_edges.append((r, u, v))
                if len(viol_edges) >= VIOLATION_DETAIL_CAP:
                    break
        if trace is not None:
            if (len(trace) + 1) * n > TRACE_CELL_LIMIT:
                raise ValueError("full trace would exceed the 1e7-cell limit")
            trace.append(list(colors))
        touched = set(color_changed) | set(bits_changed) | set(mutated)
        dirty = set()
        for v in touched:
            dirty.add(v)
            dirty.update(graph.adjacency[v])
        if not dirty and r >= last_mutation_round:
            ff_from = r
            break

    stabilization = None
    if hard_fault is None:
        stabilization = _stabilization_round(records, t0, n, horizon, r)
    checks = _ss_bound_checks(p, records, t0, stabilization, k_hat_max, d_resets)
    return RunReport(
        variant="ss",
        params=p,
        graph_info={"n": n, "delta": graph.delta, "edges": graph.edge_count()},
        config=config or {},
        rounds=records,
        final_colors=list(colors),
        completion_round=None,
        stabilization_round=stabilization,
        t0=t0,
        horizon=horizon,
        simulated_rounds=r,
        fast_forwarded_from=ff_from,
        k_hat_max=k_hat_max,
        k_hat_log=k_log,
        d_resets_after_t0=d_resets,
        violation_edges=viol_edges,
        bound_checks=checks,
        hard_fault=hard_fault,
        mutation_log=mutation_log,
        trace=trace,
    )
