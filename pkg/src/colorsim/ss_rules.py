"""Self-stabilizing per-vertex state machine.

Each vertex keeps its color plus one orientation bit per neighbor port
(replacing the c coordinate, which stays in the color but is never used).
Every round a vertex sends <color, bit-for-you> to each neighbor, runs an
error-checking predicate against what it received, resets to its initial
state if the check fails, and otherwise runs the phase rule matching its
color's interval.

ROM/RAM split: the vertex id, graph wiring, and parameters are read-only;
color and t_bits are the adversary-corruptible RAM.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .codec import Quad, a_hat, a_tilde, decode, encode
from .li_rules import (
    NeighborView,
    RuleFault,
    exit_step,
    init_color,
    linial_step,
    standard_reduction,
)
from .params import Params, classify
from .setfamilies import fa_family, fb_family, fc_family, member_set, set_of


class SSMessage(NamedTuple):
    """What travels over one directed edge per round."""

    color: int
    bit: int


@dataclass
class SSVertexState:
    """Mutable per-vertex state; vertex_id is ROM, the rest is RAM."""

    vertex_id: int
    color: int
    t_bits: list[int]

    def copy(self) -> "SSVertexState":
        return SSVertexState(self.vertex_id, self.color, list(self.t_bits))


def ss_init(params: Params, vertex_id: int, ports: int) -> SSVertexState:
    """Initial state: the Linial start color, all orientation bits clear."""
    return SSVertexState(vertex_id, init_color(params, vertex_id), [0] * ports)


def _i2_ports(params: Params, inbox: Sequence[SSMessage]) -> list[tuple[int, Quad]]:
    out = []
    for port, msg in enumerate(inbox):
        if params.ell3 <= msg.color < params.i1_lo:
            out.append((port, decode(params, msg.color)))
    return out


def ss_check(params: Params, state: SSVertexState, inbox: Sequence[SSMessage]) -> bool:
    """The legitimacy predicate: True if the state passes the error checks
    for its color's phase.  Accepts arbitrary corrupted states; never raises."""
    c = state.color
    if not 0 <= c < params.color_space:
        return False
    if c < params.ell3:
        # standard reduction phase: only color collisions are illicit
        return all(m.color != c for m in inbox)
    if c < params.i1_lo:
        me = decode(params, c)
        i2 = _i2_ports(params, inbox)
        for port, q in i2:
            if q.a == me.a and q.b == me.b:
                return False
            if q.a == me.a and state.t_bits[port] + inbox[port].bit == 0:
                return False
        t_count = sum(1 for b in state.t_bits if b)
        if me.a >= params.lam:
            if t_count > params.rho:
                return False
            if me.b >= params.m2:
                return False
            for _, q in i2:
                if q.a >= params.lam and q.b >= params.m2:
                    return False
        else:
            if t_count > 2 * params.rho:
                return False
        return True
    # I1 range: collision, or a non-canonical color in the start sub-interval
    if any(m.color == c for m in inbox):
        return False
    if c >= params.i1_sub_lo[0] and c != params.i1_sub_lo[0] + state.vertex_id:
        return False
    return True


def ss_update(params: Params, state: SSVertexState, inbox: Sequence[SSMessage]) -> SSVertexState:
    """One synchronous round: reset if illicit, else run the phase rule."""
    if not ss_check(params, state, inbox):
        return SSVertexState(
            state.vertex_id, init_color(params, state.vertex_id), [0] * len(state.t_bits)
        )
    c = state.color
    if c < params.ell3:
        new_color = standard_reduction(
            params, c, NeighborView(params, [m.color for m in inbox])
        )
        return SSVertexState(state.vertex_id, new_color, list(state.t_bits))
    if c < params.i1_lo:
        me = decode(params, c)
        if me.a >= params.lam:
            return _ss_core(params, state, me, inbox)
        return _ss_transition_out(params, state, me, inbox)
    step = classify(params, c).step
    view = NeighborView(params, [m.color for m in inbox])
    if step < params.r_star:
        new_color = linial_step(params, step, c, view)
        return SSVertexState(state.vertex_id, new_color, list(state.t_bits))
    if params.fallback:
        new_color = exit_step(params, c, view)
        return SSVertexState(state.vertex_id, new_color, list(state.t_bits))
    return _ss_transition_in(params, state, inbox)


def _ss_transition_in(
    params: Params, state: SSVertexState, inbox: Sequence[SSMessage]
) -> SSVertexState:
    """I1^(r*) -> I2 with a = x_hat + lambda; collision candidates are both
    same-step neighbors sharing x_hat and core-stage neighbors whose rotation
    would land on it.  Orientation bits mark exactly those ports."""
    fa = fa_family(params)
    fb = fb_family(params)
    lam = params.lam
    lo = params.i1_lo
    idx = state.color - lo

    step_lo, step_hi = params.i1_sub_bounds(params.r_star)
    i1_ports = [
        (port, msg.color)
        for port, msg in enumerate(inbox)
        if step_lo <= msg.color < step_hi
    ]
    fa_sets = {port: member_set(fa, col - lo) for port, col in i1_ports}
    rotating: dict[int, list[int]] = {}
    i2 = _i2_ports(params, inbox)
    for port, q in i2:
        ah, at = a_hat(q.a, lam), a_tilde(q.a, lam)
        target = ah * lam + (ah + at) % lam
        if target >= lam:
            rotating.setdefault(target - lam, []).append(port)

    chosen_x = None
    colliders: list[int] = []
    for x in set_of(fa, idx):
        n1 = [port for port, _ in i1_ports if x in fa_sets[port]]
        n2 = rotating.get(x, [])
        if len(n1) + len(n2) <= params.rho:
            chosen_x = x
            colliders = n1 + n2
            break
    if chosen_x is None:
        raise RuleFault(f"ss transition-in: no low-collision a for color {state.color}")

    i2_by_port = dict(i2)
    blocked_b: set[int] = set()
    for port, col in i1_ports:
        if chosen_x in fa_sets[port]:
            blocked_b |= member_set(fb, col - lo)
    for port in rotating.get(chosen_x, []):
        blocked_b.add(i2_by_port[port].b)
    b_val = next((b for b in set_of(fb, idx) if b not in blocked_b), None)
    if b_val is None:
        raise RuleFault(f"ss transition-in: no admissible b for color {state.color}")

    bits = [0] * len(state.t_bits)
    for port in colliders:
        bits[port] = 1
    color = encode(params, Quad(chosen_x + lam, b_val, 0, params.mu))
    return SSVertexState(state.vertex_id, color, bits)


def _ss_core(
    params: Params, state: SSVertexState, me: Quad, inbox: Sequence[SSMessage]
) -> SSVertexState:
    """Core stage with the orientation-bit filter on same-a-hat colliders;
    on reduction the bits are rewritten to point at every potential collider."""
    lam = params.lam
    ah, at = a_hat(me.a, lam), a_tilde(me.a, lam)
    i2 = _i2_ports(params, inbox)
    same_tilde = [(port, q) for port, q in i2 if a_tilde(q.a, lam) == at]
    m_ports = [(port, q) for port, q in same_tilde if a_hat(q.a, lam) != ah]
    mbar_ports = [
        (port, q)
        for port, q in same_tilde
        if a_hat(q.a, lam) == ah and state.t_bits[port] == 1
    ]

    if len(m_ports) > params.rho:
        a_new = ah * lam + (ah + at) % lam
        color = encode(params, Quad(a_new, me.b, me.c, me.d))
        return SSVertexState(state.vertex_id, color, list(state.t_bits))

    m_prime = {port for port, q in same_tilde if a_hat(q.a, lam) == 0}
    union_ports = {port for port, _ in m_ports} | {port for port, _ in mbar_ports}
    by_port = dict(same_tilde)
    fc = fc_family(params)
    if me.b >= params.m2:
        raise RuleFault(f"ss core: own b={me.b} outside [{params.m2}]")
    own = set_of(fc, me.a * params.m2 + me.b)
    blocked: set[int] = {q.b for port, q in same_tilde if port in m_prime}
    for port in union_ports - m_prime:
        q = by_port[port]
        if q.b >= params.m2:
            raise RuleFault(f"ss core: neighbor b={q.b} outside [{params.m2}]")
        blocked |= member_set(fc, q.a * params.m2 + q.b)
    b_new = next((x for x in own if x not in blocked), None)
    if b_new is None:
        raise RuleFault("ss core: b choice empty after passing error checks")

    bits = [0] * len(state.t_bits)
    for port in union_ports:
        bits[port] = 1
    color = encode(params, Quad(at, b_new, me.c, me.d))
    return SSVertexState(state.vertex_id, color, bits)


def _ss_transition_out(
    params: Params, state: SSVertexState, me: Quad, inbox: Sequence[SSMessage]
) -> SSVertexState:
    """Transition-out with the pointed set defined by orientation bits and
    the d-validity guard (a corrupted d gets reset to the sentinel once)."""
    mu = params.mu
    i2 = _i2_ports(params, inbox)
    for port, msg in enumerate(inbox):
        if msg.color < params.ell3:
            continue
        if msg.color >= params.i1_lo:
            return state.copy()  # a neighbor is still in the Linial range
    if any(not (me.a <= q.a < params.lam) for _, q in i2):
        return state.copy()

    occupied = {msg.color for msg in inbox if msg.color < params.ell3}
    beta, gamma = divmod(me.b, params.tau)

    if me.d == mu:
        counts: dict[int, int] = {}
        for y in occupied:
            x, rem = divmod(y, mu)
            if x >= mu:
                continue
            i = (rem - beta * x * x - gamma * x) % mu
            counts[i] = counts.get(i, 0) + 1
        best_i, best_count = 0, counts.get(0, 0)
        if best_count:
            for i in range(1, mu):
                cnt = counts.get(i, 0)
                if cnt < best_count:
                    best_i, best_count = i, cnt
                    if cnt == 0:
                        break
        color = encode(params, Quad(me.a, me.b, me.c, best_i))
        return SSVertexState(state.vertex_id, color, list(state.t_bits))

    # d-validity guard against adversarial d values
    unpointed_i3 = {
        msg.color
        for port, msg in enumerate(inbox)
        if msg.color < params.ell3 and state.t_bits[port] == 0
    }
    overlap = 0
    for y in unpointed_i3:
        x, rem = divmod(y, mu)
        if x < mu and (beta * x * x + gamma * x + me.d) % mu == rem:
            overlap += 1
    if overlap > params.delta // mu:
        color = encode(params, Quad(me.a, me.b, me.c, mu))
        return SSVertexState(state.vertex_id, color, list(state.t_bits))

    pointed = [q for port, q in i2 if q.a == me.a and state.t_bits[port] == 1]
    if all(q.d != mu for q in pointed):
        nbr_polys = [(q.b // params.tau, q.b % params.tau, q.d) for q in pointed]
        for k in range(mu):
            rem = (beta * k * k + gamma * k + me.d) % mu
            cand = rem + mu * k
            if cand in occupied:
                continue
            if any((nb * k * k + ng * k + nd) % mu == rem for nb, ng, nd in nbr_polys):
                continue
            if cand >= params.ell3:
                raise RuleFault(f"ss transition-out: candidate {cand} escaped I3")
            return SSVertexState(state.vertex_id, cand, list(state.t_bits))
        raise RuleFault("ss transition-out: no admissible list element")

    return state.copy()


# ------------------------------------------------------------------ adversary


@dataclass(frozen=True)
class Mutation:
    """One RAM corruption: overwrite a color, flip orientation bits, or
    rewrite the d coordinate (no-op unless the color is in I2)."""

    round: int
    vertex: int
    new_color: Optional[int] = None
    bit_flips: tuple[int, ...] = ()
    new_d: Optional[int] = None

    def to_dict(self) -> dict:
        out: dict = {"round": self.round, "vertex": self.vertex}
        if self.new_color is not None:
            out["new_color"] = self.new_color
        if self.bit_flips:
            out["bit_flips"] = list(self.bit_flips)
        if self.new_d is not None:
            out["new_d"] = self.new_d
        return out


@dataclass
class AdversarySchedule:
    """Either an explicit mutation list or a seeded random generator.

    Random schedules are expanded deterministically once the graph is known,
    so replaying a seed reproduces the identical mutation log.
    """

    mutations: tuple[Mutation, ...] = ()
    seed: Optional[int] = None
    intensity: int = 0
    horizon: int = 0

    @classmethod
    def from_json(cls, doc) -> "AdversarySchedule":
        if isinstance(doc, dict) and "seed" in doc:
            return cls(
                seed=int(doc["seed"]),
                intensity=int(doc.get("intensity", 1)),
                horizon=int(doc.get("horizon", 1)),
            )
        if isinstance(doc, dict):
            doc = doc.get("mutations", [])
        muts = []
        for rec in doc:
            muts.append(
                Mutation(
                    round=int(rec["round"]),
                    vertex=int(rec["vertex"]),
                    new_color=rec.get("new_color"),
                    bit_flips=tuple(rec.get("bit_flips", ())),
                    new_d=rec.get("new_d"),
                )
            )
        return cls(mutations=tuple(muts))

    def materialize(self, params: Params, graph) -> tuple[Mutation, ...]:
        """Validate explicit mutations or expand the seeded generator."""
        if self.seed is None:
            muts = self.mutations
        else:
            rng = random.Random(self.seed)
            kinds = ["color", "bits", "d"] if not params.fallback else ["color", "bits"]
            out = []
            for rnd in range(1, self.horizon + 1):
                for _ in range(self.intensity):
                    v = rng.randrange(graph.n)
                    kind = rng.choice(kinds)
                    if kind == "color":
                        out.append(
                            Mutation(rnd, v, new_color=rng.randrange(params.color_space))
                        )
                    elif kind == "bits" and graph.degree(v) > 0:
                        k = rng.randrange(1, graph.degree(v) + 1)
                        ports = tuple(sorted(rng.sample(range(graph.degree(v)), k)))
                        out.append(Mutation(rnd, v, bit_flips=ports))
                    elif kind == "d":
                        out.append(Mutation(rnd, v, new_d=rng.randrange(params.mu + 1)))
            muts = tuple(out)
        for m in muts:
            if not 0 <= m.vertex < graph.n:
                raise ValueError(f"mutation addresses nonexistent vertex {m.vertex}")
            if m.new_color is not None and not 0 <= m.new_color < params.color_space:
                raise ValueError(f"mutation color {m.new_color} outside the color space")
            for port in m.bit_flips:
                if not 0 <= port < graph.degree(m.vertex):
                    raise ValueError(
                        f"mutation addresses nonexistent port {port} of vertex {m.vertex}"
                    )
            if m.new_d is not None and not params.fallback and not 0 <= m.new_d <= params.mu:
                raise ValueError(f"mutation d {m.new_d} outside [{params.mu + 1}]")
            if m.round < 1:
                raise ValueError("mutation rounds start at 1")
        return muts


def apply_adversary(
    mutations: Sequence[Mutation], round_no: int, states: list[SSVertexState], params: Params
) -> list[Mutation]:
    """Apply this round's mutations (in order) to the committed states.

    Runs after the round's updates commit, so the following round is the
    first to compute on the corrupted values.  Returns what was applied.
    """
    applied = []
    for m in mutations:
        if m.round != round_no:
            continue
        st = states[m.vertex]
        if m.new_color is not None:
            st.color = m.new_color
        for port in m.bit_flips:
            st.t_bits[port] ^= 1
        if m.new_d is not None and params.ell3 <= st.color < params.i1_lo:
            q = decode(params, st.color)
            st.color = encode(params, Quad(q.a, q.b, q.c, m.new_d))
        applied.append(m)
    return applied
