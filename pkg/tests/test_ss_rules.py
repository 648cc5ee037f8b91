import random

import pytest

from colorsim.codec import Quad, decode, encode
from colorsim.engine import gen_graph, run_ss, verify_proper
from colorsim.li_rules import init_color
from colorsim.params import classify, derive
from colorsim.ss_rules import (
    AdversarySchedule,
    Mutation,
    SSMessage,
    SSVertexState,
    apply_adversary,
    ss_check,
    ss_init,
    ss_update,
)


def msg(color, bit=0):
    return SSMessage(color, bit)


def test_ss_init():
    p = derive(50, 16)
    s = ss_init(p, 7, ports=3)
    assert s.color == init_color(p, 7)
    assert s.t_bits == [0, 0, 0]
    assert ss_init(p, 7, 3) == s  # deterministic


def test_fresh_states_are_legit():
    p = derive(50, 16)
    g = gen_graph("gnp_capped", 50, 16, seed=1)
    states = [ss_init(p, v, g.degree(v)) for v in range(50)]
    for v in range(50):
        inbox = [
            msg(states[u].color, states[u].t_bits[g.reverse_ports[v][i]])
            for i, u in enumerate(g.adjacency[v])
        ]
        assert ss_check(p, states[v], inbox)


def test_i3_collision_is_illicit():
    p = derive(50, 16)
    s = SSVertexState(0, 5, [0, 0])
    assert ss_check(p, s, [msg(5), msg(3)]) is False
    assert ss_check(p, s, [msg(4), msg(3)]) is True


def test_core_too_many_bits_illicit():
    p = derive(50, 16)
    color = encode(p, Quad(p.lam + 1, 3, 0, p.mu))
    bits = [1] * (p.rho + 1) + [0] * 3
    s = SSVertexState(0, color, bits)
    inbox = [msg(0)] * len(bits)
    assert ss_check(p, s, inbox) is False
    s2 = SSVertexState(0, color, [1] * p.rho + [0] * 4)
    assert ss_check(p, s2, inbox) is True


def test_transition_out_bit_budget_is_doubled():
    p = derive(50, 16)
    color = encode(p, Quad(3, 3, 0, p.mu))  # a < lambda
    inbox = [msg(0)] * (2 * p.rho + 1)
    s = SSVertexState(0, color, [1] * (2 * p.rho) + [0])
    assert ss_check(p, s, inbox) is True
    s2 = SSVertexState(0, color, [1] * (2 * p.rho + 1))
    assert ss_check(p, s2, inbox) is False


def test_same_ab_pair_illicit():
    p = derive(50, 16)
    mine = encode(p, Quad(7, 3, 0, p.mu))
    other = encode(p, Quad(7, 3, 5, p.mu))  # same <a, b>, different c
    s = SSVertexState(0, mine, [1])
    assert ss_check(p, s, [msg(other, 1)]) is False
    other_b = encode(p, Quad(7, 4, 5, p.mu))
    assert ss_check(p, s, [msg(other_b, 1)]) is True


def test_undetermined_orientation_illicit():
    p = derive(50, 16)
    mine = encode(p, Quad(7, 3, 0, p.mu))
    other = encode(p, Quad(7, 4, 0, p.mu))
    s = SSVertexState(0, mine, [0])
    assert ss_check(p, s, [msg(other, 0)]) is False
    assert ss_check(p, s, [msg(other, 1)]) is True


def test_core_b_range_check():
    p = derive(50, 16)
    bad = encode(p, Quad(p.lam + 1, p.m2, 0, p.mu))  # b outside [m2] with a >= lam
    s = SSVertexState(0, bad, [0])
    assert ss_check(p, s, [msg(0)]) is False
    # and a neighbor with a bad b is also illicit
    good = encode(p, Quad(p.lam + 1, 3, 0, p.mu))
    s2 = SSVertexState(0, good, [0])
    assert ss_check(p, s2, [msg(bad, 0)]) is False


def test_noncanonical_start_color_illicit():
    p = derive(50, 16)
    s = SSVertexState(vertex_id=4, color=init_color(p, 9), t_bits=[])
    assert ss_check(p, s, []) is False
    s2 = SSVertexState(vertex_id=4, color=init_color(p, 4), t_bits=[])
    assert ss_check(p, s2, []) is True


def test_reset_restores_initial_state():
    p = derive(50, 16)
    s = SSVertexState(vertex_id=4, color=init_color(p, 9), t_bits=[1, 0, 1])
    out = ss_update(p, s, [msg(0), msg(1), msg(2)])
    assert out.color == init_color(p, 4)
    assert out.t_bits == [0, 0, 0]


def test_ss_transition_in_shifts_a_by_lambda():
    p = derive(500, 16)  # r_star == 0: init colors are already in I1^(r*)
    s = ss_init(p, 3, 0)
    out = ss_update(p, s, [])
    q = decode(p, out.color)
    assert q.a >= p.lam  # a = x_hat + lambda in the self-stabilizing variant
    assert q.c == 0 and q.d == p.mu


def test_ss_update_marks_collider_bits():
    p = derive(500, 16)
    g = gen_graph("gnp_capped", 500, 16, seed=8)
    states = [ss_init(p, v, g.degree(v)) for v in range(500)]

    def inbox(v):
        return [
            msg(states[u].color, states[u].t_bits[g.reverse_ports[v][i]])
            for i, u in enumerate(g.adjacency[v])
        ]

    new = [ss_update(p, states[v], inbox(v)) for v in range(500)]
    quads = [decode(p, s.color) for s in new]
    for v in range(500):
        # every same-a neighbor must be pointed at by at least one endpoint
        for i, u in enumerate(g.adjacency[v]):
            if quads[u].a == quads[v].a:
                assert new[v].t_bits[i] + new[u].t_bits[g.reverse_ports[v][i]] >= 1
        assert sum(new[v].t_bits) <= p.rho


def test_ss_core_orientation_filter_on_same_ahat():
    # a same-(a_hat, a_tilde) neighbor joins the blocked set only when my bit
    # for it is 1; with bit 0 the *neighbor's* bit covers the pair instead
    p = derive(500, 16)
    lam = p.lam
    me_color = encode(p, Quad(lam * 2 + 3, 7, 0, p.mu))
    twin = encode(p, Quad(lam * 2 + 3, 9, 0, p.mu))  # same a entirely
    reduced_target = encode(p, Quad(3, 1, 0, p.mu))

    st_pointed = SSVertexState(0, me_color, [1])
    out_pointed = ss_update(p, st_pointed, [msg(twin, 0)])
    q1 = decode(p, out_pointed.color)
    assert q1.a == 3  # reduced (no same-tilde/diff-hat colliders)
    assert out_pointed.t_bits == [1]  # twin stays pointed at

    st_unpointed = SSVertexState(0, me_color, [0])
    out_unpointed = ss_update(p, st_unpointed, [msg(twin, 1)])
    q2 = decode(p, out_unpointed.color)
    assert q2.a == 3
    assert out_unpointed.t_bits == [0]  # twin was never in my M or M-bar


def test_ss_update_with_mixed_interval_ports():
    # transition-out must wait on any port still in the Linial range
    p = derive(500, 16)
    me = encode(p, Quad(3, 9, 0, p.mu))
    linial_port = init_color(p, 7)
    st = SSVertexState(0, me, [0])
    out = ss_update(p, st, [msg(linial_port, 0)])
    assert out.color == me  # unchanged: the I1 port blocks the transition


def test_apply_adversary_color_and_bits():
    p = derive(50, 16)
    states = [SSVertexState(v, init_color(p, v), [0, 0]) for v in range(3)]
    muts = (
        Mutation(round=3, vertex=0, new_color=7),
        Mutation(round=3, vertex=1, bit_flips=(1,)),
        Mutation(round=4, vertex=2, new_color=9),
    )
    applied = apply_adversary(muts, 3, states, p)
    assert len(applied) == 2
    assert states[0].color == 7
    assert states[1].t_bits == [0, 1]
    assert states[2].color == init_color(p, 2)
    assert apply_adversary(muts, 5, states, p) == []


def test_apply_adversary_d_rewrite():
    p = derive(50, 16)
    color = encode(p, Quad(3, 3, 0, 5))
    states = [SSVertexState(0, color, [])]
    apply_adversary((Mutation(round=1, vertex=0, new_d=p.mu),), 1, states, p)
    assert decode(p, states[0].color).d == p.mu
    # d rewrite is a no-op outside I2
    states = [SSVertexState(0, 3, [])]
    apply_adversary((Mutation(round=1, vertex=0, new_d=2),), 1, states, p)
    assert states[0].color == 3


def test_random_schedule_replay_identical():
    p = derive(50, 16)
    g = gen_graph("gnp_capped", 50, 16, seed=0)
    sched = AdversarySchedule.from_json({"seed": 4, "intensity": 2, "horizon": 6})
    m1 = sched.materialize(p, g)
    m2 = sched.materialize(p, g)
    assert m1 == m2
    assert max(m.round for m in m1) <= 6


def test_reconfiguration_property_randomized():
    """From randomized corrupted global states, one synchronized step of
    (reset-if-illicit, else update) yields all-legit states."""
    p = derive(40, 16)
    g = gen_graph("gnp_capped", 40, 16, seed=6)
    rng = random.Random(1234)
    for trial in range(15):
        states = [ss_init(p, v, g.degree(v)) for v in range(40)]
        # scramble some RAM arbitrarily
        for _ in range(10):
            v = rng.randrange(40)
            kind = rng.randrange(3)
            if kind == 0:
                states[v].color = rng.randrange(p.color_space)
            elif kind == 1 and g.degree(v):
                states[v].t_bits[rng.randrange(g.degree(v))] ^= 1
            else:
                states[v].color = rng.randrange(p.delta + 1)

        def inboxes(sts):
            return [
                [
                    msg(sts[u].color, sts[u].t_bits[g.reverse_ports[v][i]])
                    for i, u in enumerate(g.adjacency[v])
                ]
                for v in range(40)
            ]

        cur = states
        step1 = [ss_update(p, cur[v], ib) for v, ib in enumerate(inboxes(cur))]
        step2_inboxes = inboxes(step1)
        for v in range(40):
            assert ss_check(p, step1[v], step2_inboxes[v]), (trial, v)


def test_random_adversary_twenty_seeds_stabilize_within_bound():
    g = gen_graph("gnp_capped", 100, 16, seed=14)
    p = derive(100, g.delta)
    for seed in range(20):
        sched = AdversarySchedule.from_json(
            {"seed": 9000 + seed, "intensity": 3, "horizon": 10}
        )
        rep = run_ss(p, g, sched)
        assert rep.ok, (seed, [c.to_dict() for c in rep.bound_checks if not c.ok])
        assert rep.stabilization_round <= rep.t0 + p.ss_stab_offset
        assert verify_proper(g, rep.final_colors) == []


def test_empty_schedule_matches_li_guarantees():
    g = gen_graph("gnp_capped", 50, 16, seed=3)
    p = derive(50, g.delta)
    rep = run_ss(p, g)
    assert rep.ok
    by_round = {r.round: r for r in rep.rounds}
    for rnd, rec in by_round.items():
        if rnd >= 2:
            assert rec.violations == 0
    assert all(c <= g.delta for c in rep.final_colors)
    assert verify_proper(g, rep.final_colors) == []
