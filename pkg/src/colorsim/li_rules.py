"""The locally-iterative coloring rules.

A single uniform update function: each vertex's next color is computed
from its own current color plus the multiset of neighbor colors, nothing
else (no round number, no vertex id).  The current color's interval
decides which sub-rule runs:

  I1 sub-interval t' < r*   -> Linial color-reduction step
  I1 sub-interval r*        -> transition into I2 (or, in fallback mode,
                               straight into I3 via the exit family)
  I2 with a >= lambda       -> core stage (quadratic palette reduction)
  I2 with a < lambda        -> transition out of I2 into I3
  I3                        -> standard one-color-per-round reduction

Any "no admissible color exists" situation is a hard fault: it means an
invariant was already broken upstream, and silently absorbing it would
mask the bug.
"""

from __future__ import annotations

from functools import cached_property

from .codec import Quad, a_hat, a_tilde, decode, encode
from .params import Params, classify
from .setfamilies import (
    exit_family,
    fa_family,
    fb_family,
    fc_family,
    linial_family,
    member_set,
    set_of,
)


class RuleFault(RuntimeError):
    """An update rule found no admissible color; an upstream invariant broke."""


class NeighborView:
    """The multiset of neighbor colors, with cached per-interval breakdowns.

    Everything derived here is a function of the color multiset alone,
    which is what keeps the update rule uniform.  Set constructions
    (forbidden-element unions, occupied-color sets) deduplicate by color;
    cardinality tests (collision counts) keep multiset multiplicity, since
    two non-adjacent neighbors may legitimately hold the same color.
    """

    def __init__(self, params: Params, colors):
        self.params = params
        self.colors = tuple(colors)

    @cached_property
    def _split(self):
        i1: dict[int, dict[int, int]] = {}
        i2: dict[int, tuple[Quad, int]] = {}
        i3: set[int] = set()
        p = self.params
        for c in self.colors:
            if c < p.ell3:
                i3.add(c)
            elif c < p.i1_lo:
                if c in i2:
                    q, cnt = i2[c]
                    i2[c] = (q, cnt + 1)
                else:
                    i2[c] = (decode(p, c), 1)
            else:
                t = classify(p, c).step
                bucket = i1.setdefault(t, {})
                bucket[c] = bucket.get(c, 0) + 1
        return i1, i2, i3

    def i1_color_counts(self, t: int) -> dict[int, int]:
        """Multiplicity of each neighbor color lying in I1^(t)."""
        return self._split[0].get(t, {})

    @property
    def i2_quad_counts(self) -> list[tuple[Quad, int]]:
        """(quadruple, multiplicity) per distinct I2 neighbor color."""
        return list(self._split[1].values())

    @property
    def i2_quads(self) -> list[Quad]:
        """Decoded quadruples of distinct I2 neighbor colors."""
        return [q for q, _ in self._split[1].values()]

    @property
    def i3_colors(self) -> set[int]:
        """Distinct neighbor colors lying in I3."""
        return self._split[2]


def init_color(params: Params, vertex_id: int) -> int:
    """Initial color: the vertex id offset into the top Linial sub-interval."""
    if not 0 <= vertex_id < params.n:
        raise ValueError(f"vertex id {vertex_id} outside [{params.n}]")
    return params.i1_sub_lo[0] + vertex_id


def update(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """One synchronous round of the uniform update rule."""
    phase = classify(params, my_color)
    if phase.kind == "I3":
        return standard_reduction(params, my_color, neighbors)
    if phase.kind == "I2":
        quad = decode(params, my_color)
        if quad.a >= params.lam:
            return core_step(params, my_color, neighbors)
        return transition_out(params, my_color, neighbors)
    if phase.step < params.r_star:
        return linial_step(params, phase.step, my_color, neighbors)
    if params.fallback:
        return exit_step(params, my_color, neighbors)
    return transition_in(params, my_color, neighbors)


def linial_step(params: Params, t_prime: int, my_color: int, neighbors: NeighborView) -> int:
    """Cover-free color reduction: pick the least element of my step-family
    set avoided by every same-sub-interval neighbor's set."""
    fam = linial_family(params, t_prime + 1)
    lo, _ = params.i1_sub_bounds(t_prime)
    own = set_of(fam, my_color - lo)
    blocked: set[int] = set()
    for c in neighbors.i1_color_counts(t_prime):
        blocked |= member_set(fam, c - lo)
    for x in own:
        if x not in blocked:
            return x
    raise RuleFault(
        f"linial step {t_prime}: set difference empty for color {my_color} "
        f"({len(neighbors.i1_color_counts(t_prime))} same-interval neighbor colors)"
    )


def exit_step(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """Fallback pipeline only: map the final Linial palette straight into I3,
    avoiding both same-step neighbors' sets and colors already held in I3."""
    fam = exit_family(params)
    lo = params.i1_lo
    own = set_of(fam, my_color - lo)
    blocked: set[int] = set(neighbors.i3_colors)
    for c in neighbors.i1_color_counts(params.r_star):
        blocked |= member_set(fam, c - lo)
    for x in own:
        if x not in blocked:
            return x
    raise RuleFault(f"exit step: set difference empty for color {my_color}")


def transition_in(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """I1^(r*) -> I2: pick a from the union-cover-free family so at most rho
    neighbors can collide on it, then pick b from the cover-free family to
    break those remaining collisions.  c starts at 0, d at the mu sentinel."""
    fa = fa_family(params)
    fb = fb_family(params)
    lo = params.i1_lo
    idx = my_color - lo
    step_counts = neighbors.i1_color_counts(params.r_star)
    same_step = sorted(step_counts)
    nbr_fa = [member_set(fa, c - lo) for c in same_step]

    a_val = None
    for x in set_of(fa, idx):
        weight = sum(step_counts[c] for c, s in zip(same_step, nbr_fa) if x in s)
        if weight <= params.rho:
            a_val = x
            break
    if a_val is None:
        raise RuleFault(f"transition-in: no low-collision a value for color {my_color}")

    colliders = [c for c, s in zip(same_step, nbr_fa) if a_val in s]
    blocked_b: set[int] = set()
    for c in colliders:
        blocked_b |= member_set(fb, c - lo)
    for b_val in set_of(fb, idx):
        if b_val not in blocked_b:
            return encode(params, Quad(a_val, b_val, 0, params.mu))
    raise RuleFault(f"transition-in: no admissible b value for color {my_color}")


def core_step(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """Quadratic reduction of the a coordinate from [lam^2] to [lam].

    With more than rho same-a-tilde/different-a-hat neighbors, only rotate:
    a <- a_hat*lam + (a_hat+a_tilde mod lam).  Otherwise reduce a to a_tilde,
    refresh b from the core family avoiding all potential new colliders, and
    set c above every already-reduced collider (the edge-orientation device).
    """
    lam = params.lam
    me = decode(params, my_color)
    ah, at = a_hat(me.a, lam), a_tilde(me.a, lam)
    same_tilde_counted = [
        (u, cnt) for u, cnt in neighbors.i2_quad_counts if a_tilde(u.a, lam) == at
    ]
    same_tilde = [u for u, _ in same_tilde_counted]

    m_count = sum(cnt for u, cnt in same_tilde_counted if a_hat(u.a, lam) != ah)
    if m_count > params.rho:
        a_new = ah * lam + (ah + at) % lam
        return encode(params, Quad(a_new, me.b, me.c, me.d))

    m_prime = [u for u in same_tilde if a_hat(u.a, lam) == 0]
    m_bar_prime = [u for u in same_tilde if a_hat(u.a, lam) != 0]
    if me.b >= params.m2:
        raise RuleFault(f"core: own b={me.b} outside [{params.m2}]")
    fc = fc_family(params)
    own = set_of(fc, me.a * params.m2 + me.b)
    blocked: set[int] = {u.b for u in m_prime}
    for u in m_bar_prime:
        if u.b >= params.m2:
            raise RuleFault(f"core: neighbor b={u.b} outside [{params.m2}]")
        blocked |= member_set(fc, u.a * params.m2 + u.b)
    b_new = next((x for x in own if x not in blocked), None)
    if b_new is None:
        raise RuleFault(
            f"core: b choice empty ({len(m_prime)} reduced, {len(m_bar_prime)} unreduced colliders)"
        )
    c_new = 1 + max((u.c for u in m_prime), default=-1)
    if c_new >= 2 * lam:
        raise RuleFault(f"core: c={c_new} escaped [{2 * lam}]")
    return encode(params, Quad(at, b_new, c_new, me.d))


def _trial_poly(params: Params, b: int, d: int):
    """Coefficients of the transition-out trial polynomial for (b, d)."""
    beta, gamma = divmod(b, params.tau)
    return beta, gamma, d


def _trial_value(params: Params, coeffs, x: int) -> int:
    beta, gamma, delta = coeffs
    return (beta * x * x + gamma * x + delta) % params.mu


def transition_out(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """I2 (a < lam) -> I3 via polynomial trial lists.

    Waits until no I2 neighbor sits below it (or above lam); then one round
    picks d as the trial-list index least occupied by I3 neighbors, and a
    later round takes the least list element avoiding I3 neighbors and the
    lists of pointed-to colliders.
    """
    mu = params.mu
    me = decode(params, my_color)
    i2 = neighbors.i2_quads
    if any(not (me.a <= u.a < params.lam) for u in i2):
        return my_color

    pointed = [u for u in i2 if u.a == me.a and u.c <= me.c]
    occupied = neighbors.i3_colors
    my_poly = _trial_poly(params, me.b, me.d)

    if me.d == mu:
        # count I3 collisions per candidate list; lists are disjoint across i
        counts: dict[int, int] = {}
        beta, gamma, _ = my_poly
        for y in occupied:
            x, rem = divmod(y, mu)
            if x >= mu:
                continue
            i = (rem - beta * x * x - gamma * x) % mu
            counts[i] = counts.get(i, 0) + 1
        best_i, best_count = 0, counts.get(0, 0)
        for i in range(1, mu):
            c = counts.get(i, 0)
            if c < best_count:
                best_i, best_count = i, c
                if c == 0:
                    break
        return encode(params, Quad(me.a, me.b, me.c, best_i))

    if all(u.d != mu for u in pointed):
        nbr_polys = [_trial_poly(params, u.b, u.d) for u in pointed]
        for k in range(mu):
            rem = _trial_value(params, my_poly, k)
            cand = rem + mu * k
            if cand in occupied:
                continue
            if any(_trial_value(params, np, k) == rem for np in nbr_polys):
                continue
            if cand >= params.ell3:
                raise RuleFault(f"transition-out: candidate {cand} escaped I3")
            return cand
        raise RuleFault(
            f"transition-out: no admissible list element for color {my_color} "
            f"({len(pointed)} pointed colliders, {len(occupied)} occupied)"
        )

    return my_color


def standard_reduction(params: Params, my_color: int, neighbors: NeighborView) -> int:
    """Local maxima recolor to the least free color in [delta+1]."""
    ell3 = params.ell3
    used: set[int] = set()
    for c in neighbors.colors:
        if c >= ell3 or c >= my_color:
            return my_color
        used.add(c)
    for c in range(params.delta + 1):
        if c not in used:
            return c
    raise AssertionError("unreachable: delta+1 candidates, at most delta neighbors")
