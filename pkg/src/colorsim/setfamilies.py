"""Lazy (index -> set) realizations of the polynomial set families.

Every family follows the same recipe: member i is the graph of the
polynomial with index i over GF(prime), packed as {x*prime + P_i(x)},
optionally shifted by a ground offset.  Two members intersect in at most
`degree` points, which is where all the cover-freeness comes from.

The verifiers are exact and exist in the library (not just tests) so the
CLI can expose a verify-families command.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional, Sequence

from .numtheory import PolyIndex, poly_coeffs, poly_eval


class FamilySpec(NamedTuple):
    """One set family: `family_size` sets of exactly `prime` elements each,
    drawn from [prime^2) and shifted by `ground_offset`."""

    kind: str
    prime: int
    degree: int
    family_size: int
    ground_offset: int


def linial_family(params, t: int) -> FamilySpec:
    """Family used by Linial iteration t (maps I1^(t-1) colors into I1^(t))."""
    if not 1 <= t <= params.r_star:
        raise ValueError(f"no Linial step {t}")
    step = params.linial_steps[t - 1]
    return FamilySpec(
        kind=f"linial{t}",
        prime=step.q,
        degree=step.d,
        family_size=params.n_seq[t - 1],
        ground_offset=step.lo,
    )


def exit_family(params) -> FamilySpec:
    """Fallback-only degree-1 family mapping I1^(r*) colors into I3."""
    if not params.fallback:
        raise ValueError("exit family exists only in fallback mode")
    return FamilySpec(
        kind="exit",
        prime=params.exit_prime,
        degree=1,
        family_size=params.n_seq[-1],
        ground_offset=0,
    )


def fa_family(params) -> FamilySpec:
    """Transition-in family for the a coordinate (union-cover-free)."""
    return FamilySpec(
        kind="fa",
        prime=params.q_a,
        degree=params.log_nr,
        family_size=params.n_seq[-1],
        ground_offset=0,
    )


def fb_family(params) -> FamilySpec:
    """Transition-in family for the b coordinate (rho-cover-free)."""
    return FamilySpec(
        kind="fb",
        prime=params.p_b,
        degree=params.log_nr,
        family_size=params.n_seq[-1],
        ground_offset=0,
    )


def fc_family(params) -> FamilySpec:
    """Core-stage family for refreshing b on reduction (2*rho-cover-free)."""
    return FamilySpec(
        kind="fc",
        prime=params.tau,
        degree=params.log_lam2m2,
        family_size=params.lam * params.lam * params.m2,
        ground_offset=0,
    )


def set_of(spec: FamilySpec, i: int) -> list[int]:
    """Member i of the family, sorted ascending; allocates O(prime) only."""
    return list(_set_of(spec, i))


@lru_cache(maxsize=1 << 18)
def _set_of(spec: FamilySpec, i: int) -> tuple[int, ...]:
    if not 0 <= i < spec.family_size:
        raise ValueError(f"set index {i} outside family of size {spec.family_size}")
    p = spec.prime
    coeffs = poly_coeffs(PolyIndex(i, p, spec.degree))[::-1]
    out = []
    for x in range(p):
        acc = 0
        for c in coeffs:
            acc = (acc * x + c) % p
        out.append(spec.ground_offset + x * p + acc)
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def member_set(spec: FamilySpec, i: int) -> frozenset[int]:
    """Same as set_of but as a frozenset, for membership tests."""
    return frozenset(_set_of(spec, i))


def _as_sets(sets: Iterable[Iterable[int]]) -> list[frozenset[int]]:
    return [frozenset(s) for s in sets]


def _min_cover_size(target: frozenset[int], candidates: Sequence[frozenset[int]]) -> int:
    """Exact minimum number of candidate sets whose union covers `target`
    (bitmask DP; exponential in |target|, so callers keep |target| small)."""
    elems = sorted(target)
    pos = {e: j for j, e in enumerate(elems)}
    if len(elems) > 22:
        raise ValueError("target too large for exhaustive cover check; pass samples=")
    masks = []
    for s in candidates:
        m = 0
        for e in s & target:
            m |= 1 << pos[e]
        if m:
            masks.append(m)
    full = (1 << len(elems)) - 1
    INF = len(candidates) + 1
    best = [INF] * (full + 1)
    best[0] = 0
    for state in range(full + 1):
        if best[state] >= INF:
            continue
        # cover the lowest uncovered element
        rest = full & ~state
        if not rest:
            continue
        low = rest & -rest
        for m in masks:
            if m & low:
                nxt = state | m
                if best[state] + 1 < best[nxt]:
                    best[nxt] = best[state] + 1
    return best[full]


def verify_cover_free(
    sets: Sequence[Iterable[int]],
    k: int,
    *,
    samples: Optional[int] = None,
    seed: int = 0,
) -> bool:
    """True iff no set is contained in the union of any k others.

    Exact by default: for each target set, computes the minimum number of
    other sets needed to cover it (bitmask DP over the target's elements)
    and checks it exceeds k.  With `samples` set, runs a randomized witness
    search instead; that mode can only return False with a found witness.
    """
    family = _as_sets(sets)
    if k <= 0:
        return True
    if samples is not None:
        rng = random.Random(seed)
        idx = range(len(family))
        for _ in range(samples):
            t = rng.randrange(len(family))
            others = rng.sample([j for j in idx if j != t], min(k, len(family) - 1))
            union = frozenset().union(*(family[j] for j in others)) if others else frozenset()
            if family[t] <= union:
                return False
        return True
    for t, target in enumerate(family):
        others = [s for j, s in enumerate(family) if j != t]
        if _min_cover_size(target, others) <= k:
            return False
    return True


def verify_cover_free_naive(sets: Sequence[Iterable[int]], k: int) -> bool:
    """Literal Definition check by enumerating all (k+1)-subsets; only
    feasible at toy scale.  Used as an independent oracle for the DP."""
    family = _as_sets(sets)
    if k <= 0:
        return True
    for t, target in enumerate(family):
        others = [s for j, s in enumerate(family) if j != t]
        for combo in itertools.combinations(others, min(k, len(others))):
            if target <= frozenset().union(*combo):
                return False
    return True


def _min_sets_to_swamp(
    target: frozenset[int], candidates: Sequence[frozenset[int]], rho: int
) -> int:
    """Exact minimum number of *distinct* candidate sets such that every
    element of `target` appears in more than rho of them.

    0/1-knapsack DP over capped per-element multiplicity vectors encoded in
    base rho+2, so each candidate is used at most once.  Exponential in
    |target|; callers keep targets small."""
    elems = sorted(target)
    q = len(elems)
    cap = rho + 1
    base = cap + 1
    n_states = base**q
    if n_states > 400_000:
        raise ValueError("target too large for exhaustive union-cover check; pass samples=")
    pow_ = [base**j for j in range(q)]
    full = sum(cap * pow_[j] for j in range(q))
    INF = len(candidates) + 1
    dp = [INF] * n_states
    dp[0] = 0
    digit_cache = [[(s // pow_[j]) % base for j in range(q)] for s in range(n_states)]
    for cand in candidates:
        mask = [1 if e in cand else 0 for e in elems]
        if not any(mask):
            continue
        new = dp[:]
        for state in range(n_states):
            if dp[state] >= INF:
                continue
            digits = digit_cache[state]
            nxt = 0
            for j in range(q):
                nxt += min(cap, digits[j] + mask[j]) * pow_[j]
            if dp[state] + 1 < new[nxt]:
                new[nxt] = dp[state] + 1
        dp = new
    return dp[full]


def verify_union_cover_free(
    sets: Sequence[Iterable[int]],
    k: int,
    rho: int,
    *,
    samples: Optional[int] = None,
    seed: int = 0,
) -> bool:
    """True iff for every set S0 and every k others, some element of S0
    appears in at most rho of them (Delta-union-(rho+1)-cover-freeness
    with Delta=k).  Exact by default, randomized witness search with
    `samples` set."""
    family = _as_sets(sets)
    if k <= 0:
        return True
    if samples is not None:
        rng = random.Random(seed)
        idx = range(len(family))
        for _ in range(samples):
            t = rng.randrange(len(family))
            others = rng.sample([j for j in idx if j != t], min(k, len(family) - 1))
            if others and all(
                sum(1 for j in others if e in family[j]) > rho for e in family[t]
            ):
                return False
        return True
    for t, target in enumerate(family):
        others = [s for j, s in enumerate(family) if j != t]
        if _min_sets_to_swamp(target, others, rho) <= k:
            return False
    return True


def verify_union_cover_free_naive(sets: Sequence[Iterable[int]], k: int, rho: int) -> bool:
    """Literal Definition check by enumeration; toy scale only."""
    family = _as_sets(sets)
    if k <= 0:
        return True
    for t, target in enumerate(family):
        others = [s for j, s in enumerate(family) if j != t]
        for combo in itertools.combinations(others, min(k, len(others))):
            if all(sum(1 for s in combo if e in s) > rho for e in target):
                return False
    return True
