import pytest

from colorsim.numtheory import ceil_sqrt, is_prime
from colorsim.params import DeriveError, Phase, classify, derive, log_star, smallest_prime_in

# Golden constants for derive(65536, 64), fixed by an exhaustive sieve-based
# prime search run independently of this package (sympy.isprime scan over the
# ledger formulas).
GOLDEN_65536_64 = {
    "rho": 3,
    "r_star": 1,
    "n_seq": (65536, 17161),
    "q_a": 251,
    "m1": 460800,
    "lam": 683,
    "p_b": 47,
    "m2": 7200,
    "log_lam2m2": 32,
    "m3": 131072,
    "tau": 367,
    "mu": 373,
    "B": 134689,
    "ell1": 82697,
    "ell2": 32099320377948164,
    "ell3": 271235,
}


def test_log_star():
    assert log_star(1) == 0
    assert log_star(2) == 1
    assert log_star(65536) == 4  # 65536 -> 16 -> 4 -> 2 -> 1
    assert log_star(3) == 2


def test_smallest_prime_in():
    assert smallest_prime_in(10, 20) == 11
    assert smallest_prime_in(1, 2) == 2
    assert smallest_prime_in(24, 48) == 29
    with pytest.raises(ValueError):
        smallest_prime_in(20, 10)
    with pytest.raises(ValueError):
        smallest_prime_in(24, 28)  # no prime in (24, 28]


def test_derive_rejects_bad_inputs():
    with pytest.raises(DeriveError):
        derive(1, 1)
    with pytest.raises(DeriveError):
        derive(10, 0)
    with pytest.raises(DeriveError):
        derive(10, 10)
    with pytest.raises(DeriveError):
        derive(5000, 4999)  # color space would exceed 64 bits


def test_derive_tiny_fallback():
    p = derive(2, 1)
    assert p.fallback is True
    assert p.rho == 1


def test_derive_deterministic():
    assert derive(500, 32) == derive(500, 32)
    assert derive(4, 3) == derive(4, 3)


def test_derive_golden_65536_64():
    p = derive(65536, 64)
    assert p.fallback is False
    got = {
        "rho": p.rho,
        "r_star": p.r_star,
        "n_seq": p.n_seq,
        "q_a": p.q_a,
        "m1": p.m1,
        "lam": p.lam,
        "p_b": p.p_b,
        "m2": p.m2,
        "log_lam2m2": p.log_lam2m2,
        "m3": p.m3,
        "tau": p.tau,
        "mu": p.mu,
        "B": p.B,
        "ell1": p.ell1,
        "ell2": p.ell2,
        "ell3": p.ell3,
    }
    assert got == GOLDEN_65536_64
    assert p.linial_steps[0].q == 131
    assert p.linial_steps[0].d == 2


def test_fallback_ell3_matches_final_palette():
    # for r_star >= 1 the fallback exit prime is q_{r*}, so ell3 == n_{r*}
    p = derive(5000, 2)
    assert p.fallback
    assert p.n_seq == (5000, 121, 25)
    assert p.exit_prime == 5
    assert p.ell3 == 25
    # r_star == 0: ell3 = exit_prime^2 >= n
    p = derive(50, 4)
    assert p.fallback and p.r_star == 0
    assert p.exit_prime == 11 and p.ell3 == 121


GRID = [
    (50, 4), (50, 16), (50, 32), (50, 49),
    (500, 4), (500, 16), (500, 64), (500, 499),
    (5000, 2), (5000, 32), (5000, 64),
    (65536, 64), (65, 64), (17, 16), (4, 3), (2, 1), (1000, 31),
    (10**6, 16),  # deepest non-fallback Linial recursion at desk scale (r*=2)
]


def test_deep_linial_recursion():
    p = derive(10**6, 16)
    assert not p.fallback
    assert p.r_star == 2
    assert p.n_seq == (10**6, 2809, 1369)
    assert [s.q for s in p.linial_steps] == [53, 37]
    assert [s.d for s in p.linial_steps] == [3, 2]


@pytest.mark.parametrize("n,delta", GRID)
def test_interval_invariants(n, delta):
    p = derive(n, delta)
    # the three intervals tile [0, color_space) exactly
    assert p.i3_lo == 0
    assert p.i2_lo == p.ell3
    assert p.i1_lo == p.ell3 + p.ell2
    assert p.color_space == p.ell3 + p.ell2 + p.ell1
    # sub-intervals tile I1
    assert p.i1_sub_lo[p.r_star] == p.i1_lo
    top_lo, top_hi = p.i1_sub_bounds(0)
    assert top_hi == p.color_space
    for t in range(p.r_star):
        lo, hi = p.i1_sub_bounds(t)
        lo_next, hi_next = p.i1_sub_bounds(t + 1)
        assert hi_next == lo
    # n_seq strictly decreasing, endpoint bound
    for a, b in zip(p.n_seq, p.n_seq[1:]):
        assert b < a
    assert p.n_seq[-1] <= 16 * (delta + 1) ** 2
    assert p.r_star <= log_star(n) + 5


@pytest.mark.parametrize("n,delta", GRID)
def test_prime_range_invariants(n, delta):
    p = derive(n, delta)
    if p.fallback:
        assert p.exit_prime is not None and is_prime(p.exit_prime)
        assert p.exit_prime > delta
        assert p.exit_prime**2 >= p.n_seq[-1]
        assert p.ell3 == p.exit_prime**2 and p.ell2 == 0
        return
    assert is_prime(p.lam) and is_prime(p.mu) and is_prime(p.tau)
    assert is_prime(p.q_a) and is_prime(p.p_b)
    assert p.lam * p.lam > p.m1
    assert p.tau * p.tau > p.m3
    assert p.mu > p.tau
    assert p.mu > ceil_sqrt(delta) + ceil_sqrt(p.m3) - 1
    assert p.B >= max(p.m2, p.tau**2)
    assert p.delta + 4 * p.rho * p.mu < p.mu * p.mu
    assert p.ell2 == 2 * p.lam**3 * (p.mu + 1) * p.B
    assert p.ell3 == delta + (2 * ceil_sqrt(p.m3) + 1) * p.mu
    assert p.q_a**2 <= p.m1
    assert p.p_b**2 <= p.m2
    assert p.m2 <= p.m3
    # Linial step families are Delta-cover-free by construction
    for s in p.linial_steps:
        assert is_prime(s.q)
        assert delta * s.d < s.q


@pytest.mark.parametrize("n,delta", GRID)
def test_classify_total_and_consistent(n, delta):
    p = derive(n, delta)
    assert classify(p, 0) == Phase("I3")
    if p.ell2 > 0:
        assert classify(p, p.ell3) == Phase("I2")
        assert classify(p, p.i1_lo - 1) == Phase("I2")
    assert classify(p, p.color_space - 1) == Phase("I1", 0)
    assert classify(p, p.i1_lo) == Phase("I1", p.r_star)
    for t in range(p.r_star + 1):
        lo, hi = p.i1_sub_bounds(t)
        assert classify(p, lo) == Phase("I1", t)
        assert classify(p, hi - 1) == Phase("I1", t)
    with pytest.raises(ValueError):
        classify(p, -1)
    with pytest.raises(ValueError):
        classify(p, p.color_space)
