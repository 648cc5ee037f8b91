"""Derivation of every constant, prime, and interval from (n, delta).

All vertices derive these identically from the two shared scalars; nothing
here depends on vertex identity or the round number.  Logs are ceil-log2
(min 1), roots are exact integer roots, so the same inputs always produce
bit-identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .numtheory import ceil_log2, ceil_root4, ceil_sqrt, is_prime, isqrt

MAX_COLOR_SPACE = 2**64  # colors are u64; derive rejects anything wider
DELTA_MIN = 16  # below this the quadratic-reduction machinery is skipped


class DeriveError(ValueError):
    """Raised when (n, delta) is invalid or the color space would overflow."""


class Phase(NamedTuple):
    """Result of classify(): which interval a color lies in.

    kind is one of "I1", "I2", "I3"; step is the I1 sub-interval index
    (0..r_star) and None otherwise.
    """

    kind: str
    step: Optional[int] = None


class LinialStep(NamedTuple):
    """Per-iteration Linial family parameters: field prime, polynomial
    degree, and the lower bound of the target sub-interval I1^(t)."""

    q: int
    d: int
    lo: int


def log_star(x: int) -> int:
    """Number of iterated ceil-log2 applications to bring x to <= 1."""
    if x < 1:
        raise ValueError("log_star needs x >= 1")
    count = 0
    while x > 1:
        x = _raw_ceil_log2(x)
        count += 1
    return count


def _raw_ceil_log2(x: int) -> int:
    return (x - 1).bit_length()


def smallest_prime_in(lo_exclusive: int, hi_inclusive: int) -> int:
    """Least prime p with lo_exclusive < p <= hi_inclusive."""
    if not 1 <= lo_exclusive < hi_inclusive:
        raise ValueError(f"bad prime range ({lo_exclusive}, {hi_inclusive}]")
    for p in range(lo_exclusive + 1, hi_inclusive + 1):
        if is_prime(p):
            return p
    raise ValueError(f"no prime in ({lo_exclusive}, {hi_inclusive}]")


def _smallest_prime_at_least(lo_inclusive: int) -> int:
    p = max(2, lo_inclusive)
    while not is_prime(p):
        p += 1
    return p


def _linial_schedule(n: int, delta: int) -> tuple[list[int], list[tuple[int, int]]]:
    """Constructive palette recurrence: n_t = q_t^2 for the smallest prime
    q_t > delta*d_t, d_t minimal with (delta*d_t+1)^(d_t+1) >= n_{t-1}.
    Stops just before the sequence stops strictly decreasing."""
    n_seq = [n]
    steps: list[tuple[int, int]] = []
    while True:
        prev = n_seq[-1]
        d = 1
        while (delta * d + 1) ** (d + 1) < prev:
            d += 1
        q = smallest_prime_in(delta * d, 2 * delta * d)
        nt = q * q
        if nt >= prev:
            return n_seq, steps
        n_seq.append(nt)
        steps.append((q, d))


@dataclass(frozen=True)
class Params:
    """Every derived scalar and interval boundary, a pure function of (n, delta).

    In fallback mode (small delta, or the k-hat regime check fails) only the
    Linial-phase and standard-reduction parameters are populated and the
    quadratic-reduction fields are None.
    """

    n: int
    delta: int
    rho: int
    fallback: bool

    n_seq: tuple[int, ...]
    r_star: int
    linial_steps: tuple[LinialStep, ...]
    exit_prime: Optional[int]  # fallback only: GF prime of the I1->I3 exit family

    m1: Optional[int]
    m2: Optional[int]
    m3: Optional[int]
    B: Optional[int]
    lam: Optional[int]
    mu: Optional[int]
    tau: Optional[int]
    q_a: Optional[int]
    p_b: Optional[int]
    log_nr: int  # ceil-log2 of n_{r*}; Fa/Fb polynomial degree
    log_lam2m2: Optional[int]  # ceil-log2 of lam^2*m2; Fc polynomial degree

    ell1: int
    ell2: int
    ell3: int
    i1_lo: int
    i2_lo: int
    i3_lo: int
    i1_sub_lo: tuple[int, ...] = field(repr=False)  # lower bound of I1^(t), t=0..r_star

    # round-count bounds, all computed here so runs can assert against them
    k_hat_bound: Optional[int]
    li_round_bound: int
    li_core_bound: int  # all vertices have a < lam or color in I3 by this round
    li_i3_bound: int  # all colors in I3 by this round
    ss_i2i3_offset: int  # offsets are rounds after T0
    ss_core_offset: int
    ss_i3_offset: int
    ss_stab_offset: int

    def __post_init__(self):
        # hashed on every cached decode/family lookup; precompute once
        object.__setattr__(self, "_hash", hash((self.n, self.delta, self.ell1, self.ell2, self.ell3)))

    def __hash__(self):
        return self._hash

    @property
    def color_space(self) -> int:
        return self.ell3 + self.ell2 + self.ell1

    def i1_sub_bounds(self, t: int) -> tuple[int, int]:
        """[lo, hi) of sub-interval I1^(t)."""
        if not 0 <= t <= self.r_star:
            raise ValueError(f"no Linial sub-interval {t}")
        return self.i1_sub_lo[t], self.i1_sub_lo[t] + self.n_seq[t]

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "delta": self.delta,
            "rho": self.rho,
            "fallback": self.fallback,
            "n_seq": list(self.n_seq),
            "r_star": self.r_star,
            "linial_steps": [{"q": s.q, "d": s.d, "lo": s.lo} for s in self.linial_steps],
            "exit_prime": self.exit_prime,
            "m1": self.m1,
            "m2": self.m2,
            "m3": self.m3,
            "B": self.B,
            "lambda": self.lam,
            "mu": self.mu,
            "tau": self.tau,
            "q_a": self.q_a,
            "p_b": self.p_b,
            "log_nr": self.log_nr,
            "log_lam2m2": self.log_lam2m2,
            "ell1": self.ell1,
            "ell2": self.ell2,
            "ell3": self.ell3,
            "color_space": self.color_space,
            "k_hat_bound": self.k_hat_bound,
            "li_round_bound": self.li_round_bound,
            "li_core_bound": self.li_core_bound,
            "li_i3_bound": self.li_i3_bound,
            "ss_i2i3_offset": self.ss_i2i3_offset,
            "ss_core_offset": self.ss_core_offset,
            "ss_i3_offset": self.ss_i3_offset,
            "ss_stab_offset": self.ss_stab_offset,
        }
        return d


def derive(n: int, delta: int) -> Params:
    """Derive all parameters for an n-vertex graph with max degree delta."""
    if not isinstance(n, int) or not isinstance(delta, int):
        raise DeriveError("n and delta must be integers")
    if n < 2:
        raise DeriveError(f"n must be >= 2, got {n}")
    if not 1 <= delta <= n - 1:
        raise DeriveError(f"delta must be in [1, n-1], got {delta}")

    rho = ceil_root4(delta)
    n_seq, raw_steps = _linial_schedule(n, delta)
    r_star = len(n_seq) - 1
    nr = n_seq[-1]
    log_nr = ceil_log2(nr)

    fallback = delta < DELTA_MIN
    m1 = m2 = m3 = B = lam = mu = tau = q_a = p_b = log_lam2m2 = None
    exit_prime = None
    k_hat_bound = None

    if not fallback:
        # Fa prime: smallest p with p*(rho+1) > (delta+1)*log_nr keeps the
        # family Delta-union-(rho+1)-cover-free by the counting argument.
        q_a = 2
        while not (is_prime(q_a) and q_a * (rho + 1) > (delta + 1) * log_nr):
            q_a += 1
        m1 = max(4 * delta * ceil_sqrt(delta) * log_nr * log_nr, q_a * q_a)
        lam = smallest_prime_in(ceil_sqrt(m1) + 1, 2 * (ceil_sqrt(m1) + 1))
        p_b = 2
        while not (is_prime(p_b) and p_b > rho * log_nr):
            p_b += 1
        m2 = max(4 * ceil_sqrt(delta) * log_nr * log_nr, p_b * p_b)
        log_lam2m2 = ceil_log2(lam * lam * m2)
        m3 = max(16 * ceil_sqrt(delta) * log_lam2m2 * log_lam2m2, m2)
        # tau in (sqrt(m3), 2*sqrt(m3)]: p > isqrt(m3) is exactly p^2 > m3
        tau = smallest_prime_in(isqrt(m3), 2 * isqrt(m3))
        s = ceil_sqrt(delta) + ceil_sqrt(m3)
        mu = smallest_prime_in(max(s, tau), 2 * max(s, tau))
        # Claim-level regime: delta/mu + 4*rho < mu, exact integer form
        if delta + 4 * rho * mu >= mu * mu:
            fallback = True
            m1 = m2 = m3 = B = lam = mu = tau = q_a = p_b = log_lam2m2 = None
        else:
            B = max(m2, tau * tau)
            k_hat_bound = delta // mu + 4 * rho

    if fallback:
        # Degree-1 exit family over GF(exit_prime), target I3 = [0, exit_prime^2).
        # For r_star >= 1 exit_prime == q_{r*} so ell3 == n_{r*} exactly.
        exit_prime = _smallest_prime_at_least(max(delta + 1, ceil_sqrt(nr)))
        ell3 = exit_prime * exit_prime
        ell2 = 0
    else:
        assert lam is not None and mu is not None and tau is not None and B is not None
        ell3 = delta + (2 * ceil_sqrt(m3) + 1) * mu
        ell2 = 2 * lam**3 * (mu + 1) * B
    ell1 = sum(n_seq)

    if ell3 + ell2 + ell1 >= MAX_COLOR_SPACE:
        raise DeriveError(
            f"color space {ell3 + ell2 + ell1} exceeds 64 bits for (n={n}, delta={delta})"
        )

    i3_lo = 0
    i2_lo = ell3
    i1_lo = ell3 + ell2
    # I1^(t) = [i1_lo + sum(n_seq[t+1:]), i1_lo + sum(n_seq[t:]))
    suffix = [0] * (r_star + 2)
    for t in range(r_star, -1, -1):
        suffix[t] = suffix[t + 1] + n_seq[t]
    i1_sub_lo = tuple(i1_lo + suffix[t + 1] for t in range(r_star + 1))

    linial_steps = tuple(
        LinialStep(q=q, d=d, lo=i1_sub_lo[t + 1]) for t, (q, d) in enumerate(raw_steps)
    )

    if fallback:
        li_i3_bound = r_star + 1
        li_core_bound = r_star + 1
        li_round_bound = r_star + ell3 - delta
        ss_i2i3_offset = r_star + 2
        ss_core_offset = r_star + 2
        ss_i3_offset = r_star + 2
        ss_stab_offset = r_star + 1 + ell3 - delta
    else:
        sq_m3 = ceil_sqrt(m3)
        li_core_bound = r_star + 2 + lam
        li_i3_bound = r_star + 2 + 3 * lam
        li_round_bound = r_star + 1 + 3 * lam + (2 * sq_m3 + 1) * mu
        ss_i2i3_offset = r_star + 2
        ss_core_offset = r_star + 3 + lam
        ss_i3_offset = r_star + 3 + 4 * lam
        ss_stab_offset = r_star + 4 * lam + 2 + 2 * (sq_m3 + 1) * mu

    return Params(
        n=n,
        delta=delta,
        rho=rho,
        fallback=fallback,
        n_seq=tuple(n_seq),
        r_star=r_star,
        linial_steps=linial_steps,
        exit_prime=exit_prime,
        m1=m1,
        m2=m2,
        m3=m3,
        B=B,
        lam=lam,
        mu=mu,
        tau=tau,
        q_a=q_a,
        p_b=p_b,
        log_nr=log_nr,
        log_lam2m2=log_lam2m2,
        ell1=ell1,
        ell2=ell2,
        ell3=ell3,
        i1_lo=i1_lo,
        i2_lo=i2_lo,
        i3_lo=i3_lo,
        i1_sub_lo=i1_sub_lo,
        k_hat_bound=k_hat_bound,
        li_round_bound=li_round_bound,
        li_core_bound=li_core_bound,
        li_i3_bound=li_i3_bound,
        ss_i2i3_offset=ss_i2i3_offset,
        ss_core_offset=ss_core_offset,
        ss_i3_offset=ss_i3_offset,
        ss_stab_offset=ss_stab_offset,
    )


def classify(params: Params, color: int) -> Phase:
    """Map a color to its phase interval; I1 colors also carry the
    sub-interval index t' with color in I1^(t')."""
    if not 0 <= color < params.color_space:
        raise ValueError(f"color {color} outside [0, {params.color_space})")
    if color < params.ell3:
        return Phase("I3")
    if color < params.i1_lo:
        return Phase("I2")
    # walk sub-intervals from the bottom one, I1^(r*)
    for t in range(params.r_star, -1, -1):
        lo, hi = params.i1_sub_bounds(t)
        if lo <= color < hi:
            return Phase("I1", t)
    raise AssertionError("unreachable: I1 sub-intervals tile I1")
