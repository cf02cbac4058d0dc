"""Prime sieving, factorization tables and divisor logs.

Everything downstream consumes either a SpfTable (smallest-prime-factor
array) or the sorted multiset {log d : d | n} produced here.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

SPF_LIMIT_CAP = 200_000_000
TAU_CAP = 1 << 20


class ResourceLimitError(Exception):
    """A configured size cap was exceeded."""


class RangeError(Exception):
    def __init__(self, n, limit):
        super().__init__(f"n={n} exceeds table limit {limit}")


@dataclass(frozen=True)
class SpfTable:
    """Smallest prime factor of every n in 2..limit.

    Immutable after construction; safe to share across worker processes.
    """

    limit: int
    spf: np.ndarray

    def __post_init__(self):
        self.spf.setflags(write=False)


@dataclass(frozen=True)
class Factorization:
    """n as an ordered tuple of (prime, exponent) pairs, primes ascending."""

    n: int
    pairs: tuple


def build_spf(limit, cap=SPF_LIMIT_CAP):
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if limit > cap:
        raise ResourceLimitError(f"limit {limit} exceeds cap {cap}")
    return SpfTable(limit=limit, spf=kernels.spf_sieve(limit))


def factorize(n, table):
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return Factorization(1, ())
    if n > table.limit:
        raise RangeError(n, table.limit)
    return Factorization(n, tuple(kernels.factor_pairs(n, table.spf)))


def divisor_logs(f, tau_cap=TAU_CAP):
    """Sorted log-divisor array; each entry is a sum e_i * log p_i.

    Values are assembled from exponent-weighted prime logs rather than as
    log(d), so equal rationals d/d' cancel consistently in window
    comparisons.
    """
    nd = 1
    for _, e in f.pairs:
        nd *= e + 1
    if nd > tau_cap:
        raise ResourceLimitError(f"tau(n) = {nd} exceeds cap {tau_cap}")
    return kernels.divisor_logs_from_pairs(f.pairs)


def arith_stats(f):
    """(tau, omega, mu_squared, Omega) of a factorization."""
    tau = 1
    Omega = 0
    mu2 = 1
    for _, e in f.pairs:
        tau *= e + 1
        Omega += e
        if e > 1:
            mu2 = 0
    return tau, len(f.pairs), mu2, Omega


def primes_up_to(limit):
    """Ascending int64 array of primes <= limit (simple numpy sieve)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def trial_division(n):
    """Independent factorization oracle for cross-checks."""
    pairs = []
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            pairs.append((d, e))
        d += 1
    if m > 1:
        pairs.append((m, 1))
    return tuple(pairs)
