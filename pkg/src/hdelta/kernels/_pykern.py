"""Pure-Python/numpy implementations of the hot kernels.

Mirrors the API of the compiled module `_ckern` exactly; selected as a
fallback at import time (see `hdelta.kernels`).  Correct at any scale but
roughly two orders of magnitude slower on the per-integer loops, so the
big sweeps (x ~ 1e7) are only practical on the compiled backend.
"""

import math

import numpy as np

BACKEND_NAME = "python"


def spf_sieve(limit):
    """Smallest-prime-factor table for 2..limit as a uint32 array.

    Entries 0 and 1 are unused (left at 0).
    """
    spf = np.zeros(limit + 1, dtype=np.uint32)
    if limit >= 2:
        spf[2::2] = 2
    for p in range(3, math.isqrt(limit) + 1, 2):
        if spf[p] == 0:
            sl = spf[p * p :: 2 * p]  # odd multiples only; evens already 2
            sl[sl == 0] = p
    rest = spf == 0
    rest[:2] = False
    idx = np.nonzero(rest)[0]
    spf[idx] = idx  # remaining untouched entries are primes
    return spf


def factor_pairs(n, spf):
    """(prime, exponent) pairs of n via the spf table, primes ascending."""
    pairs = []
    m = int(n)
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        pairs.append((p, e))
    return pairs


def divisor_logs_from_pairs(pairs):
    """Sorted array of log d over divisors d, as exponent-weighted prime-log sums."""
    logs = np.zeros(1)
    for p, e in pairs:
        lp = math.log(p)
        logs = (logs[None, :] + (np.arange(e + 1) * lp)[:, None]).ravel()
    logs.sort()
    return logs


def delta_max(logs):
    """Max number of divisor logs in a sliding window (u, u+1].

    The maximum over real u is attained with the window's right edge
    closed at some log d, so it suffices to scan those anchors.
    """
    n = len(logs)
    counts = np.arange(1, n + 1) - np.searchsorted(logs, logs - 1.0, side="right")
    return int(counts.max()) if n else 0


def delta_anchored_brute(logs):
    """Independent check: max of the window count over all 2*tau anchors."""
    anchors = np.concatenate([logs, logs - 1.0])
    hi = np.searchsorted(logs, anchors + 1.0, side="right")
    lo = np.searchsorted(logs, anchors, side="right")
    return int((hi - lo).max()) if len(logs) else 0


def _event_sweep(logs):
    """Sorted event positions and running level of u -> #{d: u < log d <= u+1}."""
    nd = len(logs)
    pos = np.concatenate([logs - 1.0, logs])
    sgn = np.concatenate([np.ones(nd, dtype=np.int64), -np.ones(nd, dtype=np.int64)])
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    level = np.cumsum(sgn[order])
    return pos, level


def delta_m2(logs):
    """(delta, m2) from one merged event sweep; the integral is summed
    exactly (math.fsum) to match the compensated compiled kernel."""
    pos, level = _event_sweep(logs)
    seg = np.diff(pos)
    lvl = level[:-1]
    m2 = math.fsum(seg * lvl.astype(float) ** 2)
    live = seg > 0
    delta = int(lvl[live].max()) if live.any() else int(level.max())
    return delta, m2


def moments(logs, qs):
    """Exact moments int Delta(n,u)^q du for each exponent in qs."""
    pos, level = _event_sweep(logs)
    seg = np.diff(pos)
    lvl = level[:-1].astype(float)
    keep = seg > 0
    seg = seg[keep]
    lvl = lvl[keep]
    return np.array([math.fsum(seg * lvl**q) for q in qs])


def block_stats(spf, lo, hi, tau, omega, mu2, delta, m2):
    """Fill per-n columns (tau, omega, mu2, delta, m2) for lo <= n < hi."""
    for n in range(lo, hi):
        i = n - lo
        if n == 1:
            tau[i], omega[i], mu2[i], delta[i], m2[i] = 1, 0, 1, 1, 1.0
            continue
        pairs = factor_pairs(n, spf)
        t = 1
        sqfree = 1
        for _, e in pairs:
            t *= e + 1
            if e > 1:
                sqfree = 0
        logs = divisor_logs_from_pairs(pairs)
        d, m = delta_m2(logs)
        tau[i] = t
        omega[i] = len(pairs)
        mu2[i] = sqfree
        delta[i] = d
        m2[i] = m


def block_check_delta(spf, lo, hi):
    """Count n in [lo, hi) where the sweep delta differs from the brute anchors."""
    bad = 0
    for n in range(lo, hi):
        if n == 1:
            continue
        logs = divisor_logs_from_pairs(factor_pairs(n, spf))
        if delta_max(logs) != delta_anchored_brute(logs):
            bad += 1
    return bad


def block_moments(spf, lo, hi, qs, tau, delta, mq):
    """Fill tau, delta and the len(qs) moment columns for lo <= n < hi."""
    for n in range(lo, hi):
        i = n - lo
        if n == 1:
            tau[i], delta[i] = 1, 1
            mq[i, :] = 1.0
            continue
        pairs = factor_pairs(n, spf)
        t = 1
        for _, e in pairs:
            t *= e + 1
        logs = divisor_logs_from_pairs(pairs)
        tau[i] = t
        delta[i] = delta_max(logs)
        mq[i, :] = moments(logs, qs)
