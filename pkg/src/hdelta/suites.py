"""Inequality and identity suites shared by the CLI and the acceptance tests.

Each check returns a SuiteResult; a False `ok` means a mathematical claim
was falsified at the stated tolerance (CLI exit code 1).
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import deltafn, kernels, weights
from .factor import build_spf

ADD_SLACK = 1e-9


@dataclass(frozen=True)
class SuiteResult:
    name: str
    ok: bool
    checked: int
    violations: int
    detail: str
    seconds: float


def _result(name, t0, checked, violations, detail=""):
    return SuiteResult(name=name, ok=violations == 0, checked=checked,
                       violations=violations, detail=detail,
                       seconds=time.time() - t0)


def _blocks(x_max, block=1 << 17):
    for lo in range(1, x_max + 1, block):
        yield lo, min(lo + block, x_max + 1)


def check_m1_equals_tau(x_max, spf=None, rel_tol=1e-8):
    """M_1(n) = tau(n) for all n <= x_max (analytic identity, exact
    integration)."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    qs = np.array([1.0])
    bad = 0
    worst = 0.0
    for lo, hi in _blocks(x_max):
        n = hi - lo
        tau = np.zeros(n, dtype=np.int64)
        delta = np.zeros(n, dtype=np.int64)
        mq = np.zeros((n, 1))
        kernels.block_moments(spf, lo, hi, qs, tau, delta, mq)
        err = np.abs(mq[:, 0] - tau) / tau
        bad += int(np.sum(err > rel_tol))
        worst = max(worst, float(err.max()))
    return _result("M1 == tau", t0, x_max, bad, f"worst rel err {worst:.2e}")


def check_m2_oracle(x_max, spf=None, rel_tol=1e-9):
    """Step-function M_2 against the quadratic pair-overlap oracle."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    bad = 0
    worst = 0.0
    for n in range(1, x_max + 1):
        pairs = kernels.factor_pairs(n, spf) if n > 1 else []
        logs = kernels.divisor_logs_from_pairs(pairs)
        step = deltafn.m_q(logs, 2).value
        oracle = deltafn.m2_pair_oracle(logs)
        err = abs(step - oracle) / oracle
        worst = max(worst, err)
        if err > rel_tol:
            bad += 1
    return _result("M2 step == pair oracle", t0, x_max, bad, f"worst rel err {worst:.2e}")


def check_delta_brute(x_max, spf=None):
    """Sweep Delta against the exhaustive anchored-window maximum."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    bad = 0
    for lo, hi in _blocks(x_max, block=1 << 19):
        bad += int(kernels.block_check_delta(spf, lo, hi))
    return _result("Delta sweep == anchored brute force", t0, x_max, bad)


def check_lower_bound(x_max, spf=None):
    """Delta(n) >= max(1, tau(n)/(1 + log n))."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    bad = 0
    for lo, hi in _blocks(x_max):
        n = hi - lo
        cols = {
            "tau": np.zeros(n, dtype=np.int64),
            "omega": np.zeros(n, dtype=np.int64),
            "mu2": np.zeros(n, dtype=np.uint8),
            "delta": np.zeros(n, dtype=np.int64),
            "m2": np.zeros(n),
        }
        kernels.block_stats(spf, lo, hi, cols["tau"], cols["omega"], cols["mu2"],
                            cols["delta"], cols["m2"])
        ns = np.arange(lo, hi, dtype=np.float64)
        bound = np.maximum(1.0, cols["tau"] / (1.0 + np.log(ns)))
        bad += int(np.sum(cols["delta"] < bound))
    return _result("Delta >= max(1, tau/(1+log n))", t0, x_max, bad)


def _rand_triples(rng, n_triples, n_max, p_max, q_set, spf):
    primes = [int(p) for p in np.nonzero(spf[: p_max + 1] == np.arange(p_max + 1, dtype=spf.dtype))[0] if p >= 2]
    made = 0
    while made < n_triples:
        n = int(rng.integers(1, n_max + 1))
        p = primes[int(rng.integers(0, len(primes)))]
        if n % p == 0:
            continue
        q = int(q_set[int(rng.integers(0, len(q_set)))])
        made += 1
        yield n, p, q


def check_moment_chain(n_triples, n_max, p_max, q_set=(2, 3, 4), seed=0, spf=None,
                       tol=ADD_SLACK):
    """The multiplication chain and its consequences on random triples
    (n, p, q) with p prime, p not dividing n:

      2 M_q(n) <= M_q(np) <= 2 M_q(n) + 2 W_q(n,p) <= 2^q M_q(n)
      W_q(n,v) <= 2^(q-1) M_q(n)
      W_q(n,v) <= 2^(q-1) (N_{1,q} + N_{q-1,q})
      M_q/tau monotone with increment at most W_q/tau, capped by
      2^(q-1) M_q/tau  (the subadditivity hypothesis for f = M_q/tau)
    """
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(n_max, 2)).spf
    rng = np.random.default_rng(seed)
    bad = 0
    for n, p, q in _rand_triples(rng, n_triples, n_max, p_max, q_set, spf):
        pairs = kernels.factor_pairs(n, spf) if n > 1 else []
        logs = kernels.divisor_logs_from_pairs(pairs)
        logs_np = np.sort(np.concatenate([logs, logs + math.log(p)]))
        tau = len(logs)
        Mq = deltafn.m_q(logs, q).value
        Mq_np = float(kernels.moments(logs_np, np.array([float(q)]))[0])
        W = deltafn.w_q(logs, q, float(p))
        n1 = deltafn.n_jq(logs, 1, q, float(p))
        nq1 = deltafn.n_jq(logs, q - 1, q, float(p))
        checks = (
            2 * Mq <= Mq_np + tol,
            Mq_np <= 2 * Mq + 2 * W + tol,
            2 * Mq + 2 * W <= 2**q * Mq + tol,
            W <= 2 ** (q - 1) * Mq + tol,
            W <= 2 ** (q - 1) * (n1 + nq1) + tol,
            Mq / tau <= Mq_np / (2 * tau) + tol,
            Mq_np / (2 * tau) <= Mq / tau + W / tau + tol,
            Mq / tau + W / tau <= 2 ** (q - 1) * Mq / tau + tol,
        )
        if not all(checks):
            bad += 1
    return _result("moment multiplication chain", t0, n_triples, bad)


def check_wq_random_v(n_cases, n_max, seed=0, spf=None, tol=ADD_SLACK):
    """W_q(n, v) <= 2^(q-1) M_q(n) over random real v in [1, n]."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(n_max, 2)).spf
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_cases):
        n = int(rng.integers(2, n_max + 1))
        v = float(rng.uniform(1.0, n))
        q = int(rng.choice([2, 3, 4]))
        logs = kernels.divisor_logs_from_pairs(kernels.factor_pairs(n, spf))
        W = deltafn.w_q(logs, q, v)
        Mq = deltafn.m_q(logs, q).value
        if W > 2 ** (q - 1) * Mq + tol:
            bad += 1
    return _result("W_q <= 2^(q-1) M_q (random v)", t0, n_cases, bad)


def check_delta_root_bound(x_max, q_range=(2, 8), spf=None, tol=ADD_SLACK):
    """Delta(n) <= 2 M_q(n)^(1/q) for all n <= x_max and the q range."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    qs = np.arange(q_range[0], q_range[1] + 1, dtype=np.float64)
    bad = 0
    for lo, hi in _blocks(x_max):
        n = hi - lo
        tau = np.zeros(n, dtype=np.int64)
        delta = np.zeros(n, dtype=np.int64)
        mq = np.zeros((n, len(qs)))
        kernels.block_moments(spf, lo, hi, qs, tau, delta, mq)
        for k, q in enumerate(qs):
            bad += int(np.sum(delta > 2.0 * mq[:, k] ** (1.0 / q) + tol))
    return _result("Delta <= 2 M_q^(1/q)", t0, x_max * (len(qs)), bad)


def check_splits(x_max, spf=None, tol=ADD_SLACK):
    """Delta(n)^2 <= 4 M_2(a) M_2(b) for every coprime split ab = n of
    every squarefree n <= x_max."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    m2 = np.zeros(x_max + 1)
    delta = np.zeros(x_max + 1, dtype=np.int64)
    for lo, hi in _blocks(x_max):
        n = hi - lo
        cols = {
            "tau": np.zeros(n, dtype=np.int64),
            "omega": np.zeros(n, dtype=np.int64),
            "mu2": np.zeros(n, dtype=np.uint8),
            "delta": np.zeros(n, dtype=np.int64),
            "m2": np.zeros(n),
        }
        kernels.block_stats(spf, lo, hi, cols["tau"], cols["omega"], cols["mu2"],
                            cols["delta"], cols["m2"])
        m2[lo:hi] = cols["m2"]
        delta[lo:hi] = cols["delta"]
    bad = 0
    checked = 0
    for n in range(1, x_max + 1):
        pairs = kernels.factor_pairs(n, spf) if n > 1 else []
        if any(e > 1 for _, e in pairs):
            continue
        d2 = float(delta[n]) ** 2
        k = len(pairs)
        for mask in range(1 << k):
            a = 1
            for i in range(k):
                if mask >> i & 1:
                    a *= pairs[i][0]
            b = n // a
            checked += 1
            if d2 > 4.0 * m2[a] * m2[b] + tol:
                bad += 1
    return _result("Delta^2 <= 4 M2(a) M2(b) over coprime splits", t0, checked, bad)


def check_et_closure(x_max, T_list=(2, 10, 100), spf=None):
    """Divisor closure of E_T over squarefree n <= x_max: if n is a member,
    every divisor is."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    bad = 0
    checked = 0
    for n in range(2, x_max + 1):
        pairs = kernels.factor_pairs(n, spf)
        if any(e > 1 for _, e in pairs):
            continue
        primes = [p for p, _ in pairs]
        for T in T_list:
            if not weights.mem_E_T_primes(primes, T):
                continue
            checked += 1
            k = len(primes)
            for mask in range(1 << k):
                sub = [primes[i] for i in range(k) if mask >> i & 1]
                if not weights.mem_E_T_primes(sub, T):
                    bad += 1
    return _result("E_T divisor closure", t0, checked, bad)


def check_parseval_band(x_max, spf=None, band=(0.5, 8.0)):
    """The Parseval ratio stays inside an empirical band; only boundedness
    is asserted (the comparability constants are unspecified)."""
    t0 = time.time()
    spf = spf if spf is not None else build_spf(max(x_max, 2)).spf
    lo_seen, hi_seen = math.inf, -math.inf
    bad = 0
    for n in range(1, x_max + 1):
        pairs = kernels.factor_pairs(n, spf) if n > 1 else []
        logs = kernels.divisor_logs_from_pairs(pairs)
        r = deltafn.parseval_ratio(logs)
        lo_seen = min(lo_seen, r)
        hi_seen = max(hi_seen, r)
        if not band[0] <= r <= band[1]:
            bad += 1
    return _result("Parseval ratio band", t0, x_max, bad,
                   f"observed [{lo_seen:.3f}, {hi_seen:.3f}]")
