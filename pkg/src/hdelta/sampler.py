"""Monte Carlo realization of the independent-prime-inclusion model.

The measure on squarefree integers supported on primes below x assigns
P({n}) = (rho(n)/n) * prod_{p<x} (1 + rho(p)/p)^(-1), which factorizes as
independent inclusion of each prime p with probability
rho(p)/(p + rho(p)).  Sampled integers are kept as prime lists and never
assembled (they routinely exceed 64 bits).

Sampling is chunked: chunk c draws from Philox keyed by
SeedSequence(seed, spawn_key=(c,)), so estimates depend only on
(seed, chunk_size), not on the worker count.
"""

import math
import multiprocessing
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from . import kernels, weights
from .factor import primes_up_to

OMEGA_CAP = 30
RNG_ALGORITHM = "philox"
DEFAULT_CHUNK = 8192

# inclusion probabilities above this are drawn as full Bernoulli masks;
# the sparse tail uses per-prime binomial counts + Floyd subset sampling
_HEAD_PROB = 0.03


@dataclass(frozen=True)
class RandomSquarefree:
    primes: tuple
    log_n: float
    omega: int


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    rejected_fraction: float = 0.0
    stat: str = ""
    x: float = 0.0
    z: float = 0.0
    T: Optional[float] = None
    chunk_size: int = DEFAULT_CHUNK
    algorithm: str = RNG_ALGORITHM


class DegenerateEstimateError(Exception):
    """Every sample was rejected; no estimate exists."""


def model_primes(x, w):
    """(primes < x, inclusion probabilities) for the weight family."""
    if x < 2:
        raise ValueError("x must be >= 2")
    ps = primes_up_to(int(math.ceil(x)) - 1)
    ps = ps[ps < x]
    rho = w.rho_primes(ps)
    probs = rho / (ps + rho)
    return ps, probs


def sample(x, w, rng):
    """One draw from the model (vectorized Bernoulli over all primes)."""
    ps, probs = model_primes(x, w)
    mask = rng.random(len(ps)) < probs
    chosen = ps[mask]
    return RandomSquarefree(
        primes=tuple(int(p) for p in chosen),
        log_n=float(np.sum(np.log(chosen))) if len(chosen) else 0.0,
        omega=int(mask.sum()),
    )


def _floyd_subset(rng, n, k):
    """Uniform k-subset of range(n) by Floyd's algorithm."""
    chosen = set()
    for j in range(n - k, n):
        t = int(rng.integers(0, j + 1))
        if t in chosen:
            chosen.add(j)
        else:
            chosen.add(t)
    return chosen


def _draw_chunk(ps, probs, count, rng):
    """count independent draws; returns a list of index lists into ps."""
    members = [[] for _ in range(count)]
    head = np.nonzero(probs >= _HEAD_PROB)[0]
    for i in head:
        mask = rng.random(count) < probs[i]
        for s in np.nonzero(mask)[0]:
            members[s].append(i)
    tail = np.nonzero(probs < _HEAD_PROB)[0]
    for i in tail:
        k = int(rng.binomial(count, probs[i]))
        if k == 0:
            continue
        for s in _floyd_subset(rng, count, k):
            members[s].append(i)
    return members


def _chunk_rng(seed, chunk_index):
    return Generator(Philox(SeedSequence(entropy=seed, spawn_key=(chunk_index,))))


class _SampleCtx:
    """Lazy per-sample quantities handed to statistic callables."""

    __slots__ = ("prime_values", "omega", "_logs", "_delta", "_m2")

    def __init__(self, prime_values):
        self.prime_values = prime_values
        self.omega = len(prime_values)
        self._logs = None
        self._delta = None
        self._m2 = None

    @property
    def logs(self):
        if self._logs is None:
            self._logs = kernels.divisor_logs_from_pairs([(p, 1) for p in self.prime_values])
        return self._logs

    @property
    def tau(self):
        return 1 << self.omega

    def delta_m2(self):
        if self._delta is None:
            self._delta, self._m2 = kernels.delta_m2(self.logs)
        return self._delta, self._m2

    def moment(self, q):
        return float(kernels.moments(self.logs, np.array([float(q)]))[0])


def _resolve_stat(stat, x, w, params):
    """Map a statistic name to a per-sample callable."""
    params = params or {}
    if stat == "omega":
        return lambda c: float(c.omega)
    if stat == "delta0":
        return lambda c: 1.0
    if stat == "m1_over_tau":
        return lambda c: 1.0
    if stat == "delta_pow":
        t = params.get("t", 1.0)
        return lambda c: float(c.delta_m2()[0]) ** t
    if stat == "m2_over_tau_pow":
        t = params.get("t", 1.0)
        return lambda c: (c.delta_m2()[1] / c.tau) ** t
    if stat == "m2_chi_over_tau":
        h = params["h"]
        return lambda c: (c.delta_m2()[1] / c.tau) if c.omega == h else 0.0
    if stat == "mq_over_tau":
        q = params["q"]
        restrict = params.get("restrict_H")
        if restrict is None:
            return lambda c: c.moment(q) / c.tau
        T = restrict["T"]
        gamma = restrict.get("gamma", 0)
        seq = weights.ThetaSequence(T=T, delta=gamma, C_0=restrict.get("C_0", 10.0))
        hq = restrict.get("level", q - 1)

        def fn(c):
            if not weights.mem_E_T_primes(c.prime_values, T):
                return 0.0
            for j in range(2, hq + 1):
                if c.moment(j) > c.tau * seq.theta(j):
                    return 0.0
            return c.moment(q) / c.tau

        return fn
    raise ValueError(f"unknown statistic {stat!r}")


def _resolve_event(event, x, w, params):
    params = params or {}
    if event == "not_in_E_T":
        T = params["T"]
        variant = params.get("variant", "plain")
        tp = params.get("trunc")
        if variant == "tz" and tp is None:
            tp = weights.TruncationParams(T=max(T, 2.0), t=params.get("t", 1.0), z=w.z)
        return lambda c: 0.0 if weights.mem_E_T_primes(c.prime_values, T, variant, tp) else 1.0
    if event == "delta_gt":
        lam = params["lam"]
        thresh = lam * math.log(math.log(x))
        return lambda c: 1.0 if c.delta_m2()[0] > thresh else 0.0
    raise ValueError(f"unknown event {event!r}")


def _accumulate(ps, probs, fns, n_samples, seed, chunk_size, omega_cap):
    """Serial accumulation over chunks; returns per-fn (count, sum, sumsq)
    plus the rejected-sample count."""
    sums = np.zeros(len(fns))
    sumsqs = np.zeros(len(fns))
    accepted = 0
    rejected = 0
    n_chunks = (n_samples + chunk_size - 1) // chunk_size
    prime_list = [int(p) for p in ps]
    for c in range(n_chunks):
        count = min(chunk_size, n_samples - c * chunk_size)
        rng = _chunk_rng(seed, c)
        for idxs in _draw_chunk(ps, probs, count, rng):
            if len(idxs) > omega_cap:
                rejected += 1
                continue
            ctx = _SampleCtx([prime_list[i] for i in sorted(idxs)])
            accepted += 1
            for k, fn in enumerate(fns):
                v = fn(ctx)
                sums[k] += v
                sumsqs[k] += v * v
    return accepted, rejected, sums, sumsqs


_FORK_JOB = {}


def _pool_worker(args):
    lo, hi = args
    ps, probs, fns, n_samples, seed, chunk_size, omega_cap = _FORK_JOB["job"]
    total = np.zeros(len(fns))
    totsq = np.zeros(len(fns))
    acc = rej = 0
    prime_list = [int(p) for p in ps]
    for c in range(lo, hi):
        count = min(chunk_size, n_samples - c * chunk_size)
        rng = _chunk_rng(seed, c)
        for idxs in _draw_chunk(ps, probs, count, rng):
            if len(idxs) > omega_cap:
                rej += 1
                continue
            ctx = _SampleCtx([prime_list[i] for i in sorted(idxs)])
            acc += 1
            for k, fn in enumerate(fns):
                v = fn(ctx)
                total[k] += v
                totsq[k] += v * v
    return acc, rej, total, totsq


def _run(ps, probs, fns, n_samples, seed, chunk_size, omega_cap, n_workers):
    if n_workers <= 1:
        return _accumulate(ps, probs, fns, n_samples, seed, chunk_size, omega_cap)
    n_chunks = (n_samples + chunk_size - 1) // chunk_size
    _FORK_JOB["job"] = (ps, probs, fns, n_samples, seed, chunk_size, omega_cap)
    bounds = np.linspace(0, n_chunks, n_workers + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    try:
        with multiprocessing.get_context("fork").Pool(n_workers) as pool:
            parts = pool.map(_pool_worker, jobs)
    finally:
        _FORK_JOB.clear()
    accepted = sum(p[0] for p in parts)
    rejected = sum(p[1] for p in parts)
    sums = np.sum([p[2] for p in parts], axis=0)
    sumsqs = np.sum([p[3] for p in parts], axis=0)
    return accepted, rejected, sums, sumsqs


def _estimates(stat_names, accepted, rejected, sums, sumsqs, seed, x, w, chunk_size, Ts=None):
    if accepted == 0:
        raise DegenerateEstimateError("all samples rejected")
    out = []
    for k, name in enumerate(stat_names):
        mean = sums[k] / accepted
        if accepted > 1:
            var = max(0.0, (sumsqs[k] - accepted * mean * mean) / (accepted - 1))
        else:
            var = 0.0
        out.append(
            Estimate(
                mean=float(mean),
                std_error=float(math.sqrt(var / accepted)),
                n_samples=accepted,
                seed=seed,
                rejected_fraction=rejected / (accepted + rejected),
                stat=name,
                x=x,
                z=w.z,
                T=None if Ts is None else Ts[k],
                chunk_size=chunk_size,
            )
        )
    return out


def expect(stat, x, w, n_samples, seed, params=None, chunk_size=DEFAULT_CHUNK,
           omega_cap=OMEGA_CAP, n_workers=1):
    """Monte Carlo estimate of E[stat] under the model at cutoff x."""
    ps, probs = model_primes(x, w)
    fn = _resolve_stat(stat, x, w, params)
    acc, rej, s, sq = _run(ps, probs, [fn], n_samples, seed, chunk_size, omega_cap, n_workers)
    return _estimates([stat], acc, rej, s, sq, seed, x, w, chunk_size)[0]


def tail_prob(event, x, w, params, n_samples, seed, chunk_size=DEFAULT_CHUNK,
              omega_cap=OMEGA_CAP, n_workers=1):
    """Estimated probability of a named event (indicator mean)."""
    ps, probs = model_primes(x, w)
    fn = _resolve_event(event, x, w, params)
    acc, rej, s, sq = _run(ps, probs, [fn], n_samples, seed, chunk_size, omega_cap, n_workers)
    est = _estimates([event], acc, rej, s, sq, seed, x, w, chunk_size)[0]
    T = (params or {}).get("T")
    return est if T is None else replace(est, T=float(T))


def tail_prob_sweep(event, x, w, T_list, n_samples, seed, params=None,
                    chunk_size=DEFAULT_CHUNK, omega_cap=OMEGA_CAP, n_workers=1):
    """Event probabilities over a T grid with common random numbers: every
    T sees the same realized samples, so a pathwise-monotone event yields
    exactly monotone estimates."""
    ps, probs = model_primes(x, w)
    base = dict(params or {})
    fns = []
    for T in T_list:
        p = dict(base)
        p["T"] = T
        fns.append(_resolve_event(event, x, w, p))
    acc, rej, s, sq = _run(ps, probs, fns, n_samples, seed, chunk_size, omega_cap, n_workers)
    return _estimates([event] * len(T_list), acc, rej, s, sq, seed, x, w, chunk_size,
                      Ts=list(T_list))


def exhaustive_check(x, w, max_primes=10):
    """Exact small-support oracle: all atoms of the model with their
    probabilities.  Returns a list of (primes_tuple, n, probability)."""
    ps, probs = model_primes(x, w)
    if len(ps) > max_primes:
        raise ValueError(f"support holds {len(ps)} primes, above the cap {max_primes}")
    atoms = []
    for mask in range(1 << len(ps)):
        pr = 1.0
        chosen = []
        n = 1
        for i, (p, q) in enumerate(zip(ps, probs)):
            if mask >> i & 1:
                pr *= q
                chosen.append(int(p))
                n *= int(p)
            else:
                pr *= 1.0 - q
        atoms.append((tuple(chosen), n, pr))
    return atoms


def exact_expectation(atoms, fn):
    """Exact E[fn] over an exhaustive_check atom table."""
    return sum(pr * fn(_SampleCtx(list(chosen))) for chosen, _, pr in atoms)
