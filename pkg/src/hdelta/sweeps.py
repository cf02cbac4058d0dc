"""Full-range Delta statistics for all n <= x and the weighted moment sums.

A single pass factors every n via the shared spf table, generates its
divisor logs and runs the merged window sweep, producing the per-n columns
(tau, omega, mu2, delta, m2).  Work is split into blocks; workers own
disjoint blocks and the reduction is an associative merge, so results are
independent of block size and worker count.  Weighted sums use pairwise
summation inside blocks and exact compensated merging (math.fsum) across
blocks.
"""

import math
import multiprocessing
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels, sampler
from .factor import build_spf
from .weights import WeightFamily, exponents

DEFAULT_BLOCK = 1 << 18
CACHE_MAGIC = b"HDL1"
CACHE_VERSION = 1

_SHARED = {}


@dataclass(frozen=True)
class DeltaRow:
    n: int
    tau: int
    omega: int
    mu2: int
    delta: int
    m2: float


@dataclass(frozen=True)
class SweepRecord:
    x: float
    t: float
    z: float
    S: float
    normalized: float


def _alloc(size):
    return {
        "tau": np.zeros(size, dtype=np.int64),
        "omega": np.zeros(size, dtype=np.int64),
        "mu2": np.zeros(size, dtype=np.uint8),
        "delta": np.zeros(size, dtype=np.int64),
        "m2": np.zeros(size, dtype=np.float64),
    }


def _compute_block(args):
    lo, hi = args
    spf = _SHARED["spf"]
    cols = _alloc(hi - lo)
    kernels.block_stats(spf, lo, hi, cols["tau"], cols["omega"], cols["mu2"],
                        cols["delta"], cols["m2"])
    return lo, cols


def _block_ranges(lo, hi, block_size, boundaries=()):
    cuts = sorted({lo, hi, *[b for b in boundaries if lo < b < hi]})
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        for s in range(a, b, block_size):
            out.append((s, min(s + block_size, b)))
    return out


def _run_blocks(fn, ranges, n_workers):
    if n_workers <= 1:
        for r in ranges:
            yield fn(r)
        return
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(n_workers) as pool:
        yield from pool.imap(fn, ranges, chunksize=1)


_COLUMN_DTYPES = {
    "tau": np.int64,
    "omega": np.int64,
    "mu2": np.uint8,
    "delta": np.int64,
    "m2": np.float64,
}


def _fill_slot(args):
    lo, hi, slot = args
    spf = _SHARED["spf"]
    bufs = _SHARED["slots"]
    n = hi - lo
    kernels.block_stats(spf, lo, hi, bufs["tau"][slot, :n], bufs["omega"][slot, :n],
                        bufs["mu2"][slot, :n], bufs["delta"][slot, :n],
                        bufs["m2"][slot, :n])
    return lo, hi, slot


def _shared_slots(n_slots, block_size):
    """Anonymous MAP_SHARED buffers: workers forked after this write into
    them in place, so block results never cross a pipe."""
    import mmap

    slots = {}
    for name, dt in _COLUMN_DTYPES.items():
        nbytes = n_slots * block_size * np.dtype(dt).itemsize
        buf = mmap.mmap(-1, nbytes)
        slots[name] = np.frombuffer(buf, dtype=dt).reshape(n_slots, block_size)
    return slots


def delta_table(x_max, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Yield (lo, columns) blocks covering 1..x_max in ascending order.

    The yielded arrays are fresh copies owned by the caller.
    """
    if spf is None:
        spf = build_spf(max(x_max, 2)).spf
    ranges = _block_ranges(1, x_max + 1, block_size)
    if n_workers <= 1:
        _SHARED["spf"] = spf
        try:
            for r in ranges:
                yield _compute_block(r)
        finally:
            _SHARED.pop("spf", None)
        return
    _SHARED["spf"] = spf
    _SHARED["slots"] = _shared_slots(n_workers, block_size)
    try:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(n_workers) as pool:
            for w0 in range(0, len(ranges), n_workers):
                wave = ranges[w0 : w0 + n_workers]
                jobs = [(lo, hi, slot) for slot, (lo, hi) in enumerate(wave)]
                for lo, hi, slot in pool.map(_fill_slot, jobs):
                    n = hi - lo
                    yield lo, {name: np.array(_SHARED["slots"][name][slot, :n])
                               for name in _COLUMN_DTYPES}
    finally:
        _SHARED.pop("spf", None)
        _SHARED.pop("slots", None)


def delta_rows(x_max, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Row-by-row view of delta_table."""
    for lo, cols in delta_table(x_max, block_size, n_workers, spf):
        for i in range(len(cols["tau"])):
            yield DeltaRow(
                n=lo + i,
                tau=int(cols["tau"][i]),
                omega=int(cols["omega"][i]),
                mu2=int(cols["mu2"][i]),
                delta=int(cols["delta"][i]),
                m2=float(cols["m2"][i]),
            )


def _block_s_partials(args):
    lo, hi, t_list, z = args
    spf = _SHARED["spf"]
    cols = _alloc(hi - lo)
    kernels.block_stats(spf, lo, hi, cols["tau"], cols["omega"], cols["mu2"],
                        cols["delta"], cols["m2"])
    weight = z ** cols["omega"].astype(np.float64)
    delta = cols["delta"].astype(np.float64)
    return lo, [float(np.sum(weight * delta**t)) for t in t_list]


def s_moment_grid(x_grid, t_list, z, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Exact S_{t,rho}(x) at every grid point, one sweep, weight z^omega(n)
    over all n <= x (omega from the full factorization)."""
    x_grid = sorted(int(x) for x in x_grid)
    x_max = x_grid[-1]
    if spf is None:
        spf = build_spf(max(x_max, 2)).spf
    _SHARED["spf"] = spf
    try:
        ranges = _block_ranges(1, x_max + 1, block_size,
                               boundaries=[x + 1 for x in x_grid])
        jobs = [(lo, hi, tuple(t_list), z) for lo, hi in ranges]
        partials = {}
        for lo, vals in _run_blocks(_block_s_partials, jobs, n_workers):
            partials[lo] = vals
    finally:
        _SHARED.pop("spf", None)
    records = {}
    for k, t in enumerate(t_list):
        running = []
        total_at = {}
        for lo, hi in ranges:
            running.append(partials[lo][k])
            total_at[hi - 1] = math.fsum(running)
        out = []
        for x in x_grid:
            S = total_at[x]
            expo = max(exponents(t, z).beta, z) - 1.0
            norm = S / (x * math.log(x) ** expo) if x > 1 else math.nan
            out.append(SweepRecord(x=float(x), t=float(t), z=float(z), S=S,
                                   normalized=norm))
        records[t] = out
    return records


def s_moment(x, t, w, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Exact S_{t,rho}(x); constant-rule families take the z^omega fast
    path, general prime rules walk the factorizations (small x only)."""
    if isinstance(w, (int, float)):
        w = WeightFamily(z=float(w))
    if w.is_constant:
        rec = s_moment_grid([x], [t], w.z, block_size, n_workers, spf)[t][0]
        return rec
    if spf is None:
        spf = build_spf(max(int(x), 2)).spf
    parts = []
    for n in range(1, int(x) + 1):
        pairs = kernels.factor_pairs(n, spf) if n > 1 else []
        rho = float(np.prod(w.rho_primes(np.array([p for p, _ in pairs]))))
        logs = kernels.divisor_logs_from_pairs(pairs)
        d = kernels.delta_max(logs) if n > 1 else 1
        parts.append(rho * d**t)
    S = math.fsum(parts)
    e = exponents(t, w.z)
    norm = S / (x * math.log(x) ** (max(e.beta, w.z) - 1.0)) if x > 1 else math.nan
    return SweepRecord(x=float(x), t=float(t), z=w.z, S=S, normalized=norm)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    target: float
    residuals: tuple
    records: tuple

    @property
    def gap(self):
        return self.slope - self.target


def fit_slope_loglog2(x_list, s_list):
    """Least-squares slope of log(S/x) against log log x."""
    x = np.asarray(x_list, dtype=np.float64)
    s = np.asarray(s_list, dtype=np.float64)
    u = np.log(np.log(x))
    y = np.log(s / x)
    A = np.column_stack([u, np.ones_like(u)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), tuple(float(r) for r in resid)


def exponent_fit(x_grid, t, z, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Fit the loglog-x slope of S/x over a geometric grid and compare with
    max(beta, z) - 1.  Desk-scale caveat: iterated-log corrections are
    large at x <= 1e7, so this is a wide-band trend check by design."""
    if len(x_grid) < 4:
        raise ValueError("need at least 4 grid points")
    recs = s_moment_grid(x_grid, [t], z, block_size, n_workers, spf)[t]
    slope, intercept, resid = fit_slope_loglog2([r.x for r in recs], [r.S for r in recs])
    e = exponents(t, z)
    return ExponentFit(slope=slope, intercept=intercept,
                       target=max(e.beta, z) - 1.0, residuals=resid,
                       records=tuple(recs))


def ratio_31(x, t, w, n_samples, seed, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """S_{t,rho}(x) / (x (log 3x)^(z-1) E_hat(Delta^t)) with the expectation
    estimated by the sampler; returns (ratio, propagated std error)."""
    rec = s_moment(x, t, w, block_size, n_workers, spf)
    est = sampler.expect("delta_pow", x, w, n_samples, seed, params={"t": t})
    denom = x * math.log(3 * x) ** (w.z - 1.0) * est.mean
    ratio = rec.S / denom
    return ratio, ratio * est.std_error / est.mean


# -------------------------------------------------------------- binary cache

_HEADER = struct.Struct("<4sIQQ")
_BLOCK_HEADER = struct.Struct("<QQ")
_COLUMNS = ("tau", "omega", "mu2", "delta", "m2")


def _pack_block(lo, cols):
    size = len(cols["tau"])
    parts = [_BLOCK_HEADER.pack(lo, size)]
    for name in _COLUMNS:
        arr = cols[name]
        dt = "<f8" if name == "m2" else "<i8"
        parts.append(arr.astype(dt).tobytes())
    return b"".join(parts)


def write_cache(path, x_max, blocks):
    """Write blocks (iterable of (lo, cols)) to a new cache file."""
    rows = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, x_max, 0))
        for lo, cols in blocks:
            fh.write(_pack_block(lo, cols))
            rows += len(cols["tau"])
        fh.seek(0)
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, x_max, rows))
    return rows


def read_cache(path):
    """Read a cache back as (x_max, columns dict over 1..n_covered)."""
    with open(path, "rb") as fh:
        magic, version, x_max, rows = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC:
            raise ValueError("not a delta-table cache (bad magic)")
        if version != CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        chunks = {}
        while True:
            head = fh.read(_BLOCK_HEADER.size)
            if not head:
                break
            lo, size = _BLOCK_HEADER.unpack(head)
            cols = {}
            for name in _COLUMNS:
                dt = "<f8" if name == "m2" else "<i8"
                cols[name] = np.frombuffer(fh.read(8 * size), dtype=dt)
            chunks[lo] = cols
    order = sorted(chunks)
    expect_lo = 1
    cat = {name: [] for name in _COLUMNS}
    for lo in order:
        if lo != expect_lo:
            raise ValueError(f"cache not contiguous at n={expect_lo}")
        for name in _COLUMNS:
            cat[name].append(chunks[lo][name])
        expect_lo = lo + len(chunks[lo]["tau"])
    out = {name: np.concatenate(cat[name]) if cat[name] else np.zeros(0) for name in _COLUMNS}
    return x_max, out


def resume_delta_table(path, x_max, block_size=DEFAULT_BLOCK, n_workers=1, spf=None):
    """Extend an existing cache to x_max (or create it); returns the
    covered row count after the run."""
    done = 0
    if os.path.exists(path):
        _, cols = read_cache(path)
        done = len(cols["tau"])
    if done >= x_max:
        return done
    if spf is None:
        spf = build_spf(x_max).spf
    _SHARED["spf"] = spf
    try:
        ranges = _block_ranges(done + 1, x_max + 1, block_size)
        mode = "r+b" if os.path.exists(path) else "w+b"
        with open(path, mode) as fh:
            if done == 0:
                fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, x_max, 0))
            fh.seek(0, os.SEEK_END)
            rows = done
            for lo, cols in _run_blocks(_compute_block, ranges, n_workers):
                fh.write(_pack_block(lo, cols))
                rows += len(cols["tau"])
            fh.seek(0)
            fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, x_max, rows))
    finally:
        _SHARED.pop("spf", None)
    return rows
