# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: spf sieve, divisor-log generation, window sweeps.

Same API as `_pykern`; the per-integer loops here are what make the
x ~ 1e7 sweeps and the n <= 1e6 exhaustive window checks feasible.
"""

from libc.stdlib cimport malloc, free, qsort
from libc.math cimport log, pow, floor, INFINITY

import numpy as np

BACKEND_NAME = "compiled"


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*> a)[0]
    cdef double y = (<const double*> b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


def spf_sieve(long limit):
    """Smallest-prime-factor table for 2..limit as a uint32 array."""
    arr = np.zeros(limit + 1, dtype=np.uint32)
    cdef unsigned int[::1] spf = arr
    cdef long i, p, step
    if limit >= 2:
        for i in range(2, limit + 1, 2):
            spf[i] = 2
    p = 3
    while p * p <= limit:
        if spf[p] == 0:
            step = 2 * p
            for i in range(p * p, limit + 1, step):
                if spf[i] == 0:
                    spf[i] = <unsigned int> p
        p += 2
    for i in range(3, limit + 1, 2):
        if spf[i] == 0:
            spf[i] = <unsigned int> i
    return arr


cdef int _factor(const unsigned int[::1] spf, long n,
                 double* logp, int* expo) noexcept nogil:
    """Factor n via the table; returns the number of distinct primes."""
    cdef long m = n
    cdef long p
    cdef int k = 0, e
    while m > 1:
        p = spf[m]
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        logp[k] = log(<double> p)
        expo[k] = e
        k += 1
    return k


cdef long _fill_logs(double* logp, int* expo, int k, double* buf) noexcept nogil:
    """Write the sorted divisor logs of the factored integer into buf."""
    cdef long s = 1, i, off
    cdef int j, t
    buf[0] = 0.0
    for t in range(k):
        for j in range(1, expo[t] + 1):
            off = j * s
            for i in range(s):
                buf[off + i] = buf[i] + j * logp[t]
        s *= expo[t] + 1
    qsort(buf, s, sizeof(double), _cmp_double)
    return s


cdef long _delta_sweep(const double* buf, long nd) noexcept nogil:
    """Two-pointer max of the window count, right edge anchored at each log d."""
    cdef long i = 0, j, c, best = 1
    cdef double thr
    for j in range(nd):
        thr = buf[j] - 1.0
        while buf[i] <= thr:
            i += 1
        c = j - i + 1
        if c > best:
            best = c
    return best


cdef long _upper_bound(const double* buf, long nd, double x) noexcept nogil:
    cdef long lo = 0, hi = nd, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if buf[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef long _delta_brute(const double* buf, long nd) noexcept nogil:
    """Max window count over the 2*tau anchors u in {log d} and {log d - 1}."""
    cdef long j, c, best = 0
    cdef double u
    for j in range(2 * nd):
        u = buf[j] if j < nd else buf[j - nd] - 1.0
        c = _upper_bound(buf, nd, u + 1.0) - _upper_bound(buf, nd, u)
        if c > best:
            best = c
    return best


cdef void _delta_m2_sweep(const double* buf, long nd, long* dmax_out, double* m2_out) noexcept nogil:
    """Merged event sweep over [log d - 1, log d) indicators: max level and
    level^2 mass (Kahan-compensated)."""
    cdef long ia = 0, ib = 0, level = 0, dmax = 0
    cdef double prev = buf[0] - 1.0
    cdef double m2 = 0.0, comp = 0.0, term, yy, tt, pa, pb, pos
    while ib < nd:
        pa = buf[ia] - 1.0 if ia < nd else INFINITY
        pb = buf[ib]
        pos = pa if pa < pb else pb
        if pos > prev:
            term = (pos - prev) * (<double> level) * (<double> level)
            yy = term - comp
            tt = m2 + yy
            comp = (tt - m2) - yy
            m2 = tt
            if level > dmax:
                dmax = level
            prev = pos
        while ia < nd and buf[ia] - 1.0 == pos:
            level += 1
            ia += 1
        while ib < nd and buf[ib] == pos:
            level -= 1
            ib += 1
    dmax_out[0] = dmax
    m2_out[0] = m2


cdef double _ipow(double x, long q) noexcept nogil:
    cdef double r = 1.0
    cdef long i
    for i in range(q):
        r *= x
    return r


cdef void _moments_sweep(const double* buf, long nd, const double* qs, int nq,
                         double* acc, double* comp) noexcept nogil:
    # Kahan-compensated per moment: the inequality suites check identities
    # with tight additive slack at magnitudes ~1e7
    cdef long ia = 0, ib = 0, level = 0
    cdef double prev = buf[0] - 1.0
    cdef double pa, pb, pos, seg, lvl, term, yy, tt
    cdef int iq
    for iq in range(nq):
        acc[iq] = 0.0
        comp[iq] = 0.0
    while ib < nd:
        pa = buf[ia] - 1.0 if ia < nd else INFINITY
        pb = buf[ib]
        pos = pa if pa < pb else pb
        if pos > prev:
            seg = pos - prev
            lvl = <double> level
            for iq in range(nq):
                if qs[iq] == floor(qs[iq]) and qs[iq] >= 0 and qs[iq] <= 64:
                    term = seg * _ipow(lvl, <long> qs[iq])
                elif level > 0:
                    term = seg * pow(lvl, qs[iq])
                else:
                    term = 0.0
                yy = term - comp[iq]
                tt = acc[iq] + yy
                comp[iq] = (tt - acc[iq]) - yy
                acc[iq] = tt
            prev = pos
        while ia < nd and buf[ia] - 1.0 == pos:
            level += 1
            ia += 1
        while ib < nd and buf[ib] == pos:
            level -= 1
            ib += 1


# ---------------------------------------------------------------- single-call API

def factor_pairs(n, spf):
    cdef const unsigned int[::1] table = spf
    cdef long m = n, p
    cdef int e
    pairs = []
    while m > 1:
        p = table[m]
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        pairs.append((p, e))
    return pairs


def divisor_logs_from_pairs(pairs):
    if len(pairs) > 60:  # stack factor buffers hold 64 entries
        raise ValueError("too many distinct primes")
    cdef long nd = 1
    for _, e in pairs:
        nd *= e + 1
    out = np.empty(nd, dtype=np.float64)
    cdef double[::1] mv = out
    cdef double logp[64]
    cdef int expo[64]
    cdef int k = 0
    for p, e in pairs:
        logp[k] = log(<double> p)
        expo[k] = e
        k += 1
    _fill_logs(logp, expo, k, &mv[0])
    return out


def delta_max(logs):
    cdef const double[::1] mv = np.ascontiguousarray(logs, dtype=np.float64)
    if mv.shape[0] == 0:
        return 0
    return _delta_sweep(&mv[0], mv.shape[0])


def delta_anchored_brute(logs):
    cdef const double[::1] mv = np.ascontiguousarray(logs, dtype=np.float64)
    if mv.shape[0] == 0:
        return 0
    return _delta_brute(&mv[0], mv.shape[0])


def delta_m2(logs):
    cdef const double[::1] mv = np.ascontiguousarray(logs, dtype=np.float64)
    cdef long d = 0
    cdef double m2 = 0.0
    _delta_m2_sweep(&mv[0], mv.shape[0], &d, &m2)
    return d, m2


def moments(logs, qs):
    cdef const double[::1] mv = np.ascontiguousarray(logs, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(qs, dtype=np.float64)
    out = np.zeros(qv.shape[0], dtype=np.float64)
    comp = np.zeros(qv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef double[::1] cv = comp
    if qv.shape[0] > 0:
        _moments_sweep(&mv[0], mv.shape[0], &qv[0], qv.shape[0], &ov[0], &cv[0])
    return out


# ---------------------------------------------------------------------- block API

def block_stats(spf, long lo, long hi, tau, omega, mu2, delta, m2):
    cdef const unsigned int[::1] table = spf
    cdef long long[::1] tau_v = tau
    cdef long long[::1] omega_v = omega
    cdef unsigned char[::1] mu2_v = mu2
    cdef long long[::1] delta_v = delta
    cdef double[::1] m2_v = m2
    cdef long cap = 4096
    cdef double* buf = <double*> malloc(cap * sizeof(double))
    cdef double logp[64]
    cdef int expo[64]
    cdef long n, i, nd, d
    cdef int k, t, sqf
    cdef long tcount
    cdef double mm
    if buf == NULL:
        raise MemoryError
    try:
        with nogil:
            for n in range(lo, hi):
                i = n - lo
                if n == 1:
                    tau_v[i] = 1; omega_v[i] = 0; mu2_v[i] = 1
                    delta_v[i] = 1; m2_v[i] = 1.0
                    continue
                k = _factor(table, n, logp, expo)
                tcount = 1
                sqf = 1
                for t in range(k):
                    tcount *= expo[t] + 1
                    if expo[t] > 1:
                        sqf = 0
                if tcount > cap:
                    with gil:
                        while cap < tcount:
                            cap *= 2
                        free(buf)
                        buf = <double*> malloc(cap * sizeof(double))
                        if buf == NULL:
                            raise MemoryError
                nd = _fill_logs(logp, expo, k, buf)
                _delta_m2_sweep(buf, nd, &d, &mm)
                tau_v[i] = tcount
                omega_v[i] = k
                mu2_v[i] = sqf
                delta_v[i] = d
                m2_v[i] = mm
    finally:
        free(buf)


def block_check_delta(spf, long lo, long hi):
    cdef const unsigned int[::1] table = spf
    cdef long cap = 4096
    cdef double* buf = <double*> malloc(cap * sizeof(double))
    cdef double logp[64]
    cdef int expo[64]
    cdef long n, nd, bad = 0, tcount
    cdef int k, t
    if buf == NULL:
        raise MemoryError
    try:
        with nogil:
            for n in range(lo, hi):
                if n == 1:
                    continue
                k = _factor(table, n, logp, expo)
                tcount = 1
                for t in range(k):
                    tcount *= expo[t] + 1
                if tcount > cap:
                    with gil:
                        while cap < tcount:
                            cap *= 2
                        free(buf)
                        buf = <double*> malloc(cap * sizeof(double))
                        if buf == NULL:
                            raise MemoryError
                nd = _fill_logs(logp, expo, k, buf)
                if _delta_sweep(buf, nd) != _delta_brute(buf, nd):
                    bad += 1
    finally:
        free(buf)
    return bad


def block_moments(spf, long lo, long hi, qs, tau, delta, mq):
    cdef const unsigned int[::1] table = spf
    cdef const double[::1] qv = np.ascontiguousarray(qs, dtype=np.float64)
    cdef long long[::1] tau_v = tau
    cdef long long[::1] delta_v = delta
    cdef double[:, ::1] mq_v = mq
    cdef int nq = qv.shape[0]
    cdef long cap = 4096
    cdef double* buf = <double*> malloc(cap * sizeof(double))
    cdef double* acc = <double*> malloc(nq * sizeof(double))
    cdef double* cmp_ = <double*> malloc(nq * sizeof(double))
    cdef double logp[64]
    cdef int expo[64]
    cdef long n, i, nd, tcount
    cdef int k, t, iq
    if buf == NULL or acc == NULL or cmp_ == NULL:
        raise MemoryError
    try:
        with nogil:
            for n in range(lo, hi):
                i = n - lo
                if n == 1:
                    tau_v[i] = 1; delta_v[i] = 1
                    for iq in range(nq):
                        mq_v[i, iq] = 1.0
                    continue
                k = _factor(table, n, logp, expo)
                tcount = 1
                for t in range(k):
                    tcount *= expo[t] + 1
                if tcount > cap:
                    with gil:
                        while cap < tcount:
                            cap *= 2
                        free(buf)
                        buf = <double*> malloc(cap * sizeof(double))
                        if buf == NULL:
                            raise MemoryError
                nd = _fill_logs(logp, expo, k, buf)
                tau_v[i] = tcount
                delta_v[i] = _delta_sweep(buf, nd)
                _moments_sweep(buf, nd, &qv[0], nq, acc, cmp_)
                for iq in range(nq):
                    mq_v[i, iq] = acc[iq]
    finally:
        free(buf)
        free(acc)
        free(cmp_)
