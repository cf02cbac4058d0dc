"""Exact combinatorics of the sign-vector linear forms on R^t.

W_t is the set of linear forms with coefficients in {-1, 0, +1}; the mass
of a form is 2^(-|w|) with |w| the l1 coefficient length.  Span masses
c_k are computed in exact rational arithmetic (integer numerators over
the power-of-two denominator 2^t); floats only ever appear in the
|w(theta)| comparisons of the greedy basis construction.
"""


from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

T_CAP = 8
# integer elimination on gcd-normalized rows stays far below this
_OVERFLOW_GUARD = 1 << 40


@dataclass(frozen=True)
class Form:
    coeffs: tuple

    @property
    def length(self):
        return sum(abs(c) for c in self.coeffs)


@dataclass(frozen=True)
class Basis:
    forms: tuple
    origin: str  # "realizable" (constructed from some theta) or "abstract"


def enumerate_forms(t):
    """All 3^t forms of W_t, zero form included."""
    if not 1 <= t <= T_CAP:
        raise ValueError(f"t must lie in 1..{T_CAP}")
    out = []
    for code in range(3**t):
        coeffs = []
        c = code
        for _ in range(t):
            coeffs.append(c % 3 - 1)
            c //= 3
        out.append(Form(tuple(coeffs)))
    return out


def mass_total(t):
    """sum over W_t of 2^(-|w|), exactly."""
    num = sum(2 ** (t - f.length) for f in enumerate_forms(t))
    return Fraction(num, 2**t)


def _normalized_nonzero(t):
    """One representative per {w, -w} pair, first nonzero coefficient +1,
    listed in lexicographic coefficient order."""
    reps = []
    for f in enumerate_forms(t):
        for c in f.coeffs:
            if c != 0:
                if c > 0:
                    reps.append(f.coeffs)
                break
    reps.sort()
    return np.array(reps, dtype=np.int64)


def _gcd_normalize(rows):
    if rows.size == 0:
        return rows
    g = np.gcd.reduce(np.abs(rows), axis=1)
    big = g > 1
    if big.any():
        rows[big] //= g[big, None]
    return rows


class _Echelon:
    """Incremental fraction-free elimination over the integers."""

    def __init__(self, t):
        self.t = t
        self.rows = []  # (pivot_col, row int64 array)

    def reduce(self, v):
        v = v.astype(np.int64).copy()
        for c, r in self.rows:
            if v[c] != 0:
                v = r[c] * v - v[c] * r
                g = int(np.gcd.reduce(np.abs(v)))
                if g > 1:
                    v //= g
        return v

    def add(self, v):
        """Returns False if v is dependent on the current rows."""
        red = self.reduce(np.asarray(v))
        if not red.any():
            return False
        pivot = int(np.nonzero(red)[0][0])
        self.rows.append((pivot, red))
        return True

    def reduce_matrix(self, M):
        M = M.astype(np.int64).copy()
        for c, r in self.rows:
            mask = M[:, c] != 0
            if mask.any():
                M[mask] = r[c] * M[mask] - np.outer(M[mask, c], r)
                _gcd_normalize(M[mask])
        if np.abs(M).max(initial=0) >= _OVERFLOW_GUARD:
            raise OverflowError("elimination entries grew past the int64 guard")
        return M


def greedy_basis(theta):
    """The basis built by repeatedly taking the form minimizing |w(theta)|
    outside the span of the forms already chosen.

    Ties (measure zero in theta) break deterministically: sign-normalized
    representative, then lexicographically smallest coefficient vector.
    """
    theta = np.asarray(theta, dtype=np.float64)
    t = len(theta)
    if not 1 <= t <= T_CAP:
        raise ValueError(f"dimension must lie in 1..{T_CAP}")
    if np.any(theta <= 0):
        raise ValueError("theta coordinates must be strictly positive")
    cand = _normalized_nonzero(t)
    vals = np.abs(cand @ theta)
    order = np.lexsort((np.arange(len(cand)), vals))
    ech = _Echelon(t)
    reduced = cand.copy()
    chosen = []
    for _ in range(t):
        for idx in order:
            if reduced[idx].any():
                chosen.append(Form(tuple(int(c) for c in cand[idx])))
                if not ech.add(cand[idx]):
                    raise AssertionError("candidate marked independent was not")
                # re-reduce the candidate pool against the new row only
                c, r = ech.rows[-1]
                mask = reduced[:, c] != 0
                if mask.any():
                    reduced[mask] = r[c] * reduced[mask] - np.outer(reduced[mask, c], r)
                    _gcd_normalize(reduced[mask])
                break
    return Basis(forms=tuple(chosen), origin="realizable")


def c_masses(basis):
    """c_k for k = 1..len(basis): the 2^(-|w|) mass of the nonzero forms of
    W_t inside span(w_1..w_k), as exact Fractions."""
    t = len(basis.forms[0].coeffs)
    all_forms = enumerate_forms(t)
    F = np.array([f.coeffs for f in all_forms], dtype=np.int64)
    weights = np.array([2 ** (t - f.length) for f in all_forms], dtype=np.int64)
    nonzero = F.any(axis=1)
    ech = _Echelon(t)
    out = []
    R = F.copy()
    for w in basis.forms:
        if not ech.add(np.array(w.coeffs)):
            raise ValueError("basis forms are not linearly independent")
        c, r = ech.rows[-1]
        mask = R[:, c] != 0
        if mask.any():
            R[mask] = r[c] * R[mask] - np.outer(R[mask, c], r)
            _gcd_normalize(R[mask])
        if np.abs(R).max(initial=0) >= _OVERFLOW_GUARD:
            raise OverflowError("elimination entries grew past the int64 guard")
        in_span = ~R.any(axis=1) & nonzero
        out.append(Fraction(int(weights[in_span].sum()), 2**t))
    return out


def c_k(basis, k):
    if not 1 <= k <= len(basis.forms):
        raise ValueError("k out of range")
    return c_masses(basis)[k - 1]


@dataclass(frozen=True)
class MassBoundReport:
    t: int
    mode: str
    n_bases: int
    n_distinct: int
    violations_realizable: tuple
    violations_abstract: tuple
    rows: tuple  # violation rows (basis_key, origin, k, c_k, bound)
    all_rows: tuple = ()  # per-distinct-basis rows when collection is on

    @property
    def ok_realizable(self):
        return not self.violations_realizable


def _basis_key(forms):
    return tuple(f.coeffs for f in forms)


def _check_basis(masses):
    """Indices k (1-based) violating c_k <= 2^k - 1."""
    return [k for k, m in enumerate(masses, start=1) if m > 2**k - 1]


def _independent_tuples(t):
    """All ordered independent t-tuples of sign-normalized nonzero forms."""
    cand = _normalized_nonzero(t)

    def rec(ech, chosen):
        if len(chosen) == t:
            yield tuple(chosen)
            return
        for i in range(len(cand)):
            trial = _Echelon(t)
            trial.rows = list(ech.rows)
            if trial.add(cand[i]):
                yield from rec(trial, chosen + [tuple(int(c) for c in cand[i])])

    yield from rec(_Echelon(t), [])


def verify_mass_bound(t, mode="sampled", n_samples=10_000, seed=0, grid=None,
                   collect_rows=False):
    """Check c_k(B) <= 2^k - 1 over a population of bases.

    mode "sampled": bases realized as greedy bases of random positive theta
    (t <= 6).  mode "exhaustive" (t <= 3): all ordered independent tuples
    up to sign normalization, with realizable bases (those arising from a
    positive grid of theta) reported separately from abstract tuples; an
    abstract violation does not bear on the realizable statement.
    """
    if mode == "sampled" and t > 6:
        raise ValueError("sampled mode supports t <= 6")
    if mode == "exhaustive" and t > 3:
        raise ValueError("exhaustive mode supports t <= 3")
    cache = {}
    viol_real = []
    viol_abs = []
    rows = []
    all_rows = []
    n_bases = 0

    def consider(forms, origin):
        nonlocal n_bases
        n_bases += 1
        key = _basis_key(forms)
        if key not in cache:
            masses = c_masses(Basis(forms=forms, origin=origin))
            cache[key] = masses
            if collect_rows:
                for k, m in enumerate(masses, start=1):
                    all_rows.append((key, origin, k, m, 2**k - 1))
            bad = _check_basis(masses)
            for k in bad:
                rows.append((key, origin, k, masses[k - 1], 2**k - 1))
                if origin == "realizable":
                    viol_real.append((key, k))
                else:
                    viol_abs.append((key, k))

    if mode == "sampled":
        rng = Generator(Philox(SeedSequence(entropy=seed, spawn_key=(0,))))
        for _ in range(n_samples):
            theta = rng.random(t)
            while np.any(theta == 0):
                theta = rng.random(t)
            consider(greedy_basis(theta).forms, "realizable")
    else:
        grid_side = grid or 12
        pts = (np.arange(grid_side) + 0.5) / grid_side
        realizable_keys = set()
        for idx in np.ndindex(*([grid_side] * t)):
            theta = pts[list(idx)]
            forms = greedy_basis(theta).forms
            realizable_keys.add(_basis_key(forms))
            consider(forms, "realizable")
        for tup in _independent_tuples(t):
            if tup in realizable_keys:
                continue
            consider(tuple(Form(c) for c in tup), "abstract")

    return MassBoundReport(
        t=t,
        mode=mode,
        n_bases=n_bases,
        n_distinct=len(cache),
        violations_realizable=tuple(viol_real),
        violations_abstract=tuple(viol_abs),
        rows=tuple(rows),
        all_rows=tuple(all_rows),
    )
