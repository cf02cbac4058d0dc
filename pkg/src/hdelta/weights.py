"""Weight families, exponent thresholds, truncation sets and prime-sum checks.

Covers the multiplicative weights rho with sum_{p<=y} rho(p) log p ~ z*y
(standard instance rho(n) = z^omega(n)), the exponent system
beta = 2^t z - t / z_t = t/(2^t - 1), the damped divisor-count constraint
sets E_T and their H refinements, the theta_{q,T} recursion checker, and
numeric checks of the classical prime sums.
"""

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import kernels
from .factor import arith_stats, primes_up_to

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class WeightFamily:
    """Multiplicative weight identified by z; default prime rule rho(p) = z."""

    z: float
    prime_rule: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def rho_primes(self, ps):
        ps = np.asarray(ps, dtype=np.float64)
        if self.prime_rule is None:
            return np.full_like(ps, self.z)
        return np.asarray(self.prime_rule(ps), dtype=np.float64)

    @property
    def is_constant(self):
        return self.prime_rule is None


@dataclass(frozen=True)
class ExponentSet:
    t: float
    z: float
    beta: float
    z_t: float
    z_t_plus: float
    frak_z_t: float
    delta: int


def exponents(t, z):
    """The exponent system at (t, z): beta, z_t, z_t^+, the real-t
    threshold, and the indicator delta of the critical line z = z_t."""
    if z <= 0:
        raise ValueError("z must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    beta = 2.0**t * z - t
    z_t = t / (2.0**t - 1.0)
    z_t_plus = t / (2.0**t - 2.0 ** (t / 2.0))
    k = math.ceil(t)
    frak_z_t = 2.0 ** (k - t) * k / (2.0**k - 1.0)
    delta = 1 if abs(z - z_t) <= 1e-12 else 0
    return ExponentSet(t, z, beta, z_t, z_t_plus, frak_z_t, delta)


@dataclass(frozen=True)
class TruncationParams:
    """Parameters of the damping exponent f_T.

    b_variant selects the reading of the printed damping constant:
    "product" gives 1/(2^t * z * log2 - 1), which matches the critical
    abundance omega ~ 2^t z log2(y) where tau(n_y) crosses T log 3y;
    "power" gives the literal 1/(2^(t z) log2 - 1).
    """

    T: float
    t: float
    z: float
    frak_c: float = 0.01
    b_variant: str = "product"
    frak_b: float = field(init=False)

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if self.frak_c <= 0:
            raise ValueError("frak_c must be positive")
        if self.b_variant == "product":
            denom = 2.0**self.t * self.z * LOG2 - 1.0
        elif self.b_variant == "power":
            denom = 2.0 ** (self.t * self.z) * LOG2 - 1.0
        else:
            raise ValueError(f"unknown b_variant {self.b_variant!r}")
        if denom <= 0:
            raise ValueError("damping requires 2^t * z * log 2 > 1")
        object.__setattr__(self, "frak_b", 1.0 / denom)


def f_T(y, params):
    """Damping exponent: frak_c * min(log(T log 3y), (loglog 3y - b log T)^2 / log T)."""
    if y < 1:
        raise ValueError("y must be >= 1")
    T = params.T
    l3y = math.log(3.0 * y)
    lT = math.log(T)
    first = math.log(T * l3y)
    second = (math.log(l3y) - params.frak_b * lT) ** 2 / lT
    return params.frak_c * min(first, second)


def _et_ok(primes, T, variant, params):
    """Constraint tau(n_y) <= (damped) T log 3y for all y >= 1, reduced to
    the prime-factor breakpoints with the closure convention: the infimum
    over y in (p_i, p_{i+1}] is evaluated at y = p_i.
    """
    # the empty prefix (y = 1): tau = 1
    checkpoints = [(1.0, 0)] + [(float(p), i + 1) for i, p in enumerate(primes)]
    for y, i in checkpoints:
        bound = T * math.log(3.0 * y)
        if variant == "tz":
            bound *= math.exp(-f_T(y, params))
        if 2.0**i > bound:
            return False
    return True


def mem_E_T(f, T, variant="plain", params=None):
    """Membership of a squarefree integer in E_T (plain) or its damped

    refinement (variant "tz").  Non-squarefree input returns False since
    the sets live inside the squarefree integers.
    """
    if variant not in ("plain", "tz"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "tz":
        if params is None:
            raise ValueError("variant 'tz' requires TruncationParams")
        if params.T != T:
            params = replace(params, T=T)
    _, _, mu2, _ = arith_stats(f)
    if mu2 != 1:
        return False
    return _et_ok([p for p, _ in f.pairs], T, variant, params)


def mem_E_T_primes(primes, T, variant="plain", params=None):
    """Same constraint evaluated directly on an ascending prime list
    (used by the sampler, whose integers are never materialized)."""
    if variant == "tz":
        if params is None:
            raise ValueError("variant 'tz' requires TruncationParams")
        if params.T != T:
            params = replace(params, T=T)
    return _et_ok(list(primes), T, variant, params)


TWO_THIRDS_PI2 = 2.0 * math.pi**2 / 3.0


@dataclass(frozen=True)
class ThetaSequence:
    """theta_{q,T} with theta_0 = theta_1 = 1 hardwired.

    Variant A carries the prefactor q!/2, variant B replaces it by q!/q^2
    (the shape of the lower-bound constraint the recursion requires).
    The closed formula at q = 1 would give 1/2; the hardwired value wins.
    """

    T: float
    delta: int
    C_0: float
    variant: str = "A"

    def __post_init__(self):
        if self.variant not in ("A", "B"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.T < 2 or self.C_0 <= 0:
            raise ValueError("need T >= 2 and C_0 > 0")

    def log_theta(self, q):
        if q in (0, 1):
            return 0.0
        base = math.lgamma(q + 1)
        if self.variant == "A":
            base -= LOG2
        else:
            base -= 2.0 * math.log(q)
        growth = math.log(TWO_THIRDS_PI2 * self.C_0) + math.log(self.T)
        if self.delta:
            growth += math.log(math.log(self.T))
        return base + (q - 1) * growth

    def theta(self, q):
        return math.exp(self.log_theta(q))


def mem_H(f, T, q, gamma, seq=None, logs=None, variant="plain", params=None, C_0=10.0):
    """H-set membership: E_T membership plus M_j(n) <= tau(n) theta_{j,T}
    for j up to q.  Levels 0 and 1 reduce to E_T; the j = 1 constraint is
    vacuous (M_1 = tau, theta_1 = 1) and is skipped.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if not mem_E_T(f, T, variant=variant, params=params):
        return False
    if q <= 1:
        return True
    if seq is None:
        seq = ThetaSequence(T=T, delta=gamma, C_0=C_0)
    if logs is None:
        raise ValueError("divisor logs required for q >= 2")
    tau = arith_stats(f)[0]
    qs = np.arange(2.0, q + 1.0)
    mjs = kernels.moments(logs, qs)
    for j, mj in zip(range(2, q + 1), mjs):
        if mj > tau * seq.theta(j):
            return False
    return True


def _logsumexp(vals):
    m = max(vals)
    if m == -math.inf:
        return m
    return m + math.log(sum(math.exp(v - m) for v in vals))


@dataclass(frozen=True)
class RecursionReport:
    """Per-q verdicts for the two recursion constraints.

    This is a reporter, not an asserter: it records what the computation
    says about each printed variant and never claims more.
    """

    T: float
    delta: int
    C_0: float
    variant: str
    q_max: int
    rows: tuple  # (q, ok_lower_bound, ok_convolution, log_margin)
    first_fail_lower: Optional[int]
    first_fail_conv: Optional[int]

    def all_pass(self):
        return self.first_fail_lower is None and self.first_fail_conv is None


def check_recursion(q_max, T, delta, C_0, variant="A"):
    """Evaluate, in log space, the lower-bound constraint
    theta_j >= (j!/j^2) C_0^(j-1) T^(j-1) (log T)^(delta (j-1)) and the
    convolution constraint
    sum_{1<=j<=q/2} C(q,j) theta_j theta_{q-j} <= theta_q / (C_0 T (log T)^(delta/2))
    for 3 <= q <= q_max."""
    if q_max < 3 or T < 3 or C_0 <= 0:
        raise ValueError("need q_max >= 3, T >= 3, C_0 > 0")
    seq = ThetaSequence(T=T, delta=delta, C_0=C_0, variant=variant)
    lT = math.log(T)
    llT = math.log(lT)
    rows = []
    first_lower = None
    first_conv = None
    for q in range(3, q_max + 1):
        log_lower_rhs = (
            math.lgamma(q + 1)
            - 2.0 * math.log(q)
            + (q - 1) * (math.log(C_0) + lT + (llT if delta else 0.0))
        )
        ok_lower = seq.log_theta(q) >= log_lower_rhs - 1e-12
        terms = [
            math.log(math.comb(q, j)) + seq.log_theta(j) + seq.log_theta(q - j)
            for j in range(1, q // 2 + 1)
        ]
        log_lhs = _logsumexp(terms)
        log_rhs = seq.log_theta(q) - math.log(C_0) - lT - (delta / 2.0) * llT
        ok_conv = log_lhs <= log_rhs + 1e-12
        rows.append((q, ok_lower, ok_conv, log_rhs - log_lhs))
        if not ok_lower and first_lower is None:
            first_lower = q
        if not ok_conv and first_conv is None:
            first_conv = q
    return RecursionReport(
        T=T,
        delta=delta,
        C_0=C_0,
        variant=variant,
        q_max=q_max,
        rows=tuple(rows),
        first_fail_lower=first_lower,
        first_fail_conv=first_conv,
    )


def check_recursion_exact(q_max, T, C_0, variant="A"):
    """Independent exact-rational route for delta = 0 (where both sides of
    the constraints are rational in T and C_0).  Returns the per-q
    verdict pairs in the same order as check_recursion."""
    T = Fraction(T)
    C_0 = Fraction(C_0)
    # exact arithmetic over the float-rounded pi^2, the same constant the
    # log-space route uses; verdict margins dwarf that rounding
    K = Fraction(2, 3) * Fraction(math.pi**2)

    def theta(q):
        if q <= 1:
            return Fraction(1)
        pre = Fraction(math.factorial(q), 2) if variant == "A" else Fraction(
            math.factorial(q), q * q
        )
        return pre * (K * C_0 * T) ** (q - 1)

    out = []
    for q in range(3, q_max + 1):
        lower_rhs = Fraction(math.factorial(q), q * q) * (C_0 * T) ** (q - 1)
        ok_lower = theta(q) >= lower_rhs
        lhs = sum(math.comb(q, j) * theta(j) * theta(q - j) for j in range(1, q // 2 + 1))
        ok_conv = lhs <= theta(q) / (C_0 * T)
        out.append((q, ok_lower, ok_conv))
    return out


def chebyshev_check(y, w, primes=None):
    """Compare sum_{p<=y} rho(p) log p against z*y."""
    if y < 2:
        raise ValueError("y must be >= 2")
    ps = primes_up_to(int(y)) if primes is None else primes[primes <= y]
    rho = w.rho_primes(ps)
    lhs = float(np.sum(rho * np.log(ps)))
    rhs = w.z * y
    return lhs, rhs, abs(lhs - rhs) / rhs


def mertens_product(x, w, primes=None):
    """prod_{p<x} (1 + rho(p)/p) and its ratio to (log x)^z."""
    if x < 2:
        raise ValueError("x must be >= 2")
    ps = primes_up_to(int(math.ceil(x)) - 1) if primes is None else primes[primes < x]
    ps = ps[ps < x]
    rho = w.rho_primes(ps)
    product = float(math.exp(np.sum(np.log1p(rho / ps))))
    return product, product / math.log(x) ** w.z


def cos_sum(y, psi, w, primes=None):
    """sum_{p<=y} rho(p) cos(psi log p)/p against the model
    z log(log y / (1 + psi log y))."""
    if y < 2:
        raise ValueError("y must be >= 2")
    if not 0 <= psi <= 1:
        raise ValueError("psi must lie in [0, 1]")
    ps = primes_up_to(int(y)) if primes is None else primes[primes <= y]
    rho = w.rho_primes(ps)
    lp = np.log(ps)
    lhs = float(np.sum(rho * np.cos(psi * lp) / ps))
    ly = math.log(y)
    model = w.z * math.log(ly / (1.0 + psi * ly))
    return lhs, model
