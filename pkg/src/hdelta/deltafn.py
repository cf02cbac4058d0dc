"""Exact window statistics of the divisor-log multiset.

Delta(n, u) counts divisors with e^u < d <= e^(u+1); everything here is
computed exactly from the sorted log-divisor array (no quadrature), with
the single convention that a divisor is counted when u < log d <= u + 1.
Boundary ties between distinct divisors cannot occur in exact arithmetic
(|log(d/d')| = 1 would force e rational), so comparisons carry no epsilon.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .factor import ResourceLimitError


@dataclass(frozen=True)
class StepFn:
    """Piecewise-constant u -> Delta(n, u), level l[k] on [b[k], b[k+1])."""

    breakpoints: np.ndarray
    levels: np.ndarray

    def integral(self, power=1.0):
        seg = np.diff(self.breakpoints)
        return float(np.sum(seg * self.levels.astype(float) ** power))

    def max_level(self):
        return int(self.levels.max())


class MomentValue(NamedTuple):
    q: float
    value: float


def delta_at(logs, u):
    """#{d : u < log d <= u+1}, by binary search."""
    hi = np.searchsorted(logs, u + 1.0, side="right")
    lo = np.searchsorted(logs, u, side="right")
    return int(hi - lo)


def delta_max(logs):
    """Delta(n): the maximal window count, attained with the window's
    closed right edge at some log d."""
    return int(kernels.delta_max(logs))


def delta_anchored_brute(logs):
    """Exhaustive maximum of delta_at over the 2*tau anchored positions."""
    return int(kernels.delta_anchored_brute(logs))


def _events(logs, shift=0.0):
    nd = len(logs)
    pos = np.concatenate([logs - 1.0 + shift, logs + shift])
    sgn = np.concatenate([np.ones(nd, dtype=np.int64), -np.ones(nd, dtype=np.int64)])
    return pos, sgn


def build_step(logs):
    """Event sweep: +1 at log d - 1, -1 at log d; float-identical
    breakpoints are merged (tolerance 0)."""
    pos, sgn = _events(logs)
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    lvl = np.cumsum(sgn[order])
    # keep the level after the last event at each distinct position
    last = np.nonzero(np.diff(pos) > 0)[0]
    breaks = np.concatenate([pos[last], pos[-1:]])
    levels = lvl[last]
    return StepFn(breakpoints=breaks, levels=levels)


def m_q(logs, q):
    """Exact moment int Delta(n, u)^q du via piecewise integration.

    Real q >= 1 accepted (costless generality; only integer q is needed
    by the inequality suites).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    return MomentValue(q, float(kernels.moments(logs, np.array([float(q)]))[0]))


def m2_pair_oracle(logs, cap=10_000):
    """Independent O(tau^2) oracle for M_2: expanding the square gives
    sum over divisor pairs of max(0, 1 - |log d - log d'|)."""
    if len(logs) > cap:
        raise ResourceLimitError(f"tau = {len(logs)} exceeds oracle cap {cap}")
    diff = np.abs(logs[:, None] - logs[None, :])
    return math.fsum(np.maximum(0.0, 1.0 - diff).ravel())


def n_jq(logs, j, q, v):
    """Exact int Delta(n,u)^j * Delta(n, u - log v)^(q-j) du.

    The translate's breakpoint list is merged with the original before
    integrating, so the product is constant on every integration cell.
    """
    if not 1 <= j <= q:
        raise ValueError("need 1 <= j <= q")
    if v < 1:
        raise ValueError("v must be >= 1")
    shift = math.log(v)
    pos_f, sgn_f = _events(logs)
    pos_g, sgn_g = _events(logs, shift=shift)
    pos = np.concatenate([pos_f, pos_g])
    df = np.concatenate([sgn_f, np.zeros_like(sgn_g)])
    dg = np.concatenate([np.zeros_like(sgn_f), sgn_g])
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    f = np.cumsum(df[order]).astype(float)
    g = np.cumsum(dg[order]).astype(float)
    seg = np.diff(pos)
    return math.fsum(seg * f[:-1] ** j * g[:-1] ** (q - j))


def w_q(logs, q, v):
    """sum_{1 <= j <= q/2} C(q,j) N_{j,q}(n,v), the boundary term j = q/2
    (q even) entering with weight 1/2.

    With that convention M_q(np) = 2 M_q(n) + 2 W_q(n,p) exactly for
    p not dividing n, and W_q <= (2^(q-1) - 1) M_q holds for every v >= 1;
    the full-weight reading fails both already at q = 2.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    total = 0.0
    for j in range(1, q // 2 + 1):
        weight = math.comb(q, j) * (0.5 if 2 * j == q else 1.0)
        total += weight * n_jq(logs, j, q, v)
    return total


def tau_theta(logs, theta):
    """tau(n, theta) = sum over divisors of d^(i*theta)."""
    return complex(np.exp(1j * theta * logs).sum())


def parseval_ratio(logs, cap=10_000):
    """(int_0^1 |tau(n,theta)|^2 dtheta) / M_2(n).

    The numerator is the closed form sum_{d,d'} sinc(log(d/d')) with
    sinc(0) = 1; no quadrature, so the ratio has no tolerance knob.
    """
    if len(logs) > cap:
        raise ResourceLimitError(f"tau = {len(logs)} exceeds cap {cap}")
    diff = logs[:, None] - logs[None, :]
    numerator = float(np.sum(np.sinc(diff / np.pi)))
    return numerator / m_q(logs, 2).value
