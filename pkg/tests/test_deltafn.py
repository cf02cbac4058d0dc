import math

import numpy as np
import pytest

from hdelta import deltafn, factor


def logs_of(n, table):
    return factor.divisor_logs(factor.factorize(n, table))


def delta_at_scan(logs, u):
    """Direct-scan oracle for the window count."""
    return int(sum(1 for v in logs if u < v <= u + 1.0))


def delta_brute_full(logs):
    """Window maximum by scanning every anchored position directly."""
    anchors = list(logs) + [v - 1.0 for v in logs]
    return max(delta_at_scan(logs, u) for u in anchors)


def test_delta_at_examples(spf_small):
    l6 = logs_of(6, spf_small)
    assert deltafn.delta_at(l6, -0.5) == 1  # only log 1 = 0 in (-0.5, 0.5]
    assert deltafn.delta_at(logs_of(1, spf_small), -0.5) == 1
    assert deltafn.delta_at(l6, 5.0) == 0


def test_delta_at_matches_scan(spf_small):
    rng = np.random.default_rng(0)
    for n in (6, 12, 30, 720, 83160):
        logs = logs_of(n, spf_small)
        for u in rng.uniform(-2, math.log(n) + 1, size=40):
            assert deltafn.delta_at(logs, u) == delta_at_scan(logs, u)


def test_delta_max_examples(spf_small):
    assert deltafn.delta_max(logs_of(1, spf_small)) == 1
    assert deltafn.delta_max(logs_of(6, spf_small)) == 2
    assert deltafn.delta_max(logs_of(12, spf_small)) == 3


def test_delta_max_brute_small_range(spf_small):
    for n in range(1, 2000):
        logs = logs_of(n, spf_small)
        assert deltafn.delta_max(logs) == delta_brute_full(logs)


def test_build_step(spf_small):
    s1 = deltafn.build_step(logs_of(1, spf_small))
    assert np.allclose(s1.breakpoints, [-1.0, 0.0])
    assert list(s1.levels) == [1]

    s2 = deltafn.build_step(logs_of(2, spf_small))
    assert s2.max_level() == 2
    peak = s2.levels.argmax()
    assert math.isclose(s2.breakpoints[peak], math.log(2) - 1.0)
    assert math.isclose(s2.breakpoints[peak + 1], 0.0, abs_tol=1e-15)

    s6 = deltafn.build_step(logs_of(6, spf_small))
    assert abs(s6.integral() - 4.0) < 1e-8  # tau(6)
    assert s6.max_level() == deltafn.delta_max(logs_of(6, spf_small))


def test_m_q_basics(spf_small):
    for n in (1, 2, 6, 12, 720, 83160):
        logs = logs_of(n, spf_small)
        tau = len(logs)
        assert abs(deltafn.m_q(logs, 1).value - tau) <= 1e-8 * tau
    assert deltafn.m_q(logs_of(1, spf_small), 7).value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        deltafn.m_q(logs_of(6, spf_small), 0.5)


def test_m2_matches_pair_oracle(spf_small):
    # frozen from the pair-overlap oracle: sum over divisor pairs of
    # max(0, 1 - |log d - log d'|) at n = 6
    l6 = logs_of(6, spf_small)
    assert deltafn.m2_pair_oracle(l6) == pytest.approx(6.416481061543890, rel=1e-12)
    for n in range(1, 3000):
        logs = logs_of(n, spf_small)
        step = deltafn.m_q(logs, 2).value
        oracle = deltafn.m2_pair_oracle(logs)
        assert abs(step - oracle) <= 1e-9 * oracle


def test_n_jq_zero_shift_and_disjoint(spf_small):
    l6 = logs_of(6, spf_small)
    assert deltafn.n_jq(l6, 1, 2, 1.0) == pytest.approx(deltafn.m_q(l6, 2).value)
    assert deltafn.n_jq(l6, 1, 2, 1e6) == 0.0
    with pytest.raises(ValueError):
        deltafn.n_jq(l6, 3, 2, 1.0)


def test_n_jq_quadrature_oracle(spf_small):
    l6 = logs_of(6, spf_small)
    v = 2.0
    got = deltafn.n_jq(l6, 1, 2, v)
    assert got > 0
    us = np.linspace(-1.5, 2.5, 100_001)
    f = np.array([deltafn.delta_at(l6, u) for u in us])
    g = np.array([deltafn.delta_at(l6, u - math.log(v)) for u in us])
    quad = np.trapezoid(f * g, us)
    assert got == pytest.approx(quad, rel=1e-4)


def test_w_q(spf_small):
    l6 = logs_of(6, spf_small)
    assert deltafn.w_q(l6, 2, 1e6) == 0.0
    # zero shift: the q = 2 boundary term is half-weighted, so W_2(n,1) = M_2
    assert deltafn.w_q(l6, 2, 1.0) == pytest.approx(deltafn.m_q(l6, 2).value)
    with pytest.raises(ValueError):
        deltafn.w_q(l6, 1, 2.0)


def test_w_q_bound_random(spf_small):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        n = int(rng.integers(2, 100_001))
        v = float(rng.uniform(1.0, n))
        q = int(rng.choice([2, 3, 4]))
        logs = logs_of(n, spf_small)
        assert deltafn.w_q(logs, q, v) <= 2 ** (q - 1) * deltafn.m_q(logs, q).value + 1e-9


def test_tau_theta(spf_small):
    l6 = logs_of(6, spf_small)
    assert deltafn.tau_theta(l6, 0.0) == pytest.approx(4.0 + 0j)
    direct = sum(np.exp(1j * 1.0 * np.log([1, 2, 3, 6])))
    assert abs(deltafn.tau_theta(l6, 1.0) - direct) < 1e-12
    for p in (2, 17, 97):
        lp = logs_of(p, spf_small)
        for theta in (0.3, 1.7):
            got = abs(deltafn.tau_theta(lp, theta)) ** 2
            assert got == pytest.approx(2 + 2 * math.cos(theta * math.log(p)))


def test_parseval_ratio(spf_small):
    assert deltafn.parseval_ratio(logs_of(1, spf_small)) == pytest.approx(1.0)
    # derived: closed-form sinc sum over the 16 divisor pairs of 6 / M_2(6)
    l6 = logs_of(6, spf_small)
    diff = l6[:, None] - l6[None, :]
    with np.errstate(invalid="ignore"):
        sinc = np.where(diff == 0, 1.0, np.sin(diff) / np.where(diff == 0, 1.0, diff))
    expected = sinc.sum() / deltafn.m_q(l6, 2).value
    assert deltafn.parseval_ratio(l6) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.18, abs=0.01)


def test_m_q_real_exponent(spf_small):
    # non-integer q goes through the pow path; cross-check against the
    # StepFn representation, an independent assembly of the same integral
    for n in (6, 12, 720):
        logs = logs_of(n, spf_small)
        step = deltafn.build_step(logs)
        for q in (1.5, 2.5, 3.25):
            assert deltafn.m_q(logs, q).value == pytest.approx(
                step.integral(power=q), rel=1e-12)


def test_oracle_caps():
    big = np.linspace(0.0, 5.0, 10_001)
    from hdelta.factor import ResourceLimitError

    with pytest.raises(ResourceLimitError):
        deltafn.m2_pair_oracle(big)
    with pytest.raises(ResourceLimitError):
        deltafn.parseval_ratio(big)


def test_moment_chain_spot(spf_small):
    # 2 M_q(n) <= M_q(np) <= 2 M_q(n) + 2 W_q(n,p) <= 2^q M_q(n), p not | n
    for n, p, q in ((3, 2, 2), (6, 5, 3), (30, 7, 4), (12, 7, 2)):
        logs = logs_of(n, spf_small)
        logs_np = logs_of(n * p, spf_small)
        mq = deltafn.m_q(logs, q).value
        mq_np = deltafn.m_q(logs_np, q).value
        w = deltafn.w_q(logs, q, float(p))
        assert 2 * mq <= mq_np + 1e-9
        assert mq_np <= 2 * mq + 2 * w + 1e-9
        assert 2 * mq + 2 * w <= 2**q * mq + 1e-9
        # the middle link is an identity under the half-weight convention
        assert mq_np == pytest.approx(2 * mq + 2 * w, abs=1e-9)
