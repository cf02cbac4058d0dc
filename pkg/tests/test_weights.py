import math

import numpy as np
import pytest

from hdelta import factor, weights


def test_exponents_paper_values():
    e = weights.exponents(1, 1)
    assert (e.beta, e.z_t, e.delta) == (1.0, 1.0, 1)
    e = weights.exponents(2, 1)
    assert e.beta == 2.0
    assert e.z_t == pytest.approx(2 / 3)
    assert e.delta == 0
    assert e.z_t_plus == pytest.approx(1.0)  # z_2^+ = 1
    e = weights.exponents(2.5, 1)
    assert e.frak_z_t == pytest.approx(3 * math.sqrt(2) / 7)
    with pytest.raises(ValueError):
        weights.exponents(2, 0)


def test_delta_indicator_on_critical_line():
    for t in (1, 2, 3, 4):
        zt = t / (2.0**t - 1.0)
        assert weights.exponents(t, zt).delta == 1
        assert weights.exponents(t, zt * 1.01).delta == 0
        # the real-t threshold agrees with z_t at integer t
        assert weights.exponents(t, zt).frak_z_t == pytest.approx(zt)


def test_truncation_params():
    p = weights.TruncationParams(T=3, t=1, z=1)
    assert p.frak_b == pytest.approx(1 / (2 * math.log(2) - 1))
    with pytest.raises(ValueError):
        weights.TruncationParams(T=3, t=1, z=0.1)  # 2^t z log2 < 1
    alt = weights.TruncationParams(T=3, t=2, z=1, b_variant="power")
    assert alt.frak_b == pytest.approx(1 / (2.0**2 * math.log(2) - 1))


def test_f_T():
    p = weights.TruncationParams(T=3, t=1, z=1, frak_c=0.01)
    # vanishing branch: loglog 3y = b log T
    y0 = math.exp(math.exp(p.frak_b * math.log(3))) / 3.0
    assert weights.f_T(y0, p) == pytest.approx(0.0, abs=1e-12)
    lhs = weights.f_T(1.0, p)
    expect = 0.01 * min(math.log(3 * math.log(3)),
                        (math.log(math.log(3)) - p.frak_b * math.log(3)) ** 2 / math.log(3))
    assert lhs == pytest.approx(expect)
    # linear in the tunable constant
    p2 = weights.TruncationParams(T=3, t=1, z=1, frak_c=0.02)
    assert weights.f_T(5.0, p2) == pytest.approx(2 * weights.f_T(5.0, p))
    # bounded by c log T + c loglog 3y everywhere sampled
    for y in np.geomspace(1, 1e8, 50):
        assert 0 <= weights.f_T(y, p) <= 0.01 * (math.log(3) + math.log(math.log(3 * y))) + 1e-12


def test_mem_E_T_examples(spf_small):
    f1 = factor.factorize(1, spf_small)
    assert weights.mem_E_T(f1, 1)
    f2 = factor.factorize(2, spf_small)
    assert not weights.mem_E_T(f2, 1)  # needs 2 <= log 6
    assert weights.mem_E_T(f2, 2)
    assert not weights.mem_E_T(factor.factorize(4, spf_small), 100)  # not squarefree
    p = weights.TruncationParams(T=10, t=1, z=1)
    assert weights.mem_E_T(factor.factorize(6, spf_small), 10, variant="tz", params=p)


def test_mem_E_T_damped_subset_of_plain(spf_small):
    p = weights.TruncationParams(T=5, t=1, z=1)
    for n in range(1, 3000):
        f = factor.factorize(n, spf_small)
        if weights.mem_E_T(f, 5, variant="tz", params=p):
            assert weights.mem_E_T(f, 5)


def test_mem_E_T_divisor_closure(spf_small):
    for T in (2, 10, 100):
        for n in range(2, 4000):
            f = factor.factorize(n, spf_small)
            if not weights.mem_E_T(f, T):
                continue
            primes = [p for p, _ in f.pairs]
            for mask in range(1 << len(primes)):
                sub = [primes[i] for i in range(len(primes)) if mask >> i & 1]
                assert weights.mem_E_T_primes(sub, T)


def test_mem_H(spf_small):
    f6 = factor.factorize(6, spf_small)
    logs6 = factor.divisor_logs(f6)
    # q = 0, 1 reduce to E_T membership
    assert weights.mem_H(f6, 10, 0, 0) == weights.mem_E_T(f6, 10)
    assert weights.mem_H(f6, 10, 1, 0) == weights.mem_E_T(f6, 10)
    # M_2(6) = 6.42 <= tau * theta_2 comfortably
    assert weights.mem_H(f6, 10, 2, 0, logs=logs6)


def test_theta_sequence():
    s = weights.ThetaSequence(T=10, delta=0, C_0=10)
    assert s.theta(0) == 1.0 and s.theta(1) == 1.0
    assert s.theta(2) == pytest.approx(weights.TWO_THIRDS_PI2 * 100)
    sb = weights.ThetaSequence(T=10, delta=0, C_0=10, variant="B")
    assert sb.theta(3) == pytest.approx((6 / 9) * (weights.TWO_THIRDS_PI2 * 100) ** 2)
    sd = weights.ThetaSequence(T=10, delta=1, C_0=10)
    assert sd.theta(2) == pytest.approx(weights.TWO_THIRDS_PI2 * 100 * math.log(10))
    # theta_2 / (T (log T)^delta) is the same constant at every T
    for T in (5, 50, 500):
        sT = weights.ThetaSequence(T=T, delta=1, C_0=10)
        assert sT.theta(2) / (T * math.log(T)) == pytest.approx(weights.TWO_THIRDS_PI2 * 10)


def test_check_recursion_variants():
    rb = weights.check_recursion(200, 10, 0, 10, variant="B")
    assert rb.all_pass()
    rb1 = weights.check_recursion(200, 10, 1, 10, variant="B")
    assert rb1.all_pass()
    ra = weights.check_recursion(200, 10, 0, 10, variant="A")
    assert ra.first_fail_conv is not None
    assert ra.first_fail_lower is None  # the lower-bound constraint always holds
    with pytest.raises(ValueError):
        weights.check_recursion(2, 10, 0, 10)


def test_check_recursion_exact_route_agrees():
    for variant in ("A", "B"):
        log_route = weights.check_recursion(60, 10, 0, 10, variant=variant)
        exact = weights.check_recursion_exact(60, 10, 10, variant=variant)
        for (q, ok81, ok82, _), (qe, e81, e82) in zip(log_route.rows, exact):
            assert q == qe and ok81 == e81 and ok82 == e82


def test_chebyshev(spf_small):
    w = weights.WeightFamily(z=1.0)
    lhs, rhs, rel = weights.chebyshev_check(1e6, w)
    assert rel < 0.03
    # z scaling doubles the sum for the constant rule
    w2 = weights.WeightFamily(z=2.0)
    lhs2, _, _ = weights.chebyshev_check(1e5, w2)
    lhs1, _, _ = weights.chebyshev_check(1e5, w)
    assert lhs2 == pytest.approx(2 * lhs1)
    # error shrinks from 1e4 to 1e6
    assert weights.chebyshev_check(1e6, w)[2] < weights.chebyshev_check(1e4, w)[2]


def test_mertens_product():
    w = weights.WeightFamily(z=1.0)
    assert weights.mertens_product(2, w)[0] == 1.0  # empty product
    ratios = [weights.mertens_product(x, w)[1] for x in (1e3, 1e4, 1e5, 1e6)]
    assert max(ratios) / min(ratios) < 1.25
    w2 = weights.WeightFamily(z=2.0)
    ratios2 = [weights.mertens_product(x, w2)[1] for x in (1e3, 1e4, 1e5, 1e6)]
    assert max(ratios2) / min(ratios2) < 1.6


def test_cos_sum():
    w = weights.WeightFamily(z=1.0)
    lhs0, _ = weights.cos_sum(1e5, 0.0, w)
    mert = weights.mertens_product(1e5, w)
    assert lhs0 == pytest.approx(math.log(math.log(1e5)), abs=1.0)
    lhs, model = weights.cos_sum(1e6, 1.0, w)
    assert abs(lhs - model) < 3.0
    # even in psi by parity; the model only covers [0, 1]
    a, _ = weights.cos_sum(1e4, 0.5, w)
    ps = factor.primes_up_to(10**4)
    direct = float(np.sum(np.cos(-0.5 * np.log(ps)) / ps))
    assert a == pytest.approx(direct)
