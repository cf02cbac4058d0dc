"""Backend equivalence: the compiled kernels and the pure fallback must be
interchangeable."""

import numpy as np
import pytest

from hdelta.kernels import available_backends, get_module

pytestmark = pytest.mark.skipif(
    "compiled" not in available_backends(),
    reason="compiled backend not built; nothing to compare",
)


@pytest.fixture(scope="module")
def mods():
    return get_module("compiled"), get_module("python")


def test_spf_tables_identical(mods):
    c, p = mods
    assert np.array_equal(c.spf_sieve(100_000), p.spf_sieve(100_000))


def test_factor_and_logs_identical(mods):
    c, p = mods
    spf = c.spf_sieve(10_000)
    for n in list(range(1, 200)) + [720, 5040, 9240, 9999]:
        if n == 1:
            continue
        assert c.factor_pairs(n, spf) == p.factor_pairs(n, spf)
        pairs = c.factor_pairs(n, spf)
        assert np.array_equal(c.divisor_logs_from_pairs(pairs),
                              p.divisor_logs_from_pairs(pairs))


def test_sweep_functions_identical(mods):
    c, p = mods
    spf = c.spf_sieve(30_000)
    rng = np.random.default_rng(4)
    for n in rng.integers(2, 30_000, size=400):
        pairs = c.factor_pairs(int(n), spf)
        logs = c.divisor_logs_from_pairs(pairs)
        assert c.delta_max(logs) == p.delta_max(logs)
        assert c.delta_anchored_brute(logs) == p.delta_anchored_brute(logs)
        dc, mc = c.delta_m2(logs)
        dp, mp = p.delta_m2(logs)
        assert dc == dp
        assert mc == pytest.approx(mp, rel=1e-13)
        qs = np.array([1.0, 2.0, 3.5, 7.0])
        assert np.allclose(c.moments(logs, qs), p.moments(logs, qs), rtol=1e-13)


def test_block_functions_identical(mods):
    c, p = mods
    spf = c.spf_sieve(4000)

    def run(mod):
        n = 3999
        cols = (np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.int64),
                np.zeros(n))
        mod.block_stats(spf, 1, 4000, *cols)
        return cols

    a, b = run(c), run(p)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-13)
    assert c.block_check_delta(spf, 1, 4000) == p.block_check_delta(spf, 1, 4000) == 0

    qs = np.array([2.0, 4.0])

    def run_m(mod):
        n = 3999
        tau = np.zeros(n, dtype=np.int64)
        delta = np.zeros(n, dtype=np.int64)
        mq = np.zeros((n, 2))
        mod.block_moments(spf, 1, 4000, qs, tau, delta, mq)
        return tau, delta, mq

    (t1, d1, m1), (t2, d2, m2) = run_m(c), run_m(p)
    assert np.array_equal(t1, t2)
    assert np.array_equal(d1, d2)
    assert np.allclose(m1, m2, rtol=1e-13)


def test_env_override_selects_pure(tmp_path):
    import subprocess
    import sys

    code = "import hdelta; print(hdelta.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env={"HDELTA_PURE": "1", "PATH": "/usr/bin:/bin"})
    assert out.stdout.strip() == "python"
