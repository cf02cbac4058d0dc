from fractions import Fraction

import numpy as np
import pytest

from hdelta import wforms
from hdelta.wforms import Basis, Form


def test_enumerate_counts():
    assert len(wforms.enumerate_forms(1)) == 3
    assert len(wforms.enumerate_forms(2)) == 9
    for t in (1, 2, 3, 4):
        forms = wforms.enumerate_forms(t)
        from math import comb

        for j in range(t + 1):
            assert sum(1 for f in forms if f.length == j) == comb(t, j) * 2**j
    with pytest.raises(ValueError):
        wforms.enumerate_forms(9)


def test_mass_identity_exact():
    for t in range(1, 9):
        assert wforms.mass_total(t) == Fraction(2**t)


def test_greedy_example():
    b = wforms.greedy_basis([0.1, 0.9])
    assert [f.coeffs for f in b.forms] == [(1, 0), (1, -1)]
    theta = np.array([0.1, 0.9])
    vals = [abs(np.dot(f.coeffs, theta)) for f in b.forms]
    assert vals == pytest.approx([0.1, 0.8])


def test_greedy_t1_and_errors():
    assert [f.coeffs for f in wforms.greedy_basis([0.37]).forms] == [(1,)]
    with pytest.raises(ValueError):
        wforms.greedy_basis([0.5, 0.0])
    with pytest.raises(ValueError):
        wforms.greedy_basis([0.5, -1.0])


def test_greedy_step_optimality():
    # each chosen form minimizes |w(theta)| among candidates outside the span
    rng = np.random.default_rng(12)
    for _ in range(50):
        t = int(rng.integers(2, 5))
        theta = rng.random(t) + 1e-6
        basis = wforms.greedy_basis(theta)
        cand = wforms._normalized_nonzero(t)
        ech = wforms._Echelon(t)
        for w in basis.forms:
            chosen_val = abs(np.dot(w.coeffs, theta))
            for row in cand:
                red = ech.reduce(row)
                if red.any():  # candidate outside current span
                    assert chosen_val <= abs(np.dot(row, theta)) + 1e-12
            ech.add(np.array(w.coeffs))


def test_c_k_examples():
    b = Basis((Form((1, 0)), Form((1, -1))), "abstract")
    assert wforms.c_masses(b) == [Fraction(1), Fraction(3)]
    assert wforms.c_k(b, 1) == 1
    with pytest.raises(ValueError):
        wforms.c_k(b, 3)
    # c_1 = 2^(-|w1|+1): smaller when the first form is long
    b2 = Basis((Form((1, 1)), Form((0, 1))), "abstract")
    assert wforms.c_k(b2, 1) == Fraction(1, 2)
    assert wforms.c_k(b2, 2) == 3


def test_c_k_full_rank_mass():
    rng = np.random.default_rng(5)
    for t in (1, 2, 3, 4):
        theta = rng.random(t) + 0.01
        masses = wforms.c_masses(wforms.greedy_basis(theta))
        assert masses[-1] == 2**t - 1
        assert all(a <= b for a, b in zip(masses, masses[1:]))


def test_equality_case_canonical_spans():
    # span of k canonical dual vectors gives c_k = 2^k - 1 exactly
    for t, picks in ((3, (0, 1)), (4, (1, 3)), (4, (0, 1, 2))):
        forms = []
        for j in picks:
            c = [0] * t
            c[j] = 1
            forms.append(Form(tuple(c)))
        # extend to a full independent tuple with remaining duals
        for j in range(t):
            if j not in picks:
                c = [0] * t
                c[j] = 1
                forms.append(Form(tuple(c)))
        masses = wforms.c_masses(Basis(tuple(forms), "abstract"))
        for k in range(1, len(picks) + 1):
            assert masses[k - 1] == 2**k - 1


def test_sign_invariance_of_selection():
    # flipping a selected form's sign leaves |w(theta)| unchanged; the
    # normalized representative is returned either way
    theta = [0.31, 0.62, 0.17]
    b = wforms.greedy_basis(theta)
    for f in b.forms:
        first = next(c for c in f.coeffs if c != 0)
        assert first == 1


def test_verify_mass_bound_t1():
    rep = wforms.verify_mass_bound(1, mode="exhaustive")
    assert rep.ok_realizable
    assert rep.n_distinct == 1


def test_verify_mass_bound_small_sampled():
    rep = wforms.verify_mass_bound(3, mode="sampled", n_samples=2000, seed=7)
    assert rep.ok_realizable
    assert rep.n_bases == 2000
    rep4 = wforms.verify_mass_bound(4, mode="sampled", n_samples=500, seed=7)
    assert rep4.ok_realizable


def test_verify_mass_bound_exhaustive_t2():
    rep = wforms.verify_mass_bound(2, mode="exhaustive", collect_rows=True)
    assert rep.ok_realizable
    # abstract tuples are reported separately and none violate at t = 2
    assert not rep.violations_abstract
    origins = {origin for _, origin, *_ in rep.all_rows}
    assert origins == {"realizable", "abstract"}
    with pytest.raises(ValueError):
        wforms.verify_mass_bound(4, mode="exhaustive")
