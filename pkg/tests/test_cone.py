"""Elemental inequalities, sliding windows, and Gaussian entropy vectors."""

import itertools
import math

import numpy as np
import pytest

from nocsit import (
    LinearInequality,
    VarSet,
    elemental_inequalities,
    gaussian_entropy_vector,
    sliding_window_inequality,
    window_mask,
    window_masks,
)
from nocsit.cone import LN_2PIE
from nocsit.errors import ParameterError

SLACK = 1e-9


def enumerate_elemental_count(n: int) -> int:
    """Independent oracle: count (i, j, K) triples plus the n conditional forms."""
    count = n
    for i, j in itertools.combinations(range(1, n + 1), 2):
        rest = [k for k in range(1, n + 1) if k not in (i, j)]
        for r in range(len(rest) + 1):
            count += sum(1 for _ in itertools.combinations(rest, r))
    return count


@pytest.mark.parametrize("n,expected", [(2, 3), (3, 9), (5, 85)])
def test_elemental_counts(n, expected):
    elems = elemental_inequalities(n)
    assert len(elems) == expected
    assert enumerate_elemental_count(n) == expected
    assert expected == n + math.comb(n, 2) * 2 ** (n - 2)
    # identifiers are unique and stable
    names = [e.name for e in elems]
    assert len(set(names)) == len(names)
    assert names == [e.name for e in elemental_inequalities(n)]


def test_elemental_forms_n2():
    elems = {e.name: e for e in elemental_inequalities(2)}
    # h(X1|X2) >= 0, h(X2|X1) >= 0, I(X1;X2) >= 0
    assert elems["mono01"].coeffs == {3: 1, 2: -1}
    assert elems["mono02"].coeffs == {3: 1, 1: -1}
    assert elems["mi01-02-0000"].coeffs == {1: 1, 2: 1, 3: -1}


def test_varset_range():
    with pytest.raises(ParameterError):
        VarSet(1)
    with pytest.raises(ParameterError):
        VarSet(13)
    with pytest.raises(ParameterError):
        elemental_inequalities(1)


def test_window_masks_cyclic():
    # N=4: window of size 3 starting at Y3 wraps to {Y3, Y4, Y1}
    assert window_mask(4, 3, 3) == 0b1101
    assert window_masks(3, 2) == [0b011, 0b110, 0b101]
    with pytest.raises(ParameterError):
        window_mask(4, 5, 2)


def test_sliding_window_base_case():
    ineq = sliding_window_inequality(2, 1)
    # h(Y1) + h(Y2) - h(Y1 Y2) >= 0
    assert ineq.coeffs == {1: 1, 2: 1, 3: -1}


def test_sliding_window_n3_m1():
    ineq = sliding_window_inequality(3, 1)
    assert ineq.coeffs == {0b011: 1, 0b110: 1, 0b101: 1, 0b111: -2}


def test_sliding_window_conditioned_a_coefficient():
    # N=4, m=2 over 5 variables: coefficient on h({A}) must be -m
    ineq = sliding_window_inequality(4, 2, conditioned=True)
    assert ineq.varset.n == 5
    a_bit = 1 << 4
    assert ineq.coeffs[a_bit] == -2
    # each window picks up the conditioning variable
    for wm in window_masks(4, 2):
        assert ineq.coeffs[wm | a_bit] == 1
    assert ineq.coeffs[0b1111 | a_bit] == -2


@pytest.mark.parametrize("n_vars,m", [(2, 0), (2, 2), (4, 0), (4, 4), (1, 1)])
def test_sliding_window_rejects_degenerate_m(n_vars, m):
    with pytest.raises(ParameterError):
        sliding_window_inequality(n_vars, m)


def test_gaussian_identity_covariance():
    vec = gaussian_entropy_vector(np.eye(3))
    for mask in vec.varset.subsets():
        size = bin(mask).count("1")
        assert vec.h(mask) == pytest.approx(0.5 * size * LN_2PIE, abs=1e-12)
    # independence makes the window inequality an equality
    ineq = sliding_window_inequality(3, 1)
    assert ineq.evaluate(vec) == pytest.approx(0.0, abs=SLACK)


def test_gaussian_diagonal_covariance():
    vec = gaussian_entropy_vector(np.diag([1.0, 4.0]))
    assert vec.h(0b01) == pytest.approx(0.5 * LN_2PIE)
    assert vec.h(0b10) == pytest.approx(0.5 * LN_2PIE + 0.5 * math.log(4.0))
    assert vec.h(0b11) == pytest.approx(vec.h(0b01) + vec.h(0b10))


def test_gaussian_rejects_non_pd():
    with pytest.raises(ParameterError):
        gaussian_entropy_vector(np.array([[1.0, 2.0], [2.0, 1.0]]))  # eig -1
    with pytest.raises(ParameterError):
        gaussian_entropy_vector(np.array([[1.0, 0.5], [0.4, 1.0]]))  # asymmetric


def random_gaussian_vectors(n, count, seed, ridge=1.0):
    """Log-det entropy vectors of G G^T + ridge * I.

    ridge >= 1/(2*pi*e) keeps every conditional variance large enough that
    the differential entropies are monotone (a full polymatroid); small
    ridges exercise the near-singular regime where only the conditional-MI
    inequalities survive.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        g = rng.standard_normal((n, n))
        yield gaussian_entropy_vector(g @ g.T + ridge * np.eye(n))


def test_well_conditioned_gaussians_live_in_the_cone():
    elems = elemental_inequalities(5)
    for vec in random_gaussian_vectors(5, 40, seed=101):
        for e in elems:
            assert e.evaluate(vec) >= -SLACK, e.name


def test_gaussian_monotone_and_submodular():
    for vec in random_gaussian_vectors(4, 25, seed=17):
        for s in vec.varset.subsets():
            for t in vec.varset.subsets():
                if s & ~t == 0:  # s subset of t
                    assert vec.h(s) <= vec.h(t) + SLACK
        for s in vec.varset.subsets():
            for t in vec.varset.subsets():
                union, inter = s | t, s & t
                lhs = vec.h(s) + vec.h(t)
                rhs = vec.h(union) + (vec.h(inter) if inter else 0.0)
                assert lhs >= rhs - SLACK


def test_near_singular_gaussians_stay_submodular():
    # differential entropies can break monotonicity when conditional
    # variances collapse, but every conditional-MI form still holds
    mi_elems = [e for e in elemental_inequalities(4) if e.name.startswith("mi")]
    saw_negative_cond_entropy = False
    for vec in random_gaussian_vectors(4, 25, seed=3, ridge=1e-3):
        for e in mi_elems:
            assert e.evaluate(vec) >= -SLACK, e.name
        full = vec.varset.full_mask
        for i in range(4):
            if vec.h(full) - vec.h(full ^ (1 << i)) < -SLACK:
                saw_negative_cond_entropy = True
    assert saw_negative_cond_entropy  # the regime is actually exercised


def test_window_inequality_on_random_gaussians():
    # holds even in the near-singular regime: the proof never uses
    # monotonicity, only subadditivity and conditioning drops
    instances = [
        sliding_window_inequality(n, m, conditioned)
        for n in range(2, 5)
        for m in range(1, n)
        for conditioned in (False, True)
    ]
    for vec in random_gaussian_vectors(5, 30, seed=23, ridge=1e-3):
        for ineq in instances:
            if ineq.varset.n <= 5:
                var_map = {v: v for v in range(1, ineq.varset.n + 1)}
                embedded = ineq.embed(5, var_map)
                assert embedded.evaluate(vec) >= -SLACK


def test_embed_remaps_and_validates():
    ineq = sliding_window_inequality(2, 1)  # over Y1, Y2
    moved = ineq.embed(4, {1: 2, 2: 4})
    assert moved.coeffs == {0b0010: 1, 0b1000: 1, 0b1010: -1}
    with pytest.raises(ParameterError):
        ineq.embed(4, {1: 2, 2: 2})  # not injective
    with pytest.raises(ParameterError):
        ineq.embed(4, {1: 2})  # missing variable


def test_inequality_equality_and_zero_pruning():
    from fractions import Fraction

    vs = VarSet(2)
    a = LinearInequality(vs, {1: 1, 2: 1, 3: -1})
    b = LinearInequality(vs, {1: Fraction(2, 2), 2: 1, 3: -1}, name="other")
    assert a == b  # names are not part of the identity
    assert 3 not in LinearInequality(vs, {1: 1, 3: 0}).coeffs
    with pytest.raises(ParameterError):
        LinearInequality(vs, {4: 1})  # mask out of range
