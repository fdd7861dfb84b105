import json
import math

import numpy as np
import pytest

from gapspectra.model import (DomainError, Interval, NonAdmissibleError, Potential,
                              is_admissible, make_scale, make_tree, make_window,
                              multiplicity, window_of)


def test_tree_constants_b4():
    tr = make_tree(4)
    assert tr.R == pytest.approx(1.25, abs=1e-15)
    assert tr.theta == pytest.approx(math.acos(0.8), abs=1e-15)
    assert tr.theta == pytest.approx(0.6435011, abs=1e-7)
    assert tr.beta == pytest.approx(1.3862944, abs=1e-7)


def test_tree_constants_b2():
    tr = make_tree(2)
    assert tr.R == pytest.approx(1.0606602, abs=1e-7)
    assert tr.theta == pytest.approx(0.3398369, abs=1e-7)


@pytest.mark.parametrize("b", [1, 0, -3, 2.5, True])
def test_make_tree_rejects(b):
    with pytest.raises(DomainError):
        make_tree(b)


@pytest.mark.parametrize("b,k,expected", [(2, 3, 4), (4, 2, 12), (3, 0, 1), (3, 1, 2)])
def test_multiplicity(b, k, expected):
    assert multiplicity(make_tree(b), k) == expected


@pytest.mark.parametrize("b", [2, 3, 5])
def test_multiplicities_sum_to_sphere_size(b):
    tr = make_tree(b)
    for K in range(6):
        assert sum(multiplicity(tr, k) for k in range(K + 1)) == b ** K


def test_shift_power():
    assert Potential.power(1.0).shift(0)(1.0) == pytest.approx(0.25)
    assert Potential.power(1.0).shift(2)(0.0) == pytest.approx(1 / 9)


def test_shift_exponential():
    assert Potential.exponential(1.0).shift(2)(0.0) == pytest.approx(math.exp(-4.0))


def test_shift_table_out_of_range():
    q = Potential.tabulated(np.linspace(0, 10, 11), np.linspace(1, 0, 11))
    q3 = q.shift(3)
    assert q3(2.0) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        q3(8.0)


def test_table_extend_constant():
    q = Potential.tabulated([0, 1, 2], [2.0, 1.0, 0.5], extend_constant=True)
    assert q(10.0) == pytest.approx(0.5)
    assert math.isinf(q.decay_radius(0.4))
    assert q.decay_radius(0.75) == pytest.approx(1.5)


def test_potential_json_roundtrip():
    for q in [Potential.power(3.0, sign=1, scale=2.0), Potential.exponential(0.5),
              Potential.tabulated([0, 1, 2], [1, 0.5, 0.0], sign=1)]:
        d = json.loads(q.dumps())
        assert Potential.from_json(d) == q
        assert set(d) >= {"sign", "kind"}


def test_potential_json_malformed():
    with pytest.raises(DomainError):
        Potential.from_json({"kind": "power", "params": {}})
    with pytest.raises(DomainError):
        Potential.from_json({"kind": "nope"})


def test_decay_radius_power_and_exp():
    q = Potential.power(1.0, scale=100.0)
    t = q.decay_radius(1.0)
    assert q.sup_from(t) == pytest.approx(1.0)
    e = Potential.exponential(0.5, scale=math.e ** 3)
    assert e.decay_radius(1.0) == pytest.approx(3.0)


def test_interval_validation():
    with pytest.raises(DomainError):
        Interval(2.0, 1.0)
    assert not Interval(0.0, math.inf).bounded


def test_window_of():
    tr = make_tree(4)
    assert window_of(tr, 9.0).l == 1
    assert window_of(tr, -3.0).l == 0
    w = make_window(tr, 1)
    assert window_of(tr, w.lambda_plus).l == 1


def test_threshold_accounts_for_mid_gap_eigenvalue():
    tr = make_tree(4)
    w = make_window(tr, 1)
    # negative potentials push the free eigenvalue pi^2 down towards lam = 9
    assert w.threshold(-1, 9.0) == pytest.approx(math.pi ** 2 - 9.0)
    assert w.threshold(+1, 9.0) == pytest.approx(9.0 - w.lambda_minus)
    assert w.threshold(-1, 12.0) == pytest.approx(w.lambda_plus - 12.0)


def test_admissibility_at_edges():
    tr = make_tree(4)
    w = make_window(tr, 1)
    p1 = Potential.power(1.0)
    p3 = Potential.power(3.0)
    assert is_admissible(tr, w, +1, p1, w.lambda_plus)
    assert not is_admissible(tr, w, +1, p1, w.lambda_minus)
    assert not is_admissible(tr, w, -1, p1, w.lambda_plus)
    assert is_admissible(tr, w, -1, p3, w.lambda_plus)
    assert is_admissible(tr, w, -1, Potential.exponential(1.0), w.lambda_plus)


def test_scale_params():
    s = make_scale(Potential.power(1.0), 1e4)
    assert s.alpha == pytest.approx(100.0)
    assert s.beta_k(0) == pytest.approx(0.01)
    e = make_scale(Potential.exponential(1.0), math.e ** 10)
    assert e.alpha == pytest.approx(5.0)
    with pytest.raises(DomainError):
        make_scale(Potential.power(1.0), 0.5)
