import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gapspectra.bandstructure import free_gap_eigenfunction
from gapspectra.fd_oracle import (assemble, dense_eigs, inertia_count, make_grid,
                                  oracle_check, richardson, tree_weight)
from gapspectra.model import DomainError, Potential, make_tree
from gapspectra.sturm import count_N

ZERO = Potential.zero()


def test_weight_convention():
    assert tree_weight(2, 2.5) == 8.0
    assert tree_weight(2, 2.0) == 8.0
    assert tree_weight(4, 0.0) == 4.0


@pytest.mark.parametrize("h", [0.0, -0.1, 0.3, 1 / 4])
def test_grid_rejects(h):
    with pytest.raises(DomainError):
        make_grid((0, 3), h)


def test_grid_contains_integers():
    x = make_grid((0.3, 4.0), 1 / 16)
    for n in (1, 2, 3):
        assert np.any(np.abs(x - n) < 1e-14)
    assert x[0] == 0.3 and x[-1] == 4.0


def test_matrices_symmetric_positive_mass():
    tr = make_tree(3)
    f = assemble(tr, Potential.power(1.0, sign=-1).scaled(5.0), (0.2, 6.5), 1 / 16)
    K, M = f.dense()
    assert np.allclose(K, K.T) and np.allclose(M, M.T)
    assert np.linalg.eigvalsh(M).min() > 0


def test_single_edge_dirichlet():
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        ev = dense_eigs(assemble(make_tree(2), ZERO, (0, 1), h), n_lowest=1)[0]
        assert ev > math.pi ** 2
        errs.append(ev - math.pi ** 2)
    assert errs[-1] < 2e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_rayleigh_quotient_of_gap_eigenfunction():
    # the weighted variable is y / sqrt(weight); it is continuous at the integers
    tr = make_tree(4)
    quots = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        f = assemble(tr, ZERO, (0, 12), h)
        x = f.grid[1:-1]
        phi = free_gap_eigenfunction(tr, 1, x) / np.sqrt(tree_weight(tr.b, x - 1e-12))
        K, M = f.dense()
        quots.append(phi @ K @ phi / (phi @ M @ phi))
    assert all(q > math.pi ** 2 for q in quots)
    assert quots[-1] == pytest.approx(math.pi ** 2, abs=5e-3)
    assert richardson(quots) == pytest.approx(math.pi ** 2, abs=1e-6)


def test_weight_telescoping():
    for b in (2, 3, 4):
        K_ = 7
        f = assemble(make_tree(b), ZERO, (0, K_), 1 / 8)
        total = float(np.sum(f.weight * np.diff(f.grid)))
        assert total == pytest.approx(b * (b ** K_ - 1) / (b - 1), rel=1e-13)


def test_richardson_exact_on_quadratic_error():
    hs = np.array([1 / 8, 1 / 16, 1 / 32])
    assert richardson(3.0 + 2.0 * hs ** 2 + 5.0 * hs ** 4) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.property
@given(st.integers(2, 4), st.sampled_from([-1, 1]), st.floats(0.1, 100.0),
       st.lists(st.floats(-5.0, 200.0), min_size=2, max_size=5))
def test_inertia_matches_dense_and_is_monotone(b, sign, g, lams):
    tr = make_tree(b)
    f = assemble(tr, Potential.exponential(0.7, sign=sign).scaled(g), (0.0, 5.0), 1 / 16)
    ev = dense_eigs(f)
    counts = []
    for lam in sorted(lams):
        if np.min(np.abs(ev - lam)) < 1e-8 * (1 + abs(lam)):
            continue
        c = inertia_count(f, lam)
        assert c == int(np.sum(ev < lam))
        counts.append(c)
    assert counts == sorted(counts)


@pytest.mark.property
@given(st.integers(2, 4), st.sampled_from([-1, 1]), st.floats(0.1, 500.0),
       st.floats(0.0, 5.0), st.floats(1.0, 8.0), st.floats(-2.0, 60.0))
def test_mesh_refinement_monotone(b, sign, g, r1, length, lam):
    tr = make_tree(b)
    V = Potential.power(1.5, sign=sign).scaled(g)
    delta = (r1, r1 + length)
    counts = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        try:
            counts.append(inertia_count(assemble(tr, V, delta, h), lam))
        except Exception:
            return
    exact = count_N(tr, V, lam, delta)
    if exact.warnings:
        return
    # nested conforming meshes approximate eigenvalues from above
    assert counts == sorted(counts)
    assert counts[-1] <= exact.value


def test_oracle_check_small():
    cases, draws = oracle_check(n_cases=10, seed=3)
    assert len(cases) == 10 and draws >= 10
    assert all(c.agree for c in cases)
