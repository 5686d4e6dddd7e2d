import math

import numpy as np
import pytest

import skewflow as sf
from skewflow import core
from skewflow.corpus import diagonal_system, ex_ce, ex_nues1


def test_norms_match_numpy():
    v = np.array([3.0, -4.0, 1.0])
    assert sf.vector_norm(v, "l1") == 8.0
    assert sf.vector_norm(v, "l2") == pytest.approx(np.linalg.norm(v))
    assert sf.vector_norm(v, "linf") == 4.0
    A = np.array([[1.0, -2.0], [3.0, 4.0]])
    for kind, order in (("l1", 1), ("l2", 2), ("linf", np.inf)):
        assert sf.operator_norm(A, kind) == pytest.approx(np.linalg.norm(A, order))


def test_unknown_norm_rejected():
    with pytest.raises(sf.InputError):
        sf.vector_norm([1.0], "l3")
    with pytest.raises(sf.InputError):
        ex_nues1(norm_kind="max")


@pytest.mark.parametrize("kind", ["l1", "l2", "linf"])
def test_norming_functional(kind):
    v = np.array([0.5, -2.0, 1.5])
    f = core.norming_functional(v, kind)
    assert f @ v == pytest.approx(sf.vector_norm(v, kind))
    dual = {"l1": "linf", "l2": "l2", "linf": "l1"}[kind]
    assert sf.vector_norm(f, dual) == pytest.approx(1.0)


def test_evaluate_identity_and_value():
    system, _ = sf.builtin("ex_nues1")
    assert np.array_equal(sf.evaluate(system, 2.0, 2.0, 0.3).matrix, np.eye(1))
    val = sf.evaluate(system, 2.0, 0.0, 0.0).matrix[0, 0]
    assert val == pytest.approx(math.exp(-6.0), rel=1e-14)


@pytest.mark.parametrize("t,s", [(1.0, 2.0), (1.0, -0.5), (math.inf, 0.0), (math.nan, 0.0)])
def test_bad_time_pairs(t, s):
    system, _ = sf.builtin("ex_nues1")
    with pytest.raises(sf.DomainError):
        sf.evaluate(system, t, s, 0.0)


@pytest.mark.parametrize("x", [-1.0, math.nan, "a"])
def test_bad_states(x):
    system, _ = sf.builtin("ex_nues1")
    with pytest.raises(sf.InputError):
        sf.evaluate(system, 1.0, 0.0, x)


def test_step_system_products_and_domain():
    rng = np.random.default_rng(0)
    steps = rng.standard_normal((5, 2, 2))
    system = sf.step_system(steps)
    M = sf.evaluate(system, 4, 1, 0.0).matrix
    assert np.allclose(M, steps[3] @ steps[2] @ steps[1])
    with pytest.raises(sf.DomainError):
        sf.evaluate(system, 1.5, 0, 0.0)
    with pytest.raises(sf.DomainError):
        sf.evaluate(system, 6, 0, 0.0)
    with pytest.raises(sf.InputError):
        sf.step_system(np.zeros((2, 2, 3)))


def test_transition_table_matches_evaluate():
    system, _ = sf.builtin("ex_nued")
    table = system.transition_table(1.0, 6)
    for n in range(7):
        for k in range(n, 7):
            assert np.allclose(table[n, k], sf.evaluate(system, k, n, 1.0).matrix, rtol=1e-12)


def test_axioms_pass_and_fail():
    grid = sf.random_time_grid(30, 8.0, seed=3)
    assert sf.verify_axioms(ex_ce("corrected")[0], grid, [0.0, 1.5]).passed
    rep = sf.verify_axioms(ex_ce("shifted")[0], grid, [0.0, 1.5])
    assert not rep.passed
    assert rep.cocycle_residual > 1e-3
    assert len(rep.rows) == 60
    assert set(rep.to_dict()) >= {"passed", "cocycle_residual", "rows"}


def test_axioms_detect_non_identity():
    def cocycle(t, s, x):
        return np.array([[2.0]])
    bad = sf.SkewEvolutionSystem(1, cocycle)
    rep = sf.verify_axioms(bad, [(1.0, 1.0, 0.0)], [0.0])
    assert rep.identity_residual == pytest.approx(1.0)
    assert not rep.passed


def test_random_time_grid_ordered_and_seeded():
    g = sf.random_time_grid(20, 5.0, seed=7)
    assert all(t >= s >= t0 >= 0 for t, s, t0 in g)
    assert g == sf.random_time_grid(20, 5.0, seed=7)
    gi = sf.random_time_grid(20, 5, seed=7, integer=True)
    assert all(float(v).is_integer() for row in gi for v in row)


def test_shift_scales_and_collapses():
    system = diagonal_system([0.5, -1.0])
    shifted = sf.shift(system, 2.0)
    A = sf.evaluate(system, 3.0, 1.0, 0.0).matrix
    B = sf.evaluate(shifted, 3.0, 1.0, 0.0).matrix
    assert np.allclose(B, math.exp(-4.0) * A)
    assert sf.shift(shifted, -2.0) is system
    assert np.allclose(shifted.transition_table(0.0, 4)[1, 3], B)


def test_restrict_requires_invariance():
    system = diagonal_system([0.5, -1.0])
    sub = sf.restrict(system, np.diag([1.0, 0.0]))
    assert np.allclose(sf.evaluate(sub, 2.0, 0.0, 0.0).matrix, np.diag([math.exp(1.0), 0.0]))
    rot = sf.step_system([[[0.0, 1.0], [1.0, 0.0]]] * 6)
    with pytest.raises(sf.InvarianceError) as info:
        sf.restrict(rot, np.diag([1.0, 0.0]))
    assert info.value.witness is not None


def test_projected_table_matches_plain_product():
    rng = np.random.default_rng(1)
    steps = rng.uniform(0.5, 1.5, size=(8, 2, 2)) * np.eye(2)
    system = sf.step_system(steps)
    P = core.as_projector_map(np.diag([0.0, 1.0]))
    fast = core.projected_table(system, 0.0, 8, P)
    slow = system.transition_table(0.0, 8) @ P.matrix
    assert np.allclose(fast, slow, rtol=1e-13, atol=0)


def test_adjoint_apply_is_transpose():
    op = sf.LinearOperator(np.array([[1.0, 2.0], [3.0, 4.0]]), "l2")
    w, size = sf.adjoint_apply(op, [1.0, -1.0])
    assert np.allclose(w, [-2.0, -2.0])
    assert size == pytest.approx(math.sqrt(8.0))
