import numpy as np
import pytest

import skewflow as sf
from skewflow import spectra
from skewflow.corpus import diagonal_system

from gen_fixtures import build, trichotomic_spec

H = sf.Horizon(n_max=40)


def diag3():
    system = diagonal_system([-1.5, 1.5, 0.0])
    triple = spectra.coordinate_family("triple", 3, [[0], [1], [2]])
    return system, triple


# --- invariance and algebra ----------------------------------------------

def test_invariance_pass_and_witness():
    system, triple = diag3()
    assert spectra.check_invariance(triple[0], system).passed
    rot = sf.step_system([[[0.0, 1.0], [1.0, 0.0]]] * 6)
    res = spectra.check_invariance(np.diag([1.0, 0.0]), rot)
    assert not res.passed
    assert res.witness is not None and res.residual > 0.5


def test_family_size_is_checked():
    with pytest.raises(sf.InputError):
        sf.ProjectorFamily("triple", [np.eye(2), np.zeros((2, 2))])
    with pytest.raises(sf.InputError):
        sf.ProjectorFamily("quint", [np.eye(2)])


def test_triple_algebra_reports_each_condition():
    _, triple = diag3()
    rep = spectra.check_algebra(triple)
    assert rep.passed and not rep.failed()
    bad = sf.ProjectorFamily("triple", [np.diag([1.0, 0, 0]), np.diag([1.0, 1, 0]), np.diag([0, 0, 1.0])])
    rep = spectra.check_algebra(bad)
    assert "products_zero" in rep.failed() and "sum_identity" in rep.failed()


def test_non_idempotent_member_fails():
    rep = spectra.check_algebra([np.diag([2.0, 0.0]), np.diag([-1.0, 1.0])])
    assert "idempotent[P1]" in rep.failed()


def test_oblique_quad_fails_norm_identities_only():
    # an oblique pair is algebraically fine but not orthogonal, so pc3 fails in l2
    P = np.array([[1.0, 1.0], [0.0, 0.0]])
    Q = np.eye(2) - P
    quad = sf.ProjectorFamily("quad", [P, Q, Q, P])
    rep = spectra.check_algebra(quad)
    assert set(rep.failed()) <= {"pc3", "pc4", "pc5"} and "pc3" in rep.failed()
    # three_from_four does not require the norm identities
    sf.three_from_four(quad)


def test_check_compatible_includes_invariance():
    system, triple = diag3()
    rep = sf.check_compatible(triple, system)
    assert rep.passed
    assert {"invariant[P1]", "invariant[P2]", "invariant[P3]"} <= set(rep.conditions)
    with pytest.raises(sf.InputError):
        sf.check_compatible(triple, diagonal_system([1.0]))


# --- dichotomy ------------------------------------------------------------

def test_dichotomy_on_direct_sum():
    system, desc = sf.builtin("direct_sum")
    pair = desc.families["pair"]
    cert = sf.dichotomy_certificate(system, pair, -1.0, 0.5, H)
    assert cert.holds
    assert set(cert.parts) == {"d1", "d2"}
    swapped = sf.dichotomy_certificate(system, pair[::-1], -1.0, 0.5, H)
    assert not swapped.holds
    assert swapped.witness is not None


def test_dichotomy_rejects_non_invariant_pair():
    rot = sf.step_system([[[0.0, 1.0], [1.0, 0.0]]] * 60)
    pair = spectra.coordinate_family("pair", 2, [[0], [1]])
    with pytest.raises(sf.InvarianceError):
        sf.dichotomy_certificate(rot, pair, -1.0, 1.0, H)


def test_dichotomy_sum_matches_scalar_sums():
    system, desc = sf.builtin("direct_sum")
    cert = sf.dichotomy_sum_criterion(system, desc.families["pair"], 1.0, -0.5, horizon=H)
    assert cert.holds
    assert set(cert.parts) == {"ed1", "ed2"}


# --- trichotomy -----------------------------------------------------------

def test_trichotomy_on_coordinate_split():
    system, triple = diag3()
    cert = sf.trichotomy_certificate(system, triple, (-1.0, -0.5, 0.5, 1.0), H)
    assert cert.holds and set(cert.parts) == {"t1", "t2", "t3", "t4"}
    too_fast = sf.trichotomy_certificate(system, triple, (-2.0, -0.5, 0.5, 1.0), H)
    assert not too_fast.holds and not too_fast.parts["t1"].holds


@pytest.mark.parametrize("nus", [(-1, 0.5, 0.5, 1), (-1, -1, 2, 1), (-1, -1, 1)])
def test_trichotomy_exponent_order(nus):
    system, triple = diag3()
    with pytest.raises(sf.InputError):
        sf.trichotomy_certificate(system, triple, nus, H)


def test_constant_base_nuet_is_trichotomic():
    system, desc = sf.builtin("ex_nuet", {"base": {"constant": 1.0}})
    h = sf.Horizon(n_max=30, states=(0.0,))
    cert = sf.trichotomy_certificate(system, desc.families["triple"], desc.expected["nu"], h)
    assert desc.expected["nu"] == (-1.0, -1.0, 1.0, 1.0)
    assert cert.holds


def test_default_base_nuet_central_bounds_break():
    system, desc = sf.builtin("ex_nuet")
    h = sf.Horizon(n_max=30, states=(0.0,))
    cert = sf.trichotomy_certificate(system, desc.families["triple"], desc.expected["nu"], h)
    assert not cert.holds
    assert {k for k, c in cert.parts.items() if not c.holds} == {"t1", "t4"}


def test_trichotomy_sum_and_precondition():
    system, triple = diag3()
    cert = sf.trichotomy_sum_criterion(system, triple, (1.0, 1.0, 1.0, 1.0), H)
    assert cert.holds
    assert "growth_omega_max" in cert.diagnostics
    # a part annihilated after one step has no exponential decay envelope
    dead = sf.step_system([np.diag([0.5, 0.0, 1.0])] * 60)
    with pytest.raises(sf.PreconditionError) as info:
        sf.trichotomy_sum_criterion(dead, triple, (1.0, 1.0, 1.0, 1.0), H)
    assert info.value.witness is not None


# --- three <-> four -------------------------------------------------------

def test_four_three_round_trip_on_generated_fixture():
    system, truth = build(trichotomic_spec(2))
    triple = sf.ProjectorFamily("triple", [truth.projectors[r] for r in ("stable", "unstable", "central")])
    quad = sf.four_from_three(triple)
    back = sf.three_from_four(quad)
    for a, b in zip(triple.at(0.0), back.at(0.0)):
        assert np.abs(a - b).max() <= 1e-12
    cert = sf.four_projector_certificate(system.with_norm("l2"), quad, 0.75, 0.5, H)
    assert cert.holds
    assert cert.diagnostics["agrees_with_trichotomy"]


def test_four_projector_rate_order():
    system, triple = diag3()
    quad = sf.four_from_three(triple)
    with pytest.raises(sf.InputError):
        sf.four_projector_certificate(system, quad, 0.5, 0.75, H)


def test_four_from_three_rejects_bad_triple():
    bad = [np.diag([1.0, 1, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])]
    with pytest.raises(sf.InputError):
        sf.four_from_three(bad)


def test_split_certificate_serializes():
    import json
    system, triple = diag3()
    cert = sf.trichotomy_certificate(system, triple, (-1.0, -0.5, 0.5, 1.0), H)
    data = cert.to_dict()
    json.dumps(data)
    assert data["holds"] is True and set(data["parts"]) == {"t1", "t2", "t3", "t4"}
