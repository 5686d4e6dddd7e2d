"""Property tests for the structural invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import skewflow as sf
from skewflow import _kernels as K
from skewflow.corpus import diagonal_system

from gen_fixtures import build, stable_spec, trichotomic_spec

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
H = sf.Horizon(n_max=30)

seeds = st.integers(0, 10_000)
rates = st.floats(-2.0, 2.0, allow_nan=False)
times = st.floats(0.0, 20.0, allow_nan=False)


@FAST
@given(seeds, st.lists(times, min_size=3, max_size=3))
def test_cocycle_law_on_generated_systems(seed, ts):
    system, _ = build(trichotomic_spec(seed, "similarity"))
    t, s, t0 = sorted(ts, reverse=True)
    A = sf.evaluate(system, t, s, 0.0).matrix
    B = sf.evaluate(system, s, t0, 0.0).matrix
    C = sf.evaluate(system, t, t0, 0.0).matrix
    scale = max(1.0, np.abs(A).max() * np.abs(B).max(), np.abs(C).max())
    assert np.abs(A @ B - C).max() <= 1e-9 * scale


@FAST
@given(rates, rates, times, times)
def test_shifts_compose(a, b, t, s):
    t, s = max(t, s), min(t, s)
    system = diagonal_system([0.3, -0.8])
    lhs = sf.evaluate(sf.shift(sf.shift(system, a), b), t, s, 0.0).matrix
    rhs = sf.evaluate(sf.shift(system, a + b), t, s, 0.0).matrix
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=0)


@FAST
@given(st.floats(-3.0, -0.05), st.floats(0.05, 4.0), st.floats(0.05, 4.0))
def test_es_verdict_monotone_in_rate(rate, mu1, mu2):
    lo, hi = sorted((mu1, mu2))
    system = diagonal_system([rate, rate - 0.5])
    if sf.es_certificate(system, hi, H).holds:
        assert sf.es_certificate(system, lo, H).holds


@FAST
@given(seeds, st.floats(0.05, 3.0))
def test_coefficients_at_least_one(seed, mu):
    system, _ = build(stable_spec(seed)[0])
    for cert in (sf.es_certificate(system, mu, H), sf.datko_criterion(system, sf.IDENTITY, mu, H)):
        c = cert.coefficients[np.isfinite(cert.coefficients)]
        assert np.all(c >= 1.0)


@FAST
@given(st.floats(-3.0, 3.0), st.floats(0.2, 3.0))
def test_es_and_eis_never_both_hold(rate, mu):
    # both can pass only below the trend-test resolution log(10) / (n_max / 2)
    system = diagonal_system([rate])
    assert not (sf.es_certificate(system, mu, H).holds and sf.eis_certificate(system, mu, H).holds)


@FAST
@given(st.integers(0, 2**31), st.floats(-2.0, 2.0), st.booleans(), st.floats(0.01, 100.0))
def test_ratio_kernels_scale_free_and_backends_agree(seed, c, three, k):
    rng = np.random.default_rng(seed)
    Y = np.triu(np.exp(rng.normal(0, 1.5, size=(8, 8))))
    for name in ("forward_ratios", "backward_ratios"):
        fn = getattr(K, name)
        a = fn(Y, c, three, use_numba=False)[0]
        b = fn(Y * k, c, three, use_numba=False)[0]
        np.testing.assert_allclose(a, b, rtol=1e-12)
        if K.NUMBA_KERNELS:
            np.testing.assert_allclose(fn(Y, c, three, use_numba=True)[0], a, rtol=1e-12)


@FAST
@given(st.integers(0, 2**31), st.floats(-1.0, 1.0), st.floats(0.3, 3.0), st.booleans())
def test_sum_kernels_bound_ratio_kernels(seed, c, q, three):
    # a sum of nonnegative terms dominates its largest term
    rng = np.random.default_rng(seed)
    Y = np.triu(np.exp(rng.normal(0, 1.0, size=(7, 7))))
    fs = K.forward_sums(Y, c, q, three)[0]
    fr = K.forward_ratios(Y, c, three)[0]
    m = np.isfinite(fs)
    assert np.all(fs[m] >= fr[m] ** q * (1 - 1e-12))
    # and partial sums only grow with the lag
    step = np.diff(fs, axis=1)
    ok = np.isfinite(step)
    assert np.all(step[ok] >= -1e-12 * fs[:, 1:][ok])


@FAST
@given(seeds, st.sampled_from(["none", "similarity", "orthogonal"]))
def test_three_four_round_trip(seed, conjugation):
    _, truth = build(trichotomic_spec(seed, conjugation))
    triple = sf.ProjectorFamily("triple", [truth.projectors[r] for r in ("stable", "unstable", "central")])
    back = sf.three_from_four(sf.four_from_three(triple))
    for a, b in zip(triple.at(0.0), back.at(0.0)):
        assert np.abs(a - b).max() <= 1e-12 * max(1.0, np.abs(a).max())


@FAST
@given(seeds, times, times)
def test_restriction_is_phi_times_projector(seed, t, s):
    t, s = max(t, s), min(t, s)
    system, truth = build(trichotomic_spec(seed, "similarity"))
    P = truth.projectors["central"]
    sub = sf.restrict(system, P, check=False)
    if t > s:
        np.testing.assert_allclose(sf.evaluate(sub, t, s, 0.0).matrix,
                                   sf.evaluate(system, t, s, 0.0).matrix @ P, rtol=1e-9, atol=1e-12)


@FAST
@given(st.floats(0.05, 3.0), st.floats(0.1, 1.0))
def test_datko_closed_form_on_scalars(decay, frac):
    rho = frac * decay
    system = diagonal_system([-decay])
    cert = sf.datko_criterion(system, sf.IDENTITY, rho, H)
    r = math.exp(rho - decay)
    partial = H.n_max + 1 if r == 1 else (1 - r ** (H.n_max + 1)) / (1 - r)
    assert math.isclose(cert.coefficients[0], partial, rel_tol=1e-10)
