import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ortho_subselect import (
    BadSignVector,
    BadWeights,
    LengthMismatch,
    NotOrthonormal,
    SubspaceBasis,
    check_ball_convexity,
    check_quasi_triangle,
    child_seed,
    estimate_process,
    gaussian_sup_estimates,
    gen_random_ortho,
    gen_walsh,
    make_rng,
    packing_count,
    proj_l1_l2_norm,
    quasimetric_d,
    quasimetric_dtilde,
    rademacher,
    sup_process_sample,
)
from ortho_subselect.processes import compensated_sum

HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)
HALF_NORMAL_STD = math.sqrt(1.0 - 2.0 / math.pi)


def ones_span(m: int) -> SubspaceBasis:
    return SubspaceBasis(np.full((m, 1), 1.0 / math.sqrt(m)))


def test_basis_validation():
    with pytest.raises(NotOrthonormal):
        SubspaceBasis(np.ones((4, 2)))
    with pytest.raises(NotOrthonormal):
        SubspaceBasis(np.ones((2, 4)))


def test_q_on_coordinate_span():
    assert proj_l1_l2_norm(SubspaceBasis.coordinate_span(10, 3)) == 1.0


def test_q_on_ones_span():
    m = 16
    assert abs(proj_l1_l2_norm(ones_span(m)) - 1.0 / math.sqrt(m)) <= 1e-15


def test_q_equals_max_projected_basis_vector():
    # definitional oracle: max_j ||P_W e_j|| computed through the projector
    a = gen_random_ortho(3, 12, seed=4)
    w = SubspaceBasis.from_ortho_rows(a)
    proj = w.u @ w.u.T
    direct = max(float(np.linalg.norm(proj[:, j])) for j in range(12))
    assert abs(proj_l1_l2_norm(w) - direct) <= 1e-12


def test_q_bounded_by_coherence():
    # for W = range(A^T) the bound Q <= t sqrt(n/M) is tight
    from ortho_subselect import coherence

    for a in (gen_walsh(8, 64), gen_random_ortho(5, 40, seed=8)):
        w = SubspaceBasis.from_ortho_rows(a)
        t = coherence(a).t
        assert proj_l1_l2_norm(w) <= t * math.sqrt(a.n / a.m) + 1e-12


def test_sup_sample_coordinate_span():
    w = SubspaceBasis.coordinate_span(8, 1)
    signs = rademacher(make_rng(0), 8)
    assert sup_process_sample(w, signs) == 1.0


def test_sup_sample_all_plus_ones():
    w = SubspaceBasis.coordinate_span(8, 3)
    assert sup_process_sample(w, np.ones(8)) == 1.0
    a = gen_random_ortho(3, 12, seed=1)
    wb = SubspaceBasis.from_ortho_rows(a)
    assert abs(sup_process_sample(wb, np.ones(12)) - 1.0) <= 1e-12


def test_sup_sample_sign_flip_symmetry():
    a = gen_random_ortho(4, 20, seed=2)
    w = SubspaceBasis.from_ortho_rows(a)
    signs = rademacher(make_rng(3), 20)
    assert sup_process_sample(w, signs) == sup_process_sample(w, -signs)


def test_sup_sample_basis_rotation_invariance():
    a = gen_random_ortho(4, 20, seed=5)
    w = SubspaceBasis.from_ortho_rows(a)
    rot = gen_random_ortho(4, 4, seed=6).mat
    w2 = SubspaceBasis(w.u @ rot)
    signs = rademacher(make_rng(7), 20)
    assert abs(sup_process_sample(w, signs) - sup_process_sample(w2, signs)) <= 1e-10


def test_sup_sample_dominates_brute_force():
    # sampling oracle: max over a million random unit w in W of the weighted
    # square sum, which the spectral value must dominate within 1e-3
    a = gen_random_ortho(3, 16, seed=9)
    w = SubspaceBasis.from_ortho_rows(a)
    signs = rademacher(make_rng(10), 16)
    value = sup_process_sample(w, signs)
    core = (w.u * signs[:, None]).T @ w.u
    y = np.random.default_rng(11).standard_normal((1_000_000, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    sampled = float(np.max(np.abs(np.einsum("ij,jk,ik->i", y, core, y))))
    assert sampled <= value + 1e-12
    assert value - sampled <= 1e-3


def test_sup_sample_rejects_bad_signs():
    w = SubspaceBasis.coordinate_span(4, 1)
    with pytest.raises(BadSignVector):
        sup_process_sample(w, np.ones(3))
    with pytest.raises(BadSignVector):
        sup_process_sample(w, np.array([1.0, -1.0, 0.5, 1.0]))


def test_estimate_coordinate_fixture_is_exact():
    est = estimate_process(SubspaceBasis.coordinate_span(64, 1), trials=50, seed=0)
    assert est.mean == 1.0
    assert est.std_error == 0.0
    assert est.q == 1.0


def test_estimate_one_dim_equals_direct_scalar_simulation():
    # same seeds, same sign draws, same aggregation: exact equality
    m, trials, seed = 32, 40, 13
    a = gen_random_ortho(1, m, seed=14)
    w = SubspaceBasis.from_ortho_rows(a)
    v = a.mat[0]
    values = np.empty(trials)
    for trial in range(trials):
        rng = make_rng(child_seed(seed, trial))
        signs = rademacher(rng, m)
        values[trial] = abs(float((v * signs) @ v))
    direct_mean = compensated_sum(values) / trials
    est = estimate_process(w, trials, seed)
    assert est.mean == direct_mean


def test_estimate_ones_span_matches_independent_simulation():
    # |sum eps_i| / M oracle simulated with a fresh stream, 3 std errors
    m, trials = 64, 400
    est = estimate_process(ones_span(m), trials, seed=21)
    rng = np.random.default_rng(1234)
    oracle = np.abs(rademacher(rng, (trials, m)).sum(axis=1)) / m
    gap = abs(est.mean - oracle.mean())
    se = math.hypot(est.std_error, oracle.std(ddof=1) / math.sqrt(trials))
    assert gap <= 3.0 * se


def test_gaussian_sup_half_normal_fixture():
    trials = 10_000
    mean_inf, mean_w = gaussian_sup_estimates(
        SubspaceBasis.coordinate_span(64, 1), None, trials, seed=2
    )
    assert mean_w is None
    se = HALF_NORMAL_STD / math.sqrt(trials)
    assert abs(mean_inf - HALF_NORMAL_MEAN) <= 3.0 * se


def test_gaussian_sup_weighted_variants():
    w = SubspaceBasis.coordinate_span(64, 1)
    trials = 10_000
    _, zero = gaussian_sup_estimates(w, [0.0] * 64, trials, seed=3)
    assert zero == 0.0
    weights = [0.0] * 64
    weights[0] = 1.0
    _, weighted = gaussian_sup_estimates(w, weights, trials, seed=4)
    se = HALF_NORMAL_STD / math.sqrt(trials)
    assert abs(weighted - HALF_NORMAL_MEAN) <= 3.0 * se


def test_gaussian_sup_rejects_bad_weights():
    w = SubspaceBasis.coordinate_span(8, 1)
    with pytest.raises(BadWeights):
        gaussian_sup_estimates(w, [1.0] * 7, 10, seed=0)
    with pytest.raises(BadWeights):
        gaussian_sup_estimates(w, [math.nan] * 8, 10, seed=0)


def test_quasimetric_basics():
    assert quasimetric_d([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert quasimetric_d([1.0, 0.0], [0.0, 0.0]) == 1.0
    a, b = [0.3, -1.2, 2.0], [1.1, 0.4, -0.7]
    assert quasimetric_d(a, b) == quasimetric_d(b, a)
    with pytest.raises(LengthMismatch):
        quasimetric_d([1.0], [1.0, 2.0])


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, 6, elements=st.floats(-100, 100)),
    arrays(np.float64, 6, elements=st.floats(-100, 100)),
)
def test_quasimetric_sandwich_property(x, y):
    # dtilde <= sqrt(2) d, with zero only at equal squares
    d = quasimetric_d(x, y)
    dt = quasimetric_dtilde(x, y)
    assert dt <= math.sqrt(2.0) * d or dt == d == 0.0


def test_triangle_ratio_bounded():
    for dim in (2, 8):
        assert check_quasi_triangle(5_000, dim, seed=6) <= 4.0


def test_worst_triangle_sample_record():
    from ortho_subselect import QuasimetricSample, worst_triangle_sample

    sample = worst_triangle_sample(2_000, 3, seed=6)
    assert sample.ratio == sample.lhs / sample.rhs
    assert sample.ratio == check_quasi_triangle(2_000, 3, seed=6)
    assert QuasimetricSample.of(0.0, 0.0).ratio == 0.0
    assert QuasimetricSample.of(1.0, 0.0).ratio == math.inf
    assert QuasimetricSample.of(3.0, 2.0).ratio == 1.5


def test_ball_convexity_bounded():
    assert check_ball_convexity(1_000, 6, rho=0.3, seed=7) <= 4.0
    with pytest.raises(ValueError):
        check_ball_convexity(10, 6, rho=0.0, seed=0)


def test_ball_convexity_reports_sampler_failure(monkeypatch):
    from ortho_subselect import SamplingFailed
    from ortho_subselect import processes as proc

    monkeypatch.setattr(proc, "_ball_point", lambda *args, **kw: None)
    with pytest.raises(SamplingFailed):
        check_ball_convexity(10, 4, rho=0.1, seed=0)


def test_estimate_process_needs_two_trials():
    with pytest.raises(ValueError):
        estimate_process(SubspaceBasis.coordinate_span(4, 1), trials=1, seed=0)


def test_packing_degenerate_cases():
    same = np.zeros((5, 3))
    assert packing_count(same, "linf", radius=0.1) == 1
    rng = np.random.default_rng(8)
    pts = rng.standard_normal((20, 3))
    assert packing_count(pts, "d", radius=1e-12) == 20
    with pytest.raises(BadWeights):
        packing_count(pts, "weighted", radius=0.1)
    with pytest.raises(ValueError):
        packing_count(pts, "l2", radius=0.1)


def test_packing_covering_form_with_fitted_constant():
    # greedy packings of W cap B^M under l-infinity obey
    # log(count) <= (C Q sqrt(ln M) / radius)^2 with a single O(1) fitted C
    a = gen_random_ortho(2, 8, seed=21)
    w = SubspaceBasis.from_ortho_rows(a)
    q = proj_l1_l2_norm(w)
    rng = np.random.default_rng(5)
    y = rng.standard_normal((512, 2))
    y = y / np.linalg.norm(y, axis=1, keepdims=True)
    y *= rng.uniform(0.0, 1.0, 512)[:, None] ** 0.5
    pts = y @ a.mat
    radii = (0.05, 0.1, 0.2, 0.3, 0.5)
    counts = [packing_count(pts, "linf", r) for r in radii]
    assert all(a2 <= a1 for a1, a2 in zip(counts, counts[1:]))
    fitted = max(
        r * math.sqrt(math.log(c)) / (q * math.sqrt(math.log(8)))
        for r, c in zip(radii, counts)
        if c > 1
    )
    assert fitted <= 1.5
    for r, c in zip(radii, counts):
        assert math.log(c) <= (fitted * q * math.sqrt(math.log(8)) / r) ** 2 + 1e-9


def test_compensated_sum_extreme_cancellation():
    values = [1e16, 1.0, -1e16]
    assert compensated_sum(values) == 1.0
