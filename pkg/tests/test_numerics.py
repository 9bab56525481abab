import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noisy_sysid.errors import InvalidInputError, NotPSDError, SingularGramError
from noisy_sysid.literals import cyclic_shift
from noisy_sysid.numerics import (
    RngStream,
    as_matrix,
    draw_gaussian,
    min_singular_value,
    operator_norm,
    psd_factor,
    solve_right,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_min_singular_value_examples():
    assert min_singular_value(np.eye(2)) == pytest.approx(1.0, rel=1e-12)
    R = np.hstack([np.eye(2), 0.5 * np.eye(2)])
    assert min_singular_value(R) == pytest.approx(np.sqrt(1.25), rel=1e-10)
    assert min_singular_value(np.zeros((2, 2))) == 0.0


def test_operator_norm_examples():
    assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    assert operator_norm(cyclic_shift(20, 0.8)) == pytest.approx(0.8, rel=1e-12)
    assert operator_norm(np.array([[3.0], [4.0]])) == pytest.approx(5.0)


@pytest.mark.parametrize("fn", [min_singular_value, operator_norm])
def test_non_finite_rejected(fn):
    with pytest.raises(InvalidInputError):
        fn(np.array([[1.0, np.nan]]))
    with pytest.raises(InvalidInputError):
        fn(np.array([[np.inf]]))


def test_as_matrix_is_read_only_copy():
    src = np.eye(2)
    M = as_matrix(src)
    src[0, 0] = 5.0
    assert M[0, 0] == 1.0
    with pytest.raises(ValueError):
        M[0, 0] = 2.0
    with pytest.raises(InvalidInputError):
        as_matrix([1.0, 2.0])


@given(arrays(np.float64, (2, 2), elements=finite))
def test_two_by_two_singular_values_match_closed_form(M):
    # roots of the characteristic polynomial of M^T M, in the cancellation-free form
    (a, b), (c, d) = M
    p = np.hypot(a + d, c - b)
    q = np.hypot(a - d, b + c)
    assert operator_norm(M) == pytest.approx((p + q) / 2, abs=1e-9)
    assert min_singular_value(M) == pytest.approx(abs(p - q) / 2, abs=1e-9)
    assert min_singular_value(M) <= operator_norm(M)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_min_le_max(r, c, seed):
    M = np.random.default_rng(seed).standard_normal((r, c))
    assert min_singular_value(M) <= operator_norm(M)


def test_solve_right_examples():
    np.testing.assert_allclose(solve_right(np.array([[2.0, 4.0]]), 2 * np.eye(2)), [[1.0, 2.0]])
    X = solve_right(np.eye(2), np.array([[2.0, 1.0], [0.0, 1.0]]))
    np.testing.assert_allclose(X, [[0.5, -0.5], [0.0, 1.0]], atol=1e-15)
    with pytest.raises(SingularGramError) as info:
        solve_right(np.eye(2), np.zeros((2, 2)))
    assert info.value.condition == np.inf


def test_solve_right_rejects_ill_conditioned():
    D = np.diag([1.0, 1e-13])
    with pytest.raises(SingularGramError) as info:
        solve_right(np.eye(2), D)
    assert info.value.condition == pytest.approx(1e13)


def test_solve_right_dimension_errors():
    with pytest.raises(InvalidInputError):
        solve_right(np.eye(3), np.eye(2))
    with pytest.raises(InvalidInputError):
        solve_right(np.eye(2), np.ones((2, 3)))


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**31))
def test_solve_right_residual(d, r, seed):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((d, d)) + 3 * np.eye(d)
    N = rng.standard_normal((r, d))
    try:
        X = solve_right(N, D)
    except SingularGramError:
        return
    resid = np.linalg.norm(X @ D - N, 2)
    assert resid <= 1e-8 * (np.linalg.norm(N, 2) + np.linalg.norm(X, 2) * np.linalg.norm(D, 2))


def test_psd_factor_examples():
    L = psd_factor(np.eye(3))
    np.testing.assert_allclose(L @ L.T, np.eye(3), atol=1e-12)
    L = psd_factor(np.diag([4.0, 9.0]))
    np.testing.assert_allclose(L @ L.T, np.diag([4.0, 9.0]), atol=1e-12)
    with pytest.raises(NotPSDError) as info:
        psd_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.min_eigenvalue == pytest.approx(-1.0)


def test_psd_factor_accepts_singular_and_clamps():
    S = np.zeros((3, 3))
    S[0, 0] = 2.0
    L = psd_factor(S)
    np.testing.assert_allclose(L @ L.T, S, atol=1e-12)
    psd_factor(np.diag([1.0, -5e-11]))
    with pytest.raises(NotPSDError):
        psd_factor(np.diag([1.0, -1e-9]))


def test_psd_factor_rejects_asymmetric():
    with pytest.raises(InvalidInputError):
        psd_factor(np.array([[1.0, 0.5], [0.0, 1.0]]))


@settings(max_examples=50)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_psd_factor_reconstructs(n, rank, seed):
    G = np.random.default_rng(seed).standard_normal((n, rank))
    S = G @ G.T
    L = psd_factor(S)
    np.testing.assert_allclose(L @ L.T, S, atol=1e-8 * max(1.0, np.abs(S).max()))


def test_draw_gaussian_zero_covariance():
    out = draw_gaussian(RngStream(1, "w"), np.zeros((3, 3)), 10)
    assert out.shape == (10, 3)
    assert not out.any()


def test_draw_gaussian_deterministic_and_label_sensitive():
    L = psd_factor(np.eye(2))
    a = draw_gaussian(RngStream(7, "w", 3), L, 100)
    b = draw_gaussian(RngStream(7, "w", 3), L, 100)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, draw_gaussian(RngStream(7, "eta", 3), L, 100))
    assert not np.array_equal(a, draw_gaussian(RngStream(7, "w", 4), L, 100))
    assert not np.array_equal(a, draw_gaussian(RngStream(8, "w", 3), L, 100))


def test_rng_seed_derivation_is_pinned():
    # sha256 of "42|trajectory/w|0", low 16 bytes little-endian, feeding PCG64
    stream = RngStream(42, "trajectory", 0).child("w")
    assert stream == RngStream(42, "trajectory/w", 0)
    assert stream.seed() == 45683921296804917760224508166547870026
    assert stream.generator().integers(0, 2**63, size=3).tolist() == [
        6466953987624438910,
        3504573708624813372,
        827785980469072441,
    ]


def test_draw_gaussian_sample_covariance():
    draws = draw_gaussian(RngStream(2024, "w"), np.eye(2), 100_000)
    cov = draws.T @ draws / len(draws)
    assert np.linalg.norm(cov - np.eye(2), 2) < 0.05


def test_draw_gaussian_applies_factor():
    S = np.array([[4.0, 1.0], [1.0, 2.0]])
    draws = draw_gaussian(RngStream(5, "w"), psd_factor(S), 200_000)
    cov = draws.T @ draws / len(draws)
    assert np.linalg.norm(cov - S, 2) < 0.1


def test_rng_stream_validation():
    with pytest.raises(InvalidInputError):
        RngStream(-1, "w")
    with pytest.raises(InvalidInputError):
        RngStream(2**64, "w")
    with pytest.raises(InvalidInputError):
        RngStream(0, "w", -1)
