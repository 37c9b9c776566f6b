import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flagdyn.errors import BadDegree, SingularInput
from flagdyn.linalg import (
    CartanVector,
    Matrix,
    cartan_projection,
    exterior_power,
    flag_divergent,
    gap_trace,
    simple_root_gaps,
    svd,
)


def random_invertible(rng, d, scale=10.0):
    while True:
        a = rng.uniform(-scale, scale, (d, d))
        if abs(np.linalg.det(a)) > 1e-3:
            return Matrix(a)


def test_svd_diagonal_is_trivial():
    m = Matrix(np.diag([4.0, 2.0, 1.0]))
    dec = svd(m)
    # canonical representative is unit determinant: compare ratios
    ratios = dec.sigma / dec.sigma[-1]
    assert np.allclose(ratios, [4.0, 2.0, 1.0])
    assert np.allclose(np.abs(dec.u), np.eye(3), atol=1e-12)
    assert np.allclose(np.abs(dec.v), np.eye(3), atol=1e-12)


def test_svd_orthogonal_input():
    theta = 0.83
    q = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    dec = svd(Matrix(q))
    assert np.allclose(dec.sigma, [1.0, 1.0], atol=1e-12)


def test_svd_2x2_quadratic_formula_oracle():
    # eigenvalues of m^T m for [[2,1],[0,1]] are (3 +- sqrt(5)); det = 2,
    # so the unit-determinant representative has singular values those
    # roots divided by sqrt(2)
    dec = svd(Matrix([[2, 1], [0, 1]]))
    expected = [math.sqrt((3 + math.sqrt(5)) / 2), math.sqrt((3 - math.sqrt(5)) / 2)]
    assert np.allclose(dec.sigma, expected, rtol=1e-12)


def test_svd_roundtrip_random():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        m = random_invertible(rng, d)
        dec = svd(m)
        scale = np.max(np.abs(m.arr))
        worst = max(worst, dec.residual / scale)
        assert np.max(np.abs(dec.u.T @ dec.u - np.eye(d))) < 1e-10
        assert np.max(np.abs(dec.v.T @ dec.v - np.eye(d))) < 1e-10
        assert np.all(np.diff(dec.sigma) <= 0)
    assert worst < 1e-9


def test_svd_matches_numpy_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = random_invertible(rng, int(rng.integers(2, 7)))
        ours = svd(m).sigma
        ref = np.linalg.svd(m.arr, compute_uv=False)
        assert np.allclose(ours, ref, rtol=1e-9)


def test_svd_deterministic():
    m = Matrix(np.random.default_rng(3).uniform(-5, 5, (4, 4)))
    d1, d2 = svd(m), svd(m)
    assert np.array_equal(d1.u, d2.u)
    assert np.array_equal(d1.sigma, d2.sigma)


def test_singular_input_rejected():
    with pytest.raises(SingularInput):
        Matrix(np.zeros((3, 3)))
    with pytest.raises(SingularInput):
        Matrix([[1.0, 2.0], [2.0, 4.0]])


def test_cartan_diagonal():
    cv = cartan_projection(Matrix(np.diag([math.e**2, math.e**-2])))
    assert np.allclose(cv.mu, [2.0, -2.0], atol=1e-12)


def test_cartan_identity():
    cv = cartan_projection(Matrix.identity(4))
    assert np.allclose(cv.mu, 0.0, atol=1e-12)


def test_cartan_parabolic_2x2_closed_form():
    # exact singular values of [[1,n],[0,1]] from the quadratic formula
    for n in [3, 10, 100]:
        m = Matrix([[1, n], [0, 1]])
        cv = cartan_projection(m)
        s2 = (n * n + 2 + math.sqrt((n * n + 2) ** 2 - 4)) / 2
        assert np.allclose(cv.mu[0], 0.5 * math.log(s2), rtol=1e-10)
        assert abs(np.sum(cv.mu)) < 1e-9


def test_cartan_subadditivity():
    rng = np.random.default_rng(5)
    for _ in range(200):
        g = random_invertible(rng, 3)
        h = random_invertible(rng, 3)
        mu_g = cartan_projection(g).mu
        mu_h = cartan_projection(h).mu
        mu_gh = cartan_projection(g @ h).mu
        assert mu_gh[0] <= mu_g[0] + mu_h[0] + 1e-9


def test_cartan_vector_validation():
    with pytest.raises(ValueError):
        CartanVector(dim=2, mu=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CartanVector(dim=2, mu=np.array([-1.0, 1.0]))


def test_simple_root_gaps():
    cv = CartanVector(dim=2, mu=np.array([2.0, -2.0]))
    assert np.allclose(simple_root_gaps(cv), [4.0])
    cv = cartan_projection(Matrix(np.diag([4.0, 2.0, 1.0])))
    assert np.allclose(simple_root_gaps(cv), [math.log(2), math.log(2)], atol=1e-12)


def test_exterior_power_identity_degree():
    rng = np.random.default_rng(7)
    m = random_invertible(rng, 4)
    e1 = exterior_power(m, 1)
    assert np.allclose(e1.arr, m.arr)


def test_exterior_power_diagonal():
    m = Matrix(np.diag([2.0, 3.0, 5.0]))
    e = exterior_power(m, 2)
    diag = np.diag(e.arr)
    # lex order {1,2},{1,3},{2,3} -> products 6, 10, 15, up to unit-det scale
    assert np.allclose(diag / diag[0], [1.0, 10.0 / 6.0, 15.0 / 6.0])


def test_exterior_power_bad_degree():
    m = Matrix.identity(3)
    with pytest.raises(BadDegree):
        exterior_power(m, 0)
    with pytest.raises(BadDegree):
        exterior_power(m, 3)


def test_exterior_functoriality():
    rng = np.random.default_rng(11)
    for d in (3, 4, 5):
        for _ in range(20):
            g = random_invertible(rng, d)
            h = random_invertible(rng, d)
            k = int(rng.integers(1, d))
            lhs = exterior_power(g @ h, k).arr
            rhs = (exterior_power(g, k) @ exterior_power(h, k)).arr
            err = min(np.max(np.abs(lhs - rhs)), np.max(np.abs(lhs + rhs)))
            assert err < 1e-8 * np.max(np.abs(lhs))


def test_exterior_sigma_products():
    rng = np.random.default_rng(13)
    for _ in range(10):
        g = random_invertible(rng, 4)
        s = svd(g).sigma
        se = svd(exterior_power(g, 2)).sigma
        prods = sorted((s[i] * s[j] for i in range(4) for j in range(i + 1, 4)), reverse=True)
        prods = np.array(prods)
        prods = prods / np.prod(prods) ** (1 / len(prods))  # unit-det scale
        assert np.allclose(se, prods, rtol=1e-8)


def test_gap_transfer():
    # gap 0 of the k-th exterior power equals log(sigma_k/sigma_{k+1})
    rng = np.random.default_rng(17)
    for d in (4, 5):
        for _ in range(25):
            g = random_invertible(rng, d)
            s = svd(g).sigma
            for k in range(1, d):
                got = simple_root_gaps(cartan_projection(exterior_power(g, k)))[0]
                want = math.log(s[k - 1] / s[k])
                assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_gap_trace_identity():
    trace = gap_trace([Matrix.identity(3)] * 5, 1)
    assert np.allclose(trace, 0.0, atol=1e-12)
    assert not flag_divergent(trace)


def test_gap_trace_diagonal_powers_exact():
    g = np.diag([2.0, 0.5])
    seq = [Matrix(np.linalg.matrix_power(g, n)) for n in range(1, 13)]
    trace = gap_trace(seq, 1)
    assert np.allclose(trace, [2 * math.log(2) * n for n in range(1, 13)], rtol=1e-10)
    assert flag_divergent(trace, threshold=5.0)


def test_gap_trace_unipotent_log_growth():
    # oracle: exact 2x2 singular values of [[1,n],[0,1]]
    seq = [Matrix([[1, n], [0, 1]]) for n in range(1, 200, 10)]
    trace = gap_trace(seq, 1)
    for n, g in zip(range(1, 200, 10), trace):
        s2 = (n * n + 2 + math.sqrt((n * n + 2) ** 2 - 4)) / 2
        assert abs(g - math.log(s2)) < 1e-9
    assert trace[-1] > 2 * math.log(100)


def test_jordan3_power_gaps_monotone():
    j = np.eye(3)
    j[0, 1] = j[1, 2] = 1.0
    seq = [Matrix(np.linalg.matrix_power(j, n)) for n in range(1, 60)]
    trace = gap_trace(seq, 1)
    tail = trace[10:]
    assert all(b > a for a, b in zip(tail, tail[1:]))
    assert trace[-1] > trace[0]


def test_flag_divergent_requires_threshold():
    assert not flag_divergent([0.1 * n for n in range(40)], threshold=5.0)
    assert flag_divergent([0.2 * n for n in range(40)], threshold=5.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=2**31 - 1))
def test_svd_reconstruction_property(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-10, 10, (d, d))
    if abs(np.linalg.det(a)) < 1e-6:
        return
    m = Matrix(a)
    dec = svd(m)
    recon = dec.u @ np.diag(dec.sigma) @ dec.v.T
    assert np.max(np.abs(recon - m.arr)) <= 1e-9 * max(1.0, np.max(np.abs(m.arr)))


def test_exact_integer_dedup():
    a = Matrix([[2, 4], [6, 8]])
    b = Matrix([[1, 2], [3, 4]])
    c = Matrix([[-1, -2], [-3, -4]])
    assert a.key() == b.key() == c.key()
