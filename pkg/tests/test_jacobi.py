import math

import numpy as np
import pytest

from cdscale.errors import IndexOutOfRange, InvalidCoefficient
from cdscale.jacobi import (AlternatingSignModel, ConstantModel, CustomModel,
                            PeriodicModel, TableModel, all_scaled_zeros,
                            eval_poly_sequence, gauss_quadrature, poly_table,
                            scaled_zeros, sturm_count, truncated_tridiagonal)

FREE = ConstantModel(1.0, 0.0)


def decaying_model(seed, strength=0.3, size=4000):
    """Trace-class perturbation of the free model; keeps 0 a bulk point."""
    rng = np.random.default_rng(seed)
    j = np.arange(1, size + 1)
    a = 1.0 + strength * rng.uniform(-1, 1, size) / j
    b = strength * rng.uniform(-1, 1, size) / j
    return TableModel(a, b)


def test_free_poly_pattern_at_zero():
    pairs = eval_poly_sequence(FREE, 0.0, 4)
    assert [p.p for p in pairs] == [1.0, 0.0, -1.0, 0.0, 1.0]
    assert [p.q for p in pairs] == [0.0, 1.0, 0.0, -1.0, 0.0]


def test_initial_data_any_model():
    model = PeriodicModel([1.5, 0.7], [0.3, -0.4])
    first = eval_poly_sequence(model, 0.123, 0)[0]
    assert (first.p, first.q, first.ell) == (1.0, 0.0, 0)


def test_free_degree_one_values():
    for x in (0.0, 0.5, -1.3, 2.0 + 0.5j):
        pair = eval_poly_sequence(FREE, x, 1)[1]
        assert pair.p == x
        assert pair.q == 1.0


def test_q_initialization_general_a1():
    model = ConstantModel(2.5, 0.0)
    pair = eval_poly_sequence(model, 0.9, 1)[1]
    assert pair.q == 1.0 / 2.5
    assert pair.p == 0.9 / 2.5


def test_real_input_gives_exactly_real_values():
    model = PeriodicModel([1.1, 0.9], [0.2, -0.1])
    pairs = eval_poly_sequence(model, 0.37, 50)
    assert all(isinstance(p.p, float) and isinstance(p.q, float) for p in pairs)


def test_recurrence_invalid_coefficient():
    with pytest.raises(InvalidCoefficient):
        ConstantModel(-1.0, 0.0)
    with pytest.raises(InvalidCoefficient):
        ConstantModel(1.0, math.inf)
    bad = CustomModel(lambda j: (1.0 if j < 3 else -1.0, 0.0), "bad tail")
    with pytest.raises(InvalidCoefficient):
        eval_poly_sequence(bad, 0.0, 5)


def test_poly_table_matches_scalar_path():
    model = PeriodicModel([1.2, 0.8, 1.0], [0.1, -0.2, 0.05])
    xs = np.array([0.0, 0.31, -0.77])
    P, Q = poly_table(model, xs, 40)
    for i, x in enumerate(xs):
        pairs = eval_poly_sequence(model, float(x), 40)
        np.testing.assert_allclose(P[:, i], [p.p for p in pairs], rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(Q[:, i], [p.q for p in pairs], rtol=1e-14, atol=1e-14)


def test_alternating_model_signs_and_context():
    model = AlternatingSignModel(2.0)
    a1, b1 = model.coeff(1, n=10)
    a2, b2 = model.coeff(2, n=10)
    assert (a1, b1) == (1.0, 0.2)
    assert (a2, b2) == (1.0, -0.2)
    with pytest.raises(InvalidCoefficient):
        model.coeff(1)  # order context required
    a_arr, b_arr = model.coeff_arrays(4, n=10)
    np.testing.assert_array_equal(b_arr, [0.2, -0.2, 0.2, -0.2])
    np.testing.assert_array_equal(a_arr, np.ones(4))


def test_table_model_no_implicit_extension():
    model = TableModel([1.0, 1.0], [0.0, 0.1])
    model.coeff(2)
    with pytest.raises(IndexOutOfRange):
        model.coeff(3)
    with pytest.raises(IndexOutOfRange):
        model.coeff_arrays(3)


def test_table_csv_round_trip(tmp_path):
    path = tmp_path / "coeffs.csv"
    path.write_text("j,a,b\n0,1.5,0.25\n1,0.75,-0.5\n")
    model = TableModel.from_csv(path)
    assert model.coeff(1) == (1.5, 0.25)
    assert model.coeff(2) == (0.75, -0.5)


@pytest.mark.parametrize("body,fragment", [
    ("x,a,b\n0,1,0\n", "header"),
    ("j,a,b\n1,1,0\n", "line 2"),
    ("j,a,b\n0,1,0\n0,1,0\n", "line 3"),
    ("j,a,b\n0,oops,0\n", "line 2"),
    ("j,a,b\n0,-1,0\n", "line 2"),
    ("j,a,b\n0,1\n", "line 2"),
])
def test_table_csv_malformed(tmp_path, body, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(InvalidCoefficient, match=fragment):
        TableModel.from_csv(path)


def test_scaled_zeros_three_by_three():
    # characteristic polynomial of the 3x3 free truncation is l^3 - 2l
    sl = scaled_zeros(FREE, 3, 0.0, 10.0)
    np.testing.assert_allclose(
        sl.scaled_zeros, [-3.0 * math.sqrt(2.0), 0.0, 3.0 * math.sqrt(2.0)], atol=1e-10)


def test_scaled_zeros_order_one():
    sl = scaled_zeros(ConstantModel(1.0, 0.0), 1, 0.0, 5.0)
    np.testing.assert_allclose(sl.scaled_zeros, [0.0], atol=1e-12)


def test_scaled_zeros_against_dense_eigensolver():
    model = decaying_model(11)
    n = 180
    diag, off = truncated_tridiagonal(model, n)
    dense = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    ref = np.sort(np.linalg.eigvalsh(dense))
    got = all_scaled_zeros(model, n).scaled_zeros / n
    assert got.size == n
    np.testing.assert_allclose(got, ref, atol=1e-10)


def test_sturm_count_matches_dense_eigensolver():
    rng = np.random.default_rng(12)
    diag = rng.uniform(-1, 1, 25)
    off = rng.uniform(0.2, 1.5, 24)
    dense = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    eigs = np.linalg.eigvalsh(dense)
    shifts = np.concatenate([rng.uniform(-4, 4, 30), eigs + 1e-9])
    counts = sturm_count(diag, off, shifts)
    for s, c in zip(shifts, counts):
        assert c == int(np.sum(eigs < s))


def test_zero_count_equals_degree():
    model = decaying_model(13)
    for n in (5, 40, 111):
        assert all_scaled_zeros(model, n).scaled_zeros.size == n


def test_interlacing():
    model = decaying_model(14)
    n = 120
    zn = all_scaled_zeros(model, n).scaled_zeros / n
    zm = all_scaled_zeros(model, n - 1).scaled_zeros / (n - 1)
    for k in range(n - 1):
        assert zn[k] < zm[k] < zn[k + 1]


def sign_change_zeros(model, n, x0, window):
    """Independent oracle: bisect sign changes of p_n on a fine grid."""
    grid = np.linspace(x0 - window / n, x0 + window / n, 4001)
    vals = poly_table(model, grid, n)[0][n]
    change = vals[:-1] * vals[1:] < 0
    los, his = grid[:-1][change], grid[1:][change]
    flos = vals[:-1][change]
    for _ in range(60):
        mids = 0.5 * (los + his)
        fmids = poly_table(model, mids, n)[0][n]
        left = flos * fmids <= 0
        his = np.where(left, mids, his)
        los = np.where(left, los, mids)
        flos = np.where(left, flos, fmids)
    return n * (0.5 * (los + his) - x0)


def test_sturm_zeros_match_sign_changes():
    model = decaying_model(15)
    n = 400
    window = 25.0
    sturm = scaled_zeros(model, n, 0.0, window).scaled_zeros
    oracle = sign_change_zeros(model, n, 0.0, window)
    assert sturm.size == oracle.size
    np.testing.assert_allclose(sturm, oracle, atol=1e-8)


def test_mean_gap_free_model():
    sl = scaled_zeros(FREE, 5000, 0.0, 40.0)
    gaps = sl.nearest_neighbor_gaps()
    assert abs(gaps.mean() - 2.0 * math.pi) <= 0.02 * 2.0 * math.pi


def test_free_zero_positions_chebyshev_oracle():
    # zeros of the degree-n second kind Chebyshev polynomial: 2 cos(k pi / (n+1))
    n = 500
    sl = scaled_zeros(FREE, n, 0.0, 30.0)
    k = np.arange(1, n + 1)
    cheb = 2.0 * np.cos(k * math.pi / (n + 1))
    expected = np.sort(n * cheb[np.abs(n * cheb) <= 30.0])
    np.testing.assert_allclose(sl.scaled_zeros, expected, atol=1e-8)


def test_gauss_quadrature_orthonormality():
    model = decaying_model(16)
    m = 60
    nodes, weights = gauss_quadrature(model, m)
    assert abs(weights.sum() - 1.0) < 1e-12
    P, _ = poly_table(model, nodes, 12)
    gram = (P * weights) @ P.T
    np.testing.assert_allclose(gram, np.eye(13), atol=1e-10)


def test_invalid_scaled_zero_arguments():
    with pytest.raises(ValueError):
        scaled_zeros(FREE, 0, 0.0, 1.0)
    with pytest.raises(ValueError):
        scaled_zeros(FREE, 5, 0.0, -1.0)
