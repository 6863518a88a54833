import math
from array import array

import pytest

from rnnbench.linalg import (
    Matrix,
    Rng,
    Vector,
    concat,
    init_uniform,
    matvec,
    sigmoid,
    sigmoid_scalar,
    tanh_v,
    vadd,
    vmul,
)


def test_rng_is_deterministic():
    a = Rng(42)
    b = Rng(42)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


def test_rng_seeds_differ():
    assert Rng(1).next_u64() != Rng(2).next_u64()


def test_rng_float_range():
    rng = Rng(7)
    for _ in range(1000):
        x = rng.next_float()
        assert 0.0 <= x < 1.0


def test_rng_uniform_bounds():
    rng = Rng(3)
    for _ in range(1000):
        x = rng.uniform(-0.5, 0.5)
        assert -0.5 <= x < 0.5


def test_rng_shuffle_is_permutation():
    rng = Rng(11)
    items = list(range(20))
    rng.shuffle(items)
    assert sorted(items) == list(range(20))
    assert items != list(range(20))  # astronomically unlikely to be identity


def test_vector_basics():
    v = Vector([1.0, 2.0, 3.0])
    assert len(v) == 3
    assert v[1] == 2.0
    assert v.tolist() == [1.0, 2.0, 3.0]
    assert v == Vector([1.0, 2.0, 3.0])
    assert v != Vector([1.0, 2.0, 4.0])


def test_vector_zeros():
    assert Vector.zeros(4).tolist() == [0.0, 0.0, 0.0, 0.0]


def test_vector_rejects_non_finite():
    with pytest.raises(ValueError):
        Vector([1.0, float("nan")])
    with pytest.raises(ValueError):
        Vector([float("inf")])


def test_vector_copy_is_independent():
    v = Vector([1.0, 2.0])
    w = v.copy()
    w.data[0] = 9.0
    assert v[0] == 1.0


def test_matrix_shape_check():
    with pytest.raises(ValueError):
        Matrix(2, 3, [1.0] * 5)


def test_matrix_get():
    m = Matrix(2, 2, [1.0, 2.0, 3.0, 4.0])
    assert m.get(0, 1) == 2.0
    assert m.get(1, 0) == 3.0
    assert m[1, 1] == 4.0


def test_matvec_identity():
    m = Matrix.identity(3)
    v = Vector([5.0, -2.0, 0.5])
    assert matvec(m, v) == v


def test_matvec_known_values():
    m = Matrix(2, 3, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    v = Vector([1.0, 0.0, -1.0])
    out = matvec(m, v)
    assert out.tolist() == [-2.0, -2.0]


def test_matvec_dimension_mismatch():
    m = Matrix.zeros(2, 3)
    with pytest.raises(ValueError):
        matvec(m, Vector([1.0, 2.0]))


def test_sigmoid_scalar_values():
    assert sigmoid_scalar(0.0) == 0.5
    assert sigmoid_scalar(100.0) == pytest.approx(1.0)
    assert sigmoid_scalar(-100.0) == pytest.approx(0.0, abs=1e-40)
    # symmetry: s(-x) == 1 - s(x)
    for x in (0.1, 1.0, 3.7, 20.0):
        assert sigmoid_scalar(-x) == pytest.approx(1.0 - sigmoid_scalar(x), abs=1e-15)


def test_sigmoid_scalar_no_overflow():
    # the naive exp(-x) form overflows for large negative x
    assert sigmoid_scalar(-750.0) == 0.0
    assert sigmoid_scalar(750.0) == 1.0


def test_elementwise_ops():
    a = Vector([1.0, 2.0, 3.0])
    b = Vector([4.0, 5.0, 6.0])
    assert vadd(a, b).tolist() == [5.0, 7.0, 9.0]
    assert vmul(a, b).tolist() == [4.0, 10.0, 18.0]
    assert concat(a, b).tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]


def test_elementwise_length_mismatch():
    with pytest.raises(ValueError):
        vadd(Vector([1.0]), Vector([1.0, 2.0]))
    with pytest.raises(ValueError):
        vmul(Vector([1.0]), Vector([1.0, 2.0]))


def test_vector_activations_match_scalar():
    v = Vector([-2.0, -0.5, 0.0, 0.5, 2.0])
    s = sigmoid(v)
    t = tanh_v(v)
    for i, x in enumerate(v):
        assert s[i] == sigmoid_scalar(x)
        assert t[i] == math.tanh(x)


def test_init_uniform_bounds_and_determinism():
    m1 = init_uniform(Rng(5), 4, 6, 0.25)
    m2 = init_uniform(Rng(5), 4, 6, 0.25)
    assert m1 == m2
    assert all(-0.25 <= x < 0.25 for x in m1.data)
    # not all identical
    assert len(set(m1.data)) > 1


def test_vector_accepts_array_without_copy_flag():
    raw = array("d", [1.0, 2.0])
    v = Vector(raw)
    assert v.tolist() == [1.0, 2.0]
