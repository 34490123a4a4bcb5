from __future__ import annotations

import numpy as np
import pytest
import sympy

from core.abelian import AbelianGroup, tensor_mod
from core.errors import PreconditionViolated
from core.intlinalg import IntMatrix, cokernel, cokernel_mod, cokernel_mod_local, smith_normal_form


def _random_matrix(rng: np.random.Generator, rows: int, cols: int, spread: int = 6) -> IntMatrix:
    return IntMatrix.from_array(rng.integers(-spread, spread + 1, size=(rows, cols)))


@pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 5), (5, 5)])
def test_smith_decomposition(rng, shape):
    for _ in range(10):
        A = _random_matrix(rng, *shape)
        smith = smith_normal_form(A)
        assert smith.left @ A @ smith.right == smith.diagonal_matrix()
        assert abs(sympy.Matrix(smith.left.to_lists()).det()) == 1
        assert abs(sympy.Matrix(smith.right.to_lists()).det()) == 1
        nonzero = [d for d in smith.diag if d]
        assert all(d > 0 for d in nonzero)
        assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
        assert list(smith.diag[len(nonzero):]) == [0] * (len(smith.diag) - len(nonzero))


def test_diagonal_product_is_determinant(rng):
    for _ in range(10):
        A = _random_matrix(rng, 4, 4, spread=20)
        det = sympy.Matrix(A.to_lists()).det(method="bareiss")
        product = 1
        for d in smith_normal_form(A).diag:
            product *= d
        assert product == abs(det)


def test_known_cokernels():
    assert cokernel(IntMatrix.from_rows([[2, 0], [0, 3]])).key == "Z/6"
    assert cokernel(IntMatrix.from_rows([[2, 4], [6, 8]])).invariant_factors == (2, 4)
    assert cokernel(IntMatrix.from_rows([[2], [0]])).key == "Z x Z/2"
    assert cokernel(IntMatrix.from_rows([[1, 0], [0, 1]])).key == "1"


def test_empty_and_zero_matrices():
    assert smith_normal_form(IntMatrix.from_rows([])).diag == ()
    zero = IntMatrix.from_rows([[0, 0], [0, 0], [0, 0]])
    assert smith_normal_form(zero).diag == (0, 0)
    assert cokernel(zero) == AbelianGroup(free_rank=3)


def test_parse_round_trip():
    A = IntMatrix.parse("1 2\n\n3 4\n")
    assert A.to_lists() == [[1, 2], [3, 4]]
    with pytest.raises(PreconditionViolated):
        IntMatrix.parse("1 2\n3\n")


@pytest.mark.parametrize("a", [2, 4, 6, 12])
def test_cokernel_mod_agrees_with_tensor(rng, a):
    for _ in range(10):
        A = _random_matrix(rng, 4, 5)
        expected = tensor_mod(cokernel(A), a)
        assert cokernel_mod(A, a) == expected
        assert cokernel_mod_local(A, a) == expected


def test_local_elimination_on_arrays(rng):
    matrix = rng.integers(0, 8, size=(6, 6))
    assert cokernel_mod_local(matrix, 8) == cokernel_mod(IntMatrix.from_array(matrix), 8)


def test_modulus_must_be_positive():
    with pytest.raises(PreconditionViolated):
        cokernel_mod(IntMatrix.identity(2), 0)
    assert cokernel_mod(IntMatrix.identity(2), 1) == AbelianGroup()


@pytest.mark.slow
def test_smith_decomposition_at_full_size(rng):
    for _ in range(1000):
        rows, cols = (int(x) for x in rng.integers(1, 13, size=2))
        A = _random_matrix(rng, rows, cols, spread=99)
        smith = smith_normal_form(A)
        assert smith.left @ A @ smith.right == smith.diagonal_matrix()
        nonzero = [d for d in smith.diag if d]
        assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
        if rows == cols:
            product = 1
            for d in smith.diag:
                product *= d
            assert product == abs(sympy.Matrix(A.to_lists()).det(method="bareiss"))


@pytest.mark.slow
def test_cokernel_mod_agrees_with_tensor_at_full_size(rng):
    for _ in range(200):
        rows, cols = (int(x) for x in rng.integers(1, 13, size=2))
        a = int(rng.choice([2, 3, 4, 6, 8, 9, 12, 30]))
        A = _random_matrix(rng, rows, cols, spread=99)
        expected = tensor_mod(cokernel(A), a)
        assert cokernel_mod(A, a) == expected
        assert cokernel_mod_local(A, a) == expected
