import itertools
import random
from fractions import Fraction

from cgm.diagram import Colour, type_of
from cgm.gadgets import (gaussian_circuit, matrix_circuit, nary_copy,
                         thick_ite)
from cgm.linalg import Matrix
from cgm.semantics import evaluate


class TestNaryCopy:
    def test_copies_into_diracs(self):
        for n in range(4):
            mix = evaluate(nary_copy(Colour.R, n))
            (c,) = mix.row(())
            assert c.lin == Matrix.from_rows([[1]] * n, cols=1)
            assert c.gram().is_zero() and c.weight == 1

    def test_boolean_fanout(self):
        mix = evaluate(nary_copy(Colour.B, 3))
        for b in (0, 1):
            (c,) = mix.row((b,))
            assert c.bool_out == (b, b, b)


class TestThickIte:
    def test_selects_ath_block(self):
        # brute-force selector over all guard vectors, true-first block order
        for p in (1, 2, 3, 4):
            for n in (1, 2) if p <= 3 else (1,):
                mix = evaluate(thick_ite(p, n))
                order = [v for v in itertools.product((1, 0), repeat=p)]
                for bits, comps in mix.table:
                    (c,) = comps
                    block = order.index(bits)
                    selector = [[1 if j == block * n + i else 0
                                 for j in range(2 ** p * n)]
                                for i in range(n)]
                    assert c.lin == Matrix.from_rows(selector, cols=2 ** p * n)
                    assert c.mean.is_zero() and c.gram().is_zero()

    def test_zero_width_payload(self):
        mix = evaluate(thick_ite(2, 0))
        assert mix.cod_word == type_of(thick_ite(2, 0))[1]
        for _, comps in mix.table:
            assert comps[0].weight == 1


class TestMatrixCircuit:
    def test_identity_is_dirac_at_input(self):
        mix = evaluate(matrix_circuit(Matrix.identity(2)))
        (c,) = mix.row(())
        assert c.lin == Matrix.identity(2)
        assert c.mean.is_zero() and c.gram().is_zero()

    def test_random_rational_matrices(self):
        rng = random.Random(6)
        for _ in range(40):
            n, m = rng.randint(0, 4), rng.randint(0, 4)
            a = Matrix.from_rows(
                [[Fraction(rng.randint(-4, 4), rng.randint(1, 4))
                  for _ in range(m)] for _ in range(n)], cols=m)
            mix = evaluate(matrix_circuit(a))
            (c,) = mix.row(())
            assert c.lin == a
            assert c.mean.is_zero() and c.gram().is_zero()
            assert c.weight == 1


class TestGaussianCircuit:
    def test_univariate_examples(self):
        (c,) = evaluate(gaussian_circuit([3], Matrix.from_rows([[1]]))).row(())
        assert (c.mean, c.gram()) == (Matrix.from_rows([[3]]),
                                      Matrix.from_rows([[1]]))
        (c,) = evaluate(gaussian_circuit([0], Matrix.from_rows([[2]]))).row(())
        assert (c.mean, c.gram()) == (Matrix.from_rows([[0]]),
                                      Matrix.from_rows([[4]]))

    def test_random_factors(self):
        rng = random.Random(14)
        for _ in range(25):
            n, k = rng.randint(0, 3), rng.randint(0, 3)
            mu = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
            factor = Matrix.from_rows(
                [[Fraction(rng.randint(-3, 3)) for _ in range(k)]
                 for _ in range(n)], cols=k)
            mix = evaluate(gaussian_circuit(mu, factor))
            (c,) = mix.row(())
            assert c.weight == 1
            assert c.mean == Matrix.column(mu)
            assert c.gram() == factor @ factor.transpose()
