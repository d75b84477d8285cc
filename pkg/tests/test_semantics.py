import itertools
import random
from fractions import Fraction

import pytest

from cgm.diagram import (Colour, Gen, GenKind, Generator, Id, Par, Seq, Swap,
                         TypeWord, bools, identity, mk_generator, par,
                         par_all, reals, seq)
from cgm.errors import InputCapExceeded, TypeMismatch
from cgm.gadgets import (convex_mix, discard_all, gaussian_circuit,
                         matrix_circuit, mix_gate, nary_copy, sort_boundary)
from cgm.linalg import CovFactor, Matrix
from cgm.randcircuit import BOOLEAN_KINDS, GAUSSIAN_KINDS, TermSampler
from cgm.semantics import (CGMixture, canonicalize, compose, evaluate,
                           interp_generator, max_deviation, mixture_is_exact,
                           is_trivial_kernel, mixtures_equal, moments, sample,
                           sample_many, tensor, with_sorted_words)


def gauss_map(a_rows, b_entries, factor_rows, m=None):
    """Single-component kernel x -> N(Ax + b, F F^T) built directly."""
    a = Matrix.from_rows(a_rows, cols=m)
    mean = Matrix.column(b_entries)
    fac = Matrix.from_rows(factor_rows, cols=0) if factor_rows is not None \
        else Matrix.zeros(a.rows, 0)
    from cgm.semantics import GaussComponent
    comp = GaussComponent(Fraction(1), (), a, mean, CovFactor.of(fac))
    return CGMixture(reals(a.cols), reals(a.rows), (((), (comp,)),))


class TestGeneratorTable:
    def test_std_normal(self):
        m = interp_generator(Generator(GenKind.STD_NORMAL))
        (c,) = m.row(())
        assert c.lin.cols == 0 and c.mean.is_zero()
        assert c.gram() == Matrix.from_rows([[1]])

    def test_and_gate(self):
        m = interp_generator(Generator(GenKind.AND))
        (c,) = m.row((1, 0))
        assert c.weight == 1 and c.bool_out == (0,)

    def test_ite_false_guard(self):
        m = interp_generator(Generator(GenKind.ITE))
        (c,) = m.row((0,))
        assert c.lin == Matrix.from_rows([[0, 1]])

    def test_flip(self):
        m = interp_generator(Generator(GenKind.FLIP, Fraction(3, 10)))
        weights = {c.bool_out: c.weight for c in m.row(())}
        assert weights == {(1,): Fraction(3, 10), (0,): Fraction(7, 10)}

    def test_add(self):
        m = interp_generator(Generator(GenKind.ADD))
        (c,) = m.row(())
        assert c.lin == Matrix.from_rows([[1, 1]]) and c.gram().is_zero()


class TestCompose:
    def test_affine_gaussian_closed_form(self):
        f = gauss_map([[2]], [1], [[1]])           # x -> N(2x+1, 1)
        g = gauss_map([[3]], [0], [[2]])           # y -> N(3y, 4)
        out = compose(f, g)
        (c,) = out.row(())
        assert c.lin == Matrix.from_rows([[6]])
        assert c.mean == Matrix.from_rows([[3]])
        assert c.gram() == Matrix.from_rows([[13]])

    def test_identity_is_neutral(self):
        f = evaluate(mix_gate(Fraction(1, 3)))
        from cgm.semantics import identity_kernel
        assert compose(f, identity_kernel(f.cod_word)).table == f.table

    def test_flip_then_not_matches_matrix_product(self):
        p = Fraction(2, 7)
        out = compose(interp_generator(Generator(GenKind.FLIP, p)),
                      interp_generator(Generator(GenKind.NOT)))
        # column-stochastic product: [[0,1],[1,0]] applied to (1-p, p)
        weights = {c.bool_out: c.weight for c in out.row(())}
        assert weights == {(0,): p, (1,): 1 - p}

    def test_type_mismatch(self):
        with pytest.raises(TypeMismatch):
            compose(interp_generator(Generator(GenKind.AND)),
                    interp_generator(Generator(GenKind.ADD)))


class TestTensor:
    def test_unit(self):
        f = evaluate(mix_gate(Fraction(1, 4)))
        from cgm.semantics import identity_kernel
        from cgm.diagram import EMPTY
        assert tensor(f, identity_kernel(EMPTY)).table == f.table

    def test_block_structure(self):
        g1 = gauss_map([[]], [3], [[1]], m=0)
        g2 = gauss_map([[]], [0], [[2]], m=0)
        out = tensor(g1, g2)
        (c,) = out.row(())
        assert c.mean == Matrix.column([3, 0])
        assert c.gram() == Matrix.from_rows([[1, 0], [0, 4]])

    def test_product_weights(self):
        p, q = Fraction(1, 3), Fraction(1, 5)
        out = tensor(interp_generator(Generator(GenKind.FLIP, p)),
                     interp_generator(Generator(GenKind.FLIP, q)))
        weights = {c.bool_out: c.weight for c in out.row(())}
        assert weights == {(1, 1): p * q, (1, 0): p * (1 - q),
                           (0, 1): (1 - p) * q, (0, 0): (1 - p) * (1 - q)}


class TestEvaluate:
    def test_worked_mixture(self):
        g1 = gaussian_circuit([3], Matrix.from_rows([[1]]))
        g2 = gaussian_circuit([0], Matrix.from_rows([[2]]))
        m = evaluate(convex_mix(Fraction(3, 10), g1, g2))
        comps = m.row(())
        assert [(c.weight, c.mean.entries[0], c.gram().entries[0])
                for c in comps] == [
            (Fraction(7, 10), Fraction(0), Fraction(4)),
            (Fraction(3, 10), Fraction(3), Fraction(1))]

    def test_cascade_weights(self):
        p1, p2 = Fraction(1, 2), Fraction(1, 3)
        q = p2 / (1 - p1)
        leaves = [gaussian_circuit([k], Matrix.from_rows([[1]])) for k in (1, 2, 3)]
        cascade = convex_mix(p1, leaves[0], convex_mix(q, leaves[1], leaves[2]))
        m = evaluate(cascade)
        weights = {c.mean.entries[0]: c.weight for c in m.row(())}
        assert weights == {Fraction(1): p1, Fraction(2): p2,
                           Fraction(3): 1 - p1 - p2}

    def test_input_cap(self):
        wide = identity(bools(13))
        with pytest.raises(InputCapExceeded):
            evaluate(wide)
        assert evaluate(wide, cap=13).p == 13

    def test_float_demotion(self):
        t = seq(mk_generator(GenKind.FLIP, 0.25), mk_generator(GenKind.NOT))
        m = evaluate(t)
        assert not mixture_is_exact(m)
        m2 = evaluate(t, backend="rational")
        assert mixture_is_exact(m2)

    def test_discard_everything_is_trivial(self):
        sampler = TermSampler(random.Random(23), max_word=3)
        for _ in range(40):
            t = sampler.closed_term()
            m = evaluate(seq(t, discard_all(t.cod)))
            assert is_trivial_kernel(m)

    def test_weights_normalized(self):
        sampler = TermSampler(random.Random(5), max_word=3)
        for _ in range(50):
            m = evaluate(sampler.closed_term())
            for _, comps in m.table:
                assert sum(c.weight for c in comps) == 1

    def test_functoriality_on_random_cuts(self):
        sampler = TermSampler(random.Random(31), max_word=3)
        for _ in range(40):
            mid = sampler.word()
            t1 = sampler.term(sampler.word(), mid)
            t2 = sampler.term(mid, sampler.word())
            lhs = evaluate(Seq(t1, t2))
            rhs = compose(evaluate(t1), evaluate(t2))
            assert mixtures_equal(lhs, rhs)
            u1, u2 = sampler.closed_term(max_len=2), sampler.closed_term(max_len=2)
            assert mixtures_equal(evaluate(Par(u1, u2)),
                                  tensor(evaluate(u1), evaluate(u2)))

    def test_sorted_words_match_syntactic_reordering(self):
        sampler = TermSampler(random.Random(77), max_word=4)
        for _ in range(40):
            t = sampler.closed_term()
            assert evaluate(sort_boundary(t)).table == \
                with_sorted_words(evaluate(t)).table


class TestBooleanOracle:
    def test_eval_matches_enumeration(self):
        from oracles import bool_table_oracle
        sampler = TermSampler(random.Random(101), kinds=BOOLEAN_KINDS,
                              max_word=4, max_depth=4)
        for _ in range(60):
            t = sampler.closed_term()
            mix = evaluate(t)
            want = bool_table_oracle(t)
            for bits, comps in mix.table:
                got = {c.bool_out: c.weight for c in comps}
                expect = {k: v for k, v in want[bits].items() if v != 0}
                assert got == expect


class TestGaussianOracle:
    def test_eval_matches_propagation(self):
        from oracles import affine_oracle
        sampler = TermSampler(random.Random(55), kinds=GAUSSIAN_KINDS,
                              max_word=4, max_depth=4)
        for _ in range(60):
            t = sampler.closed_term()
            mix = evaluate(t)
            (c,) = mix.row(())
            a, b, sigma = affine_oracle(t)
            assert (c.lin, c.mean, c.gram()) == (a, b, sigma)


class TestCanonicalize:
    def _mix(self, comps):
        from cgm.semantics import GaussComponent
        parts = tuple(
            GaussComponent(w, (), Matrix.zeros(1, 0), Matrix.column([mu]),
                           CovFactor.of(Matrix.from_rows([[s]])))
            for w, mu, s in comps)
        return CGMixture(TypeWord(), reals(1), (((), parts),))

    def test_merges_duplicates(self):
        m = canonicalize(self._mix([(Fraction(1, 2), 0, 1),
                                    (Fraction(1, 2), 0, 1)]))
        (c,) = m.row(())
        assert c.weight == 1

    def test_sort_order(self):
        m = canonicalize(self._mix([(Fraction(3, 10), 3, 1),
                                    (Fraction(7, 10), 0, 2)]))
        first, second = m.row(())
        assert first.mean.entries[0] == 0   # N(0,4) sorts before N(3,1)
        assert second.mean.entries[0] == 3

    def test_drops_zero_weights(self):
        m = canonicalize(self._mix([(Fraction(0), 5, 1), (Fraction(1), 0, 1)]))
        assert len(m.row(())) == 1

    def test_idempotent(self):
        sampler = TermSampler(random.Random(13), max_word=3)
        for _ in range(30):
            m = evaluate(sampler.closed_term())
            once = canonicalize(m)
            assert canonicalize(once).table == once.table


class TestEquality:
    def test_tolerance(self):
        a = gauss_map([[]], [0], [[1.0]], m=0)
        b = gauss_map([[]], [0], [[1.00005]], m=0)
        assert not mixtures_equal(a, b, tol=1e-9)
        assert mixtures_equal(a, b, tol=1e-3)

    def test_component_order_irrelevant(self):
        from cgm.semantics import GaussComponent
        def build(order):
            parts = tuple(
                GaussComponent(w, (), Matrix.zeros(1, 0), Matrix.column([mu]),
                               CovFactor.of(Matrix.from_rows([[1]])))
                for w, mu in order)
            return CGMixture(TypeWord(), reals(1), (((), parts),))
        one = build([(Fraction(1, 3), 0), (Fraction(2, 3), 5)])
        other = build([(Fraction(2, 3), 5), (Fraction(1, 3), 0)])
        assert mixtures_equal(one, other)

    def test_word_mismatch(self):
        with pytest.raises(TypeMismatch):
            mixtures_equal(evaluate(identity(reals(1))),
                           evaluate(identity(bools(1))))


class TestMomentsAndSampling:
    def _example(self):
        g1 = gaussian_circuit([3], Matrix.from_rows([[1]]))
        g2 = gaussian_circuit([0], Matrix.from_rows([[2]]))
        return evaluate(convex_mix(Fraction(3, 10), g1, g2))

    def test_law_of_total_variance(self):
        stats = moments(self._example())
        assert stats.mean == Matrix.from_rows([[Fraction(9, 10)]])
        assert stats.cov == Matrix.from_rows([[Fraction(499, 100)]])

    def test_sure_flip(self):
        m = evaluate(mk_generator(GenKind.FLIP, Fraction(1)))
        for seed in range(5):
            bits, _ = sample(m, (), (), seed)
            assert bits == (1,)

    def test_seeded_reproducibility(self):
        m = self._example()
        a = sample_many(m, (), (), 50, seed=9)
        b = sample_many(m, (), (), 50, seed=9)
        assert a[0] == b[0] and (a[1] == b[1]).all()

    def test_empirical_mean_close(self):
        m = self._example()
        stats = moments(m)
        _, xs = sample_many(m, (), (), 20000, seed=3)
        want = float(stats.mean.entries[0])
        se = (float(stats.cov.entries[0]) / 20000) ** 0.5
        assert abs(xs.mean() - want) < 5 * se
