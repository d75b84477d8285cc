"""Compositional semantics: circuits denote conditional Gaussian mixtures.

A kernel is stored as a table indexed by the Boolean input assignment; each
entry is a list of weighted components carrying a Boolean output vector and
an affine-Gaussian part (A, mu, factored covariance).  Boundary words may
interleave colours arbitrarily: the table always works in the canonical
layout where bits and reals are listed in word order, so kernels on equal
words compare directly.

Composition and monoidal product follow the closed forms for affine maps
(mean ``CAx + Cb + d``, covariance ``C Sigma C^T + Theta``, block diagonals
for the product) with weights multiplying through.  Everything is exact
when every literal is rational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
import numpy as np

from .diagram import (Colour, Gen, GenKind, Generator, Id, Seq, Swap,
                      Term, TypeWord, has_float_literal, to_exact_params,
                      to_float_params)
from .errors import DimensionMismatch, InputCapExceeded, TypeMismatch
from .linalg import (CovFactor, Matrix, Scalar, block_diag, cov_block,
                     cov_compose, matrix_to_json, quantize_key,
                     scalar_to_json, vstack)

BitVec = tuple

DEFAULT_TOLERANCE = 1e-9
DEFAULT_BOOL_CAP = 12


def all_bitvecs(p: int) -> list:
    return [tuple(bits) for bits in itertools.product((0, 1), repeat=p)]


def bits_to_str(bits: BitVec) -> str:
    return "".join(str(b) for b in bits)


def str_to_bits(text: str) -> BitVec:
    if any(ch not in "01" for ch in text):
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class GaussComponent:
    weight: Scalar
    bool_out: BitVec
    lin: Matrix            # n x m
    mean: Matrix           # n x 1
    cov: CovFactor         # n-dimensional

    def gram(self) -> Matrix:
        return self.cov.gram()


@dataclass(frozen=True)
class CGMixture:
    dom_word: TypeWord
    cod_word: TypeWord
    table: tuple   # sorted tuple of (bits, tuple-of-components)

    def __post_init__(self):
        object.__setattr__(self, "_rows", dict(self.table))

    @property
    def p(self) -> int:
        return self.dom_word.n_bool

    @property
    def m(self) -> int:
        return self.dom_word.n_real

    @property
    def q(self) -> int:
        return self.cod_word.n_bool

    @property
    def n(self) -> int:
        return self.cod_word.n_real

    def row(self, bits: BitVec) -> tuple:
        return self._rows[tuple(bits)]


def _mk_table(rows: dict) -> tuple:
    return tuple(sorted(rows.items()))


def _component(weight, bool_out, lin, mean, cov) -> GaussComponent:
    if mean.cols != 1 or mean.rows != lin.rows or cov.dim != lin.rows:
        raise DimensionMismatch("inconsistent component dimensions")
    return GaussComponent(weight, tuple(bool_out), lin, mean, cov)


def _dirac(bool_out, lin: Matrix) -> GaussComponent:
    n = lin.rows
    return _component(Fraction(1), bool_out, lin, Matrix.zeros(n, 1),
                      CovFactor.zero(n))


def interp_generator(gen: Generator) -> CGMixture:
    kind, param = gen.kind, gen.param
    dom, cod = gen.dom, gen.cod
    rows = {}
    if kind is GenKind.FLIP:
        rows[()] = (_component(param, (1,), Matrix.zeros(0, 0),
                               Matrix.zeros(0, 1), CovFactor.zero(0)),
                    _component(1 - param, (0,), Matrix.zeros(0, 0),
                               Matrix.zeros(0, 1), CovFactor.zero(0)))
    elif kind is GenKind.BOOL_DISCARD:
        for b in (0, 1):
            rows[(b,)] = (_dirac((), Matrix.zeros(0, 0)),)
    elif kind is GenKind.BOOL_COPY:
        for b in (0, 1):
            rows[(b,)] = (_dirac((b, b), Matrix.zeros(0, 0)),)
    elif kind is GenKind.AND:
        for b1, b2 in all_bitvecs(2):
            rows[(b1, b2)] = (_dirac((b1 & b2,), Matrix.zeros(0, 0)),)
    elif kind is GenKind.NOT:
        for b in (0, 1):
            rows[(b,)] = (_dirac((1 - b,), Matrix.zeros(0, 0)),)
    elif kind is GenKind.STD_NORMAL:
        rows[()] = (_component(Fraction(1), (), Matrix.zeros(1, 0),
                               Matrix.zeros(1, 1), CovFactor.of(Matrix.identity(1))),)
    elif kind is GenKind.REAL_DISCARD:
        rows[()] = (_dirac((), Matrix.zeros(0, 1)),)
    elif kind is GenKind.REAL_COPY:
        rows[()] = (_dirac((), Matrix.from_rows([[1], [1]])),)
    elif kind is GenKind.ZERO:
        rows[()] = (_dirac((), Matrix.zeros(1, 0)),)
    elif kind is GenKind.ADD:
        rows[()] = (_dirac((), Matrix.from_rows([[1, 1]])),)
    elif kind is GenKind.SCALAR:
        rows[()] = (_dirac((), Matrix.from_rows([[param]])),)
    elif kind is GenKind.ONE:
        rows[()] = (_component(Fraction(1), (), Matrix.zeros(1, 0),
                               Matrix.from_rows([[1]]), CovFactor.zero(1)),)
    elif kind is GenKind.ITE:
        rows[(1,)] = (_dirac((), Matrix.from_rows([[1, 0]])),)
        rows[(0,)] = (_dirac((), Matrix.from_rows([[0, 1]])),)
    else:  # pragma: no cover
        raise AssertionError(kind)
    return CGMixture(dom, cod, _mk_table(rows))


def identity_kernel(word: TypeWord) -> CGMixture:
    m = word.n_real
    rows = {bits: (_dirac(bits, Matrix.identity(m)),)
            for bits in all_bitvecs(word.n_bool)}
    return CGMixture(word, word, _mk_table(rows))


def swap_kernel(first: Colour, second: Colour) -> CGMixture:
    dom = TypeWord((first, second))
    cod = TypeWord((second, first))
    rows = {}
    if (first, second) == (Colour.B, Colour.B):
        for bits in all_bitvecs(2):
            rows[bits] = (_dirac((bits[1], bits[0]), Matrix.zeros(0, 0)),)
    elif (first, second) == (Colour.R, Colour.R):
        rows[()] = (_dirac((), Matrix.from_rows([[0, 1], [1, 0]])),)
    else:
        for b in (0, 1):
            rows[(b,)] = (_dirac((b,), Matrix.identity(1)),)
    return CGMixture(dom, cod, _mk_table(rows))


def mixture_is_exact(mix: CGMixture) -> bool:
    for _, comps in mix.table:
        for c in comps:
            if not isinstance(c.weight, Fraction):
                return False
            for mat in (c.lin, c.mean, c.cov.factor):
                if not all(isinstance(x, Fraction) for x in mat.entries):
                    return False
    return True


def _comp_key(c: GaussComponent, gram: Matrix, exact: bool):
    if exact:
        return (c.bool_out, c.lin.entries, c.mean.entries, gram.entries)
    return (c.bool_out,
            tuple(quantize_key(x) for x in c.lin.entries),
            tuple(quantize_key(x) for x in c.mean.entries),
            tuple(quantize_key(x) for x in gram.entries))


def _params_close(a: GaussComponent, ga: Matrix, b: GaussComponent,
                  gb: Matrix, tol) -> bool:
    if a.bool_out != b.bool_out:
        return False
    for ma, mb in ((a.lin, b.lin), (a.mean, b.mean), (ga, gb)):
        if any(abs(x - y) > tol for x, y in zip(ma.entries, mb.entries)):
            return False
    return True


def canonicalize(mix: CGMixture, tol: float = DEFAULT_TOLERANCE) -> CGMixture:
    """Drop zero weights, merge equal components, sort by the canonical key.

    Idempotent; exact mixtures merge and sort on exact keys, anything with
    a float uses tolerance-quantized keys so the order is reproducible.
    """
    exact = mixture_is_exact(mix)
    merge_tol = 0 if exact else tol
    rows = {}
    for bits, comps in mix.table:
        keyed = []
        for c in comps:
            if c.weight == 0:
                continue
            g = c.gram()
            keyed.append((_comp_key(c, g, exact), g, c))
        keyed.sort(key=lambda item: item[0])
        merged = []
        for key, g, c in keyed:
            if merged and _params_close(merged[-1][1], merged[-1][0], c, g, merge_tol):
                prev_g, prev = merged[-1]
                merged[-1] = (prev_g, replace(prev, weight=prev.weight + c.weight))
            else:
                merged.append((g, c))
        rows[bits] = tuple(c for _, c in merged)
    return CGMixture(mix.dom_word, mix.cod_word, _mk_table(rows))


def compose(f: CGMixture, g: CGMixture, tol: float = DEFAULT_TOLERANCE) -> CGMixture:
    """Sequential composition of kernels; result is canonical."""
    if f.cod_word != g.dom_word:
        raise TypeMismatch(
            f"compose: {f.cod_word} does not match {g.dom_word}",
            expected=f.cod_word, actual=g.dom_word)
    rows = {}
    for bits, comps in f.table:
        out = []
        for ci in comps:
            for cj in g.row(ci.bool_out):
                w = ci.weight * cj.weight
                if w == 0:
                    continue
                out.append(_component(
                    w, cj.bool_out,
                    cj.lin @ ci.lin,
                    cj.lin @ ci.mean + cj.mean,
                    cov_compose(cj.lin, ci.cov, cj.cov)))
        rows[bits] = tuple(out)
    raw = CGMixture(f.dom_word, g.cod_word, _mk_table(rows))
    return canonicalize(raw, tol)


def tensor(f: CGMixture, g: CGMixture, tol: float = DEFAULT_TOLERANCE) -> CGMixture:
    """Monoidal product of kernels; result is canonical."""
    rows = {}
    for bits_f, comps_f in f.table:
        for bits_g, comps_g in g.table:
            out = []
            for ci in comps_f:
                for cj in comps_g:
                    w = ci.weight * cj.weight
                    if w == 0:
                        continue
                    out.append(_component(
                        w, ci.bool_out + cj.bool_out,
                        block_diag(ci.lin, cj.lin),
                        vstack(ci.mean, cj.mean),
                        cov_block(ci.cov, cj.cov)))
            rows[bits_f + bits_g] = tuple(out)
    raw = CGMixture(f.dom_word + g.dom_word, f.cod_word + g.cod_word,
                    _mk_table(rows))
    return canonicalize(raw, tol)


def evaluate(term: Term, cap: int = DEFAULT_BOOL_CAP,
             tol: float = DEFAULT_TOLERANCE, backend: str = "auto") -> CGMixture:
    """Denotation of a term, canonical.

    Backends: 'auto' evaluates exactly unless some literal is a float, in
    which case the whole evaluation is demoted to floats; 'rational' and
    'float' force one side.
    """
    if backend == "rational":
        term = to_exact_params(term)
    elif backend == "float":
        term = to_float_params(term)
    elif backend == "auto":
        if has_float_literal(term):
            term = to_float_params(term)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if term.dom.n_bool > cap:
        raise InputCapExceeded(
            f"{term.dom.n_bool} Boolean inputs exceed the cap of {cap}")
    memo = {}

    def ev(t: Term) -> CGMixture:
        hit = memo.get(id(t))
        if hit is not None:
            return hit
        if isinstance(t, Gen):
            out = canonicalize(interp_generator(t.generator), tol)
        elif isinstance(t, Id):
            out = identity_kernel(t.word)
        elif isinstance(t, Swap):
            out = swap_kernel(t.first, t.second)
        elif isinstance(t, Seq):
            out = compose(ev(t.early), ev(t.late), tol)
        else:
            out = tensor(ev(t.top), ev(t.bottom), tol)
        memo[id(t)] = out
        return out

    return ev(term)


def mixtures_equal(m1: CGMixture, m2: CGMixture,
                   tol: float = DEFAULT_TOLERANCE) -> bool:
    """Equality of denotations via canonical forms."""
    if m1.dom_word != m2.dom_word or m1.cod_word != m2.cod_word:
        raise TypeMismatch("mixtures on different boundary words",
                           expected=(m1.dom_word, m1.cod_word),
                           actual=(m2.dom_word, m2.cod_word))
    c1 = canonicalize(m1, tol)
    c2 = canonicalize(m2, tol)
    exact = mixture_is_exact(c1) and mixture_is_exact(c2)
    eps = 0 if exact else tol
    for (b1, comps1), (b2, comps2) in zip(c1.table, c2.table):
        if b1 != b2 or len(comps1) != len(comps2):
            return False
        for a, b in zip(comps1, comps2):
            if a.bool_out != b.bool_out or abs(a.weight - b.weight) > eps:
                return False
            for ma, mb in ((a.lin, b.lin), (a.mean, b.mean),
                           (a.gram(), b.gram())):
                if any(abs(x - y) > eps for x, y in zip(ma.entries, mb.entries)):
                    return False
    return True


def max_deviation(m1: CGMixture, m2: CGMixture,
                  tol: float = DEFAULT_TOLERANCE) -> float:
    """Largest parameter gap between the canonical forms; inf on shape mismatch."""
    c1 = canonicalize(m1, tol)
    c2 = canonicalize(m2, tol)
    worst = 0.0
    for (b1, comps1), (b2, comps2) in zip(c1.table, c2.table):
        if b1 != b2 or len(comps1) != len(comps2):
            return float("inf")
        for a, b in zip(comps1, comps2):
            if a.bool_out != b.bool_out:
                return float("inf")
            worst = max(worst, abs(float(a.weight) - float(b.weight)))
            for ma, mb in ((a.lin, b.lin), (a.mean, b.mean),
                           (a.gram(), b.gram())):
                for x, y in zip(ma.entries, mb.entries):
                    worst = max(worst, abs(float(x) - float(y)))
    return worst


@dataclass(frozen=True)
class Moments:
    bool_marginal: tuple   # sorted ((bits, weight), ...)
    mean: Matrix           # n x 1
    cov: Matrix            # n x n

    def marginal_of(self, bits: BitVec) -> Scalar:
        for b, w in self.bool_marginal:
            if b == tuple(bits):
                return w
        return Fraction(0)


def moments(mix: CGMixture, bits: BitVec = (), xs=()) -> Moments:
    """Exact Boolean marginal and real mean/covariance at one input point."""
    x = xs if isinstance(xs, Matrix) else Matrix.column(xs)
    if x.rows != mix.m:
        raise DimensionMismatch(f"input has {x.rows} reals, kernel wants {mix.m}")
    if len(bits) != mix.p:
        raise DimensionMismatch(f"input has {len(bits)} bits, kernel wants {mix.p}")
    comps = mix.row(tuple(bits))
    marg = {}
    n = mix.n
    mean = Matrix.zeros(n, 1)
    for c in comps:
        marg[c.bool_out] = marg.get(c.bool_out, Fraction(0)) + c.weight
        centre = c.lin @ x + c.mean
        mean = mean + centre.scale(c.weight)
    cov = Matrix.zeros(n, n)
    for c in comps:
        centre = c.lin @ x + c.mean
        dev = centre - mean
        cov = cov + (c.gram() + dev @ dev.transpose()).scale(c.weight)
    return Moments(tuple(sorted(marg.items())), mean, cov)


def sample_many(mix: CGMixture, bits: BitVec, xs, count: int, seed: int):
    """`count` seeded draws; returns (list of Boolean outputs, (count, n) array)."""
    x = xs if isinstance(xs, Matrix) else Matrix.column(xs)
    if x.rows != mix.m:
        raise DimensionMismatch(f"input has {x.rows} reals, kernel wants {mix.m}")
    if len(bits) != mix.p:
        raise DimensionMismatch(f"input has {len(bits)} bits, kernel wants {mix.p}")
    comps = mix.row(tuple(bits))
    rng = np.random.default_rng(seed)
    weights = np.array([float(c.weight) for c in comps])
    weights = weights / weights.sum()
    idx = rng.choice(len(comps), size=count, p=weights)
    reals_out = np.zeros((count, mix.n))
    bools_out = [None] * count
    xf = np.array([float(v) for v in x.entries])
    for ci, c in enumerate(comps):
        where = np.nonzero(idx == ci)[0]
        k = c.cov.width
        z = rng.standard_normal((len(where), k))
        lin = np.array([[float(v) for v in c.lin.row(i)] for i in range(c.lin.rows)]) \
            if c.lin.rows else np.zeros((0, c.lin.cols))
        fac = np.array([[float(v) for v in c.cov.factor.row(i)]
                        for i in range(c.cov.factor.rows)]) \
            if c.cov.factor.rows else np.zeros((0, k))
        mu = np.array([float(v) for v in c.mean.entries])
        base = lin @ xf + mu if c.lin.cols else mu
        vals = base[None, :] + (z @ fac.T if k else np.zeros((len(where), mix.n)))
        reals_out[where] = vals
        for w in where:
            bools_out[w] = c.bool_out
    return bools_out, reals_out


def sample(mix: CGMixture, bits: BitVec, xs, seed: int):
    """One seeded draw: (Boolean output vector, real output vector)."""
    bools_out, reals_out = sample_many(mix, bits, xs, 1, seed)
    return bools_out[0], reals_out[0]


def mixture_to_json(mix: CGMixture) -> dict:
    table = []
    for bits, comps in mix.table:
        table.append({
            "input": bits_to_str(bits),
            "components": [{
                "weight": scalar_to_json(c.weight),
                "boolOut": bits_to_str(c.bool_out),
                "A": matrix_to_json(c.lin),
                "mu": matrix_to_json(c.mean),
                "cov": matrix_to_json(c.gram()),
            } for c in comps],
        })
    return {"inWord": str(mix.dom_word), "outWord": str(mix.cod_word),
            "table": table}


def with_sorted_words(mix: CGMixture) -> CGMixture:
    """The same kernel on Boolean-first boundary words.

    Moving every B wire in front of the R wires (preserving the relative
    order within each colour) does not touch the table: bits and reals are
    already stored separately in word order.
    """
    from .diagram import bools, reals
    dom = bools(mix.p) + reals(mix.m)
    cod = bools(mix.q) + reals(mix.n)
    return CGMixture(dom, cod, mix.table)


def is_trivial_kernel(mix: CGMixture) -> bool:
    """True for the weight-1 kernel into the unit object."""
    if len(mix.cod_word) != 0:
        return False
    for _, comps in mix.table:
        if len(comps) != 1 or comps[0].weight != 1:
            return False
    return True
