"""Derived circuits: wire permutations, fanout copies, thick conditionals,
and the standard encodings of matrices and Gaussians as circuits.

Bracketing conventions are fixed once and for all: combs associate to the
right, guard order follows wire order (leftmost guard is tested first), and
the true branch always comes first.  Builders are cached, so repeated
gadgets are shared subterms and evaluation memoization kicks in.
"""

from __future__ import annotations

from functools import lru_cache

from .diagram import (B, EMPTY, Colour, GenKind, Id, Term, TypeWord, bools,
                      identity, mk_generator, par, par_all, reals, seq,
                      seq_all, swap)
from .errors import DimensionMismatch
from .linalg import Matrix, hstack


def _gen(kind, param=None):
    return mk_generator(kind, param)


def seq_trim(*terms: Term) -> Term:
    """Sequential composition that drops identity stages."""
    kept = [t for t in terms if not isinstance(t, Id)]
    if not kept:
        return terms[0]
    return seq_all(*kept)


def par_trim(*terms: Term) -> Term:
    """Parallel composition that fuses neighbouring identity wires."""
    parts = []
    for t in terms:
        if isinstance(t, Id) and parts and isinstance(parts[-1], Id):
            parts[-1] = identity(parts[-1].word + t.word)
        elif isinstance(t, Id) and len(t.word) == 0:
            continue
        else:
            parts.append(t)
    if not parts:
        return identity(EMPTY)
    if len(parts) == 1:
        return parts[0]
    return par_all(*parts)


@lru_cache(maxsize=None)
def permute_term(word: TypeWord, dest: tuple) -> Term:
    """Wiring that sends input position i to output position dest[i].

    Built as layers of disjoint adjacent crossings (a bubble-sort network),
    which makes the result a deterministic function of (word, dest).
    """
    n = len(word)
    if sorted(dest) != list(range(n)):
        raise ValueError(f"not a permutation of {n} wires: {dest}")
    cur = list(range(n))
    terms = []
    while True:
        swaps = set()
        k = 0
        while k < n - 1:
            if dest[cur[k]] > dest[cur[k + 1]]:
                swaps.add(k)
                k += 2
            else:
                k += 1
        if not swaps:
            break
        parts = []
        run = []
        k = 0
        while k < n:
            if k in swaps:
                if run:
                    parts.append(identity(TypeWord(tuple(run))))
                    run = []
                parts.append(swap(word[cur[k]], word[cur[k + 1]]))
                cur[k], cur[k + 1] = cur[k + 1], cur[k]
                k += 2
            else:
                run.append(word[cur[k]])
                k += 1
        if run:
            parts.append(identity(TypeWord(tuple(run))))
        terms.append(par_all(*parts))
    if not terms:
        return identity(word)
    return seq_all(*terms)


@lru_cache(maxsize=None)
def nary_copy(colour: Colour, n: int) -> Term:
    """Fanout-n copy of one wire, as a right-associated comb; n = 0 discards."""
    if n < 0:
        raise ValueError("negative fanout")
    one_wire = TypeWord((colour,))
    copy_kind = GenKind.BOOL_COPY if colour is Colour.B else GenKind.REAL_COPY
    del_kind = GenKind.BOOL_DISCARD if colour is Colour.B else GenKind.REAL_DISCARD
    if n == 0:
        return _gen(del_kind)
    if n == 1:
        return identity(one_wire)
    return seq_trim(_gen(copy_kind),
                    par_trim(identity(one_wire), nary_copy(colour, n - 1)))


@lru_cache(maxsize=None)
def discard_all(word: TypeWord) -> Term:
    if len(word) == 0:
        return identity(EMPTY)
    return par_all(*(nary_copy(c, 0) for c in word))


@lru_cache(maxsize=None)
def copy_bundle(word: TypeWord) -> Term:
    """Copy every wire of `word`, then separate: word -> word . word."""
    n = len(word)
    if n == 0:
        return identity(EMPTY)
    copies = par_all(*(nary_copy(c, 2) for c in word))
    doubled = TypeWord(tuple(c for c in word for _ in range(2)))
    dest = []
    for i in range(n):
        dest.extend((i, n + i))
    return seq(copies, permute_term(doubled, tuple(dest)))


@lru_cache(maxsize=None)
def add_n(n: int) -> Term:
    """Sum of n real wires, right-associated; n = 0 is the constant 0."""
    if n < 0:
        raise ValueError("negative arity")
    if n == 0:
        return _gen(GenKind.ZERO)
    if n == 1:
        return identity(reals(1))
    return seq_trim(par_trim(identity(reals(1)), add_n(n - 1)), _gen(GenKind.ADD))


@lru_cache(maxsize=None)
def ite_n(n: int) -> Term:
    """n if-then-else gates sharing one copied guard: B.R^n.R^n -> R^n."""
    if n < 0:
        raise ValueError("negative width")
    if n == 0:
        return _gen(GenKind.BOOL_DISCARD)
    if n == 1:
        return _gen(GenKind.ITE)
    word = B + reals(2 * n)
    spread = seq(par(_gen(GenKind.BOOL_COPY), identity(reals(2 * n))),
                 permute_term(B + B + reals(2 * n), _ite_split_dest(n)))
    return seq(spread, par(_gen(GenKind.ITE), ite_n(n - 1)))


def _ite_split_dest(n: int) -> tuple:
    # [b1 b2 x1..xn y1..yn] -> [b1 x1 y1 b2 x2..xn y2..yn]
    dest = [0, 3]
    dest.append(1)                      # x1
    dest.extend(i + 2 for i in range(2, n + 1))   # x2..xn
    dest.append(2)                      # y1
    dest.extend(n + i + 1 for i in range(2, n + 1))  # y2..yn
    return tuple(dest)


@lru_cache(maxsize=None)
def thick_ite(guards: int, payload_width: int) -> Term:
    """Nested conditionals dispatching on `guards` Boolean wires.

    Type B^p . R^(2^p * n) -> R^n; the payload block selected for a guard
    vector is the one at its position in the true-first enumeration.
    """
    p, n = guards, payload_width
    if p < 1:
        raise ValueError("need at least one guard")
    if n == 0:
        return discard_all(bools(p))
    if p == 1:
        return ite_n(n)
    half = (2 ** (p - 1)) * n
    start = par_all(identity(B), copy_bundle(bools(p - 1)), identity(reals(2 * half)))
    # [g1, g2..gp, g2'..gp', payload] -> [g1, g2..gp, first half, g2'..gp', second half]
    width = 1 + 2 * (p - 1) + 2 * half
    dest = [0]
    dest.extend(range(1, p))                                  # g2..gp stay
    dest.extend(range(p + half, p + half + p - 1))            # g2'..gp'
    dest.extend(range(p, p + half))                           # first half payload
    dest.extend(range(2 * p - 1 + half, 2 * p - 1 + 2 * half))  # second half stays
    word = B + bools(2 * (p - 1)) + reals(2 * half)
    assert len(word) == width
    route = permute_term(word, tuple(dest))
    sub = thick_ite(p - 1, n)
    return seq_all(start, route, par_all(identity(B), sub, sub), ite_n(n))


@lru_cache(maxsize=None)
def matrix_circuit(a: Matrix) -> Term:
    """Affine wiring with semantics x |-> Dirac(Ax).

    Inputs are the columns of A, outputs its rows; coefficient 0 means no
    wire, coefficient 1 a plain wire, anything else a scalar gate.
    """
    n, m = a.rows, a.cols
    col_uses = [[i for i in range(n) if a.at(i, j) != 0] for j in range(m)]
    row_uses = [[j for j in range(m) if a.at(i, j) != 0] for i in range(n)]
    fan = par_trim(*(nary_copy(Colour.R, len(us)) for us in col_uses)) \
        if m else identity(EMPTY)
    col_major = [(j, i) for j in range(m) for i in col_uses[j]]
    scales = []
    for j, i in col_major:
        coeff = a.at(i, j)
        scales.append(identity(reals(1)) if coeff == 1 else _gen(GenKind.SCALAR, coeff))
    scale_layer = par_trim(*scales) if col_major else identity(EMPTY)
    row_major = [(j, i) for i in range(n) for j in row_uses[i]]
    dest = tuple(row_major.index(pos) for pos in col_major)
    route = permute_term(reals(len(col_major)), dest)
    sums = par_trim(*(add_n(len(us)) for us in row_uses)) if n else identity(EMPTY)
    if n == 0:
        return fan if m else identity(EMPTY)
    return seq_trim(fan, scale_layer, route, sums)


def gaussian_circuit(mu, factor: Matrix) -> Term:
    """Closed circuit with semantics N(mu, factor . factor^T)."""
    mu_col = mu if isinstance(mu, Matrix) else Matrix.column(mu)
    if mu_col.cols != 1 or mu_col.rows != factor.rows:
        raise DimensionMismatch(
            f"mean is {mu_col.rows}x{mu_col.cols}, factor has {factor.rows} rows")
    k = factor.cols
    sources = [_gen(GenKind.STD_NORMAL)] * k
    coeffs = factor
    if not mu_col.is_zero():
        sources.append(_gen(GenKind.ONE))
        coeffs = hstack(factor, mu_col)
    return seq(par_all(*sources), matrix_circuit(coeffs))


def gauss_map_circuit(a: Matrix, mu, factor: Matrix) -> Term:
    """Open Gaussian map x |-> N(Ax + mu, factor . factor^T) : R^m -> R^n."""
    mu_col = mu if isinstance(mu, Matrix) else Matrix.column(mu)
    if factor.rows != a.rows or mu_col.rows != a.rows:
        raise DimensionMismatch("inconsistent Gaussian map dimensions")
    if factor.cols == 0 and mu_col.is_zero():
        return matrix_circuit(a)
    n, m = a.rows, a.cols
    noise = gaussian_circuit(mu_col, factor)
    if m == 0:
        return noise
    pair = par(matrix_circuit(a), noise)
    dest = tuple(2 * i for i in range(n)) + tuple(2 * i + 1 for i in range(n))
    riffle = permute_term(reals(2 * n), dest)
    adds = par_all(*(_gen(GenKind.ADD) for _ in range(n))) if n else identity(EMPTY)
    return seq_trim(pair, riffle, adds)


def _sorted_positions(word: TypeWord) -> tuple:
    return word.bool_positions() + word.real_positions()


def sort_boundary(t: Term) -> Term:
    """Pre/post-compose with crossings so both boundaries read B's first."""
    dom_sorted = _sorted_positions(t.dom)
    cod_sorted = _sorted_positions(t.cod)
    out = t
    if dom_sorted != tuple(range(len(t.dom))):
        sorted_dom = TypeWord(tuple(t.dom[i] for i in dom_sorted))
        pre = permute_term(sorted_dom, dom_sorted)
        out = seq(pre, out)
    if cod_sorted != tuple(range(len(t.cod))):
        dest = tuple(cod_sorted.index(i) for i in range(len(t.cod)))
        post = permute_term(t.cod, dest)
        out = seq(out, post)
    return out


def mix_gate(bias) -> Term:
    """Convex sum of two real wires: bias picks the first one."""
    return seq(par(_gen(GenKind.FLIP, bias), identity(reals(2))), _gen(GenKind.ITE))


def convex_mix(bias, first: Term, second: Term) -> Term:
    """Convex combination of two circuits R^m -> R^n sharing their input."""
    if first.dom != second.dom or first.cod != second.cod:
        raise DimensionMismatch("convex_mix needs equal boundaries")
    m, n = first.dom.n_real, first.cod.n_real
    if len(first.dom) != m or len(first.cod) != n:
        raise DimensionMismatch("convex_mix branches must be all-real")
    body = seq(copy_bundle(reals(m)), par(first, second)) if m \
        else par(first, second)
    return seq(par(_gen(GenKind.FLIP, bias), body), ite_n(n))
