"""Canonical normal forms and the equivalence decision procedure.

A kernel disintegrates into a Boolean marginal plus, for every pair of
Boolean output/input assignments, a convex cell of affine-Gaussian
components; zero-mass branches get a designated Dirac-at-zero cell so the
certificate is unique.  The certificate (`NFTree`) stores covariances as
Gram matrices, which are canonical; the emitted circuit is a deterministic
function of the certificate, so certificate equality and emitted-circuit
equality coincide.

Emission is exact under the rational backend: each positive LDL^T pivot d
is split into at most four rational squares (Lagrange), one scaled Gaussian
source per square, so the synthesized covariance reproduces the Gram
matrix with no floating square roots.  Under the float backend a single
sqrt(d)-scaled source per pivot is used instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .diagram import (GenKind, Term, bools, identity, mk_generator, par,
                      par_all, reals, seq, seq_all)
from .errors import TypeMismatch
from .gadgets import (convex_mix, copy_bundle, discard_all, gauss_map_circuit,
                      ite_n, permute_term)
from .linalg import (Matrix, Scalar, hstack, ldlt, matrix_to_json,
                     scalar_to_json, sum_square_scales)
from .semantics import (CGMixture, DEFAULT_BOOL_CAP, DEFAULT_TOLERANCE,
                        all_bitvecs, bits_to_str, canonicalize, evaluate)


@dataclass(frozen=True)
class BoolKernel:
    """Stochastic table B^p -> B^q; rows sum to one, zero entries dropped."""

    p: int
    q: int
    rows: tuple   # sorted ((bits_in, ((bits_out, weight), ...)), ...)

    def __post_init__(self):
        object.__setattr__(self, "_rows", {k: dict(v) for k, v in self.rows})

    def prob(self, bits_out, bits_in) -> Scalar:
        return self._rows[tuple(bits_in)].get(tuple(bits_out), Fraction(0))

    def row(self, bits_in) -> dict:
        return self._rows[tuple(bits_in)]

    def is_identity(self) -> bool:
        if self.p != self.q:
            return False
        return all(row == {bits: 1} for bits, row in self._rows.items())


def make_bool_kernel(p: int, q: int, table: dict) -> BoolKernel:
    rows = []
    for bits_in in all_bitvecs(p):
        row = table.get(bits_in, {})
        kept = tuple(sorted((out, w) for out, w in row.items() if w != 0))
        rows.append((bits_in, kept))
    return BoolKernel(p, q, tuple(rows))


@dataclass(frozen=True)
class CellComponent:
    weight: Scalar
    lin: Matrix    # n x m
    mean: Matrix   # n x 1
    cov: Matrix    # n x n Gram matrix (canonical, PSD)


@dataclass(frozen=True)
class CNFCell:
    components: tuple

    @property
    def singleton(self) -> bool:
        return len(self.components) == 1


def zero_cell(n: int, m: int) -> CNFCell:
    return CNFCell((CellComponent(Fraction(1), Matrix.zeros(n, m),
                                  Matrix.zeros(n, 1), Matrix.zeros(n, n)),))


@dataclass(frozen=True)
class NFTree:
    """Canonical certificate: Boolean marginal plus guarded convex cells."""

    p: int
    m: int
    q: int
    n: int
    bool_marginal: BoolKernel
    leaves: tuple   # sorted (((a_out, a_in), CNFCell), ...), complete

    def leaf(self, a_out, a_in) -> CNFCell:
        key = (tuple(a_out), tuple(a_in))
        for k, cell in self.leaves:
            if k == key:
                return cell
        raise KeyError(key)


def disintegrate(mix: CGMixture, tol: float = DEFAULT_TOLERANCE) -> NFTree:
    """Split a kernel into Boolean marginal and normalized conditionals."""
    mix = canonicalize(mix, tol)
    p, m, q, n = mix.p, mix.m, mix.q, mix.n
    marginal = {}
    leaves = {}
    for bits_in, comps in mix.table:
        groups = {}
        for c in comps:
            groups.setdefault(c.bool_out, []).append(c)
        row = {}
        for bits_out in all_bitvecs(q):
            group = groups.get(bits_out)
            if not group:
                leaves[(bits_out, bits_in)] = zero_cell(n, m)
                continue
            mass = sum(c.weight for c in group)
            row[bits_out] = mass
            leaves[(bits_out, bits_in)] = CNFCell(tuple(
                CellComponent(c.weight / mass, c.lin, c.mean, c.gram())
                for c in group))
        marginal[bits_in] = row
    return NFTree(p, m, q, n, make_bool_kernel(p, q, marginal),
                  tuple(sorted(leaves.items())))


def _noise_factor(cov: Matrix, tol: float) -> Matrix:
    """Canonical factor F with F F^T = cov; rational if cov is rational."""
    exact = all(isinstance(x, Fraction) for x in cov.entries)
    lower, diag = ldlt(cov, 0 if exact else tol)
    columns = []
    for i, d in enumerate(diag):
        if d == 0:
            continue
        col = Matrix.column([lower.at(r, i) for r in range(cov.rows)])
        for scale_value in sum_square_scales(d):
            columns.append(col.scale(scale_value))
    if not columns:
        return Matrix.zeros(cov.rows, 0)
    out = columns[0]
    for col in columns[1:]:
        out = hstack(out, col)
    return out


def synth_cnf(cell: CNFCell, tol: float = DEFAULT_TOLERANCE) -> Term:
    """Emit the convex cascade for one cell: R^m -> R^n, deterministic.

    Singletons become one Gaussian-map circuit; larger cells become a
    right-nested cascade of flip-guarded conditionals whose biases are the
    renormalized weights (first-sorted component in the true branch).
    """
    def leaf(component: CellComponent) -> Term:
        factor = _noise_factor(component.cov, tol)
        return gauss_map_circuit(component.lin, component.mean, factor)

    def cascade(components, remaining):
        head = components[0]
        if len(components) == 1:
            return leaf(head)
        bias = head.weight / remaining
        return convex_mix(bias, leaf(head),
                          cascade(components[1:], remaining - head.weight))

    return cascade(cell.components, sum(c.weight for c in cell.components))


def _mux3() -> Term:
    """Boolean multiplexer from and/not/copy: not(not(g and x) and not(not g and y))."""
    g = lambda kind: mk_generator(kind)
    front = seq(par(g(GenKind.BOOL_COPY), identity(bools(2))),
                permute_term(bools(4), (0, 2, 1, 3)))
    arms = par(g(GenKind.AND), seq(par(g(GenKind.NOT), identity(bools(1))),
                                   g(GenKind.AND)))
    return seq_all(front, arms, par(g(GenKind.NOT), g(GenKind.NOT)),
                   g(GenKind.AND), g(GenKind.NOT))


def _mux_tree(selectors: int, biases: list) -> Term:
    """B^s -> B: select one of 2^s constant flips by the selector bits."""
    if selectors == 0:
        return mk_generator(GenKind.FLIP, biases[0])
    half = len(biases) // 2
    spread = par(identity(bools(1)), copy_bundle(bools(selectors - 1)))
    subtrees = par_all(identity(bools(1)),
                       _mux_tree(selectors - 1, biases[:half]),
                       _mux_tree(selectors - 1, biases[half:]))
    return seq_all(spread, subtrees, _mux3())


def synth_bool(kernel: BoolKernel) -> Term:
    """Circuit of chained conditional Bernoullis with eval equal to the kernel.

    Output bit j is drawn by a flip whose bias P(b_j = 1 | inputs, earlier
    outputs) is selected by a mux tree; zero-probability prefixes get bias 0.
    """
    p, q = kernel.p, kernel.q
    if kernel.is_identity():
        return identity(bools(p))
    if q == 0:
        return discard_all(bools(p))

    def prefix_mass(bits_in, prefix):
        return sum(w for out, w in kernel.row(bits_in).items()
                   if out[:len(prefix)] == prefix)

    stage_terms = []
    for j in range(q):
        biases = []
        for v in itertools.product((1, 0), repeat=p + j):
            bits_in, prefix = v[:p], v[p:]
            denom = prefix_mass(bits_in, prefix)
            if denom == 0:
                biases.append(Fraction(0))
            else:
                biases.append(prefix_mass(bits_in, prefix + (1,)) / denom)
        avail = p + j
        stage = seq(copy_bundle(bools(avail)),
                    par(identity(bools(avail)), _mux_tree(avail, biases)))
        stage_terms.append(stage)
    finish = par(discard_all(bools(p)), identity(bools(q)))
    return seq_all(*stage_terms, finish)


def emit_nf(tree: NFTree, tol: float = DEFAULT_TOLERANCE) -> Term:
    """Deterministic circuit for a certificate; eval reconstructs the kernel.

    Shape: copy the Boolean inputs, run the marginal circuit, copy its
    outputs, then a guard tree testing the q copied outputs followed by the
    p inputs (leftmost first, true branch first) whose leaves are the cell
    cascades applied to the shared real inputs.
    """
    p, m, q, n = tree.p, tree.m, tree.q, tree.n
    cells = {key: synth_cnf(cell, tol) for key, cell in tree.leaves}

    def node(prefix) -> Term:
        remaining = q + p - len(prefix)
        if remaining == 0:
            return cells[(prefix[:q], prefix[q:])]
        spread = par(identity(bools(1)),
                     copy_bundle(bools(remaining - 1) + reals(m)))
        branches = par_all(identity(bools(1)),
                           node(prefix + (1,)), node(prefix + (0,)))
        return seq_all(spread, branches, ite_n(n))

    guard_tree = node(())
    if p + q == 0:
        return guard_tree
    step1 = par(copy_bundle(bools(p)), identity(reals(m)))
    step2 = par_all(synth_bool(tree.bool_marginal), identity(bools(p)),
                    identity(reals(m)))
    step3 = par_all(copy_bundle(bools(q)), identity(bools(p)),
                    identity(reals(m)))
    step4 = par(identity(bools(q)), guard_tree)
    return seq_all(step1, step2, step3, step4)


def _scalars_of_tree(tree: NFTree):
    for _, row in tree.bool_marginal.rows:
        for _, w in row:
            yield w
    for _, cell in tree.leaves:
        for c in cell.components:
            yield c.weight
            yield from c.lin.entries
            yield from c.mean.entries
            yield from c.cov.entries


def tree_is_exact(tree: NFTree) -> bool:
    return all(isinstance(x, Fraction) for x in _scalars_of_tree(tree))


def nftree_equal(a: NFTree, b: NFTree, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Structural certificate equality, exact unless floats are involved."""
    if (a.p, a.m, a.q, a.n) != (b.p, b.m, b.q, b.n):
        return False
    eps = 0 if tree_is_exact(a) and tree_is_exact(b) else tol
    for (bits_a, row_a), (bits_b, row_b) in zip(a.bool_marginal.rows,
                                                b.bool_marginal.rows):
        if bits_a != bits_b or len(row_a) != len(row_b):
            return False
        for (out_a, w_a), (out_b, w_b) in zip(row_a, row_b):
            if out_a != out_b or abs(w_a - w_b) > eps:
                return False
    for (key_a, cell_a), (key_b, cell_b) in zip(a.leaves, b.leaves):
        if key_a != key_b or len(cell_a.components) != len(cell_b.components):
            return False
        for ca, cb in zip(cell_a.components, cell_b.components):
            if abs(ca.weight - cb.weight) > eps:
                return False
            for ma, mb in ((ca.lin, cb.lin), (ca.mean, cb.mean),
                           (ca.cov, cb.cov)):
                if any(abs(x - y) > eps for x, y in zip(ma.entries, mb.entries)):
                    return False
    return True


def reordered_shape(term: Term):
    """(p, m, q, n) after moving Boolean wires in front of real ones."""
    return (term.dom.n_bool, term.dom.n_real,
            term.cod.n_bool, term.cod.n_real)


def decide_equiv(c1: Term, c2: Term, tol: float = DEFAULT_TOLERANCE,
                 cap: int = DEFAULT_BOOL_CAP, backend: str = "auto"):
    """Semantic equivalence via canonical certificates.

    Boundaries must agree up to the wire reordering that sorts Booleans
    before reals; returns the verdict together with both certificates.
    """
    if reordered_shape(c1) != reordered_shape(c2):
        raise TypeMismatch(
            f"boundaries differ even after reordering: "
            f"{c1.dom}->{c1.cod} vs {c2.dom}->{c2.cod}",
            expected=(c1.dom, c1.cod), actual=(c2.dom, c2.cod))
    nf1 = disintegrate(evaluate(c1, cap=cap, tol=tol, backend=backend), tol)
    nf2 = disintegrate(evaluate(c2, cap=cap, tol=tol, backend=backend), tol)
    return nftree_equal(nf1, nf2, tol), (nf1, nf2)


def first_certificate_difference(a: NFTree, b: NFTree,
                                 tol: float = DEFAULT_TOLERANCE):
    """Human-readable location of the first differing certificate entry."""
    if (a.p, a.m, a.q, a.n) != (b.p, b.m, b.q, b.n):
        return f"shape {(a.p, a.m, a.q, a.n)} vs {(b.p, b.m, b.q, b.n)}"
    eps = 0 if tree_is_exact(a) and tree_is_exact(b) else tol
    for (bits_a, row_a), (_, row_b) in zip(a.bool_marginal.rows,
                                           b.bool_marginal.rows):
        if row_a != row_b:
            da, db = dict(row_a), dict(row_b)
            for out in sorted(set(da) | set(db)):
                wa, wb = da.get(out, Fraction(0)), db.get(out, Fraction(0))
                if abs(wa - wb) > eps:
                    return (f"marginal({bits_to_str(out)}|{bits_to_str(bits_a)}): "
                            f"{wa} vs {wb}")
    for (key, cell_a), (_, cell_b) in zip(a.leaves, b.leaves):
        label = f"leaf(a'={bits_to_str(key[0])}, a={bits_to_str(key[1])})"
        if len(cell_a.components) != len(cell_b.components):
            return (f"{label}: {len(cell_a.components)} vs "
                    f"{len(cell_b.components)} components")
        for idx, (ca, cb) in enumerate(zip(cell_a.components, cell_b.components)):
            if abs(ca.weight - cb.weight) > eps:
                return f"{label} component {idx}: weight {ca.weight} vs {cb.weight}"
            for field_name, ma, mb in (("A", ca.lin, cb.lin),
                                       ("mu", ca.mean, cb.mean),
                                       ("cov", ca.cov, cb.cov)):
                if any(abs(x - y) > eps
                       for x, y in zip(ma.entries, mb.entries)):
                    return f"{label} component {idx}: {field_name} differs"
    return None


def certificate_json(tree: NFTree) -> dict:
    marginal_rows = []
    for bits_in, row in tree.bool_marginal.rows:
        marginal_rows.append({
            "input": bits_to_str(bits_in),
            "outputs": [{"output": bits_to_str(out),
                         "weight": scalar_to_json(w)} for out, w in row],
        })
    leaves = []
    for (a_out, a_in), cell in tree.leaves:
        leaves.append({
            "aPrime": bits_to_str(a_out),
            "a": bits_to_str(a_in),
            "components": [{
                "weight": scalar_to_json(c.weight),
                "A": matrix_to_json(c.lin),
                "mu": matrix_to_json(c.mean),
                "cov": matrix_to_json(c.cov),
            } for c in cell.components],
        })
    return {"p": tree.p, "m": tree.m, "q": tree.q, "n": tree.n,
            "boolMarginal": marginal_rows, "leaves": leaves}
