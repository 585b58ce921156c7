"""Matrix linear differential operators and on-shell reduction.

An operator is a sparse matrix whose (row, col) entries are finite sums
``coeff * D^alpha`` acting on the col-th component of the argument vector.
Composition expands by the Leibniz rule; the formal adjoint integrates by
parts and discards boundary terms.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from . import expr as ex
from .expr import (
    Expr,
    JetVar,
    MultiIndex,
    EMPTY_INDEX,
    UnsupportedInputError,
    canonicalize,
    is_identically_zero,
    to_text,
)


class ShellError(ex.ExprError):
    """On-shell reduction could not be completed."""


def _as_index(a) -> MultiIndex:
    return a if isinstance(a, MultiIndex) else MultiIndex(a)


def _sub_indices(alpha: MultiIndex):
    """All (gamma, alpha-gamma, multinomial coefficient) with gamma <= alpha."""
    items = alpha.items
    if not items:
        yield EMPTY_INDEX, EMPTY_INDEX, 1
        return
    name, count = items[0]
    rest = MultiIndex(items[1:])
    for k in range(count + 1):
        c = math.comb(count, k)
        for g, r, c2 in _sub_indices(rest):
            gamma = MultiIndex(dict(list(g.items) + ([(name, k)] if k else [])))
            rem = MultiIndex(
                dict(list(r.items) + ([(name, count - k)] if count - k else []))
            )
            yield gamma, rem, c * c2


def _lead_key(atom: JetVar):
    # highest derivative order wins, then field name, then the index itself
    return (atom.index.order(), atom.field, atom.index.items)


class LinDiffOp:
    """Sparse matrix of linear differential operators."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        table = {}
        for key, coeff in (entries or {}).items():
            r, c, alpha = key
            alpha = _as_index(alpha)
            coeff = canonicalize(ex._coerce(coeff))
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError("entry outside the matrix shape")
            if is_identically_zero(coeff):
                continue
            k = (r, c, alpha)
            if k in table:
                coeff = canonicalize(table[k] + coeff)
                if is_identically_zero(coeff):
                    del table[k]
                    continue
            table[k] = coeff
        self.entries = table

    # construction helpers -------------------------------------------------
    @staticmethod
    def identity(n: int) -> "LinDiffOp":
        return LinDiffOp(n, n, {(i, i, EMPTY_INDEX): ex.ONE for i in range(n)})

    @staticmethod
    def zero(rows: int, cols: int) -> "LinDiffOp":
        return LinDiffOp(rows, cols)

    @staticmethod
    def total_derivative(name: str, n: int = 1) -> "LinDiffOp":
        alpha = MultiIndex({name: 1})
        return LinDiffOp(n, n, {(i, i, alpha): ex.ONE for i in range(n)})

    @staticmethod
    def from_matrix(matrix) -> "LinDiffOp":
        rows = len(matrix)
        cols = len(matrix[0]) if rows else 0
        entries = {}
        for r, row in enumerate(matrix):
            if len(row) != cols:
                raise ValueError("ragged matrix")
            for c, coeff in enumerate(row):
                entries[(r, c, EMPTY_INDEX)] = ex._coerce(coeff)
        return LinDiffOp(rows, cols, entries)

    # algebra ---------------------------------------------------------------
    def __add__(self, other: "LinDiffOp") -> "LinDiffOp":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        merged = dict(self.entries)
        for k, v in other.entries.items():
            merged[k] = merged[k] + v if k in merged else v
        return LinDiffOp(self.rows, self.cols, merged)

    def __sub__(self, other: "LinDiffOp") -> "LinDiffOp":
        return self + other.scale(-1)

    def scale(self, coeff) -> "LinDiffOp":
        coeff = ex._coerce(coeff)
        return LinDiffOp(
            self.rows,
            self.cols,
            {k: coeff * v for k, v in self.entries.items()},
        )

    def left_multiply(self, coeffs) -> "LinDiffOp":
        """Multiply row i by the zero-order coefficient coeffs[i]."""
        return LinDiffOp(
            self.rows,
            self.cols,
            {(r, c, a): ex._coerce(coeffs[r]) * v for (r, c, a), v in self.entries.items()},
        )

    def apply(self, vector):
        """Apply to a vector of expressions, canonicalized entrywise."""
        if len(vector) != self.cols:
            raise ValueError(f"expected {self.cols} components, got {len(vector)}")
        vector = [ex._coerce(v) for v in vector]
        out = [ex.ZERO for _ in range(self.rows)]
        for (r, c, alpha), coeff in self.entries.items():
            out[r] = out[r] + coeff * ex.iterated_total_derivative(vector[c], alpha)
        return [canonicalize(v) for v in out]

    def compose(self, other: "LinDiffOp") -> "LinDiffOp":
        """Leibniz-expanded composition: (self.compose(other)).apply(v) ==
        self.apply(other.apply(v))."""
        if self.cols != other.rows:
            raise ValueError("inner dimensions do not match")
        entries = {}
        for (r, k, alpha), a in self.entries.items():
            for (k2, c, beta), b in other.entries.items():
                if k2 != k:
                    continue
                for gamma, remaining, binom in _sub_indices(alpha):
                    coeff = a * ex.rational(binom) * ex.iterated_total_derivative(b, gamma)
                    key = (r, c, remaining + beta)
                    entries[key] = entries[key] + coeff if key in entries else coeff
        return LinDiffOp(self.rows, other.cols, entries)

    def formal_adjoint(self) -> "LinDiffOp":
        """Formal transpose: (coeff * D^a)^T = (-1)^|a| D^a o coeff, with the
        Leibniz rule expanded so entries are again coeff * D^a sums."""
        entries = {}
        for (r, c, alpha), a in self.entries.items():
            sign = ex.rational((-1) ** alpha.order())
            for gamma, remaining, binom in _sub_indices(alpha):
                coeff = sign * ex.rational(binom) * ex.iterated_total_derivative(a, gamma)
                key = (c, r, remaining)
                entries[key] = entries[key] + coeff if key in entries else coeff
        return LinDiffOp(self.cols, self.rows, entries)

    # inspection ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.entries

    def order(self) -> int:
        return max((a.order() for (_, _, a) in self.entries), default=0)

    def entry(self, r: int, c: int):
        """The (r, c) block as a list of (MultiIndex, Expr)."""
        return sorted(
            ((a, v) for (rr, cc, a), v in self.entries.items() if rr == r and cc == c),
            key=lambda kv: kv[0].sort_key(),
        )

    def map_coefficients(self, fn) -> "LinDiffOp":
        return LinDiffOp(
            self.rows, self.cols, {k: fn(v) for k, v in self.entries.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, LinDiffOp):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        keys = set(self.entries) | set(other.entries)
        for k in keys:
            a = self.entries.get(k, ex.ZERO)
            b = other.entries.get(k, ex.ZERO)
            if not is_identically_zero(a - b):
                return False
        return True

    def __repr__(self):
        return f"LinDiffOp({self.rows}x{self.cols}, {len(self.entries)} entries)"

    def describe(self) -> str:
        """Readable rendering for reports and residual display."""
        if self.is_zero():
            return "0"
        lines = []
        for (r, c, alpha), coeff in sorted(
            self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].sort_key())
        ):
            d = "".join(f"D_{n}" * k for n, k in alpha.items) or "1"
            lines.append(f"[{r},{c}] ({to_text(coeff)}) * {d}")
        return "; ".join(lines)


def linearize(components, fields) -> LinDiffOp:
    """Universal linearization of a (possibly nonlinear) operator given by
    component expressions: J[a, i] = sum_alpha dT_a/du_{i,alpha} D^alpha."""
    components = [ex._coerce(c) for c in components]
    entries = {}
    for a, comp in enumerate(components):
        for atom in ex.jet_atoms(comp):
            if atom.field not in fields:
                continue
            i = fields.index(atom.field)
            coeff = ex.diff(comp, atom)
            key = (a, i, atom.index)
            entries[key] = entries[key] + coeff if key in entries else coeff
    return LinDiffOp(len(components), len(fields), entries)


# ---------------------------------------------------------------------------
# on-shell reduction


class ShellRules:
    """Substitution rules lead-jet -> expression, closed under prolongation.

    Base equations must be solvable for their graded-lexicographically
    greatest jet atom with a constant coefficient; prolongations are formed
    with total derivatives and re-eliminated, so the rule set is confluent
    on the covered order range.
    """

    def __init__(self, equations, directions, max_order=None):
        self.equations = [canonicalize(ex._coerce(e)) for e in equations]
        self.directions = tuple(directions)
        self.auto = max_order is None
        self._lock = threading.Lock()
        base = _eliminate(self.equations)
        self._base_leads = tuple(base)
        self._cache = {self._base_order(): base}
        if max_order is not None:
            self._cache[max_order] = self._build(max_order)
        self.max_order = max_order

    def _base_order(self):
        return max((a.index.order() for a in self._base_leads), default=0)

    def _build(self, order):
        eqs = list(self.equations)
        seen = {canonicalize(e) for e in eqs}
        frontier = list(self.equations)
        while frontier:
            new = []
            for eq in frontier:
                for d in self.directions:
                    de = ex.total_derivative(eq, d)
                    if ex.max_jet_order(de) <= order and de not in seen:
                        seen.add(de)
                        new.append(de)
            frontier = new
            eqs.extend(new)
        return _eliminate(eqs)

    def rules_up_to(self, order: int):
        if not self.auto:
            order = self.max_order
        with self._lock:
            if order not in self._cache:
                self._cache[order] = self._build(order)
            return self._cache[order]

    def covers(self, atom: JetVar) -> bool:
        """Whether the atom is constrained by some base rule (possibly after
        prolongation)."""
        for lead in self._base_leads:
            if lead.field != atom.field:
                continue
            if all(atom.index.get(n) >= c for n, c in lead.index.items):
                return True
        return False

    def reduce(self, e: Expr) -> Expr:
        """Exhaustively substitute leading jets; idempotent."""
        e = canonicalize(ex._coerce(e))
        needed = ex.max_jet_order(e)
        rules = self.rules_up_to(needed)
        while True:
            hit = {a: rules[a] for a in ex.jet_atoms(e) if a in rules}
            if not hit:
                break
            e = ex.substitute(e, hit)
        if not self.auto:
            for a in ex.jet_atoms(e):
                if self.covers(a):
                    raise ShellError(
                        f"shell rules not prolonged far enough to cover {a.display()}"
                    )
        return e


def _eliminate(equations):
    """Triangularize linear-in-their-lead equations into rewrite rules."""
    rules = {}
    for eq in equations:
        eq = _reduce_full(canonicalize(eq), rules)
        if is_identically_zero(eq):
            continue
        jets = ex.jet_atoms(eq)
        if not jets:
            raise ShellError(f"inconsistent shell relation: {to_text(eq)} = 0")
        lead = max(jets, key=_lead_key)
        coeff = ex.diff(eq, lead)
        if ex.jet_atoms(coeff) or not isinstance(canonicalize(coeff), ex.Rat):
            raise ShellError(
                f"cannot solve relation for {lead.display()}: "
                "leading coefficient is not constant"
            )
        rest = canonicalize(eq - coeff * ex.Sym(lead))
        if lead in ex.jet_atoms(rest):
            raise ShellError(f"relation is nonlinear in {lead.display()}")
        rules[lead] = canonicalize(rest * ex.rational(-1) / coeff)
    # normalize right-hand sides against the full rule set
    stable = False
    while not stable:
        stable = True
        for lead, rhs in list(rules.items()):
            hit = {a: rules[a] for a in ex.jet_atoms(rhs) if a in rules}
            if hit:
                rules[lead] = ex.substitute(rhs, hit)
                stable = False
    return rules


def _reduce_full(e, rules):
    while True:
        hit = {a: rules[a] for a in ex.jet_atoms(e) if a in rules}
        if not hit:
            return e
        e = ex.substitute(e, hit)


def reduce_on_shell(obj, shell: ShellRules):
    """Reduce an expression or operator coefficient-wise on the shell."""
    if isinstance(obj, LinDiffOp):
        return obj.map_coefficients(shell.reduce)
    return shell.reduce(obj)


def op_equal_mod_shell(a: LinDiffOp, b: LinDiffOp, shell: ShellRules):
    """Entrywise weak equality; returns (flag, residual operator)."""
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ValueError("shape mismatch")
    residual = reduce_on_shell(a - b, shell)
    return residual.is_zero(), residual
