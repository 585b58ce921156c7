"""Exact symbolic kernel over jet variables.

Expressions are immutable trees built from rational constants, symbols
(independent variables, jet variables, parameters) and the four elementary
kernels sin/cos/exp/log, closed under sums, products and integer powers.
The canonical form is the fully expanded sum of Laurent monomials in the
symbol/function atoms, with rational coefficients, ordered graded-
lexicographically.  Structural equality of canonical forms is mathematical
equality within this class; sin/cos/exp/log applications are opaque atoms
(no trigonometric rewriting), so identities that mix them are decided by
the randomized evaluation oracle instead.

Everything here is a pure function over immutable values and is safe for
concurrent use; the per-node canonical-form cache is a write-once slot
whose value is deterministic, so a racing recomputation is harmless.
"""

from __future__ import annotations

import os
import random
from fractions import Fraction

import mpmath

FUNCTIONS = ("sin", "cos", "exp", "log")

_DEFAULT_NODE_LIMIT = 10**6


class ExprError(Exception):
    """Base class for kernel errors."""


class ResourceLimitError(ExprError):
    """Expression grew past the configured node limit."""


class UnsupportedInputError(ExprError):
    """Input is outside the supported expression class."""


class EvaluationError(ExprError):
    """Randomized evaluation could not produce a sample."""


def node_limit() -> int:
    try:
        return int(os.environ.get("ANCHORCALC_NODE_LIMIT", _DEFAULT_NODE_LIMIT))
    except ValueError:
        return _DEFAULT_NODE_LIMIT


def _check_size(n: int) -> None:
    if n > node_limit():
        raise ResourceLimitError(
            f"expression exceeds node limit ({n} > {node_limit()}); "
            "set ANCHORCALC_NODE_LIMIT to raise the cap"
        )


# ---------------------------------------------------------------------------
# multi-indices


class MultiIndex:
    """Derivative counts per independent variable, stored sparse."""

    __slots__ = ("_items",)

    def __init__(self, items=()):
        if isinstance(items, MultiIndex):
            self._items = items._items
            return
        if isinstance(items, dict):
            items = items.items()
        cleaned = {}
        for name, count in items:
            count = int(count)
            if count < 0:
                raise ValueError("derivative counts must be non-negative")
            if count:
                cleaned[name] = cleaned.get(name, 0) + count
        self._items = tuple(sorted(cleaned.items()))

    @property
    def items(self):
        return self._items

    def order(self) -> int:
        return sum(c for _, c in self._items)

    def get(self, name: str) -> int:
        for n, c in self._items:
            if n == name:
                return c
        return 0

    def step(self, name: str) -> "MultiIndex":
        d = dict(self._items)
        d[name] = d.get(name, 0) + 1
        return MultiIndex(d)

    def unstep(self, name: str) -> "MultiIndex":
        d = dict(self._items)
        if d.get(name, 0) <= 0:
            raise ValueError(f"cannot lower derivative count for {name}")
        d[name] -= 1
        return MultiIndex(d)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        d = dict(self._items)
        for n, c in other._items:
            d[n] = d.get(n, 0) + c
        return MultiIndex(d)

    def names(self):
        return tuple(n for n, _ in self._items)

    def suffix(self) -> str:
        return "".join(n * c for n, c in self._items)

    def __eq__(self, other):
        return isinstance(other, MultiIndex) and self._items == other._items

    def __hash__(self):
        return hash(("midx", self._items))

    def __repr__(self):
        return f"MultiIndex({dict(self._items)!r})"

    def sort_key(self):
        return (self.order(), self._items)


EMPTY_INDEX = MultiIndex()


# ---------------------------------------------------------------------------
# atoms


class IndepVar:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def sort_key(self):
        return (1, self.name)

    def display(self) -> str:
        return self.name

    def __eq__(self, other):
        return isinstance(other, IndepVar) and self.name == other.name

    def __hash__(self):
        return hash(("indep", self.name))

    def __repr__(self):
        return f"IndepVar({self.name!r})"


class JetVar:
    """Jet coordinate of a field component; order 0 is the field itself."""

    __slots__ = ("field", "index")

    def __init__(self, field: str, index=EMPTY_INDEX):
        self.field = field
        self.index = MultiIndex(index)

    def sort_key(self):
        return (0, self.field, self.index.sort_key())

    def display(self) -> str:
        if self.index.order() == 0:
            return self.field
        return f"{self.field}_{self.index.suffix()}"

    def __eq__(self, other):
        return (
            isinstance(other, JetVar)
            and self.field == other.field
            and self.index == other.index
        )

    def __hash__(self):
        return hash(("jet", self.field, self.index))

    def __repr__(self):
        return f"JetVar({self.field!r}, {dict(self.index.items)!r})"


class Param:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def sort_key(self):
        return (2, self.name)

    def display(self) -> str:
        return self.name

    def __eq__(self, other):
        return isinstance(other, Param) and self.name == other.name

    def __hash__(self):
        return hash(("param", self.name))

    def __repr__(self):
        return f"Param({self.name!r})"


class FunAtom:
    """An application sin/cos/exp/log(arg) treated as an opaque atom.

    The argument is kept in canonical form so that structurally equal
    applications compare and hash equal.
    """

    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: "Expr"):
        self.fn = fn
        self.arg = arg

    def sort_key(self):
        return (3, self.fn, _tree_key(self.arg))

    def display(self) -> str:
        return f"{self.fn}({to_text(self.arg)})"

    def __eq__(self, other):
        return isinstance(other, FunAtom) and self.fn == other.fn and self.arg == other.arg

    def __hash__(self):
        return hash(("fun", self.fn, self.arg))

    def __repr__(self):
        return f"FunAtom({self.fn!r}, {self.arg!r})"


def _atom_key(atom):
    return atom.sort_key()


def _monomial_key(mono):
    # graded-lexicographic: total degree first, then the exponent vector
    return (sum(e for _, e in mono), tuple((_atom_key(a), e) for a, e in mono))


# ---------------------------------------------------------------------------
# expression trees


class Expr:
    """Immutable expression tree node."""

    __slots__ = ("_poly", "_hash")

    def _as_poly(self):
        raise NotImplementedError

    def poly(self):
        p = getattr(self, "_poly", None)
        if p is None:
            p = self._as_poly()
            object.__setattr__(self, "_poly", p)
        return p

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        return Add((self, _coerce(other)))

    def __radd__(self, other):
        return Add((_coerce(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Rat(-1), _coerce(other)))))

    def __rsub__(self, other):
        return Add((_coerce(other), Mul((Rat(-1), self))))

    def __mul__(self, other):
        return Mul((self, _coerce(other)))

    def __rmul__(self, other):
        return Mul((_coerce(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(_coerce(other), -1)))

    def __rtruediv__(self, other):
        return Mul((_coerce(other), Pow(self, -1)))

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise UnsupportedInputError("only integer powers are supported")
        return Pow(self, exponent)

    def __neg__(self):
        return Mul((Rat(-1), self))

    def __pos__(self):
        return self

    # -- comparisons ----------------------------------------------------
    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return _tree_key(self) == _tree_key(other)

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash(_tree_key(self))
            object.__setattr__(self, "_hash", h)
        return h

    def equals(self, other) -> bool:
        """Mathematical equality within the canonical class."""
        return is_identically_zero(self - _coerce(other))

    def __repr__(self):
        return f"Expr[{to_text(self)}]"


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value, den=None):
        v = Fraction(value, den) if den is not None else Fraction(value)
        object.__setattr__(self, "value", v)

    def _as_poly(self):
        if self.value == 0:
            return {}
        return {(): self.value}


class Sym(Expr):
    __slots__ = ("atom",)

    def __init__(self, atom):
        object.__setattr__(self, "atom", atom)

    def _as_poly(self):
        return {((self.atom, 1),): Fraction(1)}


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))

    def _as_poly(self):
        acc = {}
        for t in self.terms:
            _padd_into(acc, t.poly())
        return {m: c for m, c in acc.items() if c}


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))

    def _as_poly(self):
        acc = {(): Fraction(1)}
        for f in self.factors:
            acc = _pmul(acc, f.poly())
        return acc


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        if not isinstance(exponent, int):
            raise UnsupportedInputError("only integer powers are supported")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    def _as_poly(self):
        return _ppow(self.base.poly(), self.exponent)


class Fun(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn, arg):
        if fn not in FUNCTIONS:
            raise UnsupportedInputError(f"unknown function {fn!r}")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)

    def _as_poly(self):
        arg = canonicalize(self.arg)
        if isinstance(arg, Rat) and arg.value == 0:
            # exact values at zero argument
            if self.fn == "sin":
                return {}
            if self.fn == "cos" or self.fn == "exp":
                return {(): Fraction(1)}
            raise UnsupportedInputError("log(0) is undefined")
        if self.fn == "log" and isinstance(arg, Rat) and arg.value == 1:
            return {}
        return {((FunAtom(self.fn, arg), 1),): Fraction(1)}


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Rat(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as an expression")


def _tree_key(e: Expr):
    if isinstance(e, Rat):
        return ("r", e.value)
    if isinstance(e, Sym):
        return ("s", e.atom.sort_key())
    if isinstance(e, Add):
        return ("+",) + tuple(_tree_key(t) for t in e.terms)
    if isinstance(e, Mul):
        return ("*",) + tuple(_tree_key(f) for f in e.factors)
    if isinstance(e, Pow):
        return ("^", _tree_key(e.base), e.exponent)
    if isinstance(e, Fun):
        return ("f", e.fn, _tree_key(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# polynomial layer (dict monomial -> Fraction, monomial = sorted atom powers)


def _padd_into(acc, p):
    for m, c in p.items():
        nc = acc.get(m, 0) + c
        if nc:
            acc[m] = nc
        else:
            acc.pop(m, None)
    _check_size(len(acc))


def _pmul(p, q):
    if not p or not q:
        return {}
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            nc = out.get(m, 0) + c1 * c2
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
        _check_size(len(out))
    return out


def _mono_mul(m1, m2):
    d = dict(m1)
    for a, e in m2:
        ne = d.get(a, 0) + e
        if ne:
            d[a] = ne
        else:
            d.pop(a, None)
    return tuple(sorted(d.items(), key=lambda ae: _atom_key(ae[0])))


def _pinv(p):
    if len(p) != 1:
        raise UnsupportedInputError(
            "division is only supported by nonzero constants and single monomials"
        )
    (mono, coeff), = p.items()
    return {tuple((a, -e) for a, e in mono): Fraction(1) / coeff}


def _ppow(p, n: int):
    if n == 0:
        return {(): Fraction(1)}
    if n < 0:
        return _ppow(_pinv(p), -n)
    result = {(): Fraction(1)}
    base = p
    while n:
        if n & 1:
            result = _pmul(result, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return result


def _pscale(p, c: Fraction):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def _from_poly(p) -> Expr:
    """Rebuild the canonical tree from a polynomial, largest monomial first."""
    if not p:
        return Rat(0)
    terms = []
    for mono, coeff in sorted(p.items(), key=lambda mc: _monomial_key(mc[0]), reverse=True):
        factors = []
        for atom, e in mono:
            base = _atom_expr(atom)
            factors.append(base if e == 1 else Pow(base, e))
        if not factors:
            terms.append(Rat(coeff))
        elif coeff == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif coeff == 1:
            terms.append(Mul(tuple(factors)))
        else:
            terms.append(Mul(tuple([Rat(coeff)] + factors)))
    if len(terms) == 1:
        tree = terms[0]
    else:
        tree = Add(tuple(terms))
    object.__setattr__(tree, "_poly", dict(p))
    return tree


def _atom_expr(atom) -> Expr:
    if isinstance(atom, FunAtom):
        return Fun(atom.fn, atom.arg)
    return Sym(atom)


# ---------------------------------------------------------------------------
# public constructors


def indep(name: str) -> Expr:
    return Sym(IndepVar(name))


def jet(field: str, index=EMPTY_INDEX) -> Expr:
    return Sym(JetVar(field, index))


def param(name: str) -> Expr:
    return Sym(Param(name))


def rational(p, q=1) -> Expr:
    return Rat(Fraction(p, q))


def sin(e) -> Expr:
    return Fun("sin", _coerce(e))


def cos(e) -> Expr:
    return Fun("cos", _coerce(e))


def exp(e) -> Expr:
    return Fun("exp", _coerce(e))


def log(e) -> Expr:
    return Fun("log", _coerce(e))


ZERO = Rat(0)
ONE = Rat(1)


# ---------------------------------------------------------------------------
# canonicalization and queries


def canonicalize(e: Expr) -> Expr:
    """Return the canonical expanded form; idempotent by construction."""
    try:
        return _from_poly(_coerce(e).poly())
    except RecursionError:
        raise ResourceLimitError("expression tree is too deep") from None


def is_identically_zero(e: Expr) -> bool:
    return not _coerce(e).poly()


def atoms(e: Expr, nested: bool = True):
    """All atoms of the canonical form; with nested=True descends into
    function-application arguments as well."""
    out = set()
    _collect_atoms(_coerce(e).poly(), out, nested)
    return out


def _collect_atoms(p, out, nested):
    for mono in p:
        for a, _ in mono:
            out.add(a)
            if nested and isinstance(a, FunAtom):
                _collect_atoms(a.arg.poly(), out, nested)


def jet_atoms(e: Expr, field=None):
    return {
        a
        for a in atoms(e)
        if isinstance(a, JetVar) and (field is None or a.field == field)
    }


def max_jet_order(e: Expr, field=None) -> int:
    orders = [a.index.order() for a in jet_atoms(e, field)]
    return max(orders, default=0)


# ---------------------------------------------------------------------------
# differentiation


def _atom_total_derivative(atom, d: str):
    if isinstance(atom, IndepVar):
        return {(): Fraction(1)} if atom.name == d else {}
    if isinstance(atom, Param):
        return {}
    if isinstance(atom, JetVar):
        return {((JetVar(atom.field, atom.index.step(d)), 1),): Fraction(1)}
    if isinstance(atom, FunAtom):
        inner = total_derivative(atom.arg, d).poly()
        if not inner:
            return {}
        return _pmul(_fun_derivative(atom), inner)
    raise TypeError(f"unknown atom {atom!r}")


def _fun_derivative(atom: FunAtom):
    arg = atom.arg
    if atom.fn == "sin":
        return Fun("cos", arg).poly()
    if atom.fn == "cos":
        return _pscale(Fun("sin", arg).poly(), Fraction(-1))
    if atom.fn == "exp":
        return {((atom, 1),): Fraction(1)}
    if atom.fn == "log":
        return _pinv(arg.poly())
    raise TypeError(atom.fn)


def _atom_partial(atom, sym):
    if atom == sym:
        return {(): Fraction(1)}
    if isinstance(atom, FunAtom):
        inner = diff(atom.arg, sym).poly()
        if not inner:
            return {}
        return _pmul(_fun_derivative(atom), inner)
    return {}


def _derive_poly(p, atom_rule):
    """Product rule over monomials with the given atom derivative."""
    acc = {}
    for mono, coeff in p.items():
        for a, e in mono:
            da = atom_rule(a)
            if not da:
                continue
            rest = dict(mono)
            if e == 1:
                rest.pop(a)
            else:
                rest[a] = e - 1
            rest_mono = tuple(sorted(rest.items(), key=lambda ae: _atom_key(ae[0])))
            term = _pscale(_pmul({rest_mono: Fraction(1)}, da), coeff * e)
            _padd_into(acc, term)
    return acc


def total_derivative(e: Expr, d) -> Expr:
    """Total derivative D_d: raises jet orders in direction d by the chain
    rule, differentiates the independent variable d to 1, parameters to 0."""
    name = d.name if isinstance(d, IndepVar) else d if isinstance(d, str) else None
    if name is None and isinstance(d, Sym) and isinstance(d.atom, IndepVar):
        name = d.atom.name
    if name is None:
        raise TypeError("direction must be an independent variable or its name")
    return _from_poly(_derive_poly(_coerce(e).poly(), lambda a: _atom_total_derivative(a, name)))


def diff(e: Expr, sym) -> Expr:
    """Partial derivative with respect to one symbol atom (chain rule is
    applied through function applications)."""
    if isinstance(sym, Sym):
        sym = sym.atom
    return _from_poly(_derive_poly(_coerce(e).poly(), lambda a: _atom_partial(a, sym)))


def iterated_total_derivative(e: Expr, index: MultiIndex) -> Expr:
    out = e
    for name, count in index.items:
        for _ in range(count):
            out = total_derivative(out, name)
    return out


def euler_derivative(density: Expr, field: str) -> Expr:
    """Variational derivative with respect to one field:
    sum over jet orders of (-1)^|a| D^a (d density / d u_a)."""
    density = _coerce(density)
    out = {}
    for a in jet_atoms(density, field):
        partial = diff(density, a)
        term = iterated_total_derivative(partial, a.index)
        sign = Fraction(-1) ** a.index.order()
        _padd_into(out, _pscale(term.poly(), sign))
    return _from_poly(out)


# ---------------------------------------------------------------------------
# substitution


def substitute(e: Expr, mapping) -> Expr:
    """Substitute atoms by expressions (single simultaneous pass)."""
    table = {}
    for k, v in mapping.items():
        if isinstance(k, Sym):
            k = k.atom
        table[k] = _coerce(v).poly()
    return _from_poly(_subst_poly(_coerce(e).poly(), table))


def _subst_poly(p, table):
    acc = {}
    for mono, coeff in p.items():
        term = {(): coeff}
        for a, e in mono:
            if isinstance(a, FunAtom):
                new_arg = _from_poly(_subst_poly(a.arg.poly(), table))
                rep = Fun(a.fn, new_arg).poly()
            else:
                rep = table.get(a)
                if rep is None:
                    rep = {((a, 1),): Fraction(1)}
            term = _pmul(term, _ppow(rep, e))
        _padd_into(acc, term)
    return acc


# ---------------------------------------------------------------------------
# divergence splitting (single independent variable homotopy operator)


def divergence_split(density: Expr, d=None):
    """Invert a total t-derivative: return j with D_t j = density, or None
    when the density fails the Euler test (is not a total derivative).

    Supported class: polynomial in all jet variables, with coefficients
    polynomial in the independent variable and parameters (function atoms
    may depend on the independent variable only).  Violations raise
    UnsupportedInputError; the answer, when produced, is verified.
    """
    density = canonicalize(density)
    name = _divergence_direction(density, d)
    fields = sorted({a.field for a in jet_atoms(density)})
    for a in atoms(density):
        if isinstance(a, FunAtom) and jet_atoms(a.arg):
            raise UnsupportedInputError(
                "density is not polynomial in the jet variables "
                f"(found {a.display()})"
            )
    for mono in density.poly():
        for a, e in mono:
            if isinstance(a, JetVar) and e < 0:
                raise UnsupportedInputError(
                    f"density is not polynomial in {a.display()}"
                )
    for f in fields:
        if not is_identically_zero(euler_derivative(density, f)):
            return None

    # integration-by-parts collector: for every field u and order k >= 1,
    #   u^(k) dL/du^(k) = u E(L)-part + D_t [ sum_j (-1)^j u^(k-1-j) D^j dL/du^(k) ]
    collected = {}
    for a in jet_atoms(density):
        k = a.index.order()
        if k == 0:
            continue
        partial = diff(density, a)
        for j in range(k):
            lowered = JetVar(a.field, MultiIndex({name: k - 1 - j}))
            deriv = iterated_total_derivative(partial, MultiIndex({name: j}))
            term = _pmul(Sym(lowered).poly(), deriv.poly())
            _padd_into(collected, _pscale(term, Fraction(-1) ** j))

    # scale integral over the field-rescaling ray: each monomial of total
    # jet degree m contributes with weight 1/m
    ray = {}
    for mono, coeff in collected.items():
        degree = sum(e for a, e in mono if isinstance(a, JetVar))
        if degree <= 0:
            raise UnsupportedInputError("homotopy collector lost field degree")
        nc = ray.get(mono, 0) + coeff / degree
        if nc:
            ray[mono] = nc
        else:
            ray.pop(mono, None)

    # pure (t, parameter) remainder integrates termwise
    remainder = {m: c for m, c in density.poly().items()
                 if not any(isinstance(a, JetVar) for a, _ in m)}
    tail = _poly_antiderivative(remainder, name)
    _padd_into(ray, tail)

    j = _from_poly(ray)
    if not is_identically_zero(total_derivative(j, name) - density):
        raise UnsupportedInputError("homotopy inversion failed on this input")
    return j


def _divergence_direction(density, d):
    if d is not None:
        if isinstance(d, IndepVar):
            return d.name
        if isinstance(d, Sym) and isinstance(d.atom, IndepVar):
            return d.atom.name
        return str(d)
    names = set()
    for a in atoms(density):
        if isinstance(a, IndepVar):
            names.add(a.name)
        elif isinstance(a, JetVar):
            names.update(a.index.names())
    if len(names) > 1:
        raise UnsupportedInputError(
            "divergence splitting supports a single independent variable; "
            f"found {sorted(names)}"
        )
    return names.pop() if names else "t"


def _poly_antiderivative(p, name):
    out = {}
    t = IndepVar(name)
    for mono, coeff in p.items():
        k = 0
        rest = []
        for a, e in mono:
            if isinstance(a, IndepVar) and a.name == name:
                k = e
            elif isinstance(a, (IndepVar, Param)):
                rest.append((a, e))
            else:
                raise UnsupportedInputError(
                    "cannot integrate the derivative-free remainder "
                    f"(term contains {a.display()})"
                )
        if k == -1:
            lifted = _pmul({tuple(sorted(rest, key=lambda ae: _atom_key(ae[0]))): coeff},
                           Fun("log", Sym(t)).poly())
            _padd_into(out, lifted)
            continue
        rest.append((t, k + 1))
        mono2 = tuple(sorted(rest, key=lambda ae: _atom_key(ae[0])))
        _padd_into(out, {mono2: coeff / (k + 1)})
    return out


# ---------------------------------------------------------------------------
# randomized evaluation oracle


RAND_EVAL_SEEDS = 32
RAND_EVAL_PRECISION = 256
RAND_EVAL_THRESHOLD = Fraction(1, 10**40)
_RESAMPLE_LIMIT = 8


def rand_eval(e: Expr, seed: int) -> Fraction:
    """Evaluate at a seeded random rational point (numerators and
    denominators bounded by 1000).  Elementary functions are evaluated in
    256-bit binary arithmetic and converted back to exact rationals, so the
    result is deterministic for a fixed seed."""
    e = _coerce(e)
    symbols = sorted(
        (a for a in atoms(e) if not isinstance(a, FunAtom)),
        key=_atom_key,
    )
    last = None
    for attempt in range(_RESAMPLE_LIMIT):
        rng = random.Random(1000003 * (seed + 1) + attempt)
        assignment = {
            a: Fraction(rng.randint(-1000, 1000), rng.randint(1, 1000))
            for a in symbols
        }
        try:
            return _eval_poly(e.poly(), assignment)
        except (_DomainViolation, ZeroDivisionError) as exc:
            last = exc
    raise EvaluationError(f"no valid sample after {_RESAMPLE_LIMIT} attempts: {last}")


class _DomainViolation(Exception):
    pass


def _eval_poly(p, assignment) -> Fraction:
    total = Fraction(0)
    for mono, coeff in p.items():
        value = coeff
        for a, e in mono:
            base = _eval_atom(a, assignment)
            if base == 0 and e < 0:
                raise _DomainViolation("negative power at zero sample")
            value *= base**e
        total += value
    return total


def _eval_atom(a, assignment) -> Fraction:
    if isinstance(a, FunAtom):
        x = _eval_poly(a.arg.poly(), assignment)
        if a.fn == "log" and x <= 0:
            raise _DomainViolation("log of a non-positive sample")
        with mpmath.workprec(RAND_EVAL_PRECISION):
            mx = mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)
            fn = getattr(mpmath, a.fn)
            return _mpf_to_fraction(fn(mx))
    return assignment[a]


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exponent, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    value = Fraction(man)
    value = value * Fraction(2) ** exponent
    return -value if sign else value


def evaluate(e: Expr, assignment) -> Fraction:
    """Exact evaluation at a rational point (atom -> Fraction); elementary
    functions go through the 256-bit route of rand_eval."""
    table = {}
    for k, v in assignment.items():
        if isinstance(k, Sym):
            k = k.atom
        table[k] = Fraction(v)
    missing = [
        a for a in atoms(_coerce(e)) if not isinstance(a, FunAtom) and a not in table
    ]
    if missing:
        names = ", ".join(sorted(a.display() for a in missing))
        raise EvaluationError(f"no value supplied for: {names}")
    try:
        return _eval_poly(_coerce(e).poly(), table)
    except (_DomainViolation, ZeroDivisionError) as exc:
        raise EvaluationError(str(exc)) from exc


def probably_zero(e: Expr, seeds: int = RAND_EVAL_SEEDS) -> bool:
    """Randomized zero test: exact when no function atoms are present,
    otherwise 32-seed evaluation against the mismatch threshold."""
    e = _coerce(e)
    if not any(isinstance(a, FunAtom) for a in atoms(e, nested=False)):
        return is_identically_zero(e)
    for s in range(seeds):
        if abs(rand_eval(e, s)) > RAND_EVAL_THRESHOLD:
            return False
    return True


# ---------------------------------------------------------------------------
# printing


def to_text(e: Expr) -> str:
    """Render in the input grammar; canonical forms render deterministically."""
    return _render(e, 0)


def _render(e: Expr, prec: int) -> str:
    # precedence levels: 0 sum, 1 product, 2 unary, 3 power operand
    if isinstance(e, Rat):
        v = e.value
        if v.denominator == 1:
            s = str(v.numerator)
        else:
            s = f"{v.numerator}/{v.denominator}"
        if v < 0 and prec >= 1:
            return f"({s})"
        return s
    if isinstance(e, Sym):
        return e.atom.display()
    if isinstance(e, Fun):
        return f"{e.fn}({_render(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _render(e.base, 3)
        if not isinstance(e.base, (Sym, Fun, Rat)) or (
            isinstance(e.base, Rat) and e.base.value < 0
        ):
            base = f"({_render(e.base, 0)})"
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{base}^{exp}"
    if isinstance(e, Mul):
        factors = list(e.factors)
        sign = ""
        if factors and isinstance(factors[0], Rat) and factors[0].value < 0:
            sign = "-"
            c = -factors[0].value
            if c == 1 and len(factors) > 1:
                factors = factors[1:]
            else:
                factors = [Rat(c)] + factors[1:]
        rendered = "*".join(_render(f, 1) for f in factors)
        out = sign + rendered
        if prec >= 1 and sign:
            return f"({out})"
        return out
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            s = _render(t, 0)
            if i == 0:
                parts.append(s)
            elif s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append(" + " + s)
        out = "".join(parts)
        if prec >= 1:
            return f"({out})"
        return out
    raise TypeError(f"not an expression node: {e!r}")
