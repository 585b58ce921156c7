"""Exterior calculus on flat pseudo-Riemannian R^n.

Forms carry expression coefficients that may contain jets of field
components, so d raises jet orders through the kernel's total derivatives.
The metric is constant diagonal, the orientation fixed by
epsilon_{0,...,n-1} = +1, coordinates are named x0..x{n-1}.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import expr as ex
from .expr import Expr, canonicalize, is_identically_zero


class FormError(ex.ExprError):
    pass


class FlatSpace:
    def __init__(self, signature):
        signature = tuple(int(s) for s in signature)
        if any(s not in (-1, 1) for s in signature):
            raise ValueError("signature entries must be +1 or -1")
        self.signature = signature
        self.n = len(signature)
        self.coords = tuple(f"x{i}" for i in range(self.n))

    @property
    def metric_sign(self) -> int:
        """sign(det eta) = (-1)^(number of minus entries)."""
        sign = 1
        for s in self.signature:
            sign *= s
        return sign

    def is_lorentzian(self) -> bool:
        return self.signature.count(-1) == 1 and self.signature[0] == -1

    def coord_expr(self, mu: int) -> Expr:
        return ex.indep(self.coords[mu])

    def volume_indices(self):
        return tuple(range(self.n))

    def __repr__(self):
        return f"FlatSpace(signature={self.signature})"


def euclidean(n: int) -> FlatSpace:
    return FlatSpace([1] * n)


def lorentzian(n: int) -> FlatSpace:
    return FlatSpace([-1] + [1] * (n - 1))


def _merge_sign(i_tuple, j_tuple):
    """Permutation sign that sorts the concatenation; None if indices repeat."""
    seq = list(i_tuple) + list(j_tuple)
    if len(set(seq)) != len(seq):
        return None, ()
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign, tuple(sorted(seq))


class Form:
    """Exterior form with strictly-increasing index tuples as keys."""

    def __init__(self, space: FlatSpace, grade: int, components=None):
        if not 0 <= grade <= space.n:
            raise FormError(f"grade {grade} out of range for n={space.n}")
        self.space = space
        self.grade = grade
        table = {}
        for idx, coeff in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != grade:
                raise FormError(f"index {idx} has wrong length for grade {grade}")
            if list(idx) != sorted(set(idx)):
                raise FormError(f"index {idx} must be strictly increasing")
            if any(not 0 <= m < space.n for m in idx):
                raise FormError(f"index {idx} out of range")
            coeff = canonicalize(ex._coerce(coeff))
            if not is_identically_zero(coeff):
                table[idx] = coeff
        self.components = table

    def component(self, idx) -> Expr:
        """Coefficient for an arbitrary index tuple, with antisymmetry."""
        idx = tuple(idx)
        sign, sorted_idx = _merge_sign(idx, ())
        if sign is None:
            return ex.ZERO
        base = self.components.get(sorted_idx, ex.ZERO)
        return base if sign == 1 else canonicalize(-base)

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "Form") -> "Form":
        self._compatible(other)
        table = dict(self.components)
        for idx, coeff in other.components.items():
            table[idx] = table[idx] + coeff if idx in table else coeff
        return Form(self.space, self.grade, table)

    def __sub__(self, other: "Form") -> "Form":
        return self + other.scale(-1)

    def scale(self, factor) -> "Form":
        factor = ex._coerce(factor)
        return Form(
            self.space,
            self.grade,
            {idx: factor * coeff for idx, coeff in self.components.items()},
        )

    def map_coefficients(self, fn) -> "Form":
        return Form(
            self.space, self.grade, {i: fn(c) for i, c in self.components.items()}
        )

    def _compatible(self, other: "Form"):
        if self.space.signature != other.space.signature:
            raise FormError("forms live on different spaces")
        if self.grade != other.grade:
            raise FormError(f"grade mismatch: {self.grade} vs {other.grade}")

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if self.space.signature != other.space.signature or self.grade != other.grade:
            return False
        return (self - other).is_zero()

    def __repr__(self):
        if self.is_zero():
            return f"Form({self.grade}-form, 0)"
        parts = []
        for idx, coeff in sorted(self.components.items()):
            basis = "^".join(f"dx{m}" for m in idx) or "1"
            parts.append(f"({ex.to_text(coeff)}) {basis}")
        return f"Form({self.grade}-form, " + " + ".join(parts) + ")"


class SpacetimeVector:
    def __init__(self, space: FlatSpace, components):
        components = [canonicalize(ex._coerce(c)) for c in components]
        if len(components) != space.n:
            raise FormError("vector has wrong number of components")
        self.space = space
        self.components = tuple(components)

    def __repr__(self):
        inside = ", ".join(ex.to_text(c) for c in self.components)
        return f"SpacetimeVector({inside})"


def zero_form(space: FlatSpace, grade: int) -> Form:
    return Form(space, grade)


def scalar(space: FlatSpace, value) -> Form:
    return Form(space, 0, {(): value})


def basis_form(space: FlatSpace, *indices) -> Form:
    return Form(space, len(indices), {tuple(indices): ex.ONE})


def volume_form(space: FlatSpace) -> Form:
    return basis_form(space, *space.volume_indices())


def field_form(space: FlatSpace, name: str, grade: int) -> Form:
    """Symbolic field of the given grade: one jet field per component,
    named e.g. F01 for the (0,1) component."""
    comps = {}
    for idx in itertools.combinations(range(space.n), grade):
        comps[idx] = ex.jet(name + "".join(str(m) for m in idx))
    return Form(space, grade, comps)


def translation(space: FlatSpace, mu: int) -> SpacetimeVector:
    return SpacetimeVector(
        space, [ex.ONE if i == mu else ex.ZERO for i in range(space.n)]
    )


def rotation(space: FlatSpace, mu: int, nu: int) -> SpacetimeVector:
    """Rotation/boost generator x_mu d_nu - x_nu d_mu (indices lowered
    with the metric)."""
    comps = [ex.ZERO] * space.n
    comps[nu] = ex.rational(space.signature[mu]) * space.coord_expr(mu)
    comps[mu] = -ex.rational(space.signature[nu]) * space.coord_expr(nu)
    return SpacetimeVector(space, comps)


def dilation(space: FlatSpace) -> SpacetimeVector:
    return SpacetimeVector(space, [space.coord_expr(i) for i in range(space.n)])


# ---------------------------------------------------------------------------
# operations


def wedge(a: Form, b: Form) -> Form:
    if a.space.signature != b.space.signature:
        raise FormError("forms live on different spaces")
    grade = a.grade + b.grade
    if grade > a.space.n:
        raise FormError(f"wedge grade {grade} exceeds dimension {a.space.n}")
    table = {}
    for i_idx, i_coeff in a.components.items():
        for j_idx, j_coeff in b.components.items():
            sign, idx = _merge_sign(i_idx, j_idx)
            if sign is None:
                continue
            term = ex.rational(sign) * i_coeff * j_coeff
            table[idx] = table[idx] + term if idx in table else term
    return Form(a.space, grade, table)


def exterior_d(a: Form) -> Form:
    if a.grade >= a.space.n:
        raise FormError(f"d of a grade-{a.grade} form exceeds dimension {a.space.n}")
    table = {}
    for idx, coeff in a.components.items():
        for mu in range(a.space.n):
            if mu in idx:
                continue
            d_coeff = ex.total_derivative(coeff, a.space.coords[mu])
            if is_identically_zero(d_coeff):
                continue
            sign, new_idx = _merge_sign((mu,), idx)
            term = ex.rational(sign) * d_coeff
            table[new_idx] = table[new_idx] + term if new_idx in table else term
    return Form(a.space, a.grade + 1, table)


def hodge(a: Form) -> Form:
    """(*a)_J = a^I epsilon_{I J} with indices raised by the diagonal metric
    and epsilon_{0...n-1} = +1."""
    space = a.space
    table = {}
    full = set(range(space.n))
    for idx, coeff in a.components.items():
        complement = tuple(sorted(full - set(idx)))
        sign, _ = _merge_sign(idx, complement)
        raised = Fraction(1)
        for m in idx:
            raised *= space.signature[m]
        table[complement] = ex.rational(sign * raised) * coeff
    return Form(space, space.n - a.grade, table)


def double_hodge_sign(space: FlatSpace, grade: int) -> int:
    """The sign s with ** = s * Id on the given grade."""
    return (-1) ** (grade * (space.n - grade)) * space.metric_sign


def interior(xi: SpacetimeVector, a: Form) -> Form:
    if a.grade == 0:
        raise FormError("interior product needs grade >= 1")
    table = {}
    for idx, coeff in a.components.items():
        for pos, mu in enumerate(idx):
            term = ex.rational((-1) ** pos) * xi.components[mu] * coeff
            new_idx = idx[:pos] + idx[pos + 1 :]
            table[new_idx] = table[new_idx] + term if new_idx in table else term
    return Form(a.space, a.grade - 1, table)


def lie_derivative(xi: SpacetimeVector, a: Form) -> Form:
    """Cartan formula i_xi d + d i_xi with the grade-edge terms dropped
    where they do not exist (grade 0 has no interior product, grade n no d)."""
    space = a.space
    terms = []
    if a.grade < space.n:
        terms.append(interior(xi, exterior_d(a)))
    if a.grade > 0:
        terms.append(exterior_d(interior(xi, a)))
    if not terms:
        return zero_form(space, a.grade)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def pairing_density(a: Form, b: Form) -> Form:
    """(a, b) density: a ^ *b, an n-form, symmetric in its arguments."""
    a._compatible(b)
    return wedge(a, hodge(b))


def selfdual_project(a: Form):
    """Split a middle form on Lorentzian R^{4k+2} into (self-dual,
    anti-self-dual) star eigenparts."""
    space = a.space
    if space.n % 4 != 2:
        raise FormError("self-duality needs dimension n = 4k + 2")
    if not space.is_lorentzian():
        raise FormError("self-duality needs Lorentzian signature (-,+,...,+)")
    if a.grade != space.n // 2:
        raise FormError("self-duality is defined for middle-grade forms")
    star = hodge(a)
    half = ex.rational(1, 2)
    plus = (a + star).scale(half)
    minus = (a - star).scale(half)
    return plus, minus


def conformal_killing_check(xi: SpacetimeVector, space: FlatSpace) -> str:
    """Classify a vector field: 'killing', 'conformal' or 'neither' from the
    flat-metric deformation d_mu xi_nu + d_nu xi_mu."""
    n = space.n
    lowered = [
        canonicalize(ex.rational(space.signature[m]) * xi.components[m])
        for m in range(n)
    ]
    deformation = {}
    for mu in range(n):
        for nu in range(mu, n):
            k = canonicalize(
                ex.total_derivative(lowered[nu], space.coords[mu])
                + ex.total_derivative(lowered[mu], space.coords[nu])
            )
            deformation[(mu, nu)] = k
    if all(is_identically_zero(k) for k in deformation.values()):
        return "killing"
    divergence = ex.ZERO
    for mu in range(n):
        divergence = divergence + ex.total_derivative(xi.components[mu], space.coords[mu])
    for (mu, nu), k in deformation.items():
        target = ex.ZERO
        if mu == nu:
            target = ex.rational(2 * space.signature[mu], n) * divergence
        if not is_identically_zero(k - target):
            return "neither"
    return "conformal"
