"""Field-theory model families: p-form, self-dual and chiral-boson systems.

Each model packages its equations of motion, anchor operators (built from
the pairing adjoint of the declared V*), characteristics of space-time or
internal symmetries, conserved currents with exact jet-level certificates,
and energy-momentum extraction.  All sign choices flow from the frozen
Hodge convention; see conventions.CONVENTION_SHEET.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import expr as ex
from . import forms as fo
from .expr import Expr, canonicalize, is_identically_zero
from .forms import FlatSpace, Form, SpacetimeVector
from .linop import LinDiffOp, ShellRules, linearize


class FieldModelError(ex.ExprError):
    pass


# ---------------------------------------------------------------------------
# component representation of form operators


def grade_basis(space: FlatSpace, k: int):
    return list(itertools.combinations(range(space.n), k))


def form_to_vector(form: Form, basis=None):
    basis = basis if basis is not None else grade_basis(form.space, form.grade)
    return [form.components.get(idx, ex.ZERO) for idx in basis]


def vector_to_form(space: FlatSpace, grade: int, vec) -> Form:
    basis = grade_basis(space, grade)
    if len(vec) != len(basis):
        raise FieldModelError("component vector has the wrong length")
    return Form(space, grade, dict(zip(basis, vec)))


def d_operator(space: FlatSpace, k: int) -> LinDiffOp:
    """Exterior derivative as a matrix operator on components."""
    dom = grade_basis(space, k)
    cod = grade_basis(space, k + 1)
    cod_pos = {idx: r for r, idx in enumerate(cod)}
    entries = {}
    for c, idx in enumerate(dom):
        for mu in range(space.n):
            if mu in idx:
                continue
            sign, new_idx = fo._merge_sign((mu,), idx)
            key = (cod_pos[new_idx], c, ex.MultiIndex({space.coords[mu]: 1}))
            coeff = ex.rational(sign)
            entries[key] = entries[key] + coeff if key in entries else coeff
    return LinDiffOp(len(cod), len(dom), entries)


def hodge_operator(space: FlatSpace, k: int) -> LinDiffOp:
    dom = grade_basis(space, k)
    cod = grade_basis(space, space.n - k)
    cod_pos = {idx: r for r, idx in enumerate(cod)}
    entries = {}
    full = set(range(space.n))
    for c, idx in enumerate(dom):
        complement = tuple(sorted(full - set(idx)))
        sign, _ = fo._merge_sign(idx, complement)
        raised = 1
        for m in idx:
            raised *= space.signature[m]
        entries[(cod_pos[complement], c, ex.EMPTY_INDEX)] = ex.rational(sign * raised)
    return LinDiffOp(len(cod), len(dom), entries)


def metric_weights(space: FlatSpace, k: int):
    """Diagonal weights of the inner product (A, B) = sum_I w_I A_I B_I."""
    out = []
    for idx in grade_basis(space, k):
        w = 1
        for m in idx:
            w *= space.signature[m]
        out.append(w)
    return out


def _diag(values) -> LinDiffOp:
    n = len(values)
    return LinDiffOp(
        n, n, {(i, i, ex.EMPTY_INDEX): ex.rational(v) for i, v in enumerate(values)}
    )


def pairing_adjoint(op: LinDiffOp, weights_in, weights_out) -> LinDiffOp:
    """Adjoint with respect to weighted pairings on domain and codomain:
    (op P, W)_out = (adj W, P)_in up to a total divergence."""
    return _diag(weights_in).compose(op.formal_adjoint()).compose(_diag(weights_out))


def _vstack(top: LinDiffOp, bottom: LinDiffOp) -> LinDiffOp:
    if top.cols != bottom.cols:
        raise ValueError("column mismatch in stack")
    entries = dict(top.entries)
    for (r, c, a), v in bottom.entries.items():
        entries[(r + top.rows, c, a)] = v
    return LinDiffOp(top.rows + bottom.rows, top.cols, entries)


def _block(op: LinDiffOp, copies: int) -> LinDiffOp:
    entries = {}
    for k in range(copies):
        for (r, c, a), v in op.entries.items():
            entries[(r + k * op.rows, c + k * op.cols, a)] = v
    return LinDiffOp(op.rows * copies, op.cols * copies, entries)


def _d_or_zero(form: Form) -> Form:
    if form.grade == form.space.n:
        return fo.zero_form(form.space, form.space.n)
    return fo.exterior_d(form)


# ---------------------------------------------------------------------------
# p-form model


class PFormModel:
    """Field strength F of grade p with equations dF = 0, d*F = 0 and the
    two-parameter anchor <W, V*(P)> = a (W1, dP) + b (W2, d*P)."""

    def __init__(self, space: FlatSpace, p: int, a, b, field_name: str = "F"):
        if not 1 <= p <= space.n - 1:
            raise FieldModelError(f"need 1 <= p <= n-1, got p={p}, n={space.n}")
        self.space = space
        self.p = p
        self.a = canonicalize(ex._coerce(a))
        self.b = canonicalize(ex._coerce(b))
        self.field_name = field_name
        self.F = fo.field_form(space, field_name, p)
        self.fields = [
            field_name + "".join(str(m) for m in idx)
            for idx in grade_basis(space, p)
        ]

    @property
    def sigma(self) -> int:
        return self.space.metric_sign

    # equations ----------------------------------------------------------
    def residuals(self):
        return fo.exterior_d(self.F), fo.exterior_d(fo.hodge(self.F))

    def residual_components(self):
        t1, t2 = self.residuals()
        return form_to_vector(t1) + form_to_vector(t2)

    def noether_identity_check(self) -> bool:
        t1, t2 = self.residuals()
        return _d_or_zero(t1).is_zero() and _d_or_zero(t2).is_zero()

    def shell(self) -> ShellRules:
        return ShellRules(self.residual_components(), self.space.coords)

    # characteristics and currents ----------------------------------------
    def _check_vector(self, xi: SpacetimeVector) -> str:
        verdict = fo.conformal_killing_check(xi, self.space)
        if verdict == "killing":
            return verdict
        if verdict == "conformal" and self.space.n == 2 * self.p:
            return verdict
        raise FieldModelError(
            f"vector field is {verdict}; need killing, or conformal in the "
            f"critical dimension n = 2p"
        )

    def killing_characteristic(self, xi: SpacetimeVector):
        self._check_vector(xi)
        n, p = self.space.n, self.p
        starF = fo.hodge(self.F)
        sign1 = self.sigma * (-1) ** ((n - p) * (p - 1))
        sign2 = self.sigma * (-1) ** (p - 1)
        psi1 = fo.hodge(fo.interior(xi, starF)).scale(sign1)
        psi2 = fo.hodge(fo.interior(xi, self.F)).scale(sign2)
        return psi1, psi2

    def killing_current(self, xi: SpacetimeVector):
        """Current j and the exact certificate
        (Psi1, T1) + (Psi2, T2) - dj = 0, returned as (j, ok, residual)."""
        self._check_vector(xi)
        p = self.p
        starF = fo.hodge(self.F)
        j = (
            fo.wedge(fo.interior(xi, self.F), starF)
            + fo.wedge(self.F, fo.interior(xi, starF)).scale((-1) ** (p - 1))
        ).scale(ex.rational(1, 2))
        psi1, psi2 = self.killing_characteristic(xi)
        t1, t2 = self.residuals()
        residual = (
            fo.pairing_density(psi1, t1)
            + fo.pairing_density(psi2, t2)
            - fo.exterior_d(j)
        )
        return j, residual.is_zero(), residual

    def energy_momentum(self):
        """T_{mu nu} read from *j for the n translations; asserts symmetry
        and (in the critical dimension) tracelessness."""
        n = self.space.n
        matrix = []
        for mu in range(n):
            j, ok, residual = self.killing_current(fo.translation(self.space, mu))
            if not ok:
                raise FieldModelError(
                    f"current certificate failed for translation {mu}: {residual!r}"
                )
            sj = fo.hodge(j)
            matrix.append([sj.component((nu,)) for nu in range(n)])
        for mu in range(n):
            for nu in range(mu + 1, n):
                gap = canonicalize(matrix[mu][nu] - matrix[nu][mu])
                if not is_identically_zero(gap):
                    raise FieldModelError(
                        f"energy-momentum not symmetric at ({mu},{nu}): "
                        f"{ex.to_text(gap)}"
                    )
        if n == 2 * self.p:
            trace = ex.ZERO
            for mu in range(n):
                trace = trace + ex.rational(self.space.signature[mu]) * matrix[mu][mu]
            if not is_identically_zero(canonicalize(trace)):
                raise FieldModelError("energy-momentum trace does not vanish")
        return matrix

    # anchor ---------------------------------------------------------------
    def anchor_ops(self):
        """(V, V*) as component operators; V is the pairing adjoint of V*."""
        space, p = self.space, self.p
        d_p = d_operator(space, p)
        d_dual = d_operator(space, space.n - p).compose(hodge_operator(space, p))
        vstar = _vstack(d_p.scale(self.a), d_dual.scale(self.b))
        w_in = metric_weights(space, p)
        w_out = metric_weights(space, p + 1) + metric_weights(space, space.n - p + 1)
        v = pairing_adjoint(vstar, w_in, w_out)
        return v, vstar

    def linearization(self) -> LinDiffOp:
        return linearize(self.residual_components(), self.fields)

    def anchor_verify(self):
        """Definition check J o V = V* o J*; exact (field-independent
        operators), reported as (ok, residual operator)."""
        v, vstar = self.anchor_ops()
        j_op = self.linearization()
        w_in = metric_weights(self.space, self.p)
        w_out = metric_weights(self.space, self.p + 1) + metric_weights(
            self.space, self.space.n - self.p + 1
        )
        j_star = pairing_adjoint(j_op, w_in, w_out)
        lhs = j_op.compose(v)
        rhs = vstar.compose(j_star)
        residual = lhs - rhs
        return residual.is_zero(), residual

    def triviality_witness(self):
        """G with V* = J o G when a = b (the trivial anchor); None otherwise."""
        if not is_identically_zero(self.a - self.b):
            return None
        g = LinDiffOp.identity(len(self.fields)).scale(self.a)
        certificate = self.linearization().compose(g)
        _, vstar = self.anchor_ops()
        if not (vstar - certificate).is_zero():
            raise FieldModelError("trivial-anchor certificate failed")
        return g

    def proper_symmetry(self, xi: SpacetimeVector):
        """delta F = V(Psi) reduces on shell to (a - b) L_xi F; returns
        (ok, residual form)."""
        psi1, psi2 = self.killing_characteristic(xi)
        v, _ = self.anchor_ops()
        delta = v.apply(form_to_vector(psi1) + form_to_vector(psi2))
        delta_form = vector_to_form(self.space, self.p, delta)
        expected = fo.lie_derivative(xi, self.F).scale(self.a - self.b)
        residual = (delta_form - expected).map_coefficients(self.shell().reduce)
        return residual.is_zero(), residual

    def kernel_forms(self):
        """V*(P) for a symbolic p-form P, organized as the two form slots;
        for nonzero rational a, b their zero sets are dP = 0 and d*P = 0."""
        space, p = self.space, self.p
        P = fo.field_form(space, "P", p)
        _, vstar = self.anchor_ops()
        out = vstar.apply(form_to_vector(P))
        dim1 = len(grade_basis(space, p + 1))
        slot1 = vector_to_form(space, p + 1, out[:dim1])
        slot2 = vector_to_form(space, space.n - p + 1, out[dim1:])
        return slot1, slot2


# ---------------------------------------------------------------------------
# self-dual model


class SelfDualModel:
    """Self-dual middle form H on Lorentzian R^{4k+2} with T = dH and the
    anchor <W, V*(P)> = (W, dP) for anti-self-dual P."""

    def __init__(self, space: FlatSpace, field_name: str = "H"):
        if space.n % 4 != 2 or not space.is_lorentzian():
            raise FieldModelError("self-dual fields need Lorentzian R^{4k+2}")
        self.space = space
        self.field_name = field_name
        raw = fo.field_form(space, field_name, space.n // 2)
        self.H, _ = fo.selfdual_project(raw)
        self.mid = space.n // 2
        self.fields = [
            field_name + "".join(str(m) for m in idx)
            for idx in grade_basis(space, self.mid)
        ]

    def residual(self) -> Form:
        return fo.exterior_d(self.H)

    def shell(self) -> ShellRules:
        return ShellRules(form_to_vector(self.residual()), self.space.coords)

    def noether_identity_check(self) -> bool:
        return _d_or_zero(self.residual()).is_zero()

    def anchor_ops(self):
        """V = (self-dual projection) o pairing-adjoint of P -> dP on middle
        components; isotropy of the dual pairing makes the projection exact."""
        space = self.space
        d_mid = d_operator(space, self.mid)
        w_mid = metric_weights(space, self.mid)
        w_out = metric_weights(space, self.mid + 1)
        adjoint = pairing_adjoint(d_mid, w_mid, w_out)
        star = hodge_operator(space, self.mid)
        plus = (LinDiffOp.identity(star.rows) + star).scale(ex.rational(1, 2))
        return plus.compose(adjoint), d_mid

    def characteristic(self, xi: SpacetimeVector) -> Form:
        return fo.hodge(fo.interior(xi, self.H)).scale(-1)

    def current(self, xi: SpacetimeVector) -> Form:
        return fo.wedge(fo.interior(xi, self.H), self.H).scale(ex.rational(1, 2))

    def _check_vector(self, xi: SpacetimeVector):
        verdict = fo.conformal_killing_check(xi, self.space)
        if verdict not in ("killing", "conformal"):
            raise FieldModelError("self-dual certificates need a conformal Killing vector")
        return verdict

    def verify(self, xi: SpacetimeVector):
        """Both certificates; returns (ok, payload dict with residual texts)."""
        self._check_vector(xi)
        psi = self.characteristic(xi)
        t = self.residual()
        j = self.current(xi)
        isotropy = fo.wedge(self.H, fo.lie_derivative(xi, self.H))
        current_residual = fo.pairing_density(psi, t) - fo.exterior_d(j)
        v, _ = self.anchor_ops()
        delta = vector_to_form(
            self.space, self.mid, v.apply(form_to_vector(psi))
        )
        shell = self.shell()
        transform_residual = (delta - fo.lie_derivative(xi, self.H)).map_coefficients(
            shell.reduce
        )
        payload = {
            "isotropy_identity": _form_text(isotropy),
            "current_residual": _form_text(current_residual),
            "transform_residual": _form_text(transform_residual),
        }
        ok = (
            isotropy.is_zero()
            and current_residual.is_zero()
            and transform_residual.is_zero()
        )
        return ok, payload

    def energy_momentum(self):
        n = self.space.n
        matrix = []
        for mu in range(n):
            sj = fo.hodge(self.current(fo.translation(self.space, mu)))
            matrix.append([sj.component((nu,)) for nu in range(n)])
        for mu in range(n):
            for nu in range(mu + 1, n):
                gap = canonicalize(matrix[mu][nu] - matrix[nu][mu])
                if not is_identically_zero(gap):
                    raise FieldModelError("self-dual energy-momentum not symmetric")
        trace = ex.ZERO
        for mu in range(n):
            trace = trace + ex.rational(self.space.signature[mu]) * matrix[mu][mu]
        if not is_identically_zero(canonicalize(trace)):
            raise FieldModelError("self-dual energy-momentum trace does not vanish")
        return matrix


def _form_text(form: Form) -> str:
    if form.is_zero():
        return "0"
    parts = []
    for idx, coeff in sorted(form.components.items()):
        basis = "^".join(f"dx{m}" for m in idx) or "1"
        parts.append(f"({ex.to_text(coeff)}) {basis}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Lie algebras and the chiral model


class LieAlgebra:
    """Structure constants f^{ab}_c with [t^a, t^b] = f^{ab}_c t^c and a
    diagonal Killing metric; antisymmetry and the Jacobi identity are
    validated exactly at construction."""

    def __init__(self, n: int, f, kappa=None):
        self.n = n
        table = {}
        for (a, b, c), value in f.items():
            value = Fraction(value)
            if value:
                table[(a, b, c)] = value
        self.f = table
        self.kappa = [Fraction(k) for k in (kappa or [1] * n)]
        if len(self.kappa) != n or any(k == 0 for k in self.kappa):
            raise FieldModelError("Killing metric must be diagonal invertible")
        self._validate()

    def structure(self, a, b, c) -> Fraction:
        return self.f.get((a, b, c), Fraction(0))

    def _validate(self):
        n = self.n
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.structure(a, b, c) != -self.structure(b, a, c):
                        raise FieldModelError("structure constants are not antisymmetric")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        total = Fraction(0)
                        for e in range(n):
                            total += self.structure(a, b, e) * self.structure(e, c, d)
                            total += self.structure(b, c, e) * self.structure(e, a, d)
                            total += self.structure(c, a, e) * self.structure(e, b, d)
                        if total:
                            raise FieldModelError("Jacobi identity fails")

    def scaled(self, factor: Fraction) -> "LieAlgebra":
        return LieAlgebra(
            self.n,
            {key: factor * v for key, v in self.f.items()},
            self.kappa,
        )


def su2() -> LieAlgebra:
    """The catalog su(2): f^{ab}_c = epsilon_{abc}, Killing metric frozen to
    the identity normalization."""
    eps = {}
    for a, b, c in itertools.permutations(range(3)):
        eps[(a, b, c)] = Fraction(_sign_of_permutation((a, b, c)))
    return LieAlgebra(3, eps)


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(n, {})


def _sign_of_permutation(seq) -> int:
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


ALGEBRAS = {"su2": su2, "abelian3": lambda: abelian(3), "abelian1": lambda: abelian(1)}


class ChiralModel:
    """Multiplet of N self-dual 1-forms on Lorentzian R^2 with equations
    dH_a = 0 and anchor <W, V*(P)> = (W^a, dP_a + g [P, H]_a)."""

    def __init__(self, space: FlatSpace, algebra: LieAlgebra, g, prefix: str = "H"):
        if space.n != 2 or not space.is_lorentzian():
            raise FieldModelError("the chiral model lives on Lorentzian R^2")
        self.space = space
        self.algebra = algebra
        self.N = algebra.n
        self.g = canonicalize(ex._coerce(g))
        self.prefix = prefix
        self.components = [
            SelfDualModel(space, f"{prefix}{a + 1}") for a in range(self.N)
        ]
        self.H = [m.H for m in self.components]
        self.mid_dim = len(grade_basis(space, 1))
        self.out_dim = len(grade_basis(space, 2))

    def residuals(self):
        return [fo.exterior_d(h) for h in self.H]

    def shell(self) -> ShellRules:
        eqs = []
        for t in self.residuals():
            eqs.extend(form_to_vector(t))
        return ShellRules(eqs, self.space.coords)

    def bracket_form(self, a_forms, b_forms):
        """[A, B]_c = f^{ab}_c A_a ^ B_b for algebra-valued forms."""
        out = []
        for c in range(self.N):
            acc = fo.zero_form(self.space, a_forms[0].grade + b_forms[0].grade)
            for a in range(self.N):
                for b in range(self.N):
                    coeff = self.algebra.structure(a, b, c)
                    if coeff:
                        acc = acc + fo.wedge(a_forms[a], b_forms[b]).scale(coeff)
            out.append(acc)
        return out

    def anchor_ops(self):
        """Stacked (V, V*); the g-term enters V* as a field-dependent
        zero-order operator and V by the weighted adjoint plus self-dual
        projection."""
        space = self.space
        d_mid = d_operator(space, 1)
        base = _block(d_mid, self.N)
        # the zero-order wedge-with-H operator: P_a -> g f^{ab}_c P_a ^ H_b
        basis1 = grade_basis(space, 1)
        basis2 = grade_basis(space, 2)
        entries = {}
        for c_alg in range(self.N):
            for a_alg in range(self.N):
                for b_alg in range(self.N):
                    f_abc = self.algebra.structure(a_alg, b_alg, c_alg)
                    if not f_abc:
                        continue
                    # wedge of the unit 1-form basis with H_{b_alg}
                    for col, i_idx in enumerate(basis1):
                        for j_idx, h_coeff in self.H[b_alg].components.items():
                            sign, merged = fo._merge_sign(i_idx, j_idx)
                            if sign is None:
                                continue
                            row = basis2.index(merged)
                            key = (
                                c_alg * self.out_dim + row,
                                a_alg * self.mid_dim + col,
                                ex.EMPTY_INDEX,
                            )
                            term = ex.rational(f_abc * sign) * self.g * h_coeff
                            entries[key] = (
                                entries[key] + term if key in entries else term
                            )
        wedge_op = LinDiffOp(self.out_dim * self.N, self.mid_dim * self.N, entries)
        vstar = base + wedge_op
        w_in = metric_weights(space, 1) * self.N
        w_out = metric_weights(space, 2) * self.N
        kappa_in = []
        kappa_out = []
        for a_alg in range(self.N):
            kappa_in.extend([self.algebra.kappa[a_alg]] * self.mid_dim)
            kappa_out.extend([self.algebra.kappa[a_alg]] * self.out_dim)
        w_in = [w * k for w, k in zip(w_in, kappa_in)]
        w_out = [w * k for w, k in zip(w_out, kappa_out)]
        adjoint = pairing_adjoint(vstar, w_in, w_out)
        star = hodge_operator(space, 1)
        plus = (LinDiffOp.identity(star.rows) + star).scale(ex.rational(1, 2))
        return _block(plus, self.N).compose(adjoint), vstar

    def internal_characteristic(self, epsilon):
        """Psi_a = -*epsilon_a for a constant algebra element."""
        eps = [canonicalize(ex._coerce(c)) for c in epsilon]
        if len(eps) != self.N:
            raise FieldModelError("epsilon has the wrong number of components")
        for c in eps:
            for atom in ex.atoms(c):
                if not isinstance(atom, ex.Param):
                    raise FieldModelError("epsilon must be constant (rigid parameter)")
        return [
            fo.hodge(fo.scalar(self.space, c)).scale(-1) for c in eps
        ], eps

    def verify(self, epsilon):
        """The four certificates; returns (ok, payload)."""
        psi, eps = self.internal_characteristic(epsilon)
        residuals = self.residuals()

        # (i) d(eps^a H_a) = eps^a T_a exactly
        j = fo.zero_form(self.space, 1)
        expected = fo.zero_form(self.space, 2)
        for a in range(self.N):
            weight = self.algebra.kappa[a] * eps[a]
            j = j + self.H[a].scale(weight)
            expected = expected + residuals[a].scale(weight)
        current_residual = fo.exterior_d(j) - expected

        # (ii) V(Psi) = -g [eps, H] exactly
        v, _ = self.anchor_ops()
        stacked = []
        for a in range(self.N):
            stacked.extend(form_to_vector(psi[a]))
        delta_vec = v.apply(stacked)
        delta = [
            vector_to_form(
                self.space, 1, delta_vec[a * self.mid_dim : (a + 1) * self.mid_dim]
            )
            for a in range(self.N)
        ]
        eps_forms = [fo.scalar(self.space, c) for c in eps]
        target = self.bracket_form(eps_forms, self.H)
        shell = self.shell()
        transform_residual = []
        for a in range(self.N):
            r = delta[a] + target[a].scale(self.g)
            transform_residual.append(r.map_coefficients(shell.reduce))

        # (iii) the transformation is a symmetry: d(delta H_a) = 0 on shell
        symmetry_residual = [
            fo.exterior_d(delta[a]).map_coefficients(shell.reduce)
            for a in range(self.N)
        ]

        # (iv) bracket structure constants -g f_{ab}^c satisfy Jacobi
        try:
            if isinstance(self.g, ex.Rat):
                self.algebra.scaled(-self.g.value)
            else:
                self.algebra.scaled(Fraction(-1))
            bracket_ok = True
        except FieldModelError:
            bracket_ok = False

        payload = {
            "current_residual": _form_text(current_residual),
            "transform_residual": [_form_text(r) for r in transform_residual],
            "symmetry_residual": [_form_text(r) for r in symmetry_residual],
            "bracket_jacobi": bracket_ok,
        }
        ok = (
            current_residual.is_zero()
            and all(r.is_zero() for r in transform_residual)
            and all(r.is_zero() for r in symmetry_residual)
            and bracket_ok
        )
        return ok, payload

    def spacetime_verify(self, xi: SpacetimeVector):
        """Space-time certificates per multiplet component (the conformal
        symmetries keep the abelian form)."""
        payloads = []
        ok = True
        for component in self.components:
            c_ok, payload = component.verify(xi)
            ok = ok and c_ok
            payloads.append(payload)
        return ok, payloads

    def abelian_block(self, a: int) -> LinDiffOp:
        """The (a, a) block of V at g = 0 for degeneration comparisons.
        Rows of V run over middle-form components, columns over the
        2-form slots of the dual dynamics bundle."""
        zero_g = ChiralModel(self.space, self.algebra, 0, self.prefix)
        v, _ = zero_g.anchor_ops()
        entries = {}
        for (r, c, alpha), coeff in v.entries.items():
            if (
                a * self.mid_dim <= r < (a + 1) * self.mid_dim
                and a * self.out_dim <= c < (a + 1) * self.out_dim
            ):
                entries[(r - a * self.mid_dim, c - a * self.out_dim, alpha)] = coeff
        return LinDiffOp(self.mid_dim, self.out_dim, entries)
