"""Lie algebras with invariant complex structure, given by structure equations.

An algebra is the table ``de^k`` of 2-forms on the (1,0) generators; the
conjugate equations are always derived, never input.  Validation checks that
every ``de^k`` has no (0,2) part (integrability) and that d*d = 0 on all
generators (Jacobi), possibly modulo declared polynomial constraints on the
parameters.
"""

from __future__ import annotations

from .errors import IntegrabilityFailure, JacobiFailure, NonReducibleConstraint
from .exterior import Form, FormBundle, LinearOp, Monomial, basis_monomials
from .scalars import (E_ONE, E_ZERO, ParamExpr, _as_expr, _mdiv, _mdivides,
                      _MONE, _pis_one, _plead, _pmul, _pscale, _psub)


class ComplexAlgebra:
    """Validated structure-equation table with memoized operator matrices."""

    def __init__(self, n, d_eta, constraints=(), params=(), real_params=(),
                 _skip_validation=False):
        self.n = n
        self.d_eta = list(d_eta)          # FormBundle per generator, (2,0)+(1,1)
        self.constraints = list(constraints)
        self.params = tuple(params)
        self.real_params = tuple(real_params)
        self._rules = _compile_rules(self.constraints)
        self._op_cache = {}
        self._dbar_eta = [db.conj() for db in self.d_eta]
        if not _skip_validation:
            self._validate()

    # -- construction ---------------------------------------------------------

    @staticmethod
    def build(n, d_eta, constraints=(), params=(), real_params=()):
        """Validate and construct; d_eta maps generator index -> 2-form bundle."""
        table = []
        for k in range(n):
            v = d_eta[k] if k < len(d_eta) and d_eta[k] is not None else FormBundle.zero(n)
            if isinstance(v, Form):
                v = FormBundle.of(v)
            for (p, q) in v.bidegrees():
                if p + q != 2:
                    raise ValueError(f"de^{k + 1} contains a ({p},{q}) component")
            table.append(v)
        return ComplexAlgebra(n, table, constraints, params, real_params)

    def _validate(self):
        bad = {}
        for k, db in enumerate(self.d_eta):
            res = db.component(0, 2).map_coeffs(self.reduce)
            if not res.is_zero():
                bad[k + 1] = res
        if bad:
            raise IntegrabilityFailure(bad)
        bad = {}
        for k, db in enumerate(self.d_eta):
            res = self.d(db).map_coeffs(self.reduce)
            if not res.is_zero():
                bad[k + 1] = res
        if bad:
            raise JacobiFailure(bad)

    def is_numeric(self) -> bool:
        return all(c.is_constant() for db in self.d_eta
                   for f in db.parts.values() for c in f.terms.values())

    # -- the exterior differential on invariant forms --------------------------

    def d_mono(self, m: Monomial) -> FormBundle:
        """d of a basis monomial, via the graded Leibniz rule."""
        out = FormBundle.zero(self.n)
        pos = 0
        for i in range(self.n):
            if m.hol & (1 << i):
                rest = Form.monomial(self.n, Monomial(m.hol & ~(1 << i), m.anti))
                piece = self.d_eta[i].wedge(rest)
                out = out + (piece if pos % 2 == 0 else -piece)
                pos += 1
        for j in range(self.n):
            if m.anti & (1 << j):
                rest = Form.monomial(self.n, Monomial(m.hol, m.anti & ~(1 << j)))
                piece = self._dbar_eta[j].wedge(rest)
                out = out + (piece if pos % 2 == 0 else -piece)
                pos += 1
        return out

    def d(self, x) -> FormBundle:
        """d extended as an antiderivation to forms and bundles."""
        if isinstance(x, Form):
            x = FormBundle.of(x)
        out = FormBundle.zero(self.n)
        for f in x.parts.values():
            for m, c in f.terms.items():
                out = out + self.d_mono(m).scale(c)
        return out

    def del_form(self, x) -> FormBundle:
        """(p+1,q)-components of d, taken per homogeneous source component."""
        src = x.parts if isinstance(x, FormBundle) else {x.bidegree: x}
        out = FormBundle.zero(self.n)
        for (p, q), f in src.items():
            g = self.d(f).component(p + 1, q)
            if not g.is_zero():
                out = out + g
        return out

    def delbar_form(self, x) -> FormBundle:
        src = x.parts if isinstance(x, FormBundle) else {x.bidegree: x}
        out = FormBundle.zero(self.n)
        for (p, q), f in src.items():
            g = self.d(f).component(p, q + 1)
            if not g.is_zero():
                out = out + g
        return out

    def del_homog(self, f: Form) -> Form:
        return self.d(f).component(f.p + 1, f.q)

    def delbar_homog(self, f: Form) -> Form:
        return self.d(f).component(f.p, f.q + 1)

    # -- operator matrices ------------------------------------------------------

    def del_op(self, p, q) -> LinearOp:
        key = ("del", p, q)
        op = self._op_cache.get(key)
        if op is None:
            op = LinearOp.from_action(
                self.n, (p, q), (p + 1, q),
                lambda m: self.d_mono(m).component(p + 1, q))
            self._op_cache.setdefault(key, op)
        return self._op_cache[key]

    def delbar_op(self, p, q) -> LinearOp:
        key = ("delbar", p, q)
        op = self._op_cache.get(key)
        if op is None:
            op = LinearOp.from_action(
                self.n, (p, q), (p, q + 1),
                lambda m: self.d_mono(m).component(p, q + 1))
            self._op_cache.setdefault(key, op)
        return self._op_cache[key]

    def d_components(self, p, q):
        """The two components of d on (p,q): {(p+1,q): del, (p,q+1): delbar}."""
        return {(p + 1, q): self.del_op(p, q), (p, q + 1): self.delbar_op(p, q)}

    # -- constraint reduction ---------------------------------------------------

    def reduce(self, x: ParamExpr) -> ParamExpr:
        """Normal form modulo the declared constraints (leading-monomial
        substitution to fixpoint; sound for zero-testing on the variety)."""
        if not self._rules:
            return x
        num = _reduce_poly(x.num, self._rules)
        den = _reduce_poly(x.den, self._rules)
        if not den:
            raise NonReducibleConstraint(
                "denominator vanishes identically on the constraint variety")
        return ParamExpr(num, den)

    def is_zero_mod(self, x: ParamExpr) -> bool:
        return self.reduce(x).is_zero()


def _compile_rules(constraints):
    """Each constraint c = 0 becomes the rewrite lead(c) -> lead(c) - c/lc."""
    rules = []
    for c in constraints:
        c = _as_expr(c)
        if c.is_zero():
            continue
        num = c.num             # c = 0 iff num = 0 away from den zeros
        if set(num) == {_MONE}:
            raise NonReducibleConstraint("constraint reduces to a nonzero constant")
        m, lc = _plead(num)
        rhs = _pscale(_psub({m: lc}, num), E_ONE.num[_MONE] / lc)
        rules.append((m, rhs))
    return rules


def _reduce_poly(poly, rules):
    cur = dict(poly)
    changed = True
    while changed:
        changed = False
        for lead, rhs in rules:
            hits = [m for m in cur if _mdivides(lead, m)]
            if not hits:
                continue
            changed = True
            for m in hits:
                c = cur.pop(m)
                rest = _mdiv(m, lead)
                for rm, rc in _pmul({rest: c}, rhs).items():
                    s = cur.get(rm)
                    s = rc if s is None else s + rc
                    if s.is_zero():
                        cur.pop(rm, None)
                    else:
                        cur[rm] = s
    return cur


def torus(n: int) -> ComplexAlgebra:
    """The abelian algebra: all structure equations vanish."""
    return ComplexAlgebra.build(n, [FormBundle.zero(n)] * n)
