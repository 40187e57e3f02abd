"""Invariant Hermitian metrics and the Bott-Chern machinery they induce.

Conventions (fixed once, verified by the test suite):

* the fundamental form is ``omega = (i/2) sum_jk h[j][k] e^j ^ ~e^k``, so the
  identity matrix gives ``(i/2) sum_j e^{j~j}``;
* the coframe Gram matrix is ``<e^j, e^k> = 2 (h^-1)_{kj}`` (hence
  ``|e^j|^2 = 2`` for h = I), antiholomorphic legs get the conjugate Gram;
* ``vol = omega^n / n!`` and the C-antilinear star satisfies
  ``beta ^ star(alpha) = <beta, alpha> vol``.

All scalar comparisons against external references are made after dividing
out a single global positive rational constant, which these conventions fix
to 1.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from . import linalg
from .errors import (BidegreeMismatch, PreconditionFailure, RankAmbiguous,
                     SingularMetric)
from .exterior import (Form, FormBundle, LinearOp, Monomial, basis_monomials,
                       wedge_mono)
from .scalars import E_ONE, E_ZERO, GaussRat, ParamExpr, _as_expr


class HermitianMetric:
    """Hermitian coefficient matrix; positivity is certified only at numeric
    samples, symbolic metrics are assumed positive and flagged as such."""

    def __init__(self, n, h):
        self.n = n
        if len(h) != n or any(len(row) != n for row in h):
            raise ValueError(f"metric matrix must be {n}x{n}")
        self.h = [[_as_expr(c) for c in row] for row in h]
        for j in range(n):
            for k in range(n):
                if self.h[j][k] != self.h[k][j].conj():
                    raise ValueError(
                        f"matrix is not Hermitian at entry ({j + 1},{k + 1})")
        self._h_inv = None
        self._gram_hol = None
        self._minors = {"hol": {}, "anti": {}}
        self._vol = None
        self._op_cache = {}

    @staticmethod
    def identity(n) -> "HermitianMetric":
        return HermitianMetric(n, linalg.mat_identity(n))

    @staticmethod
    def diagonal(entries) -> "HermitianMetric":
        n = len(entries)
        h = [[_as_expr(entries[i]) if i == j else E_ZERO for j in range(n)]
             for i in range(n)]
        return HermitianMetric(n, h)

    def is_numeric(self) -> bool:
        return all(c.is_constant() for row in self.h for c in row)

    def h_inverse(self):
        if self._h_inv is None:
            inv = linalg.invert(self.h)
            if inv is None:
                raise SingularMetric("metric matrix is not invertible")
            self._h_inv = inv
        return self._h_inv

    def gram_hol(self):
        """<e^j, e^k> = 2 (h^-1)_{kj}; Hermitian positive definite."""
        if self._gram_hol is None:
            inv = self.h_inverse()
            two = ParamExpr.const(2)
            self._gram_hol = [[two * inv[k][j] for k in range(self.n)]
                              for j in range(self.n)]
        return self._gram_hol

    def _minor(self, kind, rows_mask, cols_mask):
        cache = self._minors[kind]
        key = (rows_mask, cols_mask)
        val = cache.get(key)
        if val is not None:
            return val
        g = self.gram_hol()
        rows = [i for i in range(self.n) if rows_mask & (1 << i)]
        cols = [k for k in range(self.n) if cols_mask & (1 << k)]
        if kind == "hol":
            sub = [[g[i][k] for k in cols] for i in rows]
        else:
            sub = [[g[i][k].conj() for k in cols] for i in rows]
        val = linalg.det(sub)
        cache[key] = val
        return val

    def mono_inner(self, m1: Monomial, m2: Monomial) -> ParamExpr:
        if m1.p != m2.p or m1.q != m2.q:
            return E_ZERO
        return self._minor("hol", m1.hol, m2.hol) * self._minor("anti", m1.anti, m2.anti)

    def positivity_minors(self, assignment=None):
        """Leading principal minors of h, numerically evaluated; raises if a
        symbolic entry survives the assignment."""
        out = []
        for k in range(1, self.n + 1):
            sub = [[self.h[i][j] for j in range(k)] for i in range(k)]
            d = linalg.det(sub)
            if assignment:
                val = d.evaluate(assignment)
            else:
                val = d.to_gaussrat()
            out.append(val)
        return out

    def is_positive_at(self, assignment=None) -> bool:
        try:
            minors = self.positivity_minors(assignment)
        except ValueError:
            return False
        return all(m.is_real() and m.re > 0 for m in minors)


def fundamental_form(h: HermitianMetric) -> Form:
    """The real (1,1)-form (i/2) sum h[j][k] e^{j~k}."""
    n = h.n
    half_i = ParamExpr.const(GaussRat(0, Fraction(1, 2)))
    terms = {}
    for j in range(n):
        for k in range(n):
            c = h.h[j][k]
            if not c.is_zero():
                terms[Monomial(1 << j, 1 << k)] = half_i * c
    return Form(n, 1, 1, terms)


def inner(alpha: Form, beta: Form, h: HermitianMetric) -> ParamExpr:
    """Pointwise Hermitian pairing; linear in alpha, conjugate-linear in beta."""
    if alpha.bidegree != beta.bidegree:
        raise BidegreeMismatch(f"{alpha.bidegree} vs {beta.bidegree}")
    acc = E_ZERO
    for m1, c1 in alpha.terms.items():
        for m2, c2 in beta.terms.items():
            g = h.mono_inner(m1, m2)
            if not g.is_zero():
                acc = acc + c1 * c2.conj() * g
    return acc


def inner_bundle(x: FormBundle, y: FormBundle, h: HermitianMetric) -> ParamExpr:
    acc = E_ZERO
    for bid, f in x.parts.items():
        g = y.parts.get(bid)
        if g is not None:
            acc = acc + inner(f, g, h)
    return acc


def volume_form(h: HermitianMetric) -> Form:
    """vol = omega^n / n! (an exact multiple of the top monomial)."""
    if h._vol is None:
        n = h.n
        omega = fundamental_form(h)
        acc = omega
        for _ in range(n - 1):
            acc = acc.wedge(omega)
        h._vol = acc.scale(Fraction(1, factorial(n)))
        if h._vol.is_zero():
            raise SingularMetric("omega^n vanishes: matrix is singular")
    return h._vol


def star(alpha: Form, h: HermitianMetric) -> Form:
    """C-antilinear Hodge star: beta ^ star(alpha) = <beta, alpha> vol."""
    n = h.n
    p, q = alpha.p, alpha.q
    out = Form(n, n - p, n - q)
    if alpha.is_zero():
        return out
    full = (1 << n) - 1
    top = Monomial(full, full)
    vol = volume_form(h)
    v = vol.coeff(top)
    for mu in basis_monomials(n, p, q):
        # <mu, alpha> is conjugate-linear in alpha
        pair = E_ZERO
        for m, c in alpha.terms.items():
            g = h.mono_inner(mu, m)
            if not g.is_zero():
                pair = pair + c.conj() * g
        if pair.is_zero():
            continue
        comp = Monomial(full & ~mu.hol, full & ~mu.anti)
        sign, t = wedge_mono(mu, comp)
        assert t == top
        coeff = pair * v
        if sign < 0:
            coeff = -coeff
        s = out.terms.get(comp)
        s = coeff if s is None else s + coeff
        if s.is_zero():
            out.terms.pop(comp, None)
        else:
            out.terms[comp] = s
    return out


# ---------------------------------------------------------------------------
# adjoints, Laplacian, cohomology
# ---------------------------------------------------------------------------

def _cached_op(A, h, name, p, q, builder):
    key = (A, name, p, q)
    op = h._op_cache.get(key)
    if op is None:
        op = builder()
        h._op_cache.setdefault(key, op)
    return h._op_cache[key]


def del_star_op(A, h: HermitianMetric, p, q) -> LinearOp:
    """Matrix of -*d'* : (p,q) -> (p-1,q)."""
    def build():
        def action(m):
            st = star(Form.monomial(A.n, m), h)
            return -star(A.del_homog(st), h)
        return LinearOp.from_action(A.n, (p, q), (p - 1, q), action)
    return _cached_op(A, h, "del_star", p, q, build)


def delbar_star_op(A, h: HermitianMetric, p, q) -> LinearOp:
    """Matrix of -*d''* : (p,q) -> (p,q-1)."""
    def build():
        def action(m):
            st = star(Form.monomial(A.n, m), h)
            return -star(A.delbar_homog(st), h)
        return LinearOp.from_action(A.n, (p, q), (p, q - 1), action)
    return _cached_op(A, h, "delbar_star", p, q, build)


def bc_laplacian(A, h: HermitianMetric, p, q) -> LinearOp:
    """The six-term fourth-order Bott-Chern Laplacian on (p,q)."""
    def build():
        dl = A.del_op
        db = A.delbar_op
        dls = lambda pp, qq: del_star_op(A, h, pp, qq)
        dbs = lambda pp, qq: delbar_star_op(A, h, pp, qq)

        def chain(*ops):
            out = ops[0]
            for op in ops[1:]:
                out = op.compose(out)
            return out

        t1 = chain(dls(p, q), dbs(p - 1, q), db(p - 1, q - 1), dl(p - 1, q))
        t2 = chain(db(p, q), dl(p, q + 1), dls(p + 1, q + 1), dbs(p, q + 1))
        t3 = chain(dl(p, q), dbs(p + 1, q), db(p + 1, q - 1), dls(p + 1, q))
        t4 = chain(db(p, q), dls(p, q + 1), dl(p - 1, q + 1), dbs(p, q + 1))
        t5 = chain(dl(p, q), dls(p + 1, q))
        t6 = chain(db(p, q), dbs(p, q + 1))
        return t1 + t2 + t3 + t4 + t5 + t6
    return _cached_op(A, h, "bc_laplacian", p, q, build)


def is_bc_harmonic(alpha: Form, A, h: HermitianMetric):
    """(verdict, residues): harmonic iff d'a = d''a = 0 and d'd''(*a) = 0.

    Cross-checked against membership in ker of the Bott-Chern Laplacian.
    """
    red = A.reduce
    r_del = A.del_homog(alpha).map_coeffs(red)
    r_delbar = A.delbar_homog(alpha).map_coeffs(red)
    st = star(alpha, h)
    r_dd_star = A.del_homog(A.delbar_homog(st)).map_coeffs(red)
    verdict = r_del.is_zero() and r_delbar.is_zero() and r_dd_star.is_zero()
    lap = bc_laplacian(A, h, alpha.p, alpha.q)
    lap_res = lap.apply(alpha).map_coeffs(red)
    if verdict != lap_res.is_zero():
        raise AssertionError(
            "harmonicity routes disagree; adjointness hypothesis violated")
    residues = {"del": r_del, "delbar": r_delbar, "del_delbar_star": r_dd_star,
                "laplacian": lap_res}
    return verdict, residues


def _stack(op1: LinearOp, op2: LinearOp):
    return [list(r) for r in op1.mat] + [list(r) for r in op2.mat]


def ddbar_op(A, p, q) -> LinearOp:
    """d'd'' from (p-1,q-1) into (p,q)."""
    return A.del_op(p - 1, q).compose(A.delbar_op(p - 1, q - 1))


def bc_cohomology(A, h: HermitianMetric, p, q):
    """Invariant-subcomplex Bott-Chern numbers and harmonic representatives.

    Returns a dict: dimension, kernel/image data, harmonic basis (when the
    inputs are numeric), and the 'invariant subcomplex' qualifier.
    """
    n = A.n
    reducer = A.reduce if A.constraints else None
    dim_pq = len(basis_monomials(n, p, q))
    closed_mat = _stack(A.del_op(p, q), A.delbar_op(p, q))
    try:
        k1 = dim_pq - linalg.rank(closed_mat, reducer)
        r = linalg.rank(ddbar_op(A, p, q).mat, reducer)
    except RankAmbiguous:
        raise
    lap = bc_laplacian(A, h, p, q)
    harmonic = None
    numeric = A.is_numeric() and h.is_numeric()
    if numeric:
        vecs = linalg.kernel_basis(lap.mat, dim_pq)
        basis = basis_monomials(n, p, q)
        harmonic = []
        for v in vecs:
            f = Form(n, p, q, {m: c for m, c in zip(basis, v)})
            harmonic.append(f)
    return {
        "complex": "invariant subcomplex",
        "bidegree": (p, q),
        "dimension": k1 - r,
        "closed_dimension": k1,
        "ddbar_rank": r,
        "laplacian_kernel": harmonic,
        "numeric": numeric,
    }


def is_ddbar_exact(alpha: Form, A, h: HermitianMetric):
    """(exact?, witness): solve d'd''(beta) = alpha over (p-1,q-1)-forms.

    Requires alpha to be d'- and d''-closed (PreconditionFailure otherwise).
    """
    red = A.reduce
    r_del = A.del_homog(alpha).map_coeffs(red)
    r_delbar = A.delbar_homog(alpha).map_coeffs(red)
    if not (r_del.is_zero() and r_delbar.is_zero()):
        raise PreconditionFailure(
            "form is not closed under both differentials",
            {"del": r_del, "delbar": r_delbar})
    p, q = alpha.p, alpha.q
    op = ddbar_op(A, p, q)
    rhs = [alpha.coeff(m) for m in basis_monomials(A.n, p, q)]
    reducer = A.reduce if A.constraints else None
    sol = linalg.solve(op.mat, rhs, reducer)
    if sol is None:
        return False, None
    basis = basis_monomials(A.n, p - 1, q - 1)
    witness = Form(A.n, p - 1, q - 1, {m: c for m, c in zip(basis, sol)})
    return True, witness


# ---------------------------------------------------------------------------
# special-metric defects
# ---------------------------------------------------------------------------

def _ddbar_of_power(A, h: HermitianMetric, power: int) -> Form:
    omega = fundamental_form(h)
    if power <= 0:
        return Form(A.n, 1, 1)
    acc = omega
    for _ in range(power - 1):
        acc = acc.wedge(omega)
    ddb = A.del_homog(A.delbar_homog(acc))
    return ddb.map_coeffs(A.reduce)


def skt_defect(A, h: HermitianMetric) -> Form:
    """d'd''(omega); zero iff the metric is pluriclosed."""
    return _ddbar_of_power(A, h, 1)


def astheno_defect(A, h: HermitianMetric) -> Form:
    """d'd''(omega^(n-2))."""
    return _ddbar_of_power(A, h, A.n - 2)


def gauduchon_defect(A, h: HermitianMetric) -> Form:
    """d'd''(omega^(n-1))."""
    return _ddbar_of_power(A, h, A.n - 1)
